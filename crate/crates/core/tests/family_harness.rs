use hodgekit::corpus;
use hodgekit::family::{
    sample_family, smoothness_report, verify_commutation, DifferenceScheme, Family, FamilySpec, FAMILY_NAMES,
};
use hodgekit::{build_metric, HodgeSystem, Scheme};

fn torus8() -> HodgeSystem {
    HodgeSystem::new(build_metric(corpus::flat_torus(8).unwrap(), Scheme::Whitney).unwrap())
}

#[test]
fn forward_rates_are_first_order() {
    let s = torus8();
    for name in FAMILY_NAMES {
        let family = Family::new(FamilySpec::standard(name, 1, 5).unwrap(), s.metric().complex()).unwrap();
        let report = verify_commutation(&family, &s, DifferenceScheme::Forward, 1).unwrap();
        assert!(report.linearity.iter().all(|c| c.max_residual <= 1e-10), "{name}");
        for series in report.convergence.iter().filter(|c| c.rate_expected) {
            assert!(series.rate.unwrap() >= 0.9, "{name}: {series:?}");
        }
    }
}

#[test]
fn second_differences_converge_for_sine() {
    let s = torus8();
    let family = Family::new(FamilySpec::standard("sine", 2, 5).unwrap(), s.metric().complex()).unwrap();
    let report = smoothness_report(&family, &s, 1, 2).unwrap();
    let second: Vec<_> = report.convergence.iter().filter(|c| c.order == 2).collect();
    assert_eq!(second.len(), 2);
    for series in second {
        assert!((1.8..=2.2).contains(&series.rate.unwrap()), "{series:?}");
    }
}

#[test]
fn families_stay_exact_on_the_sphere() {
    let s = HodgeSystem::new(build_metric(corpus::octahedron_sphere(1).unwrap(), Scheme::Whitney).unwrap());
    let mut spec = FamilySpec::standard("exp-cos", 1, 9).unwrap();
    spec.grid = hodgekit::family::ParamGrid::uniform(0.0, 1.0, 9, 1).unwrap();
    let family = Family::new(spec, s.metric().complex()).unwrap();
    let samples = sample_family(&family, &s).unwrap();
    assert_eq!(samples.len(), 9);
    assert!(samples.iter().all(|x| x.exactness.exact));
}
