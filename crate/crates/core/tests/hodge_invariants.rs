use hodgekit::corpus;
use hodgekit::{build_metric, Cochain, HodgeSystem, Scheme};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn systems() -> &'static [HodgeSystem] {
    static SYSTEMS: OnceLock<Vec<HodgeSystem>> = OnceLock::new();
    SYSTEMS.get_or_init(|| {
        ["torus8", "sphere1", "circle64"]
            .iter()
            .map(|name| HodgeSystem::new(build_metric(corpus::corpus_mesh(name).unwrap(), Scheme::Whitney).unwrap()))
            .collect()
    })
}

fn random(system: &HodgeSystem, p: usize, seed: u64) -> Cochain {
    Cochain::random(system.metric().complex(), p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn pick(mesh: usize, degree: usize) -> (&'static HodgeSystem, usize) {
    let s = &systems()[mesh % 3];
    (s, degree % (s.metric().dimension() + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_is_self_adjoint(mesh in 0usize..3, degree in 0usize..3, seed in any::<u64>()) {
        let (s, p) = pick(mesh, degree);
        let m = s.metric();
        let (x, y) = (random(s, p, seed), random(s, p, seed ^ 1));
        let a = m.inner(&s.green(&x).unwrap(), &y).unwrap();
        let b = m.inner(&x, &s.green(&y).unwrap()).unwrap();
        let scale = m.l2_norm(&s.green(&x).unwrap()).unwrap() * m.l2_norm(&y).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * scale);
    }

    #[test]
    fn green_inverts_laplacian_off_harmonics(mesh in 0usize..3, degree in 0usize..3, seed in any::<u64>()) {
        let (s, p) = pick(mesh, degree);
        let m = s.metric();
        let x = random(s, p, seed);
        let lap = m.laplacian(p).unwrap().apply(&x).unwrap();
        let expected = x.sub(&s.project_harmonic(&x).unwrap()).unwrap();
        let err = m.l2_norm(&s.green(&lap).unwrap().sub(&expected).unwrap()).unwrap();
        prop_assert!(err <= 1e-8 * m.l2_norm(&x).unwrap());
    }

    #[test]
    fn primitive_is_linear_and_minimal(mesh in 0usize..3, degree in 1usize..3, seed in any::<u64>(), a in -3.0f64..3.0) {
        let (s, p) = pick(mesh, degree);
        let p = p.max(1);
        let m = s.metric();
        let c = m.complex();
        let (alpha1, alpha2) = (random(s, p - 1, seed), random(s, p - 1, seed ^ 2));
        let (w1, w2) = (c.d(&alpha1).unwrap(), c.d(&alpha2).unwrap());
        let combined = s.primitive(&Cochain::axpy(a, &w1, &w2).unwrap()).unwrap();
        let separate = Cochain::axpy(a, &s.primitive(&w1).unwrap(), &s.primitive(&w2).unwrap()).unwrap();
        let err = m.l2_norm(&combined.sub(&separate).unwrap()).unwrap();
        prop_assert!(err <= 1e-10 * m.l2_norm(&separate).unwrap().max(1e-300));
        prop_assert!(m.l2_norm(&s.primitive(&w1).unwrap()).unwrap() <= m.l2_norm(&alpha1).unwrap() * (1.0 + 1e-10));
    }

    #[test]
    fn exact_forms_pass_exactness_test(mesh in 0usize..3, degree in 1usize..3, seed in any::<u64>()) {
        let (s, p) = pick(mesh, degree);
        let p = p.max(1);
        let w = s.metric().complex().d(&random(s, p - 1, seed)).unwrap();
        prop_assert!(s.is_exact(&w, 1e-8).unwrap().exact);
    }

    #[test]
    fn corpus_generators_are_chain_complexes(n in 3usize..24) {
        for c in [corpus::circle(n).unwrap(), corpus::flat_circle(n).unwrap(), corpus::flat_torus(n).unwrap()] {
            prop_assert!(c.is_chain_complex());
        }
        prop_assert_eq!(corpus::flat_torus(n).unwrap().betti_numbers().unwrap(), vec![1, 2, 1]);
        prop_assert_eq!(corpus::circle(n).unwrap().betti_numbers().unwrap(), vec![1, 1]);
    }
}

#[test]
fn harmonic_parts_match_betti_numbers() {
    for s in systems() {
        let betti = s.metric().complex().betti_numbers().unwrap();
        for (p, b) in betti.iter().enumerate() {
            assert_eq!(s.harmonic_basis(p).unwrap().len(), *b);
        }
    }
}

#[test]
fn build_is_deterministic() {
    let a = corpus::octahedron_sphere(2).unwrap();
    let b = corpus::octahedron_sphere(2).unwrap();
    assert_eq!(a.id(), b.id());
    for p in 1..=2 {
        assert_eq!(a.boundary(p).unwrap(), b.boundary(p).unwrap());
    }
}
