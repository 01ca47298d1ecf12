use super::difference::{centered_difference, difference_at, DifferenceScheme, GridSamples};
use super::Family;
use crate::cochain::Cochain;
use crate::error::{HodgeError, Result};
use crate::hodge::HodgeSystem;
use crate::linalg::fit_log_slope;
use crate::metric::MetricStructure;
use crate::norms::ck_values;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameter steps used for convergence checks.
pub const STEP_SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Check (a) for one direction and step: `G(Δ_hω) − Δ_h(Gω)` over the grid
/// line through the probe point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearityCheck {
    pub direction: usize,
    pub h: f64,
    pub points: usize,
    /// Largest `‖G(Δ_hω) − Δ_h(Gω)‖ / scale` with scale the larger of
    /// `‖Δ_h(Gω)‖` and `(‖Gω(t+h)‖ + ‖Gω(t−h)‖)/(2h)`.
    pub max_residual: f64,
    /// Largest `‖d(Δ_h d⁻¹ω) − Δ_hω‖ / ‖Δ_hω‖`.
    pub max_d_residual: f64,
}

/// Errors of r-th difference quotients of `d⁻¹ω` against `d⁻¹(∂^r ω)` at the
/// probe point, measured in the C^k proxy norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub direction: usize,
    pub order: u32,
    pub k: u32,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// C^k norm of the analytic value the quotients approach.
    pub reference: f64,
    /// C^k distance between quotients at successive steps.
    pub deltas: Vec<f64>,
    pub rate: Option<f64>,
    pub fit_residual: Option<f64>,
    /// Whether the order+2-th (centered) or order+1-th (forward) derivative is
    /// nonzero at the probe, i.e. whether a convergence rate is expected.
    pub rate_expected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub family: String,
    pub degree: usize,
    pub seed: u64,
    pub scheme: DifferenceScheme,
    pub norm: String,
    pub probe: Vec<f64>,
    pub max_closed_residual: f64,
    pub max_harmonic_residual: f64,
    pub linearity: Vec<LinearityCheck>,
    pub convergence: Vec<ConvergenceSeries>,
}

struct Line {
    omega: GridSamples,
    green: GridSamples,
    primitive: GridSamples,
    closed: f64,
    harmonic: f64,
}

fn solve_line(family: &Family, system: &HodgeSystem, direction: usize) -> Result<Line> {
    let grid = family.grid().clone();
    let probe = grid.midpoint();
    let indices: Vec<Vec<usize>> = (0..grid.axes()[direction].count)
        .map(|i| {
            let mut idx = probe.clone();
            idx[direction] = i;
            idx
        })
        .collect();
    let solved = indices
        .par_iter()
        .map(|idx| {
            let t = grid.point(idx);
            let omega = family.evaluate(&t);
            let report = system.is_exact(&omega, 1e-8)?;
            if !report.exact {
                return Err(HodgeError::NotExact {
                    reason: format!("family '{}' is not exact at t = {t:?}", family.spec().family),
                    closed_residual: report.closed_residual,
                    harmonic_residual: report.harmonic_residual,
                });
            }
            let (g, prim) = system.green_and_codifferential(&omega)?;
            Ok((omega, g, prim.expect("degree ≥ 1"), report))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut line = Line {
        omega: GridSamples::new(grid.clone()),
        green: GridSamples::new(grid.clone()),
        primitive: GridSamples::new(grid),
        closed: 0.0,
        harmonic: 0.0,
    };
    for (idx, (omega, g, prim, report)) in indices.into_iter().zip(solved) {
        line.closed = line.closed.max(report.closed_residual);
        line.harmonic = line.harmonic.max(report.harmonic_residual);
        line.omega.values.insert(idx.clone(), omega);
        line.green.values.insert(idx.clone(), g);
        line.primitive.values.insert(idx, prim);
    }
    Ok(line)
}

fn linearity_check(
    system: &HodgeSystem,
    line: &Line,
    direction: usize,
    scheme: DifferenceScheme,
    h: f64,
) -> Result<LinearityCheck> {
    let metric = system.metric();
    let m = line.omega.grid.step_multiple(direction, h)?;
    let points: Vec<&Vec<usize>> = line
        .omega
        .values
        .keys()
        .filter(|idx| difference_at(&line.omega, idx, direction, scheme, m).is_ok())
        .collect();
    let residuals = points
        .par_iter()
        .map(|idx| {
            let dw = difference_at(&line.omega, idx, direction, scheme, m)?;
            let dg = difference_at(&line.green, idx, direction, scheme, m)?;
            let g_dw = system.green(&dw)?;
            let diff = metric.l2_norm(&g_dw.sub(&dg)?)?;
            let mut neighbors = 0.0;
            for offset in [m as i64, -(m as i64), 0] {
                let mut at = (*idx).clone();
                let moved = at[direction] as i64 + offset;
                if moved >= 0 {
                    at[direction] = moved as usize;
                    if let Some(g) = line.green.values.get(&at) {
                        neighbors = f64::max(neighbors, metric.l2_norm(g)?);
                    }
                }
            }
            let scale = metric.l2_norm(&dg)?.max(neighbors / h);
            let a = if scale > 0.0 { diff / scale } else { diff };
            let dp = difference_at(&line.primitive, idx, direction, scheme, m)?;
            let d_diff = metric.l2_norm(&metric.complex().d(&dp)?.sub(&dw)?)?;
            let d_scale = metric.l2_norm(&dw)?;
            let b = if d_scale > 0.0 { d_diff / d_scale } else { d_diff };
            Ok((a, b))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    Ok(LinearityCheck {
        direction,
        h,
        points: residuals.len(),
        max_residual: residuals.iter().map(|r| r.0).fold(0.0, f64::max),
        max_d_residual: residuals.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

fn ck(metric: &MetricStructure, x: &Cochain, k: u32) -> f64 {
    ck_values(metric, x.degree(), x.values(), k)
}

#[allow(clippy::too_many_arguments)]
fn convergence_series(
    family: &Family,
    system: &HodgeSystem,
    line: &Line,
    direction: usize,
    scheme: DifferenceScheme,
    order: u32,
    k_max: u32,
) -> Result<Vec<ConvergenceSeries>> {
    let metric = system.metric();
    let grid = &line.omega.grid;
    let probe = grid.midpoint();
    let t = grid.point(&probe);
    let mut orders = vec![0; grid.dims()];
    orders[direction] = order;
    let analytic = system
        .green_and_codifferential(&family.derivative(&orders, &t))?
        .1
        .expect("degree ≥ 1");
    let mut steps = Vec::new();
    let mut quotients = Vec::new();
    for h in STEP_SWEEP {
        let Ok(m) = grid.step_multiple(direction, h) else { continue };
        let q = match (scheme, order) {
            (DifferenceScheme::Forward, 1) => difference_at(&line.primitive, &probe, direction, scheme, m),
            (DifferenceScheme::Forward, _) => {
                return Err(HodgeError::Parameter("forward differences are only used for first derivatives".into()))
            }
            (DifferenceScheme::Centered, r) => centered_difference(&line.primitive, &probe, direction, r, m),
        };
        if let Ok(q) = q {
            steps.push(h);
            quotients.push(q);
        }
    }
    if steps.len() < 3 {
        return Err(HodgeError::Grid(format!(
            "only {} step sizes fit order-{order} differences around the probe point; need at least 3",
            steps.len()
        )));
    }
    let leading = match scheme {
        DifferenceScheme::Forward => order + 1,
        DifferenceScheme::Centered => order + 2,
    };
    let rate_expected = family.has_nonzero_derivative(direction, leading, &t);
    (0..=k_max)
        .map(|k| {
            let errors = quotients
                .iter()
                .map(|q| Ok(ck(metric, &q.sub(&analytic)?, k)))
                .collect::<Result<Vec<f64>>>()?;
            let deltas = quotients
                .windows(2)
                .map(|w| Ok(ck(metric, &w[1].sub(&w[0])?, k)))
                .collect::<Result<Vec<f64>>>()?;
            let fit = fit_log_slope(&steps, &errors);
            Ok(ConvergenceSeries {
                direction,
                order,
                k,
                steps: steps.clone(),
                errors,
                reference: ck(metric, &analytic, k),
                deltas,
                rate: fit.map(|f| f.0),
                fit_residual: fit.map(|f| f.1),
                rate_expected,
            })
        })
        .collect()
}

fn empty_report(family: &Family, scheme: DifferenceScheme) -> SmoothnessReport {
    let grid = family.grid();
    SmoothnessReport {
        family: family.spec().family.clone(),
        degree: family.spec().degree,
        seed: family.spec().seed,
        scheme,
        norm: "ck_proxy".into(),
        probe: grid.point(&grid.midpoint()),
        max_closed_residual: 0.0,
        max_harmonic_residual: 0.0,
        linearity: Vec::new(),
        convergence: Vec::new(),
    }
}

/// Check that G commutes with parameter differencing and that difference
/// quotients of `d⁻¹ω` converge to `d⁻¹(∂ₜω)`, for every parameter direction.
pub fn verify_commutation(
    family: &Family,
    system: &HodgeSystem,
    scheme: DifferenceScheme,
    k_max: u32,
) -> Result<SmoothnessReport> {
    let mut report = empty_report(family, scheme);
    for direction in 0..family.grid().dims() {
        let line = solve_line(family, system, direction)?;
        report.max_closed_residual = report.max_closed_residual.max(line.closed);
        report.max_harmonic_residual = report.max_harmonic_residual.max(line.harmonic);
        for h in STEP_SWEEP {
            if family.grid().step_multiple(direction, h).is_ok() {
                report.linearity.push(linearity_check(system, &line, direction, scheme, h)?);
            }
        }
        report
            .convergence
            .extend(convergence_series(family, system, &line, direction, scheme, 1, k_max)?);
    }
    Ok(report)
}

/// Convergence of centered r-th difference quotients of `d⁻¹ω` for
/// `1 ≤ r ≤ r_max` and C^k proxies with `k ≤ k_max`.
pub fn smoothness_report(family: &Family, system: &HodgeSystem, k_max: u32, r_max: u32) -> Result<SmoothnessReport> {
    let scheme = DifferenceScheme::Centered;
    let mut report = empty_report(family, scheme);
    for direction in 0..family.grid().dims() {
        let line = solve_line(family, system, direction)?;
        report.max_closed_residual = report.max_closed_residual.max(line.closed);
        report.max_harmonic_residual = report.max_harmonic_residual.max(line.harmonic);
        for r in 1..=r_max {
            report
                .convergence
                .extend(convergence_series(family, system, &line, direction, scheme, r, k_max)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::{FamilySpec, ParamGrid};
    use super::*;
    use crate::corpus;
    use crate::metric::{build_metric, Scheme};

    fn system() -> HodgeSystem {
        HodgeSystem::new(build_metric(corpus::flat_torus(8).unwrap(), Scheme::Whitney).unwrap())
    }

    fn family(name: &str, s: &HodgeSystem) -> Family {
        Family::new(FamilySpec::standard(name, 1, 11).unwrap(), s.metric().complex()).unwrap()
    }

    #[test]
    fn sine_family_commutes_and_converges() {
        let s = system();
        let report = verify_commutation(&family("sine", &s), &s, DifferenceScheme::Centered, 2).unwrap();
        assert_eq!(report.linearity.len(), 4);
        assert!(report.linearity.iter().all(|c| c.max_residual <= 1e-10 && c.max_d_residual <= 1e-8));
        assert_eq!(report.convergence.len(), 3);
        for series in &report.convergence {
            assert!(series.rate_expected);
            let rate = series.rate.unwrap();
            assert!((1.8..=2.2).contains(&rate), "{series:?}");
        }
    }

    #[test]
    fn forward_scheme_is_first_order() {
        let s = system();
        let report = verify_commutation(&family("exp-cos", &s), &s, DifferenceScheme::Forward, 0).unwrap();
        let rate = report.convergence[0].rate.unwrap();
        assert!((0.9..=1.2).contains(&rate), "{rate}");
    }

    #[test]
    fn linear_family_quotients_are_exact() {
        let s = system();
        let report = verify_commutation(&family("linear", &s), &s, DifferenceScheme::Centered, 1).unwrap();
        for series in &report.convergence {
            assert!(!series.rate_expected);
            assert!(series.errors.iter().all(|e| *e <= 1e-8 * series.reference), "{series:?}");
        }
    }

    #[test]
    fn quadratic_third_differences_vanish() {
        let s = system();
        let report = smoothness_report(&family("quadratic", &s), &s, 0, 3).unwrap();
        let third = report.convergence.iter().find(|c| c.order == 3).unwrap();
        let second = report.convergence.iter().find(|c| c.order == 2).unwrap();
        assert_eq!(third.steps.len(), 3);
        assert!(third.errors.iter().all(|e| *e <= 1e-6 * second.reference), "{third:?}");
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let s = system();
        let mut spec = FamilySpec::standard("sine", 1, 0).unwrap();
        spec.grid = ParamGrid::uniform(0.0, 1.0, 11, 1).unwrap();
        let fam = Family::new(spec, s.metric().complex()).unwrap();
        assert!(matches!(smoothness_report(&fam, &s, 0, 3), Err(HodgeError::Grid(_))));
    }
}
