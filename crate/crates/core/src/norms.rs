//! Discrete Sobolev and C^k norms and empirical probes of the inequalities
//! relating them through the Green operator.
//!
//! `H^s` is the quadratic form of `(I + Δ)^s`. The `C^k` proxy sums the
//! volume-normalized sup norms of `ω, Dω, …, D^kω` where `D` alternates
//! between d and δ.

use crate::cochain::Cochain;
use crate::error::{HodgeError, Result};
use crate::hodge::HodgeSystem;
use crate::metric::MetricStructure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormFamily {
    L2,
    Hs,
    Ck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub family: NormFamily,
    pub parameter: u32,
    pub value: f64,
    /// Name of the mesh the value was computed on.
    pub resolution: String,
}

fn order(value: i64, what: &str) -> Result<u32> {
    u32::try_from(value).map_err(|_| HodgeError::Parameter(format!("{what} must be a nonnegative integer, got {value}")))
}

fn shifted(metric: &MetricStructure, p: usize, x: &[f64]) -> Vec<f64> {
    let lap = metric.laplacian_values(p, x);
    x.iter().zip(lap).map(|(a, b)| a + b).collect()
}

pub(crate) fn sobolev_values(metric: &MetricStructure, p: usize, x: &[f64], s: u32) -> f64 {
    let mut y = x.to_vec();
    for _ in 0..s / 2 {
        y = shifted(metric, p, &y);
    }
    let mut sq = metric.inner_values(p, &y, &y);
    if s % 2 == 1 {
        let weak = metric.weak_laplacian_values(p, &y);
        sq += y.iter().zip(&weak).map(|(a, b)| a * b).sum::<f64>();
    }
    sq.max(0.0).sqrt()
}

/// `sqrt(⟨(I + Δ)^s ω, ω⟩)`.
pub fn sobolev_norm(metric: &MetricStructure, omega: &Cochain, s: i64) -> Result<f64> {
    let s = order(s, "Sobolev order s")?;
    omega.check_complex(metric.complex())?;
    Ok(sobolev_values(metric, omega.degree(), omega.values(), s))
}

fn sup_normalized(metric: &MetricStructure, p: usize, x: &[f64]) -> f64 {
    x.iter()
        .zip(metric.volumes(p))
        .map(|(v, vol)| v.abs() / vol)
        .fold(0.0, f64::max)
}

pub(crate) fn ck_values(metric: &MetricStructure, p: usize, x: &[f64], k: u32) -> f64 {
    let n = metric.dimension();
    let mut total = sup_normalized(metric, p, x);
    let (mut degree, mut y) = (p, x.to_vec());
    // top-degree input has no d, so the alternation starts with δ there
    let mut use_d = p < n;
    for _ in 0..k {
        if use_d {
            y = metric.d_values(degree, &y).expect("degree below top");
            degree += 1;
        } else {
            y = metric.delta_values(degree, &y);
            degree -= 1;
        }
        use_d = !use_d;
        total += sup_normalized(metric, degree, &y);
    }
    total
}

/// `Σ_{j ≤ k} max_σ |(D^j ω)(σ)| / |σ|`.
pub fn ck_norm(metric: &MetricStructure, omega: &Cochain, k: i64) -> Result<f64> {
    let k = order(k, "derivative order k")?;
    omega.check_complex(metric.complex())?;
    Ok(ck_values(metric, omega.degree(), omega.values(), k))
}

pub fn norm_report(metric: &MetricStructure, omega: &Cochain, family: NormFamily, parameter: i64) -> Result<NormReport> {
    let value = match family {
        NormFamily::L2 => metric.l2_norm(omega)?,
        NormFamily::Hs => sobolev_norm(metric, omega, parameter)?,
        NormFamily::Ck => ck_norm(metric, omega, parameter)?,
    };
    Ok(NormReport {
        family,
        parameter: if family == NormFamily::L2 { 0 } else { order(parameter, "norm parameter")? },
        value,
        resolution: metric.complex().name().to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenNormEstimate {
    pub degree: usize,
    pub s: u32,
    pub seed: u64,
    /// `‖Gω‖_{H^s} / ‖ω‖_{H^{s−2}}` per trial.
    pub ratios: Vec<f64>,
    /// Running maximum of `ratios`.
    pub running_max: Vec<f64>,
    pub estimate: f64,
}

/// Random trial cochain `index` for a seed; independent of evaluation order.
pub fn trial_cochain(metric: &MetricStructure, p: usize, seed: u64, index: u64) -> Result<Cochain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Cochain::random(metric.complex(), p, &mut rng)
}

/// Largest observed `‖Gω‖_{H^s} / ‖ω‖_{H^{s−2}}` over seeded random ω.
pub fn estimate_green_operator_norm(
    system: &HodgeSystem,
    p: usize,
    s: i64,
    trials: usize,
    seed: u64,
) -> Result<GreenNormEstimate> {
    let s_u = order(s, "Sobolev order s")?;
    if s_u < 2 {
        return Err(HodgeError::Parameter(format!("the Green operator norm needs s ≥ 2, got {s}")));
    }
    if trials == 0 {
        return Err(HodgeError::Parameter("at least one trial is required".into()));
    }
    let metric = system.metric();
    metric.complex().check_degree(p, 0, metric.dimension())?;
    // factor once before fanning out
    system.harmonic_basis(p)?;
    let ratios = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let w = trial_cochain(metric, p, seed, i)?;
            let g = system.green_values(p, w.values())?;
            Ok(sobolev_values(metric, p, &g, s_u) / sobolev_values(metric, p, w.values(), s_u - 2))
        })
        .collect::<Result<Vec<f64>>>()?;
    let running_max: Vec<f64> = ratios
        .iter()
        .scan(0.0f64, |m, r| {
            *m = m.max(*r);
            Some(*m)
        })
        .collect();
    Ok(GreenNormEstimate {
        degree: p,
        s: s_u,
        seed,
        estimate: *running_max.last().expect("trials > 0"),
        ratios,
        running_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormChain {
    pub k: u32,
    pub s: u32,
    pub dimension: usize,
    /// `‖Gω‖_{C^k}`
    pub ck_green: f64,
    /// `‖Gω‖_{H^s}`
    pub hs_green: f64,
    /// `‖ω‖_{H^{s−2}}`
    pub hs2_input: f64,
    /// `‖ω‖_{C^{s−2}}`
    pub cs2_input: f64,
    /// The three consecutive ratios; `None` where the denominator vanishes.
    pub ratios: [Option<f64>; 3],
}

impl NormChain {
    pub fn values(&self) -> [f64; 4] {
        [self.ck_green, self.hs_green, self.hs2_input, self.cs2_input]
    }
}

/// Evaluate `‖Gω‖_{C^k}`, `‖Gω‖_{H^s}`, `‖ω‖_{H^{s−2}}`, `‖ω‖_{C^{s−2}}` and
/// their consecutive ratios. Requires `s > k + n/2`.
pub fn norm_chain_probe(system: &HodgeSystem, omega: &Cochain, k: i64, s: i64) -> Result<NormChain> {
    let metric = system.metric();
    let n = metric.dimension();
    let (k_u, s_u) = (order(k, "k")?, order(s, "s")?);
    if 2 * s_u as usize <= 2 * k_u as usize + n {
        return Err(HodgeError::Hypothesis { k: k_u as usize, s: s_u as usize, n });
    }
    if s_u < 2 {
        return Err(HodgeError::Parameter(format!("the norm chain needs s ≥ 2, got {s}")));
    }
    omega.check_complex(metric.complex())?;
    let p = omega.degree();
    let g = system.green_values(p, omega.values())?;
    let values = [
        ck_values(metric, p, &g, k_u),
        sobolev_values(metric, p, &g, s_u),
        sobolev_values(metric, p, omega.values(), s_u - 2),
        ck_values(metric, p, omega.values(), s_u - 2),
    ];
    let ratio = |a: f64, b: f64| (b > 0.0).then(|| a / b);
    Ok(NormChain {
        k: k_u,
        s: s_u,
        dimension: n,
        ck_green: values[0],
        hs_green: values[1],
        hs2_input: values[2],
        cs2_input: values[3],
        ratios: [
            ratio(values[0], values[1]),
            ratio(values[1], values[2]),
            ratio(values[2], values[3]),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::metric::{build_metric, Scheme};

    fn metric(name: &str) -> MetricStructure {
        build_metric(corpus::corpus_mesh(name).unwrap(), Scheme::Whitney).unwrap()
    }

    #[test]
    fn h0_is_l2_and_zero_is_zero() {
        let m = metric("sphere1");
        let w = trial_cochain(&m, 1, 3, 0).unwrap();
        assert!((sobolev_norm(&m, &w, 0).unwrap() - m.l2_norm(&w).unwrap()).abs() < 1e-14);
        let z = Cochain::zero(m.complex(), 1).unwrap();
        for s in 0..4 {
            assert_eq!(sobolev_norm(&m, &z, s).unwrap(), 0.0);
            assert_eq!(ck_norm(&m, &z, s).unwrap(), 0.0);
        }
        assert!(matches!(sobolev_norm(&m, &w, -1), Err(HodgeError::Parameter(_))));
        assert!(matches!(ck_norm(&m, &w, -2), Err(HodgeError::Parameter(_))));
    }

    #[test]
    fn sobolev_norms_increase_with_order() {
        let m = metric("torus8");
        for p in 0..=2 {
            let w = trial_cochain(&m, p, 9, p as u64).unwrap();
            let norms: Vec<f64> = (0..5).map(|s| sobolev_norm(&m, &w, s).unwrap()).collect();
            assert!(norms.windows(2).all(|x| x[0] <= x[1] * (1.0 + 1e-10)), "{norms:?}");
        }
    }

    #[test]
    fn ck_of_constants() {
        let m = metric("circle64");
        let c = Cochain::new(m.complex(), 0, vec![-2.5; 64]).unwrap();
        for k in 0..4 {
            assert!((ck_norm(&m, &c, k).unwrap() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn top_degree_ck_starts_with_delta() {
        let m = metric("torus8");
        let w = trial_cochain(&m, 2, 1, 0).unwrap();
        assert!(ck_norm(&m, &w, 2).unwrap() > ck_norm(&m, &w, 0).unwrap());
    }

    #[test]
    fn green_norm_estimate_is_a_running_max() {
        let s = HodgeSystem::new(metric("torus8"));
        let est = estimate_green_operator_norm(&s, 1, 2, 8, 7).unwrap();
        assert!(est.running_max.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(est.estimate, est.ratios.iter().cloned().fold(0.0, f64::max));
        let prefix = estimate_green_operator_norm(&s, 1, 2, 4, 7).unwrap();
        assert_eq!(prefix.ratios[..], est.ratios[..4]);
        assert!(matches!(estimate_green_operator_norm(&s, 1, 2, 0, 7), Err(HodgeError::Parameter(_))));
        assert!(matches!(estimate_green_operator_norm(&s, 1, 1, 3, 7), Err(HodgeError::Parameter(_))));
    }

    #[test]
    fn chain_hypothesis_gate() {
        let s = HodgeSystem::new(metric("torus8"));
        let w = trial_cochain(s.metric(), 1, 2, 0).unwrap();
        assert!(matches!(norm_chain_probe(&s, &w, 1, 2), Err(HodgeError::Hypothesis { .. })));
        let chain = norm_chain_probe(&s, &w, 0, 2).unwrap();
        assert!(chain.values().iter().all(|v| v.is_finite() && *v > 0.0));
        let zero = norm_chain_probe(&s, &Cochain::zero(s.metric().complex(), 1).unwrap(), 0, 2).unwrap();
        assert_eq!(zero.values(), [0.0; 4]);
        assert_eq!(zero.ratios, [None; 3]);
    }
}
