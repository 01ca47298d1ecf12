//! The acceptance suite run by `hodgekit corpus-test`.
//!
//! Each criterion yields a list of named checks holding the raw measured
//! value and its bound. Failures inside a criterion become failed checks;
//! the suite itself always completes.

use crate::cochain::Cochain;
use crate::complex::SimplicialComplex;
use crate::corpus::{self, STANDARD_CORPUS};
use crate::error::{HodgeError, Result};
use crate::family::{
    mixed_function_names, verify_commutation, verify_mixed_partials, Axis, DifferenceScheme, Family, FamilySpec,
    ParamGrid, FAMILY_NAMES,
};
use crate::hodge::{HodgeSystem, Tolerances};
use crate::metric::{build_metric, Scheme};
use crate::norms::norm_chain_probe;
use crate::oracle::{circle_eigenvalue_sweep, convergence_sweep, oracle_form, Quantity};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

pub const ADJOINT_PAIRS: usize = 100;
pub const DECOMPOSITION_SAMPLES: usize = 10;
pub const PRIMITIVE_SAMPLES: usize = 50;
const ORACLE_RESOLUTIONS: [usize; 3] = [8, 16, 32];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub scheme: Scheme,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            scheme: Scheme::Whitney,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Equal(f64),
    Within(f64, f64),
}

impl Bound {
    fn holds(self, v: f64) -> bool {
        match self {
            Bound::AtMost(b) => v <= b,
            Bound::AtLeast(b) => v >= b,
            Bound::Equal(b) => v == b,
            Bound::Within(a, b) => (a..=b).contains(&v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    /// `None` when the quantity could not be computed.
    pub measured: Option<f64>,
    pub bound: Bound,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn new(label: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Self {
            label: label.into(),
            measured: Some(measured),
            bound,
            passed: measured.is_finite() && bound.holds(measured),
            error: None,
        }
    }

    pub fn failed(label: impl Into<String>, bound: Bound, err: &HodgeError) -> Self {
        Self {
            label: label.into(),
            measured: None,
            bound,
            passed: false,
            error: Some(format!("{}: {err}", err.code())),
        }
    }

    fn from_result(label: impl Into<String>, bound: Bound, value: Result<f64>) -> Self {
        match value {
            Ok(v) => Self::new(label, v, bound),
            Err(e) => Self::failed(label, bound, &e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    fn new(id: u32, name: &str, checks: Vec<Check>) -> Self {
        Self {
            id,
            name: name.into(),
            passed: !checks.is_empty() && checks.iter().all(|c| c.passed),
            checks,
        }
    }

    /// One summary line, e.g. `[PASS] 3 harmonic-dimensions (24 checks)`.
    pub fn summary_line(&self) -> String {
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let status = if self.passed { "PASS" } else { "FAIL" };
        if failed == 0 {
            let plural = if self.checks.len() == 1 { "" } else { "s" };
            format!("[{status}] {} {} ({} check{plural})", self.id, self.name, self.checks.len())
        } else {
            format!(
                "[{status}] {} {} ({failed} of {} checks failed)",
                self.id,
                self.name,
                self.checks.len()
            )
        }
    }
}

/// Meshes and their Hodge systems, built once and shared by all criteria.
struct Workspace {
    config: SuiteConfig,
    systems: Mutex<BTreeMap<String, Arc<Result<HodgeSystem>>>>,
}

impl Workspace {
    fn new(config: SuiteConfig) -> Self {
        Self {
            config,
            systems: Mutex::new(BTreeMap::new()),
        }
    }

    fn system(&self, name: &str) -> Arc<Result<HodgeSystem>> {
        let mut systems = self.systems.lock().expect("workspace lock");
        systems
            .entry(name.to_string())
            .or_insert_with(|| {
                Arc::new(
                    corpus::corpus_mesh(name)
                        .and_then(|mesh| build_metric(mesh, self.config.scheme))
                        .map(|metric| HodgeSystem::with_tolerances(metric, self.config.tolerances)),
                )
            })
            .clone()
    }

    fn rng(&self, criterion: u64, mesh: usize, degree: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream((criterion << 32) | ((mesh as u64) << 8) | degree as u64);
        rng
    }
}

fn with_system(ws: &Workspace, name: &str, label: &str, bound: Bound, f: impl FnOnce(&HodgeSystem) -> Vec<Check>) -> Vec<Check> {
    match ws.system(name).as_ref() {
        Ok(system) => f(system),
        Err(e) => vec![Check::failed(format!("{name} {label}"), bound, e)],
    }
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

fn structural(_: &Workspace) -> Vec<Check> {
    STANDARD_CORPUS
        .iter()
        .map(|name| {
            let bound = Bound::Equal(1.0);
            match corpus::corpus_mesh(name) {
                Ok(c) => Check::new(format!("{name} ∂∂ = 0 and dd = 0"), f64::from(u8::from(c.is_chain_complex())), bound),
                Err(e) => Check::failed(*name, bound, &e),
            }
        })
        .collect()
}

fn random_cochains(complex: &SimplicialComplex, p: usize, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Cochain>> {
    (0..count).map(|_| Cochain::random(complex, p, rng)).collect()
}

fn adjointness(ws: &Workspace) -> Vec<Check> {
    let bound = Bound::AtMost(1e-10);
    let mut checks = Vec::new();
    for (m, name) in STANDARD_CORPUS.iter().enumerate() {
        checks.extend(with_system(ws, name, "adjointness", bound, |system| {
            let metric = system.metric();
            let complex = metric.complex();
            (0..complex.dimension())
                .map(|p| {
                    let mut rng = ws.rng(2, m, p);
                    let value = (|| {
                        let alphas = random_cochains(complex, p, ADJOINT_PAIRS, &mut rng)?;
                        let betas = random_cochains(complex, p + 1, ADJOINT_PAIRS, &mut rng)?;
                        let errors: Vec<Result<f64>> = alphas
                            .par_iter()
                            .zip(&betas)
                            .map(|(a, b)| {
                                let da = complex.d(a)?;
                                let db = metric.delta(b)?;
                                let lhs = metric.inner(&da, b)?;
                                let rhs = metric.inner(a, &db)?;
                                Ok(relative((lhs - rhs).abs(), metric.l2_norm(&da)? * metric.l2_norm(b)?))
                            })
                            .collect();
                        max_of(errors)
                    })();
                    Check::from_result(format!("{name} p={p} max |⟨dα,β⟩ − ⟨α,δβ⟩| / (‖dα‖‖β‖)"), bound, value)
                })
                .collect()
        }));
    }
    checks
}

fn harmonic_dimensions(ws: &Workspace) -> Vec<Check> {
    let mut checks = Vec::new();
    for name in STANDARD_CORPUS {
        let expected = corpus::expected_betti(name).unwrap_or_default();
        checks.extend(with_system(ws, name, "harmonic dimensions", Bound::Equal(0.0), |system| {
            expected
                .iter()
                .enumerate()
                .map(|(p, &b)| {
                    let label = format!("{name} dim H^{p}");
                    match system.harmonic_basis(p) {
                        Ok(basis) => Check::new(label, basis.len() as f64, Bound::Equal(b as f64)),
                        Err(e) => Check::failed(label, Bound::Equal(b as f64), &e),
                    }
                })
                .collect()
        }));
    }
    checks
}

fn decomposition(ws: &Workspace) -> Vec<Check> {
    let bound = Bound::AtMost(1e-8);
    let mut checks = Vec::new();
    for (m, name) in STANDARD_CORPUS.iter().enumerate() {
        checks.extend(with_system(ws, name, "decomposition", bound, |system| {
            let metric = system.metric();
            let complex = metric.complex();
            let mut out = Vec::new();
            for p in 0..=complex.dimension() {
                let mut rng = ws.rng(4, m, p);
                let measured = random_cochains(complex, p, DECOMPOSITION_SAMPLES, &mut rng).and_then(|omegas| {
                    let pairs: Vec<Result<(f64, f64)>> = omegas
                        .par_iter()
                        .map(|omega| {
                            let dec = system.decompose(omega)?;
                            let norm = metric.l2_norm(omega)?;
                            let parts = [&dec.exact, &dec.coexact, &dec.harmonic];
                            let mut ortho = 0.0f64;
                            for i in 0..3 {
                                for j in i + 1..3 {
                                    ortho = ortho.max(metric.inner(parts[i], parts[j])?.abs());
                                }
                            }
                            Ok((relative(dec.residual, norm), relative(ortho, norm * norm)))
                        })
                        .collect();
                    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
                    Ok((
                        pairs.iter().map(|r| r.0).fold(0.0, f64::max),
                        pairs.iter().map(|r| r.1).fold(0.0, f64::max),
                    ))
                });
                match measured {
                    Ok((rec, orth)) => {
                        out.push(Check::new(format!("{name} p={p} reconstruction ‖ω − Σ parts‖ / ‖ω‖"), rec, bound));
                        out.push(Check::new(format!("{name} p={p} orthogonality max |⟨a,b⟩| / ‖ω‖²"), orth, bound));
                    }
                    Err(e) => out.push(Check::failed(format!("{name} p={p} decomposition"), bound, &e)),
                }
            }
            out
        }));
    }
    checks
}

fn primitive_contract(ws: &Workspace) -> Vec<Check> {
    let bound = Bound::AtMost(1e-8);
    let mut checks = Vec::new();
    for (m, name) in STANDARD_CORPUS.iter().enumerate() {
        checks.extend(with_system(ws, name, "primitive", bound, |system| {
            let metric = system.metric();
            let complex = metric.complex();
            let mut out = Vec::new();
            for p in 1..=complex.dimension() {
                let mut rng = ws.rng(5, m, p);
                let measured = random_cochains(complex, p - 1, PRIMITIVE_SAMPLES, &mut rng).and_then(|phis| {
                    let pairs: Vec<Result<(f64, f64)>> = phis
                        .par_iter()
                        .map(|phi| {
                            let omega = complex.d(phi)?;
                            let alpha = system.primitive(&omega)?;
                            let d_res = metric.l2_norm(&complex.d(&alpha)?.sub(&omega)?)?;
                            let dec = system.decompose(&alpha)?;
                            let kernel = metric.l2_norm(&dec.exact.add(&dec.harmonic)?)?;
                            Ok((
                                relative(d_res, metric.l2_norm(&omega)?),
                                relative(kernel, metric.l2_norm(&alpha)?),
                            ))
                        })
                        .collect();
                    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
                    Ok((
                        pairs.iter().map(|r| r.0).fold(0.0, f64::max),
                        pairs.iter().map(|r| r.1).fold(0.0, f64::max),
                    ))
                });
                match measured {
                    Ok((d_res, kernel)) => {
                        out.push(Check::new(format!("{name} p={p} ‖d(d⁻¹ω) − ω‖ / ‖ω‖"), d_res, bound));
                        out.push(Check::new(format!("{name} p={p} ‖P_ker d(d⁻¹ω)‖ / ‖d⁻¹ω‖"), kernel, bound));
                    }
                    Err(e) => out.push(Check::failed(format!("{name} p={p} primitive"), bound, &e)),
                }
            }
            out
        }));
    }
    checks
}

fn oracle_agreement(ws: &Workspace) -> Vec<Check> {
    let bound = Bound::AtLeast(1.8);
    let torus = oracle_form("cos_x_dxdy")
        .and_then(|form| convergence_sweep(&form, Quantity::Primitive, &ORACLE_RESOLUTIONS, ws.config.scheme));
    let circle = circle_eigenvalue_sweep(&ORACLE_RESOLUTIONS, ws.config.scheme);
    let mut checks = Vec::new();
    for (label, report) in [
        ("torus primitive of cos x dx∧dy vs sin x dy: L² rate", torus),
        ("unit circle first eigenvalue of Δ⁰ vs 1: rate", circle),
    ] {
        match report {
            Ok(r) => {
                for (n, e) in r.resolutions.iter().zip(&r.errors) {
                    checks.push(Check::new(format!("{label} error at N={n}"), *e, Bound::AtLeast(0.0)));
                }
                checks.push(match r.rate {
                    Some(rate) => Check::new(label, rate, bound),
                    None => Check::failed(label, bound, &HodgeError::Numerical {
                        what: "rate fit".into(),
                        residual: f64::NAN,
                    }),
                });
            }
            Err(e) => checks.push(Check::failed(label, bound, &e)),
        }
    }
    checks
}

fn family_commutation(ws: &Workspace) -> Vec<Check> {
    let lin = Bound::AtMost(1e-10);
    let rate_bound = Bound::Within(1.8, 2.2);
    let name = "torus16";
    with_system(ws, name, "families", lin, |system| {
        let complex = system.metric().complex();
        let mut out = Vec::new();
        for family_name in FAMILY_NAMES {
            for degree in 1..=2 {
                let label = format!("{family_name} p={degree}");
                let report = FamilySpec::standard(family_name, degree, ws.config.seed)
                    .and_then(|spec| Family::new(spec, complex))
                    .and_then(|family| verify_commutation(&family, system, DifferenceScheme::Centered, 2));
                let report = match report {
                    Ok(r) => r,
                    Err(e) => {
                        out.push(Check::failed(label, lin, &e));
                        continue;
                    }
                };
                out.push(Check::new(
                    format!("{label} max ‖G(Δ_hω) − Δ_h(Gω)‖ relative over all h"),
                    report.linearity.iter().map(|c| c.max_residual).fold(0.0, f64::max),
                    lin,
                ));
                for series in &report.convergence {
                    let what = format!("{label} direction {} C^{} proxy", series.direction, series.k);
                    if series.rate_expected {
                        out.push(match series.rate {
                            Some(rate) => Check::new(format!("{what} rate"), rate, rate_bound),
                            None => Check::failed(format!("{what} rate"), rate_bound, &HodgeError::Numerical {
                                what: "rate fit".into(),
                                residual: f64::NAN,
                            }),
                        });
                    } else {
                        // exact for polynomial coefficients of degree ≤ 2: no rate to fit
                        let worst = series.errors.iter().copied().fold(0.0, f64::max);
                        out.push(Check::new(
                            format!("{what} error (difference quotient exact)"),
                            relative(worst, series.reference.max(1.0)),
                            Bound::AtMost(1e-8),
                        ));
                    }
                }
            }
        }
        out
    })
}

fn mixed_partials(_: &Workspace) -> Vec<Check> {
    let grid = ParamGrid::new(vec![
        Axis { start: 0.0, step: 0.025, count: 41 },
        Axis { start: 0.0, step: 0.01, count: 101 },
    ]);
    let grid = match grid {
        Ok(g) => g,
        Err(e) => return vec![Check::failed("grid", Bound::AtMost(0.0), &e)],
    };
    let mut out = Vec::new();
    for name in mixed_function_names() {
        for orders in [[1, 1], [1, 2], [2, 1]] {
            let label = format!("{name} orders (t,x) = ({}, {})", orders[0], orders[1]);
            let commute = Bound::AtMost(1e-12);
            let report = match verify_mixed_partials(name, &grid, orders) {
                Ok(r) => r,
                Err(e) => {
                    out.push(Check::failed(label, commute, &e));
                    continue;
                }
            };
            if !report.vanishing {
                out.push(Check::new(format!("{label} mixed differences commute (relative)"), report.commutation_residual, commute));
            }
            if orders != [1, 1] {
                continue;
            }
            for t in &report.taylor {
                if let Some(ratio) = t.ratio {
                    out.push(Check::new(
                        format!("{name} h={} Taylor remainder measured/predicted", t.h),
                        ratio,
                        Bound::AtMost(1.1),
                    ));
                } else {
                    out.push(Check::new(
                        format!("{name} h={} Taylor remainder (zero bound)", t.h),
                        t.measured,
                        Bound::AtMost(1e-12),
                    ));
                }
            }
            if let Some(id) = report.t_squared_identity {
                out.push(Check::new(format!("{name} remainder = h²·sup|g| (relative)"), id, Bound::AtMost(1e-12)));
            }
            out.push(Check::new(
                format!("{name} sup increments shrink with h"),
                f64::from(u8::from(report.continuity_shrinks)),
                Bound::Equal(1.0),
            ));
        }
    }
    out
}

fn norm_chain(ws: &Workspace) -> Vec<Check> {
    let finite = Bound::Equal(1.0);
    let mut chains = Vec::new();
    let mut out = Vec::new();
    for n in ORACLE_RESOLUTIONS {
        let name = format!("torus{n}");
        let system = ws.system(&name);
        let chain = system.as_ref().as_ref().map_err(Clone::clone).and_then(|system| {
            let omega = oracle_form("sin_x_dy")?.sample(system.metric().complex())?;
            norm_chain_probe(system, &omega, 0, 2)
        });
        match chain {
            Ok(c) => {
                let ok = c.values().iter().all(|v| v.is_finite() && *v > 0.0) && c.ratios.iter().all(Option::is_some);
                out.push(Check::new(format!("{name} chain quantities finite and positive"), f64::from(u8::from(ok)), finite));
                chains.push(c);
            }
            Err(e) => out.push(Check::failed(format!("{name} norm chain"), finite, &e)),
        }
    }
    if chains.len() == ORACLE_RESOLUTIONS.len() {
        let names = ["‖Gω‖_C⁰ / ‖Gω‖_H²", "‖Gω‖_H² / ‖ω‖_H⁰", "‖ω‖_H⁰ / ‖ω‖_C⁰"];
        for (i, label) in names.iter().enumerate() {
            let ratios: Vec<f64> = chains.iter().filter_map(|c| c.ratios[i]).collect();
            let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
            let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
            let spread = if ratios.len() == chains.len() && lo > 0.0 { hi / lo } else { f64::INFINITY };
            out.push(Check::new(format!("{label} max/min across 8/16/32"), spread, Bound::AtMost(4.0)));
        }
    }
    out
}

type CriterionFn = fn(&Workspace) -> Vec<Check>;

const CRITERIA: [(u32, &str, CriterionFn); 9] = [
    (1, "structural-exactness", structural),
    (2, "adjointness", adjointness),
    (3, "harmonic-dimensions", harmonic_dimensions),
    (4, "hodge-decomposition", decomposition),
    (5, "primitive-contract", primitive_contract),
    (6, "oracle-agreement", oracle_agreement),
    (7, "family-commutation", family_commutation),
    (8, "mixed-partials", mixed_partials),
    (9, "norm-chain", norm_chain),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub config: SuiteConfig,
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

/// Run criteria 1 to 9.
pub fn run_suite(config: SuiteConfig) -> SuiteReport {
    let ws = Workspace::new(config);
    let criteria: Vec<CriterionReport> = CRITERIA
        .iter()
        .map(|&(id, name, run)| CriterionReport::new(id, name, run(&ws)))
        .collect();
    SuiteReport {
        schema: crate::SCHEMA.into(),
        version: crate::VERSION.into(),
        command: "corpus-test".into(),
        config,
        seed: config.seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

/// Criterion 10: run the suite twice and compare the serialized reports.
/// The second run uses a single worker thread, so agreement also shows the
/// output does not depend on scheduling.
pub fn run_suite_with_determinism(config: SuiteConfig) -> Result<SuiteReport> {
    let mut first = run_suite(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| HodgeError::Parameter(format!("cannot start worker pool: {e}")))?;
    let second = pool.install(|| run_suite(config));
    let a = serde_json::to_string(&first).expect("reports serialize");
    let b = serde_json::to_string(&second).expect("reports serialize");
    let identical = a == b;
    let check = Check::new(
        "two runs with the same seed serialize byte-identically",
        f64::from(u8::from(identical)),
        Bound::Equal(1.0),
    );
    first.criteria.push(CriterionReport::new(10, "determinism", vec![check]));
    first.passed = first.criteria.iter().all(|c| c.passed);
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Bound::AtMost(1.0).holds(1.0));
        assert!(!Bound::AtLeast(1.8).holds(1.7));
        assert!(Bound::Within(1.8, 2.2).holds(2.0));
        assert!(!Check::new("nan", f64::NAN, Bound::AtLeast(0.0)).passed);
    }

    #[test]
    fn structural_and_mixed_criteria_pass() {
        let ws = Workspace::new(SuiteConfig::default());
        let s = CriterionReport::new(1, "structural-exactness", structural(&ws));
        assert!(s.passed, "{s:?}");
        let m = CriterionReport::new(8, "mixed-partials", mixed_partials(&ws));
        assert!(m.passed, "{:#?}", m.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }

    #[test]
    fn empty_criterion_fails() {
        assert!(!CriterionReport::new(1, "x", Vec::new()).passed);
    }
}
