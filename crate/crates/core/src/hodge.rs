//! Harmonic spaces, the Hodge decomposition, the Green operator and the
//! coexact primitive `d⁻¹ = δG`.
//!
//! Every solve goes through a mixed formulation that keeps all matrices
//! sparse. For degree p with `a = #(p−1)-simplices`, `m = #p-simplices` and
//! `b = b_p` the bordered system
//!
//! ```text
//! [ −M_{p−1}   B          0    ] [σ]   [  0  ]
//! [  Bᵀ        K          M_pH ] [x] = [ M_pf ]
//! [  0         (M_pH)ᵀ    0    ] [μ]   [  0  ]
//! ```
//!
//! with `B = d_{p−1}ᵀ M_p` and `K = d_pᵀ M_{p+1} d_p` has the solution
//! `x = Gf`, `σ = δGf` and `μ = HᵀM_p f`.

use crate::cochain::Cochain;
use crate::error::{HodgeError, Result};
use crate::linalg::{dot, generalized_symmetric_eigen, SparseLu};
use crate::metric::MetricStructure;
use crate::sparse::CsrMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

/// Numerical thresholds used by [`HodgeSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues below `rank_cutoff · λ_max` count as harmonic.
    pub rank_cutoff: f64,
    /// Relative residual demanded from every linear solve.
    pub solver: f64,
    /// Default threshold for [`HodgeSystem::is_exact`].
    pub exactness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_cutoff: 1e-9,
            solver: 1e-12,
            exactness: 1e-8,
        }
    }
}

const HARMONIC_SEED: u64 = 0x6861_726d_6f6e_6963;
const REFINEMENT_STEPS: usize = 5;

/// Ritz values, Ritz vectors and their residual norms.
type RitzPairs = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

struct DegreeData {
    lambda_max: f64,
    harmonic: Vec<Vec<f64>>,
    bordered: CsrMatrix<f64>,
    lu: SparseLu,
}

/// Result of splitting a cochain into its exact, coexact and harmonic parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    pub exact: Cochain,
    pub coexact: Cochain,
    pub harmonic: Cochain,
    /// `α = δGω`; absent in degree 0.
    pub primitive: Option<Cochain>,
    /// `β = dGω`; absent in top degree.
    pub copotential: Option<Cochain>,
    /// `‖ω − (exact + coexact + harmonic)‖_M`.
    pub residual: f64,
}

/// Diagnostics of an exactness test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub exact: bool,
    /// `‖dω‖ / ‖ω‖` (0 in top degree or for ω = 0).
    pub closed_residual: f64,
    /// `‖P_H ω‖ / ‖ω‖` (0 for ω = 0).
    pub harmonic_residual: f64,
    pub tolerance: f64,
}

/// Factorized Hodge machinery for one metric; degrees are prepared lazily
/// and cached.
pub struct HodgeSystem {
    metric: Arc<MetricStructure>,
    tol: Tolerances,
    degrees: Vec<OnceLock<Result<DegreeData>>>,
}

impl std::fmt::Debug for HodgeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HodgeSystem")
            .field("metric", &self.metric)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn random_block(len: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

impl HodgeSystem {
    pub fn new(metric: impl Into<Arc<MetricStructure>>) -> Self {
        Self::with_tolerances(metric, Tolerances::default())
    }

    pub fn with_tolerances(metric: impl Into<Arc<MetricStructure>>, tol: Tolerances) -> Self {
        let metric = metric.into();
        let degrees = (0..=metric.dimension()).map(|_| OnceLock::new()).collect();
        Self { metric, tol, degrees }
    }

    pub fn metric(&self) -> &MetricStructure {
        &self.metric
    }

    pub fn metric_arc(&self) -> &Arc<MetricStructure> {
        &self.metric
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn count(&self, p: usize) -> usize {
        self.metric.complex().count(p)
    }

    fn lower(&self, p: usize) -> usize {
        if p == 0 {
            0
        } else {
            self.count(p - 1)
        }
    }

    fn check(&self, x: &Cochain) -> Result<()> {
        x.check_complex(self.metric.complex())
    }

    fn data(&self, p: usize) -> Result<&DegreeData> {
        self.metric.complex().check_degree(p, 0, self.metric.dimension())?;
        self.degrees[p]
            .get_or_init(|| self.prepare(p))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Mixed matrix for `(Δ_p + shift)` with the harmonic border when given.
    fn mixed_matrix(&self, p: usize, shift: f64, border: &[Vec<f64>]) -> CsrMatrix<f64> {
        let metric = &self.metric;
        let (a, m, b) = (self.lower(p), self.count(p), border.len());
        let mut t: Vec<(usize, usize, f64)> = Vec::new();
        if p > 0 {
            t.extend(metric.mass(p - 1).triplets().map(|(i, j, v)| (i, j, -v)));
            for (i, j, v) in metric.weak_codifferential(p).triplets() {
                t.push((i, a + j, v));
                t.push((a + j, i, v));
            }
        }
        t.extend(metric.stiffness(p).triplets().map(|(i, j, v)| (a + i, a + j, v)));
        if shift != 0.0 {
            t.extend(metric.mass(p).triplets().map(|(i, j, v)| (a + i, a + j, shift * v)));
        }
        for (k, h) in border.iter().enumerate() {
            for (i, v) in metric.apply_mass(p, h).into_iter().enumerate() {
                if v != 0.0 {
                    t.push((a + i, a + m + k, v));
                    t.push((a + m + k, a + i, v));
                }
            }
        }
        CsrMatrix::from_triplets(a + m + b, a + m + b, t)
    }

    fn weak_rhs(&self, p: usize, f: &[f64], extra: usize) -> Vec<f64> {
        let mut rhs = vec![0.0; self.lower(p)];
        rhs.extend(self.metric.apply_mass(p, f));
        rhs.extend(std::iter::repeat_n(0.0, extra));
        rhs
    }

    fn estimate_lambda_max(&self, p: usize, rng: &mut ChaCha8Rng) -> f64 {
        let mut x = random_block(self.count(p), 1, rng).pop().unwrap_or_default();
        let mut lambda = 0.0;
        for _ in 0..30 {
            let nx = self.metric.norm_values(p, &x);
            if nx == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.metric.laplacian_values(p, &x);
            lambda = self.metric.inner_values(p, &y, &x);
            x = y;
        }
        lambda
    }

    fn m_orthonormalize(&self, p: usize, cols: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
        for mut v in cols {
            let start = self.metric.norm_values(p, &v);
            for _ in 0..2 {
                for q in &out {
                    let c = self.metric.inner_values(p, q, &v);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let n = self.metric.norm_values(p, &v);
            if n > 1e-12 * start && n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
                out.push(v);
            }
        }
        out
    }

    /// Block inverse iteration on `(Δ_p + shift)⁻¹` with Rayleigh–Ritz.
    /// Returns Ritz values, Ritz vectors and their residuals `‖Δu − θu‖_M`.
    fn subspace_iteration(
        &self,
        p: usize,
        block: usize,
        scale: f64,
        converged: impl Fn(&[f64], &[f64]) -> bool,
        max_iter: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<RitzPairs> {
        let (a, m) = (self.lower(p), self.count(p));
        let block = block.min(m);
        let shift = 1e-8 * scale;
        let lu = SparseLu::factor(&self.mixed_matrix(p, shift, &[]), "shifted Laplacian")?;
        let mut x = self.m_orthonormalize(p, random_block(m, block, rng));
        let mut last = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..max_iter {
            let rhs: Vec<Vec<f64>> = x.iter().map(|v| self.weak_rhs(p, v, 0)).collect();
            let y: Vec<Vec<f64>> = lu
                .solve_columns(&rhs)
                .into_iter()
                .map(|s| s[a..].to_vec())
                .collect();
            let y = self.m_orthonormalize(p, y);
            if y.len() < block {
                return Err(HodgeError::Numerical {
                    what: format!("subspace iteration in degree {p} lost rank"),
                    residual: (block - y.len()) as f64,
                });
            }
            let weak: Vec<Vec<f64>> = y.iter().map(|v| self.metric.weak_laplacian_values(p, v)).collect();
            let k = y.len();
            let ar = DMatrix::from_fn(k, k, |i, j| dot(&y[i], &weak[j]));
            let br = DMatrix::from_fn(k, k, |i, j| self.metric.inner_values(p, &y[i], &y[j]));
            let (theta, v) = generalized_symmetric_eigen(&ar, &br).ok_or_else(|| HodgeError::Numerical {
                what: format!("Rayleigh–Ritz projection in degree {p} is singular"),
                residual: f64::NAN,
            })?;
            let combine = |cols: &[Vec<f64>], j: usize| -> Vec<f64> {
                let mut u = vec![0.0; cols[0].len()];
                for (i, c) in cols.iter().enumerate() {
                    let w = v[(i, j)];
                    u.iter_mut().zip(c).for_each(|(a, b)| *a += w * b);
                }
                u
            };
            let ritz: Vec<Vec<f64>> = (0..k).map(|j| combine(&y, j)).collect();
            let residuals: Vec<f64> = (0..k)
                .map(|j| {
                    let lap = self.metric.solve_mass(p, &combine(&weak, j));
                    let r: Vec<f64> = lap.iter().zip(&ritz[j]).map(|(l, u)| l - theta[j] * u).collect();
                    self.metric.norm_values(p, &r)
                })
                .collect();
            let done = converged(&theta, &residuals);
            last = (theta, ritz, residuals);
            if done {
                break;
            }
            x = last.1.clone();
        }
        Ok(last)
    }

    fn prepare(&self, p: usize) -> Result<DegreeData> {
        let betti = self.metric.complex().betti_numbers()?[p];
        let mut rng = ChaCha8Rng::seed_from_u64(HARMONIC_SEED ^ p as u64);
        let lambda_max = self.estimate_lambda_max(p, &mut rng);
        let scale = if lambda_max > 0.0 { lambda_max } else { 1.0 };
        let cutoff = self.tol.rank_cutoff * scale;
        let (theta, vectors, _) = self.subspace_iteration(
            p,
            betti + 3,
            scale,
            |theta, res| {
                let wanted = (betti + 1).min(theta.len());
                (0..wanted).all(|j| {
                    if theta[j] < cutoff {
                        res[j] <= 1e-11 * scale
                    } else {
                        res[j] <= 1e-3 * theta[j]
                    }
                })
            },
            60,
            &mut rng,
        )?;
        if let Some(&ambiguous) = theta
            .iter()
            .find(|&&t| t > cutoff / 10.0 && t < cutoff * 10.0)
        {
            return Err(HodgeError::RankAmbiguity {
                degree: p,
                eigenvalue: ambiguous,
                cutoff,
            });
        }
        let found = theta.iter().filter(|&&t| t < cutoff).count();
        if found != betti {
            return Err(HodgeError::HarmonicDimension {
                degree: p,
                found,
                betti,
            });
        }
        let harmonic = self.m_orthonormalize(p, vectors.into_iter().take(found).collect());
        let bordered = self.mixed_matrix(p, 0.0, &harmonic);
        let lu = SparseLu::factor(&bordered, "bordered Laplacian")?;
        Ok(DegreeData {
            lambda_max,
            harmonic,
            bordered,
            lu,
        })
    }

    /// Solve the bordered system for `f`, returning `(σ, x, μ)`.
    fn solve(&self, p: usize, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let data = self.data(p)?;
        let (a, m) = (self.lower(p), self.count(p));
        let rhs = self.weak_rhs(p, f, data.harmonic.len());
        let target = self.tol.solver * norm2(&rhs).max(f64::MIN_POSITIVE);
        let mut z = data.lu.solve(&rhs);
        let mut residual = f64::INFINITY;
        for _ in 0..=REFINEMENT_STEPS {
            let az = data.bordered.mul_vec(&z);
            let r: Vec<f64> = rhs.iter().zip(&az).map(|(b, v)| b - v).collect();
            residual = norm2(&r);
            if residual <= target {
                break;
            }
            let dz = data.lu.solve(&r);
            z.iter_mut().zip(dz).for_each(|(x, d)| *x += d);
        }
        if !(residual <= target) {
            return Err(HodgeError::Numerical {
                what: format!("Green solve in degree {p} did not reach the solver tolerance"),
                residual: residual / norm2(&rhs).max(f64::MIN_POSITIVE),
            });
        }
        let mu = z.split_off(a + m);
        let x = z.split_off(a);
        Ok((z, x, mu))
    }

    /// Largest eigenvalue estimate of Δ_p used to scale the rank cutoff.
    pub fn lambda_max(&self, p: usize) -> Result<f64> {
        Ok(self.data(p)?.lambda_max)
    }

    /// M-orthonormal basis of the harmonic p-cochains.
    pub fn harmonic_basis(&self, p: usize) -> Result<Vec<Cochain>> {
        let id = self.metric.complex().id();
        Ok(self
            .data(p)?
            .harmonic
            .iter()
            .map(|h| Cochain::from_parts(p, id, h.clone()))
            .collect())
    }

    pub(crate) fn harmonic_values(&self, p: usize, x: &[f64]) -> Result<Vec<f64>> {
        let data = self.data(p)?;
        let mx = self.metric.apply_mass(p, x);
        let mut out = vec![0.0; x.len()];
        for h in &data.harmonic {
            let c = dot(h, &mx);
            out.iter_mut().zip(h).for_each(|(o, v)| *o += c * v);
        }
        Ok(out)
    }

    /// M-orthogonal projection onto the harmonic space.
    pub fn project_harmonic(&self, x: &Cochain) -> Result<Cochain> {
        self.check(x)?;
        let p = x.degree();
        Ok(Cochain::from_parts(p, x.complex_id(), self.harmonic_values(p, x.values())?))
    }

    pub(crate) fn green_values(&self, p: usize, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve(p, f)?.1)
    }

    /// The Green operator: `Δ(Gω) = ω − P_Hω` with `Gω ⊥ H`.
    pub fn green(&self, omega: &Cochain) -> Result<Cochain> {
        self.check(omega)?;
        let p = omega.degree();
        Ok(Cochain::from_parts(p, omega.complex_id(), self.green_values(p, omega.values())?))
    }

    /// `(Gω, δGω)` from a single solve; the second entry is absent in degree 0.
    pub fn green_and_codifferential(&self, omega: &Cochain) -> Result<(Cochain, Option<Cochain>)> {
        self.check(omega)?;
        let (p, id) = (omega.degree(), omega.complex_id());
        let (sigma, x, _) = self.solve(p, omega.values())?;
        Ok((
            Cochain::from_parts(p, id, x),
            (p > 0).then(|| Cochain::from_parts(p - 1, id, sigma)),
        ))
    }

    /// Exact, coexact and harmonic parts of ω with their potentials.
    pub fn decompose(&self, omega: &Cochain) -> Result<Decomposition> {
        self.check(omega)?;
        let metric = &self.metric;
        let (p, id) = (omega.degree(), omega.complex_id());
        let (sigma, x, _) = self.solve(p, omega.values())?;
        let harmonic = self.harmonic_values(p, omega.values())?;
        let zeros = || vec![0.0; omega.len()];
        let exact = if p > 0 {
            metric.d_values(p - 1, &sigma).expect("p − 1 < n")
        } else {
            zeros()
        };
        let beta = metric.d_values(p, &x);
        let coexact = match &beta {
            Some(b) => metric.delta_values(p + 1, b),
            None => zeros(),
        };
        let rest: Vec<f64> = omega
            .values()
            .iter()
            .zip(&exact)
            .zip(&coexact)
            .zip(&harmonic)
            .map(|(((w, e), c), h)| w - e - c - h)
            .collect();
        let residual = metric.norm_values(p, &rest);
        Ok(Decomposition {
            exact: Cochain::from_parts(p, id, exact),
            coexact: Cochain::from_parts(p, id, coexact),
            harmonic: Cochain::from_parts(p, id, harmonic),
            primitive: (p > 0).then(|| Cochain::from_parts(p - 1, id, sigma)),
            copotential: beta.map(|b| Cochain::from_parts(p + 1, id, b)),
            residual,
        })
    }

    /// Test `‖dω‖ ≤ tol‖ω‖` and `‖P_Hω‖ ≤ tol‖ω‖`.
    pub fn is_exact(&self, omega: &Cochain, tol: f64) -> Result<ExactnessReport> {
        self.check(omega)?;
        let p = omega.degree();
        let norm = self.metric.norm_values(p, omega.values());
        if norm == 0.0 {
            return Ok(ExactnessReport {
                exact: true,
                closed_residual: 0.0,
                harmonic_residual: 0.0,
                tolerance: tol,
            });
        }
        let closed_residual = self
            .metric
            .d_values(p, omega.values())
            .map_or(0.0, |dw| self.metric.norm_values(p + 1, &dw) / norm);
        let harmonic = self.harmonic_values(p, omega.values())?;
        let harmonic_residual = self.metric.norm_values(p, &harmonic) / norm;
        Ok(ExactnessReport {
            exact: closed_residual <= tol && harmonic_residual <= tol,
            closed_residual,
            harmonic_residual,
            tolerance: tol,
        })
    }

    /// The coexact primitive `δGω` of an exact cochain of degree ≥ 1.
    pub fn primitive(&self, omega: &Cochain) -> Result<Cochain> {
        self.check(omega)?;
        let p = omega.degree();
        self.metric.complex().check_degree(p, 1, self.metric.dimension())?;
        let report = self.is_exact(omega, self.tol.exactness)?;
        if !report.exact {
            let reason = if report.closed_residual > report.tolerance {
                "dω ≠ 0 (the cochain is not closed)"
            } else {
                "the harmonic component exceeds the tolerance"
            };
            return Err(HodgeError::NotExact {
                reason: reason.into(),
                closed_residual: report.closed_residual,
                harmonic_residual: report.harmonic_residual,
            });
        }
        let (sigma, _, _) = self.solve(p, omega.values())?;
        Ok(Cochain::from_parts(p - 1, omega.complex_id(), sigma))
    }

    /// The `count` smallest eigenvalues of Δ_p (with multiplicity).
    pub fn low_spectrum(&self, p: usize, count: usize) -> Result<Vec<f64>> {
        self.metric.complex().check_degree(p, 0, self.metric.dimension())?;
        if count == 0 {
            return Ok(Vec::new());
        }
        if count > self.count(p) {
            return Err(HodgeError::Parameter(format!(
                "{count} eigenvalues requested from a space of dimension {}",
                self.count(p)
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(HARMONIC_SEED ^ (p as u64) << 8);
        let lambda_max = self.estimate_lambda_max(p, &mut rng);
        let scale = if lambda_max > 0.0 { lambda_max } else { 1.0 };
        let (theta, _, _) = self.subspace_iteration(
            p,
            count + 4,
            scale,
            |_, res| res.iter().take(count).all(|&r| r <= 1e-10 * scale),
            300,
            &mut rng,
        )?;
        Ok(theta.into_iter().take(count).map(|t| t.max(0.0)).collect())
    }
}
