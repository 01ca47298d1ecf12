//! Fourier-spectral Hodge calculus on the flat circle ℝ/2πℤ and the flat
//! torus ℝ²/(2πℤ)², used as ground truth for the discrete operators.
//!
//! Forms are finite sums of modes `c·e^{i k·x}` per component. Components
//! are ordered `f` (degree 0), `u dx + v dy` (degree 1 on T²), `w dx∧dy`
//! (degree 2) and `f dx` (degree 1 on T¹).

use crate::cochain::Cochain;
use crate::complex::SimplicialComplex;
use crate::corpus;
use crate::error::{HodgeError, Result};
use crate::hodge::HodgeSystem;
use crate::linalg::fit_log_slope;
use crate::metric::{build_metric, Scheme};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    T1,
    T2,
}

impl Manifold {
    pub fn dimension(self) -> usize {
        match self {
            Manifold::T1 => 1,
            Manifold::T2 => 2,
        }
    }

    fn components(self, degree: usize) -> usize {
        match (self, degree) {
            (Manifold::T2, 1) => 2,
            _ => 1,
        }
    }

    /// Corpus mesh of this manifold at resolution `n`.
    pub fn mesh(self, n: usize) -> Result<SimplicialComplex> {
        match self {
            Manifold::T1 => corpus::flat_circle(n),
            Manifold::T2 => corpus::flat_torus(n),
        }
    }
}

impl std::str::FromStr for Manifold {
    type Err = HodgeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(Manifold::T1),
            "t2" => Ok(Manifold::T2),
            other => Err(HodgeError::Parameter(format!("unknown manifold '{other}' (expected t1 or t2)"))),
        }
    }
}

pub type Frequency = [i64; 2];
type Modes = BTreeMap<Frequency, Complex64>;

/// A trigonometric-polynomial p-form on T¹ or T².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralForm {
    manifold: Manifold,
    degree: usize,
    components: Vec<Modes>,
    real: bool,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

fn wave(k: Frequency) -> [Complex64; 2] {
    [I * k[0] as f64, I * k[1] as f64]
}

impl SpectralForm {
    pub fn zero(manifold: Manifold, degree: usize) -> Result<Self> {
        if degree > manifold.dimension() {
            return Err(HodgeError::Degree {
                degree,
                min: 0,
                max: manifold.dimension(),
            });
        }
        Ok(Self {
            manifold,
            degree,
            components: vec![Modes::new(); manifold.components(degree)],
            real: true,
        })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Whether the form was declared real-valued (conjugate-symmetric modes).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coefficients(&self, component: usize) -> &BTreeMap<Frequency, Complex64> {
        &self.components[component]
    }

    fn check_frequency(&self, k: Frequency) -> Result<()> {
        if self.manifold == Manifold::T1 && k[1] != 0 {
            return Err(HodgeError::Parameter(format!("frequency {k:?} has a y-part on the circle")));
        }
        Ok(())
    }

    fn add_raw(&mut self, component: usize, k: Frequency, c: Complex64) {
        let entry = self.components[component].entry(k).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.components[component].remove(&k);
        }
    }

    /// Add the complex mode `c·e^{ik·x}`; the form is no longer flagged real.
    pub fn with_mode(mut self, component: usize, k: Frequency, c: Complex64) -> Result<Self> {
        self.check_component(component)?;
        self.check_frequency(k)?;
        self.add_raw(component, k, c);
        self.real = false;
        Ok(self)
    }

    /// Add `amp·cos(k·x)` to a component.
    pub fn with_cos(mut self, component: usize, k: Frequency, amp: f64) -> Result<Self> {
        self.check_component(component)?;
        self.check_frequency(k)?;
        if k == [0, 0] {
            self.add_raw(component, k, Complex64::new(amp, 0.0));
        } else {
            self.add_raw(component, k, Complex64::new(amp / 2.0, 0.0));
            self.add_raw(component, [-k[0], -k[1]], Complex64::new(amp / 2.0, 0.0));
        }
        Ok(self)
    }

    /// Add `amp·sin(k·x)` to a component.
    pub fn with_sin(mut self, component: usize, k: Frequency, amp: f64) -> Result<Self> {
        self.check_component(component)?;
        self.check_frequency(k)?;
        if k != [0, 0] {
            self.add_raw(component, k, Complex64::new(0.0, -amp / 2.0));
            self.add_raw(component, [-k[0], -k[1]], Complex64::new(0.0, amp / 2.0));
        }
        Ok(self)
    }

    fn check_component(&self, component: usize) -> Result<()> {
        if component >= self.components.len() {
            return Err(HodgeError::Shape(format!(
                "component {component} of a {}-form with {} components",
                self.degree,
                self.components.len()
            )));
        }
        Ok(())
    }

    /// Largest coefficient modulus; zero for the zero form.
    pub fn max_coefficient(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|m| m.values())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|m| m.is_empty())
    }

    /// `max |c_k − conj(c_{−k})|`; zero exactly for real forms.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for m in &self.components {
            for (k, c) in m {
                let partner = m.get(&[-k[0], -k[1]]).copied().unwrap_or_default();
                worst = worst.max((c - partner.conj()).norm());
            }
        }
        worst
    }

    fn same_kind(&self, other: &SpectralForm) -> Result<()> {
        if self.manifold != other.manifold || self.degree != other.degree {
            return Err(HodgeError::Shape(format!(
                "{:?} {}-form combined with {:?} {}-form",
                self.manifold, self.degree, other.manifold, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralForm) -> Result<SpectralForm> {
        self.same_kind(other)?;
        let mut out = self.clone();
        for (c, m) in other.components.iter().enumerate() {
            for (k, v) in m {
                out.add_raw(c, *k, *v);
            }
        }
        out.real = self.real && other.real;
        Ok(out)
    }

    pub fn scale(&self, a: f64) -> SpectralForm {
        let mut out = self.clone();
        for m in &mut out.components {
            m.values_mut().for_each(|v| *v *= a);
            m.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        }
        out
    }

    fn map_modes(&self, degree: usize, f: impl Fn(Frequency, &[Complex64]) -> Vec<Complex64>) -> SpectralForm {
        let mut keys: Vec<Frequency> = self.components.iter().flat_map(|m| m.keys().copied()).collect();
        keys.sort();
        keys.dedup();
        let mut out = SpectralForm::zero(self.manifold, degree).expect("degree in range");
        out.real = self.real;
        for k in keys {
            let coeffs: Vec<Complex64> = self
                .components
                .iter()
                .map(|m| m.get(&k).copied().unwrap_or_default())
                .collect();
            for (c, v) in f(k, &coeffs).into_iter().enumerate() {
                if v != Complex64::new(0.0, 0.0) {
                    out.add_raw(c, k, v);
                }
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<SpectralForm> {
        let n = self.manifold.dimension();
        if self.degree >= n {
            return Err(HodgeError::Degree {
                degree: self.degree,
                min: 0,
                max: n - 1,
            });
        }
        Ok(match (self.manifold, self.degree) {
            (Manifold::T1, _) => self.map_modes(1, |k, c| vec![wave(k)[0] * c[0]]),
            (Manifold::T2, 0) => self.map_modes(1, |k, c| {
                let [ikx, iky] = wave(k);
                vec![ikx * c[0], iky * c[0]]
            }),
            // d(u dx + v dy) = (∂ₓv − ∂_y u) dx∧dy
            _ => self.map_modes(2, |k, c| {
                let [ikx, iky] = wave(k);
                vec![ikx * c[1] - iky * c[0]]
            }),
        })
    }

    /// Codifferential with the flat-metric sign conventions
    /// `δ(f dx) = −f'`, `δ(u dx + v dy) = −(∂ₓu + ∂_y v)`,
    /// `δ(w dx∧dy) = ∂_y w dx − ∂ₓ w dy`.
    pub fn delta(&self) -> Result<SpectralForm> {
        if self.degree == 0 {
            return Err(HodgeError::Degree {
                degree: 0,
                min: 1,
                max: self.manifold.dimension(),
            });
        }
        Ok(match (self.manifold, self.degree) {
            (Manifold::T1, _) => self.map_modes(0, |k, c| vec![-wave(k)[0] * c[0]]),
            (Manifold::T2, 1) => self.map_modes(0, |k, c| {
                let [ikx, iky] = wave(k);
                vec![-(ikx * c[0] + iky * c[1])]
            }),
            _ => self.map_modes(1, |k, c| {
                let [ikx, iky] = wave(k);
                vec![iky * c[0], -ikx * c[0]]
            }),
        })
    }

    /// Δ multiplies every mode by `|k|²`.
    pub fn laplacian(&self) -> SpectralForm {
        self.map_modes(self.degree, |k, c| {
            let s = (k[0] * k[0] + k[1] * k[1]) as f64;
            c.iter().map(|v| v * s).collect()
        })
    }

    /// The harmonic part: the `k = 0` modes.
    pub fn harmonic_part(&self) -> SpectralForm {
        self.map_modes(self.degree, |k, c| {
            if k == [0, 0] {
                c.to_vec()
            } else {
                vec![Complex64::default(); c.len()]
            }
        })
    }

    /// Divide nonzero modes by `|k|²` and drop the harmonic modes.
    pub fn green(&self) -> SpectralForm {
        self.map_modes(self.degree, |k, c| {
            let s = (k[0] * k[0] + k[1] * k[1]) as f64;
            c.iter()
                .map(|v| if s == 0.0 { Complex64::default() } else { v / s })
                .collect()
        })
    }

    /// `δG` applied to an exact form.
    pub fn primitive(&self) -> Result<SpectralForm> {
        let closed_residual = if self.degree < self.manifold.dimension() {
            self.d()?.max_coefficient()
        } else {
            0.0
        };
        let harmonic_residual = self.harmonic_part().max_coefficient();
        let scale = self.max_coefficient();
        if closed_residual > 1e-12 * scale || harmonic_residual > 1e-12 * scale {
            return Err(HodgeError::NotExact {
                reason: if closed_residual > 1e-12 * scale {
                    "dω ≠ 0 (the form is not closed)".into()
                } else {
                    "the form has a harmonic (constant-coefficient) component".into()
                },
                closed_residual,
                harmonic_residual,
            });
        }
        self.green().delta()
    }

    /// `∫ ⟨self, other⟩` over the manifold by Parseval.
    pub fn inner(&self, other: &SpectralForm) -> Result<f64> {
        self.same_kind(other)?;
        let volume = (2.0 * PI).powi(self.manifold.dimension() as i32);
        let mut total = Complex64::default();
        for (a, b) in self.components.iter().zip(&other.components) {
            for (k, c) in a {
                if let Some(d) = b.get(k) {
                    total += c * d.conj();
                }
            }
        }
        Ok(volume * total.re)
    }

    /// Value of a component at a point (real part).
    pub fn evaluate(&self, component: usize, x: &[f64]) -> f64 {
        let y = x.get(1).copied().unwrap_or(0.0);
        self.components[component]
            .iter()
            .map(|(k, c)| (c * Complex64::new(0.0, k[0] as f64 * x[0] + k[1] as f64 * y).exp()).re)
            .sum()
    }

    /// De Rham map: integrate the form over every simplex of a flat circle or
    /// torus mesh.
    pub fn sample(&self, complex: &SimplicialComplex) -> Result<Cochain> {
        let n = self.manifold.dimension();
        let flat = complex.dimension() == n
            && complex
                .periods()
                .is_some_and(|p| p.len() == n && p.iter().all(|l| (l - 2.0 * PI).abs() < 1e-12));
        if !flat {
            return Err(HodgeError::Domain(format!(
                "mesh '{}' is not a flat {:?} with period 2π",
                complex.name(),
                self.manifold
            )));
        }
        let p = self.degree;
        let mut values = Vec::with_capacity(complex.count(p));
        for (idx, simplex) in complex.simplices(p).iter().enumerate() {
            let pts: Vec<[f64; 2]> = complex
                .simplex_points(simplex)
                .iter()
                .map(|q| [q[0], q.get(1).copied().unwrap_or(0.0)])
                .collect();
            let v = match p {
                0 => self.evaluate(0, &pts[0]),
                1 => {
                    let dx = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
                    (0..self.components.len())
                        .map(|c| dx[c] * self.integrate_segment(c, pts[0], dx))
                        .sum()
                }
                _ => {
                    let e1 = [pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]];
                    let e2 = [pts[2][0] - pts[0][0], pts[2][1] - pts[0][1]];
                    let jac = e1[0] * e2[1] - e1[1] * e2[0];
                    jac * self.integrate_triangle(pts[0], e1, e2)
                }
            };
            // top-degree values are integrals over the manifold orientation
            let sign = if p == n { f64::from(complex.top_orientation()[idx]) } else { 1.0 };
            values.push(sign * v);
        }
        Cochain::new(complex, p, values)
    }

    /// `∫₀¹ f(a + s·e) ds` for component `c`.
    fn integrate_segment(&self, c: usize, a: [f64; 2], e: [f64; 2]) -> f64 {
        self.components[c]
            .iter()
            .map(|(k, coef)| {
                let ka = k[0] as f64 * a[0] + k[1] as f64 * a[1];
                let z = I * (k[0] as f64 * e[0] + k[1] as f64 * e[1]);
                (coef * (I * ka).exp() * phi1(z)).re
            })
            .sum()
    }

    /// `∫_{standard simplex} w(a + s e1 + t e2) ds dt`.
    fn integrate_triangle(&self, a: [f64; 2], e1: [f64; 2], e2: [f64; 2]) -> f64 {
        self.components[0]
            .iter()
            .map(|(k, coef)| {
                let (kx, ky) = (k[0] as f64, k[1] as f64);
                let z1 = I * (kx * e1[0] + ky * e1[1]);
                let z2 = I * (kx * e2[0] + ky * e2[1]);
                (coef * (I * (kx * a[0] + ky * a[1])).exp() * exp_divided_difference3(Complex64::default(), z1, z2)).re
            })
            .sum()
    }
}

/// `(e^z − 1)/z`, continuous at 0.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for j in 2..30 {
            term = term * z / j as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `exp[x, y]`.
fn exp_divided_difference2(x: Complex64, y: Complex64) -> Complex64 {
    x.exp() * phi1(y - x)
}

/// `exp[x0, x1, x2]`, which equals the integral of `e^{x0 + s(x1−x0) + t(x2−x0)}`
/// over the standard triangle.
fn exp_divided_difference3(x0: Complex64, x1: Complex64, x2: Complex64) -> Complex64 {
    let pts = [x0, x1, x2];
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let (a, b, mid) = pairs
        .into_iter()
        .max_by(|p, q| (pts[p.0] - pts[p.1]).norm().total_cmp(&(pts[q.0] - pts[q.1]).norm()))
        .expect("three pairs");
    let spread = (pts[a] - pts[b]).norm();
    if spread < 1.0 {
        // Σ_j h_j(y)/(j+2)! around the centroid, h_j complete homogeneous
        let c = (x0 + x1 + x2) / 3.0;
        let y = [x0 - c, x1 - c, x2 - c];
        let terms = 30;
        let mut h = vec![Complex64::new(1.0, 0.0); terms];
        for j in 1..terms {
            h[j] = h[j - 1] * y[0];
        }
        for &yi in &y[1..] {
            for j in 1..terms {
                h[j] = h[j] + yi * h[j - 1];
            }
        }
        let mut fact = 2.0;
        let mut sum = Complex64::default();
        for (j, hj) in h.iter().enumerate() {
            sum += hj / fact;
            fact *= (j + 3) as f64;
        }
        c.exp() * sum
    } else {
        (exp_divided_difference2(pts[mid], pts[b]) - exp_divided_difference2(pts[a], pts[mid])) / (pts[b] - pts[a])
    }
}

/// Named oracle forms available to the command line.
pub const ORACLE_FORMS: [&str; 8] = [
    "constant",
    "sin_x",
    "dx",
    "sin_x_dy",
    "cos_x_dxdy",
    "mixed_trig_1form",
    "circle_cos_x",
    "circle_sin_2x_dx",
];

/// Build a named oracle form.
pub fn oracle_form(name: &str) -> Result<SpectralForm> {
    use Manifold::{T1, T2};
    match name {
        "constant" => SpectralForm::zero(T2, 0)?.with_cos(0, [0, 0], 1.0),
        "sin_x" => SpectralForm::zero(T2, 0)?.with_sin(0, [1, 0], 1.0),
        "dx" => SpectralForm::zero(T2, 1)?.with_cos(0, [0, 0], 1.0),
        "sin_x_dy" => SpectralForm::zero(T2, 1)?.with_sin(1, [1, 0], 1.0),
        "cos_x_dxdy" => SpectralForm::zero(T2, 2)?.with_cos(0, [1, 0], 1.0),
        "mixed_trig_1form" => SpectralForm::zero(T2, 1)?
            .with_cos(0, [1, 2], 0.5)?
            .with_sin(1, [2, -1], 1.0)?
            .with_cos(1, [0, 1], -0.25),
        "circle_cos_x" => SpectralForm::zero(T1, 0)?.with_cos(0, [1, 0], 1.0),
        "circle_sin_2x_dx" => SpectralForm::zero(T1, 1)?.with_sin(0, [2, 0], 1.0),
        _ => Err(HodgeError::UnknownRegistry {
            kind: "oracle form".into(),
            name: name.into(),
        }),
    }
}

/// Which discrete operator a sweep compares against the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Green,
    Primitive,
    Laplacian,
}

/// Errors of a discrete operator against the oracle over a mesh sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub quantity: String,
    pub resolutions: Vec<usize>,
    /// Mesh size `2π/N` for each resolution.
    pub mesh_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares log-log slope of error against mesh size.
    pub rate: Option<f64>,
    pub fit_residual: Option<f64>,
}

impl ConvergenceReport {
    fn new(quantity: String, resolutions: &[usize], errors: Vec<f64>) -> Self {
        let mesh_sizes: Vec<f64> = resolutions.iter().map(|&n| 2.0 * PI / n as f64).collect();
        let fit = if resolutions.len() >= 3 {
            fit_log_slope(&mesh_sizes, &errors)
        } else {
            None
        };
        Self {
            quantity,
            resolutions: resolutions.to_vec(),
            mesh_sizes,
            errors,
            rate: fit.map(|f| f.0),
            fit_residual: fit.map(|f| f.1),
        }
    }
}

/// L² (mass-matrix) error of a discrete operator against the sampled oracle
/// result on `N`-resolution meshes.
pub fn convergence_sweep(
    form: &SpectralForm,
    quantity: Quantity,
    resolutions: &[usize],
    scheme: Scheme,
) -> Result<ConvergenceReport> {
    if resolutions.len() < 3 {
        return Err(HodgeError::Parameter(format!(
            "a convergence sweep needs at least 3 resolutions, got {}",
            resolutions.len()
        )));
    }
    let exact = match quantity {
        Quantity::Green => form.green(),
        Quantity::Primitive => form.primitive()?,
        Quantity::Laplacian => form.laplacian(),
    };
    let mut errors = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let mesh = form.manifold().mesh(n)?;
        let omega = form.sample(&mesh)?;
        let reference = exact.sample(&mesh)?;
        let system = HodgeSystem::new(build_metric(mesh, scheme)?);
        let computed = match quantity {
            Quantity::Green => system.green(&omega)?,
            Quantity::Primitive => system.primitive(&omega)?,
            Quantity::Laplacian => system.metric().laplacian(form.degree())?.apply(&omega)?,
        };
        errors.push(system.metric().l2_norm(&computed.sub(&reference)?)?);
    }
    let label = format!("{quantity:?}").to_lowercase();
    Ok(ConvergenceReport::new(label, resolutions, errors))
}

/// `|λ₁ − 1|` for the first nonzero eigenvalue of Δ⁰ on inscribed unit-circle polygons.
pub fn circle_eigenvalue_sweep(resolutions: &[usize], scheme: Scheme) -> Result<ConvergenceReport> {
    let mut errors = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let system = HodgeSystem::new(build_metric(corpus::circle(n)?, scheme)?);
        let spectrum = system.low_spectrum(0, 2)?;
        errors.push((spectrum[1] - 1.0).abs());
    }
    Ok(ConvergenceReport::new("circle_first_eigenvalue".into(), resolutions, errors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &SpectralForm, b: &SpectralForm) -> bool {
        a.add(&b.scale(-1.0)).unwrap().max_coefficient() <= 1e-12 * b.max_coefficient().max(1.0)
    }

    #[test]
    fn torus_identities() {
        let s = oracle_form("sin_x_dy").unwrap();
        let dxdy = oracle_form("cos_x_dxdy").unwrap();
        assert!(close(&s.d().unwrap(), &dxdy));
        assert!(s.delta().unwrap().is_zero());
        assert!(close(&s.green(), &s));
        assert!(close(&dxdy.primitive().unwrap(), &s));
        assert!(oracle_form("constant").unwrap().laplacian().is_zero());
        assert!(SpectralForm::zero(Manifold::T2, 2).unwrap().primitive().unwrap().is_zero());
    }

    #[test]
    fn laplacian_is_dd_plus_dd() {
        let w = oracle_form("mixed_trig_1form").unwrap();
        let lap = w.d().unwrap().delta().unwrap().add(&w.delta().unwrap().d().unwrap()).unwrap();
        assert!(close(&lap, &w.laplacian()));
        assert!(w.d().unwrap().delta().unwrap().delta().unwrap().is_zero());
        assert!(w.conjugate_asymmetry() < 1e-15);
    }

    #[test]
    fn parseval_adjointness() {
        let f = SpectralForm::zero(Manifold::T2, 0)
            .unwrap()
            .with_cos(0, [1, 2], 1.0)
            .unwrap()
            .with_sin(0, [2, -1], 0.7)
            .unwrap();
        let w = oracle_form("mixed_trig_1form").unwrap();
        let lhs = f.d().unwrap().inner(&w).unwrap();
        let rhs = f.inner(&w.delta().unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn primitive_rejects_harmonic_and_non_closed() {
        assert!(matches!(oracle_form("dx").unwrap().primitive(), Err(HodgeError::NotExact { .. })));
        assert!(matches!(oracle_form("mixed_trig_1form").unwrap().primitive(), Err(HodgeError::NotExact { .. })));
    }

    #[test]
    fn divided_differences_agree_across_branches() {
        let z = Complex64::new(0.3, 0.8);
        let w = Complex64::new(-0.2, 0.9);
        // spread just below and above the series threshold give consistent values
        let near = exp_divided_difference3(Complex64::default(), z, w);
        let far = (exp_divided_difference2(z, w) - exp_divided_difference2(Complex64::default(), z)) / w;
        assert!((near - far).norm() < 1e-12);
        // ∫_{triangle} 1 = 1/2
        let zero = Complex64::default();
        assert!((exp_divided_difference3(zero, zero, zero) - 0.5).norm() < 1e-15);
        assert!((phi1(Complex64::new(0.49, 0.0)) - ((0.49f64).exp() - 1.0) / 0.49).norm() < 1e-14);
    }

    #[test]
    fn sampling_commutes_with_d() {
        let mesh = corpus::flat_torus(8).unwrap();
        let f = SpectralForm::zero(Manifold::T2, 0)
            .unwrap()
            .with_cos(0, [1, 2], 1.0)
            .unwrap()
            .with_sin(0, [3, -1], 0.5)
            .unwrap();
        let w = oracle_form("mixed_trig_1form").unwrap();
        for form in [f, w] {
            let lhs = form.d().unwrap().sample(&mesh).unwrap();
            let rhs = mesh.d(&form.sample(&mesh).unwrap()).unwrap();
            let diff = lhs.sub(&rhs).unwrap().coefficient_norm();
            assert!(diff < 1e-12 * rhs.coefficient_norm().max(1.0), "{diff}");
        }
    }

    #[test]
    fn circle_sampling() {
        let mesh = corpus::flat_circle(8).unwrap();
        let dx = SpectralForm::zero(Manifold::T1, 1).unwrap().with_cos(0, [0, 0], 1.0).unwrap();
        let c = dx.sample(&mesh).unwrap();
        // top simplices carry the manifold orientation, so even the seam edge is +π/4
        assert!(c.values().iter().all(|v| (v - PI / 4.0).abs() < 1e-14));
        let one = SpectralForm::zero(Manifold::T1, 0).unwrap().with_cos(0, [0, 0], 3.0).unwrap();
        assert!(one.sample(&mesh).unwrap().values().iter().all(|v| (v - 3.0).abs() < 1e-15));
        let f = oracle_form("circle_cos_x").unwrap();
        let lhs = f.d().unwrap().sample(&mesh).unwrap();
        let rhs = mesh.d(&f.sample(&mesh).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().coefficient_norm() < 1e-13);
    }

    #[test]
    fn triangle_integral_of_constant_is_area() {
        let mesh = corpus::flat_torus(4).unwrap();
        let one = SpectralForm::zero(Manifold::T2, 2).unwrap().with_cos(0, [0, 0], 1.0).unwrap();
        let total: f64 = one.sample(&mesh).unwrap().values().iter().sum();
        assert!((total - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn sampling_rejects_embedded_meshes() {
        let f = oracle_form("sin_x").unwrap();
        assert!(matches!(f.sample(&corpus::octahedron_sphere(0).unwrap()), Err(HodgeError::Domain(_))));
    }

    #[test]
    fn unknown_form() {
        assert!(matches!(oracle_form("tan_x"), Err(HodgeError::UnknownRegistry { .. })));
        for name in ORACLE_FORMS {
            assert!(oracle_form(name).unwrap().is_real());
        }
    }
}
