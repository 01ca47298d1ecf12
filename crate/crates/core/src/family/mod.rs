//! Parametrized families of exact cochains `ω(t) = d(Σᵢ cᵢ(t) φᵢ)` and the
//! finite-difference machinery used to study how `d⁻¹ω(t)` depends on `t`.
//!
//! Each coefficient `cᵢ` is a product of one-variable factors with closed
//! form derivatives of every order, so analytic `∂ₜ^r ω` is always available.

mod difference;
mod mixed;
mod verify;

pub use difference::{centered_difference, difference_at, fd_derivative, DifferenceScheme, GridSamples};
pub use mixed::{mixed_function_names, verify_mixed_partials, MixedPartialsReport, TaylorCheck};
pub use verify::{
    smoothness_report, verify_commutation, ConvergenceSeries, LinearityCheck, SmoothnessReport, STEP_SWEEP,
};

use crate::cochain::Cochain;
use crate::complex::SimplicialComplex;
use crate::error::{HodgeError, Result};
use crate::hodge::{ExactnessReport, HodgeSystem};
use crate::oracle::{Manifold, SpectralForm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One uniform parameter axis `start + i·step`, `i < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

/// Uniform tensor grid in parameter space (one or two axes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGrid {
    axes: Vec<Axis>,
}

impl ParamGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(HodgeError::Grid(format!(
                "parameter dimension must be 1 or 2, got {}",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.step > 0.0 && a.step.is_finite() && a.start.is_finite()) || a.count == 0 {
                return Err(HodgeError::Grid(format!("axis {i} needs a positive finite step and at least one point")));
            }
        }
        Ok(Self { axes })
    }

    /// `count` points spanning `[t0, t1]` on every one of `dims` axes.
    pub fn uniform(t0: f64, t1: f64, count: usize, dims: usize) -> Result<Self> {
        if count < 2 || !(t1 > t0) {
            return Err(HodgeError::Grid(format!(
                "a uniform grid needs t1 > t0 and at least 2 points (got [{t0}, {t1}], {count})"
            )));
        }
        let step = (t1 - t0) / (count - 1) as f64;
        Self::new(vec![Axis { start: t0, step, count }; dims])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        index.len() == self.dims() && index.iter().zip(&self.axes).all(|(i, a)| *i < a.count)
    }

    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        index
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.start + i as f64 * a.step)
            .collect()
    }

    /// All multi-indices in lexicographic order (last axis fastest).
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for a in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..a.count).map(move |i| {
                        let mut v = prefix.clone();
                        v.push(i);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Grid midpoint, the probe point for rate checks.
    pub fn midpoint(&self) -> Vec<usize> {
        self.axes.iter().map(|a| (a.count - 1) / 2).collect()
    }

    /// `h / step` along an axis, which must be a positive integer.
    pub fn step_multiple(&self, direction: usize, h: f64) -> Result<usize> {
        let axis = self
            .axes
            .get(direction)
            .ok_or_else(|| HodgeError::Grid(format!("direction {direction} on a {}-dimensional grid", self.dims())))?;
        let m = (h / axis.step).round();
        if !(m >= 1.0) || (m * axis.step - h).abs() > 1e-9 * h {
            return Err(HodgeError::Grid(format!(
                "step h = {h} is not a positive integer multiple of the grid step {}",
                axis.step
            )));
        }
        Ok(m as usize)
    }
}

/// A one-variable coefficient factor with derivatives of every order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    One,
    T,
    TSquared,
    Sin,
    Cos,
    ExpCos,
}

impl Factor {
    /// `r`-th derivative at `t`.
    pub fn derivative(self, r: u32, t: f64) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        match self {
            Factor::One => f64::from(u8::from(r == 0)),
            Factor::T => match r {
                0 => t,
                1 => 1.0,
                _ => 0.0,
            },
            Factor::TSquared => match r {
                0 => t * t,
                1 => 2.0 * t,
                2 => 2.0,
                _ => 0.0,
            },
            Factor::Sin => (t + f64::from(r) * FRAC_PI_2).sin(),
            Factor::Cos => (t + f64::from(r) * FRAC_PI_2).cos(),
            // (e^t cos t)^{(r)} = 2^{r/2} e^t cos(t + rπ/4)
            Factor::ExpCos => 2f64.powf(f64::from(r) / 2.0) * t.exp() * (t + f64::from(r) * FRAC_PI_2 / 2.0).cos(),
        }
    }
}

/// `Π_a factor_a(t_a) · dφ_potential`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub factors: Vec<Factor>,
    pub potential: usize,
}

impl Term {
    /// Mixed partial derivative of the coefficient with orders `r` per axis.
    pub fn coefficient(&self, orders: &[u32], t: &[f64]) -> f64 {
        self.factors
            .iter()
            .zip(orders)
            .zip(t)
            .map(|((f, &r), &x)| f.derivative(r, x))
            .product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potentials {
    /// Seeded standard-normal (p−1)-cochains.
    Random,
    /// De Rham samples of fixed trigonometric forms on the flat torus.
    TorusTrig,
}

/// A registry entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDefinition {
    pub name: String,
    pub params: usize,
    pub terms: Vec<Term>,
    pub potentials: Potentials,
}

impl FamilyDefinition {
    fn potential_count(&self) -> usize {
        self.terms.iter().map(|t| t.potential + 1).max().unwrap_or(0)
    }
}

/// Names accepted by [`family_definition`].
pub const FAMILY_NAMES: [&str; 8] = [
    "constant",
    "linear",
    "quadratic",
    "sine",
    "sine-quadratic",
    "exp-cos",
    "torus-trig",
    "bilinear-2d",
];

pub fn family_definition(name: &str) -> Result<FamilyDefinition> {
    use Factor::*;
    let one = |f: Factor, potential: usize| Term {
        factors: vec![f],
        potential,
    };
    let (params, terms, potentials) = match name {
        "constant" => (1, vec![one(One, 0)], Potentials::Random),
        "linear" => (1, vec![one(T, 0)], Potentials::Random),
        "quadratic" => (1, vec![one(TSquared, 0)], Potentials::Random),
        "sine" => (1, vec![one(Sin, 0)], Potentials::Random),
        "sine-quadratic" => (1, vec![one(Sin, 0), one(TSquared, 1)], Potentials::Random),
        "exp-cos" => (1, vec![one(ExpCos, 0), one(One, 1)], Potentials::Random),
        "torus-trig" => (1, vec![one(Sin, 0), one(TSquared, 1)], Potentials::TorusTrig),
        "bilinear-2d" => (
            2,
            vec![
                Term {
                    factors: vec![T, T],
                    potential: 0,
                },
                Term {
                    factors: vec![Sin, Cos],
                    potential: 1,
                },
            ],
            Potentials::Random,
        ),
        _ => {
            return Err(HodgeError::UnknownRegistry {
                kind: "family".into(),
                name: name.into(),
            })
        }
    };
    Ok(FamilyDefinition {
        name: name.into(),
        params,
        terms,
        potentials,
    })
}

/// What to sample: a registry family in a degree on a parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    pub degree: usize,
    pub grid: ParamGrid,
    pub seed: u64,
}

impl FamilySpec {
    /// The standard grid `[0, 1]` with 41 points per axis.
    pub fn standard(family: &str, degree: usize, seed: u64) -> Result<Self> {
        let def = family_definition(family)?;
        Ok(Self {
            family: family.into(),
            degree,
            grid: ParamGrid::uniform(0.0, 1.0, 41, def.params)?,
            seed,
        })
    }
}

fn torus_potential(degree: usize, index: usize) -> Result<SpectralForm> {
    let form = match (degree, index % 2) {
        (0, 0) => SpectralForm::zero(Manifold::T2, 0)?
            .with_sin(0, [1, 0], 1.0)?
            .with_cos(0, [0, 2], 0.5)?,
        (0, _) => SpectralForm::zero(Manifold::T2, 0)?.with_cos(0, [1, 1], 1.0)?,
        (_, 0) => SpectralForm::zero(Manifold::T2, 1)?.with_sin(1, [1, 0], 1.0)?,
        (_, _) => SpectralForm::zero(Manifold::T2, 1)?
            .with_cos(0, [0, 1], 1.0)?
            .with_sin(1, [1, -1], 0.3)?,
    };
    Ok(form)
}

/// A family resolved on a complex: `ω(t) = Σᵢ cᵢ(t) ηᵢ` with exact `ηᵢ = dφᵢ`.
#[derive(Clone, Debug)]
pub struct Family {
    spec: FamilySpec,
    definition: FamilyDefinition,
    exact_parts: Vec<Cochain>,
}

impl Family {
    pub fn new(spec: FamilySpec, complex: &SimplicialComplex) -> Result<Self> {
        let definition = family_definition(&spec.family)?;
        if spec.grid.dims() != definition.params {
            return Err(HodgeError::Grid(format!(
                "family '{}' has {} parameters but the grid has {} axes",
                definition.name,
                definition.params,
                spec.grid.dims()
            )));
        }
        let p = spec.degree;
        complex.check_degree(p, 1, complex.dimension())?;
        let mut exact_parts = Vec::new();
        for i in 0..definition.potential_count() {
            let phi = match definition.potentials {
                Potentials::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                    rng.set_stream(i as u64);
                    Cochain::random(complex, p - 1, &mut rng)?
                }
                Potentials::TorusTrig => {
                    if p > 2 {
                        return Err(HodgeError::Capability(format!(
                            "torus potentials exist only up to degree 2, got {p}"
                        )));
                    }
                    torus_potential(p - 1, i)?.sample(complex)?
                }
            };
            exact_parts.push(complex.d(&phi)?);
        }
        Ok(Self {
            spec,
            definition,
            exact_parts,
        })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn definition(&self) -> &FamilyDefinition {
        &self.definition
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.spec.grid
    }

    /// `∂^orders ω(t)` from the analytic coefficient derivatives.
    pub fn derivative(&self, orders: &[u32], t: &[f64]) -> Cochain {
        let mut values = vec![0.0; self.exact_parts[0].len()];
        for term in &self.definition.terms {
            let c = term.coefficient(orders, t);
            if c != 0.0 {
                for (v, e) in values.iter_mut().zip(self.exact_parts[term.potential].values()) {
                    *v += c * e;
                }
            }
        }
        let id = self.exact_parts[0].complex_id();
        Cochain::from_parts(self.spec.degree, id, values)
    }

    pub fn evaluate(&self, t: &[f64]) -> Cochain {
        self.derivative(&vec![0; t.len()], t)
    }

    /// Whether some coefficient has a nonzero `order`-th derivative along
    /// `direction` at `t`.
    pub fn has_nonzero_derivative(&self, direction: usize, order: u32, t: &[f64]) -> bool {
        let mut orders = vec![0; t.len()];
        orders[direction] = order;
        self.definition
            .terms
            .iter()
            .any(|term| term.coefficient(&orders, t).abs() > 1e-12)
    }
}

/// One sampled grid point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilySample {
    pub index: Vec<usize>,
    pub t: Vec<f64>,
    pub omega: Cochain,
    pub exactness: ExactnessReport,
}

/// Sample ω at every grid point, verifying exactness at tolerance 1e-8.
pub fn sample_family(family: &Family, system: &HodgeSystem) -> Result<Vec<FamilySample>> {
    use rayon::prelude::*;
    family
        .grid()
        .indices()
        .into_par_iter()
        .map(|index| {
            let t = family.grid().point(&index);
            let omega = family.evaluate(&t);
            let exactness = system.is_exact(&omega, 1e-8)?;
            if !exactness.exact {
                return Err(HodgeError::NotExact {
                    reason: format!("family '{}' is not exact at t = {t:?}", family.spec.family),
                    closed_residual: exactness.closed_residual,
                    harmonic_residual: exactness.harmonic_residual,
                });
            }
            Ok(FamilySample {
                index,
                t,
                omega,
                exactness,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::metric::{build_metric, Scheme};

    fn torus_system() -> HodgeSystem {
        HodgeSystem::new(build_metric(corpus::flat_torus(8).unwrap(), Scheme::Whitney).unwrap())
    }

    #[test]
    fn factor_derivatives_match_finite_differences() {
        let h = 1e-5;
        for f in [Factor::One, Factor::T, Factor::TSquared, Factor::Sin, Factor::Cos, Factor::ExpCos] {
            for r in 0..4 {
                let fd = (f.derivative(r, 0.3 + h) - f.derivative(r, 0.3 - h)) / (2.0 * h);
                assert!((fd - f.derivative(r + 1, 0.3)).abs() < 1e-8, "{f:?} r={r}");
            }
        }
    }

    #[test]
    fn grid_geometry() {
        let g = ParamGrid::uniform(0.0, 1.0, 41, 1).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g.midpoint(), vec![20]);
        assert!((g.point(&[20])[0] - 0.5).abs() < 1e-15);
        assert_eq!(g.step_multiple(0, 0.2).unwrap(), 8);
        assert!(matches!(g.step_multiple(0, 0.03), Err(HodgeError::Grid(_))));
        let g2 = ParamGrid::uniform(0.0, 1.0, 3, 2).unwrap();
        assert_eq!(g2.indices().len(), 9);
        assert_eq!(g2.indices()[1], vec![0, 1]);
        assert!(ParamGrid::new(vec![]).is_err());
    }

    #[test]
    fn sampled_families_are_exact() {
        let s = torus_system();
        let spec = FamilySpec {
            family: "torus-trig".into(),
            degree: 1,
            grid: ParamGrid::uniform(0.0, 1.0, 11, 1).unwrap(),
            seed: 0,
        };
        let fam = Family::new(spec, s.metric().complex()).unwrap();
        let samples = sample_family(&fam, &s).unwrap();
        assert_eq!(samples.len(), 11);
        assert!(samples.iter().all(|x| x.exactness.exact));
    }

    #[test]
    fn constant_and_linear_families() {
        let s = torus_system();
        let c = s.metric().complex();
        let constant = Family::new(FamilySpec::standard("constant", 2, 4).unwrap(), c).unwrap();
        assert_eq!(constant.evaluate(&[0.1]), constant.evaluate(&[0.9]));
        let linear = Family::new(FamilySpec::standard("linear", 2, 4).unwrap(), c).unwrap();
        assert!(linear.evaluate(&[0.0]).is_zero());
    }

    #[test]
    fn registry_errors() {
        assert!(matches!(family_definition("cubic"), Err(HodgeError::UnknownRegistry { .. })));
        let s = torus_system();
        let mut spec = FamilySpec::standard("bilinear-2d", 1, 0).unwrap();
        spec.grid = ParamGrid::uniform(0.0, 1.0, 5, 1).unwrap();
        assert!(matches!(Family::new(spec, s.metric().complex()), Err(HodgeError::Grid(_))));
        let spec = FamilySpec::standard("sine", 0, 0).unwrap();
        assert!(matches!(Family::new(spec, s.metric().complex()), Err(HodgeError::Degree { .. })));
        let sphere = corpus::octahedron_sphere(0).unwrap();
        let spec = FamilySpec::standard("torus-trig", 1, 0).unwrap();
        assert!(matches!(Family::new(spec, &sphere), Err(HodgeError::Domain(_))));
    }
}
