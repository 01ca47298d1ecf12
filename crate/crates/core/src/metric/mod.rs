//! L² inner products on cochains and the metric operators δ and Δ.
//!
//! The metric enters only through the per-degree mass matrices `M_p`. The
//! codifferential is the `M`-adjoint of the coboundary,
//! `δ_p = M_{p−1}⁻¹ d_{p−1}ᵀ M_p`, applied through a cached factorization of
//! `M_{p−1}` rather than an explicit inverse.

mod geometry;
mod whitney;

use crate::cochain::Cochain;
use crate::complex::SimplicialComplex;
use crate::error::{HodgeError, Result};
use crate::linalg::{dot, SpdSolver};
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// How mass matrices are built from the geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Galerkin mass matrices of Whitney forms.
    Whitney,
    /// Diagonal circumcentric Hodge stars `|⋆σ| / |σ|`.
    Lumped,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Whitney => "whitney",
            Scheme::Lumped => "lumped",
        })
    }
}

impl FromStr for Scheme {
    type Err = HodgeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitney" => Ok(Scheme::Whitney),
            "lumped" => Ok(Scheme::Lumped),
            other => Err(HodgeError::Parameter(format!(
                "unknown metric scheme '{other}' (expected whitney or lumped)"
            ))),
        }
    }
}

/// Per-degree mass matrices with cached factorizations.
pub struct MetricStructure {
    complex: Arc<SimplicialComplex>,
    scheme: Scheme,
    mass: Vec<CsrMatrix<f64>>,
    mass_solver: Vec<SpdSolver>,
    volumes: Vec<Vec<f64>>,
    /// `stiffness[p] = d_pᵀ M_{p+1} d_p` (zero matrix for p = n).
    stiffness: Vec<CsrMatrix<f64>>,
    /// `weak_delta[p] = d_{p−1}ᵀ M_p` (empty 0×n_0 matrix for p = 0).
    weak_delta: Vec<CsrMatrix<f64>>,
}

impl fmt::Debug for MetricStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricStructure")
            .field("complex", &self.complex.name())
            .field("scheme", &self.scheme)
            .finish_non_exhaustive()
    }
}

fn whitney_mass(complex: &SimplicialComplex) -> Result<Vec<CsrMatrix<f64>>> {
    let n = complex.dimension();
    let faces: Vec<Vec<Vec<usize>>> = (0..=n).map(|p| whitney::local_faces(n, p)).collect();
    let mut triplets: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n + 1];
    for top in complex.simplices(n) {
        let points = complex.simplex_points(top);
        let geom = geometry::measure(&points, top)?;
        for p in 0..=n {
            let global: Vec<usize> = faces[p]
                .iter()
                .map(|f| {
                    let verts: Vec<usize> = f.iter().map(|&k| top[k]).collect();
                    complex.simplex_index(p, &verts).expect("face of a top simplex")
                })
                .collect();
            for (a, fa) in faces[p].iter().enumerate() {
                for (b, fb) in faces[p].iter().enumerate().skip(a) {
                    let v = whitney::whitney_inner(&geom, n, fa, fb);
                    triplets[p].push((global[a], global[b], v));
                    if a != b {
                        triplets[p].push((global[b], global[a], v));
                    }
                }
            }
        }
    }
    Ok(triplets
        .into_iter()
        .enumerate()
        .map(|(p, t)| CsrMatrix::from_triplets(complex.count(p), complex.count(p), t))
        .collect())
}

fn lumped_mass(complex: &SimplicialComplex) -> Result<Vec<CsrMatrix<f64>>> {
    let n = complex.dimension();
    let mut diag: Vec<Vec<f64>> = (0..=n).map(|p| vec![0.0; complex.count(p)]).collect();
    match n {
        1 => {
            for (e, edge) in complex.simplices(1).iter().enumerate() {
                let points = complex.simplex_points(edge);
                let geom = geometry::measure(&points, edge)?;
                diag[1][e] = 1.0 / geom.volume;
                for &v in edge {
                    diag[0][v] += geom.volume / 2.0;
                }
            }
        }
        2 => {
            for (t, tri) in complex.simplices(2).iter().enumerate() {
                let points = complex.simplex_points(tri);
                let geom = geometry::measure(&points, tri)?;
                let vec = |a: usize, b: usize| -> Vec<f64> {
                    points[b].iter().zip(&points[a]).map(|(x, y)| x - y).collect()
                };
                let twice_area = 2.0 * geom.volume;
                // cot of the angle at each local vertex
                let mut cot = [0.0; 3];
                for k in 0..3 {
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    cot[k] = dot(&vec(k, i), &vec(k, j)) / twice_area;
                    if cot[k] <= 1e-12 {
                        return Err(HodgeError::Scheme {
                            simplex: tri.clone(),
                            reason: "is not well-centered (circumcenter not strictly interior)".into(),
                        });
                    }
                }
                diag[2][t] = 1.0 / geom.volume;
                for k in 0..3 {
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    let len2 = |a: usize, b: usize| dot(&vec(a, b), &vec(a, b));
                    // Voronoi share of vertex k: (|e_ki|² cot θ_j + |e_kj|² cot θ_i) / 8
                    diag[0][tri[k]] += (len2(k, i) * cot[j] + len2(k, j) * cot[i]) / 8.0;
                    let (a, b) = (tri[i].min(tri[j]), tri[i].max(tri[j]));
                    let e = complex.simplex_index(1, &[a, b]).expect("edge of a triangle");
                    diag[1][e] += cot[k] / 2.0;
                }
            }
        }
        _ => {
            return Err(HodgeError::Scheme {
                simplex: complex.simplices(n).first().cloned().unwrap_or_default(),
                reason: format!("belongs to a {n}-dimensional complex; the lumped scheme supports n ≤ 2"),
            })
        }
    }
    Ok(diag.iter().map(|d| CsrMatrix::from_diagonal(d)).collect())
}

/// Equip a complex with mass matrices for every degree.
pub fn build_metric(complex: impl Into<Arc<SimplicialComplex>>, scheme: Scheme) -> Result<MetricStructure> {
    let complex = complex.into();
    let n = complex.dimension();
    let mass = match scheme {
        Scheme::Whitney => whitney_mass(&complex)?,
        Scheme::Lumped => lumped_mass(&complex)?,
    };
    let mut mass_solver = Vec::with_capacity(n + 1);
    for (p, m) in mass.iter().enumerate() {
        let asym = m.relative_asymmetry();
        if asym > 1e-12 {
            return Err(HodgeError::Numerical {
                what: format!("mass matrix M_{p} is not symmetric"),
                residual: asym,
            });
        }
        let solver = SpdSolver::factor(m).map_err(|e| HodgeError::Numerical {
            what: format!("mass matrix M_{p} is not positive definite: {e}"),
            residual: f64::NAN,
        })?;
        mass_solver.push(solver);
    }
    let volumes = (0..=n)
        .map(|p| {
            complex
                .simplices(p)
                .iter()
                .map(|s| geometry::simplex_volume(&complex.simplex_points(s)))
                .collect()
        })
        .collect();
    let mut stiffness = Vec::with_capacity(n + 1);
    let mut weak_delta = Vec::with_capacity(n + 1);
    for p in 0..=n {
        if p < n {
            let d = complex.coboundary(p)?.to_f64();
            stiffness.push(d.transpose().matmul(&mass[p + 1]).matmul(&d));
        } else {
            stiffness.push(CsrMatrix::zeros(complex.count(p), complex.count(p)));
        }
        if p > 0 {
            let d = complex.coboundary(p - 1)?.to_f64();
            weak_delta.push(d.transpose().matmul(&mass[p]));
        } else {
            weak_delta.push(CsrMatrix::zeros(0, complex.count(0)));
        }
    }
    Ok(MetricStructure {
        complex,
        scheme,
        mass,
        mass_solver,
        volumes,
        stiffness,
        weak_delta,
    })
}

impl MetricStructure {
    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn complex_arc(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dimension(&self) -> usize {
        self.complex.dimension()
    }

    pub fn mass(&self, p: usize) -> &CsrMatrix<f64> {
        &self.mass[p]
    }

    /// Unsigned p-volumes of the p-simplices (1 for vertices).
    pub fn volumes(&self, p: usize) -> &[f64] {
        &self.volumes[p]
    }

    /// Diagonal Hodge star `|⋆σ|/|σ|` of degree p; only the lumped scheme has one.
    pub fn diagonal_star(&self, p: usize) -> Option<Vec<f64>> {
        match self.scheme {
            Scheme::Lumped => Some((0..self.complex.count(p)).map(|i| self.mass[p].get(i, i)).collect()),
            Scheme::Whitney => None,
        }
    }

    /// `d_pᵀ M_{p+1} d_p`, the weak form of δd.
    pub fn stiffness(&self, p: usize) -> &CsrMatrix<f64> {
        &self.stiffness[p]
    }

    /// `d_{p−1}ᵀ M_p`, so that `M_{p−1} δ_p = weak_codifferential(p)`.
    pub fn weak_codifferential(&self, p: usize) -> &CsrMatrix<f64> {
        &self.weak_delta[p]
    }

    pub fn apply_mass(&self, p: usize, x: &[f64]) -> Vec<f64> {
        self.mass[p].mul_vec(x)
    }

    pub fn solve_mass(&self, p: usize, rhs: &[f64]) -> Vec<f64> {
        self.mass_solver[p].solve(rhs)
    }

    fn check(&self, x: &Cochain) -> Result<()> {
        x.check_complex(&self.complex)
    }

    /// `⟨x, y⟩ = xᵀ M_p y`.
    pub fn inner(&self, x: &Cochain, y: &Cochain) -> Result<f64> {
        self.check(x)?;
        x.check_compatible(y)?;
        Ok(self.inner_values(x.degree(), x.values(), y.values()))
    }

    pub fn l2_norm(&self, x: &Cochain) -> Result<f64> {
        Ok(self.inner(x, x)?.max(0.0).sqrt())
    }

    pub(crate) fn inner_values(&self, p: usize, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mass[p].mul_vec(y))
    }

    pub(crate) fn norm_values(&self, p: usize, x: &[f64]) -> f64 {
        self.inner_values(p, x, x).max(0.0).sqrt()
    }

    pub fn codifferential(&self, p: usize) -> Result<Codifferential<'_>> {
        self.complex.check_degree(p, 0, self.dimension())?;
        Ok(Codifferential { metric: self, degree: p })
    }

    /// δ applied to a cochain of degree ≥ 1.
    pub fn delta(&self, y: &Cochain) -> Result<Cochain> {
        self.check(y)?;
        let p = y.degree();
        self.complex.check_degree(p, 1, self.dimension())?;
        Ok(Cochain::from_parts(p - 1, self.complex.id(), self.delta_values(p, y.values())))
    }

    pub(crate) fn delta_values(&self, p: usize, y: &[f64]) -> Vec<f64> {
        self.solve_mass(p - 1, &self.weak_delta[p].mul_vec(y))
    }

    /// d applied to a cochain, or `None` for top-degree input.
    pub(crate) fn d_values(&self, p: usize, x: &[f64]) -> Option<Vec<f64>> {
        (p < self.dimension()).then(|| {
            self.complex
                .coboundary(p)
                .expect("degree checked")
                .apply_real(x)
        })
    }

    pub fn laplacian(&self, p: usize) -> Result<Laplacian<'_>> {
        self.complex.check_degree(p, 0, self.dimension())?;
        Ok(Laplacian { metric: self, degree: p })
    }

    /// `M_p Δ_p x = K_p x + B_pᵀ M_{p−1}⁻¹ B_p x`.
    pub(crate) fn weak_laplacian_values(&self, p: usize, x: &[f64]) -> Vec<f64> {
        let mut out = self.stiffness[p].mul_vec(x);
        if p > 0 {
            let sigma = self.delta_values(p, x);
            let back = self.weak_delta[p].mul_transpose_vec(&sigma);
            for (o, b) in out.iter_mut().zip(back) {
                *o += b;
            }
        }
        out
    }

    pub(crate) fn laplacian_values(&self, p: usize, x: &[f64]) -> Vec<f64> {
        self.solve_mass(p, &self.weak_laplacian_values(p, x))
    }
}

/// The codifferential δ_p as an operator from p-cochains to (p−1)-cochains.
pub struct Codifferential<'a> {
    metric: &'a MetricStructure,
    degree: usize,
}

impl Codifferential<'_> {
    pub fn source_degree(&self) -> usize {
        self.degree
    }

    /// `None` for p = 0, where δ is the zero map into the empty degree.
    pub fn target_degree(&self) -> Option<usize> {
        self.degree.checked_sub(1)
    }

    pub fn apply(&self, y: &Cochain) -> Result<Option<Cochain>> {
        if y.degree() != self.degree {
            return Err(HodgeError::Shape(format!(
                "δ_{} applied to a {}-cochain",
                self.degree,
                y.degree()
            )));
        }
        if self.degree == 0 {
            self.metric.check(y)?;
            return Ok(None);
        }
        self.metric.delta(y).map(Some)
    }

    /// Dense matrix of δ_p (built column by column through the mass solver).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let complex = self.metric.complex();
        let cols = complex.count(self.degree);
        let Some(target) = self.target_degree() else {
            return nalgebra::DMatrix::zeros(0, cols);
        };
        let mut out = nalgebra::DMatrix::zeros(complex.count(target), cols);
        let mut e = vec![0.0; cols];
        for j in 0..cols {
            e[j] = 1.0;
            for (i, v) in self.metric.delta_values(self.degree, &e).into_iter().enumerate() {
                out[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        out
    }
}

/// The Hodge Laplacian Δ_p = δ_{p+1} d_p + d_{p−1} δ_p.
pub struct Laplacian<'a> {
    metric: &'a MetricStructure,
    degree: usize,
}

impl Laplacian<'_> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn apply(&self, x: &Cochain) -> Result<Cochain> {
        self.metric.check(x)?;
        if x.degree() != self.degree {
            return Err(HodgeError::Shape(format!(
                "Δ_{} applied to a {}-cochain",
                self.degree,
                x.degree()
            )));
        }
        Ok(Cochain::from_parts(
            self.degree,
            x.complex_id(),
            self.metric.laplacian_values(self.degree, x.values()),
        ))
    }

    /// `(‖dx‖², ‖δx‖²)`; their sum is `⟨Δx, x⟩`.
    pub fn energy(&self, x: &Cochain) -> Result<(f64, f64)> {
        self.metric.check(x)?;
        let p = self.degree;
        let d_part = self
            .metric
            .d_values(p, x.values())
            .map_or(0.0, |dx| self.metric.inner_values(p + 1, &dx, &dx));
        let delta_part = if p > 0 {
            let dx = self.metric.delta_values(p, x.values());
            self.metric.inner_values(p - 1, &dx, &dx)
        } else {
            0.0
        };
        Ok((d_part, delta_part))
    }

    /// The symmetric pair (`M_p Δ_p` pieces): stiffness `K_p` and `B_p` with
    /// `M_p Δ_p = K_p + B_pᵀ M_{p−1}⁻¹ B_p`.
    pub fn stiffness_pair(&self) -> (&CsrMatrix<f64>, &CsrMatrix<f64>) {
        (
            self.metric.stiffness(self.degree),
            self.metric.weak_codifferential(self.degree),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexBuilder;
    use crate::corpus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn metric(c: SimplicialComplex, scheme: Scheme) -> MetricStructure {
        build_metric(c, scheme).unwrap()
    }

    #[test]
    fn lumped_interval_vertex_masses() {
        let c = ComplexBuilder::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![vec![0, 1], vec![1, 2]])
            .allow_boundary()
            .build()
            .unwrap();
        let m = metric(c, Scheme::Lumped);
        assert_eq!(m.diagonal_star(0).unwrap(), vec![0.5, 1.0, 0.5]);
        assert_eq!(m.diagonal_star(1).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn whitney_vertex_mass_sums_to_torus_area() {
        let m = metric(corpus::flat_torus(8).unwrap(), Scheme::Whitney);
        let total: f64 = m.mass(0).triplets().map(|(_, _, v)| v).sum();
        let area = 4.0 * std::f64::consts::PI.powi(2);
        assert!((total - area).abs() < 1e-10 * area);
    }

    #[test]
    fn constant_norm_on_circle_is_perimeter() {
        let c = corpus::circle(64).unwrap();
        let one = Cochain::new(&c, 0, vec![1.0; 64]).unwrap();
        let m = metric(c, Scheme::Whitney);
        let n2 = m.l2_norm(&one).unwrap().powi(2);
        assert!((n2 - 2.0 * std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn torus_grid_is_not_well_centered() {
        let err = build_metric(corpus::flat_torus(8).unwrap(), Scheme::Lumped).unwrap_err();
        assert!(matches!(err, HodgeError::Scheme { .. }));
    }

    #[test]
    fn lumped_sphere_is_well_centered() {
        for level in 0..=2 {
            let m = metric(corpus::octahedron_sphere(level).unwrap(), Scheme::Lumped);
            let star = m.diagonal_star(1).unwrap();
            assert!(star.iter().all(|s| *s > 0.0));
        }
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let c = ComplexBuilder::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0, 1, 2], vec![1, 0, 3]],
        )
        .allow_boundary()
        .build()
        .unwrap();
        assert!(matches!(build_metric(c, Scheme::Whitney), Err(HodgeError::Geometry { .. })));
    }

    #[test]
    fn mass_matrices_are_spd_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["circle4", "torus8", "sphere1"] {
            let m = metric(corpus::corpus_mesh(name).unwrap(), Scheme::Whitney);
            for p in 0..=m.dimension() {
                assert!(m.mass(p).relative_asymmetry() <= 1e-12);
                for _ in 0..5 {
                    let x = Cochain::random(m.complex(), p, &mut rng).unwrap();
                    assert!(m.inner(&x, &x).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn inner_product_symmetry_and_zero_norm() {
        let m = metric(corpus::octahedron_sphere(1).unwrap(), Scheme::Whitney);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Cochain::random(m.complex(), 1, &mut rng).unwrap();
        let y = Cochain::random(m.complex(), 1, &mut rng).unwrap();
        let (xy, yx) = (m.inner(&x, &y).unwrap(), m.inner(&y, &x).unwrap());
        assert!((xy - yx).abs() <= 1e-12 * xy.abs().max(1e-300));
        assert_eq!(m.l2_norm(&Cochain::zero(m.complex(), 1).unwrap()).unwrap(), 0.0);
        let z = Cochain::zero(m.complex(), 0).unwrap();
        assert!(matches!(m.inner(&x, &z), Err(HodgeError::Shape(_))));
    }

    #[test]
    fn codifferential_of_zero_forms_is_zero_map() {
        let m = metric(corpus::circle(8).unwrap(), Scheme::Whitney);
        let x = Cochain::new(m.complex(), 0, vec![1.0; 8]).unwrap();
        let delta0 = m.codifferential(0).unwrap();
        assert_eq!(delta0.target_degree(), None);
        assert_eq!(delta0.apply(&x).unwrap(), None);
        assert_eq!(delta0.to_dense().nrows(), 0);
        assert!(matches!(m.delta(&x), Err(HodgeError::Degree { .. })));
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let m = metric(corpus::octahedron_sphere(2).unwrap(), Scheme::Whitney);
        let one = Cochain::new(m.complex(), 0, vec![1.0; m.complex().count(0)]).unwrap();
        let lap = m.laplacian(0).unwrap().apply(&one).unwrap();
        assert!(lap.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn adjointness_and_energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in ["torus8", "sphere1", "circle64"] {
            let m = metric(corpus::corpus_mesh(name).unwrap(), Scheme::Whitney);
            let c = m.complex();
            for p in 1..=m.dimension() {
                let alpha = Cochain::random(c, p - 1, &mut rng).unwrap();
                let beta = Cochain::random(c, p, &mut rng).unwrap();
                let lhs = m.inner(&c.d(&alpha).unwrap(), &beta).unwrap();
                let rhs = m.inner(&alpha, &m.delta(&beta).unwrap()).unwrap();
                let scale = m.l2_norm(&alpha).unwrap() * m.l2_norm(&beta).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * scale, "{name} p={p}");
            }
            for p in 0..=m.dimension() {
                let x = Cochain::random(c, p, &mut rng).unwrap();
                let lap = m.laplacian(p).unwrap();
                let (dd, dl) = lap.energy(&x).unwrap();
                let q = m.inner(&lap.apply(&x).unwrap(), &x).unwrap();
                assert!(q >= 0.0);
                assert!((q - dd - dl).abs() <= 1e-10 * q.max(1e-300), "{name} p={p}");
            }
        }
    }

    #[test]
    fn lumped_and_whitney_agree_roughly_on_sphere_areas() {
        let w = metric(corpus::octahedron_sphere(2).unwrap(), Scheme::Whitney);
        let l = metric(corpus::octahedron_sphere(2).unwrap(), Scheme::Lumped);
        let one = Cochain::new(w.complex(), 0, vec![1.0; w.complex().count(0)]).unwrap();
        let (aw, al) = (w.inner(&one, &one).unwrap(), l.inner(&one, &one).unwrap());
        // both equal the polyhedral area
        assert!((aw - al).abs() < 1e-10 * aw);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("lumped".parse::<Scheme>().unwrap(), Scheme::Lumped);
        assert!("hodge".parse::<Scheme>().is_err());
    }
}
