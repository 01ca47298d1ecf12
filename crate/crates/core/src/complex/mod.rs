//! Oriented simplicial complexes and their integer boundary operators.

mod homology;

pub use homology::integer_rank;

use crate::error::{HodgeError, Result};
use crate::sparse::CsrMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

/// Fingerprint of a complex's combinatorial structure.
///
/// Two complexes with the same simplices and orientations share an id, so a
/// cochain written against one can be read against the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ComplexId(pub u64);

impl fmt::Display for ComplexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl From<ComplexId> for String {
    fn from(id: ComplexId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for ComplexId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        u64::from_str_radix(&s, 16)
            .map(ComplexId)
            .map_err(|e| format!("invalid complex id '{s}': {e}"))
    }
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, value: u64) {
        for byte in value.to_le_bytes() {
            self.0 ^= u64::from(byte);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

/// Sign of the permutation that sorts `tuple`, or `None` if it repeats a vertex.
fn sorting_sign(tuple: &[usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            match tuple[i].cmp(&tuple[j]) {
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(sign)
}

fn subsets(simplex: &[usize], size: usize, out: &mut BTreeSet<Vec<usize>>) {
    fn recurse(simplex: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if cur.len() == size {
            out.insert(cur.clone());
            return;
        }
        for i in start..simplex.len() {
            cur.push(simplex[i]);
            recurse(simplex, size, i + 1, cur, out);
            cur.pop();
        }
    }
    recurse(simplex, size, 0, &mut Vec::with_capacity(size), out);
}

/// An oriented simplicial complex of dimension `n ≥ 1`.
///
/// Every simplex is stored as a strictly increasing vertex tuple. Simplices of
/// degree below `n` carry the orientation of their sorted tuple; top simplices
/// carry an extra sign recording the orientation they were given on input.
/// Immutable once built.
#[derive(Debug)]
pub struct SimplicialComplex {
    name: String,
    dimension: usize,
    vertices: Vec<Vec<f64>>,
    periods: Option<Vec<f64>>,
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    orientation: Vec<i32>,
    /// `boundary[p]` is ∂_p: (p−1)-chains ← p-chains, for p in 1..=n. Index 0 is unused.
    boundary: Vec<CsrMatrix<i32>>,
    /// `coboundary[p]` is d_p = ∂_{p+1}ᵀ, for p in 0..n.
    coboundary: Vec<CsrMatrix<i32>>,
    closed: bool,
    id: ComplexId,
    betti: OnceLock<Result<Vec<usize>>>,
}

/// Builder for [`SimplicialComplex`].
#[derive(Clone, Debug)]
pub struct ComplexBuilder {
    name: String,
    vertices: Vec<Vec<f64>>,
    top: Vec<Vec<usize>>,
    periods: Option<Vec<f64>>,
    allow_boundary: bool,
}

impl ComplexBuilder {
    pub fn new(vertices: Vec<Vec<f64>>, top_simplices: Vec<Vec<usize>>) -> Self {
        Self {
            name: String::from("complex"),
            vertices,
            top: top_simplices,
            periods: None,
            allow_boundary: false,
        }
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Identify coordinate `c` modulo `periods[c]` (use `f64::INFINITY` for a
    /// non-periodic coordinate). Simplices are measured with minimum-image
    /// offsets, which gives flat tori and flat circles their intrinsic metric.
    pub fn periodic(mut self, periods: Vec<f64>) -> Self {
        self.periods = Some(periods);
        self
    }

    /// Accept complexes with boundary faces (one coface). Such complexes are
    /// useful for metric fixtures but are rejected by the Hodge solver.
    pub fn allow_boundary(mut self) -> Self {
        self.allow_boundary = true;
        self
    }

    pub fn build(self) -> Result<SimplicialComplex> {
        let ComplexBuilder {
            name,
            vertices,
            top,
            periods,
            allow_boundary,
        } = self;
        let first = top
            .first()
            .ok_or_else(|| HodgeError::InvalidComplex("no top simplices".into()))?;
        if first.len() < 2 {
            return Err(HodgeError::InvalidComplex(
                "top simplices need at least two vertices".into(),
            ));
        }
        let n = first.len() - 1;
        let nv = vertices.len();
        let ambient = vertices.first().map_or(0, Vec::len);
        if vertices.iter().any(|v| v.len() != ambient || v.iter().any(|c| !c.is_finite())) {
            return Err(HodgeError::InvalidComplex(
                "vertex coordinates must share one finite dimension".into(),
            ));
        }
        if ambient < n {
            return Err(HodgeError::InvalidComplex(format!(
                "{n}-simplices cannot live in {ambient}-dimensional coordinates"
            )));
        }
        if let Some(p) = &periods {
            if p.len() != ambient || p.iter().any(|l| !(*l > 0.0)) {
                return Err(HodgeError::InvalidComplex(
                    "one positive period per coordinate is required".into(),
                ));
            }
        }

        let mut sorted_top = Vec::with_capacity(top.len());
        let mut orientation = Vec::with_capacity(top.len());
        let mut seen = HashMap::new();
        for tuple in &top {
            if tuple.len() != n + 1 {
                return Err(HodgeError::InvalidComplex(format!(
                    "simplex {tuple:?} does not have {} vertices",
                    n + 1
                )));
            }
            if let Some(&bad) = tuple.iter().find(|&&v| v >= nv) {
                return Err(HodgeError::InvalidComplex(format!(
                    "simplex {tuple:?} references missing vertex {bad}"
                )));
            }
            let sign = sorting_sign(tuple).ok_or_else(|| {
                HodgeError::InvalidComplex(format!("simplex {tuple:?} repeats a vertex"))
            })?;
            let mut sorted = tuple.clone();
            sorted.sort_unstable();
            if seen.insert(sorted.clone(), ()).is_some() {
                return Err(HodgeError::DuplicateSimplex(sorted));
            }
            sorted_top.push((sorted, sign));
        }
        sorted_top.sort();
        let mut top_sorted = Vec::with_capacity(sorted_top.len());
        for (s, sign) in sorted_top {
            top_sorted.push(s);
            orientation.push(sign);
        }

        let mut simplices: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n + 1);
        for p in 0..n {
            let mut faces = BTreeSet::new();
            for s in &top_sorted {
                subsets(s, p + 1, &mut faces);
            }
            simplices.push(faces.into_iter().collect());
        }
        simplices.push(top_sorted);
        if simplices[0].len() != nv {
            let used: BTreeSet<usize> = simplices[0].iter().map(|v| v[0]).collect();
            let unused = (0..nv).find(|v| !used.contains(v)).unwrap_or(0);
            return Err(HodgeError::InvalidComplex(format!(
                "vertex {unused} belongs to no top simplex"
            )));
        }
        let index: Vec<HashMap<Vec<usize>, usize>> = simplices
            .iter()
            .map(|list| list.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();

        let mut boundary = vec![CsrMatrix::zeros(0, simplices[0].len())];
        for p in 1..=n {
            let mut triplets = Vec::with_capacity(simplices[p].len() * (p + 1));
            for (col, s) in simplices[p].iter().enumerate() {
                let sign = if p == n { orientation[col] } else { 1 };
                for skip in 0..=p {
                    let face: Vec<usize> = s
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    let row = index[p - 1][&face];
                    let alt = if skip % 2 == 0 { 1 } else { -1 };
                    triplets.push((row, col, sign * alt));
                }
            }
            boundary.push(CsrMatrix::from_triplets(
                simplices[p - 1].len(),
                simplices[p].len(),
                triplets,
            ));
        }

        let mut closed = true;
        for (row, face) in simplices[n - 1].iter().enumerate() {
            let entries: Vec<i32> = boundary[n].row(row).map(|(_, v)| v).collect();
            match entries.as_slice() {
                [a, b] if a + b == 0 => {}
                [_, _] => return Err(HodgeError::NonOrientable { face: face.clone() }),
                [_] if allow_boundary => closed = false,
                _ => {
                    return Err(HodgeError::NotClosed {
                        face: face.clone(),
                        cofaces: entries.len(),
                    })
                }
            }
        }

        let coboundary = (0..n).map(|p| boundary[p + 1].transpose()).collect();

        let mut hasher = Fnv1a::new();
        hasher.write_u64(n as u64);
        hasher.write_u64(nv as u64);
        for (s, sign) in simplices[n].iter().zip(&orientation) {
            for &v in s {
                hasher.write_u64(v as u64);
            }
            hasher.write_u64(u64::from(*sign > 0));
        }

        Ok(SimplicialComplex {
            name,
            dimension: n,
            vertices,
            periods,
            simplices,
            index,
            orientation,
            boundary,
            coboundary,
            closed,
            id: ComplexId(hasher.0),
            betti: OnceLock::new(),
        })
    }
}

/// Build a closed oriented complex from vertex coordinates and top simplices.
///
/// The input order of each top simplex fixes its orientation. Every
/// (n−1)-face must have exactly two cofaces inducing opposite orientations.
pub fn build_complex(vertices: Vec<Vec<f64>>, top_simplices: Vec<Vec<usize>>) -> Result<SimplicialComplex> {
    ComplexBuilder::new(vertices, top_simplices).build()
}

impl SimplicialComplex {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> ComplexId {
        self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn periods(&self) -> Option<&[f64]> {
        self.periods.as_deref()
    }

    /// Number of p-simplices (zero outside `0..=n`).
    pub fn count(&self, p: usize) -> usize {
        self.simplices.get(p).map_or(0, Vec::len)
    }

    pub fn simplices(&self, p: usize) -> &[Vec<usize>] {
        self.simplices.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn simplex_index(&self, p: usize, simplex: &[usize]) -> Option<usize> {
        self.index.get(p)?.get(simplex).copied()
    }

    /// Orientation signs of the top simplices relative to their sorted tuples.
    pub fn top_orientation(&self) -> &[i32] {
        &self.orientation
    }

    pub(crate) fn check_degree(&self, p: usize, min: usize, max: usize) -> Result<()> {
        if p < min || p > max {
            return Err(HodgeError::Degree {
                degree: p,
                min,
                max,
            });
        }
        Ok(())
    }

    /// ∂_p for `1 ≤ p ≤ n`.
    pub fn boundary(&self, p: usize) -> Result<&CsrMatrix<i32>> {
        self.check_degree(p, 1, self.dimension)?;
        Ok(&self.boundary[p])
    }

    /// d_p = ∂_{p+1}ᵀ for `0 ≤ p < n`.
    pub fn coboundary(&self, p: usize) -> Result<&CsrMatrix<i32>> {
        if self.dimension == 0 || p >= self.dimension {
            return Err(HodgeError::Degree {
                degree: p,
                min: 0,
                max: self.dimension.saturating_sub(1),
            });
        }
        Ok(&self.coboundary[p])
    }

    /// Vertex coordinates of a simplex, unwrapped by minimum image relative
    /// to its first vertex when the complex is periodic.
    pub fn simplex_points(&self, simplex: &[usize]) -> Vec<Vec<f64>> {
        let base = &self.vertices[simplex[0]];
        simplex
            .iter()
            .map(|&v| {
                let mut point = self.vertices[v].clone();
                if let Some(periods) = &self.periods {
                    for ((x, b), l) in point.iter_mut().zip(base).zip(periods) {
                        if l.is_finite() {
                            let delta = *x - b;
                            *x = b + delta - l * (delta / l).round();
                        }
                    }
                }
                point
            })
            .collect()
    }

    /// Exact Betti numbers `b_p = dim ker ∂_p − rank ∂_{p+1}` over ℚ.
    pub fn betti_numbers(&self) -> Result<Vec<usize>> {
        self.betti
            .get_or_init(|| {
                let n = self.dimension;
                let mut ranks = vec![0usize; n + 2];
                for p in 1..=n {
                    ranks[p] = integer_rank(&self.boundary[p])?;
                }
                Ok((0..=n)
                    .map(|p| self.count(p) - ranks[p] - ranks[p + 1])
                    .collect())
            })
            .clone()
    }

    /// True when ∂_{p}∂_{p+1} and d_{p+1}d_p vanish identically in integer
    /// arithmetic for every degree.
    pub fn is_chain_complex(&self) -> bool {
        (1..self.dimension).all(|p| {
            let bb = self.boundary[p].map(i64::from).matmul(&self.boundary[p + 1].map(i64::from));
            let dd = self.coboundary[p].map(i64::from).matmul(&self.coboundary[p - 1].map(i64::from));
            bb.is_zero() && dd.is_zero()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> SimplicialComplex {
        let vertices = (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let edges = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        build_complex(vertices, edges).unwrap()
    }

    #[test]
    fn single_edge_boundary_column() {
        let c = ComplexBuilder::new(vec![vec![0.0], vec![1.0]], vec![vec![0, 1]])
            .allow_boundary()
            .build()
            .unwrap();
        assert!(!c.is_closed());
        let b = c.boundary(1).unwrap();
        assert_eq!(b.to_dense(), vec![vec![-1], vec![1]]);
    }

    #[test]
    fn single_edge_is_rejected_as_not_closed() {
        let err = build_complex(vec![vec![0.0], vec![1.0]], vec![vec![0, 1]]).unwrap_err();
        assert_eq!(err, HodgeError::NotClosed { face: vec![0], cofaces: 1 });
    }

    #[test]
    fn triangle_boundary_rank_and_betti() {
        let c = cycle(3);
        assert_eq!(c.count(0), 3);
        assert_eq!(c.count(1), 3);
        assert_eq!(integer_rank(c.boundary(1).unwrap()).unwrap(), 2);
        assert_eq!(c.betti_numbers().unwrap(), vec![1, 1]);
    }

    #[test]
    fn reversed_edge_gets_negative_orientation() {
        let c = build_complex(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0, 1], vec![1, 2], vec![2, 0]],
        )
        .unwrap();
        // [2,0] is stored as [0,2] with sign −1
        let idx = c.simplex_index(1, &[0, 2]).unwrap();
        assert_eq!(c.top_orientation()[idx], -1);
        let b = c.boundary(1).unwrap();
        assert_eq!(b.get(0, idx), 1);
        assert_eq!(b.get(2, idx), -1);
    }

    #[test]
    fn inconsistent_orientation_is_rejected() {
        let err = build_complex(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, HodgeError::NonOrientable { .. }));
    }

    #[test]
    fn duplicate_top_simplex_is_rejected() {
        let err = build_complex(
            vec![vec![0.0], vec![1.0]],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap_err();
        assert_eq!(err, HodgeError::DuplicateSimplex(vec![0, 1]));
    }

    #[test]
    fn unused_vertex_is_rejected() {
        let mut vertices: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 0.0]).collect();
        vertices.push(vec![9.0, 9.0]);
        let err = build_complex(vertices, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]])
            .unwrap_err();
        assert!(matches!(err, HodgeError::InvalidComplex(_)));
    }

    #[test]
    fn degree_checks() {
        let c = cycle(4);
        assert!(c.coboundary(0).is_ok());
        assert!(matches!(c.coboundary(1), Err(HodgeError::Degree { .. })));
        assert!(matches!(c.boundary(0), Err(HodgeError::Degree { .. })));
    }

    #[test]
    fn periodic_points_are_unwrapped() {
        let l = 1.0;
        let c = ComplexBuilder::new(
            vec![vec![0.0], vec![0.5], vec![0.75]],
            vec![vec![0, 1], vec![1, 2], vec![2, 0]],
        )
        .periodic(vec![l])
        .build()
        .unwrap();
        let pts = c.simplex_points(&[0, 2]);
        assert!((pts[1][0] - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn id_depends_on_structure_only() {
        let a = cycle(5);
        let b = ComplexBuilder::new(
            (0..5).map(|i| vec![i as f64, 1.0]).collect(),
            (0..5).map(|i| vec![i, (i + 1) % 5]).collect(),
        )
        .build()
        .unwrap();
        assert_eq!(a.id(), b.id());
        assert_ne!(a.id(), cycle(6).id());
        let parsed: ComplexId = ComplexId::try_from(a.id().to_string()).unwrap();
        assert_eq!(parsed, a.id());
    }
}
