//! Fixed test meshes: polygonal circles, flat tori and octahedral spheres.

use crate::complex::{ComplexBuilder, SimplicialComplex};
use crate::error::{HodgeError, Result};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Mesh names used by the acceptance suite.
pub const STANDARD_CORPUS: [&str; 8] = [
    "circle4", "circle64", "torus8", "torus16", "torus32", "sphere0", "sphere1", "sphere2",
];

/// Regular `n`-gon inscribed in the unit circle of the plane.
pub fn circle(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(HodgeError::Parameter(format!("a circle needs at least 3 vertices, got {n}")));
    }
    let vertices = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let edges = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    ComplexBuilder::new(vertices, edges).name(format!("circle{n}")).build()
}

/// Uniform `n`-vertex subdivision of the flat circle ℝ/2πℤ.
pub fn flat_circle(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(HodgeError::Parameter(format!("a circle needs at least 3 vertices, got {n}")));
    }
    let vertices = (0..n).map(|i| vec![2.0 * PI * i as f64 / n as f64]).collect();
    let edges = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    ComplexBuilder::new(vertices, edges)
        .periodic(vec![2.0 * PI])
        .name(format!("flatcircle{n}"))
        .build()
}

/// `n × n` grid on the flat torus ℝ²/(2πℤ)², each square split along its
/// lower-left to upper-right diagonal. Vertex `(i, j)` has index `i + n·j`.
pub fn flat_torus(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(HodgeError::Parameter(format!("a torus grid needs n ≥ 3, got {n}")));
    }
    let h = 2.0 * PI / n as f64;
    let vertices = (0..n * n)
        .map(|k| vec![(k % n) as f64 * h, (k / n) as f64 * h])
        .collect();
    let at = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push(vec![at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            triangles.push(vec![at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    ComplexBuilder::new(vertices, triangles)
        .periodic(vec![2.0 * PI, 2.0 * PI])
        .name(format!("torus{n}"))
        .build()
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

/// Octahedron after `levels` rounds of 1-to-4 midpoint subdivision, with every
/// vertex projected to the unit sphere. Faces are oriented outward.
pub fn octahedron_sphere(levels: usize) -> Result<SimplicialComplex> {
    let mut points: Vec<[f64; 3]> = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for sx in [0usize, 1] {
        for sy in [0usize, 1] {
            for sz in [0usize, 1] {
                let (a, b, c) = (sx, 2 + sy, 4 + sz);
                // an odd number of negative axes flips the outward orientation
                if (sx + sy + sz) % 2 == 0 {
                    faces.push([a, b, c]);
                } else {
                    faces.push([a, c, b]);
                }
            }
        }
    }
    for _ in 0..levels {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, points: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (points[a], points[b]);
                points.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                points.len() - 1
            })
        };
        let mut refined = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut points);
            let bc = mid(b, c, &mut points);
            let ca = mid(c, a, &mut points);
            refined.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        faces = refined;
    }
    ComplexBuilder::new(
        points.iter().map(|p| p.to_vec()).collect(),
        faces.iter().map(|f| f.to_vec()).collect(),
    )
    .name(format!("sphere{levels}"))
    .build()
}

/// Build a corpus mesh by name: `circle<N>`, `flatcircle<N>`, `torus<N>` or `sphere<L>`.
pub fn corpus_mesh(name: &str) -> Result<SimplicialComplex> {
    let unknown = || HodgeError::UnknownRegistry {
        kind: "corpus mesh".into(),
        name: name.into(),
    };
    let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(unknown)?;
    let (kind, size) = name.split_at(split);
    let size: usize = size.parse().map_err(|_| unknown())?;
    match kind {
        "circle" => circle(size),
        "flatcircle" => flat_circle(size),
        "torus" => flat_torus(size),
        "sphere" if size <= 5 => octahedron_sphere(size),
        _ => Err(unknown()),
    }
}

/// Betti numbers the corpus meshes must reproduce.
pub fn expected_betti(name: &str) -> Option<Vec<usize>> {
    if name.starts_with("circle") || name.starts_with("flatcircle") {
        Some(vec![1, 1])
    } else if name.starts_with("torus") {
        Some(vec![1, 2, 1])
    } else if name.starts_with("sphere") {
        Some(vec![1, 0, 1])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::integer_rank;

    #[test]
    fn octahedron_counts_and_rank() {
        let s = octahedron_sphere(0).unwrap();
        assert_eq!((s.count(0), s.count(1), s.count(2)), (6, 12, 8));
        assert!(s.is_chain_complex());
        assert_eq!(integer_rank(s.boundary(2).unwrap()).unwrap(), 7);
        assert_eq!(s.betti_numbers().unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn refined_spheres() {
        let s1 = octahedron_sphere(1).unwrap();
        assert_eq!((s1.count(0), s1.count(1), s1.count(2)), (18, 48, 32));
        let s2 = octahedron_sphere(2).unwrap();
        assert_eq!((s2.count(0), s2.count(1), s2.count(2)), (66, 192, 128));
        for p in s2.vertices() {
            let r: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-15);
        }
        assert_eq!(s2.betti_numbers().unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn torus_and_circle_betti() {
        for n in [8, 16] {
            let t = flat_torus(n).unwrap();
            assert_eq!((t.count(0), t.count(1), t.count(2)), (n * n, 3 * n * n, 2 * n * n));
            assert!(t.is_chain_complex());
            assert_eq!(t.betti_numbers().unwrap(), vec![1, 2, 1]);
        }
        for n in [4, 64] {
            assert_eq!(circle(n).unwrap().betti_numbers().unwrap(), vec![1, 1]);
        }
    }

    #[test]
    fn builds_are_deterministic() {
        let a = flat_torus(8).unwrap();
        let b = flat_torus(8).unwrap();
        for p in 1..=2 {
            assert_eq!(a.boundary(p).unwrap(), b.boundary(p).unwrap());
        }
        assert_eq!(a.id(), b.id());
    }

    #[test]
    fn corpus_names() {
        assert_eq!(corpus_mesh("torus8").unwrap().name(), "torus8");
        assert_eq!(corpus_mesh("sphere1").unwrap().count(2), 32);
        assert!(matches!(corpus_mesh("klein4"), Err(HodgeError::UnknownRegistry { .. })));
        assert!(corpus_mesh("circle").is_err());
    }
}
