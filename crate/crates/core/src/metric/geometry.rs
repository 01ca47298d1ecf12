use crate::error::{HodgeError, Result};
use nalgebra::DMatrix;

/// Intrinsic measurements of one simplex.
pub(crate) struct SimplexGeometry {
    pub volume: f64,
    /// `gram[a][b] = ⟨∇λ_a, ∇λ_b⟩` for the barycentric coordinates λ.
    pub gradient_gram: DMatrix<f64>,
}

fn edge_gram(points: &[Vec<f64>]) -> DMatrix<f64> {
    let k = points.len() - 1;
    DMatrix::from_fn(k, k, |a, b| {
        points[a + 1]
            .iter()
            .zip(&points[b + 1])
            .zip(&points[0])
            .map(|((x, y), o)| (x - o) * (y - o))
            .sum()
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Unsigned k-volume of the simplex spanned by `points` (k + 1 of them).
pub(crate) fn simplex_volume(points: &[Vec<f64>]) -> f64 {
    if points.len() == 1 {
        return 1.0;
    }
    let det = edge_gram(points).determinant();
    det.max(0.0).sqrt() / factorial(points.len() - 1)
}

fn max_edge(points: &[Vec<f64>]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b).powi(2)).sum();
            m = m.max(d2.sqrt());
        }
    }
    m
}

/// Measure a simplex, rejecting (near-)degenerate ones.
pub(crate) fn measure(points: &[Vec<f64>], simplex: &[usize]) -> Result<SimplexGeometry> {
    let k = points.len() - 1;
    let gram = edge_gram(points);
    let volume = gram.determinant().max(0.0).sqrt() / factorial(k);
    let scale = max_edge(points).powi(k as i32);
    let degenerate = || HodgeError::Geometry {
        degree: k,
        simplex: simplex.to_vec(),
        volume,
    };
    if !(volume > 1e-12 * scale) {
        return Err(degenerate());
    }
    let inv = gram.try_inverse().ok_or_else(degenerate)?;
    let mut gradient_gram = DMatrix::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            gradient_gram[(a + 1, b + 1)] = inv[(a, b)];
        }
    }
    // ∇λ_0 = −Σ_a ∇λ_a
    for b in 1..=k {
        let s: f64 = (1..=k).map(|a| gradient_gram[(a, b)]).sum();
        gradient_gram[(0, b)] = -s;
        gradient_gram[(b, 0)] = -s;
    }
    gradient_gram[(0, 0)] = (1..=k).map(|a| -gradient_gram[(0, a)]).sum();
    Ok(SimplexGeometry {
        volume,
        gradient_gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_measurements() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let g = measure(&pts, &[0, 1, 2]).unwrap();
        assert!((g.volume - 0.5).abs() < 1e-15);
        // λ1 = x, λ2 = y, λ0 = 1 − x − y
        let expected = [[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((g.gradient_gram[(a, b)] - expected[a][b]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn collinear_triangle_is_degenerate() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(matches!(measure(&pts, &[0, 1, 2]), Err(HodgeError::Geometry { .. })));
    }

    #[test]
    fn volumes_of_low_dimensional_simplices() {
        assert_eq!(simplex_volume(&[vec![3.0, 4.0]]), 1.0);
        assert!((simplex_volume(&[vec![0.0, 0.0], vec![3.0, 4.0]]) - 5.0).abs() < 1e-14);
        let tri = [vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]];
        assert!((simplex_volume(&tri) - 1.0).abs() < 1e-14);
    }
}
