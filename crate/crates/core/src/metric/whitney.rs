//! Galerkin mass matrices of Whitney forms.
//!
//! The Whitney p-form of a face σ = [σ_0 … σ_p] of a top simplex is
//! `p! Σ_i (−1)^i λ_{σ_i} dλ_{σ_0} ∧ … (omit i) … ∧ dλ_{σ_p}`. Pointwise inner
//! products of wedges of gradients are Gram determinants, and products of two
//! barycentric coordinates integrate to `vol·(1 + δ_ab)/((n+1)(n+2))`.

use super::geometry::SimplexGeometry;
use nalgebra::DMatrix;

/// Local face lists of size `p + 1`, in lexicographic order.
pub(crate) fn local_faces(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn recurse(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            recurse(n, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    recurse(n, p + 1, 0, &mut Vec::new(), &mut out);
    out
}

fn without(face: &[usize], skip: usize) -> Vec<usize> {
    face.iter()
        .enumerate()
        .filter(|&(k, _)| k != skip)
        .map(|(_, &v)| v)
        .collect()
}

/// `∫ ⟨W_σ, W_τ⟩` over one top simplex of dimension `n`.
pub(crate) fn whitney_inner(geom: &SimplexGeometry, n: usize, sigma: &[usize], tau: &[usize]) -> f64 {
    let p = sigma.len() - 1;
    let p_fact: f64 = (1..=p).map(|i| i as f64).product();
    let moment = |a: usize, b: usize| {
        let factor = if a == b { 2.0 } else { 1.0 };
        geom.volume * factor / (((n + 1) * (n + 2)) as f64)
    };
    let mut total = 0.0;
    for i in 0..=p {
        let rest_s = without(sigma, i);
        for j in 0..=p {
            let rest_t = without(tau, j);
            let det = if p == 0 {
                1.0
            } else {
                DMatrix::from_fn(p, p, |a, b| geom.gradient_gram[(rest_s[a], rest_t[b])]).determinant()
            };
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * moment(sigma[i], tau[j]) * det;
        }
    }
    p_fact * p_fact * total
}

#[cfg(test)]
mod tests {
    use super::super::geometry::measure;
    use super::*;

    #[test]
    fn edge_masses() {
        let g = measure(&[vec![0.0], vec![2.0]], &[0, 1]).unwrap();
        // P1 mass L/6 [2 1; 1 2] and top-degree 1/L
        assert!((whitney_inner(&g, 1, &[0], &[0]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((whitney_inner(&g, 1, &[0], &[1]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((whitney_inner(&g, 1, &[0, 1], &[0, 1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_top_degree_is_inverse_area() {
        let g = measure(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]], &[0, 1, 2]).unwrap();
        assert!((whitney_inner(&g, 2, &[0, 1, 2], &[0, 1, 2]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_edge_mass_matches_closed_form() {
        // unit right triangle: ∫|W_01|² with W_01 = λ0 dλ1 − λ1 dλ0.
        // λ0 = 1−x−y, λ1 = x: W = ((1−y), x) so ∫ (1−y)² + x² = 1/4 + 1/12 = 1/3
        let g = measure(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1, 2]).unwrap();
        assert!((whitney_inner(&g, 2, &[0, 1], &[0, 1]) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn local_face_enumeration() {
        assert_eq!(local_faces(2, 1), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(local_faces(2, 2), vec![vec![0, 1, 2]]);
        assert_eq!(local_faces(1, 0).len(), 2);
    }
}
