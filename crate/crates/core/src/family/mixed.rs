//! Checks on scalar functions `f(t, x) = a(t)·g(x)` sampled on a product
//! grid: commutation of mixed differences, the Taylor remainder bound in t,
//! and joint continuity.

use super::verify::STEP_SWEEP;
use super::ParamGrid;
use crate::error::{HodgeError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TimeFactor {
    T,
    TSquared,
    Sin,
    ExpDecay,
}

impl TimeFactor {
    fn value(self, t: f64) -> f64 {
        match self {
            TimeFactor::T => t,
            TimeFactor::TSquared => t * t,
            TimeFactor::Sin => t.sin(),
            TimeFactor::ExpDecay => (-t).exp(),
        }
    }

    fn derivative(self, t: f64) -> f64 {
        match self {
            TimeFactor::T => 1.0,
            TimeFactor::TSquared => 2.0 * t,
            TimeFactor::Sin => t.cos(),
            TimeFactor::ExpDecay => -(-t).exp(),
        }
    }

    /// Degree of `a` when it is a polynomial.
    fn polynomial_degree(self) -> Option<u32> {
        match self {
            TimeFactor::T => Some(1),
            TimeFactor::TSquared => Some(2),
            TimeFactor::Sin | TimeFactor::ExpDecay => None,
        }
    }

    /// Bound on `|a''|` for `t ≥ 0`.
    fn second_derivative_bound(self) -> f64 {
        match self {
            TimeFactor::T => 0.0,
            TimeFactor::TSquared => 2.0,
            TimeFactor::Sin | TimeFactor::ExpDecay => 1.0,
        }
    }
}

/// Smooth bump on [0, 1], compactly supported in (0, 1), with maximum 1 at 1/2.
fn bump(x: f64) -> f64 {
    let y = 2.0 * x - 1.0;
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y * y)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SpaceFactor {
    Bump,
    BumpSquared,
}

impl SpaceFactor {
    fn value(self, x: f64) -> f64 {
        match self {
            SpaceFactor::Bump => bump(x),
            SpaceFactor::BumpSquared => bump(x).powi(2),
        }
    }
}

const REGISTRY: [(&str, TimeFactor, SpaceFactor); 4] = [
    ("t_bump", TimeFactor::T, SpaceFactor::Bump),
    ("t2_bump", TimeFactor::TSquared, SpaceFactor::Bump),
    ("sin_bump", TimeFactor::Sin, SpaceFactor::Bump),
    ("exp_bump2", TimeFactor::ExpDecay, SpaceFactor::BumpSquared),
];

pub fn mixed_function_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|r| r.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCheck {
    pub h: f64,
    /// `sup |f(t+h,x) − f(t,x) − h·∂ₜf(t,x)|` over the grid.
    pub measured: f64,
    /// `½·sup|∂ₜ²f|·h²` from the registry bound.
    pub predicted: f64,
    pub ratio: Option<f64>,
    /// `sup |f(t+h,x) − f(t,x)|` over the grid.
    pub increment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPartialsReport {
    pub function: String,
    pub orders: [u32; 2],
    /// `max |D_tᵃD_xᵇf − D_xᵇD_tᵃf|` relative to the larger of the two.
    pub commutation_residual: f64,
    /// The t-order exceeds the degree of a polynomial `a(t)`, so both mixed
    /// differences vanish analytically and the relative residual is only
    /// rounding noise.
    pub vanishing: bool,
    pub taylor: Vec<TaylorCheck>,
    /// For `t²·g`: largest `|remainder − h²·sup|g|| / (h²·sup|g|)`.
    pub t_squared_identity: Option<f64>,
    /// Whether the increments shrink strictly as h shrinks.
    pub continuity_shrinks: bool,
}

fn forward_differences(values: &[Vec<f64>], axis: usize, order: u32, step: f64) -> Vec<Vec<f64>> {
    let mut out = values.to_vec();
    for _ in 0..order {
        out = if axis == 0 {
            out.windows(2)
                .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b) / step).collect())
                .collect()
        } else {
            out.iter()
                .map(|row| row.windows(2).map(|w| (w[1] - w[0]) / step).collect())
                .collect()
        };
    }
    out
}

fn max_abs(values: &[Vec<f64>]) -> f64 {
    values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Run the three checks on a registry function over a (t, x) grid.
pub fn verify_mixed_partials(name: &str, grid: &ParamGrid, orders: [u32; 2]) -> Result<MixedPartialsReport> {
    let &(_, time, space) = REGISTRY.iter().find(|r| r.0 == name).ok_or_else(|| HodgeError::UnknownRegistry {
        kind: "(t, x) function".into(),
        name: name.into(),
    })?;
    if grid.dims() != 2 {
        return Err(HodgeError::Grid("mixed partials need a two-axis (t, x) grid".into()));
    }
    let [ta, xa] = [grid.axes()[0], grid.axes()[1]];
    if orders[0] as usize >= ta.count || orders[1] as usize >= xa.count {
        return Err(HodgeError::Grid(format!(
            "difference orders {orders:?} exceed the grid resolution {}×{}",
            ta.count, xa.count
        )));
    }
    let ts: Vec<f64> = (0..ta.count).map(|i| ta.start + i as f64 * ta.step).collect();
    let xs: Vec<f64> = (0..xa.count).map(|j| xa.start + j as f64 * xa.step).collect();
    let g: Vec<f64> = xs.iter().map(|&x| space.value(x)).collect();
    let f: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| g.iter().map(|gx| time.value(t) * gx).collect())
        .collect();
    let dt_f: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| g.iter().map(|gx| time.derivative(t) * gx).collect())
        .collect();

    let tx = forward_differences(&forward_differences(&f, 1, orders[1], xa.step), 0, orders[0], ta.step);
    let xt = forward_differences(&forward_differences(&f, 0, orders[0], ta.step), 1, orders[1], xa.step);
    let diff: Vec<Vec<f64>> = tx
        .iter()
        .zip(&xt)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let scale = max_abs(&tx).max(max_abs(&xt));
    let commutation_residual = if scale > 0.0 { max_abs(&diff) / scale } else { max_abs(&diff) };

    let sup_g = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = time.second_derivative_bound() * sup_g;
    let mut taylor = Vec::new();
    let mut identity: Option<f64> = None;
    for h in STEP_SWEEP {
        let Ok(m) = grid.step_multiple(0, h) else { continue };
        if m >= ta.count {
            continue;
        }
        let h = m as f64 * ta.step;
        let (mut measured, mut increment) = (0.0f64, 0.0f64);
        for i in 0..ta.count - m {
            for j in 0..xa.count {
                let step = f[i + m][j] - f[i][j];
                measured = measured.max((step - h * dt_f[i][j]).abs());
                increment = increment.max(step.abs());
            }
        }
        let predicted = 0.5 * bound * h * h;
        taylor.push(TaylorCheck {
            h,
            measured,
            predicted,
            ratio: (predicted > 0.0).then(|| measured / predicted),
            increment,
        });
        if time == TimeFactor::TSquared {
            let exact = h * h * sup_g;
            let r = (measured - exact).abs() / exact;
            identity = Some(identity.map_or(r, |x: f64| x.max(r)));
        }
    }
    let continuity_shrinks = taylor.windows(2).all(|w| w[1].increment < w[0].increment);
    Ok(MixedPartialsReport {
        function: name.into(),
        orders,
        commutation_residual,
        vanishing: time.polynomial_degree().is_some_and(|d| orders[0] > d),
        taylor,
        t_squared_identity: identity,
        continuity_shrinks,
    })
}

#[cfg(test)]
mod tests {
    use super::super::Axis;
    use super::*;

    pub(crate) fn standard_grid() -> ParamGrid {
        ParamGrid::new(vec![
            Axis { start: 0.0, step: 0.025, count: 41 },
            Axis { start: 0.0, step: 0.01, count: 101 },
        ])
        .unwrap()
    }

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 0.0);
        assert_eq!(bump(1.0), 0.0);
        assert!((bump(0.5) - 1.0).abs() < 1e-15);
        assert!(bump(0.3) > 0.0 && bump(0.3) < 1.0);
    }

    #[test]
    fn linear_in_t_gives_difference_of_g() {
        let r = verify_mixed_partials("t_bump", &standard_grid(), [1, 1]).unwrap();
        assert!(r.commutation_residual <= 1e-12);
        assert!(r.taylor.iter().all(|c| c.measured < 1e-15 && c.ratio.is_none()));
    }

    #[test]
    fn t_squared_remainder_identity() {
        let r = verify_mixed_partials("t2_bump", &standard_grid(), [2, 1]).unwrap();
        assert!(r.t_squared_identity.unwrap() <= 1e-12);
        assert!(r.taylor.iter().all(|c| c.ratio.unwrap() <= 1.0 + 1e-12));
    }

    #[test]
    fn sine_remainder_within_bound() {
        let r = verify_mixed_partials("sin_bump", &standard_grid(), [1, 2]).unwrap();
        assert_eq!(r.taylor.len(), 4);
        assert!(r.taylor.iter().all(|c| c.ratio.unwrap() <= 1.1));
        assert!(r.continuity_shrinks);
        assert!(r.commutation_residual <= 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            verify_mixed_partials("tan_bump", &standard_grid(), [1, 1]),
            Err(HodgeError::UnknownRegistry { .. })
        ));
        assert!(matches!(
            verify_mixed_partials("t_bump", &standard_grid(), [41, 1]),
            Err(HodgeError::Grid(_))
        ));
    }
}
