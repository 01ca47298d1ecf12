use super::ParamGrid;
use crate::cochain::Cochain;
use crate::error::{HodgeError, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifferenceScheme {
    Forward,
    Centered,
}

impl DifferenceScheme {
    /// Expected convergence order of the first difference quotient.
    pub fn order(self) -> f64 {
        match self {
            DifferenceScheme::Forward => 1.0,
            DifferenceScheme::Centered => 2.0,
        }
    }
}

impl std::str::FromStr for DifferenceScheme {
    type Err = HodgeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(DifferenceScheme::Forward),
            "centered" => Ok(DifferenceScheme::Centered),
            other => Err(HodgeError::Parameter(format!(
                "unknown difference scheme '{other}' (expected forward or centered)"
            ))),
        }
    }
}

/// Cochains attached to (some of) the points of a parameter grid.
#[derive(Clone, Debug)]
pub struct GridSamples {
    pub grid: ParamGrid,
    pub values: BTreeMap<Vec<usize>, Cochain>,
}

impl GridSamples {
    pub fn new(grid: ParamGrid) -> Self {
        Self {
            grid,
            values: BTreeMap::new(),
        }
    }

    fn shifted(&self, index: &[usize], direction: usize, offset: i64) -> Result<&Cochain> {
        let mut at = index.to_vec();
        let moved = at[direction] as i64 + offset;
        let missing = || {
            HodgeError::Grid(format!(
                "no sample at offset {offset} from grid point {index:?} along direction {direction}"
            ))
        };
        if moved < 0 {
            return Err(missing());
        }
        at[direction] = moved as usize;
        self.values.get(&at).ok_or_else(missing)
    }
}

fn combine(terms: &[(f64, &Cochain)]) -> Cochain {
    let first = terms[0].1;
    let mut values = vec![0.0; first.len()];
    for (c, x) in terms {
        values.iter_mut().zip(x.values()).for_each(|(v, a)| *v += c * a);
    }
    Cochain::from_parts(first.degree(), first.complex_id(), values)
}

fn check_direction(samples: &GridSamples, index: &[usize], direction: usize) -> Result<()> {
    if direction >= samples.grid.dims() || !samples.grid.contains(index) {
        return Err(HodgeError::Grid(format!(
            "grid point {index:?} / direction {direction} outside a {}-dimensional grid",
            samples.grid.dims()
        )));
    }
    Ok(())
}

/// First difference quotient with step `m` grid cells at one grid point.
pub fn difference_at(
    samples: &GridSamples,
    index: &[usize],
    direction: usize,
    scheme: DifferenceScheme,
    m: usize,
) -> Result<Cochain> {
    check_direction(samples, index, direction)?;
    let h = m as f64 * samples.grid.axes()[direction].step;
    let m = m as i64;
    Ok(match scheme {
        DifferenceScheme::Forward => combine(&[
            (1.0 / h, samples.shifted(index, direction, m)?),
            (-1.0 / h, samples.shifted(index, direction, 0)?),
        ]),
        DifferenceScheme::Centered => combine(&[
            (0.5 / h, samples.shifted(index, direction, m)?),
            (-0.5 / h, samples.shifted(index, direction, -m)?),
        ]),
    })
}

fn binomial(r: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * f64::from(r - i) / f64::from(i + 1))
}

/// `r`-fold iterated centered difference: `Σⱼ (−1)ʲ C(r, j) x(t + (r − 2j)h) / (2h)^r`.
pub fn centered_difference(
    samples: &GridSamples,
    index: &[usize],
    direction: usize,
    r: u32,
    m: usize,
) -> Result<Cochain> {
    check_direction(samples, index, direction)?;
    let h = m as f64 * samples.grid.axes()[direction].step;
    let scale = (2.0 * h).powi(r as i32);
    let terms = (0..=r)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let offset = (i64::from(r) - 2 * i64::from(j)) * m as i64;
            Ok((sign * binomial(r, j) / scale, samples.shifted(index, direction, offset)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(&terms))
}

/// Difference quotients with step `h` at every sampled point whose
/// neighbors are also sampled.
pub fn fd_derivative(
    samples: &GridSamples,
    direction: usize,
    scheme: DifferenceScheme,
    h: f64,
) -> Result<Vec<(Vec<f64>, Cochain)>> {
    let m = samples.grid.step_multiple(direction, h)?;
    let out: Vec<(Vec<f64>, Cochain)> = samples
        .values
        .keys()
        .filter_map(|index| {
            difference_at(samples, index, direction, scheme, m)
                .ok()
                .map(|d| (samples.grid.point(index), d))
        })
        .collect();
    if out.is_empty() {
        return Err(HodgeError::Grid(format!(
            "no grid point has both neighbors at h = {h} along direction {direction}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn line_samples(f: impl Fn(f64) -> f64) -> GridSamples {
        let c = corpus::circle(4).unwrap();
        let grid = ParamGrid::uniform(0.0, 1.0, 41, 1).unwrap();
        let mut s = GridSamples::new(grid.clone());
        for idx in grid.indices() {
            let t = grid.point(&idx)[0];
            s.values.insert(idx, Cochain::new(&c, 1, vec![f(t), 2.0 * f(t), 0.0, 1.0]).unwrap());
        }
        s
    }

    #[test]
    fn linear_family_differences_are_exact() {
        let s = line_samples(|t| 3.0 * t);
        for scheme in [DifferenceScheme::Forward, DifferenceScheme::Centered] {
            for h in [0.2, 0.05] {
                for (_, d) in fd_derivative(&s, 0, scheme, h).unwrap() {
                    assert!((d.values()[0] - 3.0).abs() < 1e-12 && (d.values()[1] - 6.0).abs() < 1e-12);
                    assert_eq!(d.values()[3], 0.0);
                }
            }
        }
    }

    #[test]
    fn neighbors_are_required() {
        let s = line_samples(|t| t);
        assert!(matches!(
            difference_at(&s, &[0], 0, DifferenceScheme::Centered, 1),
            Err(HodgeError::Grid(_))
        ));
        assert!(difference_at(&s, &[0], 0, DifferenceScheme::Forward, 1).is_ok());
        assert_eq!(fd_derivative(&s, 0, DifferenceScheme::Centered, 0.2).unwrap().len(), 41 - 16);
        assert!(matches!(fd_derivative(&s, 0, DifferenceScheme::Centered, 0.6), Err(HodgeError::Grid(_))));
    }

    #[test]
    fn sine_centered_difference_is_second_order() {
        let s = line_samples(f64::sin);
        let err = |m: usize| (difference_at(&s, &[20], 0, DifferenceScheme::Centered, m).unwrap().values()[0] - 0.5f64.cos()).abs();
        let ratio = err(4) / err(2);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn iterated_differences() {
        let s = line_samples(|t| t * t);
        let d3 = centered_difference(&s, &[20], 0, 3, 2).unwrap();
        assert!(d3.values()[0].abs() < 1e-9);
        let d2 = centered_difference(&s, &[20], 0, 2, 2).unwrap();
        assert!((d2.values()[0] - 2.0).abs() < 1e-10);
        let d0 = centered_difference(&s, &[20], 0, 0, 2).unwrap();
        assert!((d0.values()[0] - 0.25).abs() < 1e-15);
    }
}
