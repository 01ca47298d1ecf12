//! Real cochains: discrete p-forms indexed by the p-simplices of a complex.

use crate::complex::{ComplexId, SimplicialComplex};
use crate::error::{HodgeError, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    degree: usize,
    complex_id: ComplexId,
    values: Vec<f64>,
}

impl Cochain {
    /// Wrap values as a p-cochain of `complex`, validating length and finiteness.
    pub fn new(complex: &SimplicialComplex, degree: usize, values: Vec<f64>) -> Result<Self> {
        complex.check_degree(degree, 0, complex.dimension())?;
        if values.len() != complex.count(degree) {
            return Err(HodgeError::Shape(format!(
                "{} values for {} {degree}-simplices",
                values.len(),
                complex.count(degree)
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HodgeError::Shape(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            degree,
            complex_id: complex.id(),
            values,
        })
    }

    pub fn zero(complex: &SimplicialComplex, degree: usize) -> Result<Self> {
        Self::new(complex, degree, vec![0.0; complex.count(degree)])
    }

    /// Cochain with independent standard normal entries.
    pub fn random<R: Rng + ?Sized>(
        complex: &SimplicialComplex,
        degree: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let values = (0..complex.count(degree))
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::new(complex, degree, values)
    }

    /// Internal constructor for values already known to match the complex.
    pub(crate) fn from_parts(degree: usize, complex_id: ComplexId, values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self {
            degree,
            complex_id,
            values,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn complex_id(&self) -> ComplexId {
        self.complex_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Error unless `other` has the same degree and complex.
    pub fn check_compatible(&self, other: &Cochain) -> Result<()> {
        if self.degree != other.degree || self.complex_id != other.complex_id {
            return Err(HodgeError::Shape(format!(
                "cochains differ: degree {} on {} vs degree {} on {}",
                self.degree, self.complex_id, other.degree, other.complex_id
            )));
        }
        Ok(())
    }

    /// Error unless this cochain belongs to `complex`.
    pub fn check_complex(&self, complex: &SimplicialComplex) -> Result<()> {
        if self.complex_id != complex.id() || self.values.len() != complex.count(self.degree) {
            return Err(HodgeError::Shape(format!(
                "cochain on complex {} used with complex {}",
                self.complex_id,
                complex.id()
            )));
        }
        Ok(())
    }

    /// `a·x + y`.
    pub fn axpy(a: f64, x: &Cochain, y: &Cochain) -> Result<Cochain> {
        x.check_compatible(y)?;
        let values = x
            .values
            .iter()
            .zip(&y.values)
            .map(|(xi, yi)| a * xi + yi)
            .collect();
        Ok(Cochain::from_parts(x.degree, x.complex_id, values))
    }

    pub fn scale(&self, a: f64) -> Cochain {
        Cochain::from_parts(
            self.degree,
            self.complex_id,
            self.values.iter().map(|v| a * v).collect(),
        )
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        Cochain::axpy(-1.0, other, self)
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        Cochain::axpy(1.0, other, self)
    }

    /// Euclidean (unweighted) norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl SimplicialComplex {
    /// Apply the coboundary d_p to a p-cochain.
    pub fn d(&self, x: &Cochain) -> Result<Cochain> {
        x.check_complex(self)?;
        let matrix = self.coboundary(x.degree())?;
        Ok(Cochain::from_parts(
            x.degree() + 1,
            self.id(),
            matrix.apply_real(x.values()),
        ))
    }
}

/// JSON exchange form of a cochain: `{degree, complex_id, values}`.
///
/// `complex_id` may be omitted, in which case only the length is checked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CochainRecord {
    pub degree: usize,
    #[serde(default)]
    pub complex_id: Option<String>,
    pub values: Vec<f64>,
}

impl CochainRecord {
    pub fn from_cochain(c: &Cochain) -> Self {
        Self {
            degree: c.degree(),
            complex_id: Some(c.complex_id().to_string()),
            values: c.values().to_vec(),
        }
    }

    pub fn into_cochain(self, complex: &SimplicialComplex) -> Result<Cochain> {
        if let Some(id) = &self.complex_id {
            let parsed = ComplexId::try_from(id.clone()).map_err(HodgeError::CochainMalformed)?;
            if parsed != complex.id() {
                return Err(HodgeError::CochainMalformed(format!(
                    "cochain belongs to complex {parsed}, mesh is {}",
                    complex.id()
                )));
            }
        }
        Cochain::new(complex, self.degree, self.values)
            .map_err(|e| HodgeError::CochainMalformed(e.to_string()))
    }

    pub fn parse(text: &str, complex: &SimplicialComplex) -> Result<Cochain> {
        let record: CochainRecord = serde_json::from_str(text)
            .map_err(|e| HodgeError::CochainMalformed(e.to_string()))?;
        record.into_cochain(complex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;

    fn square() -> SimplicialComplex {
        build_complex(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
        .unwrap()
    }

    #[test]
    fn axpy_identities() {
        let c = square();
        let x = Cochain::new(&c, 1, vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let y = Cochain::new(&c, 1, vec![0.25, 1.0, -1.0, 2.0]).unwrap();
        let zero = Cochain::zero(&c, 1).unwrap();
        assert_eq!(Cochain::axpy(0.0, &x, &y).unwrap(), y);
        assert_eq!(Cochain::axpy(1.0, &x, &zero).unwrap(), x);
        assert_eq!(Cochain::axpy(2.0, &x, &x).unwrap(), x.scale(3.0));
    }

    #[test]
    fn axpy_rejects_degree_mismatch() {
        let c = square();
        let x = Cochain::zero(&c, 0).unwrap();
        let y = Cochain::zero(&c, 1).unwrap();
        assert!(matches!(Cochain::axpy(1.0, &x, &y), Err(HodgeError::Shape(_))));
    }

    #[test]
    fn new_rejects_bad_lengths_and_nan() {
        let c = square();
        assert!(Cochain::new(&c, 0, vec![1.0; 3]).is_err());
        assert!(Cochain::new(&c, 0, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Cochain::new(&c, 2, vec![]).is_err());
    }

    #[test]
    fn d_of_constant_and_indicator_on_four_cycle() {
        let c = square();
        let ones = Cochain::new(&c, 0, vec![1.0; 4]).unwrap();
        assert!(c.d(&ones).unwrap().is_zero());
        assert!(c.d(&Cochain::zero(&c, 0).unwrap()).unwrap().is_zero());

        let indicator = Cochain::new(&c, 0, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let dv = c.d(&indicator).unwrap();
        // vertex 0 is the tail of edge 0→1 and the head of edge 3→0
        let e01 = c.simplex_index(1, &[0, 1]).unwrap();
        let e03 = c.simplex_index(1, &[0, 3]).unwrap();
        for (i, v) in dv.values().iter().enumerate() {
            let expected = if i == e01 {
                -1.0
            } else if i == e03 {
                1.0
            } else {
                0.0
            };
            assert_eq!(*v, expected, "edge {:?}", c.simplices(1)[i]);
        }
    }

    #[test]
    fn json_record_round_trip_and_id_check() {
        let c = square();
        let x = Cochain::new(&c, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let text = serde_json::to_string(&CochainRecord::from_cochain(&x)).unwrap();
        assert_eq!(CochainRecord::parse(&text, &c).unwrap(), x);

        let anonymous = r#"{"degree": 0, "values": [1, 2, 3, 4]}"#;
        assert_eq!(CochainRecord::parse(anonymous, &c).unwrap().degree(), 0);

        let wrong = r#"{"degree": 0, "complex_id": "0000000000000001", "values": [1, 2, 3, 4]}"#;
        assert!(matches!(
            CochainRecord::parse(wrong, &c),
            Err(HodgeError::CochainMalformed(_))
        ));
        assert!(matches!(
            CochainRecord::parse("{\"degree\": 0}", &c),
            Err(HodgeError::CochainMalformed(_))
        ));
    }
}
