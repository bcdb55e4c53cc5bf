//! Additive objectives `E(A, R) = Σ φ(A_ij, R_ij)` over observed entries.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::NonNegMatrix;

/// Elementwise cost summed over the observed entries of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdditiveObjective {
    /// `(a - r)^2`
    FrobeniusSq,
    /// `|a - r|`
    L1,
    /// `a log(2a/(a+r)) + r log(2r/(a+r))`, with `0 log(0/x) = 0`.
    JensenShannon,
}

pub fn frobenius_sq() -> AdditiveObjective {
    AdditiveObjective::FrobeniusSq
}

pub fn l1() -> AdditiveObjective {
    AdditiveObjective::L1
}

pub fn jensen_shannon() -> AdditiveObjective {
    AdditiveObjective::JensenShannon
}

#[inline]
fn xlogy_ratio(x: f64, num: f64, den: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (num / den).ln()
    }
}

/// Jensen–Shannon cost of a single pair, continuous extension at zero.
#[inline]
pub fn js_phi(a: f64, r: f64) -> f64 {
    let s = a + r;
    if s == 0.0 {
        return 0.0;
    }
    // rounding can leave a tiny negative value when a ≈ r
    (xlogy_ratio(a, 2.0 * a, s) + xlogy_ratio(r, 2.0 * r, s)).max(0.0)
}

impl AdditiveObjective {
    pub fn name(self) -> &'static str {
        match self {
            Self::FrobeniusSq => "frobenius",
            Self::L1 => "l1",
            Self::JensenShannon => "js",
        }
    }

    /// `φ(a, r)` for nonnegative arguments.
    #[inline]
    pub fn phi(self, a: f64, r: f64) -> f64 {
        match self {
            Self::FrobeniusSq => {
                let d = a - r;
                d * d
            }
            Self::L1 => (a - r).abs(),
            Self::JensenShannon => js_phi(a, r),
        }
    }

    /// `φ(a, r)` with argument validation.
    pub fn try_phi(self, a: f64, r: f64) -> Result<f64> {
        if self == Self::JensenShannon && !(a >= 0.0 && r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Jensen-Shannon cost needs nonnegative arguments, got ({a}, {r})"
            )));
        }
        Ok(self.phi(a, r))
    }

    /// Degree `d` such that `E(sA, sR) = s^d E(A, R)`.
    pub fn homogeneity(self) -> i32 {
        match self {
            Self::FrobeniusSq => 2,
            Self::L1 | Self::JensenShannon => 1,
        }
    }

    /// Sum of `φ` over entries observed in `a`; `r` must be fully observed.
    pub fn evaluate(self, a: &NonNegMatrix, r: &NonNegMatrix) -> Result<f64> {
        a.check_same_shape("evaluate", r.shape())?;
        if !r.is_fully_observed() {
            return Err(Error::MissingEntries("evaluate"));
        }
        let av = a.values();
        let rv = r.values();
        let total = match a.mask() {
            None => av.iter().zip(rv).map(|(&x, &y)| self.phi(x, y)).sum(),
            Some(mask) => av
                .iter()
                .zip(rv)
                .zip(mask)
                .filter(|(_, &obs)| obs)
                .map(|((&x, &y), _)| self.phi(x, y))
                .sum(),
        };
        Ok(total)
    }
}

impl fmt::Display for AdditiveObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AdditiveObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "frobenius" | "frobenius_sq" | "fro" => Ok(Self::FrobeniusSq),
            "l1" => Ok(Self::L1),
            "js" | "jensen-shannon" | "jensen_shannon" => Ok(Self::JensenShannon),
            other => Err(Error::InvalidParameter(format!(
                "unknown objective {other:?}"
            ))),
        }
    }
}

/// `‖A − R‖_F / ‖A‖_F` over the observed entries of `a`.
pub fn relative_frobenius(a: &NonNegMatrix, r: &NonNegMatrix) -> Result<f64> {
    let num = AdditiveObjective::FrobeniusSq.evaluate(a, r)?;
    let den =
        AdditiveObjective::FrobeniusSq.evaluate(a, &NonNegMatrix::zeros(a.rows(), a.cols()))?;
    if den == 0.0 {
        return Err(Error::Undefined(
            "relative error of an all-zero matrix is undefined".into(),
        ));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> NonNegMatrix {
        NonNegMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            frobenius_sq()
                .evaluate(&m(&[&[1.0, 2.0]]), &m(&[&[1.0, 4.0]]))
                .unwrap(),
            4.0
        );
        let a = NonNegMatrix::from_options(1, 2, vec![Some(1.0), None]).unwrap();
        assert_eq!(l1().evaluate(&a, &m(&[&[3.0, 7.0]])).unwrap(), 2.0);
        let x = m(&[&[0.0, 0.5], &[3.0, 1.0]]);
        for obj in [frobenius_sq(), l1(), jensen_shannon()] {
            assert_eq!(obj.evaluate(&x, &x).unwrap(), 0.0);
        }
        assert!(l1().evaluate(&x, &m(&[&[1.0]])).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(frobenius_sq().phi(2.0, 5.0), 9.0);
        assert_eq!(l1().phi(2.0, 5.0), 3.0);
        assert_abs_diff_eq!(js_phi(1.0, 0.0), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(js_phi(0.0, 0.0), 0.0);
        assert_eq!(js_phi(0.7, 0.7), 0.0);
        assert!(jensen_shannon().try_phi(-1.0, 0.0).is_err());
        assert!(jensen_shannon().try_phi(1.0, 0.0).is_ok());
    }

    #[test]
    fn relative_frobenius_examples() {
        let a = m(&[&[3.0, 4.0]]);
        assert_eq!(relative_frobenius(&a, &a).unwrap(), 0.0);
        assert_eq!(relative_frobenius(&a, &m(&[&[0.0, 0.0]])).unwrap(), 1.0);
        assert_abs_diff_eq!(
            relative_frobenius(&a, &m(&[&[3.0, 0.0]])).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        assert!(relative_frobenius(&m(&[&[0.0, 0.0]]), &a).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!(
            "frobenius".parse::<AdditiveObjective>().unwrap(),
            frobenius_sq()
        );
        assert_eq!("L1".parse::<AdditiveObjective>().unwrap(), l1());
        assert_eq!("js".parse::<AdditiveObjective>().unwrap(), jensen_shannon());
        assert!("kl".parse::<AdditiveObjective>().is_err());
    }

    fn entries() -> impl Strategy<Value = f64> {
        prop_oneof![Just(0.0), 0.0f64..10.0]
    }

    proptest! {
        #[test]
        fn js_symmetric_and_bounded(a in entries(), r in entries()) {
            let v = js_phi(a, r);
            prop_assert!(v >= 0.0);
            assert_abs_diff_eq!(v, js_phi(r, a), epsilon = 1e-12);
            prop_assert!(v <= (a + r) * 2f64.ln() + 1e-12);
        }

        #[test]
        fn evaluate_zero_iff_equal(
            a in proptest::collection::vec(entries(), 6),
            r in proptest::collection::vec(entries(), 6),
        ) {
            let am = NonNegMatrix::new(2, 3, a.clone()).unwrap();
            let rm = NonNegMatrix::new(2, 3, r.clone()).unwrap();
            for obj in [frobenius_sq(), l1(), jensen_shannon()] {
                let e = obj.evaluate(&am, &rm).unwrap();
                prop_assert_eq!(e == 0.0, a == r);
            }
        }

        #[test]
        fn evaluate_is_additive_over_row_blocks(
            a in proptest::collection::vec(entries(), 12),
            r in proptest::collection::vec(entries(), 12),
            split in 1usize..4,
        ) {
            let am = NonNegMatrix::new(4, 3, a.clone()).unwrap();
            let rm = NonNegMatrix::new(4, 3, r.clone()).unwrap();
            for obj in [frobenius_sq(), l1(), jensen_shannon()] {
                let whole = obj.evaluate(&am, &rm).unwrap();
                let top = obj.evaluate(
                    &NonNegMatrix::new(split, 3, a[..split * 3].to_vec()).unwrap(),
                    &NonNegMatrix::new(split, 3, r[..split * 3].to_vec()).unwrap(),
                ).unwrap();
                let bottom = obj.evaluate(
                    &NonNegMatrix::new(4 - split, 3, a[split * 3..].to_vec()).unwrap(),
                    &NonNegMatrix::new(4 - split, 3, r[split * 3..].to_vec()).unwrap(),
                ).unwrap();
                assert_abs_diff_eq!(whole, top + bottom, epsilon = 1e-9);
            }
        }
    }
}
