//! Green-component exchange signs and exact integer polynomials in the order `p`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Which family of parastatistics a field obeys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    #[serde(rename = "parabose")]
    ParaBose,
    #[serde(rename = "parafermi")]
    ParaFermi,
}

impl Statistics {
    /// Sign picked up when two Green components of this statistics are exchanged.
    ///
    /// Equal Green indices behave like ordinary bosons (fermions); unequal indices
    /// get the opposite sign.
    pub fn exchange_sign(self, same_index: bool) -> i32 {
        exchange_sign(self, same_index)
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::ParaBose => "parabose",
            Statistics::ParaFermi => "parafermi",
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `±(2δ − 1)` with the upper sign for parabose.
pub fn exchange_sign(stat: Statistics, same_index: bool) -> i32 {
    let bose = if same_index { 1 } else { -1 };
    match stat {
        Statistics::ParaBose => bose,
        Statistics::ParaFermi => -bose,
    }
}

/// A Green index `1 ≤ α ≤ p` for a concrete order `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GreenIndex(u32);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("green index {value} out of range 1..={p}")]
pub struct GreenIndexError {
    pub value: u32,
    pub p: u32,
}

impl GreenIndex {
    pub fn new(value: u32, p: u32) -> Result<Self, GreenIndexError> {
        if value == 0 || value > p {
            return Err(GreenIndexError { value, p });
        }
        Ok(GreenIndex(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// Polynomial in `p` with arbitrary-precision integer coefficients.
///
/// `coeffs[k]` is the coefficient of `p^k`. The vector never ends in a zero, so
/// the zero polynomial is the empty vector and structural equality is value
/// equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PPoly {
    coeffs: Vec<BigInt>,
}

impl PPoly {
    pub fn zero() -> Self {
        PPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    /// The monomial `p`.
    pub fn p() -> Self {
        PPoly::from_coeffs(vec![BigInt::zero(), BigInt::one()])
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> Self {
        PPoly::from_coeffs(vec![c.into()])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of nonzero coefficients.
    pub fn monomial_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn eval(&self, p0: i64) -> BigInt {
        self.eval_big(&BigInt::from(p0))
    }

    pub fn eval_big(&self, p0: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * p0 + c)
    }

    pub fn scale<T: Into<BigInt>>(&self, k: T) -> Self {
        let k = k.into();
        PPoly::from_coeffs(self.coeffs.iter().map(|c| c * &k).collect())
    }
}

/// Coefficients serialize as an array, lowest power first. Entries that fit
/// in an `i64` are JSON numbers; larger ones are decimal strings.
impl Serialize for PPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use num_traits::ToPrimitive;
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Coeff {
            Small(i64),
            Big(String),
        }
        let raw: Vec<Coeff> = Vec::deserialize(d)?;
        let coeffs = raw
            .into_iter()
            .map(|c| match c {
                Coeff::Small(v) => Ok(BigInt::from(v)),
                Coeff::Big(s) => s.parse::<BigInt>().map_err(serde::de::Error::custom),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PPoly::from_coeffs(coeffs))
    }
}

/// `ppoly_eval` in functional form.
pub fn ppoly_eval(poly: &PPoly, p0: i64) -> BigInt {
    poly.eval(p0)
}

/// `p (p − 1) … (p − b + 1)`: the number of injective maps from `b` blocks to
/// `p` Green indices.
pub fn falling_factorial(b: usize) -> PPoly {
    let mut acc = PPoly::one();
    for j in 0..b {
        let factor = PPoly::from_coeffs(vec![-BigInt::from(j), BigInt::one()]);
        acc = &acc * &factor;
    }
    acc
}

fn add_coeffs(a: &[BigInt], b: &[BigInt], negate_b: bool) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_default();
            let y = b.get(k).cloned().unwrap_or_default();
            if negate_b {
                x - y
            } else {
                x + y
            }
        })
        .collect()
}

impl Add for &PPoly {
    type Output = PPoly;
    fn add(self, rhs: &PPoly) -> PPoly {
        PPoly::from_coeffs(add_coeffs(&self.coeffs, &rhs.coeffs, false))
    }
}

impl Add for PPoly {
    type Output = PPoly;
    fn add(self, rhs: PPoly) -> PPoly {
        &self + &rhs
    }
}

impl Sub for &PPoly {
    type Output = PPoly;
    fn sub(self, rhs: &PPoly) -> PPoly {
        PPoly::from_coeffs(add_coeffs(&self.coeffs, &rhs.coeffs, true))
    }
}

impl Sub for PPoly {
    type Output = PPoly;
    fn sub(self, rhs: PPoly) -> PPoly {
        &self - &rhs
    }
}

impl Mul for &PPoly {
    type Output = PPoly;
    fn mul(self, rhs: &PPoly) -> PPoly {
        if self.is_zero() || rhs.is_zero() {
            return PPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PPoly::from_coeffs(out)
    }
}

impl Mul for PPoly {
    type Output = PPoly;
    fn mul(self, rhs: PPoly) -> PPoly {
        &self * &rhs
    }
}

impl Neg for PPoly {
    type Output = PPoly;
    fn neg(self) -> PPoly {
        PPoly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for &PPoly {
    type Output = PPoly;
    fn neg(self) -> PPoly {
        -self.clone()
    }
}

impl AddAssign<&PPoly> for PPoly {
    fn add_assign(&mut self, rhs: &PPoly) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&PPoly> for PPoly {
    fn sub_assign(&mut self, rhs: &PPoly) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&PPoly> for PPoly {
    fn mul_assign(&mut self, rhs: &PPoly) {
        *self = &*self * rhs;
    }
}

impl fmt::Display for PPoly {
    /// Ascending powers, e.g. `2p - p^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            first = false;
            let var = match k {
                0 => String::new(),
                1 => "p".to_string(),
                _ => format!("p^{k}"),
            };
            if k == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&var)?;
            } else {
                write!(f, "{mag}{var}")?;
            }
        }
        Ok(())
    }
}
