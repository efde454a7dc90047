//! Exact base-k path codes on the rooted tree.
//!
//! An infinite downward path from the root is coded by its digit sequence
//! i₁i₂i₃… with i_n ∈ {0,…,k−1}, and carries the real number
//! t = Σ i_n/kⁿ ∈ [0,1]. The coding is one-to-one except on Q_k, the
//! terminating fractions in (0,1), which admit both a terminating and a
//! trailing-(k−1) expansion. t is kept as an exact rational throughout —
//! Q_k membership is undecidable on floats.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("t must lie in [0,1], got {0}")]
    OutOfRange(String),
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("base k must be at least 2, got {0}")]
    BadBase(u32),
    #[error("digit {digit} out of range for base {k}")]
    BadDigit { digit: u32, k: u32 },
    #[error("t = {0} is not in Q_k: its reduced denominator is no power-of-k divisor")]
    NotInQk(String),
    #[error("cannot parse path code `{0}` (expected `p/q`, an integer, or `d:<digits>`)")]
    Parse(String),
}

/// An exact t ∈ [0,1] together with the expansion base k.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathCode {
    t: BigRational,
    k: u32,
}

impl PathCode {
    pub fn new(t: BigRational, k: u32) -> Result<Self, PathError> {
        if k < 2 {
            return Err(PathError::BadBase(k));
        }
        if t.is_negative() || t > BigRational::one() {
            return Err(PathError::OutOfRange(t.to_string()));
        }
        Ok(PathCode { t, k })
    }

    pub fn from_ratio(num: i64, den: i64, k: u32) -> Result<Self, PathError> {
        if den == 0 {
            return Err(PathError::ZeroDenominator);
        }
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)), k)
    }

    /// Parse `p/q`, a bare integer, or an explicit digit prefix `d:01011`
    /// (remaining digits zero).
    pub fn parse(s: &str, k: u32) -> Result<Self, PathError> {
        if k < 2 {
            return Err(PathError::BadBase(k));
        }
        let bad = || PathError::Parse(s.to_string());
        if let Some(digits) = s.strip_prefix("d:") {
            let mut t = BigRational::zero();
            let base = BigRational::from(BigInt::from(k));
            let mut scale = base.recip();
            for ch in digits.chars() {
                let digit = ch.to_digit(36).ok_or_else(bad)?;
                if digit >= k {
                    return Err(PathError::BadDigit { digit, k });
                }
                t += &scale * BigRational::from(BigInt::from(digit));
                scale /= &base;
            }
            Self::new(t, k)
        } else if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(PathError::ZeroDenominator);
            }
            Self::new(BigRational::new(num, den), k)
        } else {
            let num: BigInt = s.trim().parse().map_err(|_| bad())?;
            Self::new(BigRational::from(num), k)
        }
    }

    pub fn value(&self) -> &BigRational {
        &self.t
    }

    pub fn base(&self) -> u32 {
        self.k
    }

    pub fn to_f64(&self) -> f64 {
        self.t.to_f64().expect("rational in [0,1] converts")
    }

    /// First n digits of the greedy base-k expansion. Terminating values get
    /// trailing zeros; t = 1 is encoded as all digits k−1 by convention.
    pub fn digits(&self, n: usize) -> Vec<u8> {
        if self.t.is_one() {
            return vec![(self.k - 1) as u8; n];
        }
        let base = BigInt::from(self.k);
        let mut digits = Vec::with_capacity(n);
        let mut num = self.t.numer().clone();
        let den = self.t.denom().clone();
        for _ in 0..n {
            num *= &base;
            let (digit, rem) = num.div_rem(&den);
            digits.push(digit.to_u8().expect("digit < k"));
            num = rem;
        }
        digits
    }

    /// Whether t lies in Q_k: t ∈ (0,1) and the reduced denominator divides
    /// a power of k.
    pub fn is_in_qk(&self) -> bool {
        if self.t.is_zero() || self.t.is_one() {
            return false;
        }
        let base = BigInt::from(self.k);
        let mut den = self.t.denom().clone();
        loop {
            let g = den.gcd(&base);
            if g.is_one() {
                break;
            }
            while (&den % &g).is_zero() {
                den /= &g;
            }
        }
        den.is_one()
    }

    /// The terminating expansion digits i₁…i_N (i_N ≠ 0) of a t ∈ Q_k.
    fn terminating_digits(&self) -> Result<Vec<u8>, PathError> {
        if !self.is_in_qk() {
            return Err(PathError::NotInQk(self.t.to_string()));
        }
        let base = BigInt::from(self.k);
        let mut digits = Vec::new();
        let mut num = self.t.numer().clone();
        let den = self.t.denom().clone();
        while !num.is_zero() {
            num *= &base;
            let (digit, rem) = num.div_rem(&den);
            digits.push(digit.to_u8().expect("digit < k"));
            num = rem;
        }
        Ok(digits)
    }

    /// First n digits of the non-terminating expansion of a t ∈ Q_k:
    /// i₁…i_{N−1}, (i_N − 1), then all digits k−1.
    pub fn second_representation(&self, n: usize) -> Result<Vec<u8>, PathError> {
        let mut digits = self.terminating_digits()?;
        let last = digits
            .last_mut()
            .expect("Q_k expansion terminates with i_N ≠ 0");
        *last -= 1;
        digits.resize(n.max(digits.len()), (self.k - 1) as u8);
        digits.truncate(n);
        Ok(digits)
    }
}

impl fmt::Display for PathCode {
    // Ratio<BigInt> prints `p/q` (or just `p` when q = 1), which is the
    // exact-rational wire format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.t)
    }
}

/// A vertex of the rooted tree, addressed by its digit path from the root.
/// The root is the empty sequence; level = number of digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    digits: Vec<u8>,
}

impl Vertex {
    pub fn root() -> Self {
        Vertex { digits: Vec::new() }
    }

    pub fn from_digits(digits: Vec<u8>, k: u32) -> Result<Self, PathError> {
        for &d in &digits {
            if u32::from(d) >= k {
                return Err(PathError::BadDigit {
                    digit: u32::from(d),
                    k,
                });
            }
        }
        Ok(Vertex { digits })
    }

    /// Parse a digit string such as `01011`; empty means the root.
    pub fn parse(s: &str, k: u32) -> Result<Self, PathError> {
        let mut digits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let digit = ch
                .to_digit(36)
                .ok_or_else(|| PathError::Parse(s.to_string()))?;
            if digit >= k {
                return Err(PathError::BadDigit { digit, k });
            }
            digits.push(digit as u8);
        }
        Ok(Vertex { digits })
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn child(&self, digit: u8) -> Vertex {
        let mut digits = self.digits.clone();
        digits.push(digit);
        Vertex { digits }
    }

    pub fn parent(&self) -> Option<Vertex> {
        if self.digits.is_empty() {
            None
        } else {
            Some(self.prefix(self.digits.len() - 1))
        }
    }

    /// The ancestor at a given level (level 0 is the root).
    pub fn prefix(&self, level: usize) -> Vertex {
        assert!(level <= self.digits.len());
        Vertex {
            digits: self.digits[..level].to_vec(),
        }
    }

    pub fn children(&self, k: u32) -> impl Iterator<Item = Vertex> + '_ {
        (0..k as u8).map(move |d| self.child(d))
    }

    /// Digit string address; the root renders as the empty string.
    pub fn digit_string(&self) -> String {
        self.digits
            .iter()
            .map(|&d| char::from_digit(u32::from(d), 36).expect("digit below base 36"))
            .collect()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digit_string())
    }
}

/// All vertices of V_m in level order (lexicographic within a level).
pub fn volume(k: u32, m: usize) -> Vec<Vertex> {
    let mut all = vec![Vertex::root()];
    let mut level = vec![Vertex::root()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * k as usize);
        for v in &level {
            next.extend(v.children(k));
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    all
}

/// Position of a vertex relative to a coded path: on it, strictly left of
/// it, or strictly right of it in the same-level lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSide {
    OnPath,
    Left,
    Right,
}

pub fn branch_side(v: &Vertex, path_digits: &[u8]) -> BranchSide {
    assert!(
        v.level() <= path_digits.len(),
        "path digits cover only {} levels, vertex sits at level {}",
        path_digits.len(),
        v.level()
    );
    for (d, p) in v.digits().iter().zip(path_digits) {
        if d < p {
            return BranchSide::Left;
        }
        if d > p {
            return BranchSide::Right;
        }
    }
    BranchSide::OnPath
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(num: i64, den: i64, k: u32) -> PathCode {
        PathCode::from_ratio(num, den, k).unwrap()
    }

    #[test]
    fn digits_examples() {
        assert_eq!(code(1, 2, 2).digits(4), vec![1, 0, 0, 0]);
        assert_eq!(code(1, 3, 2).digits(6), vec![0, 1, 0, 1, 0, 1]);
        assert_eq!(code(1, 1, 2).digits(3), vec![1, 1, 1]);
        assert_eq!(code(0, 1, 2).digits(3), vec![0, 0, 0]);
        assert_eq!(code(1, 3, 3).digits(4), vec![1, 0, 0, 0]);
    }

    #[test]
    fn qk_membership_examples() {
        assert!(code(1, 2, 2).is_in_qk());
        assert!(!code(1, 3, 2).is_in_qk());
        assert!(code(3, 8, 2).is_in_qk());
        assert!(code(1, 3, 3).is_in_qk());
        assert!(code(2, 9, 3).is_in_qk());
        assert!(!code(0, 1, 2).is_in_qk());
        assert!(!code(1, 1, 2).is_in_qk());
        assert!(code(5, 16, 2).is_in_qk());
        assert!(!code(5, 12, 2).is_in_qk());
    }

    #[test]
    fn second_representation_examples() {
        assert_eq!(
            code(1, 2, 2).second_representation(5).unwrap(),
            vec![0, 1, 1, 1, 1]
        );
        assert_eq!(
            code(3, 4, 2).second_representation(5).unwrap(),
            vec![1, 0, 1, 1, 1]
        );
        assert_eq!(
            code(1, 3, 3).second_representation(4).unwrap(),
            vec![0, 2, 2, 2]
        );
        assert!(matches!(
            code(1, 3, 2).second_representation(4),
            Err(PathError::NotInQk(_))
        ));
    }

    #[test]
    fn second_representation_shorter_than_terminating() {
        // N = 4 for t = 5/16 but only 2 digits requested
        assert_eq!(code(5, 16, 2).second_representation(2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn branch_side_examples() {
        let v = |d: &[u8]| Vertex::from_digits(d.to_vec(), 2).unwrap();
        assert_eq!(branch_side(&v(&[1, 0]), &[1, 0, 1]), BranchSide::OnPath);
        assert_eq!(branch_side(&v(&[0, 1]), &[1, 0]), BranchSide::Left);
        assert_eq!(branch_side(&v(&[1, 1]), &[1, 0]), BranchSide::Right);
        assert_eq!(branch_side(&Vertex::root(), &[1, 0]), BranchSide::OnPath);
    }

    #[test]
    fn digit_sums_converge_to_t() {
        for (num, den) in [(1i64, 3i64), (5, 7), (3, 8), (22, 23)] {
            let c = code(num, den, 2);
            let mut sum = BigRational::zero();
            let two = BigRational::from(BigInt::from(2));
            let mut scale = two.recip();
            for d in c.digits(24) {
                sum += &scale * BigRational::from(BigInt::from(d));
                scale /= &two;
            }
            let err = (c.value() - &sum).abs();
            let bound = BigRational::new(BigInt::one(), BigInt::from(2).pow(24));
            assert!(err < bound, "error {err} ≥ 2^-24 for {num}/{den}");
        }
    }

    #[test]
    fn parse_grammar() {
        assert_eq!(PathCode::parse("5/16", 2).unwrap(), code(5, 16, 2));
        assert_eq!(PathCode::parse("1", 2).unwrap(), code(1, 1, 2));
        assert_eq!(PathCode::parse("0", 2).unwrap(), code(0, 1, 2));
        // d:01011 = 0/2 + 1/4 + 0/8 + 1/16 + 1/32 = 11/32
        assert_eq!(PathCode::parse("d:01011", 2).unwrap(), code(11, 32, 2));
        assert!(PathCode::parse("3/2", 2).is_err());
        assert!(PathCode::parse("-1/2", 2).is_err());
        assert!(PathCode::parse("1/0", 2).is_err());
        assert!(PathCode::parse("d:02", 2).is_err());
        assert!(PathCode::parse("x", 2).is_err());
    }

    #[test]
    fn volume_counts() {
        assert_eq!(volume(2, 0).len(), 1);
        assert_eq!(volume(2, 3).len(), 15);
        assert_eq!(volume(3, 2).len(), 13);
        let v3 = volume(2, 2);
        assert_eq!(v3[0], Vertex::root());
        assert_eq!(v3[1].digit_string(), "0");
        assert_eq!(v3[6].digit_string(), "11");
    }

    #[test]
    fn vertex_addressing() {
        let v = Vertex::parse("010", 2).unwrap();
        assert_eq!(v.level(), 3);
        assert_eq!(v.parent().unwrap().digit_string(), "01");
        assert_eq!(v.child(1).digit_string(), "0101");
        assert!(Vertex::parse("012", 2).is_err());
        assert_eq!(Vertex::root().parent(), None);
    }
}
