//! Scalar arithmetic at roots of unity.
//!
//! Everything downstream needs q = exp(2πi/k) raised to real, often
//! half-integer or fractional, exponents. Exponents that are rationals with
//! a denominator up to [`MAX_EXACT_DENOMINATOR`] go through [`UnitPhase`], an
//! exact reduced turn, and only become floating point at the very end; the
//! rest use the principal branch `q^x = exp(2πi·x/k)` directly.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex carrier for every non-exact value in the crate.
pub type Amplitude = Complex64;

/// Largest denominator for which a real exponent is treated as an exact rational.
pub const MAX_EXACT_DENOMINATOR: u64 = 1_000_000;

/// Exact half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    pub fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }

    /// `2j + 1` for a non-negative `j`.
    pub fn dim(self) -> usize {
        debug_assert!(self.twice >= 0, "dimension of negative angular momentum");
        (self.twice + 1) as usize
    }

    /// `m = -j, -j+1, …, j`.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + ExactSizeIterator {
        let j = self.twice;
        (0..(j + 1).max(0)).map(move |i| HalfInt::from_twice(-j + 2 * i))
    }

    /// The integer value, if there is one.
    pub fn to_integer(self) -> Option<i32> {
        self.is_integer().then_some(self.twice / 2)
    }

    /// The product `self · other` when it is an integer.
    pub fn integer_product(self, other: HalfInt) -> Option<i64> {
        let p = i64::from(self.twice) * i64::from(other.twice);
        (p % 4 == 0).then_some(p / 4)
    }

    /// `(-1)^self`, defined only for integer values.
    pub fn sign(self) -> Option<f64> {
        self.to_integer().map(|n| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
    }

    /// Whether `m` is a valid projection of `self` (same parity, `|m| <= j`).
    pub fn admits(self, m: HalfInt) -> bool {
        self.twice >= 0 && m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"1.5"` and `"3"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseHalfInt(s.to_string());
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => num.checked_mul(2).map(HalfInt::from_twice).ok_or_else(bad),
                "2" => Ok(HalfInt::from_twice(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(n) = t.parse::<i32>() {
            return n.checked_mul(2).map(HalfInt::from_twice).ok_or_else(bad);
        }
        let x: f64 = t.parse().map_err(|_| bad())?;
        let twice = 2.0 * x;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > f64::from(i32::MAX) {
            return Err(bad());
        }
        Ok(HalfInt::from_twice(twice as i32))
    }
}

/// An exact turn `exp(2πi · num/den)`, kept reduced with `0 <= num < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnitPhase {
    num: u64,
    den: u64,
}

impl UnitPhase {
    pub const ONE: UnitPhase = UnitPhase { num: 0, den: 1 };

    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("unit phase with zero denominator".into()));
        }
        Ok(Self::reduce(i128::from(num), u128::from(den)))
    }

    fn reduce(num: i128, den: u128) -> Self {
        let num = num.rem_euclid(den as i128) as u128;
        let g = gcd(num, den);
        UnitPhase { num: (num / g) as u64, den: (den / g) as u64 }
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    pub fn pow(self, e: i64) -> UnitPhase {
        Self::reduce(i128::from(self.num) * i128::from(e), u128::from(self.den))
    }

    pub fn conj(self) -> UnitPhase {
        Self::reduce(-i128::from(self.num), u128::from(self.den))
    }

    pub fn to_amplitude(self) -> Amplitude {
        // quarter turns come out exact
        if (4 * self.num).is_multiple_of(self.den) {
            return match 4 * self.num / self.den {
                0 => Amplitude::new(1.0, 0.0),
                1 => Amplitude::new(0.0, 1.0),
                2 => Amplitude::new(-1.0, 0.0),
                _ => Amplitude::new(0.0, -1.0),
            };
        }
        // symmetric reduction keeps the angle in (-π, π]
        let t = if 2 * self.num > self.den {
            -((self.den - self.num) as f64) / self.den as f64
        } else {
            self.num as f64 / self.den as f64
        };
        let (s, c) = (TAU * t).sin_cos();
        Amplitude::new(c, s)
    }
}

/// Best rational `p/d` with `d <= max_den` whose nearest double is exactly `x`.
pub fn exact_rational(x: f64, max_den: u64) -> Option<(i64, u64)> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    if x.fract() == 0.0 {
        return Some((x as i64, 1));
    }
    // continued-fraction convergents
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > i128::from(max_den) {
            return None;
        }
        if (h2 as f64) / (k2 as f64) == x {
            return Some((h2 as i64, k2 as u64));
        }
        let frac = y - a;
        if frac == 0.0 {
            return None;
        }
        y = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

/// `exp(2πi · x / k)`, exact via [`UnitPhase`] when `x` is a small-denominator rational.
pub(crate) fn turn(x: f64, k: u64) -> Amplitude {
    if x == 0.0 {
        return Amplitude::new(1.0, 0.0);
    }
    match exact_rational(x, MAX_EXACT_DENOMINATOR) {
        Some((p, d)) => UnitPhase::reduce(i128::from(p), u128::from(d) * u128::from(k)).to_amplitude(),
        None => {
            let t = x.rem_euclid(k as f64) / k as f64;
            let (s, c) = (TAU * t).sin_cos();
            Amplitude::new(c, s)
        }
    }
}

fn check_order(k: u32) -> Result<()> {
    if k < 2 {
        Err(Error::InvalidOrder(i64::from(k)))
    } else {
        Ok(())
    }
}

/// `q = exp(2πi/k)`.
pub fn root_of_unity(k: u32) -> Result<UnitPhase> {
    check_order(k)?;
    UnitPhase::new(1, u64::from(k))
}

/// `q^x = exp(2πi·x/k)` on the principal branch.
pub fn q_power(x: f64, k: u32) -> Result<Amplitude> {
    check_order(k)?;
    Ok(turn(x, u64::from(k)))
}

/// `[x]_q = (1 - q^x)/(1 - q)`.
pub fn q_bracket(x: f64, k: u32) -> Result<Amplitude> {
    check_order(k)?;
    if x.fract() == 0.0 && x.is_finite() {
        let n = x as i64;
        if n.rem_euclid(i64::from(k)) == 0 {
            return Ok(Amplitude::new(0.0, 0.0));
        }
        if (1..i64::from(k)).contains(&n) {
            let q = root_of_unity(k)?;
            return Ok((0..n).map(|i| q.pow(i).to_amplitude()).sum());
        }
    }
    let one = Amplitude::new(1.0, 0.0);
    let q = root_of_unity(k)?.to_amplitude();
    Ok((one - turn(x, u64::from(k))) / (one - q))
}

/// `[n]_q!` together with whether a vanishing factor `[k]_q` was hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QFactorial {
    pub value: Amplitude,
    pub degenerate: bool,
}

impl QFactorial {
    /// The value, refusing degenerate factorials (they must never be divided by).
    pub fn invertible(self, n: u32, k: u32) -> Result<Amplitude> {
        if self.degenerate {
            Err(Error::DegenerateFactorial { n, k })
        } else {
            Ok(self.value)
        }
    }
}

/// `[n]_q! = [1]_q [2]_q … [n]_q`, with `[0]_q! = 1`.
pub fn q_factorial(n: u32, k: u32) -> Result<QFactorial> {
    check_order(k)?;
    let mut value = Amplitude::new(1.0, 0.0);
    for i in 1..=n {
        value *= q_bracket(f64::from(i), k)?;
    }
    Ok(QFactorial { value, degenerate: n >= k })
}

/// Absolute/relative tolerance pair used by every verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRule {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for ToleranceRule {
    fn default() -> Self {
        ToleranceRule { abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

impl ToleranceRule {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if abs_tol > 0.0 && rel_tol > 0.0 {
            Ok(ToleranceRule { abs_tol, rel_tol })
        } else {
            Err(Error::InvalidArgument(format!("tolerances must be positive, got abs {abs_tol:e} rel {rel_tol:e}")))
        }
    }

    pub fn uniform(tol: f64) -> Result<Self> {
        Self::new(tol, tol)
    }

    /// The default rule, widened by `k²` above k = 16.
    pub fn for_order(k: u32) -> Self {
        let base = Self::default();
        if k <= 16 {
            base
        } else {
            let s = f64::from(k) * f64::from(k);
            ToleranceRule { abs_tol: base.abs_tol * s, rel_tol: base.rel_tol * s }
        }
    }

    /// Threshold for a residual measured against quantities of size `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale)
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.threshold(scale)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Mul for UnitPhase {
    type Output = UnitPhase;

    fn mul(self, other: UnitPhase) -> UnitPhase {
        let den = u128::from(self.den) * u128::from(other.den);
        let num = i128::from(self.num) * i128::from(other.den) + i128::from(other.num) * i128::from(self.den);
        Self::reduce(num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: Amplitude, b: Amplitude) -> bool {
        (a - b).norm() <= 1e-14
    }

    #[test]
    fn halfint_parsing() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert_eq!("3".parse::<HalfInt>().unwrap(), HalfInt::from_twice(6));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-1));
        assert_eq!("4/2".parse::<HalfInt>().unwrap(), HalfInt::from_int(2));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("1.25".parse::<HalfInt>().is_err());
        assert!("abc".parse::<HalfInt>().is_err());
        assert_eq!(HalfInt::from_twice(3).to_string(), "3/2");
        assert_eq!(HalfInt::from_int(-2).to_string(), "-2");
    }

    #[test]
    fn halfint_projections_and_products() {
        let j = HalfInt::from_twice(3);
        let ms: Vec<_> = j.projections().map(HalfInt::twice).collect();
        assert_eq!(ms, vec![-3, -1, 1, 3]);
        assert_eq!(HalfInt::ZERO.projections().count(), 1);
        assert_eq!(HalfInt::HALF.integer_product(HalfInt::HALF), None);
        assert_eq!(HalfInt::HALF.integer_product(HalfInt::from_int(2)), Some(1));
        assert!(j.admits(HalfInt::from_twice(-1)));
        assert!(!j.admits(HalfInt::from_twice(2)));
        assert!(!j.admits(HalfInt::from_twice(5)));
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(root_of_unity(2).unwrap().to_amplitude(), Amplitude::new(-1.0, 0.0));
        assert_eq!(root_of_unity(4).unwrap().to_amplitude(), Amplitude::new(0.0, 1.0));
        let q3 = root_of_unity(3).unwrap().to_amplitude();
        assert_abs_diff_eq!(q3.re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(q3.im, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(root_of_unity(1), Err(Error::InvalidOrder(1)));
        assert_eq!(root_of_unity(0), Err(Error::InvalidOrder(0)));
    }

    #[test]
    fn powers() {
        for k in 2..10 {
            assert_eq!(q_power(0.0, k).unwrap(), Amplitude::new(1.0, 0.0));
            assert_eq!(q_power(f64::from(k), k).unwrap(), Amplitude::new(1.0, 0.0));
        }
        assert_eq!(q_power(0.5, 2).unwrap(), Amplitude::new(0.0, 1.0));
        assert!(q_power(1.0, 1).is_err());
        // irrational-looking exponent takes the float path
        let x = std::f64::consts::PI;
        let direct = Amplitude::from_polar(1.0, TAU * x / 5.0);
        assert!(close(q_power(x, 5).unwrap(), direct));
    }

    #[test]
    fn brackets() {
        for k in 2..12 {
            assert_eq!(q_bracket(0.0, k).unwrap(), Amplitude::new(0.0, 0.0));
            assert_eq!(q_bracket(f64::from(k), k).unwrap(), Amplitude::new(0.0, 0.0));
            assert_eq!(q_bracket(1.0, k).unwrap(), Amplitude::new(1.0, 0.0));
        }
        assert_eq!(q_bracket(2.0, 4).unwrap(), Amplitude::new(1.0, 1.0));
        // integer fast path agrees with the defining quotient
        let q = root_of_unity(7).unwrap().to_amplitude();
        let one = Amplitude::new(1.0, 0.0);
        for n in 1..7 {
            let quotient = (one - q.powi(n)) / (one - q);
            assert!(close(q_bracket(f64::from(n), 7).unwrap(), quotient));
        }
        // fractional argument
        let half = q_bracket(0.5, 2).unwrap();
        assert!(close(half, Amplitude::new(0.5, -0.5)));
    }

    #[test]
    fn factorials() {
        for k in 2..9 {
            assert_eq!(q_factorial(0, k).unwrap().value, Amplitude::new(1.0, 0.0));
            assert_eq!(q_factorial(1, k).unwrap().value, Amplitude::new(1.0, 0.0));
        }
        let f = q_factorial(2, 3).unwrap();
        assert!(!f.degenerate);
        assert_abs_diff_eq!(f.value.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.value.im, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        let d = q_factorial(3, 3).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.value, Amplitude::new(0.0, 0.0));
        assert_eq!(d.invertible(3, 3), Err(Error::DegenerateFactorial { n: 3, k: 3 }));
    }

    #[test]
    fn nonvanishing_brackets_below_order() {
        for k in 2..40 {
            for n in 1..k {
                assert!(q_bracket(f64::from(n), k).unwrap().norm() > 1e-3);
            }
        }
    }

    #[test]
    fn exact_rationals() {
        assert_eq!(exact_rational(0.5, 100), Some((1, 2)));
        assert_eq!(exact_rational(2.37, MAX_EXACT_DENOMINATOR), Some((237, 100)));
        assert_eq!(exact_rational(-0.75, 100), Some((-3, 4)));
        assert_eq!(exact_rational(1.0 / 3.0, 100), Some((1, 3)));
        assert_eq!(exact_rational(std::f64::consts::PI, MAX_EXACT_DENOMINATOR), None);
        assert_eq!(exact_rational(f64::NAN, 10), None);
    }

    #[test]
    fn tolerance_rules() {
        assert!(ToleranceRule::new(0.0, 1e-10).is_err());
        assert!(ToleranceRule::new(1e-10, -1.0).is_err());
        assert_eq!(ToleranceRule::for_order(16), ToleranceRule::default());
        assert_abs_diff_eq!(ToleranceRule::for_order(20).abs_tol, 4e-8, epsilon = 1e-20);
    }

    proptest! {
        #[test]
        fn unit_phase_modulus(num in -1000i64..1000, den in 1u64..5000) {
            let z = UnitPhase::new(num, den).unwrap().to_amplitude();
            prop_assert!((z.norm() - 1.0).abs() <= f64::EPSILON);
        }

        #[test]
        fn unit_phase_associative(a in -50i64..50, b in -50i64..50, c in -50i64..50,
                                  da in 1u64..60, db in 1u64..60, dc in 1u64..60) {
            let (p1, p2, p3) = (
                UnitPhase::new(a, da).unwrap(),
                UnitPhase::new(b, db).unwrap(),
                UnitPhase::new(c, dc).unwrap(),
            );
            prop_assert_eq!(p1 * p2 * p3, p1 * (p2 * p3));
            prop_assert_eq!(p1 * p1.conj(), UnitPhase::ONE);
        }

        #[test]
        fn q_power_period(x in -20.0f64..20.0, k in 2u32..30) {
            let a = q_power(x + f64::from(k), k).unwrap();
            let b = q_power(x, k).unwrap();
            prop_assert!((a - b).norm() <= 1e-10);
        }

        #[test]
        fn factorial_recurrence(n in 1u32..20, k in 2u32..20) {
            let prev = q_factorial(n - 1, k).unwrap().value;
            let cur = q_factorial(n, k).unwrap().value;
            prop_assert_eq!(cur, prev * q_bracket(f64::from(n), k).unwrap());
        }
    }
}
