//! Real scalars for the numeric layer.
//!
//! Root isolation and the ball arithmetic used for `⌊α^N⌋` are written against
//! [`Real`], which is implemented for `f64` (fast, 53-bit) and for
//! [`BigFloat`], a binary floating-point number with an arbitrary-precision
//! mantissa and an unbounded exponent.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Precision used when two exact operands are divided or a square root of an
/// exact value is taken.
const EXACT_FALLBACK_PREC: u32 = 128;

/// Operations the numeric algorithms need beyond [`num_traits::Num`].
pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Num
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
    /// `x` rounded to working precision `prec` (fixed-width types ignore it).
    fn from_int(x: &BigInt, prec: u32) -> Self;
    fn from_f64_prec(x: f64, prec: u32) -> Self;
    fn sqrt(&self) -> Self;
    /// Relative error bound of one rounded operation at precision `prec`.
    fn unit_roundoff(prec: u32) -> Self;
    /// Exact `2^k`.
    fn pow2(k: i64) -> Self;
    fn floor_int(&self) -> BigInt;
    fn to_f64_lossy(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn ceil_int(&self) -> BigInt {
        -(-self.clone()).floor_int()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Real for f64 {
    fn from_int(x: &BigInt, _prec: u32) -> Self {
        x.to_f64().unwrap_or(f64::NAN)
    }
    fn from_f64_prec(x: f64, _prec: u32) -> Self {
        x
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn unit_roundoff(_prec: u32) -> Self {
        f64::EPSILON
    }
    fn pow2(k: i64) -> Self {
        2f64.powi(k.clamp(-1100, 1100) as i32)
    }
    fn floor_int(&self) -> BigInt {
        BigInt::from_f64(self.floor()).unwrap_or_default()
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

/// `mant · 2^exp`, rounded to `prec` significant bits after every operation.
/// `prec == 0` marks an exact value (integers and dyadic constants); results
/// take the larger precision of their operands.
#[derive(Clone)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({} @{}b)", self.to_decimal(20), self.prec)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(30);
        f.write_str(&self.to_decimal(digits))
    }
}

impl BigFloat {
    pub fn from_bigint(mant: BigInt) -> Self {
        BigFloat {
            mant,
            exp: 0,
            prec: 0,
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Same value rounded to `prec` bits and tagged with that precision.
    pub fn with_prec(mut self, prec: u32) -> Self {
        self.prec = prec;
        self.round()
    }

    fn raw(mant: BigInt, exp: i64, prec: u32) -> Self {
        BigFloat { mant, exp, prec }.round()
    }

    fn round(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        if self.prec > 0 {
            let bits = self.mant.bits();
            if bits > self.prec as u64 {
                let shift = bits - self.prec as u64;
                let half = BigInt::one() << (shift - 1);
                self.mant = (self.mant + half).div_floor(&(BigInt::one() << shift));
                self.exp += shift as i64;
            }
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    /// `floor(log2 |x|) + 1`; zero maps to `i64::MIN`.
    fn top(&self) -> i64 {
        if self.mant.is_zero() {
            i64::MIN
        } else {
            self.mant.bits() as i64 + self.exp
        }
    }

    fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.mant.is_zero(), other.mant.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (ta, tb) = (self.top(), other.top());
        if ta != tb {
            return ta.cmp(&tb);
        }
        let e = self.exp.min(other.exp);
        let a = self.mant.abs() << (self.exp - e) as usize;
        let b = other.mant.abs() << (other.exp - e) as usize;
        a.cmp(&b)
    }

    /// Decimal rendering with `digits` digits after the point (truncated).
    pub fn to_decimal(&self, digits: usize) -> String {
        let scaled = if self.exp >= 0 {
            (&self.mant << self.exp as usize) * num_traits::pow(BigInt::from(10), digits)
        } else {
            let num = &self.mant * num_traits::pow(BigInt::from(10), digits);
            let den = BigInt::one() << (-self.exp) as usize;
            let (q, _) = num.abs().div_rem(&den);
            if self.mant.is_negative() {
                -q
            } else {
                q
            }
        };
        let neg = scaled.is_negative();
        let s = scaled.abs().to_string();
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    fn div_at(&self, other: &Self, prec: u32) -> Self {
        assert!(!other.mant.is_zero(), "BigFloat division by zero");
        if self.mant.is_zero() {
            return BigFloat::zero();
        }
        let want = prec as i64 + 2;
        let k = (want + other.mant.bits() as i64 - self.mant.bits() as i64).max(0);
        let q = (&self.mant << k as usize) / &other.mant;
        BigFloat::raw(q, self.exp - k - other.exp, prec)
    }

    pub fn trunc(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else if self.top() <= 0 {
            BigInt::zero()
        } else {
            let den = BigInt::one() << (-self.exp) as usize;
            let (q, _) = self.mant.abs().div_rem(&den);
            if self.mant.is_negative() {
                -q
            } else {
                q
            }
        }
    }
}

fn combined(a: u32, b: u32) -> u32 {
    a.max(b)
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        let rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        Some(match rank(sa).cmp(&rank(sb)) {
            Ordering::Equal => match sa {
                Sign::NoSign => Ordering::Equal,
                Sign::Plus => self.cmp_abs(other),
                Sign::Minus => other.cmp_abs(self),
            },
            o => o,
        })
    }
}

impl Zero for BigFloat {
    fn zero() -> Self {
        BigFloat::from_bigint(BigInt::zero())
    }
    fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }
}

impl One for BigFloat {
    fn one() -> Self {
        BigFloat::from_bigint(BigInt::one())
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(mut self) -> Self {
        self.mant = -self.mant;
        self
    }
}

impl Add for BigFloat {
    type Output = BigFloat;
    fn add(self, other: Self) -> Self {
        let prec = combined(self.prec, other.prec);
        if self.mant.is_zero() {
            return other.with_prec(prec);
        }
        if other.mant.is_zero() {
            return self.with_prec(prec);
        }
        if prec > 0 {
            // An operand entirely below the rounding unit of the other does
            // not change the rounded result.
            let gap = self.top() - other.top();
            if gap > prec as i64 + 2 {
                return self.with_prec(prec);
            }
            if -gap > prec as i64 + 2 {
                return other.with_prec(prec);
            }
        }
        let e = self.exp.min(other.exp);
        let a = self.mant << (self.exp - e) as usize;
        let b = other.mant << (other.exp - e) as usize;
        BigFloat::raw(a + b, e, prec)
    }
}

impl Sub for BigFloat {
    type Output = BigFloat;
    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl Mul for BigFloat {
    type Output = BigFloat;
    fn mul(self, other: Self) -> Self {
        let prec = combined(self.prec, other.prec);
        BigFloat::raw(self.mant * other.mant, self.exp + other.exp, prec)
    }
}

impl Div for BigFloat {
    type Output = BigFloat;
    fn div(self, other: Self) -> Self {
        let prec = match combined(self.prec, other.prec) {
            0 => EXACT_FALLBACK_PREC,
            p => p,
        };
        self.div_at(&other, prec)
    }
}

impl Rem for BigFloat {
    type Output = BigFloat;
    fn rem(self, other: Self) -> Self {
        let q = BigFloat::from_bigint((self.clone() / other.clone()).trunc());
        self - other * q
    }
}

impl Num for BigFloat {
    type FromStrRadixErr = String;

    /// Decimal literals only: `-12`, `3.25`, `1e-5`.
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("radix {radix} not supported"));
        }
        let (body, exp10) = match s.split_once(['e', 'E']) {
            Some((b, e)) => (b, e.parse::<i64>().map_err(|e| e.to_string())?),
            None => (s, 0),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        let digits: BigInt = format!("{int}{frac}")
            .parse()
            .map_err(|e: num_bigint::ParseBigIntError| e.to_string())?;
        let scale = exp10 - frac.len() as i64;
        let ten = BigFloat::from_bigint(BigInt::from(10));
        let mut v = BigFloat::from_bigint(digits);
        if scale >= 0 {
            v = v * BigFloat::from_bigint(num_traits::pow(BigInt::from(10), scale as usize));
        } else {
            let den = num_traits::pow(ten.mant.clone(), (-scale) as usize);
            v = v.div_at(&BigFloat::from_bigint(den), EXACT_FALLBACK_PREC);
        }
        Ok(v)
    }
}

impl FromPrimitive for BigFloat {
    fn from_i64(n: i64) -> Option<Self> {
        Some(BigFloat::from_bigint(BigInt::from(n)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(BigFloat::from_bigint(BigInt::from(n)))
    }
    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(BigFloat::zero());
        }
        let (m, e, sign) = num_traits::Float::integer_decode(x);
        let mant = BigInt::from(m) * BigInt::from(sign);
        Some(BigFloat::raw(mant, e as i64, 53))
    }
}

impl ToPrimitive for BigFloat {
    fn to_i64(&self) -> Option<i64> {
        self.floor_int().to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        self.floor_int().to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.to_f64_lossy())
    }
}

impl Real for BigFloat {
    fn from_int(x: &BigInt, prec: u32) -> Self {
        BigFloat::from_bigint(x.clone()).with_prec(prec)
    }

    fn from_f64_prec(x: f64, prec: u32) -> Self {
        BigFloat::from_f64(x)
            .unwrap_or_else(BigFloat::zero)
            .with_prec(prec)
    }

    fn sqrt(&self) -> Self {
        assert!(!self.mant.is_negative(), "square root of a negative BigFloat");
        if self.mant.is_zero() {
            return BigFloat::zero();
        }
        let prec = if self.prec == 0 {
            EXACT_FALLBACK_PREC
        } else {
            self.prec
        };
        let mut shift = (2 * prec as i64 + 4 - self.mant.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let r = (&self.mant << shift as usize).sqrt();
        BigFloat::raw(r, (self.exp - shift) / 2, prec)
    }

    fn unit_roundoff(prec: u32) -> Self {
        BigFloat::pow2(1 - prec.max(1) as i64)
    }

    fn pow2(k: i64) -> Self {
        BigFloat {
            mant: BigInt::one(),
            exp: k,
            prec: 0,
        }
    }

    fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else if self.top() <= 0 {
            if self.mant.is_negative() {
                -BigInt::one()
            } else {
                BigInt::zero()
            }
        } else {
            self.mant.div_floor(&(BigInt::one() << (-self.exp) as usize))
        }
    }

    fn to_f64_lossy(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let drop = (bits - 60).max(0);
        let m = (&self.mant >> drop as usize).to_f64().expect("60-bit value");
        let e = self.exp + drop;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2000 {
            return 0.0;
        }
        // Split the scaling so neither factor overflows on its own.
        let half = e / 2;
        m * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
    }
}

/// A complex disk `{ z : |z - center| <= radius }` carried through arithmetic
/// with a rigorous (if pessimistic) radius.
#[derive(Clone, Debug)]
pub struct Ball<T> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Real> Ball<T> {
    pub fn new(center: Complex<T>, radius: T) -> Self {
        Ball { center, radius }
    }

    pub fn exact(center: Complex<T>) -> Self {
        Ball {
            center,
            radius: T::zero(),
        }
    }

    /// Upper bound on `|z|` for a computed `z`.
    pub fn abs_upper(z: &Complex<T>, u: &T) -> T {
        z.norm_sqr().sqrt() * (T::one() + T::from_u8(4).expect("small") * u.clone())
    }

    /// Upper bound on `|z|` over the whole disk.
    pub fn magnitude_upper(&self, u: &T) -> T {
        Self::abs_upper(&self.center, u) + self.radius.clone()
    }

    pub fn add(&self, other: &Self, u: &T) -> Self {
        let center = self.center.clone() + other.center.clone();
        let round = Self::abs_upper(&center, u) * T::from_u8(2).expect("small") * u.clone();
        let radius = (self.radius.clone() + other.radius.clone() + round) * inflate(u);
        Ball { center, radius }
    }

    pub fn mul(&self, other: &Self, u: &T) -> Self {
        let a = Self::abs_upper(&self.center, u);
        let b = Self::abs_upper(&other.center, u);
        let center = self.center.clone() * other.center.clone();
        let round = a.clone() * b.clone() * T::from_u8(8).expect("small") * u.clone();
        let radius = (a * other.radius.clone()
            + b * self.radius.clone()
            + self.radius.clone() * other.radius.clone()
            + round)
            * inflate(u);
        Ball { center, radius }
    }

    /// `self^n` by repeated squaring.
    pub fn powu(&self, mut n: u64, u: &T) -> Self {
        let mut acc = Ball::exact(Complex::new(T::one(), T::zero()));
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base, u);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base, u);
            }
        }
        acc
    }
}

fn inflate<T: Real>(u: &T) -> T {
    T::one() + T::from_u8(16).expect("small") * u.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(x: f64) -> BigFloat {
        BigFloat::from_f64_prec(x, 200)
    }

    #[test]
    fn arithmetic_matches_f64() {
        let (a, b) = (1.75f64, -0.3125f64);
        assert_eq!((bf(a) + bf(b)).to_f64_lossy(), a + b);
        assert_eq!((bf(a) - bf(b)).to_f64_lossy(), a - b);
        assert_eq!((bf(a) * bf(b)).to_f64_lossy(), a * b);
        assert_eq!((bf(a) / bf(b)).to_f64_lossy(), a / b);
        assert!(bf(a) > bf(b));
        assert!(bf(b) < BigFloat::zero());
        assert_eq!(bf(0.5), BigFloat::pow2(-1));
    }

    #[test]
    fn sqrt_two_digits() {
        let two = BigFloat::from_int(&BigInt::from(2), 256);
        let r = two.clone().sqrt();
        assert!(r.to_decimal(40).starts_with("1.4142135623730950488016887242096980785696"));
        let err = (r.clone() * r - two).abs();
        assert!(err < BigFloat::pow2(-250));
    }

    #[test]
    fn tiny_and_huge_exponents() {
        let x = bf(0.618);
        let mut p = BigFloat::one();
        for _ in 0..5000 {
            p = p * x.clone();
        }
        assert!(p > BigFloat::zero());
        assert!(p < BigFloat::pow2(-3000));
        assert_eq!(p.floor_int(), BigInt::zero());
        assert_eq!((-p.clone()).floor_int(), BigInt::from(-1));
        assert_eq!((-p).ceil_int(), BigInt::zero());
        // Adding something far below the rounding unit leaves the value alone.
        let one = BigFloat::one().with_prec(64);
        assert_eq!(one.clone() + BigFloat::pow2(-500), one);
    }

    #[test]
    fn floor_and_decimal() {
        assert_eq!(bf(-2.5).floor_int(), BigInt::from(-3));
        assert_eq!(bf(2.5).floor_int(), BigInt::from(2));
        assert_eq!(bf(2.5).ceil_int(), BigInt::from(3));
        assert_eq!(bf(-0.25).to_decimal(3), "-0.250");
        assert_eq!(bf(6.5).to_decimal(0), "6");
        let p: BigFloat = Num::from_str_radix("3.25e1", 10).unwrap();
        assert_eq!(p.to_f64_lossy(), 32.5);
    }

    #[test]
    fn rem_is_truncating() {
        let r = bf(7.5) % bf(2.0);
        assert_eq!(r.to_f64_lossy(), 1.5);
        let r = bf(-7.5) % bf(2.0);
        assert_eq!(r.to_f64_lossy(), -1.5);
    }

    #[test]
    fn ball_power_contains_truth() {
        // (0.6 ± 2^-100)^50 must contain 0.6^50 computed at higher precision.
        let u = BigFloat::unit_roundoff(128);
        let c = BigFloat::from_f64_prec(0.6, 128);
        let ball = Ball::new(Complex::new(c.clone(), BigFloat::zero()), BigFloat::pow2(-100));
        let p = ball.powu(50, &u);
        let mut truth = BigFloat::one().with_prec(400);
        let c400 = c.with_prec(400);
        for _ in 0..50 {
            truth = truth * c400.clone();
        }
        let diff = (p.center.re - truth).abs();
        assert!(diff <= p.radius);

        let fb = Ball::new(Complex::new(0.6f64, 0.0), 0.0);
        let fp = fb.powu(50, &f64::EPSILON);
        assert!((fp.center.re - 0.6f64.powi(50)).abs() <= fp.radius.max(1e-30));
    }
}
