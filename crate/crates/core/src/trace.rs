//! Minimal polynomials, trace sequences and Pisot/Salem arithmetic.
//!
//! For an algebraic integer `α` with minimal polynomial
//! `X^d − a_{d−1}X^{d−1} − ⋯ − a_0`, the trace `Tr(α^n) = Σ α_i^n` satisfies the
//! recurrence with the same coefficients. When every conjugate other than `α`
//! is small, `⌊α^N⌋` differs from the trace by a bounded integer.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::error::{Error, Result};
use crate::ilrs::{validate_ilrs, Budget, IlrsSpec, RawIlrs};
use crate::roots::{isolate_roots, RootDisk};
use crate::scalar::{Ball, BigFloat, Real};

pub const DEFAULT_PRECISION: u32 = 256;
pub const DEFAULT_TOLERANCE_BITS: u32 = 64;

/// Monic integer polynomial `X^d − a_{d−1}X^{d−1} − ⋯ − a_0`, stored as the `a_i`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMinPoly", into = "RawMinPoly")]
pub struct MinPoly {
    coeffs: Vec<BigInt>,
    irreducible: bool,
}

#[serde_as]
#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawMinPoly {
    #[serde_as(as = "Vec<DisplayFromStr>")]
    coeffs: Vec<BigInt>,
    /// Irreducibility is asserted by whoever supplied the polynomial.
    irreducible: bool,
}

impl TryFrom<RawMinPoly> for MinPoly {
    type Error = Error;
    fn try_from(raw: RawMinPoly) -> Result<Self> {
        MinPoly::new(raw.coeffs, raw.irreducible)
    }
}

impl From<MinPoly> for RawMinPoly {
    fn from(p: MinPoly) -> Self {
        RawMinPoly {
            coeffs: p.coeffs,
            irreducible: p.irreducible,
        }
    }
}

impl MinPoly {
    pub fn new(coeffs: Vec<BigInt>, irreducible: bool) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyOrder);
        }
        if coeffs[0].is_zero() {
            return Err(Error::ZeroLeadCoefficient);
        }
        Ok(MinPoly {
            coeffs,
            irreducible,
        })
    }

    /// Polynomial from `a_0, …, a_{d−1}`, not asserted irreducible.
    pub fn from_i64(a: &[i64]) -> Result<Self> {
        Self::new(a.iter().map(|&x| BigInt::from(x)).collect(), false)
    }

    pub fn golden() -> Self {
        MinPoly {
            coeffs: vec![BigInt::one(), BigInt::one()],
            irreducible: true,
        }
    }

    pub fn assert_irreducible(mut self) -> Self {
        self.irreducible = true;
        self
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn irreducible_asserted(&self) -> bool {
        self.irreducible
    }

    /// Ascending coefficients `c_0, …, c_d` of the monic polynomial.
    pub fn ascending(&self) -> Vec<BigInt> {
        let mut c: Vec<BigInt> = self.coeffs.iter().map(|a| -a).collect();
        c.push(BigInt::one());
        c
    }

    /// `c_i == c_{d−i}` for all `i` (self-reciprocal).
    pub fn is_palindromic(&self) -> bool {
        let c = self.ascending();
        c.iter().eq(c.iter().rev())
    }
}

impl fmt::Display for MinPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut out = if d == 1 { "X".to_string() } else { format!("X^{d}") };
        for (i, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_positive() { '-' } else { '+' };
            let mag = a.abs();
            let term = match i {
                0 => mag.to_string(),
                _ => {
                    let x = if i == 1 { "X".to_string() } else { format!("X^{i}") };
                    if mag.is_one() {
                        x
                    } else {
                        format!("{mag}{x}")
                    }
                }
            };
            out.push_str(&format!(" {sign} {term}"));
        }
        f.write_str(&out)
    }
}

/// Power sums `p_1, …, p_count` of the roots of `X^d − Σ a_i X^i` by Newton's
/// identities: `p_k = Σ_{i=1}^{k−1} a_{d−i} p_{k−i} + k·a_{d−k}` (terms with
/// `i > d` vanish).
pub fn newton_power_sums<T: Num + Clone + FromPrimitive>(a: &[T], count: usize) -> Vec<T> {
    let d = a.len();
    let coeff = |i: usize| -> T {
        if (1..=d).contains(&i) {
            a[d - i].clone()
        } else {
            T::zero()
        }
    };
    let mut p: Vec<T> = Vec::with_capacity(count);
    for k in 1..=count {
        let mut s = coeff(k) * T::from_usize(k).expect("index fits");
        for i in 1..k {
            s = s + coeff(i) * p[k - i - 1].clone();
        }
        p.push(s);
    }
    p
}

/// The trace sequence `R(n) = Tr(α^n)`: coefficients of the polynomial, `b = 0`,
/// initial terms from [`newton_power_sums`].
pub fn trace_ilrs(poly: &MinPoly) -> IlrsSpec {
    let d = poly.degree();
    let raw = RawIlrs {
        order: d,
        coeffs: poly.coeffs.clone(),
        inhom: BigInt::zero(),
        initial: newton_power_sums(&poly.coeffs, d),
        name: Some(format!("trace({poly})")),
    };
    validate_ilrs(raw).expect("a valid polynomial yields a valid sequence")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pisot,
    Salem,
    Neither,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Pisot => "Pisot",
            Kind::Salem => "Salem",
            Kind::Neither => "neither",
        })
    }
}

/// Position of a root's modulus relative to the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Inside,
    Unit,
    Outside,
    Ambiguous,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Kind,
    /// Decimal value of the root of largest modulus.
    pub dominant_root: String,
    /// Decimal moduli of the remaining roots.
    pub conjugate_moduli: Vec<String>,
    #[serde_as(as = "DisplayFromStr")]
    pub tolerance_bits: u32,
    #[serde_as(as = "DisplayFromStr")]
    pub precision: u32,
}

/// Isolated roots together with the classification derived from them.
#[derive(Clone, Debug)]
pub struct Classified<T> {
    pub classification: Classification,
    pub disks: Vec<RootDisk<T>>,
    pub placements: Vec<Placement>,
    /// Index of the root of largest modulus.
    pub dominant: usize,
    pub precision: u32,
}

fn place<T: Real>(disk: &RootDisk<T>, tol: &T, u: &T) -> Placement {
    let (lo, hi) = disk.modulus_bounds(u);
    let one = T::one();
    if hi < one.clone() - tol.clone() {
        Placement::Inside
    } else if lo > one.clone() + tol.clone() {
        Placement::Outside
    } else if lo > one.clone() - tol.clone() && hi < one + tol.clone() {
        Placement::Unit
    } else {
        Placement::Ambiguous
    }
}

/// Classifies `poly` using roots isolated at `prec` bits and a modulus
/// tolerance of `2^-tolerance_bits`.
pub fn classify_with<T: Real>(
    poly: &MinPoly,
    prec: u32,
    tolerance_bits: u32,
) -> Result<Classified<T>> {
    let disks: Vec<RootDisk<T>> = isolate_roots(&poly.ascending(), prec)?;
    let u = T::unit_roundoff(prec);
    let tol = T::pow2(-(tolerance_bits as i64));
    let placements: Vec<Placement> = disks.iter().map(|d| place(d, &tol, &u)).collect();
    let moduli: Vec<T> = disks.iter().map(|d| d.center.norm_sqr().sqrt()).collect();
    let dominant = (0..disks.len())
        .max_by(|&i, &j| moduli[i].partial_cmp(&moduli[j]).expect("finite moduli"))
        .expect("degree >= 1");

    let count = |p: Placement| placements.iter().filter(|&&x| x == p).count();
    let outside = count(Placement::Outside);
    let d = poly.degree();
    let misplaced = outside == 1 && {
        let z = &disks[dominant];
        placements[dominant] != Placement::Outside || !z.real || z.center.re <= T::zero()
    };
    let kind = if outside >= 2 || misplaced {
        Kind::Neither
    } else if count(Placement::Ambiguous) > 0 {
        return Err(Error::PrecisionInsufficient(format!(
            "a conjugate modulus lies within 2^-{tolerance_bits} of 1 at {prec} bits"
        )));
    } else if outside == 0 {
        Kind::Neither
    } else if count(Placement::Inside) == d - 1 {
        Kind::Pisot
    } else if d >= 4
        && d.is_multiple_of(2)
        && poly.is_palindromic()
        && count(Placement::Inside) == 1
        && count(Placement::Unit) == d - 2
    {
        Kind::Salem
    } else {
        Kind::Neither
    };

    let digits = 40;
    let show = |x: &T| to_bigfloat(x, prec);
    let classification = Classification {
        kind,
        dominant_root: if disks[dominant].real {
            show(&disks[dominant].center.re).to_decimal(digits)
        } else {
            show(&moduli[dominant]).to_decimal(digits)
        },
        conjugate_moduli: (0..disks.len())
            .filter(|&i| i != dominant)
            .map(|i| show(&moduli[i]).to_decimal(digits))
            .collect(),
        tolerance_bits,
        precision: prec,
    };
    Ok(Classified {
        classification,
        disks,
        placements,
        dominant,
        precision: prec,
    })
}

fn to_bigfloat<T: Real>(x: &T, prec: u32) -> BigFloat {
    // Truncated to 160 fractional bits, plenty for the digits displayed.
    let scaled = x.clone() * T::pow2(160);
    BigFloat::from_bigint(scaled.floor_int()).with_prec(prec.max(64)) * BigFloat::pow2(-160)
}

pub fn classify(poly: &MinPoly, prec: u32) -> Result<Classification> {
    Ok(classify_with::<BigFloat>(poly, prec, DEFAULT_TOLERANCE_BITS)?.classification)
}

/// `⌊α^N⌋` split as `trace + g`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloorPow {
    #[serde_as(as = "DisplayFromStr")]
    pub floor: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub trace: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub g: BigInt,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloorOffsetBound {
    /// `|g(N)| ≤ bound` for every exponent `N ≥ n_min`.
    #[serde_as(as = "DisplayFromStr")]
    pub bound: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub n_min: u64,
    /// Decimal value of the real bound before rounding to an integer.
    pub raw: String,
}

/// A Pisot or Salem number with its isolated conjugates.
#[derive(Clone, Debug)]
pub struct PisotSalem {
    poly: MinPoly,
    trace: IlrsSpec,
    data: Classified<BigFloat>,
}

impl PisotSalem {
    pub fn new(poly: &MinPoly, prec: u32, tolerance_bits: u32) -> Result<Self> {
        let data = classify_with::<BigFloat>(poly, prec, tolerance_bits)?;
        if data.classification.kind == Kind::Neither {
            return Err(Error::NotPisotOrSalem);
        }
        Ok(PisotSalem {
            poly: poly.clone(),
            trace: trace_ilrs(poly),
            data,
        })
    }

    pub fn classification(&self) -> &Classification {
        &self.data.classification
    }

    pub fn poly(&self) -> &MinPoly {
        &self.poly
    }

    pub fn trace(&self) -> &IlrsSpec {
        &self.trace
    }

    fn conjugates(&self) -> impl Iterator<Item = &RootDisk<BigFloat>> {
        let dom = self.data.dominant;
        self.data
            .disks
            .iter()
            .enumerate()
            .filter(move |&(i, _)| i != dom)
            .map(|(_, d)| d)
    }

    /// Exact `⌊α^N⌋ = Tr(α^N) − ⌈Σ_{i≥2} α_i^N⌉`.
    pub fn floor_pow(&self, n: u64, budget: &Budget) -> Result<FloorPow> {
        if n == 0 {
            return Err(Error::Invalid("exponent must be positive".into()));
        }
        let trace = self.trace.eval_exact(n, budget)?;
        let prec = self.data.precision;
        let u = BigFloat::unit_roundoff(prec);
        let zero = BigFloat::zero().with_prec(prec);
        let mut sum = Ball::exact(Complex::new(zero.clone(), zero));
        for disk in self.conjugates() {
            let b = Ball::new(disk.center.clone(), disk.radius.clone());
            sum = sum.add(&b.powu(n, &u), &u);
        }
        let lo = sum.center.re.clone() - sum.radius.clone();
        let hi = sum.center.re.clone() + sum.radius.clone();
        let k = lo.ceil_int();
        if hi.ceil_int() != k {
            return Err(Error::PrecisionInsufficient(format!(
                "conjugate power sum for N = {n} straddles an integer at {prec} bits"
            )));
        }
        let g = -k;
        Ok(FloorPow {
            floor: &trace + &g,
            trace,
            g,
        })
    }

    /// Integer `G` with `|g(N)| ≤ G` for `N ≥ n_min`. The real bound `B` is
    /// `(d−1)·ρ^{n_min} + 1` for Pisot (`ρ` the largest conjugate modulus) and
    /// `(d−1) + α^{−n_min} + 1` for Salem. Since `|g| < B` and `g` is an
    /// integer, `G = max(1, ⌈B⌉ − 1)`.
    pub fn offset_bound(&self, n_min: u64) -> FloorOffsetBound {
        let prec = self.data.precision;
        let u = BigFloat::unit_roundoff(prec);
        let d = self.poly.degree() as i64;
        let one = BigFloat::one().with_prec(prec);
        let up = |x: BigFloat| x * (one.clone() + BigFloat::pow2(-(prec as i64) / 2));
        let raw = match self.data.classification.kind {
            Kind::Salem => {
                let dom = &self.data.disks[self.data.dominant];
                let (alpha_lo, _) = dom.modulus_bounds(&u);
                let inv = up(one.clone() / alpha_lo);
                BigFloat::from_i64(d - 1).expect("small")
                    + up(pow_bigfloat(&inv, n_min))
                    + one.clone()
            }
            _ => {
                let rho = self
                    .conjugates()
                    .map(|c| c.modulus_bounds(&u).1)
                    .fold(BigFloat::zero(), BigFloat::max_of);
                BigFloat::from_i64(d - 1).expect("small") * up(pow_bigfloat(&rho, n_min))
                    + one.clone()
            }
        };
        let ceil = raw.ceil_int();
        let bound = (ceil - 1i32).max(BigInt::one());
        FloorOffsetBound {
            bound: u64::try_from(bound).expect("bound at most the degree"),
            n_min,
            raw: raw.to_decimal(20),
        }
    }
}

fn pow_bigfloat(x: &BigFloat, mut n: u64) -> BigFloat {
    let mut acc = BigFloat::one().with_prec(x.precision());
    let mut base = x.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc * base.clone();
        }
        n >>= 1;
        if n > 0 {
            base = base.clone() * base;
        }
    }
    acc
}

/// `⌊α^N⌋` for the dominant root of a Pisot or Salem polynomial.
pub fn floor_alpha_pow(poly: &MinPoly, n: u64, prec: u32, budget: &Budget) -> Result<FloorPow> {
    PisotSalem::new(poly, prec, DEFAULT_TOLERANCE_BITS)?.floor_pow(n, budget)
}

pub fn offset_bound(poly: &MinPoly, n_min: u64, prec: u32) -> Result<FloorOffsetBound> {
    Ok(PisotSalem::new(poly, prec, DEFAULT_TOLERANCE_BITS)?.offset_bound(n_min))
}
