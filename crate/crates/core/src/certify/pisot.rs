use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::divisibility::{certify_divisibility, DivisibilityCertificate};
use super::size::{size_evidence, INDEX_CAP};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::ilrs::CompositionChain;
use crate::tower::find_tower_start;
use crate::trace::{Classification, FloorOffsetBound, MinPoly, PisotSalem};

/// Exact compositeness of `⌊α^{U(m)}⌋ + h` at `n = 0`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloorCheck {
    #[serde_as(as = "DisplayFromStr")]
    pub h: i64,
    #[serde_as(as = "DisplayFromStr")]
    pub value: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub prime: u64,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthEvidence {
    /// Lower bound for `U(L + m)`.
    #[serde_as(as = "DisplayFromStr")]
    pub exponent_lower: BigInt,
    /// `⌊α^e⌋` for `e = min(exponent_lower, cap)`.
    #[serde_as(as = "DisplayFromStr")]
    pub floor_lower: BigInt,
    /// Window evidence that `U` increases from this index on.
    #[serde_as(as = "DisplayFromStr")]
    pub inner_increasing_from: u64,
    /// Largest prime used by the embedded certificate.
    #[serde_as(as = "DisplayFromStr")]
    pub max_prime: u64,
}

/// `⌊α^{U(L·n + m)}⌋ + h` is composite for `|h| ≤ H'` and `n ≥ composite_from`.
///
/// With `g(N) = ⌊α^N⌋ − Tr(α^N)` and `|g| ≤ G`, the number equals
/// `Tr(α^N) + (g + h)` with `|g + h| ≤ H = H' + G`, so the embedded
/// certificate for the chain `[trace, U…]` supplies a prime factor.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PisotFloorCertificate {
    pub poly: MinPoly,
    pub classification: Classification,
    pub inner: CompositionChain,
    pub offset: FloorOffsetBound,
    #[serde_as(as = "DisplayFromStr")]
    pub h_user: u64,
    pub divisibility: DivisibilityCertificate,
    pub at_start: Vec<FloorCheck>,
    pub growth: GrowthEvidence,
    /// 0 when the `n = 0` values are composite as well, otherwise 1.
    #[serde_as(as = "DisplayFromStr")]
    pub composite_from: u64,
}

impl PisotFloorCertificate {
    pub fn claim(&self) -> String {
        format!(
            "for n >= {} and |h| <= {}: floor(alpha^{}({} n + {})) + h is composite, alpha the dominant root of {}",
            self.composite_from,
            self.h_user,
            self.inner.describe(),
            self.divisibility.period,
            self.divisibility.m,
            self.poly
        )
    }
}

pub fn certify_pisot_floor(
    poly: &MinPoly,
    inner: &CompositionChain,
    h_user: u64,
    m: u64,
    ctx: &Context,
) -> Result<PisotFloorCertificate> {
    let cfg = &ctx.config;
    let ps = PisotSalem::new(poly, cfg.precision, cfg.tolerance_bits)?;
    let mut levels = vec![ps.trace().clone()];
    levels.extend(inner.levels().iter().cloned());
    let chain = CompositionChain::new(levels)?;

    let n_min = inner
        .eval_exact_u64(m, &cfg.budget)?
        .to_u64()
        .filter(|&v| v >= 1)
        .ok_or_else(|| Error::Invalid(format!("U({m}) must be a positive machine integer")))?;
    let offset = ps.offset_bound(n_min);
    let h_max = h_user + offset.bound;
    let divisibility = certify_divisibility(&chain, h_max, m, ctx)?;
    let max_prime = divisibility.distinct_primes().into_iter().max().unwrap_or(2);
    let h = h_user as i64;

    // n = 0: exact floor, exact divisibility.
    let floor0 = ps.floor_pow(n_min, &cfg.budget)?;
    let mut at_start = Vec::new();
    let mut start_ok = true;
    for hh in -h..=h {
        let value = &floor0.floor + hh;
        let shift = (&floor0.g + hh).to_i64().expect("bounded by H");
        let prime = divisibility.prime_for(shift).ok_or_else(|| {
            Error::Invalid(format!("offset g + h = {shift} outside the certified range"))
        })?;
        if !(&value % prime).is_zero() {
            return Err(Error::Invalid(format!(
                "{prime} does not divide floor(alpha^{n_min}) + {hh} = {value}"
            )));
        }
        start_ok &= value.abs() > BigInt::from(prime);
        at_start.push(FloorCheck { h: hh, value, prime });
    }

    // n ≥ 1: U(L n + m) ≥ U(L + m) ≥ e, and ⌊α^e⌋ − H' must exceed every prime.
    let first = BigInt::from(divisibility.period.clone()) + m;
    let mono = find_tower_start(inner, 1, ctx)?;
    if BigInt::from(mono.increasing_from) > first {
        return Err(Error::NonMonotoneEvidence(format!(
            "{} is only known to increase from {}",
            inner.describe(),
            mono.increasing_from
        )));
    }
    let exponent_lower = size_evidence(inner, &first, ctx)?.abs_lower();
    let e = exponent_lower.to_u64().map_or(INDEX_CAP, |x| x.min(INDEX_CAP));
    let floor_lower = ps.floor_pow(e, &cfg.evidence_budget())?.floor;
    if floor_lower.clone() - h_user <= BigInt::from(max_prime) {
        return Err(Error::NonMonotoneEvidence(format!(
            "floor(alpha^{e}) - {h_user} = {} does not exceed the prime {max_prime}",
            floor_lower.clone() - h_user
        )));
    }
    Ok(PisotFloorCertificate {
        poly: poly.clone(),
        classification: ps.classification().clone(),
        inner: inner.clone(),
        offset,
        h_user,
        divisibility,
        at_start,
        growth: GrowthEvidence {
            exponent_lower,
            floor_lower,
            inner_increasing_from: mono.increasing_from,
            max_prime,
        },
        composite_from: u64::from(!start_ok),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilrs::IlrsSpec;
    use crate::trace::Kind;

    fn fib() -> CompositionChain {
        CompositionChain::single(IlrsSpec::fibonacci())
    }

    #[test]
    fn golden_over_fibonacci() {
        let ctx = Context::default();
        let c = certify_pisot_floor(&MinPoly::golden(), &fib(), 0, 4, &ctx).unwrap();
        assert_eq!(c.classification.kind, Kind::Pisot);
        assert_eq!(c.offset.bound, 1);
        assert_eq!(c.divisibility.h_max, 1);
        assert_eq!(c.divisibility.chain.levels()[0].initial(), &[1.into(), 3.into()]);
        // ⌊φ^3⌋ = 4, divisible by p_0 = 2.
        assert_eq!(c.at_start[0].value, BigInt::from(4));
        assert_eq!(c.at_start[0].prime, 2);
        assert_eq!(c.composite_from, 0);
    }

    #[test]
    fn powers_of_two() {
        let ctx = Context::default();
        let two = MinPoly::from_i64(&[2]).unwrap();
        let c = certify_pisot_floor(&two, &fib(), 1, 5, &ctx).unwrap();
        assert_eq!(c.offset.bound, 1);
        // 2^F(5) = 32; 31 is prime, so n = 0 is not covered.
        assert_eq!(c.at_start.iter().map(|x| x.value.clone()).collect::<Vec<_>>(), [31, 32, 33].map(BigInt::from));
        assert_eq!(c.composite_from, 1);
    }

    #[test]
    fn rejects_non_pisot() {
        let ctx = Context::default();
        let p = MinPoly::from_i64(&[4, 0]).unwrap();
        assert!(matches!(
            certify_pisot_floor(&p, &fib(), 0, 4, &ctx),
            Err(Error::NotPisotOrSalem)
        ));
    }
}
