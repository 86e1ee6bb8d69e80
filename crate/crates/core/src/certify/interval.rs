use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::divisibility::{certify_with_size, DivisibilityCertificate};
use super::size::{size_evidence, SizeEvidence};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::ilrs::CompositionChain;
use crate::primes::{primes_up_to, theta};

/// Largest `n` tried for the size witness.
const N_STAR_SEARCH: u64 = 64;
/// The exact witness `⌈(2H+2)#^D / L⌉` is formed only below this many bits.
const PRIMORIAL_WITNESS_BITS: f64 = 4096.0;

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimorialWitness {
    /// `D·ϑ(2H+2)`, the natural log of the numerator.
    pub log_numerator: f64,
    /// Exact `⌈e^{Dϑ(2H+2)} / L⌉` when small enough to write down.
    #[serde_as(as = "Option<DisplayFromStr>")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<BigUint>,
}

/// The integers `|f(L·n + m)| + h`, `|h| ≤ H`, all have a prime factor in `P`;
/// from `n_star` on they also exceed every prime of `P`, so none is prime.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeFreeIntervalCertificate {
    /// Factors of `f(m) + h`. The offsets are symmetric, so the integers
    /// `|f(N)| + h` are, up to sign, the `f(N) + h` covered here.
    pub divisibility: DivisibilityCertificate,
    /// Sign of `f(m)`.
    #[serde_as(as = "DisplayFromStr")]
    pub sign: i8,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub primes: Vec<u64>,
    #[serde_as(as = "DisplayFromStr")]
    pub n_star: u64,
    /// `|f(L·n_star + m)|`, exactly or from below.
    pub n_star_size: SizeEvidence,
    /// `D = d_0 ⋯ d_M`.
    #[serde_as(as = "DisplayFromStr")]
    pub order_product: BigUint,
    pub primorial_witness: PrimorialWitness,
}

impl PrimeFreeIntervalCertificate {
    pub fn h_max(&self) -> u64 {
        self.divisibility.h_max
    }

    pub fn claim(&self) -> String {
        let d = &self.divisibility;
        format!(
            "for n >= {}: the integers |{}({} n + {})| + h, |h| <= {}, are all composite",
            self.n_star,
            d.chain.describe(),
            d.period,
            d.m,
            d.h_max
        )
    }
}

pub(crate) fn primorial_log(x: u64) -> Result<f64> {
    if x < 2 {
        return Ok(0.0);
    }
    theta(x as f64)
}

fn primorial_witness(h_max: u64, d: &BigUint, period: &BigUint) -> Result<PrimorialWitness> {
    let x = 2 * h_max + 2;
    let log_numerator = d.to_f64().unwrap_or(f64::INFINITY) * primorial_log(x)?;
    let value = if log_numerator / std::f64::consts::LN_2 < PRIMORIAL_WITNESS_BITS {
        let primorial: BigUint = primes_up_to(x)?.into_iter().map(BigUint::from).product();
        let exp = d.to_u32().expect("small when the bit estimate is small");
        let num = primorial.pow(exp);
        let (q, r) = num.div_rem(period);
        Some(if r.is_zero() { q } else { q + 1u32 })
    } else {
        None
    };
    Ok(PrimorialWitness {
        log_numerator,
        value,
    })
}

pub fn certify_prime_free_interval(
    chain: &CompositionChain,
    m: u64,
    ctx: &Context,
) -> Result<PrimeFreeIntervalCertificate> {
    let size = size_evidence(chain, &BigInt::from(m), ctx)?;
    let Some(value) = size.exact().cloned() else {
        return Err(Error::budget(format!(
            "f({m}) must be evaluated exactly to fix H"
        )));
    };
    let abs = value.abs();
    if abs < BigInt::from(4) {
        return Err(Error::HTooLarge(format!(
            "|f({m})| = {abs} is below 4, so H = |f(m)| - 2 < 2"
        )));
    }
    let h_max = (&abs - 2u32)
        .to_u64()
        .filter(|&h| h <= (u32::MAX as u64) / 4)
        .ok_or_else(|| Error::budget(format!("H = |f({m})| - 2 is too large to sieve")))?;
    let divisibility = certify_with_size(chain, h_max, m, size, ctx)?;

    let primes = primes_up_to(2 * h_max + 2)?;
    let mut found = divisibility.distinct_primes();
    found.sort_unstable();
    if found != primes {
        return Err(Error::Invalid(format!(
            "smallest factors {found:?} differ from the primes up to {}",
            2 * h_max + 2
        )));
    }

    let target = BigInt::from(2 * h_max + 2);
    let period = BigInt::from(divisibility.period.clone());
    let mut witness = None;
    for n in 1..=N_STAR_SEARCH {
        let idx = &period * n + m;
        match size_evidence(chain, &idx, ctx) {
            Ok(ev) if ev.abs_lower() > target => {
                witness = Some((n, ev));
                break;
            }
            Ok(_) => {}
            Err(Error::NonMonotoneEvidence(_)) | Err(Error::BudgetExceeded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let (n_star, n_star_size) = witness.ok_or_else(|| {
        Error::NonMonotoneEvidence(format!(
            "no n <= {N_STAR_SEARCH} with |f(L n + m)| certified above {target}"
        ))
    })?;
    let order_product = chain.order_product();
    let primorial_witness = primorial_witness(h_max, &order_product, &divisibility.period)?;
    Ok(PrimeFreeIntervalCertificate {
        sign: if value.is_negative() { -1 } else { 1 },
        divisibility,
        primes,
        n_star,
        n_star_size,
        order_product,
        primorial_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilrs::IlrsSpec;

    #[test]
    fn fib_fib_m5() {
        let ctx = Context::default();
        let chain = CompositionChain::new(vec![IlrsSpec::fibonacci(); 2]).unwrap();
        let c = certify_prime_free_interval(&chain, 5, &ctx).unwrap();
        assert_eq!(c.h_max(), 3);
        assert_eq!(c.primes, vec![2, 3, 5, 7]);
        assert_eq!(c.divisibility.period, BigUint::from(120u32));
        assert_eq!(c.n_star, 1);
        assert_eq!(c.order_product, BigUint::from(4u32));
        // ⌈210^4 / 120⌉
        assert_eq!(c.primorial_witness.value, Some(BigUint::from(16_206_750u64)));
    }

    #[test]
    fn fibonacci_m11() {
        let ctx = Context::default();
        let chain = CompositionChain::single(IlrsSpec::fibonacci());
        let c = certify_prime_free_interval(&chain, 11, &ctx).unwrap();
        assert_eq!(c.h_max(), 87);
        assert_eq!(c.primes, primes_up_to(176).unwrap());
        // Spot checks: 89 - 87 = 2, 89 + 0 = 89, 89 + 87 = 176 = 2^4 * 11.
        assert_eq!(c.divisibility.prime_for(-87), Some(2));
        assert_eq!(c.divisibility.prime_for(0), Some(89));
        assert_eq!(c.divisibility.prime_for(87), Some(2));
    }

    #[test]
    fn too_small() {
        let ctx = Context::default();
        let chain = CompositionChain::single(IlrsSpec::fibonacci());
        assert!(matches!(
            certify_prime_free_interval(&chain, 4, &ctx),
            Err(Error::HTooLarge(_))
        ));
    }
}
