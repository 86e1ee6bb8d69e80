use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::ilrs::CompositionChain;
use crate::primes::{primes_up_to, smallest_factor_up_to};
use crate::tower::eval_chain_mod;

/// How the smallest prime factor was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    /// Trial division of the exact value, confirmed through the tower.
    Exact,
    /// Scan of primes in increasing order through the tower.
    Modular,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorFound {
    pub prime: u64,
    pub method: FactorMethod,
    /// `f(m) + h` is itself this prime.
    pub value_is_prime: bool,
}

/// `(f(m) + h) mod p` through the tower.
fn shifted_residue(chain: &CompositionChain, m: u64, h: i64, p: u64, ctx: &Context) -> Result<u64> {
    let r = eval_chain_mod(chain, &BigUint::from(m), p, None, ctx)?;
    Ok((r as i128 + h as i128).rem_euclid(p as i128) as u64)
}

/// Smallest prime `p ≤ bound` dividing `f(m) + h`.
///
/// `exact` is `f(m)` when known. Then trial division finds the factor and the
/// tower must agree that it divides; otherwise primes are scanned in order
/// through the tower. The value must satisfy `|f(m) + h| ≥ 2` when known.
pub fn smallest_prime_factor_chain(
    chain: &CompositionChain,
    m: u64,
    h: i64,
    bound: u64,
    exact: Option<&BigInt>,
    ctx: &Context,
) -> Result<FactorFound> {
    let what = format!("{}({m}) + ({h})", chain.describe());
    if let Some(value) = exact {
        let shifted: BigInt = value + h;
        let mag = shifted.abs().to_biguint().expect("absolute value");
        if mag < BigUint::from(2u32) {
            return Err(Error::Invalid(format!("{what} = {shifted} has no prime factor")));
        }
        let p = smallest_factor_up_to(&mag, bound).ok_or(Error::NoFactorFound {
            bound,
            what: what.clone(),
        })?;
        if shifted_residue(chain, m, h, p, ctx)? != 0 {
            return Err(Error::Invalid(format!(
                "modular evaluation disagrees with the exact value of {what} at p = {p}"
            )));
        }
        return Ok(FactorFound {
            prime: p,
            method: FactorMethod::Exact,
            value_is_prime: mag.to_u64() == Some(p),
        });
    }
    // Chunked so small factors are found without sieving to the full bound.
    let mut lo = 0u64;
    let mut hi = 1024u64.min(bound);
    loop {
        for p in primes_up_to(hi)?.into_iter().filter(|&p| p > lo) {
            if shifted_residue(chain, m, h, p, ctx)? == 0 {
                return Ok(FactorFound {
                    prime: p,
                    method: FactorMethod::Modular,
                    value_is_prime: false,
                });
            }
        }
        if hi >= bound {
            return Err(Error::NoFactorFound { bound, what });
        }
        lo = hi;
        hi = hi.saturating_mul(8).min(bound);
    }
}
