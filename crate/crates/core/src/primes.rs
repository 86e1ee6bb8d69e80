//! Sieves, deterministic primality and the Chebyshev function.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest argument accepted by [`theta`] and the sieves.
pub const SIEVE_CAP: u64 = 1 << 32;

/// Witnesses 2..=41 (the first 13 primes) decide primality for every
/// `n < 3.317·10^24`.
pub const MR_WITNESSES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// `3317044064679887385961981`: the smallest strong pseudoprime to all of
/// [`MR_WITNESSES`].
pub fn mr_limit() -> BigUint {
    "3317044064679887385961981".parse().expect("literal")
}

fn check_cap(x: u64) -> Result<()> {
    if x > SIEVE_CAP {
        return Err(Error::budget(format!("sieve bound {x} exceeds {SIEVE_CAP}")));
    }
    Ok(())
}

/// All primes `≤ x`.
pub fn primes_up_to(x: u64) -> Result<Vec<u64>> {
    check_cap(x)?;
    if x < 2 {
        return Ok(Vec::new());
    }
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        out.push(p as u64);
        let mut k = p * p;
        while k <= n {
            composite[k] = true;
            k += p;
        }
    }
    Ok(out)
}

/// Smallest prime factor of every `k ≤ x` (entries 0 and 1 are 0).
pub fn spf_table(x: u64) -> Result<Vec<u32>> {
    check_cap(x)?;
    let n = x as usize;
    let mut spf = vec![0u32; n + 1];
    for p in 2..=n {
        if spf[p] != 0 {
            continue;
        }
        let mut k = p;
        while k <= n {
            if spf[k] == 0 {
                spf[k] = p as u32;
            }
            k += p;
        }
    }
    Ok(spf)
}

fn mod_pow(base: &BigUint, exp: &BigUint, m: &BigUint) -> BigUint {
    base.modpow(exp, m)
}

/// Deterministic strong-probable-prime test over [`MR_WITNESSES`]. Exact
/// below [`mr_limit`]; above it a `true` is probable only.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &w in &MR_WITNESSES {
        let w = BigUint::from(w);
        if *n == w {
            return true;
        }
        if (n % &w).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let r = n1.trailing_zeros().expect("n > 1");
    let d = &n1 >> r;
    'witness: for &w in &MR_WITNESSES {
        let mut x = mod_pow(&BigUint::from(w), &d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..r {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(&BigUint::from(n))
}

/// Primality by trial division; slow, used as an independent cross-check.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Smallest prime factor of `n ≥ 2` among primes `≤ bound`, by trial division.
pub fn smallest_factor_up_to(n: &BigUint, bound: u64) -> Option<u64> {
    let root = n.sqrt().to_u64().unwrap_or(u64::MAX);
    let limit = root.min(bound);
    let mut k = 2u64;
    while k <= limit {
        if (n % k).is_zero() {
            return Some(k);
        }
        k += if k == 2 { 1 } else { 2 };
    }
    // No factor up to sqrt(n): n is prime and its own smallest factor.
    match n.to_u64() {
        Some(v) if root <= bound && v <= bound && v >= 2 => Some(v),
        _ => None,
    }
}

/// Chebyshev's `ϑ(X) = Σ_{p ≤ X} ln p`, compensated summation over a sieve.
pub fn theta(x: f64) -> Result<f64> {
    if x.is_nan() || x < 2.0 {
        return Err(Error::Invalid(format!("theta needs X >= 2, got {x}")));
    }
    if x > SIEVE_CAP as f64 {
        return Err(Error::budget(format!("theta argument {x} exceeds {SIEVE_CAP}")));
    }
    let primes = primes_up_to(x.floor() as u64)?;
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for p in primes {
        let y = (p as f64).ln() - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}
