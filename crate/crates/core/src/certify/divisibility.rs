use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::size::{size_evidence, SizeEvidence};
use super::spf::{smallest_prime_factor_chain, FactorMethod};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::ilrs::CompositionChain;
use crate::tower::{chain_period, TowerReduction};

/// How the per-prime periods are combined into `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodCombine {
    Lcm,
    Product,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEntry {
    #[serde_as(as = "DisplayFromStr")]
    pub h: i64,
    #[serde_as(as = "DisplayFromStr")]
    pub prime: u64,
    pub method: FactorMethod,
    pub value_is_prime: bool,
}

/// Where `m` comes from: every tower start and the size condition.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartEvidenceSummary {
    /// Largest tower start over all primes.
    #[serde_as(as = "DisplayFromStr")]
    pub tower_start: u64,
    /// `|f(m)|`, exactly or from below.
    pub size: SizeEvidence,
}

/// `p_h | f(L·n + m) + h` for every `|h| ≤ H` and `n ≥ 0`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilityCertificate {
    pub chain: CompositionChain,
    #[serde_as(as = "DisplayFromStr")]
    pub h_max: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub m: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub factor_bound: u64,
    pub entries: Vec<FactorEntry>,
    /// One tower per distinct prime, ascending.
    pub towers: Vec<TowerReduction>,
    #[serde_as(as = "DisplayFromStr")]
    pub period: BigUint,
    pub combine: PeriodCombine,
    pub start: StartEvidenceSummary,
}

impl DivisibilityCertificate {
    pub fn prime_for(&self, h: i64) -> Option<u64> {
        self.entries.iter().find(|e| e.h == h).map(|e| e.prime)
    }

    pub fn tower_for(&self, p: u64) -> Option<&TowerReduction> {
        self.towers.iter().find(|t| t.q == p)
    }

    pub fn distinct_primes(&self) -> Vec<u64> {
        self.towers.iter().map(|t| t.q).collect()
    }

    pub fn claim(&self) -> String {
        format!(
            "for every n >= 0 and |h| <= {}: p_h divides {}({} n + {}) + h",
            self.h_max,
            self.chain.describe(),
            self.period,
            self.m
        )
    }
}

pub(crate) fn combine_periods(periods: &[u64], combine: PeriodCombine) -> BigUint {
    periods.iter().fold(BigUint::one(), |acc, &l| {
        let l = BigUint::from(l);
        match combine {
            PeriodCombine::Lcm => acc.lcm(&l),
            PeriodCombine::Product => acc * l,
        }
    })
}

/// Builds towers for the given primes in parallel, ascending by prime.
pub(crate) fn towers_for(
    chain: &CompositionChain,
    primes: &[u64],
    m: u64,
    ctx: &Context,
) -> Result<Vec<TowerReduction>> {
    let towers: Vec<TowerReduction> = primes
        .par_iter()
        .map(|&p| chain_period(chain, p, ctx))
        .collect::<Result<_>>()?;
    if let Some(t) = towers.iter().find(|t| t.m > m) {
        return Err(Error::IndexBelowTowerStart {
            n: m.to_string(),
            m: t.m,
        });
    }
    Ok(towers)
}

pub fn certify_divisibility(
    chain: &CompositionChain,
    h_max: u64,
    m: u64,
    ctx: &Context,
) -> Result<DivisibilityCertificate> {
    let size = size_evidence(chain, &BigInt::from(m), ctx)?;
    certify_with_size(chain, h_max, m, size, ctx)
}

pub(crate) fn certify_with_size(
    chain: &CompositionChain,
    h_max: u64,
    m: u64,
    size: SizeEvidence,
    ctx: &Context,
) -> Result<DivisibilityCertificate> {
    if m == 0 {
        return Err(Error::Invalid("m must be at least 1".into()));
    }
    let h = i64::try_from(h_max).map_err(|_| Error::HTooLarge(format!("H = {h_max}")))?;
    if size.abs_lower() < BigInt::from(h_max) + 2u32 {
        return Err(Error::HTooLarge(format!(
            "|f({m})| >= {} does not exceed H + 1 = {}",
            size.abs_lower(),
            h_max + 1
        )));
    }
    let bound = ctx.config.factor_bound;
    let exact = size.exact().cloned();
    let entries: Vec<FactorEntry> = (-h..=h)
        .into_par_iter()
        .map(|h| {
            let found = smallest_prime_factor_chain(chain, m, h, bound, exact.as_ref(), ctx)?;
            Ok(FactorEntry {
                h,
                prime: found.prime,
                method: found.method,
                value_is_prime: found.value_is_prime,
            })
        })
        .collect::<Result<_>>()?;

    let distinct: Vec<u64> = entries
        .iter()
        .map(|e| (e.prime, ()))
        .collect::<BTreeMap<_, _>>()
        .into_keys()
        .collect();
    let towers = towers_for(chain, &distinct, m, ctx)?;
    let combine = if ctx.config.strict_paper {
        PeriodCombine::Product
    } else {
        PeriodCombine::Lcm
    };
    let periods: Vec<u64> = towers.iter().map(|t| t.period).collect();
    let tower_start = towers.iter().map(|t| t.m).max().unwrap_or(1);
    Ok(DivisibilityCertificate {
        chain: chain.clone(),
        h_max,
        m,
        factor_bound: bound,
        entries,
        period: combine_periods(&periods, combine),
        combine,
        towers,
        start: StartEvidenceSummary { tower_start, size },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Config;
    use crate::ilrs::IlrsSpec;

    fn f() -> IlrsSpec {
        IlrsSpec::fibonacci()
    }

    #[test]
    fn fibonacci_h0_m12() {
        let ctx = Context::default();
        let c = certify_divisibility(&CompositionChain::single(f()), 0, 12, &ctx).unwrap();
        assert_eq!(c.prime_for(0), Some(2));
        assert_eq!(c.period, BigUint::from(3u32));
        assert_eq!(c.start.size.exact(), Some(&BigInt::from(144)));
    }

    #[test]
    fn fib_fib_h1_m5() {
        let ctx = Context::default();
        let chain = CompositionChain::new(vec![f(), f()]).unwrap();
        let c = certify_divisibility(&chain, 1, 5, &ctx).unwrap();
        assert_eq!(
            [c.prime_for(-1), c.prime_for(0), c.prime_for(1)],
            [Some(2), Some(5), Some(2)]
        );
        // Towers mod 2 and mod 5 have periods 8 and 60.
        assert_eq!(c.distinct_primes(), vec![2, 5]);
        assert_eq!(c.period, BigUint::from(120u32));
    }

    #[test]
    fn lucas_trace_over_fibonacci() {
        let ctx = Context::default();
        let chain = CompositionChain::new(vec![IlrsSpec::lucas(), f()]).unwrap();
        let c = certify_divisibility(&chain, 1, 4, &ctx).unwrap();
        assert_eq!(
            [c.prime_for(-1), c.prime_for(0), c.prime_for(1)],
            [Some(3), Some(2), Some(5)]
        );
        for t in &c.towers {
            assert!(c.period.is_multiple_of(&BigUint::from(t.period)));
        }
    }

    #[test]
    fn product_mode() {
        let ctx = Context::new(Config {
            strict_paper: true,
            ..Config::default()
        });
        let chain = CompositionChain::new(vec![f(), f()]).unwrap();
        let c = certify_divisibility(&chain, 1, 5, &ctx).unwrap();
        assert_eq!(c.combine, PeriodCombine::Product);
        assert_eq!(c.period, BigUint::from(8u32 * 60));
    }

    #[test]
    fn size_condition() {
        let ctx = Context::default();
        let chain = CompositionChain::single(f());
        // F(4) = 3: 3 - 1 = 2 is fine for H = 1, not for H = 2.
        assert!(certify_divisibility(&chain, 1, 4, &ctx).is_ok());
        assert!(matches!(
            certify_divisibility(&chain, 2, 4, &ctx),
            Err(Error::HTooLarge(_))
        ));
    }
}
