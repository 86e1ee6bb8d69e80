//! Exact values or lower bounds for `|f(N)|`.
//!
//! Exact evaluation is tried level by level from the inside out. Once an
//! argument is beyond the exact budget, a level `R` is bounded below by
//! `R(k)` with `k = min(argument, INDEX_CAP)`, which is sound provided `R` is
//! increasing from `k` on. That monotonicity is window evidence: the terms
//! `R(1..=window)` are inspected and must end in a strictly increasing,
//! positive run that starts no later than `k`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::ilrs::{CompositionChain, IlrsSpec};

/// Largest index at which a level is evaluated for a lower bound.
pub const INDEX_CAP: u64 = 2048;

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SizeEvidence {
    Exact {
        #[serde_as(as = "DisplayFromStr")]
        value: BigInt,
    },
    /// `|f(N)| >= bound`; `bounded_levels` lists the levels evaluated at a
    /// capped index under the monotonicity evidence.
    LowerBound {
        #[serde_as(as = "DisplayFromStr")]
        bound: BigInt,
        #[serde_as(as = "Vec<DisplayFromStr>")]
        bounded_levels: Vec<usize>,
    },
}

impl SizeEvidence {
    pub fn abs_lower(&self) -> BigInt {
        match self {
            SizeEvidence::Exact { value } => value.abs(),
            SizeEvidence::LowerBound { bound, .. } => bound.clone(),
        }
    }

    pub fn exact(&self) -> Option<&BigInt> {
        match self {
            SizeEvidence::Exact { value } => Some(value),
            SizeEvidence::LowerBound { .. } => None,
        }
    }
}

/// First index of the final strictly increasing positive run of `R(1..=window)`.
fn increasing_from(spec: &IlrsSpec, ctx: &Context) -> Result<u64> {
    let ev = ctx.config.evidence;
    let budget = ctx.config.evidence_budget();
    let mut from = 1u64;
    let mut prev: Option<BigInt> = None;
    let mut window = 0;
    for (i, term) in spec.terms(budget).take(ev.max_window as usize).enumerate() {
        let n = i as u64 + 1;
        let v = match term {
            Ok(v) => v,
            Err(Error::BudgetExceeded(_)) => break,
            Err(e) => return Err(e),
        };
        if !v.is_positive() || prev.as_ref().is_some_and(|p| v <= *p) {
            from = n + u64::from(!v.is_positive());
        }
        prev = Some(v);
        window = n;
    }
    if window < from + ev.min_run.max(2) - 1 {
        return Err(Error::NonMonotoneEvidence(format!(
            "{} does not end its {window}-term window increasing",
            spec.label()
        )));
    }
    Ok(from)
}

pub fn size_evidence(chain: &CompositionChain, n: &BigInt, ctx: &Context) -> Result<SizeEvidence> {
    let budget = &ctx.config.budget;
    let mut cur = n.clone();
    let mut exact = true;
    let mut bounded = Vec::new();
    for (j, level) in chain.levels().iter().enumerate().rev() {
        if exact {
            match level.eval_exact_big(&cur, budget) {
                Ok(v) => {
                    cur = v;
                    continue;
                }
                Err(Error::BudgetExceeded(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if !cur.is_positive() {
            return Err(Error::NonPositiveIndex {
                level: j,
                index: cur.to_string(),
            });
        }
        let from = increasing_from(level, ctx)?;
        let k = cur.to_u64().map_or(INDEX_CAP, |c| c.min(INDEX_CAP));
        if k < from {
            return Err(Error::NonMonotoneEvidence(format!(
                "level {j} is only known to increase from {from}, argument bound is {k}"
            )));
        }
        cur = level.eval_exact(k, &ctx.config.evidence_budget())?;
        exact = false;
        bounded.push(j);
    }
    Ok(if exact {
        SizeEvidence::Exact { value: cur }
    } else {
        SizeEvidence::LowerBound {
            bound: cur,
            bounded_levels: bounded,
        }
    })
}
