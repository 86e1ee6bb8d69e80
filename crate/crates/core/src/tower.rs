//! Period towers for composed sequences.
//!
//! For `f = R0 ∘ U` the outer level is periodic mod `q` with preperiod `s0` and
//! period `Q`. Once `U(n) >= s0`, `f(n) mod q` only depends on `U(n) mod Q`, so
//! the inner chain is reduced modulo `Q` and the argument recurses. The period
//! of the innermost level at the bottom of the tower is a period of `f mod q`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::context::{Context, StartConvention};
use crate::error::{Error, Result};
use crate::ilrs::{CompositionChain, IlrsSpec};
use crate::modular::{eval_mod, PeriodInfo};

/// Window evidence that `U(n) >= threshold` for every `n >= start`: the exact
/// values `U(1..=window)` were inspected, every term from `start` on is at
/// least the threshold, and the terms from `increasing_from` to `window` are
/// strictly increasing.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartEvidence {
    #[serde_as(as = "DisplayFromStr")]
    pub threshold: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub start: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub window: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub increasing_from: u64,
}

/// One storey of a tower: level `level` of the chain taken modulo `modulus`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevel {
    #[serde_as(as = "DisplayFromStr")]
    pub level: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub modulus: u64,
    pub period: PeriodInfo,
    /// Index from which this level's argument is trusted to lie in the
    /// periodic range; at least `period.s`.
    #[serde_as(as = "DisplayFromStr")]
    pub threshold: u64,
    /// `U_j(n) >= threshold` for `n >= start`, where `U_j` is the chain below
    /// this level (the identity for the innermost level).
    #[serde_as(as = "DisplayFromStr")]
    pub start: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<StartEvidence>,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReduction {
    #[serde_as(as = "DisplayFromStr")]
    pub q: u64,
    pub levels: Vec<TowerLevel>,
    /// `f mod q` is purely periodic from `m` on.
    #[serde_as(as = "DisplayFromStr")]
    pub m: u64,
    /// The composed period.
    #[serde_as(as = "DisplayFromStr")]
    pub period: u64,
    pub convention: StartConvention,
}

impl TowerReduction {
    /// `L <= q^(d0 d1 .. dM)`; `None` when the right side is too large to form.
    pub fn within_full_bound(&self, chain: &CompositionChain) -> Option<bool> {
        bound_holds(self.q, self.period, chain.levels())
    }

    /// `L <= q^(d1 .. dM)`, the bound for chains whose outer level is
    /// reversible too.
    pub fn within_inner_bound(&self, chain: &CompositionChain) -> Option<bool> {
        bound_holds(self.q, self.period, &chain.levels()[1..])
    }
}

fn bound_holds(q: u64, period: u64, levels: &[IlrsSpec]) -> Option<bool> {
    let exp: u64 = levels.iter().map(|l| l.order() as u64).product();
    if (exp as f64) * (q as f64).log2() > 4096.0 {
        return None;
    }
    Some(BigUint::from(period) <= BigUint::from(q).pow(exp as u32))
}

fn threshold_for(spec: &IlrsSpec, info: &PeriodInfo, convention: StartConvention) -> Result<u64> {
    match convention {
        StartConvention::PerModulus => Ok(info.s),
        StartConvention::Uniform => {
            let bound = num_traits::pow(spec.a0().abs(), spec.order());
            let bound = bound.to_u64().ok_or_else(|| {
                Error::budget(format!("|a0|^d = {bound} is too large for a uniform start"))
            })?;
            Ok(bound.max(info.s))
        }
    }
}

/// Smallest `m` such that the window evidence supports `U(n) >= threshold` for
/// all `n >= m`.
pub fn find_tower_start(inner: &CompositionChain, threshold: u64, ctx: &Context) -> Result<StartEvidence> {
    let ev = ctx.config.evidence;
    let budget = ctx.config.evidence_budget();
    let threshold_big = BigInt::from(threshold);
    let mut last_below = 0u64;
    let mut run_start = 1u64;
    let mut prev: Option<BigInt> = None;
    let mut window = 0u64;
    let mut truncated = false;
    for n in 1..=ev.max_window.max(2) {
        let v = match inner.eval_exact_u64(n, &budget) {
            Ok(v) => v,
            Err(Error::BudgetExceeded(_)) => {
                truncated = true;
                break;
            }
            Err(Error::NonPositiveIndex { level, index }) => {
                return Err(Error::NonMonotoneEvidence(format!(
                    "inner chain hits index {index} at level {level} for n = {n}"
                )))
            }
            Err(e) => return Err(e),
        };
        window = n;
        if v < threshold_big {
            last_below = n;
        }
        if prev.as_ref().is_some_and(|p| v <= *p) {
            run_start = n;
        }
        prev = Some(v);
        let from = run_start.max(last_below + 1);
        if n + 1 >= from + ev.min_run && n > last_below {
            break;
        }
    }
    let start = last_below + 1;
    if window == 0 || start > window {
        return Err(Error::NonMonotoneEvidence(format!(
            "no term of {} reaches {threshold} within {window} terms",
            inner.describe()
        )));
    }
    let increasing_from = run_start.max(start);
    // A window cut short by the bit budget only has to end on two increasing
    // terms; otherwise the full run is required.
    let needed = if truncated { 2 } else { ev.min_run.max(2) };
    if window + 1 < increasing_from + needed {
        return Err(Error::NonMonotoneEvidence(format!(
            "{} is not strictly increasing at the end of its {window}-term window",
            inner.describe()
        )));
    }
    Ok(StartEvidence {
        threshold,
        start,
        window,
        increasing_from,
    })
}

/// Builds the period tower of `chain` modulo `q`.
pub fn chain_period(chain: &CompositionChain, q: u64, ctx: &Context) -> Result<TowerReduction> {
    if q < 2 {
        return Err(Error::InvalidModulus(q));
    }
    let mut levels = Vec::with_capacity(chain.levels().len());
    let mut modulus = q;
    for (j, spec) in chain.levels().iter().enumerate() {
        let info = ctx.period(spec, modulus)?;
        let threshold = threshold_for(spec, &info, ctx.config.start_convention)?;
        let (start, evidence) = if j + 1 == chain.levels().len() {
            (threshold, None)
        } else {
            let inner = CompositionChain::new(chain.levels()[j + 1..].to_vec())?;
            let ev = find_tower_start(&inner, threshold, ctx)?;
            (ev.start, Some(ev))
        };
        levels.push(TowerLevel {
            level: j,
            modulus,
            period: info,
            threshold,
            start,
            evidence,
        });
        if info.period == 1 {
            // Level j is constant mod its modulus past the threshold: nothing
            // below it needs reducing.
            break;
        }
        modulus = info.period;
    }
    let m = levels.iter().map(|l| l.start).max().expect("nonempty");
    let period = levels.last().expect("nonempty").period.period;
    Ok(TowerReduction {
        q,
        levels,
        m,
        period,
        convention: ctx.config.start_convention,
    })
}

/// `f(n) mod q`, evaluated through the tower without forming the inner values.
pub fn eval_chain_mod(
    chain: &CompositionChain,
    n: &BigUint,
    q: u64,
    tower: Option<&TowerReduction>,
    ctx: &Context,
) -> Result<u64> {
    let owned;
    let tower = match tower {
        Some(t) => {
            if t.q != q {
                return Err(Error::Invalid(format!(
                    "tower was built for modulus {}, not {q}",
                    t.q
                )));
            }
            t
        }
        None => {
            owned = chain_period(chain, q, ctx)?;
            &owned
        }
    };
    if n.is_zero() {
        return Err(Error::NonPositiveIndex {
            level: chain.depth(),
            index: "0".into(),
        });
    }
    eval_levels(chain.levels(), &tower.levels, n, ctx)
}

fn eval_levels(levels: &[IlrsSpec], tower: &[TowerLevel], n: &BigUint, ctx: &Context) -> Result<u64> {
    let storey = &tower[0];
    let spec = &levels[0];
    let cap = ctx.config.state_cap;
    if levels.len() == 1 {
        return eval_mod(spec, n, storey.modulus, Some(&storey.period), cap);
    }
    if *n >= BigUint::from(storey.start) {
        let big_q = storey.period.period;
        let t = if big_q == 1 {
            storey.threshold
        } else {
            let u = eval_levels(&levels[1..], &tower[1..], n, ctx)?;
            let thr = storey.threshold;
            thr + (u + big_q - thr % big_q) % big_q
        };
        return eval_mod(spec, &BigUint::from(t), storey.modulus, Some(&storey.period), cap);
    }
    // Below the certified start: the inner value may sit in the preperiod, so
    // compute it exactly.
    let inner = CompositionChain::new(levels[1..].to_vec())?;
    let below = || Error::IndexBelowTowerStart {
        n: n.to_string(),
        m: storey.start,
    };
    let u = inner
        .eval_exact(&BigInt::from(n.clone()), &ctx.config.budget)
        .map_err(|_| below())?;
    if u.sign() != Sign::Plus {
        return Err(Error::NonPositiveIndex {
            level: 1,
            index: u.to_string(),
        });
    }
    let u = u.to_biguint().expect("positive");
    debug_assert!(!u.is_zero() && u >= BigUint::one());
    eval_mod(spec, &u, storey.modulus, Some(&storey.period), cap)
}
