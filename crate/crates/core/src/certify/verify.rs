//! Independent re-checking of certificates.
//!
//! Construction evaluates `f` through period towers. Verification never uses
//! a detected period to shorten an evaluation: inner levels are evaluated
//! exactly and the outer level by matrix powering modulo `p`. Stored periods
//! are re-checked by comparing matrix-computed states, primes by Miller–Rabin
//! and trial division, prime sets by a separate trial-division scan.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::divisibility::DivisibilityCertificate;
use super::interval::PrimeFreeIntervalCertificate;
use super::pisot::PisotFloorCertificate;
use super::size::size_evidence;
use super::Certificate;
use crate::context::Context;
use crate::error::Error;
use crate::ilrs::CompositionChain;
use crate::modular::matrix;
use crate::primes::{is_prime_trial, is_prime_u64};
use crate::tower::{find_tower_start, TowerReduction};
use crate::trace::{trace_ilrs, PisotSalem};

/// Primes below this are also confirmed by trial division.
const TRIAL_LIMIT: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<i64>,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<ClaimCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    fn push(&mut self, claim: impl Into<String>, n: Option<u64>, h: Option<i64>, ok: bool, detail: impl Into<String>) {
        self.checks.push(ClaimCheck {
            claim: claim.into(),
            n,
            h,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail: detail.into(),
        });
    }

    fn skip(&mut self, claim: impl Into<String>, n: Option<u64>, h: Option<i64>, detail: impl Into<String>) {
        self.checks.push(ClaimCheck {
            claim: claim.into(),
            n,
            h,
            status: CheckStatus::Skipped,
            detail: detail.into(),
        });
    }
}

/// `f(N) mod p` with exact inner levels and a matrix power for the outer one.
/// `None` when an inner value is beyond the exact budget.
pub fn independent_residue(chain: &CompositionChain, n: &BigUint, p: u64, ctx: &Context) -> Option<u64> {
    let mut v = BigInt::from(n.clone());
    for level in chain.levels()[1..].iter().rev() {
        v = level.eval_exact_big(&v, &ctx.config.budget).ok()?;
    }
    let idx = v.to_biguint().filter(|x| !x.is_zero())?;
    matrix::eval(chain.outer(), &idx, p).ok()
}

fn prime_ok(p: u64) -> bool {
    is_prime_u64(p) && (p >= TRIAL_LIMIT || is_prime_trial(p))
}

fn check_tower(chain: &CompositionChain, t: &TowerReduction, ctx: &Context) -> Result<(), String> {
    let levels = chain.levels();
    if t.levels.is_empty() || t.levels[0].modulus != t.q {
        return Err("tower does not start at its prime".into());
    }
    for (i, storey) in t.levels.iter().enumerate() {
        let spec = levels.get(storey.level).ok_or("tower level outside the chain")?;
        if storey.level != i || storey.period.q != storey.modulus {
            return Err(format!("level {i} is mislabelled"));
        }
        if i > 0 && storey.modulus != t.levels[i - 1].period.period {
            return Err(format!("level {i} modulus is not the period of level {}", i - 1));
        }
        if storey.threshold < storey.period.s {
            return Err(format!("level {i} threshold is below its preperiod"));
        }
        match matrix::confirms_period(spec, &storey.period) {
            Ok(true) => {}
            Ok(false) => {
                return Err(format!(
                    "level {i}: state at {} + {} differs from state at {} mod {}",
                    storey.period.s, storey.period.period, storey.period.s, storey.modulus
                ))
            }
            Err(e) => return Err(e.to_string()),
        }
        if i + 1 < levels.len() {
            let inner = CompositionChain::new(levels[i + 1..].to_vec()).map_err(|e| e.to_string())?;
            let ev = find_tower_start(&inner, storey.threshold, ctx).map_err(|e| e.to_string())?;
            if ev.start > storey.start {
                return Err(format!("level {i}: inner chain reaches {} only from {}", storey.threshold, ev.start));
            }
        } else if storey.start < storey.threshold {
            return Err(format!("level {i}: start below threshold"));
        }
    }
    let last = t.levels.last().expect("nonempty");
    if last.period.period != 1 && t.levels.len() != levels.len() {
        return Err("tower stops before the innermost level".into());
    }
    if t.period != last.period.period {
        return Err("composed period differs from the last level".into());
    }
    if t.m < t.levels.iter().map(|l| l.start).max().unwrap_or(1) {
        return Err("tower start below a level start".into());
    }
    Ok(())
}

fn verify_divisibility(c: &DivisibilityCertificate, n_checks: u64, ctx: &Context, r: &mut VerificationReport) {
    let chain = &c.chain;
    for e in &c.entries {
        r.push("p_h is prime", None, Some(e.h), prime_ok(e.prime), format!("p = {}", e.prime));
    }
    let hs: Vec<i64> = c.entries.iter().map(|e| e.h).collect();
    let expected: Vec<i64> = (-(c.h_max as i64)..=c.h_max as i64).collect();
    let mut sorted = hs.clone();
    sorted.sort_unstable();
    r.push("one factor for every |h| <= H", None, None, sorted == expected, "");

    let checks: Vec<(u64, Result<(), String>)> = c
        .towers
        .par_iter()
        .map(|t| (t.q, check_tower(chain, t, ctx)))
        .collect();
    for (q, res) in checks {
        let detail = res.as_ref().err().cloned().unwrap_or_default();
        r.push(format!("tower mod {q} is valid"), None, None, res.is_ok(), detail);
    }
    for e in &c.entries {
        match c.tower_for(e.prime) {
            None => r.push("period L(p_h) recorded", None, Some(e.h), false, format!("no tower for {}", e.prime)),
            Some(t) => {
                r.push(
                    "L is a multiple of L(p_h)",
                    None,
                    Some(e.h),
                    c.period.is_multiple_of(&BigUint::from(t.period)),
                    format!("L = {}, L({}) = {}", c.period, e.prime, t.period),
                );
                r.push(
                    "m is at least the tower start",
                    None,
                    Some(e.h),
                    c.m >= t.m,
                    format!("m = {}, start = {}", c.m, t.m),
                );
            }
        }
    }
    match size_evidence(chain, &BigInt::from(c.m), ctx) {
        Ok(ev) => r.push(
            "|f(m)| - H >= 2",
            None,
            None,
            ev.abs_lower() >= BigInt::from(c.h_max) + 2u32,
            format!("|f(m)| >= {}", ev.abs_lower()),
        ),
        Err(e) => r.push("|f(m)| - H >= 2", None, None, false, e.to_string()),
    }

    let rows: Vec<(u64, &super::divisibility::FactorEntry, Option<u64>)> = (0..n_checks)
        .into_par_iter()
        .flat_map_iter(|n| {
            let idx = &c.period * n + c.m;
            c.entries
                .iter()
                .map(move |e| (n, e, independent_residue(chain, &idx, e.prime, ctx)))
                .collect::<Vec<_>>()
        })
        .collect();
    for (n, e, res) in rows {
        let claim = "p_h divides f(L n + m) + h";
        match res {
            Some(v) => {
                let rem = (v as i128 + e.h as i128).rem_euclid(e.prime as i128);
                r.push(claim, Some(n), Some(e.h), rem == 0, format!("p = {}, remainder {rem}", e.prime));
            }
            None => r.skip(claim, Some(n), Some(e.h), "inner value beyond the exact budget"),
        }
    }
}

fn verify_interval(c: &PrimeFreeIntervalCertificate, n_checks: u64, ctx: &Context, r: &mut VerificationReport) {
    let d = &c.divisibility;
    verify_divisibility(d, n_checks, ctx, r);
    let h = d.h_max;
    let limit = 2 * h + 2;
    let sieve: Vec<u64> = (2..=limit).filter(|&k| is_prime_trial(k)).collect();
    r.push("P is the set of primes <= 2H + 2", None, None, c.primes == sieve, format!("2H + 2 = {limit}"));
    let mut found = d.distinct_primes();
    found.sort_unstable();
    r.push("{p_h} equals P", None, None, found == c.primes, format!("{found:?}"));
    match size_evidence(&d.chain, &BigInt::from(d.m), ctx).map(|e| e.exact().cloned()) {
        Ok(Some(v)) => r.push("H = |f(m)| - 2", None, None, v.abs() == BigInt::from(h) + 2u32, format!("f(m) = {v}")),
        Ok(None) => r.skip("H = |f(m)| - 2", None, None, "f(m) beyond the exact budget"),
        Err(e) => r.push("H = |f(m)| - 2", None, None, false, e.to_string()),
    }
    let star = &d.period * c.n_star + d.m;
    match size_evidence(&d.chain, &BigInt::from(star), ctx) {
        Ok(ev) => r.push(
            "|f(L n_star + m)| > 2H + 2",
            Some(c.n_star),
            None,
            c.n_star >= 1 && ev.abs_lower() > BigInt::from(limit),
            format!("lower bound {}", ev.abs_lower()),
        ),
        Err(e) => r.push("|f(L n_star + m)| > 2H + 2", Some(c.n_star), None, false, e.to_string()),
    }
    for n in 0..n_checks {
        let idx = &d.period * n + d.m;
        let residues: Option<Vec<(u64, u64)>> = c
            .primes
            .iter()
            .map(|&p| independent_residue(&d.chain, &idx, p, ctx).map(|v| (p, v)))
            .collect();
        let claim = "|f(N)| + h has a factor in P";
        let Some(residues) = residues else {
            r.skip(claim, Some(n), None, "inner value beyond the exact budget");
            continue;
        };
        for hh in -(h as i64)..=h as i64 {
            // The offsets are symmetric, so test f(N) + h for every h.
            let hit = residues
                .iter()
                .find(|&&(p, v)| (v as i128 + hh as i128).rem_euclid(p as i128) == 0);
            let detail = hit.map_or("no prime of P divides".into(), |(p, _)| format!("divisible by {p}"));
            r.push(claim, Some(n), Some(hh), hit.is_some(), detail);
        }
    }
}

fn verify_pisot(c: &PisotFloorCertificate, n_checks: u64, ctx: &Context, r: &mut VerificationReport) {
    let d = &c.divisibility;
    let cls = &c.classification;
    let ps = match PisotSalem::new(&c.poly, cls.precision, cls.tolerance_bits) {
        Ok(ps) => {
            let fresh = ps.classification();
            r.push("classification", None, None, fresh == cls, fresh.kind.to_string());
            Some(ps)
        }
        Err(e) => {
            r.push("classification", None, None, false, e.to_string());
            None
        }
    };
    let trace = trace_ilrs(&c.poly);
    let levels = d.chain.levels();
    let chain_ok = levels.len() == c.inner.levels().len() + 1
        && levels[0].key() == trace.key()
        && levels[1..].iter().zip(c.inner.levels()).all(|(a, b)| a.key() == b.key());
    r.push("chain is [trace, U]", None, None, chain_ok, "");
    r.push("H = H' + G", None, None, d.h_max == c.h_user + c.offset.bound, format!("H = {}", d.h_max));
    verify_divisibility(d, n_checks, ctx, r);
    let Some(ps) = ps else { return };

    match c.inner.eval_exact_u64(d.m, &ctx.config.budget).map(|v| v.to_u64()) {
        Ok(Some(n_min)) => {
            let g = ps.offset_bound(n_min);
            r.push("offset bound G", None, None, g == c.offset, format!("G = {}", g.bound));
        }
        _ => r.push("offset bound G", None, None, false, "U(m) not evaluable"),
    }

    let max_prime = d.distinct_primes().into_iter().max().unwrap_or(2);
    r.push("largest prime recorded", None, None, max_prime == c.growth.max_prime, "");
    let first = BigInt::from(d.period.clone()) + d.m;
    let growth = size_evidence(&c.inner, &first, ctx).and_then(|ev| {
        let mono = find_tower_start(&c.inner, 1, ctx)?;
        if BigInt::from(mono.increasing_from) > first {
            return Err(Error::NonMonotoneEvidence("inner chain not increasing".into()));
        }
        let e = ev.abs_lower().to_u64().map_or(super::size::INDEX_CAP, |x| x.min(super::size::INDEX_CAP));
        ps.floor_pow(e, &ctx.config.evidence_budget())
    });
    match growth {
        Ok(fp) => r.push(
            "floor(alpha^U(L n + m)) - H' exceeds every prime for n >= 1",
            None,
            None,
            fp.floor.clone() - c.h_user > BigInt::from(max_prime),
            format!("lower bound {}", fp.floor),
        ),
        Err(e) => r.push("floor(alpha^U(L n + m)) - H' exceeds every prime for n >= 1", None, None, false, e.to_string()),
    }

    for n in 0..n_checks {
        let idx = BigInt::from(&d.period * n + d.m);
        let claim = "floor(alpha^U(L n + m)) + h is composite";
        let fp = c
            .inner
            .eval_exact(&idx, &ctx.config.budget)
            .and_then(|e| {
                let e = e.to_u64().ok_or_else(|| Error::budget("exponent too large"))?;
                ps.floor_pow(e, &ctx.config.budget)
            });
        let fp = match fp {
            Ok(fp) => fp,
            Err(e) => {
                r.skip(claim, Some(n), None, e.to_string());
                continue;
            }
        };
        r.push(
            "|g| <= G",
            Some(n),
            None,
            fp.g.abs() <= BigInt::from(c.offset.bound),
            format!("g = {}", fp.g),
        );
        for hh in -(c.h_user as i64)..=c.h_user as i64 {
            let value = &fp.floor + hh;
            let shift = (&fp.g + hh).to_i64();
            let Some(p) = shift.and_then(|s| d.prime_for(s)) else {
                r.push(claim, Some(n), Some(hh), false, "g + h outside the certified offsets");
                continue;
            };
            let divides = (&value % p).is_zero();
            let large = n < c.composite_from || value.abs() > BigInt::from(p);
            r.push(claim, Some(n), Some(hh), divides && large, format!("divisible by {p}: {divides}"));
        }
    }
}

/// Re-checks every claim of `cert` for `n = 0..n_checks`. With `n_checks = 0`
/// nothing is checked and the report is empty.
pub fn verify_certificate(cert: &Certificate, n_checks: u64, ctx: &Context) -> VerificationReport {
    let mut report = VerificationReport::default();
    if n_checks == 0 {
        return report;
    }
    match cert {
        Certificate::Divisibility(c) => verify_divisibility(c, n_checks, ctx, &mut report),
        Certificate::PrimeFreeInterval(c) => verify_interval(c, n_checks, ctx, &mut report),
        Certificate::PisotFloor(c) => verify_pisot(c, n_checks, ctx, &mut report),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_divisibility, certify_pisot_floor, certify_prime_free_interval};
    use crate::ilrs::IlrsSpec;
    use crate::trace::MinPoly;

    fn fib2() -> CompositionChain {
        CompositionChain::new(vec![IlrsSpec::fibonacci(); 2]).unwrap()
    }

    #[test]
    fn empty_report_without_checks() {
        let ctx = Context::default();
        let c = certify_divisibility(&fib2(), 1, 5, &ctx).unwrap();
        let r = verify_certificate(&Certificate::Divisibility(c), 0, &ctx);
        assert!(r.checks.is_empty() && r.passed());
    }

    #[test]
    fn divisibility_passes_and_tampering_fails() {
        let ctx = Context::default();
        let c = certify_divisibility(&fib2(), 1, 5, &ctx).unwrap();
        let r = verify_certificate(&Certificate::Divisibility(c.clone()), 3, &ctx);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.count(CheckStatus::Pass) > 0);

        let mut bad = c.clone();
        bad.entries[1].prime = 3;
        assert!(!verify_certificate(&Certificate::Divisibility(bad), 2, &ctx).passed());

        let mut bad = c.clone();
        bad.period = BigUint::from(60u32);
        assert!(!verify_certificate(&Certificate::Divisibility(bad), 2, &ctx).passed());

        let mut bad = c;
        bad.towers[1].levels[0].period.period = 30;
        assert!(!verify_certificate(&Certificate::Divisibility(bad), 1, &ctx).passed());
    }

    #[test]
    fn interval_passes() {
        let ctx = Context::default();
        let c = certify_prime_free_interval(&fib2(), 5, &ctx).unwrap();
        let r = verify_certificate(&Certificate::PrimeFreeInterval(c.clone()), 2, &ctx);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        let mut bad = c;
        bad.primes.pop();
        assert!(!verify_certificate(&Certificate::PrimeFreeInterval(bad), 1, &ctx).passed());
    }

    #[test]
    fn pisot_passes() {
        let ctx = Context::default();
        let inner = CompositionChain::single(IlrsSpec::fibonacci());
        let c = certify_pisot_floor(&MinPoly::golden(), &inner, 0, 4, &ctx).unwrap();
        let r = verify_certificate(&Certificate::PisotFloor(c.clone()), 3, &ctx);
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        let mut bad = c;
        bad.offset.bound = 0;
        assert!(!verify_certificate(&Certificate::PisotFloor(bad), 1, &ctx).passed());
    }
}
