//! Residues of a single sequence modulo `q`: state-vector iteration,
//! preperiod/period detection and evaluation at arbitrarily large indices.
//!
//! The state at index `n` is `(R(n), .., R(n+d-1)) mod q`. The transition is an
//! affine map on `(Z/q)^d`, so the state sequence is eventually periodic with
//! preperiod and period both at most `q^d`. When `a0` is a unit mod `q` the map
//! is a bijection and the sequence is purely periodic from `n = 1`.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::error::{Error, Result};
use crate::ilrs::IlrsSpec;

/// Default cap on the number of states visited while searching for a repeat.
pub const DEFAULT_STATE_CAP: u64 = 1 << 25;

pub(crate) fn reduce(x: &BigInt, q: u64) -> u64 {
    x.mod_floor(&BigInt::from(q))
        .to_u64()
        .expect("residue fits")
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// The recurrence with all coefficients reduced mod `q` once, up front.
#[derive(Clone, Debug)]
pub struct ModRecurrence {
    q: u64,
    coeffs: Vec<u64>,
    inhom: u64,
    initial: Vec<u64>,
}

impl ModRecurrence {
    pub fn new(spec: &IlrsSpec, q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModulus(q));
        }
        Ok(ModRecurrence {
            q,
            coeffs: spec.coeffs().iter().map(|c| reduce(c, q)).collect(),
            inhom: reduce(spec.inhom(), q),
            initial: spec.initial().iter().map(|c| reduce(c, q)).collect(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn start(&self) -> ModState {
        ModState {
            q: self.q,
            vec: self.initial.clone(),
            base_index: 1,
        }
    }

    #[inline]
    fn next_residue(&self, vec: &[u64]) -> u64 {
        let q = self.q as u128;
        let mut acc = self.inhom as u128;
        for (&a, &r) in self.coeffs.iter().zip(vec) {
            acc = (acc + a as u128 * r as u128) % q;
        }
        acc as u64
    }

    pub fn step(&self, state: &mut ModState) {
        let next = self.next_residue(&state.vec);
        state.vec.rotate_left(1);
        *state.vec.last_mut().expect("order >= 1") = next;
        state.base_index += 1;
    }

    /// Whether `a0` is invertible mod `q`, which makes the state map a bijection.
    pub fn is_invertible(&self) -> bool {
        self.coeffs[0].gcd(&self.q) == 1
    }
}

/// `(R(n), .., R(n+d-1)) mod q` together with the index `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModState {
    pub q: u64,
    pub vec: Vec<u64>,
    pub base_index: u64,
}

impl ModState {
    /// `R(base_index) mod q`.
    pub fn residue(&self) -> u64 {
        self.vec[0]
    }
}

/// Preperiod `s` and period `L` of a sequence modulo `q`.
#[serde_as]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodInfo {
    #[serde_as(as = "DisplayFromStr")]
    pub q: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub s: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub period: u64,
    /// `true` when `s, L <= q^d` was checked; `false` when `q^d` is too large
    /// to represent and the bound was not tested.
    pub bound_check: bool,
}

/// Which repeat-detection strategy to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PeriodMethod {
    /// First-return scan when `a0` is a unit mod `q`, table otherwise.
    #[default]
    Auto,
    /// Always record visited states in a table.
    Table,
}

/// Minimal preperiod and period of the state sequence mod `q`.
pub fn find_period(spec: &IlrsSpec, q: u64, cap: u64) -> Result<PeriodInfo> {
    find_period_with(spec, q, cap, PeriodMethod::Auto)
}

pub fn find_period_with(
    spec: &IlrsSpec,
    q: u64,
    cap: u64,
    method: PeriodMethod,
) -> Result<PeriodInfo> {
    let rec = ModRecurrence::new(spec, q)?;
    let (s, period) = if method == PeriodMethod::Auto && rec.is_invertible() {
        first_return(&rec, cap)?
    } else {
        match state_space(q, rec.order()) {
            Some(_) => table_scan(&rec, cap, |v| pack(v, q))?,
            None => table_scan(&rec, cap, |v| v.to_vec())?,
        }
    };
    if rec.is_invertible() {
        assert_eq!(s, 1, "invertible state map must be purely periodic");
    }
    let bound_check = match state_space(q, rec.order()) {
        Some(bound) => {
            assert!(
                s as u128 <= bound && period as u128 <= bound,
                "pigeonhole bound violated"
            );
            true
        }
        None => false,
    };
    Ok(PeriodInfo {
        q,
        s,
        period,
        bound_check,
    })
}

/// `q^d` if it fits in a `u128`.
fn state_space(q: u64, d: usize) -> Option<u128> {
    (q as u128).checked_pow(u32::try_from(d).ok()?)
}

fn pack(v: &[u64], q: u64) -> u128 {
    v.iter().fold(0u128, |acc, &r| acc * q as u128 + r as u128)
}

fn too_many_states(cap: u64, q: u64) -> Error {
    Error::budget(format!("no repeat mod {q} within {cap} states"))
}

/// Bijective case: the orbit of the initial state is a pure cycle.
fn first_return(rec: &ModRecurrence, cap: u64) -> Result<(u64, u64)> {
    let start = rec.start();
    let mut state = start.clone();
    let mut steps = 0u64;
    loop {
        rec.step(&mut state);
        steps += 1;
        if state.vec == start.vec {
            return Ok((1, steps));
        }
        if steps >= cap {
            return Err(too_many_states(cap, rec.q));
        }
    }
}

fn table_scan<K: Hash + Eq>(
    rec: &ModRecurrence,
    cap: u64,
    key: impl Fn(&[u64]) -> K,
) -> Result<(u64, u64)> {
    let mut seen: HashMap<K, u64> = HashMap::new();
    let mut state = rec.start();
    loop {
        let k = key(&state.vec);
        if let Some(&first) = seen.get(&k) {
            return Ok((first, state.base_index - first));
        }
        if seen.len() as u64 >= cap {
            return Err(too_many_states(cap, rec.q));
        }
        seen.insert(k, state.base_index);
        rec.step(&mut state);
    }
}

/// The smallest index `r` with `R(r) ≡ R(n) (mod q)` guaranteed by the period:
/// `n` itself when `n <= s + L`, otherwise `s + ((n - s) mod L)`.
pub fn representative(n: &BigUint, info: &PeriodInfo) -> u64 {
    let limit = BigUint::from(info.s) + BigUint::from(info.period);
    if *n <= limit {
        return n.to_u64().expect("bounded by s + L");
    }
    let offset = (n - BigUint::from(info.s)) % BigUint::from(info.period);
    info.s + offset.to_u64().expect("below L")
}

/// `R(n) mod q` for `n >= 1`, reducing `n` through the period first.
pub fn eval_mod(
    spec: &IlrsSpec,
    n: &BigUint,
    q: u64,
    period: Option<&PeriodInfo>,
    cap: u64,
) -> Result<u64> {
    if n.is_zero() {
        return Err(Error::NonPositiveIndex {
            level: 0,
            index: "0".into(),
        });
    }
    let computed;
    let info = match period {
        Some(p) => {
            debug_assert_eq!(p.q, q);
            p
        }
        None => {
            computed = find_period(spec, q, cap)?;
            &computed
        }
    };
    let target = representative(n, info);
    Ok(residue_by_stepping(&ModRecurrence::new(spec, q)?, target))
}

/// `R(n) mod q` by stepping the state `n - 1` times, with no period shortcut.
pub fn residue_by_stepping(rec: &ModRecurrence, n: u64) -> u64 {
    let mut state = rec.start();
    for _ in 1..n {
        rec.step(&mut state);
    }
    state.residue()
}

/// `s <= |a0|^d` for the detected preperiod mod a prime `p`.
pub fn check_prime_preperiod_bound(spec: &IlrsSpec, p: u64, cap: u64) -> Result<bool> {
    let info = find_period(spec, p, cap)?;
    let bound = num_traits::pow(spec.a0().abs(), spec.order());
    Ok(BigInt::from(info.s) <= bound)
}

/// Affine companion-matrix evaluation mod `q`.
///
/// This path never looks for a period: it raises the `(d+1) x (d+1)` transition
/// matrix to the power `n - 1` by repeated squaring. Certificate verification
/// uses it as the route independent of [`find_period`].
pub mod matrix {
    use super::*;

    type Mat = Vec<Vec<u64>>;

    fn mul(a: &Mat, b: &Mat, q: u64) -> Mat {
        let k = a.len();
        let mut out = vec![vec![0u64; k]; k];
        for i in 0..k {
            for l in 0..k {
                let ail = a[i][l];
                if ail == 0 {
                    continue;
                }
                for j in 0..k {
                    out[i][j] = (out[i][j] + mul_mod(ail, b[l][j], q)) % q;
                }
            }
        }
        out
    }

    fn transition(rec: &ModRecurrence) -> Mat {
        let d = rec.order();
        let mut t = vec![vec![0u64; d + 1]; d + 1];
        for i in 0..d - 1 {
            t[i][i + 1] = 1;
        }
        t[d - 1][..d].copy_from_slice(&rec.coeffs);
        t[d - 1][d] = rec.inhom;
        t[d][d] = 1 % rec.q;
        t
    }

    /// State vector at index `n >= 1`.
    pub fn state_at(spec: &IlrsSpec, n: &BigUint, q: u64) -> Result<Vec<u64>> {
        if n.is_zero() {
            return Err(Error::NonPositiveIndex {
                level: 0,
                index: "0".into(),
            });
        }
        let rec = ModRecurrence::new(spec, q)?;
        let k = rec.order() + 1;
        let mut acc: Mat = (0..k)
            .map(|i| (0..k).map(|j| u64::from(i == j)).collect())
            .collect();
        let mut base = transition(&rec);
        let e = n - BigUint::one();
        for i in 0..e.bits() {
            if e.bit(i) {
                acc = mul(&acc, &base, q);
            }
            base = mul(&base, &base, q);
        }
        let mut v = rec.initial.clone();
        v.push(1);
        Ok((0..rec.order())
            .map(|i| {
                acc[i]
                    .iter()
                    .zip(&v)
                    .fold(0u64, |s, (&m, &x)| (s + mul_mod(m, x, q)) % q)
            })
            .collect())
    }

    /// `R(n) mod q` by matrix powering.
    pub fn eval(spec: &IlrsSpec, n: &BigUint, q: u64) -> Result<u64> {
        Ok(state_at(spec, n, q)?[0])
    }

    /// Checks that `state(s + L) == state(s)`, which makes the sequence
    /// purely `L`-periodic from `s`.
    pub fn confirms_period(spec: &IlrsSpec, info: &PeriodInfo) -> Result<bool> {
        if info.s == 0 || info.period == 0 {
            return Ok(false);
        }
        let a = state_at(spec, &BigUint::from(info.s), info.q)?;
        let b = state_at(spec, &(BigUint::from(info.s) + info.period), info.q)?;
        Ok(a == b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilrs::Budget;

    const CAP: u64 = DEFAULT_STATE_CAP;

    /// Independent oracle: scan `(R(n), R(n+1))` pairs of exact Fibonacci
    /// numbers reduced mod q until the pair `(1, 1)` reappears.
    fn pisano_brute(q: u64) -> u64 {
        let (mut a, mut b) = (1u64 % q, 1u64 % q);
        let mut n = 0;
        loop {
            let c = (a + b) % q;
            a = b;
            b = c;
            n += 1;
            if a == 1 % q && b == 1 % q {
                return n;
            }
        }
    }

    #[test]
    fn fibonacci_periods() {
        let f = IlrsSpec::fibonacci();
        for q in [2u64, 3, 5, 7, 10, 16, 100] {
            let info = find_period(&f, q, CAP).unwrap();
            assert_eq!(info.s, 1);
            assert_eq!(info.period, pisano_brute(q), "q={q}");
            assert!(info.bound_check);
        }
        assert_eq!(find_period(&f, 2, CAP).unwrap().period, 3);
        assert_eq!(find_period(&f, 10, CAP).unwrap().period, 60);
    }

    #[test]
    fn doubling_has_preperiod() {
        let d = IlrsSpec::doubling();
        let info = find_period(&d, 2, CAP).unwrap();
        assert_eq!((info.s, info.period), (2, 1));
        let info = find_period(&d, 3, CAP).unwrap();
        assert_eq!((info.s, info.period), (1, 2));
        // 2^(n-1) mod 12: 1, 2, 4, 8, 4, 8, ...
        let info = find_period(&d, 12, CAP).unwrap();
        assert_eq!((info.s, info.period), (3, 2));
    }

    #[test]
    fn table_and_first_return_agree() {
        let specs = [
            IlrsSpec::fibonacci(),
            IlrsSpec::lucas(),
            IlrsSpec::new(&[-1, 2, 3], 4, &[1, 0, 5]).unwrap(),
        ];
        for spec in &specs {
            for q in 2..40 {
                let a = find_period_with(spec, q, CAP, PeriodMethod::Auto).unwrap();
                let b = find_period_with(spec, q, CAP, PeriodMethod::Table).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn invalid_modulus() {
        assert!(matches!(
            find_period(&IlrsSpec::fibonacci(), 1, CAP),
            Err(Error::InvalidModulus(1))
        ));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            find_period(&IlrsSpec::fibonacci(), 1_000_003, 100),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(matches!(
            find_period(&IlrsSpec::doubling(), 1 << 20, 5),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn eval_mod_examples() {
        let f = IlrsSpec::fibonacci();
        let big = BigUint::from(1_000_000u64);
        let stepped = residue_by_stepping(&ModRecurrence::new(&f, 10).unwrap(), 1_000_000);
        assert_eq!(eval_mod(&f, &big, 10, None, CAP).unwrap(), stepped);
        assert_eq!(eval_mod(&f, &BigUint::from(1u8), 7, None, CAP).unwrap(), 1);
        let d = IlrsSpec::doubling();
        assert_eq!(eval_mod(&d, &BigUint::from(100u8), 2, None, CAP).unwrap(), 0);
        assert_eq!(eval_mod(&d, &BigUint::from(1u8), 2, None, CAP).unwrap(), 1);
    }

    #[test]
    fn eval_mod_matches_exact() {
        let b = Budget::default();
        let spec = IlrsSpec::new(&[2, -3, 1], 5, &[1, -4, 7]).unwrap();
        for q in [2u64, 6, 9, 35] {
            let info = find_period(&spec, q, CAP).unwrap();
            for n in 1..120u64 {
                let exact = reduce(&spec.eval_exact(n, &b).unwrap(), q);
                let via = eval_mod(&spec, &BigUint::from(n), q, Some(&info), CAP).unwrap();
                assert_eq!(via, exact, "n={n} q={q}");
            }
        }
    }

    #[test]
    fn matrix_path_agrees() {
        let b = Budget::default();
        let spec = IlrsSpec::new(&[3, 0, -2], -1, &[2, 5, 1]).unwrap();
        for q in [2u64, 7, 12, 1_000_003] {
            for n in 1..60u64 {
                let exact = reduce(&spec.eval_exact(n, &b).unwrap(), q);
                assert_eq!(matrix::eval(&spec, &BigUint::from(n), q).unwrap(), exact);
            }
        }
        let f = IlrsSpec::fibonacci();
        let n = BigUint::from(10u64).pow(30);
        let info = find_period(&f, 1000, CAP).unwrap();
        assert_eq!(
            matrix::eval(&f, &n, 1000).unwrap(),
            eval_mod(&f, &n, 1000, Some(&info), CAP).unwrap()
        );
        assert!(matrix::confirms_period(&f, &info).unwrap());
        let wrong = PeriodInfo {
            period: info.period + 1,
            ..info
        };
        assert!(!matrix::confirms_period(&f, &wrong).unwrap());
    }

    #[test]
    fn prime_preperiod_bound() {
        assert!(check_prime_preperiod_bound(&IlrsSpec::fibonacci(), 5, CAP).unwrap());
        assert!(check_prime_preperiod_bound(&IlrsSpec::doubling(), 2, CAP).unwrap());
        assert!(check_prime_preperiod_bound(&IlrsSpec::doubling(), 3, CAP).unwrap());
        let info = find_period(&IlrsSpec::doubling(), 3, CAP).unwrap();
        assert_eq!(info.s, 1);
    }
}
