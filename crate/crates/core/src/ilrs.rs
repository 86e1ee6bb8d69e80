//! Inhomogeneous linear recurrence sequences and their compositions.
//!
//! A sequence of order `d` is fixed by coefficients `a0..a_{d-1}`, a constant
//! inhomogeneous term `b` and the initial segment `R(1..=d)`:
//!
//! ```text
//! R(n + d) = a_{d-1} R(n + d - 1) + ... + a_0 R(n) + b
//! ```
//!
//! Indices start at 1. Chains are stored outermost first, so the chain
//! `[R0, R1, R2]` evaluates `R0(R1(R2(n)))`.

use std::collections::VecDeque;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Limits on exact evaluation.
///
/// `steps` caps the largest index the recurrence will be iterated to and
/// `bits` caps the size of any value produced along the way.
#[serde_as]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    #[serde_as(as = "DisplayFromStr")]
    pub steps: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub bits: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            steps: 1_000_000,
            bits: 1_000_000,
        }
    }
}

impl Budget {
    pub fn new(steps: u64, bits: u64) -> Self {
        Budget { steps, bits }
    }
}

/// Unvalidated sequence definition, as read from files or certificates.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawIlrs {
    #[serde_as(as = "DisplayFromStr")]
    pub order: usize,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub coeffs: Vec<BigInt>,
    #[serde_as(as = "DisplayFromStr")]
    pub inhom: BigInt,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub initial: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl RawIlrs {
    /// Convenience constructor from machine integers.
    pub fn from_i64(coeffs: &[i64], inhom: i64, initial: &[i64]) -> Self {
        RawIlrs {
            order: coeffs.len(),
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            inhom: BigInt::from(inhom),
            initial: initial.iter().map(|&c| BigInt::from(c)).collect(),
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// Content hash of a sequence definition. The name does not participate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpecKey(String);

impl SpecKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn from_hex(hex: &str) -> Option<Self> {
        (hex.len() == 64 && hex.bytes().all(|b| b.is_ascii_hexdigit()))
            .then(|| SpecKey(hex.to_ascii_lowercase()))
    }
}

impl fmt::Display for SpecKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A validated inhomogeneous linear recurrence sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawIlrs", into = "RawIlrs")]
pub struct IlrsSpec {
    coeffs: Vec<BigInt>,
    inhom: BigInt,
    initial: Vec<BigInt>,
    name: Option<String>,
    reversible: bool,
    key: SpecKey,
}

impl TryFrom<RawIlrs> for IlrsSpec {
    type Error = Error;

    fn try_from(raw: RawIlrs) -> Result<Self> {
        validate_ilrs(raw)
    }
}

impl From<IlrsSpec> for RawIlrs {
    fn from(spec: IlrsSpec) -> Self {
        RawIlrs {
            order: spec.order(),
            coeffs: spec.coeffs,
            inhom: spec.inhom,
            initial: spec.initial,
            name: spec.name,
        }
    }
}

/// Checks the structural invariants of a candidate sequence and records
/// whether it is reversible (`a0 = ±1`).
pub fn validate_ilrs(raw: RawIlrs) -> Result<IlrsSpec> {
    if raw.order < 1 {
        return Err(Error::EmptyOrder);
    }
    if raw.coeffs.len() != raw.order || raw.initial.len() != raw.order {
        return Err(Error::ArityMismatch {
            order: raw.order,
            coeffs: raw.coeffs.len(),
            initial: raw.initial.len(),
        });
    }
    if raw.coeffs[0].is_zero() {
        return Err(Error::ZeroLeadCoefficient);
    }
    let reversible = raw.coeffs[0].abs().is_one();
    let key = spec_key(&raw.coeffs, &raw.inhom, &raw.initial);
    Ok(IlrsSpec {
        coeffs: raw.coeffs,
        inhom: raw.inhom,
        initial: raw.initial,
        name: raw.name,
        reversible,
        key,
    })
}

fn spec_key(coeffs: &[BigInt], inhom: &BigInt, initial: &[BigInt]) -> SpecKey {
    let join = |v: &[BigInt]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let canonical = format!(
        "ilrs;d={};a={};b={};init={}",
        coeffs.len(),
        join(coeffs),
        inhom,
        join(initial)
    );
    let digest = Sha256::digest(canonical.as_bytes());
    SpecKey(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl IlrsSpec {
    pub fn new(coeffs: &[i64], inhom: i64, initial: &[i64]) -> Result<Self> {
        validate_ilrs(RawIlrs::from_i64(coeffs, inhom, initial))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Fibonacci numbers with `F(1) = F(2) = 1`.
    pub fn fibonacci() -> Self {
        Self::new(&[1, 1], 0, &[1, 1])
            .expect("valid")
            .with_name("fibonacci")
    }

    /// Lucas numbers with `L(1) = 1, L(2) = 3`.
    pub fn lucas() -> Self {
        Self::new(&[1, 1], 0, &[1, 3]).expect("valid").with_name("lucas")
    }

    /// Powers of two, `R(n) = 2^(n-1)`.
    pub fn doubling() -> Self {
        Self::new(&[2], 0, &[1]).expect("valid").with_name("doubling")
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a0, a1, .., a_{d-1}`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn a0(&self) -> &BigInt {
        &self.coeffs[0]
    }

    pub fn inhom(&self) -> &BigInt {
        &self.inhom
    }

    /// `R(1), .., R(d)`.
    pub fn initial(&self) -> &[BigInt] {
        &self.initial
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("ilrs:{}", &self.key.0[..12]))
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    pub fn key(&self) -> &SpecKey {
        &self.key
    }

    /// Iterator over `R(1), R(2), ...`, stopping with an error once a term
    /// exceeds the bit budget.
    pub fn terms(&self, budget: Budget) -> Terms<'_> {
        Terms {
            spec: self,
            window: self.initial.iter().cloned().collect(),
            produced: 0,
            budget,
        }
    }

    /// Exact `R(n)` for `n >= 1` by iterating the recurrence.
    pub fn eval_exact(&self, n: u64, budget: &Budget) -> Result<BigInt> {
        if n == 0 {
            return Err(Error::NonPositiveIndex {
                level: 0,
                index: "0".into(),
            });
        }
        if n > budget.steps.max(self.order() as u64) {
            return Err(Error::budget(format!(
                "index {n} exceeds the step budget {}",
                budget.steps
            )));
        }
        let mut terms = self.terms(*budget);
        let mut last = BigInt::zero();
        for _ in 0..n {
            last = terms.next().expect("unbounded iterator")?;
        }
        Ok(last)
    }

    /// Exact `R(i)` for each requested index, iterating once up to the largest.
    pub fn eval_many(&self, indices: &[u64], budget: &Budget) -> Result<Vec<BigInt>> {
        let Some(&max) = indices.iter().max() else {
            return Ok(Vec::new());
        };
        if indices.contains(&0) {
            return Err(Error::NonPositiveIndex {
                level: 0,
                index: "0".into(),
            });
        }
        if max > budget.steps.max(self.order() as u64) {
            return Err(Error::budget(format!(
                "index {max} exceeds the step budget {}",
                budget.steps
            )));
        }
        let mut order: Vec<usize> = (0..indices.len()).collect();
        order.sort_by_key(|&i| indices[i]);
        let mut out = vec![BigInt::zero(); indices.len()];
        let mut terms = self.terms(*budget);
        let mut at = 0u64;
        let mut last = BigInt::zero();
        for i in order {
            while at < indices[i] {
                last = terms.next().expect("unbounded iterator")?;
                at += 1;
            }
            out[i] = last.clone();
        }
        Ok(out)
    }

    /// Exact `R(n)` for an arbitrary-precision index, subject to the budget.
    pub fn eval_exact_big(&self, n: &BigInt, budget: &Budget) -> Result<BigInt> {
        self.eval_exact(index_to_u64(n, 0, budget)?, budget)
    }
}

pub(crate) fn index_to_u64(n: &BigInt, level: usize, budget: &Budget) -> Result<u64> {
    if n.sign() != Sign::Plus {
        return Err(Error::NonPositiveIndex {
            level,
            index: n.to_string(),
        });
    }
    match n.to_u64() {
        Some(v) if v <= budget.steps => Ok(v),
        _ => Err(Error::budget(format!(
            "index with {} bits exceeds the step budget {}",
            n.bits(),
            budget.steps
        ))),
    }
}

/// Streaming exact evaluation of a sequence.
pub struct Terms<'a> {
    spec: &'a IlrsSpec,
    window: VecDeque<BigInt>,
    produced: u64,
    budget: Budget,
}

impl Iterator for Terms<'_> {
    type Item = Result<BigInt>;

    fn next(&mut self) -> Option<Self::Item> {
        let d = self.spec.order();
        let out = if (self.produced as usize) < d {
            self.window[self.produced as usize].clone()
        } else {
            let mut next = self.spec.inhom.clone();
            for (a, r) in self.spec.coeffs.iter().zip(self.window.iter()) {
                if a.is_one() {
                    next += r;
                } else if (-a).is_one() {
                    next -= r;
                } else if !a.is_zero() {
                    next += a * r;
                }
            }
            self.window.pop_front();
            self.window.push_back(next.clone());
            next
        };
        self.produced += 1;
        if out.bits() > self.budget.bits {
            return Some(Err(Error::budget(format!(
                "term {} has {} bits, over the bit budget {}",
                self.produced,
                out.bits(),
                self.budget.bits
            ))));
        }
        Some(Ok(out))
    }
}

/// `f = R0 ∘ R1 ∘ ... ∘ RM`, outermost level first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<IlrsSpec>", into = "Vec<IlrsSpec>")]
pub struct CompositionChain {
    levels: Vec<IlrsSpec>,
}

impl TryFrom<Vec<IlrsSpec>> for CompositionChain {
    type Error = Error;

    fn try_from(levels: Vec<IlrsSpec>) -> Result<Self> {
        CompositionChain::new(levels)
    }
}

impl From<CompositionChain> for Vec<IlrsSpec> {
    fn from(chain: CompositionChain) -> Self {
        chain.levels
    }
}

impl CompositionChain {
    /// Every inner level (index 1 and up) must be reversible; the outermost
    /// level is exempt.
    pub fn new(levels: Vec<IlrsSpec>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptyChain);
        }
        for (j, level) in levels.iter().enumerate().skip(1) {
            if !level.is_reversible() {
                return Err(Error::NotReversible {
                    level: j,
                    name: level.label(),
                    a0: level.a0().to_string(),
                });
            }
        }
        Ok(CompositionChain { levels })
    }

    pub fn single(spec: IlrsSpec) -> Self {
        CompositionChain { levels: vec![spec] }
    }

    pub fn levels(&self) -> &[IlrsSpec] {
        &self.levels
    }

    pub fn outer(&self) -> &IlrsSpec {
        &self.levels[0]
    }

    /// Number of inner levels `M`.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// The inner composition `U = R1 ∘ ... ∘ RM`, or `None` when `M = 0`.
    pub fn inner(&self) -> Option<CompositionChain> {
        (self.levels.len() > 1).then(|| CompositionChain {
            levels: self.levels[1..].to_vec(),
        })
    }

    /// `D = d0 d1 ... dM`.
    pub fn order_product(&self) -> BigUint {
        self.levels
            .iter()
            .map(|l| BigUint::from(l.order()))
            .product()
    }

    pub fn describe(&self) -> String {
        self.levels
            .iter()
            .map(|l| l.label())
            .collect::<Vec<_>>()
            .join(" ∘ ")
    }

    /// Exact `f(n)`, refusing once any intermediate value or index exceeds the
    /// budget.
    pub fn eval_exact(&self, n: &BigInt, budget: &Budget) -> Result<BigInt> {
        let mut value = n.clone();
        for (j, level) in self.levels.iter().enumerate().rev() {
            let idx = index_to_u64(&value, j, budget)?;
            value = level.eval_exact(idx, budget)?;
        }
        Ok(value)
    }

    pub fn eval_exact_u64(&self, n: u64, budget: &Budget) -> Result<BigInt> {
        self.eval_exact(&BigInt::from(n), budget)
    }

    /// Exact values `f(1), .., f(k)`.
    pub fn eval_prefix(&self, k: u64, budget: &Budget) -> Result<Vec<BigInt>> {
        let mut values: Vec<BigInt> = (1..=k).map(BigInt::from).collect();
        for (j, level) in self.levels.iter().enumerate().rev() {
            let idx = values
                .iter()
                .map(|v| index_to_u64(v, j, budget))
                .collect::<Result<Vec<_>>>()?;
            values = level.eval_many(&idx, budget)?;
        }
        Ok(values)
    }

    /// Positivity and monotonicity of `f(1..=k)`. This is finite evidence only:
    /// nothing is claimed beyond the window.
    pub fn check_window(&self, k: u64, budget: &Budget) -> Result<WindowReport> {
        if k < 2 {
            return Err(Error::Invalid("window must contain at least 2 terms".into()));
        }
        let values = self.eval_prefix(k, budget)?;
        Ok(WindowReport::from_values(&values))
    }
}

impl IlrsSpec {
    pub fn check_window(&self, k: u64, budget: &Budget) -> Result<WindowReport> {
        CompositionChain::single(self.clone()).check_window(k, budget)
    }
}

/// Finite-window evidence about a sequence.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window: u64,
    pub all_positive: bool,
    pub strictly_increasing: bool,
    #[serde_as(as = "DisplayFromStr")]
    pub min_value: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub max_value: BigInt,
}

impl WindowReport {
    fn from_values(values: &[BigInt]) -> Self {
        WindowReport {
            window: values.len() as u64,
            all_positive: values.iter().all(|v| v.is_positive()),
            strictly_increasing: values.windows(2).all(|w| w[0] < w[1]),
            min_value: values.iter().min().cloned().unwrap_or_default(),
            max_value: values.iter().max().cloned().unwrap_or_default(),
        }
    }
}
