use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the prime-free interval around `|f(n)|`, main term only:
/// `ln n / (2D)`. The error term carries an ineffective constant and is not
/// estimated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub main_term: f64,
    /// `1 / (2D)` exactly.
    pub c_fraction: Ratio<i64>,
    pub epsilon: f64,
    /// `1 / (2D) − ε`.
    pub c: f64,
    pub main_term_only: bool,
}

impl DeltaEstimate {
    /// `c` to four decimals.
    pub fn c_display(&self) -> String {
        format!("{:.4}", self.c)
    }
}

/// Natural log of an arbitrary-size positive integer.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn delta_estimate(n: &BigUint, d: u64, epsilon: f64) -> Result<DeltaEstimate> {
    if *n < BigUint::from(3u32) {
        return Err(Error::Invalid("delta needs n >= 3".into()));
    }
    let two_d = d
        .checked_mul(2)
        .and_then(|x| i64::try_from(x).ok())
        .filter(|&x| x > 0)
        .ok_or_else(|| Error::Invalid(format!("order product D = {d} out of range")))?;
    Ok(DeltaEstimate {
        main_term: ln_big(n) / two_d as f64,
        c_fraction: Ratio::new(1, two_d),
        epsilon,
        c: 1.0 / two_d as f64 - epsilon,
        main_term_only: true,
    })
}

/// `1/(k·x) − ε` for an order product `D = (k/2)·x` with one unknown factor `x`,
/// such as `x = deg α` under a fixed chain of known orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicConstant {
    pub coefficient: u64,
    pub symbol: String,
}

impl SymbolicConstant {
    /// Constant for `D = known · symbol`.
    pub fn for_known_orders(known: u64, symbol: impl Into<String>) -> Self {
        SymbolicConstant {
            coefficient: 2 * known,
            symbol: symbol.into(),
        }
    }

    /// The exact fraction `1/(k·x)` at `symbol = x`.
    pub fn fraction_at(&self, x: u64) -> Ratio<i64> {
        Ratio::new(1, (self.coefficient * x) as i64)
    }
}

impl fmt::Display for SymbolicConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/({}{}) - ε", self.coefficient, self.symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_fibonacci_constant() {
        let e = delta_estimate(&BigUint::from(1000u32), 8, 1e-4).unwrap();
        assert_eq!(e.c_fraction, Ratio::new(1, 16));
        assert_eq!(e.c_display(), "0.0624");
        assert!(e.main_term_only);
    }

    #[test]
    fn main_term() {
        // n ≈ e^2 is not an integer; use the identity delta·2D/ln n = 1 instead.
        for (n, d) in [(7u64, 1u64), (1_000_003, 4), (u64::MAX, 12)] {
            let e = delta_estimate(&BigUint::from(n), d, 0.0).unwrap();
            let ratio = e.main_term * 2.0 * d as f64 / (n as f64).ln();
            assert!((ratio - 1.0).abs() < 1e-12);
        }
        let huge = BigUint::from(1u32) << 10_000u32;
        let e = delta_estimate(&huge, 1, 0.0).unwrap();
        assert!((e.main_term - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(delta_estimate(&BigUint::from(2u32), 1, 0.0).is_err());
    }

    #[test]
    fn floor_of_double_fibonacci() {
        let s = SymbolicConstant::for_known_orders(4, "d");
        assert_eq!(s.to_string(), "1/(8d) - ε");
        for d in [2u64, 3, 4] {
            let e = delta_estimate(&BigUint::from(100u32), 4 * d, 1e-4).unwrap();
            assert_eq!(e.c_fraction, s.fraction_at(d));
        }
    }
}
