//! Root isolation for monic integer polynomials.
//!
//! Roots are approximated by Durand–Kerner (Weierstrass) iteration, first in
//! `f64` and then at the working precision of `T`. Each approximation `z_i`
//! gets the radius `d·|W_i|` with `W_i = p(z_i) / ∏_{j≠i}(z_i − z_j)`, inflated
//! for rounding. When those disks are pairwise disjoint each one contains
//! exactly one root.

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct RootDisk<T> {
    pub center: Complex<T>,
    pub radius: T,
    /// The enclosed root is provably real.
    pub real: bool,
}

impl<T: Real> RootDisk<T> {
    /// Interval `[lo, hi]` containing the modulus of the enclosed root.
    pub fn modulus_bounds(&self, u: &T) -> (T, T) {
        let m = self.center.norm_sqr().sqrt();
        let slack = m.clone() * T::from_u8(4).expect("small") * u.clone() + self.radius.clone();
        let lo = m.clone() - slack.clone();
        let lo = if lo < T::zero() { T::zero() } else { lo };
        (lo, m + slack)
    }

    fn disjoint(&self, other_center: &Complex<T>, other_radius: &T) -> bool {
        let diff = self.center.clone() - other_center.clone();
        let reach = self.radius.clone() + other_radius.clone();
        diff.norm_sqr() > reach.clone() * reach
    }
}

fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

fn horner<T: Real>(coeffs: &[Complex<T>], z: &Complex<T>) -> Complex<T> {
    let mut acc = cplx(T::zero());
    for c in coeffs.iter().rev() {
        acc = acc * z.clone() + c.clone();
    }
    acc
}

/// One Weierstrass sweep; returns the largest correction relative to
/// `1 + |z_i|` (squared).
fn sweep<T: Real>(coeffs: &[Complex<T>], z: &mut [Complex<T>]) -> T {
    let mut worst = T::zero();
    for i in 0..z.len() {
        let mut den = cplx(T::one());
        for j in 0..z.len() {
            if i != j {
                den = den * (z[i].clone() - z[j].clone());
            }
        }
        if den.is_zero() {
            // Coincident approximations; nudge apart and keep iterating.
            z[i] = z[i].clone() + Complex::new(T::pow2(-20), T::pow2(-21));
            worst = T::one();
            continue;
        }
        let w = horner(coeffs, &z[i]) / den;
        let scale = T::one() + z[i].norm_sqr();
        let rel = w.norm_sqr() / scale;
        if rel > worst {
            worst = rel;
        }
        z[i] = z[i].clone() - w;
    }
    worst
}

fn f64_seeds(coeffs: &[BigInt]) -> Vec<Complex<f64>> {
    let d = coeffs.len() - 1;
    let c: Vec<Complex<f64>> = coeffs
        .iter()
        .map(|x| Complex::new(x.to_f64().unwrap_or(f64::MAX), 0.0))
        .collect();
    let bound = 1.0
        + c[..d]
            .iter()
            .map(|x| x.re.abs())
            .fold(0.0f64, f64::max)
            .min(1e150);
    let mut z: Vec<Complex<f64>> = (0..d)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / d as f64 + 0.4;
            Complex::from_polar(bound * 0.9, angle)
        })
        .collect();
    for _ in 0..2000 {
        if sweep(&c, &mut z) < 1e-30 {
            break;
        }
    }
    z
}

/// Isolates all roots of the monic polynomial `coeffs[0] + coeffs[1] X + ⋯ + X^d`
/// at `prec` bits (ignored by `f64`).
///
/// Fails with [`Error::PrecisionInsufficient`] if the inclusion disks overlap,
/// which happens for repeated or very close roots.
pub fn isolate_roots<T: Real>(coeffs: &[BigInt], prec: u32) -> Result<Vec<RootDisk<T>>> {
    let d = coeffs.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| {
        Error::Invalid("polynomial must have degree at least 1".into())
    })?;
    if coeffs[d] != BigInt::from(1) {
        return Err(Error::Invalid("polynomial must be monic".into()));
    }
    let u = T::unit_roundoff(prec);
    if d == 1 {
        let root = T::from_int(&-coeffs[0].clone(), prec);
        let radius = root.abs() * u.clone() * T::from_u8(2).expect("small");
        return Ok(vec![RootDisk {
            center: cplx(root),
            radius,
            real: true,
        }]);
    }

    let c: Vec<Complex<T>> = coeffs.iter().map(|x| cplx(T::from_int(x, prec))).collect();
    let mut z: Vec<Complex<T>> = f64_seeds(coeffs)
        .into_iter()
        .map(|s| Complex::new(T::from_f64_prec(s.re, prec), T::from_f64_prec(s.im, prec)))
        .collect();
    let target = u.clone() * u.clone() * T::from_u32(1 << 16).expect("small");
    for _ in 0..200 {
        if sweep(&c, &mut z) <= target {
            break;
        }
    }

    let dd = T::from_usize(d).expect("small");
    let slack = T::from_usize(16 * d + 16).expect("small") * u.clone();
    let abs_coeffs: Vec<T> = c.iter().map(|x| x.re.abs()).collect();
    let mut disks = Vec::with_capacity(d);
    for i in 0..d {
        let zi_abs = z[i].norm_sqr().sqrt();
        let mut mag = T::zero();
        for a in abs_coeffs.iter().rev() {
            mag = mag * zi_abs.clone() + a.clone();
        }
        let value = horner(&c, &z[i]).norm_sqr().sqrt();
        let num = value + mag * slack.clone();
        let mut den = cplx(T::one());
        for j in 0..d {
            if i != j {
                den = den * (z[i].clone() - z[j].clone());
            }
        }
        let den_lo = den.norm_sqr().sqrt() * (T::one() - slack.clone());
        if den_lo <= T::zero() {
            return Err(Error::PrecisionInsufficient(
                "root approximations coincide".into(),
            ));
        }
        let radius = dd.clone() * num / den_lo * (T::one() + slack.clone());
        disks.push(RootDisk {
            center: z[i].clone(),
            radius,
            real: false,
        });
    }

    for i in 0..d {
        for j in i + 1..d {
            if !disks[i].disjoint(&disks[j].center, &disks[j].radius) {
                return Err(Error::PrecisionInsufficient(format!(
                    "inclusion disks {i} and {j} overlap at {prec} bits"
                )));
            }
        }
    }
    for i in 0..d {
        let on_axis = disks[i].center.im.abs() <= disks[i].radius;
        let mirror = disks[i].center.conj();
        let r = disks[i].radius.clone();
        let lonely = (0..d)
            .filter(|&j| j != i)
            .all(|j| disks[j].disjoint(&mirror, &r));
        disks[i].real = on_axis && lonely;
    }
    Ok(disks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::BigFloat;
    use num_traits::One;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn contains<T: Real>(d: &RootDisk<T>, re: f64, im: f64) -> bool {
        let dr = d.center.re.to_f64_lossy() - re;
        let di = d.center.im.to_f64_lossy() - im;
        (dr * dr + di * di).sqrt() <= d.radius.to_f64_lossy() + 1e-12
    }

    #[test]
    fn golden_ratio_roots() {
        let p = big(&[-1, -1, 1]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let disks = isolate_roots::<f64>(&p, 53).unwrap();
        assert!(disks.iter().any(|d| d.real && contains(d, phi, 0.0)));
        assert!(disks.iter().any(|d| d.real && contains(d, 1.0 - phi, 0.0)));
        let disks = isolate_roots::<BigFloat>(&p, 256).unwrap();
        for d in &disks {
            assert!(d.real);
            assert!(d.radius < BigFloat::pow2(-200));
        }
        let top = disks
            .iter()
            .map(|d| d.center.re.clone())
            .fold(BigFloat::from_f64_prec(-10.0, 256), BigFloat::max_of);
        assert!(top.to_decimal(30).starts_with("1.618033988749894848204586834365"));
    }

    #[test]
    fn complex_pair_and_unit_circle() {
        // X^2 + 1: roots ±i, neither real.
        let disks = isolate_roots::<BigFloat>(&big(&[1, 0, 1]), 128).unwrap();
        assert!(disks.iter().all(|d| !d.real));
        assert!(disks.iter().any(|d| contains(d, 0.0, 1.0)));
        let u = BigFloat::unit_roundoff(128);
        for d in &disks {
            let (lo, hi) = d.modulus_bounds(&u);
            assert!(lo <= BigFloat::one() && BigFloat::one() <= hi);
            assert!(hi - lo < BigFloat::pow2(-100));
        }
    }

    #[test]
    fn repeated_root_is_reported() {
        // (X - 1)^2
        let r = isolate_roots::<f64>(&big(&[1, -2, 1]), 53);
        assert!(matches!(r, Err(Error::PrecisionInsufficient(_))));
    }

    #[test]
    fn degree_one_and_validation() {
        let d = isolate_roots::<BigFloat>(&big(&[-2, 1]), 64).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d[0].real && contains(&d[0], 2.0, 0.0));
        assert!(isolate_roots::<f64>(&big(&[1, 2]), 53).is_err());
        assert!(isolate_roots::<f64>(&big(&[1]), 53).is_err());
    }

    #[test]
    fn product_of_roots_matches_constant_term() {
        // X^4 - X^3 - X^2 - X + 1 (ascending: 1, -1, -1, -1, 1)
        let disks = isolate_roots::<BigFloat>(&big(&[1, -1, -1, -1, 1]), 200).unwrap();
        let mut prod = Complex::new(BigFloat::one(), BigFloat::zero());
        for d in &disks {
            prod = prod * d.center.clone();
        }
        assert!((prod.re - BigFloat::one()).abs() < BigFloat::pow2(-150));
        assert!(prod.im.abs() < BigFloat::pow2(-150));
        assert_eq!(disks.iter().filter(|d| d.real).count(), 2);
    }
}
