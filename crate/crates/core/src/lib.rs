//! Periods of inhomogeneous linear recurrences modulo `q`, period towers for
//! iterated compositions, Pisot/Salem trace sequences, and verifiable
//! compositeness certificates.
//!
//! Root isolation and classification are generic over [`scalar::Real`]; the
//! aliases below fix the two scalar types that ship with the crate.

pub mod cache;
pub mod certify;
pub mod context;
pub mod error;
pub mod ilrs;
pub mod io;
pub mod modular;
pub mod primes;
pub mod roots;
pub mod scalar;
pub mod tower;
pub mod trace;

pub use certify::{
    certify_divisibility, certify_pisot_floor, certify_prime_free_interval, delta_estimate,
    verify_certificate, Certificate, VerificationReport,
};
pub use context::{Config, Context};
pub use error::{Error, Result};
pub use ilrs::{Budget, CompositionChain, IlrsSpec};
pub use io::{CertificateDocument, SequenceFile};
pub use modular::{find_period, PeriodInfo};
pub use primes::theta;
pub use scalar::{Ball, BigFloat, Real};
pub use tower::{chain_period, eval_chain_mod, TowerReduction};
pub use trace::{classify, floor_alpha_pow, offset_bound, trace_ilrs, Kind, MinPoly, PisotSalem};

/// Complex ball over machine doubles.
pub type Ball64 = Ball<f64>;
/// Complex ball over arbitrary-precision binary floats.
pub type BigBall = Ball<BigFloat>;
/// Isolated root over machine doubles, good for low-degree exploration.
pub type RootDisk64 = roots::RootDisk<f64>;
/// Isolated root at full working precision.
pub type BigRootDisk = roots::RootDisk<BigFloat>;
/// Classification with the disks computed over [`BigFloat`].
pub type BigClassified = trace::Classified<BigFloat>;
/// Exact constants such as `1/(2D)`.
pub type Rational = num_rational::Ratio<i64>;
