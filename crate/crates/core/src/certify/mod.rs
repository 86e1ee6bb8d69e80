//! Compositeness certificates and their verification.

mod divisibility;
mod estimates;
mod interval;
mod pisot;
mod size;
mod spf;
mod verify;

use serde::{Deserialize, Serialize};

pub use divisibility::{
    certify_divisibility, DivisibilityCertificate, FactorEntry, PeriodCombine, StartEvidenceSummary,
};
pub use estimates::{delta_estimate, ln_big, DeltaEstimate, SymbolicConstant};
pub use interval::{certify_prime_free_interval, PrimorialWitness, PrimeFreeIntervalCertificate};
pub use pisot::{certify_pisot_floor, FloorCheck, GrowthEvidence, PisotFloorCertificate};
pub use size::{size_evidence, SizeEvidence, INDEX_CAP};
pub use spf::{smallest_prime_factor_chain, FactorFound, FactorMethod};
pub use verify::{independent_residue, verify_certificate, CheckStatus, ClaimCheck, VerificationReport};

pub use crate::primes::theta;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "certificate", rename_all = "snake_case")]
pub enum Certificate {
    Divisibility(DivisibilityCertificate),
    PrimeFreeInterval(PrimeFreeIntervalCertificate),
    PisotFloor(PisotFloorCertificate),
}

impl Certificate {
    pub fn claim(&self) -> String {
        match self {
            Certificate::Divisibility(c) => c.claim(),
            Certificate::PrimeFreeInterval(c) => c.claim(),
            Certificate::PisotFloor(c) => c.claim(),
        }
    }

    pub fn divisibility(&self) -> &DivisibilityCertificate {
        match self {
            Certificate::Divisibility(c) => c,
            Certificate::PrimeFreeInterval(c) => &c.divisibility,
            Certificate::PisotFloor(c) => &c.divisibility,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Certificate::Divisibility(_) => "divisibility",
            Certificate::PrimeFreeInterval(_) => "prime_free_interval",
            Certificate::PisotFloor(_) => "pisot_floor",
        }
    }
}
