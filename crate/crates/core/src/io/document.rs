use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::certify::{CheckStatus, Certificate, VerificationReport};
use crate::context::Config;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub tool_version: String,
    #[serde_as(as = "DisplayFromStr")]
    pub created_unix: u64,
    /// Budgets, evidence windows and mode flags used for construction.
    pub config: Config,
    /// Irreducibility of the minimal polynomial as asserted by the caller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreducibility_asserted: Option<bool>,
    pub claim: String,
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationStamp {
    #[serde_as(as = "DisplayFromStr")]
    pub n_checks: u64,
    pub passed: bool,
    #[serde_as(as = "DisplayFromStr")]
    pub pass: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub fail: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub skipped: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub verified_unix: u64,
}

impl VerificationStamp {
    pub fn from_report(report: &VerificationReport, n_checks: u64) -> Self {
        VerificationStamp {
            n_checks,
            passed: report.passed(),
            pass: report.count(CheckStatus::Pass),
            fail: report.count(CheckStatus::Fail),
            skipped: report.count(CheckStatus::Skipped),
            verified_unix: now_unix(),
        }
    }
}

/// A certificate as written to disk.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    #[serde_as(as = "DisplayFromStr")]
    pub schema_version: u32,
    #[serde(flatten)]
    pub certificate: Certificate,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verification: Vec<VerificationStamp>,
}

impl CertificateDocument {
    pub fn new(certificate: Certificate, config: &Config) -> Self {
        let irreducibility_asserted = match &certificate {
            Certificate::PisotFloor(c) => Some(c.poly.irreducible_asserted()),
            _ => None,
        };
        CertificateDocument {
            schema_version: SCHEMA_VERSION,
            metadata: Metadata {
                tool: "ilrs".into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                created_unix: now_unix(),
                config: config.clone(),
                irreducibility_asserted,
                claim: certificate.claim(),
            },
            certificate,
            verification: Vec::new(),
        }
    }

    pub fn stamp(&mut self, report: &VerificationReport, n_checks: u64) {
        self.verification.push(VerificationStamp::from_report(report, n_checks));
    }

    /// Pretty-printed JSON with a trailing newline. Parsing this and
    /// rendering again yields the same text.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Probe {
            schema_version: Option<String>,
        }
        let probe: Probe = serde_json::from_str(text)?;
        match probe.schema_version.as_deref() {
            Some(v) if v == SCHEMA_VERSION.to_string() => {}
            Some(v) => return Err(Error::Invalid(format!("unsupported schema version {v}, expected {SCHEMA_VERSION}"))),
            None => return Err(Error::Invalid("missing schema_version".into())),
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_canonical_json())?;
        Ok(())
    }
}
