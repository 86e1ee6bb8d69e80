//! Text formats: sequence-definition files and certificate documents.

mod document;
mod seqfile;

pub use document::{CertificateDocument, Metadata, VerificationStamp, SCHEMA_VERSION};
pub use seqfile::{parse_poly_coeffs, SequenceFile};
