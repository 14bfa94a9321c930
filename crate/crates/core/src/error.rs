//! Error type shared by all modules.

use crate::eigenbasis::{BasisId, DomainKind};
use crate::final_value::CompatibilityReport;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, FvpError>;

#[derive(Debug, Error)]
pub enum FvpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis mismatch: expected {expected:?}, got {found:?}")]
    BasisMismatch { expected: BasisId, found: BasisId },

    /// Raised when applying `e^{tA}` would overflow: the numerical signature
    /// of a vector outside the domain of the inverse semigroup.
    #[error("mode {mode}: log-amplification {log_amplification:.3} exceeds cap {log_cap}")]
    Overflow {
        /// 1-based mode index.
        mode: usize,
        log_amplification: f64,
        log_cap: f64,
    },

    #[error("form is not elliptic: lower bound m(A) = {m_a:.6e} <= 0")]
    NotElliptic { m_a: f64 },

    #[error("operation not supported on {0:?} domains")]
    UnsupportedDomain(DomainKind),

    /// Backward solve refused: the final data fail the compatibility
    /// condition. The full per-mode ledger is attached.
    #[error("final data incompatible (worst mode {}, log-amplification {:.3})",
            report.worst_mode, report.worst_log_amplification)]
    Incompatible { report: Box<CompatibilityReport> },
}

impl FvpError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        FvpError::InvalidArgument(msg.into())
    }
}
