//! Error type shared by the solver and diagnostic paths.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is outside its documented domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Initial data rejected by an admissibility window; the message names
    /// the admissible interval.
    #[error("inadmissible initial data: {0}")]
    InadmissibleData(String),

    /// A series handed to a tilde-basis routine is not in the span of the
    /// basis (the conversion recurrence does not terminate).
    #[error("series outside the tilde span: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    OutsideSpan { residual: f64, tolerance: f64 },

    /// The blow-up guard tripped during time integration.
    #[error("blow-up guard tripped at t = {t}: {quantity} = {value:.3e}")]
    BlowupGuard {
        t: f64,
        quantity: &'static str,
        value: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Parse(String),
}
