use thiserror::Error;

/// The four cells of a 2×2 table that must be nonzero for the log relative risk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableCell {
    TreatmentEvents,
    TreatmentNonEvents,
    ControlEvents,
    ControlNonEvents,
}

impl std::fmt::Display for TableCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TableCell::TreatmentEvents => "events in the treatment group",
            TableCell::TreatmentNonEvents => "non-events in the treatment group",
            TableCell::ControlEvents => "events in the control group",
            TableCell::ControlNonEvents => "non-events in the control group",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder did not converge within {max_iter} iterations")]
    Convergence { max_iter: usize },

    #[error("degenerate 2x2 table: zero {0}")]
    DegenerateTable(TableCell),

    #[error("not significant at alpha = {}: {detail}", rounded(*.alpha))]
    NotSignificant { alpha: f64, detail: String },

    #[error("no solution below 1: {0}")]
    NoSolution(String),
}

/// Drops representation noise such as `1 − 0.95 = 0.050000000000000044`.
fn rounded(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {x}")))
    }
}
