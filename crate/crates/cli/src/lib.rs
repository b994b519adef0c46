//! Command-line surface of `plap`: derived constants, trajectory CSV files, SVG portraits,
//! the critical exponent and regime reports.

pub mod commands;
pub mod config;
pub mod format;
pub mod output;
pub mod portrait;

/// A bad invocation; reported with exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit code for a failed run: 2 for invalid parameters and inadmissible requests, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<plap_core::Error>() {
            if matches!(e, plap_core::Error::InvalidParams(_) | plap_core::Error::NotApplicable(_)) {
                return 2;
            }
        }
    }
    1
}
