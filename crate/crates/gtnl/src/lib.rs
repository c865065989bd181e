//! Std companion to `gtnl-core`: facet files, parameter sweeps and the
//! error-to-exit-code mapping used by the `gtnl` binary.

pub mod facet_file;
pub mod scan;

pub use gtnl_core as core;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Exit code for a core error: bracketing and degenerate-event failures are
/// numerical, everything else is invalid input.
pub fn core_exit_code(e: &gtnl_core::Error) -> i32 {
    use gtnl_core::Error::*;
    match e {
        Bracket { .. } | NullOutcome { .. } | DegenerateOutcome { .. } => EXIT_NUMERICAL,
        NonFinite(what) if what.starts_with("objective") => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

pub fn scan_exit_code(e: &scan::ScanError) -> i32 {
    use scan::ScanError::*;
    match e {
        Config(_) | EmptyGrid(_) | BadGrid { .. } => EXIT_VALIDATION,
        Core(c) | Point { source: c, .. } => core_exit_code(c),
        Facets(f) => facet_exit_code(f),
        Io { .. } | Csv(_) => EXIT_IO,
    }
}

pub fn facet_exit_code(e: &facet_file::FacetFileError) -> i32 {
    match e {
        facet_file::FacetFileError::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}
