//! Sum-of-divisors toolkit: σ by trial division and by sieve, exact
//! theta-series arithmetic for triangular-number counts, residual checks for
//! recurrences linking σ at odd arguments, and scanners for congruences of
//! σ summed along triangular shifts.

pub mod cli;
pub mod congruences;
pub mod divisor;
pub mod error;
mod par;
pub mod qseries;
pub mod recurrences;

pub use congruences::{
    classic_check, mod4_sum, mod5_sum, scan, scan_blocks, ScanKind, ScanReport, Violation,
};
pub use divisor::{
    divisor_sum, g_value, is_triangular, max_tri_index, sigma_even, sigma_odd, triangular, GValue,
    SigmaTable, TriangularIndex, MAX_TABLE_LIMIT,
};
pub use error::{Error, Result};
pub use qseries::{
    psi_product_series, psi_series, t_k_table, verify_gf_identity, TkTable, TruncatedSeries,
};
pub use recurrences::{
    batch_verify, div1_residual, div2_residual, div3_residual, sigma_odd_via_div1,
    tk_recurrence_residual, Failure, Identity, RecurrenceReport, Tables, Verifier,
};
