//! Acceptance checks for `picard`; see `tests/acceptance.rs`.
