//! Acceptance battery for `secure-mimo`; see `tests/acceptance.rs`.
