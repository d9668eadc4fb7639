//! Front-end companion to `qctlii-core`: random instance generators and the
//! self-test suites behind `qctlii selftest`, plus the binary itself.

pub mod gen;
pub mod suites;
