//! Configuration, orchestration and file output for `fastlight-core`.

pub mod config;
pub mod csv;
pub mod error;
pub mod manifest;
pub mod parallel;
pub mod run;
