//! Scenario configuration, deterministic experiment runner, event-file
//! persistence, and result export for the upconversion simulator.

pub mod config;
pub mod phes;
pub mod report;
pub mod run;
