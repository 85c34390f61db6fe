//! File formats: criteria spreadsheet, report JSON, overlay PNG and run configuration.

pub mod config;
pub mod overlay;
pub mod report;
pub mod spreadsheet;
