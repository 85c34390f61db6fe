//! Explainable quality assessment of crown-rump-length (CRL) ultrasound views.
//!
//! Given a grayscale scan and a segmentation mask (head, body, palate and
//! chin-chest gap), [`criteria::assess`] checks seven view-quality criteria,
//! reports the evidence behind each decision and accepts the view when more
//! than three of them pass. [`phantom`] renders synthetic scenes with known
//! outcomes for verification.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod raster;

pub use criteria::{assess, AssessConfig, CriteriaReport, CriterionResult};
pub use error::{Error, Result};
pub use geometry::{fit_crl_line, CrlLine, Point};
pub use raster::{GrayImage, Label, LabelMask};
