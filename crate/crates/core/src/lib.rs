//! Texture and deep-feature classification of bone radiographs.
//!
//! The crate covers the whole pipeline: grayscale image handling
//! ([`image`]), traditional texture descriptors ([`texture`]), a
//! data-driven CNN forward pass for deep features ([`cnn`]), filter
//! feature selection ([`select`]), five classifiers ([`classify`]) and a
//! stratified cross-validation harness with reporting ([`eval`]).
//! [`table::FeatureTable`] is the type passed between the stages.

pub mod classify;
pub mod cnn;
pub mod error;
pub mod eval;
pub mod image;
pub mod select;
pub mod table;
pub mod texture;

pub use error::{Error, Result};
pub use image::{GrayImage, QuantizedImage};
pub use table::FeatureTable;
