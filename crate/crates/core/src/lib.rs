//! Dual complexes of incidence structures, their homology, fundamental
//! groups, coverings and quotients by finite group actions.

pub mod action;
pub mod cli;
pub mod complex;
pub mod covering;
pub mod error;
pub mod homology;
pub mod incidence;
pub mod matrix;
pub mod mckay;
pub mod modular;
pub mod pi1;
pub mod report;

pub use error::{Error, Result};
