pub mod analysis_props;
pub mod combinatorics;
pub mod error;
pub mod functionals;
pub mod qspecial;
pub mod series_cm;

pub use error::{DomainError, Error, Result};
