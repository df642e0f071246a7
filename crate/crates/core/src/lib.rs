pub mod charpoly;
pub mod error;
pub mod green;
pub mod grid;
pub mod models;
pub mod perron;
pub mod quadrature;
pub mod simulate;
pub mod waves;

pub use error::{Error, ErrorClass, Result};
