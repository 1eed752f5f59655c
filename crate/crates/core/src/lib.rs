pub mod error;
pub mod poly;
pub mod scalar;

pub use error::{Error, Result};
pub use poly::{homogenize, parse_poly, poly_compose, Degree, PolyMap, Polynomial, Vars};
pub use scalar::Scalar;
pub mod automap;
pub mod blowup;
pub mod lattice;
pub mod picard;
pub mod simplex;
