pub mod elliptic;
pub mod error;
pub mod hyper;
pub mod identities;
pub mod moments;
pub mod mp;
pub mod quad;

pub use error::{Error, Result};
pub use mp::{BigReal, PrecisionContext};
