//! Catalog of integral identities, the expression language they are written
//! in, verification, Fourier coefficients and integer relation search.

pub mod catalog;
pub mod expr;
pub mod fourier;
pub mod pslq;
pub mod verify;

pub use catalog::{Catalog, Identity, Status};
pub use expr::{evaluate, Expr};
pub use fourier::{fourier_coeff, fourier_integral, FourierCoeffs};
pub use pslq::{pslq, Relation, RelationQuery};
pub use verify::{verify, verify_suite, Report};
