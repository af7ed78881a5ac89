//! Small numerical kernels shared by the solvers.

pub mod banded;
pub mod ode;
pub mod quad;
pub mod roots;

pub use banded::{BandedLu, BandedMatrix, SingularMatrix};
pub use ode::{DormandPrince, OdeError};
pub use quad::GaussLegendre;
pub use roots::{brent, RootError};
