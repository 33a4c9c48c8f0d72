//! Small numerical kernels shared by the solvers.

pub mod ode;
pub mod quad;
pub mod roots;
pub mod tridiag;
