//! McKean-Vlasov SDEs whose one-dimensional time marginals follow the heat
//! kernel or the Barenblatt solutions of the porous-medium and p-Laplace
//! equations.
//!
//! The crate builds the closed-form solutions ([`analytic`]), turns each
//! Fokker-Planck interpretation into evaluable coefficients ([`coeffs`]),
//! simulates paths ([`sim`]) from reproducible random streams ([`sampler`]),
//! and checks marginals, quadratic variations, covariances and weak-form
//! residuals ([`verify`]). [`particles`] runs frozen-coefficient particle
//! systems and measures their fluctuation variance; [`cli`] is the batch
//! front end behind the `mvsde` binary.

pub mod analytic;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod interp;
pub mod particles;
pub mod quad;
pub mod sampler;
pub mod sim;
pub mod verify;

pub use analytic::{build_solution, FamilyTag, PdeFamily, SelfSimilarSolution};
pub use error::{Error, Result};
