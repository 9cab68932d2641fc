//! Numerics for semigroups of Ruelle-expanding circle maps.
//!
//! The library is organized around a family of full-branch expanding maps
//! `T_1, ..., T_k` on the circle with Hölder potentials `φ_1, ..., φ_k`.
//! Finite words over the alphabet compose maps and potentials, giving the
//! weighted transfer operators
//!
//! ```text
//! L_v(f)(x) = Σ_{T_v(y) = x} e^{φ_v(y)} f(y)
//! ```
//!
//! and their normalized quotients
//!
//! ```text
//! P_u^v(f) = L_v(f · L_u(1)) / L_{uv}(1),
//! ```
//!
//! which fix constants, compose along words, and whose duals contract the
//! Vaserstein metric built from a truncated Hölder distance. Everything
//! downstream — quenched conformal and equilibrium measures, annealed
//! operator asymptotics over a Markov environment, martingale-based limit
//! theorem diagnostics, Bowen-equation dimension for non-autonomous IFS,
//! and the equilibrium-state boundary metrics — is built from those two
//! displays, discretized on a uniform circle grid with piecewise-linear
//! interpolation.
//!
//! Modules:
//! - [`dynamics`]: systems, words, inverse-branch enumeration, metric constants;
//! - [`transfer`]: grid functions, `L_v`, `P_u^v`, Hölder seminorms;
//! - [`measures`]: grid measures, exact Vaserstein solvers, dual iteration,
//!   quenched conformal/equilibrium measures, contraction-rate estimation;
//! - [`annealed`]: Markov environments, averaged operators by dynamic
//!   programming, the `ι`-eigenproblem, equidistribution;
//! - [`stats`]: martingale coboundary decomposition, CLT and correlation checks;
//! - [`ncifs`]: non-autonomous conformal IFS on `[0,1]` and the Bowen root;
//! - [`boundary`]: word metric, expansion coefficient, equilibrium distance;
//! - [`fixtures`]: the built-in reference systems used across the test suite.

pub mod annealed;
pub mod boundary;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod fixtures;
pub mod grid;
pub mod measures;
pub mod ncifs;
pub mod ot;
pub mod stats;
pub mod transfer;

pub use error::LabError;

/// Library result alias.
pub type Result<T> = std::result::Result<T, LabError>;
