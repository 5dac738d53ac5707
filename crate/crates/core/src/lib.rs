//! Numerical laboratory for moduli of flat SU(n) connections on a nodal
//! degeneration of genus-g curves.
//!
//! The crate is organised bottom-up:
//!
//! * [`lie`]: certified numerics on SU(n) and its diagonal torus.
//! * [`alcove`]: the weight simplex, its faces and the torsion shifts on the
//!   boundary `α₁ = αₙ + 1`.
//! * [`local_model`]: the model flat connection on the quadrics `xy = t`,
//!   parallel transport, gauge change and residues in blow-up charts.
//! * [`rep_variety`]: representation varieties given by the relation
//!   `(∏[Cᵢ,Dᵢ]) B₁ A B₁⁻¹ B₂ A⁻¹ B₂⁻¹ = 1`, their symmetry groups, a
//!   Riemannian least-squares solver and tangent dimension counts.
//! * [`plucker`]: decomposable framing forms at the two marked fibres.
//! * [`trinion`]: trivalent pants graphs, rank-2 lattice point counts and the
//!   torus-quotient dimension ledger.
//! * [`cli`]: the experiment runner behind the `moduli` binary.
//!
//! Runnable walkthroughs of every capability live in `examples/`.

pub mod alcove;
pub mod cli;
pub mod error;
pub mod io;
pub mod lie;
pub mod local_model;
pub mod plucker;
pub mod rep_variety;
pub mod trinion;

pub use error::{Error, Result};
