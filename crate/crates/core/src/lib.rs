//! Completely bounded and diamond norms of linear maps `φ: M_n → M_k`.
//!
//! A linear map between matrix algebras admits a generalized Choi-Kraus
//! representation `φ(X) = Σᵢ AᵢXBᵢ` with no positivity constraint tying the
//! two operator families together. Its completely bounded norm equals the
//! infimum of `‖Σ AᵢAᵢ†‖^½ ‖Σ Bᵢ†Bᵢ‖^½` over all such representations, and
//! the diamond norm of `φ` is the CB norm of the dual map `φ†`.
//!
//! The computation proceeds in two phases:
//!
//! 1. reduce the representation until both operator families are linearly
//!    independent ([`reduction`]), which pins the term count at the tensor
//!    rank of the map;
//! 2. minimize the norm objective over invertible mixing matrices acting on
//!    the reduced families ([`minimizer`]), by seeded random search over
//!    well-conditioned positive matrices with optional derivative-free
//!    refinement.
//!
//! Completely positive maps short-circuit the minimization entirely:
//! `‖φ‖_cb = ‖φ(I)‖` exactly, detected through positivity of the Choi matrix
//! ([`superop`]). Differences of unitary conjugations have a closed form —
//! the diameter of the smallest disc enclosing the spectrum — implemented in
//! [`closedform`] and used throughout the test suite as an independent
//! oracle.

pub mod closedform;
pub mod error;
pub mod minimizer;
pub mod numerics;
pub mod reduction;
pub mod superop;

pub use closedform::Disc;
pub use error::{Error, Result};
pub use minimizer::{BoundsReport, NormEstimate, SearchConfig};
pub use numerics::{CMatrix, CVector, C64};
pub use reduction::ReducedRep;
pub use superop::{ChoiMatrix, GCKRep};
