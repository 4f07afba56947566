//! Odd-dimensional unitary groups `U_{2n+1}(R, Delta)` over finite
//! commutative rings with involution, at desk scale.
//!
//! The crate instantiates Hermitian form rings, odd form parameters and odd
//! form ideals, builds elementary transvections and verifies their relation
//! calculus, runs packed-GF(2) subgroup closures and normal closures, and
//! computes the lower/upper congruence levels of a subgroup together with
//! the sandwich inclusions that relate them.

pub mod error;
pub mod formideal;
pub mod heisenberg;
pub mod levels;
pub mod relations;
pub mod report;
pub mod packed;
pub mod proofcheck;
pub mod ring;
pub mod rng;
pub mod subgroup;
pub mod unitary;

pub use error::{Error, Result};
pub use formideal::{Ideal, OddFormIdeal};
pub use heisenberg::{FormParam, HeisElem, Twist};
pub use packed::Gf2Mat;
pub use ring::{contexts, HermitianCtx, InvolutionKind, RingElement, RingKind, RingSpec};
pub use subgroup::GroupSet;
pub use unitary::{UMatrix, Vector};
