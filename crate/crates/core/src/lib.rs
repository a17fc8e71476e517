//! Two-spinor geometry, Grassmann-graded tensor contraction and numerical
//! certification of electroweak invariant identities.

pub mod algebra;
pub mod tensor;
pub mod spinor;
pub mod ew;
pub mod invariants;
pub mod dsl;
pub mod cli;
