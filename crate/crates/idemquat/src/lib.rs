//! Exact arithmetic for quaternion rings over finite chain rings.
//!
//! The crate decides which elements of H(R) (equivalently, of the 2×2
//! matrix ring when 2 is invertible) are products of idempotents, always
//! producing an explicitly verified two-idempotent witness, and it checks
//! every counting formula it knows against exhaustive brute-force
//! enumeration. Brute force is authoritative: closed forms are treated as
//! hypotheses and the census records which of them survive.

pub mod census;
pub mod chainring;
pub mod cli;
pub mod factorize;
pub mod mat2;
pub mod quaternion;

pub use census::{Caps, CensusError, CensusReport, Target};
pub use chainring::{ChainRing, Element, RingError, RingSpec};
pub use factorize::{MatWitness, QuatWitness};
pub use mat2::{Mat2, Mat2Error, OrbitLabel, OrbitSizeVariant};
pub use quaternion::{QuatError, QuatMatIso, Quaternion};
