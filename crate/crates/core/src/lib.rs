//! su(2) intelligent states: eigenstates of `L_x - i alpha L_y` that saturate
//! `dL_x dL_y >= |<L_z>|/2`, built by coupling two spin coherent states.
//!
//! ```
//! use su2_intelligent::{intelligent_state, report, Branch, HalfInt, IntelligentSpec};
//!
//! let spec = IntelligentSpec::new(HalfInt::from_twice(3), HalfInt::ONE, 1.1, Branch::Y)?;
//! let ket = intelligent_state(&spec)?;
//! assert_eq!(ket.amplitudes().len(), 6);
//!
//! let r = report(&spec)?;
//! assert!((r.product - r.rhs).abs() < 1e-10);
//! # Ok::<(), su2_intelligent::Error>(())
//! ```

pub mod construct;
pub mod error;
pub mod linalg;
pub mod observables;
pub mod repcore;
pub mod wigner;

pub use construct::{
    intelligent_state, kappa_closed, kappa_sum, null_space_state, poly_oracle, tensor_oracle, Branch,
    IntelligentSpec,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMat, ComplexVec};
pub use observables::{report, ObservableReport};
pub use repcore::{HalfInt, Ket, OperatorMatrix};

/// Code blocks of the guide under `book/`, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/conventions.md")]
    mod conventions {}
    #[doc = include_str!("../../../book/src/spin-half.md")]
    mod spin_half {}
    #[doc = include_str!("../../../book/src/construction.md")]
    mod construction {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
