//! Finite-partition hidden-variables models of small quantum systems.
//!
//! The crate builds hidden-variables models whose hidden-variable spaces are
//! finite partitions, so every integral is an exact finite sum, and audits
//! them: Born reproduction, mixed versus segregated structure, composites of
//! several systems, antidistinguishing measurements, built-in inefficiency
//! and the failure of additivity for commuting projectors.
//!
//! ```
//! use hvkit::hvframe::{check_born_reproduction, classify};
//! use hvkit::qcore::OutcomeSet;
//! use hvkit::toymodels::{build_mixed_toy, reference_states, ToyObservable};
//!
//! let toy = build_mixed_toy(&reference_states(), &ToyObservable::paulis())?;
//! let r = check_born_reproduction(&toy, &"plus".into(), &"Z".into(), &OutcomeSet::singleton("+1"))?;
//! assert!(r <= hvkit::TOL);
//! assert_eq!(classify(&toy).to_string(), "(mixed, state-dependent, deterministic)");
//! # Ok::<(), hvkit::Error>(())
//! ```

pub mod composer;
pub mod demo;
pub mod error;
pub mod files;
pub mod hvframe;
pub mod pbrcheck;
pub mod qcore;
pub mod report;
pub mod toymodels;
pub mod transforms;

pub use error::{Error, Result};

/// Absolute tolerance used for every floating-point comparison.
pub const TOL: f64 = 1e-12;

// The guide's listings run as doctests, one module per chapter so a failure
// points at its chapter.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/toys.md")]
    mod toys {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/composites.md")]
    mod composites {}
    #[doc = include_str!("../../../book/src/antidistinguishing.md")]
    mod antidistinguishing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
