//! Simulation and optimization of links assisted by reconfigurable
//! intelligent surfaces (RIS).
//!
//! The crate covers statistical channel samplers, a physical per-unit
//! scattering model, discrete phase-shift optimizers, space-time coded
//! surfaces and scenario-level experiments (link budgets, coverage maps,
//! imaging and multi-hop chains).
//!
//! ```
//! use num_complex::Complex64;
//! use ris_sim::beamforming::{das_opt, brute_force_opt, GainDecomposition};
//! use ris_sim::geometry::UnitCell;
//!
//! let g = GainDecomposition::new(
//!     Complex64::new(0.0, 0.0),
//!     vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
//! )
//! .unwrap();
//! let unit = UnitCell::uniform(2, 0.01, 0.01).unwrap();
//! let fast = das_opt(&g, 2, &unit).unwrap();
//! let exact = brute_force_opt(&g, 2, &unit).unwrap();
//! assert_eq!(fast.states, vec![0, 3]);
//! assert!((fast.objective - exact.objective).abs() < 1e-12);
//! ```

pub mod beamforming;
pub mod channels;
mod codebook;
pub mod em;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod simulator;
pub mod spacetime;

pub use error::{Error, Result};

/// Chapters of the guide under `book/`, compiled here so their listings run
/// as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/beamforming.md")]
    mod beamforming {}
    #[doc = include_str!("../../../book/src/spacetime.md")]
    mod spacetime {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/multihop.md")]
    mod multihop {}
    #[doc = include_str!("../../../book/src/imaging.md")]
    mod imaging {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
