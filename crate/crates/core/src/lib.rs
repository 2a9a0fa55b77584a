//! Desk-scale simulation toolkit for five 5G technology studies.
//!
//! Each study lives in its own module and can be used directly as a library:
//!
//! - [`lsa_optimizer`]: bits-per-cost-unit efficiency of renting distributed
//!   antennas and shared spectrum, with an exhaustive `(M, W)` optimizer.
//! - [`cell_splitting`]: area spectral efficiency and total transmit power
//!   under cell splitting, closed form and Monte Carlo.
//! - [`fbmc_mimo`]: an FBMC/OQAM transmultiplexer over multipath channels
//!   with matched-filter combining across receive antennas.
//! - [`pon_dba`]: a frame-level XG-PON upstream simulator comparing an
//!   assured/best-effort DBA with its group-assured variant.
//! - [`selforg_entropy`]: channel allocation grids, cellular-automaton
//!   self-organization and 2D entropy density / excess entropy estimation.
//!
//! [`harness`] ties these together into reproducible, configuration-driven
//! experiments writing CSV files; the `fivegsim` binary is a thin CLI over it.
//! All randomness flows through [`rng::seeded_stream`].

pub mod cell_splitting;
pub mod error;
pub mod fbmc_mimo;
pub mod harness;
pub mod lsa_optimizer;
pub mod pon_dba;
pub mod rng;
pub mod selforg_entropy;
pub mod stats;

pub use error::{Error, Result};
