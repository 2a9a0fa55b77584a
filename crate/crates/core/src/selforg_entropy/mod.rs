//! Channel allocation grids and their 2D entropy analysis.
//!
//! Three allocation kinds are compared: a regular stripe pattern (centralized
//! planning), an i.i.d. random assignment, and the outcome of a cellular
//! automaton where each conflicting cell re-picks a channel unused by its
//! Moore neighbors. Each grid is summarized by the conditional entropy
//! `h(M)` of a cell given `M` raster-preceding neighbors, the entropy density
//! estimate `h = h(M_max)` and the convergence excess entropy
//! `E_C = sum_M (h(M) - h)`.

mod ca;
mod entropy;
mod grid;

pub use ca::{ca_step, self_organize, self_organize_from, SelfOrgOutcome};
pub use entropy::{entropy_density, excess_entropy, EntropyEstimate, TemplateSequence};
pub use grid::{conflict_count, generate_random, generate_regular, ChannelGrid};
