//! ratelens: rate-distortion decision strategies over finite alphabets,
//! forward and inverse.
//!
//! The forward direction computes optimal decision strategies and the
//! rate-distortion curve R(D) with the Blahut-Arimoto fixed-point
//! iteration ([`blahut`]). The inverse direction recovers the distortion
//! function implied by an observed decision strategy ([`ibaa`]): take the
//! log-likelihood ratio of the strategy against the output marginal, and
//! remove the per-row offset. Recovery is exact for strategies generated
//! by the forward solver, up to an unidentifiable positive scale.
//!
//! Two benchmark systems exercise the pipeline end to end: a binary
//! apoptosis decision with an exponential molecule-count source
//! ([`apoptosis`]) and a Monte Carlo chemotaxis simulator built on the
//! LEGI gradient-sensing response ([`legi`]), whose recovered distortions
//! are aligned and summarized by [`analysis`].
//!
//! Start with the runnable examples (`cargo run --example rd_curve`, etc.)
//! or the `ratelens` binary, which exposes the same pipelines as
//! subcommands with CSV/JSON input and output ([`io`], [`cli`]).

pub mod analysis;
pub mod apoptosis;
pub mod blahut;
pub mod cli;
pub mod ibaa;
pub mod io;
pub mod legi;
pub mod probcore;
