//! Exact fractional clique decompositions of dense graphs.
//!
//! A fractional `K_r`-decomposition of a graph `G` is a non-negative weighting
//! of the `r`-cliques of `G` such that, over every edge, the weights of the
//! cliques containing it sum to exactly one. This crate builds such
//! weightings constructively and checks them with exact rational arithmetic:
//!
//! - [`kminusm`]: complete graphs with a matching removed, in closed form.
//! - [`recursion`]: graphs whose complement splits into a few matchings.
//! - [`families`]: symmetric random families of near-complete subgraphs with
//!   exactly equalised edge marginals.
//! - [`correction`]: weight shaping inside `K_{2r+2}` and the lift from an
//!   approximate `K_{2r+2}` weighting to an exact `K_r` decomposition.
//! - [`sampler`]: the staged random process producing near-complete induced
//!   subgraphs, with Monte Carlo marginal estimation.
//! - [`lp`]: an exact rational simplex used as an independent oracle.
//! - [`pipeline`]: an end-to-end driver tying the pieces together.
//!
//! Every certificate is checked by [`weighting::verify_weighting`], which uses
//! no tolerance anywhere.

mod combin;
pub mod correction;
pub mod error;
pub mod families;
pub mod graph;
pub mod io;
pub mod kminusm;
pub mod lp;
pub mod pipeline;
pub mod rational;
pub mod recursion;
pub mod rng;
pub mod sampler;
pub mod weighting;

pub use error::{Error, Result};
pub use graph::{Clique, Edge, Graph, Matching, Vertex};
pub use rational::Rational;
pub use weighting::{verify_weighting, CliqueWeighting, VerificationReport};
