//! Context collection for repository-level fill-in-the-middle (FIM) code completion.
//!
//! A completion point is a prefix/suffix pair plus a snapshot of the whole
//! repository at the revision preceding the edit. This crate implements the
//! full offline pipeline around that task:
//!
//! * [`dataset`] — load and validate completion points and repository snapshots.
//! * [`parse`] — lightweight Python/Kotlin parsing: definitions, referenced
//!   symbols, enclosing blocks, import resolution.
//! * [`chunk`] — split files into line/character/block retrieval units.
//! * [`index`] — BM25, trigram-substring, and hashed-vector indices, plus
//!   reciprocal-rank fusion.
//! * [`collect`] — context-collection strategies mapping a completion point to
//!   a budgeted, separator-delimited context string.
//! * [`metric`] — chrF scoring and score aggregation.
//! * [`harness`] — model-specific prompt rendering, completion backends
//!   (HTTP, offline, mocks), run evaluation, and leaderboard reports.
//! * [`cli`] — the `fimctx` command-line entry points.
//!
//! Everything is deterministic given a seed: no network or model weights are
//! required to run the pipeline end to end with the bundled mock backends.

pub mod chunk;
pub mod cli;
pub mod collect;
pub mod dataset;
pub mod harness;
pub mod index;
pub mod lang;
pub mod metric;
pub mod parse;
pub(crate) mod util;

pub use lang::Language;
