//! Prestige ranking of scientists and their publications on a directed
//! author-paper bipartite network.
//!
//! Paper scores diffuse evenly to their authors, authors vote their score to
//! every paper they cite, every paper keeps one unit of inherent score, and
//! the paper vector is renormalized to a total of `N` each round. The crate
//! also provides citation-count baselines, a time-weighted variant, Kendall
//! rank agreement, co-authorship analysis and journal-level aggregation.
//!
//! ```
//! use scholarank::{aprank, bipartite::BipartiteNetwork, dataset::Corpus};
//!
//! let corpus = Corpus::from_jsonl_str(
//!     r#"{"id":"p1","authors":["a1"]}
//! {"id":"p2","authors":["a2"],"refs":["p1"]}"#,
//! )
//! .unwrap()
//! .corpus;
//! let net = BipartiteNetwork::build(&corpus).unwrap();
//! let state = aprank::ap_rank(&net, &aprank::ConvergenceConfig::default()).unwrap();
//! assert!(state.paper_scores[0] > state.paper_scores[1]);
//! ```

pub mod analytics;
pub mod aprank;
pub mod bipartite;
pub mod cli;
pub mod dataset;
mod error;
pub mod journals;
pub mod month;
pub mod ranking;

pub use error::{Error, Result};
