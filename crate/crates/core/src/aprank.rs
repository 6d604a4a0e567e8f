//! The author-paper prestige iteration and its baselines.
//!
//! One round, starting from normalized paper scores `q`:
//!
//! 1. diffuse: each paper splits its score evenly among its authors
//!    (conservative, the author total equals the paper total);
//! 2. vote: each paper gets one inherent unit plus the score of every
//!    author with a cite link to it;
//! 3. normalize: rescale the paper vector to total `C = N`.
//!
//! The loop starts from the all-ones paper vector and stops once the mean
//! squared change of the paper vector between rounds drops below `delta`.
//!
//! Every per-entry sum runs over ascending indices, so results do not
//! depend on how many rayon workers compute the entries.

use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::{BipartiteNetwork, CitationGraph};
use crate::dataset::Corpus;
use crate::month::YearMonth;
use crate::ranking::RankingTable;
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 1e-4;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceConfig {
    pub delta_threshold: f64,
    pub max_iterations: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            delta_threshold: DEFAULT_DELTA,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_threshold > 0.0 && self.delta_threshold.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta threshold must be positive and finite, got {}",
                self.delta_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreState {
    /// Indexed like [`BipartiteNetwork::author_ids`]; diffused from `paper_scores`.
    pub author_scores: Vec<f64>,
    /// Normalized, summing to N. Indexed like [`BipartiteNetwork::paper_ids`].
    pub paper_scores: Vec<f64>,
    pub iteration: usize,
    pub delta: f64,
}

impl ScoreState {
    pub fn paper_table(&self, net: &BipartiteNetwork) -> Result<RankingTable> {
        RankingTable::from_scores(net.paper_ids(), &self.paper_scores)
    }

    pub fn author_table(&self, net: &BipartiteNetwork) -> Result<RankingTable> {
        RankingTable::from_scores(net.author_ids(), &self.author_scores)
    }
}

/// What the observer of [`ap_rank_observed`] sees after each round.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    pub iteration: usize,
    /// `f64::INFINITY` when there is no previous paper vector to compare with.
    pub delta: f64,
    /// Author scores voted in this round.
    pub author_scores: &'a [f64],
    /// Normalized paper scores produced by this round.
    pub paper_scores: &'a [f64],
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            got,
        })
    }
}

fn check_scores(scores: &[f64]) -> Result<()> {
    match scores.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
        Some(k) => Err(Error::NonFinite(k)),
        None => Ok(()),
    }
}

/// `Q_s(i) = sum over papers a of i: Q_p(a) / k_out(a)`.
pub fn diffuse_paper_to_author(net: &BipartiteNetwork, paper_scores: &[f64]) -> Result<Vec<f64>> {
    check_len("paper scores", net.num_papers(), paper_scores.len())?;
    check_scores(paper_scores)?;
    Ok(diffuse(net, paper_scores))
}

fn diffuse(net: &BipartiteNetwork, paper_scores: &[f64]) -> Vec<f64> {
    (0..net.num_authors())
        .into_par_iter()
        .map(|i| {
            net.papers_of(i)
                .iter()
                .map(|&alpha| paper_scores[alpha] / net.out_degree(alpha) as f64)
                .sum()
        })
        .collect()
}

/// `raw(a) = 1 + sum of Q_s(i) over authors i citing a`.
pub fn vote_author_to_paper(net: &BipartiteNetwork, author_scores: &[f64]) -> Result<Vec<f64>> {
    check_len("author scores", net.num_authors(), author_scores.len())?;
    check_scores(author_scores)?;
    Ok(vote(net, author_scores))
}

fn vote(net: &BipartiteNetwork, author_scores: &[f64]) -> Vec<f64> {
    (0..net.num_papers())
        .into_par_iter()
        .map(|alpha| {
            net.citers_of(alpha)
                .iter()
                .fold(1.0, |acc, &i| acc + author_scores[i])
        })
        .collect()
}

/// Rescales `raw` to sum to `total`.
pub fn normalize(raw: &[f64], total: f64) -> Result<Vec<f64>> {
    let sum: f64 = raw.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::ZeroMass(sum));
    }
    Ok(raw.iter().map(|&r| r * total / sum).collect())
}

/// Mean squared difference between two paper vectors.
pub fn delta(prev: &[f64], next: &[f64]) -> Result<f64> {
    check_len("score vectors", prev.len(), next.len())?;
    if prev.is_empty() {
        return Ok(0.0);
    }
    let ss: f64 = prev.iter().zip(next).map(|(a, b)| (b - a) * (b - a)).sum();
    Ok(ss / prev.len() as f64)
}

pub fn ap_rank(net: &BipartiteNetwork, cfg: &ConvergenceConfig) -> Result<ScoreState> {
    ap_rank_observed(net, cfg, |_| {})
}

/// [`ap_rank`], calling `observer` after every round.
pub fn ap_rank_observed(
    net: &BipartiteNetwork,
    cfg: &ConvergenceConfig,
    observer: impl FnMut(&Step<'_>),
) -> Result<ScoreState> {
    cfg.validate()?;
    let ones = vec![1.0; net.num_papers()];
    let authors = diffuse(net, &ones);
    iterate(net, cfg, Some(ones), authors, observer)
}

/// Author scores obtained by diffusing the all-ones paper vector.
pub fn default_author_seed(net: &BipartiteNetwork) -> Vec<f64> {
    diffuse(net, &vec![1.0; net.num_papers()])
}

/// Runs the same loop entered from the author side: the first round votes
/// `author_seed` to the papers, and the first convergence test compares the
/// first and second paper vectors.
pub fn ap_rank_from_authors(
    net: &BipartiteNetwork,
    cfg: &ConvergenceConfig,
    author_seed: &[f64],
) -> Result<ScoreState> {
    cfg.validate()?;
    check_len("author seed", net.num_authors(), author_seed.len())?;
    check_scores(author_seed)?;
    iterate(net, cfg, None, author_seed.to_vec(), |_| {})
}

fn iterate(
    net: &BipartiteNetwork,
    cfg: &ConvergenceConfig,
    mut prev: Option<Vec<f64>>,
    mut authors: Vec<f64>,
    mut observer: impl FnMut(&Step<'_>),
) -> Result<ScoreState> {
    let n = net.num_papers();
    if n == 0 {
        return Err(Error::EmptyCorpus {
            papers: 0,
            authors: net.num_authors(),
        });
    }
    let total = n as f64;
    let mut last_delta = f64::INFINITY;
    for iteration in 1..=cfg.max_iterations {
        let next = normalize(&vote(net, &authors), total)?;
        let d = match &prev {
            Some(p) => delta(p, &next)?,
            None => f64::INFINITY,
        };
        observer(&Step {
            iteration,
            delta: d,
            author_scores: &authors,
            paper_scores: &next,
        });
        authors = diffuse(net, &next);
        last_delta = d;
        if d < cfg.delta_threshold {
            return Ok(ScoreState {
                author_scores: authors,
                paper_scores: next,
                iteration,
                delta: d,
            });
        }
        prev = Some(next);
    }
    let paper_scores = prev.expect("at least one round ran");
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        delta: last_delta,
        state: Box::new(ScoreState {
            author_scores: authors,
            paper_scores,
            iteration: cfg.max_iterations,
            delta: last_delta,
        }),
    })
}

/// Citation-count baseline for papers: in-degree in the citation graph.
pub fn cc_paper(graph: &CitationGraph) -> RankingTable {
    let scores: Vec<f64> = graph.in_degree().iter().map(|&d| d as f64).collect();
    RankingTable::from_scores(graph.paper_ids(), &scores).expect("lengths agree")
}

/// Citation-count baseline for authors: sum of in-degrees of their papers.
pub fn cc_author(corpus: &Corpus, graph: &CitationGraph) -> RankingTable {
    let ids: Vec<&str> = corpus.authors().iter().map(|a| a.as_str()).collect();
    let mut scores = vec![0.0; ids.len()];
    for (alpha, paper) in corpus.papers().values().enumerate() {
        let cites = graph.in_degree()[alpha] as f64;
        for a in &paper.authors {
            let i = ids.binary_search(&a.as_str()).expect("author indexed");
            scores[i] += cites;
        }
    }
    RankingTable::from_scores(&ids, &scores).expect("lengths agree")
}

/// Time-weighted paper scores: AP score divided by age in months, with the
/// age clamped to at least one month.
pub fn tap_values(
    state: &ScoreState,
    net: &BipartiteNetwork,
    corpus: &Corpus,
    observe: YearMonth,
) -> Result<Vec<f64>> {
    check_len("paper scores", net.num_papers(), state.paper_scores.len())?;
    let mut missing = Vec::new();
    let mut months = Vec::with_capacity(net.num_papers());
    for id in net.paper_ids() {
        let paper = corpus
            .paper(id.as_str())
            .ok_or_else(|| Error::MissingScore(id.to_string()))?;
        match paper.pub_month {
            Some(m) => months.push(m),
            None => missing.push(id.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingPubMonth(missing));
    }
    net.paper_ids()
        .iter()
        .zip(&months)
        .zip(&state.paper_scores)
        .map(|((id, &published), &q)| {
            let age = published.months_until(observe);
            if age < 0 {
                return Err(Error::PublishedAfterObservation {
                    paper: id.to_string(),
                    published,
                    observe,
                });
            }
            Ok(q / age.max(1) as f64)
        })
        .collect()
}

pub fn tap_scores(
    state: &ScoreState,
    net: &BipartiteNetwork,
    corpus: &Corpus,
    observe: YearMonth,
) -> Result<RankingTable> {
    let values = tap_values(state, net, corpus, observe)?;
    RankingTable::from_scores(net.paper_ids(), &values)
}
