//! Journal-level aggregation of paper scores.
//!
//! The overall influence score of a journal is its mean paper score times
//! its paper count. AIS and five-year impact factor are external inputs and
//! are only joined onto the output.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::dataset::{Corpus, JournalId};
use crate::ranking::{format_sig, RankingTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ExternalMetrics {
    pub ais: Option<f64>,
    pub if5: Option<f64>,
}

pub type JournalMetrics = BTreeMap<JournalId, ExternalMetrics>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalSummary {
    pub journal: JournalId,
    pub paper_count: usize,
    pub avg_score: f64,
    pub avg_rank: f64,
    pub ois: f64,
    pub ais: Option<f64>,
    pub if5: Option<f64>,
}

impl JournalSummary {
    pub fn new(journal: JournalId, paper_count: usize, avg_score: f64, avg_rank: f64) -> Self {
        JournalSummary {
            journal,
            paper_count,
            avg_score,
            avg_rank,
            ois: overall_influence(avg_score, paper_count),
            ais: None,
            if5: None,
        }
    }
}

pub fn overall_influence(avg_score: f64, paper_count: usize) -> f64 {
    avg_score * paper_count as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JournalReport {
    /// Sorted by descending OIS, ties by ascending journal id.
    pub summaries: Vec<JournalSummary>,
    pub papers_without_journal: usize,
    /// Journals in the metrics file with no papers in the corpus.
    pub unknown_metric_journals: Vec<JournalId>,
}

pub fn sort_by_influence(summaries: &mut [JournalSummary]) {
    summaries.sort_by(|a, b| {
        b.ois
            .partial_cmp(&a.ois)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.journal.cmp(&b.journal))
    });
}

pub fn journal_summaries(
    corpus: &Corpus,
    ap: &RankingTable,
    metrics: Option<&JournalMetrics>,
) -> Result<JournalReport> {
    // (score sum, rank sum, count), papers visited in ascending id
    let mut acc: BTreeMap<&JournalId, (f64, f64, usize)> = BTreeMap::new();
    let mut papers_without_journal = 0;
    for (id, paper) in corpus.papers() {
        let row = ap
            .get(id.as_str())
            .ok_or_else(|| Error::MissingScore(id.to_string()))?;
        match &paper.journal {
            Some(j) => {
                let e = acc.entry(j).or_insert((0.0, 0.0, 0));
                e.0 += row.score;
                e.1 += row.rank as f64;
                e.2 += 1;
            }
            None => papers_without_journal += 1,
        }
    }
    let mut summaries: Vec<JournalSummary> = acc
        .into_iter()
        .map(|(j, (score, rank, count))| {
            let mut s =
                JournalSummary::new(j.clone(), count, score / count as f64, rank / count as f64);
            if let Some(m) = metrics.and_then(|m| m.get(j)) {
                s.ais = m.ais;
                s.if5 = m.if5;
            }
            s
        })
        .collect();
    sort_by_influence(&mut summaries);
    let unknown_metric_journals = metrics
        .map(|m| {
            m.keys()
                .filter(|j| !summaries.iter().any(|s| &s.journal == *j))
                .cloned()
                .collect()
        })
        .unwrap_or_default();
    Ok(JournalReport {
        summaries,
        papers_without_journal,
        unknown_metric_journals,
    })
}

/// CSV with header `journal,ais,if5`. Empty fields mean "not available".
pub fn parse_journal_metrics(input: impl Read) -> Result<JournalMetrics> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| Error::Metrics {
        line: 1,
        message: e.to_string(),
    })?;
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["journal", "ais", "if5"] {
        return Err(Error::Metrics {
            line: 1,
            message: format!("expected header journal,ais,if5, got {}", names.join(",")),
        });
    }
    let mut out = JournalMetrics::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Metrics {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Metrics { line, message };
        let journal = row.get(0).map(str::trim).unwrap_or_default();
        if journal.is_empty() {
            return Err(bad("missing journal".into()));
        }
        let value = |k: usize, name: &str| -> Result<Option<f64>> {
            match row.get(k).map(str::trim) {
                None | Some("") => Ok(None),
                Some(s) => {
                    let v: f64 = s
                        .parse()
                        .map_err(|_| bad(format!("{name}: not a number: {s:?}")))?;
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(bad(format!("{name}: must be non-negative, got {s}")));
                    }
                    Ok(Some(v))
                }
            }
        };
        let metrics = ExternalMetrics {
            ais: value(1, "ais")?,
            if5: value(2, "if5")?,
        };
        if out.insert(JournalId::from(journal), metrics).is_some() {
            return Err(bad(format!("duplicate journal {journal:?}")));
        }
    }
    Ok(out)
}

pub fn load_journal_metrics(path: &Path) -> Result<JournalMetrics> {
    parse_journal_metrics(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// `rank,journal,ais,if5,paper_count,avg_score,avg_rank,ois`.
pub fn write_journal_csv(summaries: &[JournalSummary], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "rank",
        "journal",
        "ais",
        "if5",
        "paper_count",
        "avg_score",
        "avg_rank",
        "ois",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (k, s) in summaries.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            s.journal.to_string(),
            opt(s.ais),
            opt(s.if5),
            s.paper_count.to_string(),
            format_sig(s.avg_score, 10),
            format_sig(s.avg_rank, 10),
            format_sig(s.ois, 10),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
