//! Sorted score tables with competition ranking (1, 2, 2, 4).
//!
//! Rows are ordered by descending score, ties by ascending id. Tied scores
//! share the best rank of their group.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{Read, Write};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub id: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankingTable {
    rows: Vec<RankRow>,
    by_id: HashMap<String, usize>,
}

impl RankingTable {
    /// `ids[k]` carries `scores[k]`. Scores must be finite.
    pub fn from_scores<S: AsRef<str>>(ids: &[S], scores: &[f64]) -> Result<Self> {
        if ids.len() != scores.len() {
            return Err(Error::LengthMismatch {
                what: "ranking scores",
                expected: ids.len(),
                got: scores.len(),
            });
        }
        if let Some(k) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        let mut rows: Vec<RankRow> = ids
            .iter()
            .zip(scores)
            .map(|(id, &score)| RankRow {
                id: id.as_ref().to_string(),
                score,
                rank: 0,
            })
            .collect();
        rows.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        for k in 0..rows.len() {
            rows[k].rank = if k > 0 && rows[k].score == rows[k - 1].score {
                rows[k - 1].rank
            } else {
                k + 1
            };
        }
        let by_id = rows
            .iter()
            .enumerate()
            .map(|(k, r)| (r.id.clone(), k))
            .collect();
        Ok(RankingTable { rows, by_id })
    }

    pub fn rows(&self) -> &[RankRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&RankRow> {
        self.by_id.get(id).map(|&k| &self.rows[k])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.id.as_str())
    }

    /// `entity_id,score,rank`, scores to 10 significant digits.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["entity_id", "score", "rank"])?;
        for r in &self.rows {
            w.write_record([r.id.as_str(), &format_sig(r.score, 10), &r.rank.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads a table written by [`write_csv`](Self::write_csv). Ranks are
    /// recomputed from the scores.
    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut ids = Vec::new();
        let mut scores = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let bad = |message: &str| Error::Ingest {
                location: format!("ranking line {}", i + 2),
                message: message.to_string(),
            };
            let id = row
                .get(0)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| bad("missing entity_id"))?;
            let score: f64 = row
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| bad("unparsable score"))?;
            ids.push(id.to_string());
            scores.push(score);
        }
        let table = Self::from_scores(&ids, &scores)?;
        if table.by_id.len() != ids.len() {
            return Err(Error::Ingest {
                location: "ranking".into(),
                message: "duplicate entity_id".into(),
            });
        }
        Ok(table)
    }
}

/// Formats `x` in positional notation with exactly `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            "0".to_string()
        } else {
            x.to_string()
        };
    }
    let digits = digits.max(1);
    // scientific form gives correctly rounded mantissa digits and exponent
    let sci = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    let mantissa: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if x < 0.0 { "-" } else { "" };
    let point = exp + 1; // digits before the decimal point
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), mantissa)
    } else if point as usize >= mantissa.len() {
        format!(
            "{}{}",
            mantissa,
            "0".repeat(point as usize - mantissa.len())
        )
    } else {
        let (int, frac) = mantissa.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}
