#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use scholarank::dataset::{AuthorId, Corpus, PaperId, PaperRecord};

pub struct CorpusShape {
    pub max_papers: usize,
    pub max_authors: usize,
    pub max_authors_per_paper: usize,
    pub max_refs: usize,
}

pub fn record(id: &str, authors: &[&str], refs: &[&str]) -> PaperRecord {
    PaperRecord {
        id: PaperId::from(id),
        title: None,
        authors: authors.iter().map(|a| AuthorId::from(*a)).collect(),
        journal: None,
        pub_month: None,
        refs: refs.iter().map(|r| PaperId::from(*r)).collect(),
    }
}

pub fn random_records(rng: &mut StdRng, shape: &CorpusShape) -> Vec<PaperRecord> {
    let n = rng.gen_range(1..=shape.max_papers);
    let pool: Vec<String> = (0..rng.gen_range(1..=shape.max_authors))
        .map(|k| format!("a{k:04}"))
        .collect();
    let ids: Vec<String> = (0..n).map(|k| format!("p{k:04}")).collect();
    ids.iter()
        .map(|id| {
            let k = rng.gen_range(1..=shape.max_authors_per_paper.min(pool.len()));
            let authors = pool
                .choose_multiple(rng, k)
                .map(|a| AuthorId::from(a.as_str()))
                .collect();
            let nrefs = rng.gen_range(0..=shape.max_refs.min(n));
            let refs = ids
                .choose_multiple(rng, nrefs)
                .filter(|r| *r != id)
                .map(|r| PaperId::from(r.as_str()))
                .collect();
            PaperRecord {
                id: PaperId::from(id.as_str()),
                title: None,
                authors,
                journal: None,
                pub_month: None,
                refs,
            }
        })
        .collect()
}

pub fn random_corpus(rng: &mut StdRng, shape: &CorpusShape) -> Corpus {
    Corpus::from_records(random_records(rng, shape))
        .unwrap()
        .corpus
}

/// Straight-line dense evaluation of the update rules, built directly from
/// the records: returns paper scores in ascending paper-id order after
/// `rounds` rounds from the all-ones vector.
pub fn dense_oracle(records: &[PaperRecord], rounds: usize) -> Vec<f64> {
    let papers: BTreeMap<&str, &PaperRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let authors: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.authors.iter().map(|a| a.as_str()))
        .collect();
    let pidx: BTreeMap<&str, usize> = papers.keys().enumerate().map(|(k, p)| (*p, k)).collect();
    let aidx: BTreeMap<&str, usize> = authors.iter().enumerate().map(|(k, a)| (*a, k)).collect();
    let (n, m) = (papers.len(), authors.len());

    let mut b = vec![vec![0.0f64; m]; n];
    for (p, r) in &papers {
        for a in &r.authors {
            b[pidx[p]][aidx[a.as_str()]] = 1.0;
        }
    }
    let mut a = vec![vec![0.0f64; n]; m];
    for (p, r) in &papers {
        for cited in &r.refs {
            if cited.as_str() == *p {
                continue;
            }
            let Some(&beta) = pidx.get(cited.as_str()) else {
                continue;
            };
            for author in &r.authors {
                let i = aidx[author.as_str()];
                if b[beta][i] == 0.0 {
                    a[i][beta] = 1.0;
                }
            }
        }
    }
    let k_out: Vec<f64> = b.iter().map(|row| row.iter().sum()).collect();

    let mut q = vec![1.0; n];
    for _ in 0..rounds {
        let mut s = vec![0.0; m];
        for i in 0..m {
            for alpha in 0..n {
                s[i] += q[alpha] / k_out[alpha] * b[alpha][i];
            }
        }
        let mut raw = vec![1.0; n];
        for alpha in 0..n {
            for i in 0..m {
                raw[alpha] += s[i] * a[i][alpha];
            }
        }
        let total: f64 = raw.iter().sum();
        q = raw.iter().map(|x| x * n as f64 / total).collect();
    }
    q
}

/// All-pairs Kendall counts `(concordant, discordant)`.
pub fn brute_kendall(a: &[f64], b: &[f64]) -> (u64, u64) {
    let (mut c, mut d) = (0, 0);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let prod = (a[i] - a[j]) * (b[i] - b[j]);
            if prod > 0.0 {
                c += 1;
            } else if prod < 0.0 {
                d += 1;
            }
        }
    }
    (c, d)
}
