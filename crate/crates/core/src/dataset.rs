//! Corpus ingestion: JSON Lines (canonical) or a `papers.csv` + `edges.csv`
//! pair, validated into an immutable [`Corpus`].
//!
//! References are restricted to the corpus: refs to unknown papers are
//! dropped and counted, repeated refs collapse to one, and a paper citing
//! itself loses that ref.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::month::YearMonth;
use crate::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }
    };
}

string_id!(
    /// Case-sensitive paper identifier.
    PaperId
);
string_id!(
    /// Case-sensitive author identifier. No name disambiguation is done.
    AuthorId
);
string_id!(JournalId);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: PaperId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub authors: Vec<AuthorId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<JournalId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pub_month: Option<YearMonth>,
    #[serde(default)]
    pub refs: Vec<PaperId>,
}

/// Input format accepted by [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

/// Counts collected while validating the input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub papers: usize,
    pub authors: usize,
    /// Refs to papers outside the corpus (including CSV edges with an unknown citing paper).
    pub dangling_refs: usize,
    pub deduplicated_refs: usize,
    pub self_refs: usize,
    /// Author ids repeated within one paper's author list.
    pub duplicate_authors: usize,
}

impl IngestReport {
    pub fn has_warnings(&self) -> bool {
        self.dangling_refs + self.deduplicated_refs + self.self_refs + self.duplicate_authors > 0
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub corpus: Corpus,
    pub report: IngestReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    papers: BTreeMap<PaperId, PaperRecord>,
    authors: BTreeSet<AuthorId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub papers: usize,
    pub authors: usize,
    pub citation_edges: usize,
    pub papers_per_journal: BTreeMap<JournalId, usize>,
}

/// One record as it appears on disk, before validation.
#[derive(Debug, Default, Deserialize)]
struct RawRecord {
    id: Option<String>,
    title: Option<String>,
    authors: Option<Vec<String>>,
    journal: Option<String>,
    pub_month: Option<String>,
    #[serde(default)]
    refs: Vec<String>,
}

impl Corpus {
    pub fn papers(&self) -> &BTreeMap<PaperId, PaperRecord> {
        &self.papers
    }

    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.papers.get(id)
    }

    pub fn authors(&self) -> &BTreeSet<AuthorId> {
        &self.authors
    }

    /// N.
    pub fn num_papers(&self) -> usize {
        self.papers.len()
    }

    /// M.
    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn citation_edges(&self) -> usize {
        self.papers.values().map(|p| p.refs.len()).sum()
    }

    pub fn stats(&self) -> CorpusStats {
        let mut papers_per_journal = BTreeMap::new();
        for journal in self.papers.values().filter_map(|p| p.journal.as_ref()) {
            *papers_per_journal.entry(journal.clone()).or_insert(0) += 1;
        }
        CorpusStats {
            papers: self.num_papers(),
            authors: self.num_authors(),
            citation_edges: self.citation_edges(),
            papers_per_journal,
        }
    }

    /// Validates already-typed records. Applies the same ref clean-up as the file loaders.
    pub fn from_records(records: impl IntoIterator<Item = PaperRecord>) -> Result<Loaded> {
        let raw = records.into_iter().enumerate().map(|(i, r)| {
            let raw = RawRecord {
                id: Some(r.id.0),
                title: r.title,
                authors: Some(r.authors.into_iter().map(|a| a.0).collect()),
                journal: r.journal.map(|j| j.0),
                pub_month: r.pub_month.map(|m| m.to_string()),
                refs: r.refs.into_iter().map(|p| p.0).collect(),
            };
            (format!("record {}", i + 1), raw)
        });
        build(raw, Vec::new())
    }

    pub fn from_jsonl_str(text: &str) -> Result<Loaded> {
        Self::from_jsonl_reader(text.as_bytes(), "<input>")
    }

    pub fn from_jsonl_reader(reader: impl Read, name: &str) -> Result<Loaded> {
        let mut raw = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let location = format!("{name} line {}", i + 1);
            let line = line.map_err(|e| Error::Ingest {
                location: location.clone(),
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Ingest {
                location: location.clone(),
                message: e.to_string(),
            })?;
            raw.push((location, record));
        }
        build(raw, Vec::new())
    }

    /// `papers` has header `id,title,journal,pub_month,authors` (authors `;`-separated),
    /// `edges` has header `citing,cited`.
    pub fn from_csv_readers(papers: impl Read, edges: impl Read) -> Result<Loaded> {
        let mut raw = Vec::new();
        let mut rdr = csv::Reader::from_reader(papers);
        for (i, row) in rdr.records().enumerate() {
            // header occupies line 1
            let location = format!("papers.csv line {}", i + 2);
            let row = row.map_err(|e| Error::Ingest {
                location: location.clone(),
                message: e.to_string(),
            })?;
            let field = |k: usize| {
                row.get(k)
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
            };
            let authors = field(4).map(|a| {
                a.split(';')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            });
            raw.push((
                location,
                RawRecord {
                    id: field(0),
                    title: field(1),
                    journal: field(2),
                    pub_month: field(3),
                    authors,
                    refs: Vec::new(),
                },
            ));
        }

        let mut edges_out = Vec::new();
        let mut rdr = csv::Reader::from_reader(edges);
        for (i, row) in rdr.records().enumerate() {
            let location = format!("edges.csv line {}", i + 2);
            let row = row.map_err(|e| Error::Ingest {
                location: location.clone(),
                message: e.to_string(),
            })?;
            match (row.get(0).map(str::trim), row.get(1).map(str::trim)) {
                (Some(citing), Some(cited)) if !citing.is_empty() && !cited.is_empty() => {
                    edges_out.push((citing.to_string(), cited.to_string()));
                }
                _ => {
                    return Err(Error::Ingest {
                        location,
                        message: "expected non-empty citing,cited".into(),
                    })
                }
            }
        }
        build(raw, edges_out)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for record in self.papers.values() {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn build(
    raw: impl IntoIterator<Item = (String, RawRecord)>,
    edges: Vec<(String, String)>,
) -> Result<Loaded> {
    let mut report = IngestReport::default();
    let mut papers: BTreeMap<PaperId, (String, PaperRecord)> = BTreeMap::new();

    for (location, r) in raw {
        let id = match r.id {
            Some(id) if !id.is_empty() => id,
            _ => {
                return Err(Error::Ingest {
                    location,
                    message: "missing paper id".into(),
                })
            }
        };
        let listed = r.authors.unwrap_or_default();
        if listed.is_empty() {
            return Err(Error::Ingest {
                location,
                message: format!("paper {id:?} has no authors"),
            });
        }
        let mut seen = HashSet::new();
        let mut authors = Vec::with_capacity(listed.len());
        for a in listed {
            if a.is_empty() {
                return Err(Error::Ingest {
                    location,
                    message: format!("paper {id:?} has an empty author id"),
                });
            }
            if seen.insert(a.clone()) {
                authors.push(AuthorId(a));
            } else {
                report.duplicate_authors += 1;
            }
        }
        let pub_month = match r.pub_month.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(s.parse().map_err(|e: Error| Error::Ingest {
                location: location.clone(),
                message: e.to_string(),
            })?),
        };
        let record = PaperRecord {
            id: PaperId(id.clone()),
            title: r.title.filter(|t| !t.is_empty()),
            authors,
            journal: r.journal.filter(|j| !j.is_empty()).map(JournalId),
            pub_month,
            refs: r.refs.into_iter().map(PaperId).collect(),
        };
        if let Some((first, _)) = papers.get(id.as_str()) {
            return Err(Error::DuplicatePaper {
                id,
                location: format!("{location} (first defined at {first})"),
            });
        }
        papers.insert(PaperId(id), (location, record));
    }

    let known: HashSet<String> = papers.keys().map(|k| k.0.clone()).collect();
    for (citing, cited) in edges {
        match papers.get_mut(citing.as_str()) {
            Some((_, record)) => record.refs.push(PaperId(cited)),
            None => report.dangling_refs += 1,
        }
    }

    let mut authors = BTreeSet::new();
    let papers: BTreeMap<PaperId, PaperRecord> = papers
        .into_iter()
        .map(|(id, (_, mut record))| {
            let mut seen = HashSet::new();
            let mut refs = Vec::with_capacity(record.refs.len());
            for r in record.refs.drain(..) {
                if r == record.id {
                    report.self_refs += 1;
                } else if !known.contains(r.as_str()) {
                    report.dangling_refs += 1;
                } else if !seen.insert(r.clone()) {
                    report.deduplicated_refs += 1;
                } else {
                    refs.push(r);
                }
            }
            record.refs = refs;
            authors.extend(record.authors.iter().cloned());
            (id, record)
        })
        .collect();

    report.papers = papers.len();
    report.authors = authors.len();
    Ok(Loaded {
        corpus: Corpus { papers, authors },
        report,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads a corpus from disk.
///
/// For [`Format::Csv`], `path` is either a directory holding `papers.csv` and
/// `edges.csv`, or the papers file itself with `edges.csv` beside it.
pub fn load_corpus(path: &Path, format: Format) -> Result<Loaded> {
    match format {
        Format::Jsonl => {
            let name = path.display().to_string();
            Corpus::from_jsonl_reader(open(path)?, &name)
        }
        Format::Csv => {
            let (papers, edges) = csv_paths(path);
            Corpus::from_csv_readers(open(&papers)?, open(&edges)?)
        }
    }
}

fn csv_paths(path: &Path) -> (PathBuf, PathBuf) {
    if path.is_dir() {
        (path.join("papers.csv"), path.join("edges.csv"))
    } else {
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        (path.to_path_buf(), dir.join("edges.csv"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Loaded {
        Corpus::from_jsonl_str(text).unwrap()
    }

    #[test]
    fn two_paper_corpus() {
        let loaded = load(
            r#"{"id":"p1","authors":["a1"]}
{"id":"p2","authors":["a2"],"refs":["p1"]}"#,
        );
        assert_eq!(loaded.corpus.num_papers(), 2);
        assert_eq!(loaded.corpus.num_authors(), 2);
        let stats = loaded.corpus.stats();
        assert_eq!(stats.citation_edges, 1);
        assert!(stats.papers_per_journal.is_empty());
    }

    #[test]
    fn dedups_and_drops_dangling() {
        let loaded = load(
            r#"{"id":"p1","authors":["a1"]}
{"id":"p2","authors":["a2"],"refs":["p1","p1","pX"]}"#,
        );
        assert_eq!(
            loaded.corpus.paper("p2").unwrap().refs,
            vec![PaperId::from("p1")]
        );
        assert_eq!(loaded.report.deduplicated_refs, 1);
        assert_eq!(loaded.report.dangling_refs, 1);
        assert_eq!(loaded.report.self_refs, 0);
    }

    #[test]
    fn self_reference_is_dropped() {
        let loaded = load(r#"{"id":"p1","authors":["a1"],"refs":["p1"]}"#);
        assert!(loaded.corpus.paper("p1").unwrap().refs.is_empty());
        assert_eq!(loaded.report.self_refs, 1);
    }

    #[test]
    fn empty_input() {
        let loaded = load("");
        assert_eq!(loaded.corpus.num_papers(), 0);
        assert_eq!(loaded.corpus.num_authors(), 0);
        assert!(loaded.corpus.is_empty());
    }

    #[test]
    fn rejects_missing_id_and_empty_authors() {
        let err = Corpus::from_jsonl_str(r#"{"authors":["a1"]}"#).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = Corpus::from_jsonl_str(
            r#"{"id":"p1","authors":["a1"]}
{"id":"p2","authors":[]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(Corpus::from_jsonl_str(r#"{"id":"p2"}"#).is_err());
        assert!(Corpus::from_jsonl_str("not json").is_err());
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = Corpus::from_jsonl_str(
            r#"{"id":"p1","authors":["a1"]}
{"id":"p1","authors":["a2"]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicatePaper { .. }), "{err}");
    }

    #[test]
    fn journal_counts() {
        let loaded = load(
            r#"{"id":"p1","authors":["a1"],"journal":"PRE"}
{"id":"p2","authors":["a1"],"journal":"PRE"}
{"id":"p3","authors":["a1"],"journal":"Physa"}
{"id":"p4","authors":["a1"]}"#,
        );
        let stats = loaded.corpus.stats();
        assert_eq!(stats.papers_per_journal[&JournalId::from("PRE")], 2);
        assert_eq!(stats.papers_per_journal[&JournalId::from("Physa")], 1);
        assert_eq!(stats.papers_per_journal.values().sum::<usize>(), 3);
    }

    #[test]
    fn csv_pair() {
        let papers = "id,title,journal,pub_month,authors\n\
                      p1,First,PRE,2009-01,a1;a2\n\
                      p2,,,,a3\n";
        let edges = "citing,cited\np2,p1\np2,p1\np9,p1\n";
        let loaded = Corpus::from_csv_readers(papers.as_bytes(), edges.as_bytes()).unwrap();
        let c = &loaded.corpus;
        assert_eq!(c.num_papers(), 2);
        assert_eq!(c.num_authors(), 3);
        let p1 = c.paper("p1").unwrap();
        assert_eq!(p1.title.as_deref(), Some("First"));
        assert_eq!(p1.pub_month, Some("2009-01".parse().unwrap()));
        assert_eq!(c.paper("p2").unwrap().journal, None);
        assert_eq!(c.paper("p2").unwrap().refs, vec![PaperId::from("p1")]);
        assert_eq!(loaded.report.deduplicated_refs, 1);
        assert_eq!(loaded.report.dangling_refs, 1);
    }

    #[test]
    fn bad_month_names_line() {
        let err = Corpus::from_jsonl_str(r#"{"id":"p1","authors":["a1"],"pub_month":"2009/01"}"#)
            .unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn jsonl_round_trip() {
        let loaded = load(
            r#"{"id":"p2","title":"T","authors":["b","a"],"journal":"J","pub_month":"2001-02","refs":["p1"]}
{"id":"p1","authors":["a"]}"#,
        );
        let mut buf = Vec::new();
        loaded.corpus.write_jsonl(&mut buf).unwrap();
        let again = Corpus::from_jsonl_reader(buf.as_slice(), "buf").unwrap();
        assert_eq!(again.corpus, loaded.corpus);
    }
}
