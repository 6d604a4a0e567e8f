//! The directed author-paper network.
//!
//! Two sparse binary relations over the same index space:
//! - cite (`A`, authors x papers): author `i` cites paper `a` through at
//!   least one of their papers, and is not an author of `a`;
//! - authorship (`B`, papers x authors): author `i` wrote paper `a`.
//!
//! Authors and papers are indexed by ascending id, so score vectors and
//! summation order are reproducible.

use std::collections::BTreeSet;
use std::io::Write;

use crate::dataset::{AuthorId, Corpus, PaperId};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteNetwork {
    author_ids: Vec<AuthorId>,
    paper_ids: Vec<PaperId>,
    // B by row, and its transpose. Inner lists ascending.
    paper_authors: Vec<Vec<usize>>,
    author_papers: Vec<Vec<usize>>,
    // A by column, and by row.
    paper_citers: Vec<Vec<usize>>,
    author_cites: Vec<Vec<usize>>,
}

impl BipartiteNetwork {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        if corpus.num_papers() == 0 || corpus.num_authors() == 0 {
            return Err(Error::EmptyCorpus {
                papers: corpus.num_papers(),
                authors: corpus.num_authors(),
            });
        }
        let author_ids: Vec<AuthorId> = corpus.authors().iter().cloned().collect();
        let paper_ids: Vec<PaperId> = corpus.papers().keys().cloned().collect();
        let author_idx = |id: &AuthorId| author_ids.binary_search(id).expect("author indexed");
        let paper_idx = |id: &PaperId| paper_ids.binary_search(id).expect("paper indexed");

        let paper_authors: Vec<Vec<usize>> = corpus
            .papers()
            .values()
            .map(|p| {
                let mut v: Vec<usize> = p.authors.iter().map(author_idx).collect();
                v.sort_unstable();
                v
            })
            .collect();

        let mut author_papers = vec![Vec::new(); author_ids.len()];
        for (alpha, authors) in paper_authors.iter().enumerate() {
            for &i in authors {
                author_papers[i].push(alpha);
            }
        }

        let mut citers: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); paper_ids.len()];
        for (alpha, record) in corpus.papers().values().enumerate() {
            for cited in &record.refs {
                let beta = paper_idx(cited);
                let cited_authors = &paper_authors[beta];
                for &i in &paper_authors[alpha] {
                    // per-author self-citation exclusion
                    if cited_authors.binary_search(&i).is_err() {
                        citers[beta].insert(i);
                    }
                }
            }
        }
        let paper_citers: Vec<Vec<usize>> = citers
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect();
        let mut author_cites = vec![Vec::new(); author_ids.len()];
        for (beta, cs) in paper_citers.iter().enumerate() {
            for &i in cs {
                author_cites[i].push(beta);
            }
        }

        Ok(BipartiteNetwork {
            author_ids,
            paper_ids,
            paper_authors,
            author_papers,
            paper_citers,
            author_cites,
        })
    }

    /// M.
    pub fn num_authors(&self) -> usize {
        self.author_ids.len()
    }

    /// N.
    pub fn num_papers(&self) -> usize {
        self.paper_ids.len()
    }

    pub fn author_ids(&self) -> &[AuthorId] {
        &self.author_ids
    }

    pub fn paper_ids(&self) -> &[PaperId] {
        &self.paper_ids
    }

    pub fn author_index(&self, id: &str) -> Option<usize> {
        self.author_ids
            .binary_search_by(|a| a.as_str().cmp(id))
            .ok()
    }

    pub fn paper_index(&self, id: &str) -> Option<usize> {
        self.paper_ids.binary_search_by(|p| p.as_str().cmp(id)).ok()
    }

    /// Number of authors of paper `alpha`.
    pub fn out_degree(&self, alpha: usize) -> usize {
        self.paper_authors[alpha].len()
    }

    pub fn authors_of(&self, alpha: usize) -> &[usize] {
        &self.paper_authors[alpha]
    }

    pub fn papers_of(&self, author: usize) -> &[usize] {
        &self.author_papers[author]
    }

    /// Authors with a cite link to paper `alpha`.
    pub fn citers_of(&self, alpha: usize) -> &[usize] {
        &self.paper_citers[alpha]
    }

    pub fn cited_by(&self, author: usize) -> &[usize] {
        &self.author_cites[author]
    }

    pub fn cites(&self, author: usize, alpha: usize) -> bool {
        self.paper_citers[alpha].binary_search(&author).is_ok()
    }

    pub fn is_author(&self, alpha: usize, author: usize) -> bool {
        self.paper_authors[alpha].binary_search(&author).is_ok()
    }

    /// Number of ones in `A`.
    pub fn cite_links(&self) -> usize {
        self.paper_citers.iter().map(Vec::len).sum()
    }

    /// Number of ones in `B`.
    pub fn authorship_links(&self) -> usize {
        self.paper_authors.iter().map(Vec::len).sum()
    }

    /// `A` as `author_id,paper_id` rows.
    pub fn write_cite_edges(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["author_id", "paper_id"])?;
        for (i, papers) in self.author_cites.iter().enumerate() {
            for &alpha in papers {
                w.write_record([self.author_ids[i].as_str(), self.paper_ids[alpha].as_str()])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// `B` as `paper_id,author_id` rows.
    pub fn write_authorship_edges(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["paper_id", "author_id"])?;
        for (alpha, authors) in self.paper_authors.iter().enumerate() {
            for &i in authors {
                w.write_record([self.paper_ids[alpha].as_str(), self.author_ids[i].as_str()])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Paper-to-paper citations, indexed like [`BipartiteNetwork::paper_ids`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    paper_ids: Vec<PaperId>,
    refs: Vec<Vec<usize>>,
    in_degree: Vec<usize>,
}

impl CitationGraph {
    pub fn build(corpus: &Corpus) -> Self {
        let paper_ids: Vec<PaperId> = corpus.papers().keys().cloned().collect();
        let mut in_degree = vec![0; paper_ids.len()];
        let refs = corpus
            .papers()
            .values()
            .map(|p| {
                let mut out: Vec<usize> = p
                    .refs
                    .iter()
                    .map(|r| {
                        paper_ids
                            .binary_search(r)
                            .expect("refs resolved at ingestion")
                    })
                    .collect();
                out.sort_unstable();
                for &beta in &out {
                    in_degree[beta] += 1;
                }
                out
            })
            .collect();
        CitationGraph {
            paper_ids,
            refs,
            in_degree,
        }
    }

    pub fn paper_ids(&self) -> &[PaperId] {
        &self.paper_ids
    }

    pub fn refs_of(&self, alpha: usize) -> &[usize] {
        &self.refs[alpha]
    }

    pub fn in_degree(&self) -> &[usize] {
        &self.in_degree
    }

    pub fn edge_count(&self) -> usize {
        self.refs.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(text: &str) -> Corpus {
        Corpus::from_jsonl_str(text).unwrap().corpus
    }

    // p1 by {a1,a2} cites p2 and p4; p2 by {a3} cites p3; p3 by {a4}; p4 by {a5}.
    const FIG1: &str = r#"{"id":"p1","authors":["a1","a2"],"refs":["p2","p4"]}
{"id":"p2","authors":["a3"],"refs":["p3"]}
{"id":"p3","authors":["a4"]}
{"id":"p4","authors":["a5"]}"#;

    #[test]
    fn figure_one_instance() {
        let net = BipartiteNetwork::build(&corpus(FIG1)).unwrap();
        assert_eq!(net.authorship_links(), 5);
        assert_eq!(net.cite_links(), 5);
        let link =
            |a: &str, p: &str| net.cites(net.author_index(a).unwrap(), net.paper_index(p).unwrap());
        for (a, p) in [
            ("a1", "p2"),
            ("a2", "p2"),
            ("a1", "p4"),
            ("a2", "p4"),
            ("a3", "p3"),
        ] {
            assert!(link(a, p), "{a}->{p}");
        }
        assert!(!link("a3", "p1"));
        assert_eq!(net.out_degree(net.paper_index("p1").unwrap()), 2);
    }

    #[test]
    fn full_author_overlap_creates_no_links() {
        let net = BipartiteNetwork::build(&corpus(
            r#"{"id":"p1","authors":["a1","a2"],"refs":["p2"]}
{"id":"p2","authors":["a1","a2"]}"#,
        ))
        .unwrap();
        assert_eq!(net.cite_links(), 0);
    }

    #[test]
    fn partial_overlap_excludes_shared_author_only() {
        let net = BipartiteNetwork::build(&corpus(
            r#"{"id":"p1","authors":["a1","a2"],"refs":["p2"]}
{"id":"p2","authors":["a2","a3"]}"#,
        ))
        .unwrap();
        let p2 = net.paper_index("p2").unwrap();
        let citers: Vec<&str> = net
            .citers_of(p2)
            .iter()
            .map(|&i| net.author_ids()[i].as_str())
            .collect();
        assert_eq!(citers, ["a1"]);
        assert_eq!(net.cite_links(), 1);
    }

    #[test]
    fn repeated_citation_stays_binary() {
        let net = BipartiteNetwork::build(&corpus(
            r#"{"id":"p1","authors":["a1"],"refs":["p3"]}
{"id":"p2","authors":["a1"],"refs":["p3"]}
{"id":"p3","authors":["a2"]}"#,
        ))
        .unwrap();
        assert_eq!(net.cite_links(), 1);
    }

    #[test]
    fn empty_corpus_rejected() {
        let err = BipartiteNetwork::build(&Corpus::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus { .. }));
    }

    #[test]
    fn citation_graph_in_degrees() {
        let g = CitationGraph::build(&corpus(FIG1));
        assert_eq!(g.in_degree(), &[0, 1, 1, 1]);
        assert_eq!(g.edge_count(), 3);

        let g = CitationGraph::build(&corpus(
            r#"{"id":"p1","authors":["a1"]}
{"id":"p2","authors":["a2"],"refs":["p1"]}"#,
        ));
        assert_eq!(g.in_degree(), &[1, 0]);

        let g = CitationGraph::build(&corpus(
            r#"{"id":"p1","authors":["a1"]}
{"id":"p2","authors":["a2"]}"#,
        ));
        assert_eq!(g.in_degree(), &[0, 0]);
    }

    #[test]
    fn edge_dumps() {
        let net = BipartiteNetwork::build(&corpus(FIG1)).unwrap();
        let mut buf = Vec::new();
        net.write_cite_edges(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "author_id,paper_id\na1,p2\na1,p4\na2,p2\na2,p4\na3,p3\n"
        );
        let mut buf = Vec::new();
        net.write_authorship_edges(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
    }
}
