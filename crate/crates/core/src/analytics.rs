//! Rank agreement and co-authorship analysis.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::dataset::{AuthorId, Corpus};
use crate::ranking::{format_sig, RankingTable};
use crate::{Error, Result};

/// Kendall's tau with all pairs in the denominator (tau-a). Pairs tied in
/// either vector count towards `pairs` only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauResult {
    pub tau: f64,
    pub concordant: u64,
    pub discordant: u64,
    pub pairs: u64,
}

fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0;
    let mut run = 0u64;
    let mut last: Option<T> = None;
    for x in sorted {
        if last.as_ref() == Some(&x) {
            run += 1;
        } else {
            total += run * (run.saturating_sub(1)) / 2;
            run = 1;
            last = Some(x);
        }
    }
    total + run * run.saturating_sub(1) / 2
}

/// Sorts `v` and returns the number of pairs `i < j` with `v[i] > v[j]`.
fn count_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut v[..mid], buf) + count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            inv += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    inv
}

/// Knight's O(n log n) pair counting over two aligned score vectors.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<TauResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            what: "kendall tau inputs",
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewEntries(n));
    }
    if let Some(k) = a
        .iter()
        .zip(b)
        .position(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::NonFinite(k));
    }
    let cmp = |x: &f64, y: &f64| x.partial_cmp(y).unwrap_or(Ordering::Equal);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp(&a[i], &a[j]).then_with(|| cmp(&b[i], &b[j])));

    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let tied_a = tied_pairs(order.iter().map(|&i| a[i]));
    let tied_both = tied_pairs(order.iter().map(|&i| (a[i], b[i])));

    let mut by_b: Vec<f64> = order.iter().map(|&i| b[i]).collect();
    let discordant = count_inversions(&mut by_b, &mut Vec::with_capacity(n));
    let tied_b = tied_pairs(by_b.iter().copied());

    // add before subtracting: tied_a + tied_b may exceed pairs
    let concordant = pairs + tied_both - tied_a - tied_b - discordant;
    Ok(TauResult {
        tau: (concordant as f64 - discordant as f64) / pairs as f64,
        concordant,
        discordant,
        pairs,
    })
}

fn check_same_entities(a: &RankingTable, b: &RankingTable) -> Result<()> {
    let only_a: Vec<String> = a
        .ids()
        .filter(|id| !b.contains(id))
        .map(String::from)
        .collect();
    let only_b: Vec<String> = b
        .ids()
        .filter(|id| !a.contains(id))
        .map(String::from)
        .collect();
    if only_a.is_empty() && only_b.is_empty() {
        Ok(())
    } else {
        let sorted = |mut v: Vec<String>| {
            v.sort();
            v
        };
        Err(Error::EntityMismatch {
            only_a: sorted(only_a),
            only_b: sorted(only_b),
        })
    }
}

/// Kendall tau between the scores of two tables over the same entities.
pub fn kendall_tau_tables(a: &RankingTable, b: &RankingTable) -> Result<TauResult> {
    check_same_entities(a, b)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = a
        .rows()
        .iter()
        .map(|r| (r.score, b.get(&r.id).expect("checked").score))
        .unzip();
    kendall_tau(&xs, &ys)
}

/// Writes `entity_id,rank_a,score_a,rank_b,score_b` in `a`'s order and
/// returns the row count.
pub fn scatter_export(a: &RankingTable, b: &RankingTable, out: impl Write) -> Result<usize> {
    check_same_entities(a, b)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["entity_id", "rank_a", "score_a", "rank_b", "score_b"])?;
    for ra in a.rows() {
        let rb = b.get(&ra.id).expect("checked");
        w.write_record([
            ra.id.as_str(),
            &ra.rank.to_string(),
            &format_sig(ra.score, 10),
            &rb.rank.to_string(),
            &format_sig(rb.score, 10),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(a.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Leader,
    Follower,
    Isolated,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Leader => "leader",
            Role::Follower => "follower",
            Role::Isolated => "isolated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoauthorComparison {
    pub author: AuthorId,
    pub own_score: f64,
    /// Mean over distinct co-authors; `None` when there are none.
    pub coauthor_mean: Option<f64>,
    pub coauthor_count: usize,
    pub role: Role,
}

/// Distinct co-author indices per author, authors indexed by ascending id.
fn coauthor_sets(corpus: &Corpus) -> Vec<BTreeSet<usize>> {
    let ids: Vec<&AuthorId> = corpus.authors().iter().collect();
    let idx = |a: &AuthorId| ids.binary_search(&a).expect("author indexed");
    let mut sets = vec![BTreeSet::new(); ids.len()];
    for paper in corpus.papers().values() {
        let members: Vec<usize> = paper.authors.iter().map(idx).collect();
        for &i in &members {
            sets[i].extend(members.iter().copied().filter(|&j| j != i));
        }
    }
    sets
}

/// Compares each author's score with the mean score of their co-authors.
/// `author_scores` is indexed by ascending author id.
pub fn coauthor_comparison(
    corpus: &Corpus,
    author_scores: &[f64],
) -> Result<Vec<CoauthorComparison>> {
    if author_scores.len() != corpus.num_authors() {
        return Err(Error::LengthMismatch {
            what: "author scores",
            expected: corpus.num_authors(),
            got: author_scores.len(),
        });
    }
    let sets = coauthor_sets(corpus);
    Ok(corpus
        .authors()
        .iter()
        .zip(&sets)
        .zip(author_scores)
        .map(|((author, set), &own)| {
            let coauthor_mean = (!set.is_empty())
                .then(|| set.iter().map(|&j| author_scores[j]).sum::<f64>() / set.len() as f64);
            let role = match coauthor_mean {
                None => Role::Isolated,
                Some(mean) if own > mean => Role::Leader,
                Some(_) => Role::Follower,
            };
            CoauthorComparison {
                author: author.clone(),
                own_score: own,
                coauthor_mean,
                coauthor_count: set.len(),
                role,
            }
        })
        .collect())
}

pub fn write_coauthor_comparison(rows: &[CoauthorComparison], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "author_id",
        "own_score",
        "coauthor_mean",
        "coauthor_count",
        "role",
    ])?;
    for r in rows {
        w.write_record([
            r.author.as_str(),
            &format_sig(r.own_score, 10),
            &r.coauthor_mean
                .map(|m| format_sig(m, 10))
                .unwrap_or_default(),
            &r.coauthor_count.to_string(),
            r.role.as_str(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoauthorNode {
    pub id: String,
    pub ap_score: f64,
    pub cc_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoauthorGraph {
    /// In AP ranking order.
    pub nodes: Vec<CoauthorNode>,
    /// `(u, v, papers together)` with `u < v` indexing `nodes`.
    pub edges: Vec<(usize, usize, u32)>,
    /// Requested size when it exceeded the number of authors.
    pub clamped_from: Option<usize>,
}

/// Co-authorship among the `top_k` authors by AP score. Edge weight is the
/// number of papers two selected authors wrote together.
pub fn coauthor_graph(
    corpus: &Corpus,
    ap: &RankingTable,
    cc: &RankingTable,
    top_k: usize,
) -> Result<CoauthorGraph> {
    if top_k == 0 {
        return Err(Error::InvalidConfig("top_k must be at least 1".into()));
    }
    let m = ap.len();
    let clamped_from = (top_k > m).then_some(top_k);
    let nodes = ap.rows()[..top_k.min(m)]
        .iter()
        .map(|r| {
            let cc_score = cc
                .get(&r.id)
                .ok_or_else(|| Error::MissingScore(r.id.clone()))?
                .score;
            Ok(CoauthorNode {
                id: r.id.clone(),
                ap_score: r.score,
                cc_score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let position: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(k, n)| (n.id.as_str(), k))
        .collect();

    let mut weights: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for paper in corpus.papers().values() {
        let mut members: Vec<usize> = paper
            .authors
            .iter()
            .filter_map(|a| position.get(a.as_str()).copied())
            .collect();
        members.sort_unstable();
        for (x, &u) in members.iter().enumerate() {
            for &v in &members[x + 1..] {
                *weights.entry((u, v)).or_insert(0) += 1;
            }
        }
    }
    Ok(CoauthorGraph {
        nodes,
        edges: weights.into_iter().map(|((u, v), w)| (u, v, w)).collect(),
        clamped_from,
    })
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

impl CoauthorGraph {
    pub fn write_dot(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "graph coauthors {{")?;
        for n in &self.nodes {
            writeln!(
                out,
                "  {} [apscore={}, ccscore={}];",
                dot_quote(&n.id),
                format_sig(n.ap_score, 10),
                format_sig(n.cc_score, 10)
            )?;
        }
        for &(u, v, w) in &self.edges {
            writeln!(
                out,
                "  {} -- {} [weight={}];",
                dot_quote(&self.nodes[u].id),
                dot_quote(&self.nodes[v].id),
                w
            )?;
        }
        writeln!(out, "}}")
    }

    pub fn write_graphml(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(
            out,
            r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
        )?;
        writeln!(
            out,
            r#"  <key id="apscore" for="node" attr.name="apscore" attr.type="double"/>"#
        )?;
        writeln!(
            out,
            r#"  <key id="ccscore" for="node" attr.name="ccscore" attr.type="double"/>"#
        )?;
        writeln!(
            out,
            r#"  <key id="weight" for="edge" attr.name="weight" attr.type="int"/>"#
        )?;
        writeln!(out, r#"  <graph id="coauthors" edgedefault="undirected">"#)?;
        for n in &self.nodes {
            writeln!(out, r#"    <node id="{}">"#, xml_escape(&n.id))?;
            writeln!(
                out,
                r#"      <data key="apscore">{}</data>"#,
                format_sig(n.ap_score, 10)
            )?;
            writeln!(
                out,
                r#"      <data key="ccscore">{}</data>"#,
                format_sig(n.cc_score, 10)
            )?;
            writeln!(out, "    </node>")?;
        }
        for &(u, v, w) in &self.edges {
            writeln!(
                out,
                r#"    <edge source="{}" target="{}">"#,
                xml_escape(&self.nodes[u].id),
                xml_escape(&self.nodes[v].id)
            )?;
            writeln!(out, r#"      <data key="weight">{w}</data>"#)?;
            writeln!(out, "    </edge>")?;
        }
        writeln!(out, "  </graph>")?;
        writeln!(out, "</graphml>")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(a: &[f64], b: &[f64]) -> (u64, u64) {
        let (mut c, mut d) = (0, 0);
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                let s = (a[i] - a[j]).signum() * (b[i] - b[j]).signum();
                if a[i] != a[j] && b[i] != b[j] {
                    if s > 0.0 {
                        c += 1;
                    } else {
                        d += 1;
                    }
                }
            }
        }
        (c, d)
    }

    #[test]
    fn tau_examples() {
        let r = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.tau, 1.0);
        let r = kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.tau, -1.0);
        let r = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!((r.concordant, r.discordant, r.pairs), (2, 1, 3));
        assert_eq!(r.tau, 1.0 / 3.0);
    }

    #[test]
    fn tau_ties_count_in_denominator_only() {
        let r = kendall_tau(&[1.0, 1.0, 2.0], &[5.0, 6.0, 6.0]).unwrap();
        // (0,1) tied in a, (1,2) tied in b, (0,2) concordant
        assert_eq!((r.concordant, r.discordant, r.pairs), (1, 0, 3));
        let r = kendall_tau(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((r.concordant, r.discordant, r.tau), (0, 0, 0.0));
    }

    #[test]
    fn tau_errors() {
        assert!(matches!(
            kendall_tau(&[1.0], &[1.0]),
            Err(Error::TooFewEntries(1))
        ));
        assert!(kendall_tau(&[1.0, 2.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn tau_matches_all_pairs(v in prop::collection::vec((0u8..5, 0u8..5), 2..40)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.iter().map(|&(x, y)| (x as f64, y as f64)).unzip();
            let r = kendall_tau(&a, &b).unwrap();
            prop_assert_eq!((r.concordant, r.discordant), brute(&a, &b));
            prop_assert!((-1.0..=1.0).contains(&r.tau));
            let s = kendall_tau(&b, &a).unwrap();
            prop_assert_eq!(r, s);
            // strictly increasing transform
            let a3: Vec<f64> = a.iter().map(|x| x * x * x + 2.0 * x - 7.0).collect();
            prop_assert_eq!(kendall_tau(&a3, &b).unwrap(), r);
        }

        #[test]
        fn leadership_is_scale_invariant(scores in prop::collection::vec(0.01f64..10.0, 4), k in 0.1f64..100.0) {
            let corpus = Corpus::from_jsonl_str(
                r#"{"id":"p1","authors":["a","b"]}
    {"id":"p2","authors":["b","c","d"]}"#).unwrap().corpus;
            let scaled: Vec<f64> = scores.iter().map(|s| s * k).collect();
            let r1 = coauthor_comparison(&corpus, &scores).unwrap();
            let r2 = coauthor_comparison(&corpus, &scaled).unwrap();
            for (x, y) in r1.iter().zip(&r2) {
                prop_assert_eq!(x.role, y.role);
            }
        }
    }

    fn corpus(text: &str) -> Corpus {
        Corpus::from_jsonl_str(text).unwrap().corpus
    }

    #[test]
    fn tau_mostly_tied() {
        let a = [0.0, 0.0, 0.0, 1.0];
        let b = [0.0, 0.0, 0.0, 0.0];
        let r = kendall_tau(&a, &b).unwrap();
        assert_eq!((r.concordant, r.discordant, r.pairs), (0, 0, 6));
        let r = kendall_tau(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!((r.concordant, r.discordant), (1, 0));
    }

    #[test]
    fn leader_and_follower() {
        let c = corpus(r#"{"id":"p1","authors":["a","b"]}"#);
        let rows = coauthor_comparison(&c, &[2.0, 1.0]).unwrap();
        assert_eq!(rows[0].role, Role::Leader);
        assert_eq!(rows[1].role, Role::Follower);

        let c = corpus(
            r#"{"id":"p1","authors":["x","y"]}
{"id":"p2","authors":["x","z"]}
{"id":"p3","authors":["x","z"]}"#,
        );
        let rows = coauthor_comparison(&c, &[2.0, 1.0, 3.0]).unwrap();
        assert_eq!(rows[0].coauthor_mean, Some(2.0));
        assert_eq!(rows[0].coauthor_count, 2);
        assert_eq!(rows[0].role, Role::Follower);

        let c = corpus(
            r#"{"id":"p1","authors":["x"]}
{"id":"p2","authors":["y"]}"#,
        );
        let rows = coauthor_comparison(&c, &[2.0, 1.0]).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.role == Role::Isolated && r.coauthor_mean.is_none()));
        assert!(coauthor_comparison(&c, &[1.0]).is_err());
    }

    fn tables(ids: &[&str], ap: &[f64], cc: &[f64]) -> (RankingTable, RankingTable) {
        (
            RankingTable::from_scores(ids, ap).unwrap(),
            RankingTable::from_scores(ids, cc).unwrap(),
        )
    }

    #[test]
    fn graph_small_cases() {
        let c = corpus(r#"{"id":"p1","authors":["a","b"]}"#);
        let (ap, cc) = tables(&["a", "b"], &[0.5, 0.5], &[0.0, 0.0]);
        let g = coauthor_graph(&c, &ap, &cc, 2).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.edges, [(0, 1, 1)]);
        assert_eq!(g.clamped_from, None);

        let g = coauthor_graph(&c, &ap, &cc, 1).unwrap();
        assert_eq!((g.nodes.len(), g.edges.len()), (1, 0));

        let g = coauthor_graph(&c, &ap, &cc, 150).unwrap();
        assert_eq!(g.clamped_from, Some(150));
        assert_eq!(g.nodes.len(), 2);

        assert!(coauthor_graph(&c, &ap, &cc, 0).is_err());

        let c = corpus(
            r#"{"id":"p1","authors":["a","b"]}
{"id":"p2","authors":["b","a"]}
{"id":"p3","authors":["a","b","c"]}"#,
        );
        let (ap, cc) = tables(&["a", "b", "c"], &[2.0, 1.0, 0.5], &[1.0, 1.0, 1.0]);
        let g = coauthor_graph(&c, &ap, &cc, 2).unwrap();
        assert_eq!(g.edges, [(0, 1, 3)]);
    }

    #[test]
    fn graph_exports() {
        let c = corpus(r#"{"id":"p1","authors":["a","b\"x"]}"#);
        let (ap, cc) = tables(&["a", "b\"x"], &[0.5, 0.25], &[3.0, 0.0]);
        let g = coauthor_graph(&c, &ap, &cc, 2).unwrap();
        let mut dot = Vec::new();
        g.write_dot(&mut dot).unwrap();
        let dot = String::from_utf8(dot).unwrap();
        assert_eq!(
            dot,
            "graph coauthors {\n  \"a\" [apscore=0.5000000000, ccscore=3.000000000];\n  \"b\\\"x\" [apscore=0.2500000000, ccscore=0];\n  \"a\" -- \"b\\\"x\" [weight=1];\n}\n"
        );
        let mut xml = Vec::new();
        g.write_graphml(&mut xml).unwrap();
        let xml = String::from_utf8(xml).unwrap();
        assert!(xml.contains(r#"<edge source="a" target="b&quot;x">"#));
        assert!(xml.contains(r#"<data key="weight">1</data>"#));
    }

    #[test]
    fn scatter_rows() {
        let (a, b) = tables(&["p1", "p2"], &[1.2, 0.8], &[1.0, 0.0]);
        let mut out = Vec::new();
        assert_eq!(scatter_export(&a, &b, &mut out).unwrap(), 2);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "entity_id,rank_a,score_a,rank_b,score_b\np1,1,1.200000000,1,1.000000000\np2,2,0.8000000000,2,0\n"
        );
        let c = RankingTable::from_scores(&["q1"], &[1.0]).unwrap();
        match scatter_export(&a, &c, Vec::new()) {
            Err(Error::EntityMismatch { only_a, only_b }) => {
                assert_eq!(only_a, ["p1", "p2"]);
                assert_eq!(only_b, ["q1"]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(kendall_tau_tables(&a, &b).unwrap().tau, 1.0);
    }
}
