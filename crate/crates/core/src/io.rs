//! Text and JSON formats for graphs, weightings, partitions, targets and
//! certificates. Every rational is written as a `"p/q"` string.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Clique, Edge, Graph, Matching, Vertex};
use crate::lp::FarkasCertificate;
use crate::rational::{parse_fraction, to_fraction_string, Rational};
use crate::recursion::MatchingPartition;
use crate::weighting::CliqueWeighting;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank lines that are not `#` comments, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("{what} {tok:?} is not a non-negative integer")))
}

/// Header `"n m"` then `m` lines `"u v"`.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header \"n m\""))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(hl, format!("header must be \"n m\", got {header:?}")));
    }
    let n = parse_usize(toks[0], hl, "vertex count")?;
    let m = parse_usize(toks[1], hl, "edge count")?;
    let mut seen = BTreeSet::new();
    let mut last_line = hl;
    for (ln, l) in lines {
        last_line = ln;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(ln, format!("edge line must be \"u v\", got {l:?}")));
        }
        let u = parse_usize(toks[0], ln, "vertex")?;
        let v = parse_usize(toks[1], ln, "vertex")?;
        if u == v {
            return Err(parse_err(ln, format!("self-loop at vertex {u}")));
        }
        if u.max(v) >= n {
            return Err(parse_err(ln, format!("vertex {} out of range 0..{n}", u.max(v))));
        }
        if !seen.insert(Edge::new(u, v)) {
            return Err(parse_err(ln, format!("duplicate edge {u}-{v}")));
        }
    }
    if seen.len() != m {
        return Err(parse_err(last_line, format!("header announces {m} edges, found {}", seen.len())));
    }
    Graph::from_edges(n, seen)
}

pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.num_edges());
    for e in g.edges() {
        s.push_str(&format!("{} {}\n", e.u(), e.v()));
    }
    s
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    vertices: Vec<Vertex>,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct WeightingJson {
    r: usize,
    entries: Vec<EntryJson>,
}

pub fn weighting_to_value(w: &CliqueWeighting) -> serde_json::Value {
    let doc = WeightingJson {
        r: w.r(),
        entries: w
            .iter()
            .map(|(k, x)| EntryJson {
                vertices: k.vertices().to_vec(),
                weight: to_fraction_string(x),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("weighting serializes")
}

/// One entry per line, `r` first.
pub fn write_weighting(w: &CliqueWeighting) -> String {
    write_weighting_with(w, &[])
}

/// As [`write_weighting`], with extra top-level fields after `r`.
pub fn write_weighting_with(w: &CliqueWeighting, extra: &[(&str, serde_json::Value)]) -> String {
    let head: String = extra
        .iter()
        .map(|(k, v)| format!("  {}: {},\n", serde_json::to_string(k).expect("key"), v))
        .collect();
    let entries: Vec<String> = w
        .iter()
        .map(|(k, x)| {
            let e = EntryJson {
                vertices: k.vertices().to_vec(),
                weight: to_fraction_string(x),
            };
            format!("    {}", serde_json::to_string(&e).expect("entry serializes"))
        })
        .collect();
    if entries.is_empty() {
        return format!("{{\"r\": {},\n{head}  \"entries\": []\n}}\n", w.r());
    }
    format!("{{\"r\": {},\n{head}  \"entries\": [\n{}\n  ]\n}}\n", w.r(), entries.join(",\n"))
}

pub fn parse_weighting(text: &str) -> Result<CliqueWeighting> {
    let doc: WeightingJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    weighting_from_doc(doc)
}

pub fn weighting_from_value(v: serde_json::Value) -> Result<CliqueWeighting> {
    let doc: WeightingJson = serde_json::from_value(v)?;
    weighting_from_doc(doc)
}

fn weighting_from_doc(doc: WeightingJson) -> Result<CliqueWeighting> {
    let mut w = CliqueWeighting::new(doc.r);
    let mut seen = BTreeSet::new();
    for (i, e) in doc.entries.into_iter().enumerate() {
        let bad = |msg: String| Error::Format(format!("entry {i}: {msg}"));
        if e.vertices.len() != doc.r {
            return Err(bad(format!("{} vertices, expected {}", e.vertices.len(), doc.r)));
        }
        if !e.vertices.windows(2).all(|p| p[0] < p[1]) {
            return Err(bad("vertices must be strictly ascending".into()));
        }
        if e.weight.contains('.') {
            return Err(bad(format!("weight {:?} is not an exact fraction", e.weight)));
        }
        let x = parse_fraction(&e.weight).map_err(|err| bad(err.to_string()))?;
        let k = Clique::new(e.vertices);
        if !seen.insert(k.clone()) {
            return Err(bad(format!("clique {k} listed twice")));
        }
        w.add(k, x);
    }
    Ok(w)
}

/// `"u-v,u-v,..."`; the empty string is the empty matching.
pub fn parse_matching(s: &str) -> Result<Matching> {
    parse_matching_line(s, 1)
}

fn parse_matching_line(s: &str, line: usize) -> Result<Matching> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Matching::empty());
    }
    let mut edges = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        let (u, v) = tok
            .split_once('-')
            .ok_or_else(|| parse_err(line, format!("pair {tok:?} is not \"u-v\"")))?;
        let u = parse_usize(u.trim(), line, "vertex")?;
        let v = parse_usize(v.trim(), line, "vertex")?;
        if u == v {
            return Err(parse_err(line, format!("self-loop at vertex {u}")));
        }
        edges.push(Edge::new(u, v));
    }
    Matching::new(edges).map_err(|e| parse_err(line, e.to_string()))
}

pub fn write_matching(m: &Matching) -> String {
    m.edges().iter().map(|e| format!("{}-{}", e.u(), e.v())).collect::<Vec<_>>().join(",")
}

/// One matching per line.
pub fn parse_partition(text: &str) -> Result<MatchingPartition> {
    let parts = content_lines(text)
        .map(|(ln, l)| parse_matching_line(l, ln))
        .collect::<Result<Vec<_>>>()?;
    MatchingPartition::new(parts)
}

pub fn write_partition(p: &MatchingPartition) -> String {
    p.parts().iter().map(|m| write_matching(m) + "\n").collect()
}

/// Lines `"u v p/q"`.
pub fn parse_targets(text: &str) -> Result<BTreeMap<Edge, Rational>> {
    let mut out = BTreeMap::new();
    for (ln, l) in content_lines(text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(ln, format!("target line must be \"u v p/q\", got {l:?}")));
        }
        let u = parse_usize(toks[0], ln, "vertex")?;
        let v = parse_usize(toks[1], ln, "vertex")?;
        if u == v {
            return Err(parse_err(ln, format!("self-loop at vertex {u}")));
        }
        let x = parse_fraction(toks[2]).map_err(|e| parse_err(ln, e.to_string()))?;
        if out.insert(Edge::new(u, v), x).is_some() {
            return Err(parse_err(ln, format!("duplicate target for {u}-{v}")));
        }
    }
    Ok(out)
}

pub fn write_targets(t: &BTreeMap<Edge, Rational>) -> String {
    t.iter()
        .map(|(e, x)| format!("{} {} {}\n", e.u(), e.v(), to_fraction_string(x)))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct MultiplierJson {
    edge: [Vertex; 2],
    y: String,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    kind: String,
    r: usize,
    multipliers: Vec<MultiplierJson>,
}

pub fn certificate_to_value(c: &FarkasCertificate) -> serde_json::Value {
    let doc = CertificateJson {
        kind: "farkas".into(),
        r: c.r,
        multipliers: c
            .multipliers
            .iter()
            .map(|(e, y)| MultiplierJson {
                edge: e.endpoints(),
                y: to_fraction_string(y),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("certificate serializes")
}

pub fn parse_certificate(text: &str) -> Result<FarkasCertificate> {
    let doc: CertificateJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    if doc.kind != "farkas" {
        return Err(Error::Format(format!("unknown certificate kind {:?}", doc.kind)));
    }
    let mut multipliers = BTreeMap::new();
    for m in doc.multipliers {
        let e = Edge::try_new(m.edge[0], m.edge[1])?;
        multipliers.insert(e, parse_fraction(&m.y)?);
    }
    Ok(FarkasCertificate { r: doc.r, multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kminusm::decompose_clique_minus_matching;
    use crate::lp::{lp_feasible, LpOutcome};
    use crate::rational::ratio;
    use crate::weighting::{unit_target, verify_weighting};
    use proptest::prelude::*;

    #[test]
    fn graph_round_trip() {
        let g = Graph::complete(6).with_edges_removed([Edge::new(0, 1)]);
        let text = write_graph(&g);
        assert!(text.starts_with("6 14\n"));
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn graph_errors_name_the_line() {
        let cases = [
            ("4 2\n0 1\n3 3\n", 3, "self-loop"),
            ("4 1\n0 9\n", 2, "out of range"),
            ("4 2\n0 1\n1 0\n", 3, "duplicate"),
            ("4 2\n0 1\n", 2, "announces"),
            ("4\n", 1, "header"),
            ("4 1\n0 x\n", 2, "not a non-negative"),
            ("# comment\n\n4 1\n0 1 2\n", 4, "edge line"),
        ];
        for (text, line, needle) in cases {
            match parse_graph(text) {
                Err(Error::Parse { line: l, message }) => {
                    assert_eq!(l, line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn weighting_round_trip_reverifies() {
        let m = parse_matching("0-1").unwrap();
        let w = decompose_clique_minus_matching(3, 8, &m).unwrap();
        let text = write_weighting(&w);
        assert!(text.contains("\"weight\":\"1/5\""));
        assert!(text.starts_with("{\"r\": 3,"));
        let back = parse_weighting(&text).unwrap();
        assert_eq!(back, w);
        let g = Graph::complete(8).with_edges_removed([Edge::new(0, 1)]);
        assert!(verify_weighting(&g, &back, unit_target).pass);
    }

    #[test]
    fn empty_weighting_round_trip() {
        let w = CliqueWeighting::new(4);
        assert_eq!(parse_weighting(&write_weighting(&w)).unwrap(), w);
        let tagged = write_weighting_with(&w, &[("provenance", serde_json::json!(["a", "b"]))]);
        let v: serde_json::Value = serde_json::from_str(&tagged).unwrap();
        assert_eq!(v["provenance"][1], "b");
        assert_eq!(parse_weighting(&tagged).unwrap(), w);
    }

    #[test]
    fn weighting_rejects_floats_and_bad_entries() {
        let bad = [
            r#"{"r":3,"entries":[{"vertices":[0,1,2],"weight":"0.5"}]}"#,
            r#"{"r":3,"entries":[{"vertices":[0,2,1],"weight":"1/2"}]}"#,
            r#"{"r":3,"entries":[{"vertices":[0,1],"weight":"1/2"}]}"#,
            r#"{"r":3,"entries":[{"vertices":[0,1,2],"weight":"1/0"}]}"#,
            r#"{"r":3,"entries":[{"vertices":[0,1,2],"weight":0.5}]}"#,
        ];
        for text in bad {
            assert!(parse_weighting(text).is_err(), "{text}");
        }
        assert!(matches!(parse_weighting("{\n\"r\": 3,\n oops"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn partition_and_targets() {
        let p = parse_partition("0-1,2-3\n\n# second\n1-2\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(parse_partition(&write_partition(&p)).unwrap(), p);
        assert!(matches!(parse_partition("0-1\n1-1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_partition("0-1,1-2\n"), Err(Error::Parse { line: 1, .. })));
        let t = parse_targets("0 1 6/7\n2 3 1\n").unwrap();
        assert_eq!(t[&Edge::new(0, 1)], ratio(6, 7));
        assert_eq!(parse_targets(&write_targets(&t)).unwrap(), t);
        assert!(matches!(parse_targets("0 1 6/7\n1 0 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_targets("0 1 0.9\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn certificate_round_trip() {
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let LpOutcome::Infeasible(c) = lp_feasible(&star, 3, unit_target).unwrap() else {
            panic!("star is infeasible")
        };
        let text = serde_json::to_string(&certificate_to_value(&c)).unwrap();
        let back = parse_certificate(&text).unwrap();
        assert_eq!(back, c);
        assert!(back.check(&star, unit_target));
    }

    proptest! {
        #[test]
        fn random_graphs_round_trip(n in 2usize..12, bits in proptest::collection::vec(any::<bool>(), 66)) {
            let mut edges = Vec::new();
            let mut i = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[i % bits.len()] {
                        edges.push((u, v));
                    }
                    i += 1;
                }
            }
            let g = Graph::new(n, edges).unwrap();
            prop_assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
        }
    }
}
