//! Undirected simple graphs on dense vertex ids `0..n`, the structured graphs
//! used throughout the constructions, and clique enumeration.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// An unordered vertex pair stored canonically with `u < v`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "[Vertex; 2]", try_from = "[Vertex; 2]")]
pub struct Edge {
    u: Vertex,
    v: Vertex,
}

impl Edge {
    /// Panics if `a == b`.
    pub fn new(a: Vertex, b: Vertex) -> Self {
        assert_ne!(a, b, "an edge needs two distinct endpoints");
        Edge {
            u: a.min(b),
            v: a.max(b),
        }
    }

    pub fn try_new(a: Vertex, b: Vertex) -> Result<Self> {
        if a == b {
            Err(Error::SelfLoop(a))
        } else {
            Ok(Edge::new(a, b))
        }
    }

    pub fn u(&self) -> Vertex {
        self.u
    }

    pub fn v(&self) -> Vertex {
        self.v
    }

    pub fn endpoints(&self) -> [Vertex; 2] {
        [self.u, self.v]
    }

    pub fn touches(&self, x: Vertex) -> bool {
        self.u == x || self.v == x
    }

    pub fn map(&self, f: impl Fn(Vertex) -> Vertex) -> Edge {
        Edge::new(f(self.u), f(self.v))
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> Self {
        [e.u, e.v]
    }
}

impl TryFrom<[Vertex; 2]> for Edge {
    type Error = Error;

    fn try_from(p: [Vertex; 2]) -> Result<Self> {
        Edge::try_new(p[0], p[1])
    }
}

/// A clique as a strictly increasing vertex tuple.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Clique(Vec<Vertex>);

impl Clique {
    /// Sorts the vertices; panics on repeated vertices.
    pub fn new(mut vertices: Vec<Vertex>) -> Self {
        vertices.sort_unstable();
        assert!(
            vertices.windows(2).all(|w| w[0] < w[1]),
            "clique vertices must be distinct"
        );
        Clique(vertices)
    }

    pub fn try_new(mut vertices: Vec<Vertex>) -> Result<Self> {
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Format(format!("repeated vertex {} in clique", w[0])));
        }
        Ok(Clique(vertices))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: Vertex) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.contains(e.u) && self.contains(e.v)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let vs = &self.0;
        (0..vs.len()).flat_map(move |i| (i + 1..vs.len()).map(move |j| Edge { u: vs[i], v: vs[j] }))
    }

    /// Relabels through `f` and re-sorts. `f` must be injective on the clique.
    pub fn map(&self, f: impl Fn(Vertex) -> Vertex) -> Clique {
        Clique::new(self.0.iter().map(|&x| f(x)).collect())
    }
}

impl fmt::Display for Clique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// A set of pairwise vertex-disjoint edges, kept sorted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize, Deserialize)]
pub struct Matching(Vec<Edge>);

impl Matching {
    pub fn new(mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        let mut seen = BTreeSet::new();
        for e in &edges {
            for x in e.endpoints() {
                if !seen.insert(x) {
                    return Err(Error::InvalidMatching(format!(
                        "vertex {x} is covered twice (edge {e})"
                    )));
                }
            }
        }
        Ok(Matching(edges))
    }

    pub fn empty() -> Self {
        Matching(Vec::new())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn covers(&self, x: Vertex) -> bool {
        self.0.iter().any(|e| e.touches(x))
    }

    pub fn partner(&self, x: Vertex) -> Option<Vertex> {
        self.0.iter().find_map(|e| {
            if e.u == x {
                Some(e.v)
            } else if e.v == x {
                Some(e.u)
            } else {
                None
            }
        })
    }

    /// Edges with both endpoints satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(Vertex) -> bool) -> Matching {
        Matching(self.0.iter().copied().filter(|e| keep(e.u) && keep(e.v)).collect())
    }

    pub fn check_within(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|e| e.v >= n) {
            Some(e) => Err(Error::VertexOutOfRange { vertex: e.v, n }),
            None => Ok(()),
        }
    }
}

/// Undirected simple graph with bitset adjacency rows.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            adj: vec![0; n * words],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert(Edge { u, v });
            }
        }
        g
    }

    /// Builds a graph, rejecting self-loops and out-of-range endpoints.
    /// Repeated edges are merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (a, b) in edges {
            let e = Edge::try_new(a, b)?;
            if e.v >= n {
                return Err(Error::VertexOutOfRange { vertex: e.v, n });
            }
            g.insert(e);
        }
        Ok(g)
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Graph::new(n, edges.into_iter().map(|e| (e.u, e.v)))
    }

    fn bit(&self, u: Vertex, v: Vertex) -> (usize, u64) {
        (u * self.words + v / 64, 1u64 << (v % 64))
    }

    fn insert(&mut self, e: Edge) {
        if self.has_edge(e.u, e.v) {
            return;
        }
        let (i, b) = self.bit(e.u, e.v);
        self.adj[i] |= b;
        let (i, b) = self.bit(e.v, e.u);
        self.adj[i] |= b;
        self.edge_count += 1;
    }

    fn delete(&mut self, e: Edge) {
        if !self.has_edge(e.u, e.v) {
            return;
        }
        let (i, b) = self.bit(e.u, e.v);
        self.adj[i] &= !b;
        let (i, b) = self.bit(e.v, e.u);
        self.adj[i] &= !b;
        self.edge_count -= 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        if u == v || u >= self.n || v >= self.n {
            return false;
        }
        let (i, b) = self.bit(u, v);
        self.adj[i] & b != 0
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.has_edge(e.u, e.v)
    }

    fn row(&self, v: Vertex) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Zero for the graph on no vertices.
    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let n = self.n;
        self.row(v).iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
            .filter(move |&x| x < n)
        })
    }

    /// Vertices other than `v` not adjacent to `v`.
    pub fn non_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n).filter(move |&x| x != v && !self.has_edge(v, x))
    }

    /// Edges in canonical (lexicographic) order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if v > u {
                    out.push(Edge { u, v });
                }
            }
        }
        out
    }

    /// Edges of the complement, in canonical order.
    pub fn non_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    out.push(Edge { u, v });
                }
            }
        }
        out
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for e in self.non_edges() {
            g.insert(e);
        }
        g
    }

    pub fn with_edges_added(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Graph> {
        let mut g = self.clone();
        for e in edges {
            if e.v >= self.n {
                return Err(Error::VertexOutOfRange { vertex: e.v, n: self.n });
            }
            g.insert(e);
        }
        Ok(g)
    }

    pub fn with_edges_removed(&self, edges: impl IntoIterator<Item = Edge>) -> Graph {
        let mut g = self.clone();
        for e in edges {
            g.delete(e);
        }
        g
    }

    /// Subgraph induced on `vertices`, relabelled so that `vertices[i]` becomes `i`.
    pub fn induced(&self, vertices: &[Vertex]) -> Graph {
        let mut g = Graph::empty(vertices.len());
        for (i, &a) in vertices.iter().enumerate() {
            for (j, &b) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    g.insert(Edge::new(i, j));
                }
            }
        }
        g
    }

    pub fn is_clique(&self, vertices: &[Vertex]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &a)| vertices[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// Whether `other` (on the same vertex set) is a spanning subgraph of `self`.
    pub fn contains_spanning(&self, other: &Graph) -> bool {
        self.n == other.n && other.edges().into_iter().all(|e| self.contains_edge(e))
    }

    /// All `r`-cliques in lexicographic order.
    pub fn enumerate_cliques(&self, r: usize) -> Result<Vec<Clique>> {
        if r < 2 || r > self.n {
            return Err(Error::CliqueOrder { r, n: self.n });
        }
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(r);
        let all: Vec<u64> = {
            let mut w = vec![0u64; self.words];
            for v in 0..self.n {
                w[v / 64] |= 1 << (v % 64);
            }
            w
        };
        self.extend_cliques(r, &all, &mut stack, &mut out);
        Ok(out)
    }

    fn extend_cliques(&self, r: usize, cand: &[u64], stack: &mut Vec<Vertex>, out: &mut Vec<Clique>) {
        if stack.len() == r {
            out.push(Clique(stack.clone()));
            return;
        }
        let need = r - stack.len();
        let mut remaining: usize = cand.iter().map(|w| w.count_ones() as usize).sum();
        for (wi, &word) in cand.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                if remaining < need {
                    return;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                remaining -= 1;
                let v = wi * 64 + t;
                // Candidates after v that are adjacent to v.
                let next: Vec<u64> = cand
                    .iter()
                    .zip(self.row(v))
                    .enumerate()
                    .map(|(i, (c, a))| {
                        let keep = match i.cmp(&wi) {
                            std::cmp::Ordering::Less => 0,
                            std::cmp::Ordering::Equal => {
                                if t == 63 {
                                    0
                                } else {
                                    !0u64 << (t + 1)
                                }
                            }
                            std::cmp::Ordering::Greater => !0,
                        };
                        c & a & keep
                    })
                    .collect();
                stack.push(v);
                self.extend_cliques(r, &next, stack, out);
                stack.pop();
            }
        }
    }

    /// Replaces every vertex by `t` pairwise non-adjacent copies, joining
    /// copies exactly when the originals are adjacent. Copy `i` of vertex `v`
    /// gets id `v * t + i`.
    pub fn blow_up(&self, t: usize) -> Result<BlowUp> {
        if t == 0 {
            return Err(Error::precondition("blow-up factor must be positive"));
        }
        let mut g = Graph::empty(self.n * t);
        for e in self.edges() {
            for i in 0..t {
                for j in 0..t {
                    g.insert(Edge::new(e.u * t + i, e.v * t + j));
                }
            }
        }
        let projection = (0..self.n * t).map(|x| x / t).collect();
        Ok(BlowUp {
            graph: g,
            factor: t,
            projection,
        })
    }

    /// `M_r`: pairs `{a_i, b_i}` (ids `2i-2`, `2i-1`) with every edge between
    /// pairs `i` and `j` whenever `|i - j| >= 2`.
    pub fn m_graph(r: usize) -> Graph {
        let mut g = Graph::empty(2 * r);
        for i in 0..r {
            for j in i + 2..r {
                for x in [2 * i, 2 * i + 1] {
                    for y in [2 * j, 2 * j + 1] {
                        g.insert(Edge::new(x, y));
                    }
                }
            }
        }
        g
    }

    /// `W_k`: complete `k`-partite graph on `4k` vertices with classes `{4i..4i+3}`.
    pub fn w_graph(k: usize) -> Graph {
        let mut g = Graph::empty(4 * k);
        for x in 0..4 * k {
            for y in x + 1..4 * k {
                if x / 4 != y / 4 {
                    g.insert(Edge::new(x, y));
                }
            }
        }
        g
    }

    /// The cycle `0-1-...-(n-1)-0`.
    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 3 {
            return Err(Error::precondition("a cycle needs at least 3 vertices"));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Complete multipartite graph on `n` vertices with `parts` near-equal classes.
    pub fn turan(n: usize, parts: usize) -> Result<Graph> {
        if parts == 0 {
            return Err(Error::precondition("Turan graph needs at least one class"));
        }
        let class = |x: usize| x % parts;
        Graph::new(
            n,
            (0..n).flat_map(|x| (x + 1..n).filter(move |&y| class(x) != class(y)).map(move |y| (x, y))),
        )
    }

    /// Finds a partition of the vertices into classes of size four such that
    /// every non-edge lies inside a class, i.e. a spanning copy of `W_{n/4}`.
    pub fn spanning_w_classes(&self) -> Option<Vec<[Vertex; 4]>> {
        if self.n % 4 != 0 {
            return None;
        }
        let comp = self.complement();
        let mut seen = vec![false; self.n];
        let mut by_size: [Vec<Vec<Vertex>>; 5] = Default::default();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut component = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < component.len() {
                let x = component[i];
                i += 1;
                for y in comp.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        component.push(y);
                    }
                }
            }
            if component.len() > 4 {
                return None;
            }
            component.sort_unstable();
            by_size[component.len()].push(component);
        }
        let [_, mut ones, mut twos, threes, fours] = by_size;
        let mut classes: Vec<Vec<Vertex>> = fours;
        for t in threes {
            let mut c = t;
            c.extend(ones.pop()?);
            classes.push(c);
        }
        while twos.len() >= 2 {
            let mut c = twos.pop().unwrap();
            c.extend(twos.pop().unwrap());
            classes.push(c);
        }
        if let Some(mut c) = twos.pop() {
            c.extend(ones.pop()?);
            c.extend(ones.pop()?);
            classes.push(c);
        }
        while !ones.is_empty() {
            if ones.len() < 4 {
                return None;
            }
            let c: Vec<Vertex> = ones.drain(ones.len() - 4..).flatten().collect();
            classes.push(c);
        }
        let mut out: Vec<[Vertex; 4]> = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                [c[0], c[1], c[2], c[3]]
            })
            .collect();
        out.sort_unstable();
        Some(out)
    }

    /// Whether the complement is contained in some Hamiltonian cycle, i.e.
    /// the graph contains a spanning copy of the complement of `C_n`.
    pub fn contains_spanning_cycle_complement(&self) -> bool {
        let n = self.n;
        if n < 3 {
            return false;
        }
        let comp = self.complement();
        if (0..n).any(|v| comp.degree(v) > 2) {
            return false;
        }
        // Components of a max-degree-2 graph are paths or cycles; only a
        // single Hamiltonian cycle is allowed.
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let (mut verts, mut deg_sum) = (0usize, 0usize);
            while let Some(x) = stack.pop() {
                verts += 1;
                deg_sum += comp.degree(x);
                for y in comp.neighbors(x) {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            let edges = deg_sum / 2;
            if edges == verts && verts != n {
                return false;
            }
        }
        true
    }
}

/// A blown-up graph together with its projection onto the original vertices.
#[derive(Clone, Debug)]
pub struct BlowUp {
    pub graph: Graph,
    pub factor: usize,
    pub projection: Vec<Vertex>,
}

impl BlowUp {
    pub fn project(&self, x: Vertex) -> Vertex {
        self.projection[x]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::binom_u128;

    fn brute_force_cliques(g: &Graph, r: usize) -> Vec<Vec<Vertex>> {
        // Enumerate every r-subset by bitmask and keep the complete ones.
        let n = g.n();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != r {
                continue;
            }
            let vs: Vec<Vertex> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if g.is_clique(&vs) {
                out.push(vs);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn clique_counts_small() {
        assert_eq!(Graph::complete(4).enumerate_cliques(3).unwrap().len(), 4);
        let g = Graph::complete(4).with_edges_removed([Edge::new(0, 1)]);
        assert_eq!(g.enumerate_cliques(3).unwrap().len(), 2);
        let m3 = Graph::m_graph(3);
        assert_eq!(m3.enumerate_cliques(3).unwrap().len(), 0);
        assert!(brute_force_cliques(&m3, 3).is_empty());
        assert!(matches!(
            Graph::complete(3).enumerate_cliques(4),
            Err(Error::CliqueOrder { r: 4, n: 3 })
        ));
        assert!(Graph::complete(3).enumerate_cliques(1).is_err());
    }

    #[test]
    fn complete_graph_clique_counts() {
        for n in 3..=9 {
            let g = Graph::complete(n);
            for r in 3..=n {
                assert_eq!(g.enumerate_cliques(r).unwrap().len() as u128, binom_u128(n, r));
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force_on_wide_graph() {
        // crosses a 64-bit word boundary
        let mut edges = Vec::new();
        for u in 0..70 {
            for v in u + 1..70 {
                if (u * 7 + v * 3) % 5 != 0 && (v - u) % 13 != 0 {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(70, edges).unwrap();
        let cliques = g.enumerate_cliques(3).unwrap();
        let mut count = 0;
        for a in 0..70 {
            for b in a + 1..70 {
                for c in b + 1..70 {
                    if g.is_clique(&[a, b, c]) {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(cliques.len(), count);
        assert!(cliques.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn m_graph_shape() {
        assert_eq!(Graph::m_graph(3).num_edges(), 4);
        assert_eq!(Graph::m_graph(4).num_edges(), 12);
        for r in 3..12 {
            let g = Graph::m_graph(r);
            // oracle: 4 edges for every pair of pairs at index distance >= 2
            let pairs = (0..r).flat_map(|i| (i + 2..r).map(move |j| (i, j))).count();
            assert_eq!(g.num_edges(), 4 * pairs);
            assert_eq!(g.min_degree(), 2 * r - 6);
        }
    }

    #[test]
    fn w_graph_shape() {
        assert_eq!(Graph::w_graph(1).num_edges(), 0);
        assert_eq!(Graph::w_graph(2).num_edges(), 16);
        let g = Graph::w_graph(6);
        assert!((0..24).all(|v| g.degree(v) == 20));
        assert_eq!(g.spanning_w_classes().unwrap().len(), 6);
    }

    #[test]
    fn blow_up_degrees_and_projection() {
        let k2 = Graph::complete(2);
        let b = k2.blow_up(2).unwrap();
        assert_eq!(b.graph.num_edges(), 4);
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (0, 2), (3, 4)]).unwrap();
        let one = g.blow_up(1).unwrap();
        assert_eq!(one.graph, g);
        assert!(one.projection.iter().enumerate().all(|(i, &p)| i == p));
        let t = 3;
        let b = g.blow_up(t).unwrap();
        for x in 0..b.graph.n() {
            assert_eq!(b.graph.degree(x), t * g.degree(b.project(x)));
        }
        for k in b.graph.enumerate_cliques(3).unwrap() {
            let mut proj: Vec<Vertex> = k.vertices().iter().map(|&x| b.project(x)).collect();
            proj.sort_unstable();
            proj.dedup();
            assert_eq!(proj.len(), 3);
            assert!(g.is_clique(&proj));
        }
        assert!(g.blow_up(0).is_err());
    }

    #[test]
    fn graph_construction_errors() {
        assert!(matches!(Graph::new(3, [(1, 1)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            Graph::new(3, [(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
        assert!(Matching::new(vec![Edge::new(0, 1), Edge::new(1, 2)]).is_err());
    }

    #[test]
    fn spanning_predicates() {
        let g = Graph::complete(8).with_edges_removed([Edge::new(0, 5), Edge::new(2, 3), Edge::new(3, 7)]);
        assert!(g.spanning_w_classes().is_some());
        let bad = Graph::complete(8).with_edges_removed([Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 3), Edge::new(3, 4)]);
        assert!(bad.spanning_w_classes().is_none());
        assert!(bad.contains_spanning_cycle_complement());
        let c8 = Graph::cycle(8).unwrap().complement();
        assert!(c8.contains_spanning_cycle_complement());
        let two_triangles = Graph::complete(6).with_edges_removed(
            Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap().edges(),
        );
        assert!(!two_triangles.contains_spanning_cycle_complement());
    }

    fn arb_graph() -> impl proptest::strategy::Strategy<Value = Graph> {
        use proptest::prelude::*;
        (2usize..10).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
                Graph::new(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(p, _)| p)).unwrap()
            })
        })
    }

    proptest::proptest! {
        #[test]
        fn enumeration_is_exact_and_ordered(g in arb_graph(), r in 2usize..6) {
            proptest::prop_assume!(r <= g.n());
            let got = g.enumerate_cliques(r).unwrap();
            let expect = brute_force_cliques(&g, r);
            let vs: Vec<Vec<Vertex>> = got.iter().map(|k| k.vertices().to_vec()).collect();
            proptest::prop_assert_eq!(&vs, &expect);
            proptest::prop_assert_eq!(got, g.enumerate_cliques(r).unwrap());
        }

        #[test]
        fn blown_up_cliques_project_to_cliques(g in arb_graph(), t in 1usize..4, r in 2usize..5) {
            let b = g.blow_up(t).unwrap();
            proptest::prop_assume!(r <= b.graph.n());
            for k in b.graph.enumerate_cliques(r).unwrap() {
                let mut image: Vec<Vertex> = k.vertices().iter().map(|&x| b.project(x)).collect();
                image.sort();
                image.dedup();
                proptest::prop_assert_eq!(image.len(), r);
                proptest::prop_assert!(g.is_clique(&image));
            }
        }
    }
}
