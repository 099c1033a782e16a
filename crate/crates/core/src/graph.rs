//! Decorated resolution graphs: weighted dual graph of the exceptional
//! curves plus arrows for the proper transforms of curve branches.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! vertex <id> e=<int> g=<uint>
//! edge <id1> <id2> [m=<uint>]
//! arrow <id> at=<vertex> (c=<int>[/<uint>] | n=<uint>)
//! ```

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rat::{int, parse_rat, rat, solve_symmetric, Rat, SymMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    /// `E_i·E_i`.
    pub self_int: i64,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// `E_a·E_b`.
    pub mult: u32,
}

/// Arrow coefficient. Orbifold weights keep their `n` for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Weight {
    Coeff(Rat),
    Orbifold(u64),
}

impl Weight {
    pub fn c(&self) -> Rat {
        match self {
            Weight::Coeff(c) => c.clone(),
            Weight::Orbifold(n) => rat(1, *n as i64),
        }
    }

    pub fn orbifold(&self) -> Option<u64> {
        match self {
            Weight::Orbifold(n) => Some(*n),
            Weight::Coeff(_) => None,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Coeff(c) => write!(f, "c={c}"),
            Weight::Orbifold(n) => write!(f, "n={n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    /// Index of the vertex the branch meets (transversally, once).
    pub at: usize,
    pub weight: Weight,
}

/// Exceptional Q-divisor, coefficients indexed like the graph's vertices.
pub type QDivisor = Vec<Rat>;

/// Where to blow up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locus {
    /// A general point of `E_v`.
    Smooth(usize),
    /// The intersection point of `E_a` and `E_b`.
    Double(usize, usize),
    /// The point where arrow `k` meets its vertex.
    Arrow(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecoratedGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub arrows: Vec<Arrow>,
}

/// A pair `(X, Σ c_i C_i)` is presented by its decorated graph.
pub type PairSpec = DecoratedGraph;

fn kv<'a>(tok: &'a str, key: &str) -> Option<&'a str> {
    tok.strip_prefix(key).and_then(|r| r.strip_prefix('='))
}

impl DecoratedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, self_int: i64, genus: u32) -> usize {
        self.vertices.push(Vertex { id: id.into(), self_int, genus });
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize, mult: u32) {
        assert!(a != b && a < self.vertices.len() && b < self.vertices.len());
        self.edges.push(Edge { a, b, mult });
    }

    pub fn add_arrow(&mut self, id: impl Into<String>, at: usize, weight: Weight) -> usize {
        assert!(at < self.vertices.len());
        self.arrows.push(Arrow { id: id.into(), at, weight });
        self.arrows.len() - 1
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut g = DecoratedGraph::new();
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut arrow_ids: HashSet<String> = HashSet::new();
        // edges and arrows resolve after all vertices are known
        let mut pending_edges = Vec::new();
        let mut pending_arrows = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            let syntax = |msg: &str| Error::Syntax { line, msg: msg.to_string() };
            match toks.as_slice() {
                [] => {}
                ["vertex", id, rest @ ..] => {
                    let mut e = None;
                    let mut genus = None;
                    for t in rest {
                        if let Some(v) = kv(t, "e") {
                            e = Some(v.parse::<i64>().map_err(|_| syntax("bad self-intersection"))?);
                        } else if let Some(v) = kv(t, "g") {
                            genus = Some(v.parse::<u32>().map_err(|_| syntax("bad genus"))?);
                        } else {
                            return Err(syntax(&format!("unexpected `{t}`")));
                        }
                    }
                    let e = e.ok_or_else(|| syntax("vertex needs e=<int>"))?;
                    if ids.contains_key(*id) {
                        return Err(Error::DuplicateId(id.to_string()));
                    }
                    ids.insert(id.to_string(), g.vertices.len());
                    g.add_vertex(*id, e, genus.unwrap_or(0));
                }
                ["edge", a, b, rest @ ..] => {
                    let mult = match rest {
                        [] => 1,
                        [m] => kv(m, "m")
                            .and_then(|v| v.parse::<u32>().ok())
                            .filter(|&m| m >= 1)
                            .ok_or_else(|| syntax("edge multiplicity must be m=<uint≥1>"))?,
                        _ => return Err(syntax("too many fields in edge")),
                    };
                    pending_edges.push((line, a.to_string(), b.to_string(), mult));
                }
                ["arrow", id, rest @ ..] => {
                    let mut at = None;
                    let mut weight = None;
                    for t in rest {
                        if let Some(v) = kv(t, "at") {
                            at = Some(v.to_string());
                        } else if let Some(v) = kv(t, "c") {
                            let c = parse_rat(v).ok_or_else(|| syntax("bad coefficient"))?;
                            if c.is_negative() || c > Rat::one() {
                                return Err(Error::WeightOutOfRange { line, weight: v.to_string() });
                            }
                            weight = Some(Weight::Coeff(c));
                        } else if let Some(v) = kv(t, "n") {
                            let n = v
                                .parse::<u64>()
                                .ok()
                                .filter(|&n| n >= 1 && n <= i64::MAX as u64)
                                .ok_or_else(|| syntax("orbifold weight must be n=<uint≥1>"))?;
                            weight = Some(Weight::Orbifold(n));
                        } else {
                            return Err(syntax(&format!("unexpected `{t}`")));
                        }
                    }
                    let at = at.ok_or_else(|| syntax("arrow needs at=<vertex>"))?;
                    let weight = weight.ok_or_else(|| syntax("arrow needs c=<rational> or n=<uint>"))?;
                    if !arrow_ids.insert(id.to_string()) {
                        return Err(Error::DuplicateId(id.to_string()));
                    }
                    pending_arrows.push((line, id.to_string(), at, weight));
                }
                [kw, ..] => return Err(syntax(&format!("unknown item `{kw}`"))),
            }
        }
        let resolve = |line: usize, id: &str| {
            ids.get(id).copied().ok_or_else(|| Error::UnknownVertex { line, id: id.to_string() })
        };
        for (line, a, b, mult) in pending_edges {
            let (ia, ib) = (resolve(line, &a)?, resolve(line, &b)?);
            if ia == ib {
                return Err(Error::Loop(a));
            }
            g.edges.push(Edge { a: ia, b: ib, mult });
        }
        for (line, id, at, weight) in pending_arrows {
            let at = resolve(line, &at)?;
            if ids.contains_key(&id) {
                return Err(Error::DuplicateId(id));
            }
            g.arrows.push(Arrow { id, at, weight });
        }
        Ok(g)
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }

    /// Structural checks plus exact negative definiteness.
    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        self.lattice().map(|_| ())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let adj = self.neighbors();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Distinct neighbours of every vertex.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            if !adj[e.a].contains(&e.b) {
                adj[e.a].push(e.b);
                adj[e.b].push(e.a);
            }
        }
        adj
    }

    /// Number of intersection points of `E_v` with the rest of `E`.
    pub fn valence(&self, v: usize) -> u32 {
        self.edges.iter().filter(|e| e.a == v || e.b == v).map(|e| e.mult).sum()
    }

    pub fn arrows_at(&self, v: usize) -> impl Iterator<Item = &Arrow> + '_ {
        self.arrows.iter().filter(move |a| a.at == v)
    }

    pub fn intersection_matrix(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            m.set(i, i, v.self_int);
        }
        for e in &self.edges {
            m.add(e.a, e.b, e.mult as i64);
        }
        m
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.intersection_matrix())
    }

    /// `K·E_j = 2g_j - 2 - E_j·E_j` (adjunction).
    pub fn canonical_vector(&self) -> Vec<Rat> {
        self.vertices.iter().map(|v| int(2 * v.genus as i64 - 2 - v.self_int)).collect()
    }

    /// `(Σ w_k C̃_k)·E_j` for arrow weights `w`.
    pub fn arrow_vector(&self, weights: impl Fn(&Arrow) -> Rat) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.vertices.len()];
        for a in &self.arrows {
            v[a.at] += weights(a);
        }
        v
    }

    /// `(K + E + Σ c_k C̃_k)·E_j`.
    pub fn log_canonical_vector(&self) -> Vec<Rat> {
        let curves = self.arrow_vector(|a| a.weight.c());
        self.vertices
            .iter()
            .enumerate()
            .zip(curves)
            .map(|((j, v), c)| int(2 * v.genus as i64 - 2 + self.valence(j) as i64) + c)
            .collect()
    }

    /// The divisor `D` with `D·E_j = rhs_j`.
    pub fn class_of(&self, rhs: &[Rat]) -> Result<QDivisor> {
        let idx: Vec<usize> = (0..self.vertices.len()).collect();
        solve_symmetric(&self.intersection_matrix(), &idx, rhs)
    }

    fn fresh_id(&self) -> String {
        let used: HashSet<&str> = self.vertices.iter().map(|v| v.id.as_str()).collect();
        (1..)
            .map(|k| format!("b{k}"))
            .find(|id| !used.contains(id.as_str()) && !self.arrows.iter().any(|a| &a.id == id))
            .unwrap()
    }

    /// Blows up one point of `E`; the new curve is a rational `-1` curve.
    pub fn blow_up(&self, locus: Locus) -> Result<DecoratedGraph> {
        let mut g = self.clone();
        let n = g.vertices.len();
        let id = g.fresh_id();
        match locus {
            Locus::Smooth(v) => {
                if v >= n {
                    return Err(Error::BadLocus(format!("no vertex {v}")));
                }
                let w = g.add_vertex(id, -1, 0);
                g.vertices[v].self_int -= 1;
                g.add_edge(v, w, 1);
            }
            Locus::Double(a, b) => {
                if a == b || a >= n || b >= n {
                    return Err(Error::BadLocus(format!("no double point ({a}, {b})")));
                }
                let k = g
                    .edges
                    .iter()
                    .position(|e| (e.a, e.b) == (a, b) || (e.a, e.b) == (b, a))
                    .ok_or_else(|| Error::BadLocus(format!("vertices {a} and {b} do not meet")))?;
                if g.edges[k].mult == 1 {
                    g.edges.remove(k);
                } else {
                    g.edges[k].mult -= 1;
                }
                let w = g.add_vertex(id, -1, 0);
                g.vertices[a].self_int -= 1;
                g.vertices[b].self_int -= 1;
                g.add_edge(a, w, 1);
                g.add_edge(b, w, 1);
            }
            Locus::Arrow(k) => {
                let v = g.arrows.get(k).ok_or_else(|| Error::BadLocus(format!("no arrow {k}")))?.at;
                let w = g.add_vertex(id, -1, 0);
                g.vertices[v].self_int -= 1;
                g.add_edge(v, w, 1);
                g.arrows[k].at = w;
            }
        }
        Ok(g)
    }

    /// An arrow is in place when its vertex is an end of `E` (or all of a
    /// one-curve `E`) and carries no other arrow.
    fn arrow_in_place(&self, k: usize) -> bool {
        let v = self.arrows[k].at;
        let end = self.valence(v) == 1 || (self.vertices.len() == 1 && self.valence(v) == 0);
        end && self.arrows_at(v).count() == 1
    }

    pub fn is_minimal_orbifold_form(&self) -> bool {
        (0..self.arrows.len()).all(|k| self.arrow_in_place(k))
    }

    /// Blows up arrow points until every arrow meets its own end curve.
    pub fn normalize_minimal_orbifold(&self) -> Result<DecoratedGraph> {
        if self.vertices.len() == 1 && self.arrows.len() == 2 {
            return Err(Error::ExceptionalCase);
        }
        let mut g = self.clone();
        while let Some(k) = (0..g.arrows.len()).find(|&k| !g.arrow_in_place(k)) {
            g = g.blow_up(Locus::Arrow(k))?;
        }
        Ok(g)
    }

    /// Same graph with arrow weights replaced.
    pub fn with_weights(&self, weights: impl Fn(&Arrow) -> Weight) -> DecoratedGraph {
        let mut g = self.clone();
        for a in &mut g.arrows {
            a.weight = weights(a);
        }
        g
    }

    pub fn without_arrows(&self) -> DecoratedGraph {
        DecoratedGraph { vertices: self.vertices.clone(), edges: self.edges.clone(), arrows: Vec::new() }
    }
}

impl fmt::Display for DecoratedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            writeln!(f, "vertex {} e={} g={}", v.id, v.self_int, v.genus)?;
        }
        for e in &self.edges {
            write!(f, "edge {} {}", self.vertices[e.a].id, self.vertices[e.b].id)?;
            if e.mult != 1 {
                write!(f, " m={}", e.mult)?;
            }
            writeln!(f)?;
        }
        for a in &self.arrows {
            writeln!(f, "arrow {} at={} {}", a.id, self.vertices[a.at].id, a.weight)?;
        }
        Ok(())
    }
}

impl FromStr for DecoratedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Star with rational center of self-intersection `-center` and the given
/// strings (entries `a_j = -E_j·E_j`, listed from the center outwards).
pub fn star_graph(center: i64, genus: u32, branches: &[Vec<i64>]) -> DecoratedGraph {
    let mut g = DecoratedGraph::new();
    let c = g.add_vertex("F", -center, genus);
    for (i, chain) in branches.iter().enumerate() {
        let mut prev = c;
        for (j, &a) in chain.iter().enumerate() {
            let v = g.add_vertex(format!("s{}_{}", i + 1, j + 1), -a, 0);
            g.add_edge(prev, v, 1);
            prev = v;
        }
    }
    g
}

/// Index of the far end of branch `i` in a graph built by [`star_graph`].
pub fn star_branch_end(branches: &[Vec<i64>], i: usize) -> usize {
    1 + branches[..=i].iter().map(Vec::len).sum::<usize>() - 1
}
