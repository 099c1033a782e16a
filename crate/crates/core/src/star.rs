//! Strings and star-shaped graphs: continued-fraction invariants, the
//! cycles `D`, `D'`, closed forms for `-P·P` and the log canonical threshold,
//! and the string-based negative part for non-star graphs.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{DecoratedGraph, PairSpec, QDivisor};
use crate::rat::{int, rat, solve_symmetric, Rat, SymMatrix};
use crate::zariski::ZariskiPair;

/// Hirzebruch–Jung data of a string `a_1, ..., a_s` (`a_j = -E_j·E_j`,
/// `E_1` next to the center).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainData {
    pub a: Vec<i64>,
    /// Determinant, `m/q = a_1 - 1/(a_2 - ...)`.
    pub m: i64,
    pub q: i64,
    /// Determinant of the string with its far end removed.
    pub q_rev: i64,
    /// `D·E_s = -1`, zero on the rest of the string.
    pub d: QDivisor,
    /// `D'·E_1 = -1`, zero on the rest of the string.
    pub d_rev: QDivisor,
}

fn continuant(a: &[i64]) -> Option<i64> {
    let (mut k, mut prev) = (1i64, 0i64);
    for &x in a.iter().rev() {
        let next = x.checked_mul(k)?.checked_sub(prev)?;
        prev = k;
        k = next;
    }
    Some(k)
}

fn chain_matrix(a: &[i64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(a.len());
    for (j, &x) in a.iter().enumerate() {
        m.set(j, j, -x);
        if j > 0 {
            m.set(j - 1, j, 1);
        }
    }
    m
}

pub fn chain_invariants(a: &[i64]) -> Result<ChainData> {
    let s = a.len();
    if s == 0 {
        return Err(Error::BadChain("empty string".into()));
    }
    if let Some(j) = a.iter().position(|&x| x < 1) {
        return Err(Error::BadChain(format!("entry {} is {}", j + 1, a[j])));
    }
    if s > 1 && a.contains(&1) {
        return Err(Error::BadChain("-1 curve inside a longer string".into()));
    }
    let overflow = || Error::BadChain("determinant overflows".into());
    let m = continuant(a).ok_or_else(overflow)?;
    let q = continuant(&a[1..]).ok_or_else(overflow)?;
    let q_rev = continuant(&a[..s - 1]).ok_or_else(overflow)?;
    let mat = chain_matrix(a);
    let idx: Vec<usize> = (0..s).collect();
    let mut rhs = vec![Rat::zero(); s];
    rhs[s - 1] = int(-1);
    let d = solve_symmetric(&mat, &idx, &rhs)?;
    let mut rhs = vec![Rat::zero(); s];
    rhs[0] = int(-1);
    let d_rev = solve_symmetric(&mat, &idx, &rhs)?;
    let fails = d[0] != rat(1, m)
        || d[s - 1] != rat(q_rev, m)
        || d_rev[0] != rat(q, m)
        || d_rev[s - 1] != rat(1, m)
        || (m > 1 && (q as i128 * q_rev as i128 - 1).rem_euclid(m as i128) != 0);
    if fails {
        return Err(Error::CertificateFailure(format!("string {a:?} breaks the continued-fraction identities")));
    }
    Ok(ChainData { a: a.to_vec(), m, q, q_rev, d, d_rev })
}

/// Entries of the string with `m/q = a_1 - 1/(a_2 - ...)`, `0 < q < m`
/// coprime; `m = 1` gives the single `-1` curve.
pub fn hj_expansion(m: i64, q: i64) -> Vec<i64> {
    if m == 1 {
        return vec![1];
    }
    assert!(0 < q && q < m, "need 0 < q < m");
    let (mut num, mut den) = (m, q);
    let mut a = Vec::new();
    while den != 0 {
        let k = (num + den - 1) / den;
        a.push(k);
        (num, den) = (den, k * den - num);
    }
    a
}

/// Every minimal string with determinant `m`, one per `q` coprime to `m`.
pub fn strings_with_determinant(m: i64) -> Vec<Vec<i64>> {
    if m == 1 {
        return vec![vec![1]];
    }
    (1..m).filter(|&q| m.gcd(&q) == 1).map(|q| hj_expansion(m, q)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    /// Vertex indices `E_1, ..., E_s`.
    pub vertices: Vec<usize>,
    pub chain: ChainData,
    /// Arrow index at `E_s`, if any.
    pub arrow: Option<usize>,
    /// The arrow's coefficient, 0 without one.
    pub c: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarShape {
    pub graph: DecoratedGraph,
    pub center: usize,
    pub genus: u32,
    /// `-F·F`.
    pub d: i64,
    pub branches: Vec<Branch>,
    pub chi: Rat,
    pub epsilon: Rat,
    /// `χ + Σ c_i/m_i`.
    pub chi_c: Rat,
}

impl StarShape {
    pub fn t(&self) -> usize {
        self.branches.len()
    }

    pub fn determinants(&self) -> Vec<i64> {
        self.branches.iter().map(|b| b.chain.m).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Detection {
    Star(StarShape),
    Chain,
    NotStar,
}

fn is_chain(g: &DecoratedGraph) -> bool {
    let n = g.vertices.len();
    let total: u32 = g.edges.iter().map(|e| e.mult).sum();
    total as usize + 1 == n
        && g.vertices.iter().all(|v| v.genus == 0)
        && (0..n).all(|v| g.valence(v) <= 2)
        && g.is_connected()
}

pub fn detect_star(g: &DecoratedGraph) -> Detection {
    if g.vertices.is_empty() {
        return Detection::NotStar;
    }
    if is_chain(g) {
        return Detection::Chain;
    }
    let candidates: Vec<usize> =
        (0..g.vertices.len()).filter(|&v| g.valence(v) >= 3 || g.vertices[v].genus > 0).collect();
    let [center] = candidates[..] else {
        return Detection::NotStar;
    };
    if g.arrows_at(center).next().is_some() {
        return Detection::NotStar;
    }
    let adj = g.neighbors();
    let mult = |a: usize, b: usize| -> u32 {
        g.edges.iter().filter(|e| (e.a, e.b) == (a, b) || (e.a, e.b) == (b, a)).map(|e| e.mult).sum()
    };
    if adj[center].iter().any(|&w| mult(center, w) != 1) {
        return Detection::NotStar;
    }
    let mut seen = 1;
    let mut branches = Vec::new();
    for &first in &adj[center] {
        let mut path = vec![first];
        let (mut prev, mut cur) = (center, first);
        loop {
            let next: Vec<usize> = adj[cur].iter().copied().filter(|&w| w != prev).collect();
            match next[..] {
                [] => break,
                [w] if w != center && mult(cur, w) == 1 => {
                    path.push(w);
                    (prev, cur) = (cur, w);
                }
                _ => return Detection::NotStar,
            }
        }
        seen += path.len();
        let end = *path.last().unwrap();
        let arrows: Vec<usize> = (0..g.arrows.len()).filter(|&k| path.contains(&g.arrows[k].at)).collect();
        let arrow = match arrows[..] {
            [] => None,
            [k] if g.arrows[k].at == end => Some(k),
            _ => return Detection::NotStar,
        };
        let a: Vec<i64> = path.iter().map(|&v| -g.vertices[v].self_int).collect();
        let Ok(chain) = chain_invariants(&a) else {
            return Detection::NotStar;
        };
        let c = arrow.map(|k| g.arrows[k].weight.c()).unwrap_or_else(Rat::zero);
        branches.push(Branch { vertices: path, chain, arrow, c });
    }
    if seen != g.vertices.len() {
        return Detection::NotStar;
    }
    let genus = g.vertices[center].genus;
    let d = -g.vertices[center].self_int;
    let t = branches.len() as i64;
    let inv_m: Rat = branches.iter().map(|b| rat(1, b.chain.m)).sum();
    let chi = int(2 * genus as i64 - 2 + t) - &inv_m;
    let epsilon = int(d) - branches.iter().map(|b| rat(b.chain.q, b.chain.m)).sum::<Rat>();
    let chi_c = &chi + branches.iter().map(|b| &b.c / int(b.chain.m)).sum::<Rat>();
    Detection::Star(StarShape { graph: g.clone(), center, genus, d, branches, chi, epsilon, chi_c })
}

/// Closed-form `-P·P` together with the cycle `f` (`f·F = -1`, zero on the
/// strings) that certifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarPcp {
    pub pcp: Rat,
    pub f: QDivisor,
    pub f_squared: Rat,
    pub negative: QDivisor,
}

/// `-P_C·P_C = χ_C²/ε` when `χ_C > 0`, else 0. Verifies
/// `K + E + Σ c_i C̃_i ≡ -χ_C f + Σ (1 - c_i) D_i` and `f·f = -1/ε`.
pub fn star_pcp(s: &StarShape) -> Result<StarPcp> {
    if s.genus == 0 && s.t() < 3 {
        return Err(Error::PreconditionViolated("rational center needs at least three strings".into()));
    }
    let g = &s.graph;
    let n = g.vertices.len();
    let m = g.intersection_matrix();
    let mut rhs = vec![Rat::zero(); n];
    rhs[s.center] = int(-1);
    let f = g.class_of(&rhs)?;
    let f_squared = -f[s.center].clone();
    if f_squared != -s.epsilon.recip() {
        return Err(Error::CertificateFailure(format!("f·f = {f_squared}, expected -1/{}", s.epsilon)));
    }
    let mut negative = vec![Rat::zero(); n];
    for b in &s.branches {
        let w = Rat::one() - &b.c;
        for (v, x) in b.vertices.iter().zip(&b.chain.d) {
            negative[*v] = &w * x;
        }
    }
    let lhs = g.log_canonical_vector();
    let n_dots = m.mul_vec(&negative);
    let rhs_dots: Vec<Rat> =
        (0..n).map(|j| &n_dots[j] + if j == s.center { s.chi_c.clone() } else { Rat::zero() }).collect();
    if lhs != rhs_dots {
        return Err(Error::CertificateFailure("K+E+C does not split as -χ_C f + Σ(1-c)D".into()));
    }
    let pcp = if s.chi_c.is_positive() { &s.chi_c * &s.chi_c / &s.epsilon } else { Rat::zero() };
    Ok(StarPcp { pcp, f, f_squared, negative })
}

/// Maximal strings of rational curves starting at the ends of `g`, each
/// listed from the end inwards. Empty for a graph that is a single string.
pub fn end_strings(g: &DecoratedGraph) -> Vec<Vec<usize>> {
    if is_chain(g) {
        return Vec::new();
    }
    let adj = g.neighbors();
    let plain = |v: usize| g.vertices[v].genus == 0;
    let mut out = Vec::new();
    for v in 0..g.vertices.len() {
        if g.valence(v) != 1 || !plain(v) {
            continue;
        }
        let mut path = vec![v];
        let (mut prev, mut cur) = (v, adj[v][0]);
        while plain(cur) && g.valence(cur) == 2 && adj[cur].len() == 2 {
            path.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            (prev, cur) = (cur, next);
        }
        out.push(path);
    }
    out
}

/// `N = Σ (1 - c_i) D_i` over the end strings, valid for non-star graphs in
/// minimal orbifold form with every nonzero `c_i ≥ 1/2`; certified on return.
/// Besides the arrow ends, no rational `-1` curve may meet fewer than three
/// other curves.
pub fn fast_negative_part(p: &PairSpec) -> Result<ZariskiPair> {
    let violated = |msg: &str| Err(Error::PreconditionViolated(msg.to_string()));
    if !p.is_minimal_orbifold_form() {
        return violated("graph is not in minimal orbifold form");
    }
    if !matches!(detect_star(p), Detection::NotStar) {
        return violated("graph is a star or a string");
    }
    let contractible = |v: usize| {
        let arrows = p.arrows_at(v).count();
        let x = &p.vertices[v];
        x.genus == 0 && x.self_int == -1 && p.valence(v) as usize + arrows < 3 && !(p.valence(v) == 1 && arrows == 1)
    };
    if (0..p.vertices.len()).any(contractible) {
        return violated("a -1 curve can be contracted; the resolution is not minimal");
    }
    let half = rat(1, 2);
    if p.arrows.iter().any(|a| {
        let c = a.weight.c();
        !c.is_zero() && c < half
    }) {
        return violated("a nonzero coefficient is below 1/2");
    }
    let n = p.vertices.len();
    let m = p.intersection_matrix();
    let mut negative = vec![Rat::zero(); n];
    for path in end_strings(p) {
        let end = path[0];
        let c = p.arrows_at(end).next().map(|a| a.weight.c()).unwrap_or_else(Rat::zero);
        if path.len() == 1 && p.vertices[end].self_int == -1 && c < half {
            return violated("a -1 end without a coefficient ≥ 1/2");
        }
        let mut rhs = vec![Rat::zero(); path.len()];
        rhs[0] = int(-1);
        let d = solve_symmetric(&m, &path, &rhs)?;
        let w = Rat::one() - c;
        for (v, x) in path.iter().zip(d) {
            negative[*v] = &w * x;
        }
    }
    let l = p.log_canonical_vector();
    let n_dots = m.mul_vec(&negative);
    let positive_dots: Vec<Rat> = l.iter().zip(&n_dots).map(|(a, b)| a - b).collect();
    let support: Vec<usize> = (0..n).filter(|&j| !negative[j].is_zero()).collect();
    if positive_dots.iter().any(Signed::is_negative) {
        return Err(Error::CertificateFailure("string part leaves P not nef".into()));
    }
    if support.iter().any(|&j| !positive_dots[j].is_zero()) {
        return Err(Error::CertificateFailure("P·E nonzero on a string".into()));
    }
    let positive = p.class_of(&positive_dots)?;
    let neg_p_squared = -positive.iter().zip(&positive_dots).map(|(a, b)| a * b).sum::<Rat>();
    Ok(ZariskiPair { positive, positive_dots, negative, support, neg_p_squared })
}

/// Branch carrying the curve in the D-type configuration: rational center,
/// three strings, two of them arrowless `-2` leaves.
pub fn d_type_branch(genus: u32, minus_two_leaf: &[bool], has_arrow: &[bool]) -> Option<usize> {
    if genus != 0 || minus_two_leaf.len() != 3 {
        return None;
    }
    (0..3).find(|&i| has_arrow[i] && (0..3).all(|j| j == i || (minus_two_leaf[j] && !has_arrow[j])))
}

pub fn is_d_type(s: &StarShape) -> bool {
    let leaf: Vec<bool> = s.branches.iter().map(|b| b.chain.a == [2]).collect();
    let arrow: Vec<bool> = s.branches.iter().map(|b| b.arrow.is_some()).collect();
    d_type_branch(s.genus, &leaf, &arrow).is_some()
}

/// Threshold of the reduced curve on the branches carrying a nonzero arrow:
/// `(2 - Σ(1 - 1/m_i)) / Σ_{arrows} 1/m_i`, capped at 1.
pub fn lct_star(s: &StarShape) -> Result<Rat> {
    if !s.chi.is_negative() {
        return Err(Error::NotLogTerminal);
    }
    let curve: Vec<&Branch> = s.branches.iter().filter(|b| !b.c.is_zero()).collect();
    if is_d_type(s) && !curve.is_empty() {
        return Err(Error::ExcludedGraph("two -2 leaves and a string carrying the curve".into()));
    }
    if curve.is_empty() {
        return Ok(Rat::one());
    }
    let weight: Rat = curve.iter().map(|b| rat(1, b.chain.m)).sum();
    Ok(std::cmp::min(-&s.chi / weight, Rat::one()))
}
