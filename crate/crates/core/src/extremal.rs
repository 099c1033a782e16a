//! Extremal volumes of orbifold pairs whose underlying singularity is a
//! rational double point (or smooth), with star-shaped log resolution.
//!
//! Such a resolution has a rational center carrying `r <= 3` strings of
//! `-2`-type curves (after blowing down) and `s` extra `-1` leaves, each leaf
//! meeting one boundary curve.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{star_branch_end, star_graph, DecoratedGraph, PairSpec, Weight};
use crate::lattice::Lattice;
use crate::pairs::{pcp, volume};
use crate::par::{self, Mode};
use crate::rat::{int, is_negative_definite, rat, Rat};
use crate::star::{chain_invariants, strings_with_determinant};

type Small = Ratio<i128>;

/// One RDP star: strings with their end weights, leaf weights, and `-F·F`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RdpStarParams {
    /// Strings `a_1, ..., a_k` listed from the center out.
    pub chains: Vec<Vec<i64>>,
    /// Weight at the end of each string; 1 means no boundary curve there.
    pub n: Vec<u64>,
    /// Weights of the curves through the `-1` leaves, all at least 2.
    pub nprime: Vec<u64>,
    pub d: i64,
}

impl RdpStarParams {
    pub fn r(&self) -> usize {
        self.chains.len()
    }

    pub fn s(&self) -> usize {
        self.nprime.len()
    }

    pub fn determinants(&self) -> Vec<i64> {
        self.chains.iter().map(|a| string_invariants(a).0).collect()
    }

    /// Self-intersection magnitude of the center once the leaves are blown down.
    pub fn blown_down_center(&self) -> i64 {
        self.d - self.s() as i64
    }

    pub fn graph(&self) -> DecoratedGraph {
        let mut strings = self.chains.clone();
        strings.extend(std::iter::repeat_n(vec![1], self.s()));
        let mut g = star_graph(self.d, 0, &strings);
        let weights = self.n.iter().chain(&self.nprime);
        for (i, &n) in weights.enumerate() {
            if n > 1 {
                g.add_arrow(format!("C{}", i + 1), star_branch_end(&strings, i), Weight::Orbifold(n));
            }
        }
        g
    }

    /// Checks every structural requirement, including that blowing down the
    /// leaves leaves a rational double point or a smooth point.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::BadParameter(m.into()));
        if self.r() > 3 {
            return bad("at most three strings");
        }
        if self.r() + self.s() < 3 {
            return bad("need r + s >= 3");
        }
        if self.n.len() != self.r() {
            return bad("one weight per string");
        }
        if self.n.contains(&0) || self.nprime.iter().any(|&n| n < 2) {
            return bad("weights are n >= 1 on strings and n' >= 2 on leaves");
        }
        for a in &self.chains {
            if a.is_empty() || a.iter().any(|&x| x < 2) {
                return bad("string entries must be at least 2");
            }
        }
        if !blows_down_to_rdp(self.blown_down_center(), &self.chains) {
            return bad("blowing down the leaves does not give a rational double point");
        }
        self.graph().validate()
    }
}

impl fmt::Display for RdpStarParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} s={} m={} n={} n'={} d={}",
            self.r(),
            self.s(),
            m_spec(&self.chains),
            join(&self.n),
            join(&self.nprime),
            self.d
        )
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(":")
}

/// `m[a_1.a_2...]` per string.
fn m_spec(chains: &[Vec<i64>]) -> String {
    chains
        .iter()
        .map(|a| {
            let entries: Vec<String> = a.iter().map(i64::to_string).collect();
            format!("{}[{}]", string_invariants(a).0, entries.join("."))
        })
        .collect::<Vec<_>>()
        .join(":")
}

/// `(m, q)` of a string with entries at least 2.
fn string_invariants(a: &[i64]) -> (i64, i64) {
    let c = chain_invariants(a).expect("valid string");
    (c.m, c.q)
}

/// Whether the star with center `-center` and the given strings is the
/// resolution of a rational double point or of a smooth point. A `-1`
/// center may only sit on a chain, where it is contracted away.
pub fn blows_down_to_rdp(center: i64, chains: &[Vec<i64>]) -> bool {
    if chains.len() == 3 {
        if center != 2 || chains.iter().flatten().any(|&x| x != 2) {
            return false;
        }
        let g = star_graph(2, 0, chains);
        return is_negative_definite(&g.intersection_matrix());
    }
    if chains.len() > 3 {
        return false;
    }
    let mut seq: Vec<i64> = Vec::new();
    if let Some(a) = chains.first() {
        seq.extend(a.iter().rev());
    }
    seq.push(center);
    if let Some(b) = chains.get(1) {
        seq.extend(b);
    }
    while let Some(i) = seq.iter().position(|&x| x == 1) {
        seq.remove(i);
        if i > 0 {
            seq[i - 1] -= 1;
        }
        if i < seq.len() {
            seq[i] -= 1;
        }
        if seq.iter().any(|&x| x <= 0) {
            return false;
        }
    }
    seq.iter().all(|&x| x == 2)
}

/// `χ_C̄ = -2 + Σ (1 - 1/(n_i m_i)) + Σ (1 - 1/n'_j)`.
pub fn chi_bar(p: &RdpStarParams) -> Rat {
    let mut total = int(-2);
    for (m, &n) in p.determinants().iter().zip(&p.n) {
        total += Rat::one() - rat(1, n as i64 * m);
    }
    for &n in &p.nprime {
        total += Rat::one() - rat(1, n as i64);
    }
    total
}

/// Smallest positive value of `-2 + Σ_{i<=u} (1 - 1/k_i)` over `k_i >= 2`,
/// with the lexicographically first nondecreasing witness. `None` when no
/// value is positive (`u <= 2`). Exact branch and bound: a prefix is dropped
/// as soon as the remaining terms cannot bring the value into `(0, best)`.
pub fn min_positive_deficiency(u: usize) -> Option<(Rat, Vec<u64>)> {
    if u <= 2 {
        return None;
    }
    let target = int(u as i64 - 2);
    // all k_i = u + 1 is positive, which seeds the bound
    let k0 = u as u64 + 1;
    let mut best = (&target - rat(u as i64, k0 as i64), vec![k0; u]);
    let mut prefix = Vec::with_capacity(u);
    search_deficiency(u, &target, &Rat::zero(), 2, &mut prefix, &mut best);
    Some(best)
}

fn search_deficiency(u: usize, target: &Rat, sum: &Rat, from: u64, prefix: &mut Vec<u64>, best: &mut (Rat, Vec<u64>)) {
    let left = (u - prefix.len()) as i64;
    if left == 1 {
        // largest 1/k strictly below the gap
        let gap = target - sum;
        let k = (gap.recip().floor().to_integer().to_u64().unwrap_or(u64::MAX - 1) + 1).max(from);
        let v = &gap - rat(1, k as i64);
        if v.is_positive() && v < best.0 {
            prefix.push(k);
            *best = (v, prefix.clone());
            prefix.pop();
        }
        return;
    }
    let mut k = from;
    loop {
        // with every remaining k_i >= k the sum is at most sum + left/k
        if sum + rat(left, k as i64) <= target - &best.0 {
            return;
        }
        let next = sum + rat(1, k as i64);
        // the remaining left-1 terms are positive, so the value is below gap
        if &next < target {
            prefix.push(k);
            search_deficiency(u, target, &next, k, prefix, best);
            prefix.pop();
        }
        k += 1;
    }
}

/// Elements of `z` with the largest `W = Σ 1/n_i`, sorted and deduplicated.
pub fn acc_max_weight(z: &[Vec<u64>]) -> Result<(Rat, Vec<Vec<u64>>)> {
    if z.is_empty() {
        return Err(Error::EmptySet);
    }
    if z.iter().flatten().any(|&n| n == 0) {
        return Err(Error::BadParameter("entries must be positive".into()));
    }
    let weight = |t: &Vec<u64>| -> Rat { t.iter().map(|&n| rat(1, n as i64)).sum() };
    let w = z.iter().map(weight).max().expect("nonempty");
    let best: BTreeSet<Vec<u64>> = z.iter().filter(|t| weight(t) == w).cloned().collect();
    Ok((w, best.into_iter().collect()))
}

/// Star with center `-1` and strings `[2], [3], [m]`: a minimally elliptic
/// singularity of volume `1/6 - 1/m` for `m >= 7`.
pub fn elliptic_base(m: i64) -> Result<DecoratedGraph> {
    if m <= 6 {
        return Err(Error::BadParameter(format!("m = {m} must be at least 7")));
    }
    Ok(star_graph(1, 0, &[vec![2], vec![3], vec![m]]))
}

/// `Vol` of [`elliptic_base`], through the general pipeline.
pub fn elliptic_base_volume(m: i64) -> Result<Rat> {
    pcp(&elliptic_base(m)?)
}

/// The elliptic base with a weight-2 curve through a general point of the
/// center, blown up to its orbifold log resolution, and its volume. Checks
/// the value against `8/3 + 2(4m+3)/(m(m-6))` and `(χ + 1/2)²/χ`,
/// `χ = 1/6 - 1/m`.
pub fn family_8_8(m: i64) -> Result<(PairSpec, Rat)> {
    if m <= 6 {
        return Err(Error::BadParameter(format!("m = {m} must be at least 7")));
    }
    let mut g = star_graph(2, 0, &[vec![m], vec![3], vec![2], vec![1]]);
    let leaf = star_branch_end(&[vec![m], vec![3], vec![2], vec![1]], 3);
    g.add_arrow("C", leaf, Weight::Orbifold(2));
    let v = volume(&g)?;
    let closed = rat(8, 3) + rat(2 * (4 * m + 3), m * (m - 6));
    let chi = rat(1, 6) - rat(1, m);
    let via_chi = (&chi + rat(1, 2)) * (&chi + rat(1, 2)) / &chi;
    if v != closed || v != via_chi {
        return Err(Error::CertificateFailure(format!("volume {v}, closed form {closed}, via χ {via_chi}")));
    }
    Ok((g, v))
}

/// Enumeration bounds: string determinants, string weights, leaf weights and
/// `-F·F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_m: i64,
    pub max_n: u64,
    pub max_nprime: u64,
    pub max_d: i64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self { max_m: 7, max_n: 12, max_nprime: 12, max_d: 6 }
    }
}

impl SearchBounds {
    /// Whether the `A_1` witness (three leaves with weights 2, 3, 7 on a
    /// `-5` center) lies within bounds.
    pub fn includes_minimum_witness(&self) -> bool {
        self.max_nprime >= 7 && self.max_d >= 5
    }
}

/// `m=7,n=12,nprime=12,d=6`; missing keys keep their defaults.
impl FromStr for SearchBounds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut b = SearchBounds::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) =
                part.split_once('=').ok_or_else(|| Error::BadParameter(format!("expected key=value, got `{part}`")))?;
            let v: i64 = v.trim().parse().map_err(|_| Error::BadParameter(format!("bad value in `{part}`")))?;
            if v < 1 {
                return Err(Error::BadParameter(format!("`{part}` must be positive")));
            }
            match k.trim() {
                "m" => b.max_m = v,
                "n" => b.max_n = v as u64,
                "nprime" | "n'" => b.max_nprime = v as u64,
                "d" => b.max_d = v,
                other => return Err(Error::BadParameter(format!("unknown bound `{other}`"))),
            }
        }
        Ok(b)
    }
}

impl fmt::Display for SearchBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={},n={},nprime={},d={}", self.max_m, self.max_n, self.max_nprime, self.max_d)
    }
}

/// One weighted configuration on a fixed graph shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub n: Vec<u64>,
    pub nprime: Vec<u64>,
    pub chi_bar: Rat,
    pub volume: Rat,
}

/// All weightings of one underlying star.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeResult {
    pub chains: Vec<Vec<i64>>,
    pub s: usize,
    pub d: i64,
    pub epsilon: Rat,
    pub outcomes: Vec<Outcome>,
}

impl ShapeResult {
    pub fn params(&self, o: &Outcome) -> RdpStarParams {
        RdpStarParams { chains: self.chains.clone(), n: o.n.clone(), nprime: o.nprime.clone(), d: self.d }
    }

    /// Center `-1` after blowing down the leaves.
    pub fn flagged(&self) -> bool {
        self.d - self.s as i64 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSummary {
    pub configurations: usize,
    /// Distinct positive volumes, ascending.
    pub volumes: BTreeSet<Rat>,
    pub min: Option<Rat>,
    pub argmin: Vec<RdpStarParams>,
    /// Smallest positive `χ_C̄`.
    pub min_chi_bar: Option<Rat>,
}

/// Underlying stars within bounds: `(strings, s, d)`.
fn shapes(b: SearchBounds) -> Vec<(Vec<Vec<i64>>, usize, i64)> {
    let strings: Vec<Vec<i64>> = (2..=b.max_m).flat_map(strings_with_determinant).collect();
    let k = strings.len();
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..k {
        sets.push(vec![i]);
        for j in i..k {
            sets.push(vec![i, j]);
            for l in j..k {
                sets.push(vec![i, j, l]);
            }
        }
    }
    sets.sort_by_key(|s| s.len());
    let mut out = Vec::new();
    for set in sets {
        let chains: Vec<Vec<i64>> = set.iter().map(|&i| strings[i].clone()).collect();
        let r = chains.len();
        for center in 1..=b.max_d {
            if !blows_down_to_rdp(center, &chains) {
                continue;
            }
            for s in 3usize.saturating_sub(r)..=(b.max_d - center) as usize {
                out.push((chains.clone(), s, center + s as i64));
            }
        }
    }
    out
}

/// Nondecreasing runs where the strings agree, so each graph appears once.
fn weight_tuples(chains: &[Vec<i64>], max_n: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for i in 0..chains.len() {
        let mut next = Vec::new();
        for t in &out {
            let lo = if i > 0 && chains[i] == chains[i - 1] { t[i - 1] } else { 1 };
            for n in lo..=max_n {
                let mut u = t.clone();
                u.push(n);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn leaf_tuples(s: usize, max_nprime: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..s {
        let mut next = Vec::new();
        for t in &out {
            for n in t.last().copied().unwrap_or(2)..=max_nprime {
                let mut u = t.clone();
                u.push(n);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

fn small_to_rat(x: &Small) -> Rat {
    Rat::new_raw((*x.numer()).into(), (*x.denom()).into())
}

fn to_small(x: &Rat) -> Option<Small> {
    Some(Small::new(x.numer().to_i128()?, x.denom().to_i128()?))
}

/// A negative-definite underlying star with everything that does not depend
/// on the weights.
struct Shape {
    chains: Vec<Vec<i64>>,
    s: usize,
    d: i64,
    lattice: Lattice,
    /// `(m, q)` per string.
    inv: Vec<(i64, i64)>,
    epsilon: Small,
    ends: Vec<usize>,
    /// `(K + E)·E_j`, integral without arrows.
    base: Vec<i64>,
}

impl Shape {
    fn new(chains: Vec<Vec<i64>>, s: usize, d: i64) -> Option<Shape> {
        let r = chains.len();
        let mut strings = chains.clone();
        strings.extend(std::iter::repeat_n(vec![1], s));
        let g = star_graph(d, 0, &strings);
        let lattice = g.lattice().ok()?;
        let inv: Vec<(i64, i64)> = chains.iter().map(|a| string_invariants(a)).collect();
        let epsilon = inv
            .iter()
            .fold(Small::from_integer((d - s as i64) as i128), |acc, &(m, q)| acc - Small::new(q as i128, m as i128));
        let ends = (0..r + s).map(|i| star_branch_end(&strings, i)).collect();
        let base = g.log_canonical_vector().iter().map(|x| x.to_integer().try_into().expect("small entry")).collect();
        Some(Shape { chains, s, d, lattice, inv, epsilon, ends, base })
    }

    fn params(&self, n: &[u64], nprime: &[u64]) -> RdpStarParams {
        RdpStarParams { chains: self.chains.clone(), n: n.to_vec(), nprime: nprime.to_vec(), d: self.d }
    }

    /// Every leaf weighting for string weights `n`: `f(n', χ_C̄ as an
    /// unreduced fraction, volume)`.
    /// The volume comes from the Zariski decomposition and is checked
    /// against `χ_C̄²/ε`.
    fn evaluate<F>(&self, n: &[u64], leaves: &[Vec<u64>], mut f: F) -> Result<()>
    where
        F: FnMut(&[u64], (i128, i128), Small) -> Result<()>,
    {
        let lat = &self.lattice;
        let mut hint = Vec::new();
        let r = self.chains.len();
        let mut l = vec![0i64; self.base.len()];
        for np in leaves {
            let weights = || n.iter().chain(np);
            let den = weights().fold(1u64, |acc, &x| acc.lcm(&x)) as i64;
            for (x, b) in l.iter_mut().zip(&self.base) {
                *x = b * den;
            }
            for (i, &w) in weights().enumerate() {
                l[self.ends[i]] += den - den / w as i64;
            }
            let vol = match lat.neg_p_squared_small(&l, den, &mut hint)? {
                Some(v) => v,
                None => {
                    let v = lat.neg_p_squared_hinted(&l, den, &mut hint)?;
                    to_small(&v).ok_or_else(|| Error::CertificateFailure(format!("{v} out of range")))?
                }
            };
            // χ_C̄ = (r + s - 2) - Σ 1/k over k = n_i m_i and n'_j
            let ks = || self.inv.iter().zip(n).map(|(&(m, _), &w)| w as i64 * m).chain(np.iter().map(|&w| w as i64));
            let big_d = ks().fold(1i64, |acc, k| acc.lcm(&k));
            let chi_num = (r + self.s) as i64 * big_d - 2 * big_d - ks().map(|k| big_d / k).sum::<i64>();
            let chi = (chi_num as i128, big_d as i128);
            if !matches_closed_form(vol, chi, self.epsilon) {
                return Err(Error::CertificateFailure(format!(
                    "volume {vol} differs from χ²/ε with χ = {}/{} at {}",
                    chi.0,
                    chi.1,
                    self.params(n, np)
                )));
            }
            f(np, chi, vol)?;
        }
        Ok(())
    }
}

/// `vol = χ²/ε` when `χ > 0`, else `vol = 0`.
fn matches_closed_form(vol: Small, chi: (i128, i128), eps: Small) -> bool {
    if chi.0 <= 0 {
        return vol.is_zero();
    }
    // vol·den²·ε_num = num²·ε_den·vol_den
    let lhs = [*vol.numer(), chi.1, chi.1, *eps.numer()];
    let rhs = [chi.0, chi.0, *eps.denom(), *vol.denom()];
    let prod = |xs: [i128; 4]| xs.iter().try_fold(1i128, |acc, &x| acc.checked_mul(x));
    match (prod(lhs), prod(rhs)) {
        (Some(a), Some(b)) => a == b,
        _ => {
            let c = Small::new(chi.0, chi.1);
            vol == c * c / eps
        }
    }
}

/// Exact order of two reduced fractions with positive denominators.
fn cmp_small(a: &Small, b: &Small) -> std::cmp::Ordering {
    match (a.numer().checked_mul(*b.denom()), b.numer().checked_mul(*a.denom())) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// One unit of work: a shape and its string weights, run over all leaf weights.
struct Item {
    shape: usize,
    n: Vec<u64>,
}

struct Plan {
    shapes: Vec<Shape>,
    /// Leaf weight tuples by `s`.
    leaves: Vec<Vec<Vec<u64>>>,
    items: Vec<Item>,
}

impl Plan {
    fn new(b: SearchBounds) -> Plan {
        let shapes: Vec<Shape> = shapes(b).into_iter().filter_map(|(c, s, d)| Shape::new(c, s, d)).collect();
        let max_s = shapes.iter().map(|s| s.s).max().unwrap_or(0);
        let leaves = (0..=max_s).map(|s| leaf_tuples(s, b.max_nprime)).collect();
        let mut items = Vec::new();
        for (k, sh) in shapes.iter().enumerate() {
            for n in weight_tuples(&sh.chains, b.max_n) {
                items.push(Item { shape: k, n });
            }
        }
        Plan { shapes, leaves, items }
    }

    /// `work` on every item, `sink` on the results in item order, `chunk`
    /// items in flight at a time.
    fn run<T, W, S>(&self, mode: Mode, chunk: usize, work: W, mut sink: S) -> Result<()>
    where
        T: Send,
        W: Fn(&Shape, &Item, &[Vec<u64>]) -> Result<T> + Sync + Send,
        S: FnMut(&Shape, T) -> Result<()>,
    {
        let idx: Vec<usize> = (0..self.items.len()).collect();
        for part in idx.chunks(chunk.max(1)) {
            let results = par::map(mode, part.to_vec(), |i| {
                let item = &self.items[i];
                let shape = &self.shapes[item.shape];
                work(shape, item, &self.leaves[shape.s])
            });
            for (&i, r) in part.iter().zip(results) {
                sink(&self.shapes[self.items[i].shape], r?)?;
            }
        }
        Ok(())
    }
}

/// Runs every configuration within bounds and hands the results to `sink`
/// in a fixed order, one block per underlying star and string weights.
pub fn rdp_star_search_with<F>(b: SearchBounds, mode: Mode, mut sink: F) -> Result<()>
where
    F: FnMut(&ShapeResult) -> Result<()>,
{
    let plan = Plan::new(b);
    plan.run(
        mode,
        64,
        |shape, item, leaves| {
            let mut outcomes = Vec::with_capacity(leaves.len());
            shape.evaluate(&item.n, leaves, |np, chi, vol| {
                outcomes.push(Outcome {
                    n: item.n.clone(),
                    nprime: np.to_vec(),
                    chi_bar: small_to_rat(&Small::new(chi.0, chi.1)),
                    volume: small_to_rat(&vol),
                });
                Ok(())
            })?;
            Ok(ShapeResult {
                chains: shape.chains.clone(),
                s: shape.s,
                d: shape.d,
                epsilon: small_to_rat(&shape.epsilon),
                outcomes,
            })
        },
        |_, block| sink(&block),
    )
}

/// What one work item contributes to the summary.
struct Partial {
    count: usize,
    volumes: Vec<Small>,
    min: Option<Small>,
    argmin: Vec<Vec<u64>>,
    /// Smallest positive `χ_C̄`, unreduced.
    min_chi: Option<(i128, i128)>,
    n: Vec<u64>,
}

fn chi_less(a: (i128, i128), b: Option<(i128, i128)>) -> bool {
    b.is_none_or(|b| a.0 * b.1 < b.0 * a.1)
}

/// Sorted positive volumes with their minimum and its configurations. When
/// the bounds reach the `A_1` witness, the minimum must be `1/3528`.
pub fn rdp_star_search(b: SearchBounds, mode: Mode) -> Result<SearchSummary> {
    use std::cmp::Ordering::{Equal, Greater};
    let plan = Plan::new(b);
    let mut configurations = 0;
    // reduced pairs hash much faster than the fractions themselves
    let mut volumes: HashSet<(i128, i128)> = HashSet::new();
    let mut min: Option<Small> = None;
    let mut argmin = Vec::new();
    let mut min_chi: Option<(i128, i128)> = None;
    plan.run(
        mode,
        4096,
        |shape, item, leaves| {
            let mut p = Partial {
                count: 0,
                volumes: Vec::new(),
                min: None,
                argmin: Vec::new(),
                min_chi: None,
                n: item.n.clone(),
            };
            shape.evaluate(&item.n, leaves, |np, chi, vol| {
                p.count += 1;
                if chi.0 > 0 && chi_less(chi, p.min_chi) {
                    p.min_chi = Some(chi);
                }
                if vol.numer() > &0 {
                    p.volumes.push(vol);
                    match p.min.as_ref().map(|m| cmp_small(&vol, m)) {
                        Some(Greater) => {}
                        Some(Equal) => p.argmin.push(np.to_vec()),
                        _ => {
                            p.min = Some(vol);
                            p.argmin = vec![np.to_vec()];
                        }
                    }
                }
                Ok(())
            })?;
            Ok(p)
        },
        |shape, p| {
            configurations += p.count;
            volumes.extend(p.volumes.iter().map(|v| (*v.numer(), *v.denom())));
            if let Some(c) = p.min_chi {
                if chi_less(c, min_chi) {
                    min_chi = Some(c);
                }
            }
            if let Some(v) = p.min {
                let found = p.argmin.iter().map(|np| shape.params(&p.n, np));
                match min.as_ref().map(|m| cmp_small(&v, m)) {
                    Some(Greater) => {}
                    Some(Equal) => argmin.extend(found),
                    _ => {
                        min = Some(v);
                        argmin = found.collect();
                    }
                }
            }
            Ok(())
        },
    )?;
    let mut sorted: Vec<Small> = volumes.into_iter().map(|(a, b)| Small::new_raw(a, b)).collect();
    sorted.sort_unstable_by(cmp_small);
    argmin.sort();
    let out = SearchSummary {
        configurations,
        volumes: sorted.iter().map(small_to_rat).collect(),
        min: min.as_ref().map(small_to_rat),
        argmin,
        min_chi_bar: min_chi.map(|(a, b)| small_to_rat(&Small::new(a, b))),
    };
    // the minimizers once more through the full pairs pipeline
    for p in &out.argmin {
        let v = volume(&p.graph())?;
        if Some(&v) != out.min.as_ref() {
            return Err(Error::CertificateFailure(format!("pairs pipeline gives {v} at {p}")));
        }
    }
    if b.includes_minimum_witness() && out.min != Some(rat(1, 3528)) {
        return Err(Error::CertificateFailure(format!("minimum {:?}, expected 1/3528", out.min)));
    }
    Ok(out)
}

/// Streams the search as CSV: one row per configuration.
pub fn write_search_csv<W: Write>(b: SearchBounds, mode: Mode, out: W) -> Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["r", "s", "m_spec", "n_spec", "nprime_spec", "d", "chi_bar", "epsilon", "volume", "flag"])
        .map_err(io)?;
    let mut rows = 0;
    rdp_star_search_with(b, mode, |shape| {
        let m = m_spec(&shape.chains);
        let flag = if shape.flagged() { "center-1" } else { "" };
        for o in &shape.outcomes {
            rows += 1;
            w.write_record([
                &shape.chains.len().to_string(),
                &shape.s.to_string(),
                &m,
                &join(&o.n),
                &join(&o.nprime),
                &shape.d.to_string(),
                &o.chi_bar.to_string(),
                &shape.epsilon.to_string(),
                &o.volume.to_string(),
                flag,
            ])
            .map_err(io)?;
        }
        Ok(())
    })?;
    w.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaves_only(nprime: &[u64], d: i64) -> RdpStarParams {
        RdpStarParams { chains: vec![], n: vec![], nprime: nprime.to_vec(), d }
    }

    #[test]
    fn chi_bar_examples() {
        assert_eq!(chi_bar(&leaves_only(&[2, 3, 7], 5)), rat(1, 42));
        let e = RdpStarParams { chains: vec![vec![2], vec![2, 2], vec![2; 6]], n: vec![1, 1, 1], nprime: vec![], d: 2 };
        assert_eq!(chi_bar(&e), rat(1, 42));
        let mixed = RdpStarParams { chains: vec![vec![2]], n: vec![1], nprime: vec![2, 2], d: 4 };
        assert_eq!(chi_bar(&mixed), rat(-1, 2));
    }

    #[test]
    fn deficiency_minima() {
        assert_eq!(min_positive_deficiency(2), None);
        assert_eq!(min_positive_deficiency(3), Some((rat(1, 42), vec![2, 3, 7])));
        assert_eq!(min_positive_deficiency(4), Some((rat(1, 6), vec![2, 2, 2, 3])));
        assert_eq!(min_positive_deficiency(5), Some((rat(1, 2), vec![2, 2, 2, 2, 2])));
    }

    #[test]
    fn rdp_test() {
        assert!(blows_down_to_rdp(2, &[vec![2], vec![2], vec![2, 2, 2, 2]]));
        assert!(blows_down_to_rdp(2, &[vec![2], vec![2, 2], vec![2, 2, 2, 2]]));
        assert!(!blows_down_to_rdp(2, &[vec![2], vec![2, 2], vec![2; 5]]));
        assert!(!blows_down_to_rdp(1, &[vec![2], vec![3], vec![7]]));
        assert!(blows_down_to_rdp(1, &[]));
        assert!(blows_down_to_rdp(2, &[]));
        assert!(!blows_down_to_rdp(3, &[]));
        // -2 -1 -3 contracts to a smooth point
        assert!(blows_down_to_rdp(1, &[vec![2], vec![3]]));
        // -3 -1 -3 contracts to -2 -2
        assert!(blows_down_to_rdp(1, &[vec![3], vec![3]]));
        assert!(!blows_down_to_rdp(1, &[vec![2], vec![2]]));
        assert!(!blows_down_to_rdp(2, &[vec![3]]));
    }

    #[test]
    fn example_pairs() {
        let x = leaves_only(&[2, 3, 7], 4);
        let y = leaves_only(&[2, 3, 7], 5);
        x.validate().unwrap();
        y.validate().unwrap();
        assert_eq!(volume(&x.graph()).unwrap(), rat(1, 1764));
        assert_eq!(volume(&y.graph()).unwrap(), rat(1, 3528));
    }

    #[test]
    fn weight_sets() {
        let z = vec![vec![2, 3], vec![3, 2], vec![4, 4]];
        assert_eq!(acc_max_weight(&z).unwrap(), (rat(5, 6), vec![vec![2, 3], vec![3, 2]]));
        assert_eq!(acc_max_weight(&[vec![5]]).unwrap(), (rat(1, 5), vec![vec![5]]));
        let diag: Vec<Vec<u64>> = (2..=50).map(|n| vec![n, n]).collect();
        assert_eq!(acc_max_weight(&diag).unwrap().1, vec![vec![2, 2]]);
        assert_eq!(acc_max_weight(&[]), Err(Error::EmptySet));
    }

    #[test]
    fn elliptic_family() {
        assert_eq!(family_8_8(7).unwrap().1, rat(242, 21));
        assert_eq!(family_8_8(8).unwrap().1, rat(169, 24));
        assert!(matches!(family_8_8(6), Err(Error::BadParameter(_))));
        assert_eq!(elliptic_base_volume(7).unwrap(), rat(1, 42));
    }

    #[test]
    fn bounds_parse() {
        assert_eq!("m=7,n=12,nprime=12,d=6".parse::<SearchBounds>().unwrap(), SearchBounds::default());
        assert_eq!("d=5".parse::<SearchBounds>().unwrap().max_d, 5);
        assert!("q=1".parse::<SearchBounds>().is_err());
    }

    #[test]
    fn small_search() {
        let b: SearchBounds = "m=3,n=3,nprime=7,d=5".parse().unwrap();
        let s = rdp_star_search(b, Mode::Sequential).unwrap();
        assert_eq!(s.min, Some(rat(1, 3528)));
        assert_eq!(s.argmin, vec![leaves_only(&[2, 3, 7], 5)]);
        assert_eq!(s.min_chi_bar, Some(rat(1, 42)));
        assert_eq!(s, rdp_star_search(b, Mode::Parallel).unwrap());
        let mut buf = Vec::new();
        let rows = write_search_csv(b, Mode::Sequential, &mut buf).unwrap();
        assert_eq!(rows, s.configurations);
    }
}
