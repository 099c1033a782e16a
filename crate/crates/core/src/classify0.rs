//! Orbifold pairs of volume 0: structural recognition of the five graph
//! types, the finite lists that go with them, the exhaustive `t = 3`
//! census and the `(C², C/2)` fixture corpus.

use std::fmt;
use std::io::Write;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{star_branch_end, star_graph, DecoratedGraph, PairSpec, Weight};
use crate::pairs::{opposite, pcp_on};
use crate::par::{self, Mode};
use crate::rat::{rat, Rat};
use crate::star::{d_type_branch, detect_star, strings_with_determinant, Detection, StarShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vol0Label {
    /// A string of rational curves.
    Chain,
    /// Two `-2` leaves on a rational node, curve on the third string.
    DType,
    /// Two rational nodes, each carrying two `∘` leaves.
    TwoCenter,
    /// Four strings with every `n_i m_i = 2`.
    Star4,
    /// Three strings whose `n_i m_i` lie in one of the four families.
    Star3,
}

impl Vol0Label {
    pub fn name(self) -> &'static str {
        match self {
            Vol0Label::Chain => "chain",
            Vol0Label::DType => "d-type",
            Vol0Label::TwoCenter => "two-center",
            Vol0Label::Star4 => "star4",
            Vol0Label::Star3 => "star3",
        }
    }
}

impl fmt::Display for Vol0Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vol0Case {
    pub label: Vol0Label,
    /// Branch determinants `m_i` (stars only), sorted with `weights`.
    pub determinants: Vec<i64>,
    /// Orbifold weights `n_i`, 1 where there is no arrow.
    pub weights: Vec<u64>,
    /// End configuration over `{1, 2}` for the two-center and `t = 4` cases.
    pub word: Option<String>,
}

impl Vol0Case {
    pub fn parameters(&self) -> String {
        let mut out = Vec::new();
        if !self.determinants.is_empty() {
            out.push(format!("m={}", join(&self.determinants)));
        }
        out.push(format!("n={}", join(&self.weights)));
        if let Some(w) = &self.word {
            out.push(format!("word={w}"));
        }
        out.join(" ")
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Vol0Match {
    Case(Vol0Case),
    NotVolumeZero(Rat),
}

/// Family (1-based) of a sorted triple `k_1 ≤ k_2 ≤ k_3` of values `n_i m_i`.
pub fn star3_family(k: [u64; 3]) -> Option<usize> {
    match k {
        [2, 2, k] if k >= 2 => Some(1),
        [2, 3, k] if (3..=6).contains(&k) => Some(2),
        [2, 4, 4] => Some(3),
        [3, 3, 3] => Some(4),
        _ => None,
    }
}

/// The four families written out up to `k ≤ max_k`, sorted.
pub fn enumerate_star3_types(max_k: u64) -> Vec<[u64; 3]> {
    let mut out: Vec<[u64; 3]> = (2..=max_k).map(|k| [2, 2, k]).collect();
    out.extend((3..=6.min(max_k)).map(|k| [2, 3, k]));
    if max_k >= 4 {
        out.push([2, 4, 4]);
    }
    if max_k >= 3 {
        out.push([3, 3, 3]);
    }
    out.sort();
    out.dedup();
    out
}

/// Weight triples `n_i | k_i` for a fixed triple of products, excluding the
/// arrowless `(1, 1, 1)`; sorted.
pub fn weight_triples(k: [u64; 3]) -> Vec<[u64; 3]> {
    let divisors = |x: u64| (1..=x).filter(move |d| x.is_multiple_of(*d));
    let mut out = Vec::new();
    for a in divisors(k[0]) {
        for b in divisors(k[1]) {
            for c in divisors(k[2]) {
                if [a, b, c] != [1, 1, 1] {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out.sort();
    out
}

pub fn enumerate_234_weights() -> Vec<[u64; 3]> {
    weight_triples([2, 3, 4])
}

/// Branch determinant multisets of log canonical three-string stars with
/// every nonzero coefficient at least 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeterminantFamily {
    /// `{a, b, c}` with the third entry fixed.
    Fixed([i64; 3]),
    /// `{a, b, m}` for `m ≥ from` (and `m ≤ to` when bounded).
    Open { a: i64, b: i64, from: i64, to: Option<i64> },
}

impl DeterminantFamily {
    pub fn contains(&self, m: [i64; 3]) -> bool {
        let mut m = m;
        m.sort();
        self.expand(m[2].max(1)).contains(&m)
    }

    pub fn expand(&self, max_m: i64) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        match *self {
            DeterminantFamily::Fixed(t) => out.push(t),
            DeterminantFamily::Open { a, b, from, to } => {
                for m in from..=to.unwrap_or(max_m).min(max_m) {
                    let mut t = [a, b, m];
                    t.sort();
                    out.push(t);
                }
            }
        }
        out
    }
}

impl fmt::Display for DeterminantFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeterminantFamily::Fixed([a, b, c]) => write!(f, "{{{a},{b},{c}}}"),
            DeterminantFamily::Open { a, b, from, to: None } => write!(f, "{{{a},{b},m}} m>={from}"),
            DeterminantFamily::Open { a, b, from, to: Some(to) } => write!(f, "{{{a},{b},m}} {from}<=m<={to}"),
        }
    }
}

pub fn halfweight_lc_determinants() -> Vec<DeterminantFamily> {
    use DeterminantFamily::*;
    vec![
        Fixed([1, 1, 1]),
        Open { a: 1, b: 1, from: 2, to: None },
        Open { a: 1, b: 2, from: 2, to: None },
        Open { a: 1, b: 3, from: 3, to: Some(6) },
        Fixed([1, 4, 4]),
        Open { a: 2, b: 2, from: 2, to: None },
        Fixed([2, 3, 3]),
    ]
}

/// Expanded determinant multisets up to `max_m`, sorted and deduplicated.
pub fn halfweight_lc_triples(max_m: i64) -> Vec<[i64; 3]> {
    let mut out: Vec<[i64; 3]> = halfweight_lc_determinants().iter().flat_map(|f| f.expand(max_m)).collect();
    out.sort();
    out.dedup();
    out
}

fn orbifold_weights(p: &PairSpec) -> Result<()> {
    match p.arrows.iter().find(|a| a.weight.orbifold().is_none()) {
        Some(a) => Err(Error::PreconditionViolated(format!("arrow `{}` is not in orbifold form", a.id))),
        None => Ok(()),
    }
}

/// `∘` leaf symbol: `-1` with a weight-2 arrow, or an arrowless `-2`.
fn leaf_symbol(g: &DecoratedGraph, v: usize) -> Option<char> {
    let arrows: Vec<_> = g.arrows_at(v).collect();
    match (g.vertices[v].self_int, arrows.as_slice()) {
        (-1, [a]) if a.weight.orbifold() == Some(2) => Some('1'),
        (-2, []) => Some('2'),
        _ => None,
    }
}

fn two_center_word(g: &DecoratedGraph) -> Option<String> {
    let n = g.vertices.len();
    let total: u32 = g.edges.iter().map(|e| e.mult).sum();
    if total as usize + 1 != n || g.vertices.iter().any(|v| v.genus > 0) || !g.is_connected() {
        return None;
    }
    let nodes: Vec<usize> = (0..n).filter(|&v| g.valence(v) >= 3).collect();
    if nodes.len() != 2 || nodes.iter().any(|&v| g.valence(v) != 3) {
        return None;
    }
    let adj = g.neighbors();
    let mut pairs = Vec::new();
    let mut leaves = Vec::new();
    for &node in &nodes {
        let ends: Vec<usize> = adj[node].iter().copied().filter(|&w| g.valence(w) == 1).collect();
        if ends.len() != 2 {
            return None;
        }
        let mut word: Vec<char> = ends.iter().map(|&v| leaf_symbol(g, v)).collect::<Option<_>>()?;
        word.sort();
        pairs.push(word.into_iter().collect::<String>());
        leaves.extend(ends);
    }
    if g.arrows.is_empty() || g.arrows.iter().any(|a| !leaves.contains(&a.at)) {
        return None;
    }
    pairs.sort();
    Some(pairs.concat())
}

/// What the star cases need to know about one string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct BranchKey {
    m: i64,
    minus_two_leaf: bool,
}

fn branch_keys(s: &StarShape) -> Vec<BranchKey> {
    s.branches.iter().map(|b| BranchKey { m: b.chain.m, minus_two_leaf: b.chain.a == [2] }).collect()
}

/// `weights[i] = n_i`, `has_arrow[i]` whether string `i` ends in an arrow.
fn star_case(genus: u32, keys: &[BranchKey], has_arrow: &[bool], weights: &[u64]) -> Option<Vol0Case> {
    if genus > 0 {
        return None;
    }
    let label = match keys.len() {
        3 => {
            let mut k = [0u64; 3];
            for i in 0..3 {
                k[i] = weights[i] * keys[i].m as u64;
            }
            k.sort();
            let leaf: Vec<bool> = keys.iter().map(|b| b.minus_two_leaf).collect();
            if d_type_branch(genus, &leaf, has_arrow).is_some() {
                Vol0Label::DType
            } else if star3_family(k).is_some() {
                Vol0Label::Star3
            } else {
                return None;
            }
        }
        4 if (0..4).all(|i| weights[i] * keys[i].m as u64 == 2) => Vol0Label::Star4,
        _ => return None,
    };
    let mut data: Vec<(u64, i64, u64)> = keys.iter().zip(weights).map(|(b, &n)| (n * b.m as u64, b.m, n)).collect();
    data.sort();
    let word = (label == Vol0Label::Star4).then(|| data.iter().map(|x| if x.1 == 1 { '1' } else { '2' }).collect());
    Some(Vol0Case {
        label,
        determinants: data.iter().map(|x| x.1).collect(),
        weights: data.iter().map(|x| x.2).collect(),
        word,
    })
}

fn branch_weights(s: &StarShape) -> Vec<u64> {
    s.branches.iter().map(|b| b.arrow.and_then(|k| s.graph.arrows[k].weight.orbifold()).unwrap_or(1)).collect()
}

/// Structural recognition only, on a graph already in minimal orbifold form.
pub fn match_structure(g: &DecoratedGraph) -> Option<Vol0Case> {
    if g.arrows.is_empty() {
        return None;
    }
    match detect_star(g) {
        Detection::Chain => Some(Vol0Case {
            label: Vol0Label::Chain,
            determinants: Vec::new(),
            weights: g.arrows.iter().map(|a| a.weight.orbifold().unwrap_or(1)).collect(),
            word: None,
        }),
        Detection::Star(s) => {
            let arrows: Vec<bool> = s.branches.iter().map(|b| b.arrow.is_some()).collect();
            star_case(s.genus, &branch_keys(&s), &arrows, &branch_weights(&s))
        }
        Detection::NotStar => two_center_word(g).map(|word| Vol0Case {
            label: Vol0Label::TwoCenter,
            determinants: Vec::new(),
            weights: g.arrows.iter().map(|a| a.weight.orbifold().unwrap_or(1)).collect(),
            word: Some(word),
        }),
    }
}

fn reconcile(structure: Option<Vol0Case>, volume: Rat) -> Result<Vol0Match> {
    match (structure, volume.is_zero()) {
        (Some(c), true) => Ok(Vol0Match::Case(c)),
        (None, false) => Ok(Vol0Match::NotVolumeZero(volume)),
        (Some(c), false) => {
            Err(Error::ClassificationMismatch(format!("graph has {} shape but volume {volume}", c.label)))
        }
        (None, true) => Err(Error::ClassificationMismatch("volume 0 without a matching graph type".into())),
    }
}

/// Labels a volume-0 orbifold pair, cross-checked against the volume.
pub fn match_case(p: &PairSpec) -> Result<Vol0Match> {
    orbifold_weights(p)?;
    if p.arrows.is_empty() {
        return Err(Error::PreconditionViolated("pair has no curve".into()));
    }
    let g = match p.normalize_minimal_orbifold() {
        Ok(g) => g,
        Err(Error::ExceptionalCase) => p.clone(),
        Err(e) => return Err(e),
    };
    let lat = g.lattice()?;
    let volume = pcp_on(&lat, &opposite(&g)?)?;
    reconcile(match_structure(&g), volume)
}

/// One configuration of the `t = 3` census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub d: i64,
    pub strings: Vec<Vec<i64>>,
    pub determinants: Vec<i64>,
    pub weights: Vec<u64>,
    pub label: Option<Vol0Label>,
    pub volume: Rat,
}

impl CensusRow {
    pub fn parameters(&self) -> String {
        let strings: Vec<String> =
            self.strings.iter().map(|s| s.iter().map(i64::to_string).collect::<Vec<_>>().join(":")).collect();
        format!("d={} strings={} m={} n={}", self.d, strings.join(","), join(&self.determinants), join(&self.weights))
    }
}

/// Bounds of the exhaustive `t = 3` loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusBounds {
    pub max_m: i64,
    pub max_n: u64,
    pub max_d: i64,
}

impl Default for CensusBounds {
    fn default() -> Self {
        Self { max_m: 8, max_n: 8, max_d: 10 }
    }
}

/// `(string, n)` choices for one branch; `n = 1` means no arrow, which a
/// lone `-1` curve may not have.
fn branch_choices(b: CensusBounds) -> Vec<(Vec<i64>, u64)> {
    let mut out = Vec::new();
    for m in 1..=b.max_m {
        for s in strings_with_determinant(m) {
            for n in (if m == 1 { 2 } else { 1 })..=b.max_n {
                out.push((s.clone(), n));
            }
        }
    }
    out
}

/// Totals of a census run plus the rows the caller asked to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusSummary {
    pub total: usize,
    pub volume_zero: usize,
    pub min_positive: Option<Rat>,
    pub rows: Vec<CensusRow>,
}

/// Every `t = 3` orbifold star within `bounds` (branches up to permutation),
/// with its volume from the general pipeline and its structural label.
/// Fails with `ClassificationMismatch` on any disagreement. Only rows for
/// which `keep(label, volume)` holds are stored, in enumeration order.
pub fn star3_census<K>(bounds: CensusBounds, mode: Mode, keep: K) -> Result<CensusSummary>
where
    K: Fn(Option<Vol0Label>, &Rat) -> bool + Sync,
{
    let choices = branch_choices(bounds);
    let mut firsts: Vec<usize> = (0..choices.len()).collect();
    firsts.dedup_by(|a, b| choices[*a].0 == choices[*b].0);
    // one work item per underlying string triple
    let mut shapes = Vec::new();
    for (x, &i) in firsts.iter().enumerate() {
        for (y, &j) in firsts.iter().enumerate().skip(x) {
            for &l in firsts.iter().skip(y) {
                shapes.push([i, j, l]);
            }
        }
    }
    let parts = par::map(mode, shapes, |idx| census_shape(&choices, idx, bounds, &keep));
    let mut summary = CensusSummary { total: 0, volume_zero: 0, min_positive: None, rows: Vec::new() };
    for part in parts {
        let part = part?;
        summary.total += part.total;
        summary.volume_zero += part.volume_zero;
        summary.min_positive = match (summary.min_positive.take(), part.min_positive) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        summary.rows.extend(part.rows);
    }
    Ok(summary)
}

fn census_shape<K>(
    choices: &[(Vec<i64>, u64)],
    idx: [usize; 3],
    bounds: CensusBounds,
    keep: &K,
) -> Result<CensusSummary>
where
    K: Fn(Option<Vol0Label>, &Rat) -> bool,
{
    let strings: Vec<Vec<i64>> = idx.iter().map(|&i| choices[i].0.clone()).collect();
    let options: Vec<Vec<u64>> =
        strings.iter().map(|s| choices.iter().filter(|c| &c.0 == s).map(|c| c.1).collect()).collect();
    let ends: Vec<usize> = (0..3).map(|i| star_branch_end(&strings, i)).collect();
    let mut out = CensusSummary { total: 0, volume_zero: 0, min_positive: None, rows: Vec::new() };
    for d in 1..=bounds.max_d {
        let g = star_graph(d, 0, &strings);
        let Ok(lat) = g.lattice() else {
            continue;
        };
        let Detection::Star(shape) = detect_star(&g) else {
            return Err(Error::ClassificationMismatch("census graph is not a star".into()));
        };
        let keys = branch_keys(&shape);
        // (K + E)·E_j is integral on an arrowless graph
        let base: Vec<i64> =
            g.log_canonical_vector().iter().map(|x| x.to_integer().try_into().expect("small entry")).collect();
        for &a in &options[0] {
            for &b in &options[1] {
                for &c in &options[2] {
                    let n = [a, b, c];
                    if n == [1, 1, 1] || !canonical_order(&strings, &n) {
                        continue;
                    }
                    // K + E + Σ (1 - 1/n_i) C̃_i, scaled by lcm(n)
                    let den = n.iter().fold(1u64, |acc, &x| acc.lcm(&x)) as i64;
                    let mut l: Vec<i64> = base.iter().map(|x| x * den).collect();
                    for i in 0..3 {
                        l[ends[i]] += den - den / n[i] as i64;
                    }
                    let volume = lat.neg_p_squared_scaled(&l, den)?;
                    let arrows = n.map(|x| x > 1);
                    let label = match reconcile(star_case(0, &keys, &arrows, &n), volume.clone())? {
                        Vol0Match::Case(c) => Some(c.label),
                        Vol0Match::NotVolumeZero(_) => None,
                    };
                    out.total += 1;
                    if volume.is_zero() {
                        out.volume_zero += 1;
                    } else if out.min_positive.as_ref().is_none_or(|m| volume < *m) {
                        out.min_positive = Some(volume.clone());
                    }
                    if keep(label, &volume) {
                        out.rows.push(CensusRow {
                            d,
                            strings: strings.clone(),
                            determinants: shape.determinants(),
                            weights: n.to_vec(),
                            label,
                            volume,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Among equal strings keep only nondecreasing weights, so each graph up to
/// symmetry appears once.
fn canonical_order(strings: &[Vec<i64>], n: &[u64; 3]) -> bool {
    (0..2).all(|i| strings[i] != strings[i + 1] || n[i] <= n[i + 1])
}

pub fn write_census_csv<W: Write>(rows: &[CensusRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["case_label", "parameters", "volume"]).map_err(io)?;
    for r in rows {
        let label = r.label.map_or("none", Vol0Label::name);
        w.write_record([label, &r.parameters(), &r.volume.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Whether `C² ⊃ C` with coefficient 1/2 is expected to have volume 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Member,
    Counterexample,
}

macro_rules! fixtures {
    ($($kind:ident $dir:literal $name:literal),* $(,)?) => {
        /// The shipped corpus: name, kind, graph text.
        pub const VOL_HALF_FIXTURES: &[(&str, FixtureKind, &str)] = &[
            $(($name, FixtureKind::$kind, include_str!(concat!(
                "../../../data/fixtures/vol_half/", $dir, "/", $name, ".graph"
            )))),*
        ];
    };
}

fixtures! {
    Member "members" "y",
    Member "members" "xy",
    Member "members" "y2-x4",
    Member "members" "y2-x6",
    Member "members" "y2-x3",
    Member "members" "y2-x5",
    Member "members" "y2-x7",
    Member "members" "x_y2-x5",
    Member "members" "y3+x4",
    Member "members" "y_y2+x3",
    Member "members" "y3+x5",
    Member "members" "y3+x6",
    Member "members" "y4+x4",
    Counterexample "counterexamples" "y4+x5",
    Counterexample "counterexamples" "y3+x7",
}

pub fn fixture(name: &str) -> Result<(FixtureKind, DecoratedGraph)> {
    let (_, kind, text) =
        VOL_HALF_FIXTURES.iter().find(|f| f.0 == name).ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    Ok((*kind, DecoratedGraph::parse(text)?))
}

/// `Vol(C², C/2)` for a shipped fixture.
pub fn verify_fixture_vol_half(name: &str) -> Result<Rat> {
    let (_, g) = fixture(name)?;
    g.validate()?;
    if g.arrows.iter().any(|a| a.weight.c() != rat(1, 2)) {
        return Err(Error::PreconditionViolated("fixture arrows must carry weight 2".into()));
    }
    let g = match g.normalize_minimal_orbifold() {
        Ok(h) => h,
        Err(Error::ExceptionalCase) => g,
        Err(e) => return Err(e),
    };
    crate::pairs::volume(&g)
}

/// Lowers every coefficient `c = 1 - 1/n̄` to `1 - 1/⌊n̄⌋`.
pub fn floor_weights(p: &PairSpec) -> PairSpec {
    p.with_weights(|a| {
        let c = a.weight.c();
        if c.is_zero() || c == Rat::one() {
            return Weight::Coeff(c);
        }
        let nbar: Ratio<num_bigint::BigInt> = (Rat::one() - c).recip();
        let n = nbar.floor().to_integer();
        Weight::Coeff(Rat::one() - Rat::new(num_bigint::BigInt::one(), n))
    })
}
