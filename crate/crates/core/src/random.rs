//! Seeded random graphs and pairs for invariance checks and property tests.
//! Every generator is a pure function of the seed.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{star_branch_end, star_graph, DecoratedGraph, Locus, PairSpec, Weight};
use crate::rat::{is_negative_definite, rat, Rat};
use crate::star::chain_invariants;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `k/den` in `[0, 1]` with `den ≤ 6`.
pub fn coefficient<R: Rng>(rng: &mut R) -> Rat {
    let den = rng.random_range(1..=6);
    rat(rng.random_range(0..=den), den)
}

/// Nonzero `k/den` in `(0, 1]`.
pub fn positive_coefficient<R: Rng>(rng: &mut R) -> Rat {
    let den = rng.random_range(1..=6);
    rat(rng.random_range(1..=den), den)
}

/// Random negative-definite tree on at most `max_vertices` curves, no arrows.
/// Self-intersections are drawn freely and redrawn until the form is
/// negative definite; a diagonally dominant choice is the fallback.
pub fn tree<R: Rng>(rng: &mut R, max_vertices: usize) -> DecoratedGraph {
    tree_below(rng, max_vertices, 1)
}

/// Like [`tree`] with every self-intersection at most `-2`, so no curve can
/// be contracted.
pub fn minimal_tree<R: Rng>(rng: &mut R, max_vertices: usize) -> DecoratedGraph {
    tree_below(rng, max_vertices, 2)
}

fn tree_below<R: Rng>(rng: &mut R, max_vertices: usize, least: i64) -> DecoratedGraph {
    let n = rng.random_range(1..=max_vertices.max(1));
    let parents: Vec<usize> = (1..n).map(|i| rng.random_range(0..i)).collect();
    let genus: Vec<u32> = (0..n).map(|_| if rng.random_bool(0.1) { 1 } else { 0 }).collect();
    let mut valence = vec![0i64; n];
    for (i, &p) in parents.iter().enumerate() {
        valence[i + 1] += 1;
        valence[p] += 1;
    }
    let build = |e: &[i64]| {
        let mut g = DecoratedGraph::new();
        for v in 0..n {
            g.add_vertex(format!("v{v}"), e[v], genus[v]);
        }
        for (i, &p) in parents.iter().enumerate() {
            g.add_edge(p, i + 1, 1);
        }
        g
    };
    for _ in 0..50 {
        let e: Vec<i64> = valence.iter().map(|&k| -rng.random_range(least..=(k + 2).max(least))).collect();
        let g = build(&e);
        if is_negative_definite(&g.intersection_matrix()) {
            return g;
        }
    }
    let e: Vec<i64> = valence.iter().map(|&k| -(k + 1 + rng.random_range(0..=1)).max(least)).collect();
    build(&e)
}

/// Adds up to `max_arrows` arrows with random coefficients in `[0, 1]`.
pub fn decorate<R: Rng>(rng: &mut R, g: &DecoratedGraph, max_arrows: usize) -> PairSpec {
    let mut p = g.clone();
    for k in 0..rng.random_range(0..=max_arrows) {
        let at = rng.random_range(0..p.vertices.len());
        p.add_arrow(format!("C{}", k + 1), at, Weight::Coeff(coefficient(rng)));
    }
    p
}

/// Random tree with up to three arrows.
pub fn pair<R: Rng>(rng: &mut R, max_vertices: usize) -> PairSpec {
    let g = tree(rng, max_vertices);
    decorate(rng, &g, 3)
}

/// A valid blow-up center of `g`.
pub fn locus<R: Rng>(rng: &mut R, g: &DecoratedGraph) -> Locus {
    loop {
        match rng.random_range(0..3) {
            0 => return Locus::Smooth(rng.random_range(0..g.vertices.len())),
            1 if !g.edges.is_empty() => {
                let e = &g.edges[rng.random_range(0..g.edges.len())];
                return Locus::Double(e.a, e.b);
            }
            2 if !g.arrows.is_empty() => return Locus::Arrow(rng.random_range(0..g.arrows.len())),
            _ => {}
        }
    }
}

/// Up to `max_len` random blow-ups of `g`.
pub fn blow_ups<R: Rng>(rng: &mut R, g: &DecoratedGraph, max_len: usize) -> DecoratedGraph {
    let mut g = g.clone();
    for _ in 0..rng.random_range(0..=max_len) {
        let at = locus(rng, &g);
        g = g.blow_up(at).expect("random locus is valid");
    }
    g
}

/// Random negative-definite star: center genus `≤ max_genus`, at most
/// `max_t` strings of length `≤ 3` with entries in `2..=max_entry`, and an
/// arrow of random coefficient on about half of the string ends.
pub fn star<R: Rng>(rng: &mut R, max_genus: u32, max_t: usize, max_entry: i64) -> PairSpec {
    let genus = rng.random_range(0..=max_genus);
    let t = if genus == 0 { rng.random_range(3..=max_t.max(3)) } else { rng.random_range(1..=max_t.max(1)) };
    let branches: Vec<Vec<i64>> =
        (0..t).map(|_| (0..rng.random_range(1..=3)).map(|_| rng.random_range(2..=max_entry)).collect()).collect();
    let sum: Rat = branches
        .iter()
        .map(|b| {
            let c = chain_invariants(b).expect("entries are at least 2");
            rat(c.q, c.m)
        })
        .sum();
    let d = sum.floor().to_integer().to_i64().expect("small") + 1 + rng.random_range(0..=1);
    let mut g = star_graph(d, genus, &branches);
    for i in 0..t {
        if rng.random_bool(0.5) {
            g.add_arrow(format!("C{}", i + 1), star_branch_end(&branches, i), Weight::Coeff(coefficient(rng)));
        }
    }
    g
}
