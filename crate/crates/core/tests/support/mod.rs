//! Randomized checks shared by the property tests and the acceptance run.
//! Each check takes one seed and draws its whole input from it.
#![allow(dead_code)]

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::Rng;

use pairvol::pairs::{classify, drop_zero_arrows, lct, pcp, volume};
use pairvol::random::{self, seeded};
use pairvol::rat::{is_negative_definite, negative_definiteness, solve_symmetric, Definiteness};
use pairvol::star::{chain_invariants, detect_star, fast_negative_part, hj_expansion, star_pcp, Detection};
use pairvol::zariski::zariski_decompose;
use pairvol::{int, rat, DecoratedGraph, Error, Growth, Rat, SymMatrix, Weight};

pub type Check = fn(u64) -> Result<(), TestCaseError>;

pub struct Suite {
    pub name: &'static str,
    pub cases: u32,
    pub check: Check,
}

pub const SUITES: &[Suite] = &[
    Suite { name: "negative definiteness vs leading minors", cases: 200, check: definiteness_matches_minors },
    Suite { name: "exact solve round trip", cases: 200, check: solve_round_trip },
    Suite { name: "definiteness breaks are detected", cases: 500, check: breaking_definiteness_is_detected },
    Suite { name: "normalization bound and idempotence", cases: 200, check: normalization },
    Suite { name: "zariski certificates and uniqueness", cases: 500, check: zariski_uniqueness },
    Suite { name: "zariski scaling", cases: 200, check: zariski_scaling },
    Suite { name: "zariski monotone in effective divisors", cases: 300, check: zariski_monotone },
    Suite { name: "pcp monotone in coefficients", cases: 300, check: pcp_monotone },
    Suite { name: "blow-up invariance of pcp and volume", cases: 500, check: blow_up_invariance },
    Suite { name: "threshold grid", cases: 200, check: threshold_grid },
    Suite { name: "lowering weights keeps log canonical", cases: 200, check: floor_lowering },
    Suite { name: "star closed form and f·f", cases: 200, check: star_closed_form },
    Suite { name: "string fast path", cases: 200, check: fast_path },
    Suite { name: "string inverse q·q' = 1 mod m", cases: 200, check: string_inverse },
];

/// Runs `suite` on its case count from a fixed seed.
pub fn run_deterministic(suite: &Suite) -> Result<(), String> {
    let config = Config { cases: suite.cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&any::<u64>(), suite.check).map_err(|e| e.to_string())
}

fn brute_det(m: &[Vec<i128>]) -> i128 {
    if m.is_empty() {
        return 1;
    }
    let rest = |skip: usize| -> Vec<Vec<i128>> {
        m[1..].iter().map(|row| row.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &x)| x).collect()).collect()
    };
    (0..m.len())
        .filter(|&j| m[0][j] != 0)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * brute_det(&rest(j))
        })
        .sum()
}

fn random_symmetric<R: Rng>(rng: &mut R) -> SymMatrix {
    let k = rng.random_range(1..=8);
    let mut m = SymMatrix::zeros(k);
    for i in 0..k {
        m.set(i, i, -rng.random_range(0..=4));
        for j in i + 1..k {
            if rng.random_bool(0.4) {
                m.set(i, j, rng.random_range(-1..=1));
            }
        }
    }
    m
}

pub fn definiteness_matches_minors(seed: u64) -> Result<(), TestCaseError> {
    let m = random_symmetric(&mut seeded(seed));
    let k = m.order();
    let minor = |j: usize| {
        let rows: Vec<Vec<i128>> = (0..j).map(|r| (0..j).map(|c| m.get(r, c) as i128).collect()).collect();
        brute_det(&rows)
    };
    // (-1)^j D_j > 0 for every leading minor
    let first_bad = (1..=k).find(|&j| {
        let d = minor(j);
        if j % 2 == 0 {
            d <= 0
        } else {
            d >= 0
        }
    });
    let expected = match first_bad {
        None => Definiteness::NegativeDefinite,
        Some(minor) => Definiteness::Violated { minor },
    };
    prop_assert_eq!(negative_definiteness(&m), expected);
    Ok(())
}

pub fn solve_round_trip(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let m = random_symmetric(&mut rng);
    let k = m.order();
    let idx: Vec<usize> = (0..k).collect();
    let b: Vec<Rat> = (0..k).map(|_| rat(rng.random_range(-9..=9), rng.random_range(1..=5))).collect();
    match solve_symmetric(&m, &idx, &b) {
        Ok(x) => prop_assert_eq!(m.mul_vec(&x), b),
        Err(Error::SingularSystem) => prop_assert!(pairvol::rat::determinant(&m, &idx).is_zero()),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    Ok(())
}

pub fn breaking_definiteness_is_detected(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let g = random::tree(&mut rng, 8);
    prop_assert!(g.validate().is_ok());
    prop_assert!(is_negative_definite(&g.intersection_matrix()));
    let mut h = g.clone();
    let v = rng.random_range(0..h.vertices.len());
    h.vertices[v].self_int += 1;
    let broken = h.vertices[v].self_int >= 0 || !is_negative_definite(&h.intersection_matrix());
    match h.validate() {
        Err(Error::NotNegativeDefinite { .. }) => prop_assert!(broken),
        Ok(()) => prop_assert!(!broken),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    Ok(())
}

pub fn normalization(seed: u64) -> Result<(), TestCaseError> {
    let p = random::pair(&mut seeded(seed), 6);
    let shared = p.arrows.iter().enumerate().filter(|&(k, a)| p.arrows[..k].iter().any(|b| b.at == a.at)).count();
    match p.normalize_minimal_orbifold() {
        Ok(q) => {
            prop_assert!(q.vertices.len() - p.vertices.len() <= p.arrows.len() + shared);
            prop_assert!(q.is_minimal_orbifold_form());
            prop_assert!(q.validate().is_ok());
            prop_assert_eq!(q.normalize_minimal_orbifold().unwrap(), q);
        }
        Err(Error::ExceptionalCase) => prop_assert!(p.vertices.len() == 1 && p.arrows.len() == 2),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    Ok(())
}

/// Either the log canonical class of a random pair or a random integer class.
fn random_class<R: Rng>(rng: &mut R, g: &DecoratedGraph) -> Vec<Rat> {
    if rng.random_bool(0.5) {
        g.log_canonical_vector()
    } else {
        (0..g.vertices.len()).map(|_| int(rng.random_range(-3..=3))).collect()
    }
}

pub fn zariski_uniqueness(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let g = random::pair(&mut rng, 8);
    let l = random_class(&mut rng, &g);
    let a = zariski_decompose(&g, &l, Growth::Naive).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = zariski_decompose(&g, &l, Growth::Component).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(!a.neg_p_squared.is_negative());
    prop_assert_eq!(a.positive, b.positive);
    prop_assert_eq!(a.negative, b.negative);
    prop_assert_eq!(a.neg_p_squared, b.neg_p_squared);
    Ok(())
}

pub fn zariski_scaling(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let g = random::pair(&mut rng, 8);
    let l = random_class(&mut rng, &g);
    let k = rat(rng.random_range(1..=7), rng.random_range(1..=7));
    let kl: Vec<Rat> = l.iter().map(|x| x * &k).collect();
    let a = zariski_decompose(&g, &l, Growth::Component).unwrap();
    let b = zariski_decompose(&g, &kl, Growth::Component).unwrap();
    let scaled = |v: &[Rat]| v.iter().map(|x| x * &k).collect::<Vec<_>>();
    prop_assert_eq!(scaled(&a.positive), b.positive);
    prop_assert_eq!(scaled(&a.negative), b.negative);
    prop_assert_eq!(&a.neg_p_squared * &k * &k, b.neg_p_squared);
    Ok(())
}

pub fn zariski_monotone(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let g = random::pair(&mut rng, 8);
    let l = random_class(&mut rng, &g);
    let d: Vec<Rat> = (0..g.vertices.len())
        .map(|_| if rng.random_bool(0.5) { rat(rng.random_range(0..=6), 3) } else { Rat::zero() })
        .collect();
    let dd = g.intersection_matrix().mul_vec(&d);
    let lower: Vec<Rat> = l.iter().zip(&dd).map(|(a, b)| a - b).collect();
    let before = pairvol::zariski::neg_p_squared(&g, &l).unwrap();
    let after = pairvol::zariski::neg_p_squared(&g, &lower).unwrap();
    prop_assert!(before <= after, "{} > {}", before, after);
    Ok(())
}

pub fn pcp_monotone(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let p = random::pair(&mut rng, 8);
    if p.arrows.is_empty() {
        return Ok(());
    }
    let k = rng.random_range(0..p.arrows.len());
    let c = p.arrows[k].weight.c();
    let mut q = p.clone();
    q.arrows[k].weight = Weight::Coeff(&c * rat(rng.random_range(0..=4), 4));
    let big = pcp(&p).unwrap();
    let small = pcp(&q).unwrap();
    prop_assert!(small <= big, "{} > {}", small, big);
    prop_assert_eq!(classify(&p).unwrap().is_log_canonical(), big.is_zero());
    Ok(())
}

pub fn blow_up_invariance(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let p = random::pair(&mut rng, 7);
    let q = random::blow_ups(&mut rng, &p, 5);
    prop_assert!(q.validate().is_ok());
    prop_assert_eq!(pcp(&p).unwrap(), pcp(&q).unwrap());
    let (p, q) = (drop_zero_arrows(&p), drop_zero_arrows(&q));
    prop_assert_eq!(volume(&p).unwrap(), volume(&q).unwrap());
    Ok(())
}

fn scaled_curve(p: &DecoratedGraph, eps: &Rat) -> DecoratedGraph {
    p.with_weights(|_| Weight::Coeff(eps.clone()))
}

pub fn threshold_grid(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let p = if rng.random_bool(0.5) { random::star(&mut rng, 1, 5, 5) } else { random::pair(&mut rng, 6) };
    let p = drop_zero_arrows(&p);
    if p.arrows.is_empty() || (p.vertices.len() == 1 && p.arrows.len() == 2) {
        return Ok(());
    }
    let t = match lct(&p) {
        Ok(t) => t,
        Err(Error::NotLogTerminal) => return Ok(()),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    };
    let mut last = Rat::zero();
    for i in 0..=49 {
        let eps = rat(i, 49);
        let v = pcp(&scaled_curve(&p, &eps)).unwrap();
        prop_assert!(v >= last, "pcp drops at {}", eps);
        prop_assert_eq!(v.is_zero(), eps <= t, "threshold {} at {}", &t, &eps);
        last = v;
    }
    Ok(())
}

/// 0 or a coefficient in `[1/2, 1]`.
fn half_or_more<R: Rng>(rng: &mut R) -> Rat {
    if rng.random_bool(0.2) {
        return Rat::zero();
    }
    let den = rng.random_range(2..=12);
    rat(rng.random_range(den / 2 + den % 2..=den), den)
}

pub fn floor_lowering(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let mut p = random::pair(&mut rng, 6);
    for a in &mut p.arrows {
        a.weight = Weight::Coeff(half_or_more(&mut rng));
    }
    if !classify(&p).unwrap().is_log_canonical() {
        return Ok(());
    }
    let q = pairvol::classify0::floor_weights(&p);
    prop_assert!(classify(&q).unwrap().is_log_canonical());
    Ok(())
}

pub fn star_closed_form(seed: u64) -> Result<(), TestCaseError> {
    let p = random::star(&mut seeded(seed), 2, 6, 7);
    let Detection::Star(s) = detect_star(&p) else {
        return Err(TestCaseError::fail("generator produced a non-star"));
    };
    let closed = star_pcp(&s).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&closed.f_squared, &(-s.epsilon.recip()));
    prop_assert_eq!(closed.pcp, pcp(&p).unwrap());
    Ok(())
}

/// Random minimal non-star pair with coefficients in `[1/2, 1]`, in minimal
/// orbifold form.
fn fast_path_input(seed: u64) -> DecoratedGraph {
    let mut rng = seeded(seed);
    loop {
        let mut p = random::minimal_tree(&mut rng, 12);
        for k in 0..rng.random_range(0..=4) {
            let at = rng.random_range(0..p.vertices.len());
            let den = rng.random_range(2..=12);
            let c = rat(rng.random_range(den / 2 + den % 2..=den), den);
            p.add_arrow(format!("C{}", k + 1), at, Weight::Coeff(c));
        }
        let Ok(p) = p.normalize_minimal_orbifold() else {
            continue;
        };
        if matches!(detect_star(&p), Detection::NotStar) {
            return p;
        }
    }
}

pub fn fast_path(seed: u64) -> Result<(), TestCaseError> {
    let p = fast_path_input(seed);
    let fast = fast_negative_part(&p).map_err(|e| TestCaseError::fail(format!("{e}\n{p}")))?;
    let general = zariski_decompose(&p, &p.log_canonical_vector(), Growth::Component).unwrap();
    prop_assert_eq!(fast.negative, general.negative);
    prop_assert_eq!(fast.positive, general.positive);
    prop_assert_eq!(fast.neg_p_squared, general.neg_p_squared);
    Ok(())
}

pub fn string_inverse(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let a: Vec<i64> = (0..rng.random_range(1..=5)).map(|_| rng.random_range(2..=7)).collect();
    let c = chain_invariants(&a).unwrap();
    prop_assert!(c.m > 1);
    prop_assert_eq!((c.q * c.q_rev - 1).rem_euclid(c.m), 0);
    prop_assert_eq!(hj_expansion(c.m, c.q), a);
    prop_assert!(c.d.iter().all(|x| x.is_positive()) && c.d_rev.iter().all(|x| x.is_positive()));
    prop_assert_eq!(c.d.last().unwrap(), &rat(c.q_rev, c.m));
    Ok(())
}
