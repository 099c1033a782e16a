//! Fraction-free exact engine for Zariski decompositions on a fixed
//! negative-definite lattice.
//!
//! Inverses of principal submatrices are computed once per support set as
//! `adj / det` and cached, so repeated decompositions on one graph (the
//! census and search loops) cost a handful of integer matrix-vector products.
//! Arithmetic runs in checked `i128` first and is redone in `BigInt` when
//! anything overflows; results are exact either way.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rat::{negative_definiteness, Definiteness, Rat, SymMatrix};

/// How the support of the negative part grows between solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Growth {
    /// Add exactly the curves that currently dot negatively.
    Naive,
    /// Add whole connected components of non-positive curves that contain a
    /// negative one.
    #[default]
    Component,
}

pub(crate) trait Exact: Clone + Sized {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div_exact(&self, o: &Self) -> Self;
    fn signum(&self) -> i8;
    /// `num / den` in lowest terms.
    fn ratio(num: &Self, den: &Self) -> Rat;
}

impl Exact for i128 {
    fn ratio(num: &Self, den: &Self) -> Rat {
        let g = num.gcd(den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            (n, d) = (-n, -d);
        }
        Rat::new_raw(BigInt::from(n), BigInt::from(d))
    }
    fn zero() -> Self {
        0
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    #[inline]
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    #[inline]
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    #[inline]
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    #[inline]
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert_eq!(self % o, 0);
        self / o
    }
    fn signum(&self) -> i8 {
        i128::signum(*self) as i8
    }
}

impl Exact for BigInt {
    fn ratio(num: &Self, den: &Self) -> Rat {
        Rat::new(num.clone(), den.clone())
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert!((self % o).is_zero());
        self / o
    }
    fn signum(&self) -> i8 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// `(M|S)^{-1} = adj / det`, with `adj` row-major over the positions of `idx`.
#[derive(Debug)]
struct SubInverse<R> {
    adj: Vec<R>,
    det: R,
}

impl<R: Exact> SubInverse<R> {
    /// Fraction-free Gauss–Jordan. No pivoting: every leading minor of a
    /// negative-definite matrix is nonzero.
    fn compute(m: &SymMatrix, idx: &[usize]) -> Option<Self> {
        let k = idx.len();
        let w = 2 * k;
        let mut a: Vec<R> = Vec::with_capacity(k * w);
        for (r, &i) in idx.iter().enumerate() {
            for &j in idx {
                a.push(R::from_i64(m.get(i, j)));
            }
            for c in 0..k {
                a.push(R::from_i64((r == c) as i64));
            }
        }
        let mut prev = R::from_i64(1);
        for p in 0..k {
            let piv = a[p * w + p].clone();
            if piv.signum() == 0 {
                return None;
            }
            for r in 0..k {
                if r == p {
                    continue;
                }
                let f = a[r * w + p].clone();
                for c in 0..w {
                    let v = piv.mul(&a[r * w + c])?.sub(&f.mul(&a[p * w + c])?)?;
                    a[r * w + c] = v.div_exact(&prev);
                }
            }
            prev = piv;
        }
        let adj = (0..k).flat_map(|r| a[r * w + k..r * w + w].to_vec()).collect::<Vec<_>>();
        Some(Self { adj, det: prev })
    }
}

#[derive(Debug)]
struct Cached {
    idx: Vec<usize>,
    small: Option<SubInverse<i128>>,
    big: OnceLock<SubInverse<BigInt>>,
}

impl Cached {
    fn new(m: &SymMatrix, idx: Vec<usize>) -> Self {
        let small = SubInverse::compute(m, &idx);
        Self { idx, small, big: OnceLock::new() }
    }

    fn big(&self, m: &SymMatrix) -> &SubInverse<BigInt> {
        self.big.get_or_init(|| SubInverse::compute(m, &self.idx).expect("BigInt elimination cannot overflow"))
    }
}

trait Pick<R> {
    fn pick<'a>(&'a self, m: &SymMatrix) -> Option<&'a SubInverse<R>>;
}

impl Pick<i128> for Cached {
    fn pick<'a>(&'a self, _: &SymMatrix) -> Option<&'a SubInverse<i128>> {
        self.small.as_ref()
    }
}

impl Pick<BigInt> for Cached {
    fn pick<'a>(&'a self, m: &SymMatrix) -> Option<&'a SubInverse<BigInt>> {
        Some(self.big(m))
    }
}

/// Exact result of one decomposition, in common-denominator form converted
/// back to rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Coefficients of the negative part.
    pub negative: Vec<Rat>,
    /// Intersection numbers `P·E_j` of the nef part.
    pub positive_dots: Vec<Rat>,
    /// Coefficients of the nef part.
    pub positive: Vec<Rat>,
    pub support: Vec<bool>,
    /// `-P·P`.
    pub neg_p_squared: Rat,
    /// Number of linear solves performed.
    pub rounds: usize,
}

fn convert<R: Exact>(l: &(Vec<BigInt>, BigInt)) -> Option<(Vec<R>, R)> {
    let v = l.0.iter().map(R::from_big).collect::<Option<Vec<_>>>()?;
    Some((v, R::from_big(&l.1)?))
}

/// A validated negative-definite intersection lattice with cached inverses.
#[derive(Debug)]
pub struct Lattice {
    matrix: SymMatrix,
    neighbors: Vec<Vec<usize>>,
    cache: RwLock<HashMap<Key, Arc<Cached>>>,
    full: OnceLock<Arc<Cached>>,
}

/// Support set as a bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Small(u128),
    Large(Vec<u64>),
}

impl Key {
    fn of(support: &[bool]) -> Self {
        if support.len() <= 128 {
            let mut k = 0u128;
            for (i, _) in support.iter().enumerate().filter(|(_, &s)| s) {
                k |= 1 << i;
            }
            Key::Small(k)
        } else {
            let mut k = vec![0u64; support.len().div_ceil(64)];
            for (i, _) in support.iter().enumerate().filter(|(_, &s)| s) {
                k[i / 64] |= 1 << (i % 64);
            }
            Key::Large(k)
        }
    }
}

impl Clone for Lattice {
    fn clone(&self) -> Self {
        Self {
            matrix: self.matrix.clone(),
            neighbors: self.neighbors.clone(),
            cache: RwLock::new(HashMap::new()),
            full: OnceLock::new(),
        }
    }
}

struct Raw<R> {
    support: Vec<bool>,
    n_num: Vec<R>,
    den: R,
    pe_num: Vec<R>,
    rounds: usize,
}

macro_rules! ck {
    ($e:expr) => {
        match $e {
            Some(v) => v,
            None => return Ok(None),
        }
    };
}

impl Lattice {
    pub fn new(matrix: SymMatrix) -> Result<Self> {
        if let Definiteness::Violated { minor } = negative_definiteness(&matrix) {
            return Err(Error::NotNegativeDefinite { witness: minor });
        }
        let n = matrix.order();
        let neighbors = (0..n).map(|i| (0..n).filter(|&j| j != i && matrix.get(i, j) != 0).collect()).collect();
        Ok(Self { matrix, neighbors, cache: RwLock::new(HashMap::new()), full: OnceLock::new() })
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    fn inverse(&self, support: &[bool]) -> Arc<Cached> {
        let key = Key::of(support);
        if let Some(c) = self.cache.read().unwrap().get(&key) {
            return c.clone();
        }
        let idx: Vec<usize> = (0..support.len()).filter(|&i| support[i]).collect();
        let c = Arc::new(Cached::new(&self.matrix, idx));
        self.cache.write().unwrap().entry(key).or_insert(c).clone()
    }

    fn full(&self) -> Arc<Cached> {
        self.full.get_or_init(|| self.inverse(&vec![true; self.order()])).clone()
    }

    fn common_denominator(l: &[Rat]) -> (Vec<BigInt>, BigInt) {
        let den = l.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let num = l.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        (num, den)
    }

    /// Support growth from `support`. Any start gives the decomposition when
    /// it ends with a certificate; a start that is too large can instead end
    /// with a negative coefficient in `N`, reported as `CertificateFailure`.
    fn run<R: Exact>(&self, l: &[R], l_den: &R, growth: Growth, mut support: Vec<bool>) -> Result<Option<Raw<R>>>
    where
        Cached: Pick<R>,
    {
        let n = self.order();
        let mut rounds = 0;
        loop {
            // N on the current support, over the common denominator `den`.
            let (n_num, den, scale) = if support.iter().any(|&s| s) {
                rounds += 1;
                let cached = self.inverse(&support);
                let inv: &SubInverse<R> = ck!(cached.pick(&self.matrix));
                let k = cached.idx.len();
                let mut n_num = vec![R::zero(); n];
                let flip = inv.det.signum() < 0;
                for (r, &i) in cached.idx.iter().enumerate() {
                    let mut acc = R::zero();
                    for (c, &j) in cached.idx.iter().enumerate() {
                        if l[j].signum() != 0 {
                            acc = ck!(acc.add(&ck!(inv.adj[r * k + c].mul(&l[j]))));
                        }
                    }
                    n_num[i] = if flip { ck!(R::zero().sub(&acc)) } else { acc };
                }
                let det = if flip { ck!(R::zero().sub(&inv.det)) } else { inv.det.clone() };
                (n_num, ck!(det.mul(l_den)), det)
            } else {
                (vec![R::zero(); n], l_den.clone(), R::from_i64(1))
            };
            // P·E_j = L·E_j - N·E_j
            let mut pe_num = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = ck!(l[j].mul(&scale));
                for &i in std::iter::once(&j).chain(&self.neighbors[j]) {
                    if n_num[i].signum() != 0 {
                        let mij = R::from_i64(self.matrix.get(j, i));
                        acc = ck!(acc.sub(&ck!(n_num[i].mul(&mij))));
                    }
                }
                pe_num.push(acc);
            }
            for j in 0..n {
                if support[j] && pe_num[j].signum() != 0 {
                    return Err(Error::CertificateFailure(format!("P·E_{j} is nonzero on the support of N")));
                }
            }
            let negative: Vec<usize> = (0..n).filter(|&j| pe_num[j].signum() < 0).collect();
            if negative.is_empty() {
                if n_num.iter().any(|x| x.signum() < 0) {
                    return Err(Error::CertificateFailure("N has a negative coefficient".into()));
                }
                return Ok(Some(Raw { support, n_num, den, pe_num, rounds }));
            }
            match growth {
                Growth::Naive => {
                    for j in negative {
                        support[j] = true;
                    }
                }
                Growth::Component => {
                    let allowed: Vec<bool> = (0..n).map(|j| !support[j] && pe_num[j].signum() <= 0).collect();
                    let mut seen = vec![false; n];
                    let mut queue: VecDeque<usize> = negative.into_iter().collect();
                    for &j in &queue {
                        seen[j] = true;
                    }
                    while let Some(j) = queue.pop_front() {
                        support[j] = true;
                        for &k in &self.neighbors[j] {
                            if allowed[k] && !seen[k] {
                                seen[k] = true;
                                queue.push_back(k);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Coefficients of `P` (over `p_den`) and `-P·P` as a fraction.
    fn finish<R: Exact>(&self, raw: &Raw<R>) -> Option<(Vec<R>, R, (R, R))>
    where
        Cached: Pick<R>,
    {
        let n = self.order();
        let cached = self.full();
        let inv: &SubInverse<R> = cached.pick(&self.matrix)?;
        let nonzero: Vec<usize> = (0..n).filter(|&c| raw.pe_num[c].signum() != 0).collect();
        let mut p_num = Vec::with_capacity(n);
        for r in 0..n {
            let mut acc = R::zero();
            for &c in &nonzero {
                acc = acc.add(&inv.adj[r * n + c].mul(&raw.pe_num[c])?)?;
            }
            p_num.push(acc);
        }
        let p_den = inv.det.mul(&raw.den)?;
        let mut dot = R::zero();
        for (a, b) in p_num.iter().zip(&raw.pe_num) {
            if b.signum() != 0 {
                dot = dot.add(&a.mul(b)?)?;
            }
        }
        let total_den = p_den.mul(&raw.den)?;
        Some((p_num, p_den, (R::zero().sub(&dot)?, total_den)))
    }

    fn decompose_in<R: Exact>(&self, l: &(Vec<BigInt>, BigInt), growth: Growth) -> Result<Option<Decomposition>>
    where
        Cached: Pick<R>,
    {
        let Some((l, den)) = convert::<R>(l) else {
            return Ok(None);
        };
        let Some(raw) = self.run::<R>(&l, &den, growth, vec![false; self.order()])? else {
            return Ok(None);
        };
        let Some((p_num, p_den, neg)) = self.finish(&raw) else {
            return Ok(None);
        };
        let den = raw.den.to_big();
        let q = |x: &R, d: &BigInt| Rat::new(x.to_big(), d.clone());
        let p_den = p_den.to_big();
        let neg_p_squared = R::ratio(&neg.0, &neg.1);
        if neg_p_squared.is_negative() {
            return Err(Error::CertificateFailure("-P·P is negative".into()));
        }
        Ok(Some(Decomposition {
            negative: raw.n_num.iter().map(|x| q(x, &den)).collect(),
            positive_dots: raw.pe_num.iter().map(|x| q(x, &den)).collect(),
            positive: p_num.iter().map(|x| q(x, &p_den)).collect(),
            support: raw.support,
            neg_p_squared,
            rounds: raw.rounds,
        }))
    }

    /// Zariski decomposition of the class with intersection vector `l`.
    pub fn decompose(&self, l: &[Rat], growth: Growth) -> Result<Decomposition> {
        assert_eq!(l.len(), self.order());
        let l = Self::common_denominator(l);
        if let Some(d) = self.decompose_in::<i128>(&l, growth)? {
            return Ok(d);
        }
        Ok(self.decompose_in::<BigInt>(&l, growth)?.expect("BigInt path never overflows"))
    }

    /// `-P·P` only; skips materializing the decomposition.
    pub fn neg_p_squared(&self, l: &[Rat]) -> Result<Rat> {
        assert_eq!(l.len(), self.order());
        let l = Self::common_denominator(l);
        if let Some(v) = self.neg_p_squared_in::<i128>(&l)? {
            return Ok(v);
        }
        Ok(self.neg_p_squared_in::<BigInt>(&l)?.expect("BigInt path never overflows"))
    }

    fn neg_p_squared_in<R: Exact>(&self, l: &(Vec<BigInt>, BigInt)) -> Result<Option<Rat>>
    where
        Cached: Pick<R>,
    {
        let Some((l, den)) = convert::<R>(l) else {
            return Ok(None);
        };
        self.neg_p_squared_native(&l, &den, None)
    }

    fn neg_p_squared_native<R: Exact>(&self, l: &[R], den: &R, hint: Option<&mut Vec<bool>>) -> Result<Option<Rat>>
    where
        Cached: Pick<R>,
    {
        Ok(self.neg_p_squared_fraction(l, den, hint)?.map(|(a, b)| R::ratio(&a, &b)))
    }

    /// `-P·P` as an unreduced fraction with positive denominator.
    fn neg_p_squared_fraction<R: Exact>(&self, l: &[R], den: &R, hint: Option<&mut Vec<bool>>) -> Result<Option<(R, R)>>
    where
        Cached: Pick<R>,
    {
        let n = self.order();
        let warm = match &hint {
            Some(h) if h.len() == n => match self.run::<R>(l, den, Growth::Component, h.to_vec()) {
                Ok(Some(raw)) => Some(raw),
                Ok(None) => return Ok(None),
                // the hint overshot the support; start over
                Err(_) => None,
            },
            _ => None,
        };
        let raw = match warm {
            Some(raw) => raw,
            None => match self.run::<R>(l, den, Growth::Component, vec![false; n])? {
                Some(raw) => raw,
                None => return Ok(None),
            },
        };
        if let Some(h) = hint {
            h.clone_from(&raw.support);
        }
        if raw.pe_num.iter().all(|x| x.signum() == 0) {
            return Ok(Some((R::zero(), R::from_i64(1))));
        }
        let Some((_, _, (num, den))) = self.finish(&raw) else {
            return Ok(None);
        };
        if num.signum() * den.signum() < 0 {
            return Err(Error::CertificateFailure("-P·P is negative".into()));
        }
        if den.signum() < 0 {
            let flip = |x: &R| R::zero().sub(x);
            return Ok(flip(&num).zip(flip(&den)));
        }
        Ok(Some((num, den)))
    }

    /// `-P·P` in machine integers, or `None` when an intermediate value
    /// leaves `i128`; see [`Lattice::neg_p_squared_hinted`].
    pub fn neg_p_squared_small(&self, num: &[i64], den: i64, hint: &mut Vec<bool>) -> Result<Option<Ratio<i128>>> {
        assert_eq!(num.len(), self.order());
        assert!(den > 0);
        let l: Vec<i128> = num.iter().map(|&x| x as i128).collect();
        Ok(self.neg_p_squared_fraction::<i128>(&l, &(den as i128), Some(hint))?.map(|(a, b)| Ratio::new(a, b)))
    }

    /// `-P·P` for `L·E_j = num_j / den` with small integer data, skipping
    /// the rational front end. `den > 0`.
    pub fn neg_p_squared_scaled(&self, num: &[i64], den: i64) -> Result<Rat> {
        self.neg_p_squared_hinted(num, den, &mut Vec::new())
    }

    /// As [`Lattice::neg_p_squared_scaled`], starting the support search from
    /// `hint` (typically the support found for a nearby divisor) and leaving
    /// the final support there. The answer does not depend on the hint.
    pub fn neg_p_squared_hinted(&self, num: &[i64], den: i64, hint: &mut Vec<bool>) -> Result<Rat> {
        assert_eq!(num.len(), self.order());
        assert!(den > 0);
        let l: Vec<i128> = num.iter().map(|&x| x as i128).collect();
        if let Some(v) = self.neg_p_squared_native::<i128>(&l, &(den as i128), Some(&mut *hint))? {
            return Ok(v);
        }
        let l: Vec<BigInt> = num.iter().map(|&x| BigInt::from(x)).collect();
        Ok(self
            .neg_p_squared_native::<BigInt>(&l, &BigInt::from(den), Some(hint))?
            .expect("BigInt path never overflows"))
    }

    /// The unique divisor `D` with `D·E_j = rhs_j`.
    pub fn class_of(&self, rhs: &[Rat]) -> Vec<Rat> {
        assert_eq!(rhs.len(), self.order());
        let (num, den) = Self::common_denominator(rhs);
        let cached = self.full();
        let inv = cached.big(&self.matrix);
        let n = self.order();
        let d = &inv.det * &den;
        (0..n)
            .map(|r| {
                let acc: BigInt = (0..n).map(|c| &inv.adj[r * n + c] * &num[c]).sum();
                Rat::new(acc, d.clone())
            })
            .collect()
    }
}
