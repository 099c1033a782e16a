//! Exact rationals and exact symmetric linear algebra over the vertex lattice.
//!
//! Everything here is `BigRational` based and allocation-heavy; the hot
//! paths go through [`crate::lattice::Lattice`] instead, which caches
//! fraction-free inverses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `p` or `p/q` (q > 0).
pub fn parse_rat(s: &str) -> Option<Rat> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, Some(q)),
        None => (s, None),
    };
    let num: BigInt = p.parse().ok()?;
    let den: BigInt = match q {
        Some(q) if !q.starts_with(['-', '+']) => q.parse().ok()?,
        Some(_) => return None,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return None;
    }
    Some(Rat::new(num, den))
}

/// Dense symmetric integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymMatrix {
    order: usize,
    entries: Vec<i64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self { order, entries: vec![0; order * order] }
    }

    /// Panics if `rows` is not square and symmetric.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let order = rows.len();
        let mut m = Self::zeros(order);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), order, "matrix is not square");
            for (j, &v) in row.iter().enumerate() {
                m.entries[i * order + j] = v;
            }
        }
        assert!(m.is_symmetric(), "matrix is not symmetric");
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.order + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.entries[i * self.order + j] = v;
        self.entries[j * self.order + i] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: i64) {
        let cur = self.get(i, j);
        if i == j {
            self.set(i, i, cur + v);
        } else {
            self.set(i, j, cur + v);
        }
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `M·x` for a rational vector.
    pub fn mul_vec(&self, x: &[Rat]) -> Vec<Rat> {
        (0..self.order)
            .map(|i| {
                let mut acc = Rat::zero();
                for (j, xj) in x.iter().enumerate() {
                    let m = self.get(i, j);
                    if m != 0 && !xj.is_zero() {
                        acc += xj * Rat::from_integer(BigInt::from(m));
                    }
                }
                acc
            })
            .collect()
    }

    /// The bilinear pairing `x·M·y`.
    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

fn to_rat_block(m: &SymMatrix, idx: &[usize]) -> Vec<Vec<Rat>> {
    idx.iter().map(|&i| idx.iter().map(|&j| int(m.get(i, j))).collect()).collect()
}

/// Solves `(M|S)·x = b` exactly, where `M|S` is the principal submatrix on `idx`.
pub fn solve_symmetric(m: &SymMatrix, idx: &[usize], b: &[Rat]) -> Result<Vec<Rat>> {
    assert_eq!(idx.len(), b.len());
    let k = idx.len();
    let mut a = to_rat_block(m, idx);
    for (row, bi) in a.iter_mut().zip(b) {
        row.push(bi.clone());
    }
    for col in 0..k {
        let p = (col..k).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        a.swap(col, p);
        let piv = a[col][col].clone();
        for r in col + 1..k {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &piv;
            for c in col..=k {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    let mut x = vec![Rat::zero(); k];
    for r in (0..k).rev() {
        let mut acc = a[r][k].clone();
        for c in r + 1..k {
            acc -= &a[r][c] * &x[c];
        }
        x[r] = acc / &a[r][r];
    }
    Ok(x)
}

/// Exact inverse of the principal submatrix on `idx` (Gauss–Jordan).
pub fn invert(m: &SymMatrix, idx: &[usize]) -> Result<Vec<Vec<Rat>>> {
    let k = idx.len();
    let mut a = to_rat_block(m, idx);
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..k).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
    }
    for col in 0..k {
        let p = (col..k).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        a.swap(col, p);
        let piv = a[col][col].clone();
        for c in 0..2 * k {
            a[col][c] /= &piv;
        }
        for r in 0..k {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * k {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    Ok(a.into_iter().map(|row| row[k..].to_vec()).collect())
}

/// Outcome of the exact negative-definiteness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    NegativeDefinite,
    /// 1-based index of the first leading principal minor with the wrong sign.
    Violated {
        minor: usize,
    },
}

impl Definiteness {
    pub fn holds(self) -> bool {
        matches!(self, Definiteness::NegativeDefinite)
    }
}

/// Symmetric elimination without pivoting: negative definite iff every pivot
/// `D_k / D_{k-1}` is negative.
pub fn negative_definiteness(m: &SymMatrix) -> Definiteness {
    let k = m.order();
    let mut a = to_rat_block(m, &(0..k).collect::<Vec<_>>());
    for col in 0..k {
        if !a[col][col].is_negative() {
            return Definiteness::Violated { minor: col + 1 };
        }
        let piv = a[col][col].clone();
        for r in col + 1..k {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &piv;
            for c in col..k {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    Definiteness::NegativeDefinite
}

pub fn is_negative_definite(m: &SymMatrix) -> bool {
    negative_definiteness(m).holds()
}

/// Exact determinant of the principal submatrix on `idx`.
pub fn determinant(m: &SymMatrix, idx: &[usize]) -> Rat {
    let k = idx.len();
    let mut a = to_rat_block(m, idx);
    let mut det = Rat::one();
    for col in 0..k {
        let Some(p) = (col..k).find(|&r| !a[r][col].is_zero()) else {
            return Rat::zero();
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        let piv = a[col][col].clone();
        det *= &piv;
        for r in col + 1..k {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &piv;
            for c in col..k {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}
