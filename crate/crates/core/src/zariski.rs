//! Zariski decomposition `L = P + N` of exceptional classes given by their
//! intersection vectors `L·E_j`.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{DecoratedGraph, QDivisor};
use crate::lattice::{Decomposition, Growth, Lattice};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZariskiPair {
    /// Coefficients of the nef part.
    pub positive: QDivisor,
    /// `P·E_j`.
    pub positive_dots: Vec<Rat>,
    /// Coefficients of the effective part.
    pub negative: QDivisor,
    /// Indices of `Supp N`.
    pub support: Vec<usize>,
    /// `-P·P`.
    pub neg_p_squared: Rat,
}

impl ZariskiPair {
    /// Re-checks the defining conditions in plain rational arithmetic.
    pub fn check(&self, lat: &Lattice, l: &[Rat]) -> Result<()> {
        let m = lat.matrix();
        let n_dots = m.mul_vec(&self.negative);
        let p_dots = m.mul_vec(&self.positive);
        for j in 0..lat.order() {
            if self.negative[j].is_negative() {
                return Err(Error::CertificateFailure(format!("N has coefficient {} < 0", self.negative[j])));
            }
            if self.positive_dots[j].is_negative() {
                return Err(Error::CertificateFailure(format!("P·E_{j} < 0")));
            }
            if !self.support.contains(&j) && !self.negative[j].is_zero() {
                return Err(Error::CertificateFailure("N is nonzero off its support".into()));
            }
            if self.support.contains(&j) && !self.positive_dots[j].is_zero() {
                return Err(Error::CertificateFailure(format!("P·E_{j} nonzero on Supp N")));
            }
            if p_dots[j] != self.positive_dots[j] || &p_dots[j] + &n_dots[j] != l[j] {
                return Err(Error::CertificateFailure("P + N does not reproduce L".into()));
            }
        }
        let pp: Rat = self.positive.iter().zip(&self.positive_dots).map(|(a, b)| a * b).sum();
        if -pp != self.neg_p_squared {
            return Err(Error::CertificateFailure("-P·P mismatch".into()));
        }
        Ok(())
    }
}

impl From<Decomposition> for ZariskiPair {
    fn from(d: Decomposition) -> Self {
        ZariskiPair {
            positive: d.positive,
            positive_dots: d.positive_dots,
            negative: d.negative,
            support: (0..d.support.len()).filter(|&j| d.support[j]).collect(),
            neg_p_squared: d.neg_p_squared,
        }
    }
}

/// Decomposes on an already validated lattice and re-checks the result.
pub fn decompose_on(lat: &Lattice, l: &[Rat], growth: Growth) -> Result<ZariskiPair> {
    let z = ZariskiPair::from(lat.decompose(l, growth)?);
    z.check(lat, l)?;
    Ok(z)
}

pub fn zariski_decompose(g: &DecoratedGraph, l: &[Rat], growth: Growth) -> Result<ZariskiPair> {
    decompose_on(&g.lattice()?, l, growth)
}

/// `-P·P` for the class with intersection vector `l`.
pub fn neg_p_squared(g: &DecoratedGraph, l: &[Rat]) -> Result<Rat> {
    g.lattice()?.neg_p_squared(l)
}
