//! Invariants of a pair `(X, Σ c_i C_i)`: discrepancies, log canonicity,
//! `-P_C·P_C`, the opposite pair, volume and log canonical threshold.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{DecoratedGraph, PairSpec, QDivisor, Weight};
use crate::lattice::Lattice;
use crate::rat::{rat, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Classification {
    NotLogCanonical,
    LogCanonical,
    LogTerminal,
}

impl Classification {
    pub fn is_log_canonical(self) -> bool {
        self != Classification::NotLogCanonical
    }

    pub fn label(self) -> &'static str {
        match self {
            Classification::LogTerminal => "log-terminal",
            Classification::LogCanonical => "log-canonical",
            Classification::NotLogCanonical => "not-log-canonical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairReport {
    pub discrepancies: QDivisor,
    pub classification: Classification,
    pub pcp: Rat,
    /// `None` when some coefficient is 0.
    pub volume: Option<Rat>,
    /// `None` when the underlying singularity is not log terminal.
    pub lct: Option<Rat>,
}

/// The `a_j` with `K + Σ c_i C̃_i ≡ Σ a_j E_j`.
pub fn discrepancies(p: &PairSpec) -> Result<QDivisor> {
    let k = p.canonical_vector();
    let c = p.arrow_vector(|a| a.weight.c());
    let rhs: Vec<Rat> = k.iter().zip(&c).map(|(x, y)| x + y).collect();
    p.class_of(&rhs)
}

fn classify_discrepancies(a: &[Rat]) -> Classification {
    let minus_one = -Rat::one();
    if a.iter().all(|x| *x > minus_one) {
        Classification::LogTerminal
    } else if a.iter().all(|x| *x >= minus_one) {
        Classification::LogCanonical
    } else {
        Classification::NotLogCanonical
    }
}

/// `-P·P` of `K + E + Σ c_i C̃_i` on a lattice built from `p`.
pub fn pcp_on(lat: &Lattice, p: &PairSpec) -> Result<Rat> {
    lat.neg_p_squared(&p.log_canonical_vector())
}

pub fn pcp(p: &PairSpec) -> Result<Rat> {
    pcp_on(&p.lattice()?, p)
}

/// Discrepancy thresholds, cross-checked against `P = 0`.
pub fn classify(p: &PairSpec) -> Result<Classification> {
    let lat = p.lattice()?;
    let class = classify_discrepancies(&discrepancies(p)?);
    let vanishes = pcp_on(&lat, p)?.is_zero();
    if class.is_log_canonical() != vanishes {
        return Err(Error::ClassificationMismatch(format!(
            "discrepancies say {} but -P·P {} 0",
            class.label(),
            if vanishes { "=" } else { ">" }
        )));
    }
    Ok(class)
}

/// Coefficients `1 - c_i`.
pub fn opposite(p: &PairSpec) -> Result<PairSpec> {
    if let Some(a) = p.arrows.iter().find(|a| a.weight.c().is_zero()) {
        return Err(Error::ZeroCoefficient(a.id.clone()));
    }
    Ok(p.with_weights(|a| Weight::Coeff(Rat::one() - a.weight.c())))
}

pub fn drop_zero_arrows(p: &PairSpec) -> PairSpec {
    let mut q = p.clone();
    q.arrows.retain(|a| !a.weight.c().is_zero());
    q
}

/// `Vol(X, C) = -P_C̄·P_C̄`.
pub fn volume(p: &PairSpec) -> Result<Rat> {
    pcp(&opposite(p)?)
}

pub fn volume_on(lat: &Lattice, p: &PairSpec) -> Result<Rat> {
    pcp_on(lat, &opposite(p)?)
}

fn with_scaled_curve(g: &DecoratedGraph, eps: &Rat) -> DecoratedGraph {
    g.with_weights(|a| if a.weight.c().is_zero() { Weight::Coeff(Rat::zero()) } else { Weight::Coeff(eps.clone()) })
}

/// Largest `ε ≤ 1` with `(X, ε C)` log canonical, `C` the reduced sum of
/// the arrows with nonzero coefficient.
pub fn lct(p: &PairSpec) -> Result<Rat> {
    let g = match p.normalize_minimal_orbifold() {
        Ok(g) => g,
        Err(Error::ExceptionalCase) => p.clone(),
        Err(e) => return Err(e),
    };
    let lat = g.lattice()?;
    let base = discrepancies(&g.without_arrows())?;
    if classify_discrepancies(&base) != Classification::LogTerminal {
        return Err(Error::NotLogTerminal);
    }
    let incidence = g.arrow_vector(|a| if a.weight.c().is_zero() { Rat::zero() } else { Rat::one() });
    if incidence.iter().all(Zero::is_zero) {
        return Ok(Rat::one());
    }
    let delta = lat.class_of(&incidence);
    let mut t = Rat::one();
    for (a, d) in base.iter().zip(&delta) {
        debug_assert!(d.is_negative());
        let bound = (-Rat::one() - a) / d;
        if bound < t {
            t = bound;
        }
    }
    if !pcp_on(&lat, &with_scaled_curve(&g, &t))?.is_zero() {
        return Err(Error::CertificateFailure(format!("-P·P > 0 at the threshold {t}")));
    }
    if t < Rat::one() {
        let probe = std::cmp::min(&t + rat(1, 1000), Rat::one());
        if pcp_on(&lat, &with_scaled_curve(&g, &probe))?.is_zero() {
            return Err(Error::CertificateFailure(format!("-P·P = 0 beyond the threshold {t}")));
        }
    }
    Ok(t)
}

pub fn report(p: &PairSpec) -> Result<PairReport> {
    let discrepancies = discrepancies(p)?;
    let classification = classify(p)?;
    let pcp = pcp(p)?;
    let volume = match volume(p) {
        Ok(v) => Some(v),
        Err(Error::ZeroCoefficient(_)) => None,
        Err(e) => return Err(e),
    };
    let lct = match lct(p) {
        Ok(v) => Some(v),
        Err(Error::NotLogTerminal) => None,
        Err(e) => return Err(e),
    };
    Ok(PairReport { discrepancies, classification, pcp, volume, lct })
}

/// `K + E + Σ c_i C̃_i` pairs to `2g - 2 + valence + Σ c` with `E_j`; exposed
/// for callers that build intersection vectors by hand.
pub fn boundary_vector(p: &PairSpec) -> Vec<Rat> {
    p.log_canonical_vector()
}
