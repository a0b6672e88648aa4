use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{vectors_with_norm, LatticeVector};
use crate::spectrum::compositions;

/// Largest basis built unless a different cap is passed.
pub const DEFAULT_DIMENSION_CAP: usize = 500_000;

/// Ordered single-particle momenta of a truncated Fock space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet {
    modes: Vec<LatticeVector>,
    index: HashMap<LatticeVector, usize>,
}

impl ModeSet {
    pub fn new(modes: Vec<LatticeVector>) -> Result<Self> {
        let mut index = HashMap::with_capacity(modes.len());
        for (i, m) in modes.iter().enumerate() {
            if index.insert(*m, i).is_some() {
                return invalid(format!("duplicate mode {m}"));
            }
        }
        Ok(ModeSet { modes, index })
    }

    /// Every vector of the listed shell norms, optionally preceded by the
    /// zero mode; ascending norm, then lexicographic.
    pub fn from_shells(norms: &[u64], include_zero: bool) -> Result<Self> {
        let mut norms = norms.to_vec();
        norms.sort_unstable();
        norms.dedup();
        let mut modes = Vec::new();
        if include_zero {
            modes.push(LatticeVector::ZERO);
        }
        for k in norms {
            if k == 0 {
                return invalid("use include_zero for the zero mode");
            }
            let mut v = vectors_with_norm(k);
            if v.is_empty() {
                return invalid(format!("no lattice vector has |n|^2 = {k}"));
            }
            v.sort();
            modes.extend(v);
        }
        Self::new(modes)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[LatticeVector] {
        &self.modes
    }

    pub fn index_of(&self, v: &LatticeVector) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn zero_index(&self) -> Option<usize> {
        self.index_of(&LatticeVector::ZERO)
    }

    /// Closed under p ↦ −p.
    pub fn is_pairing_closed(&self) -> bool {
        self.modes.iter().all(|m| self.index.contains_key(&-*m))
    }

    /// The same set without the zero mode, order preserved.
    pub fn without_zero(&self) -> ModeSet {
        ModeSet::new(self.modes.iter().copied().filter(|m| !m.is_zero()).collect()).expect("subset of a valid set")
    }
}

/// Which occupation vectors a basis contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "sector", content = "n", rename_all = "snake_case")]
pub enum Sector {
    /// Exactly N particles, zero mode included.
    FixedTotal(u32),
    /// At most N excitations, no zero mode.
    ExcitationTruncated(u32),
    /// At most `cap` particles in every mode, no zero mode.
    PerModeCap(u32),
}

/// Occupation-number basis in lexicographic order.
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: ModeSet,
    sector: Sector,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.sector == other.sector && self.modes == other.modes
    }
}

/// Number of occupation vectors in a sector, without enumerating them.
pub fn sector_dimension(mode_count: usize, sector: Sector) -> Option<u128> {
    let m = mode_count as u64;
    match sector {
        Sector::FixedTotal(n) => compositions(n, m).ok(),
        Sector::ExcitationTruncated(n) => compositions(n, m + 1).ok(),
        Sector::PerModeCap(cap) => (u128::from(cap) + 1).checked_pow(mode_count as u32),
    }
}

impl FockBasis {
    pub fn build(modes: ModeSet, sector: Sector) -> Result<Self> {
        Self::build_with_cap(modes, sector, DEFAULT_DIMENSION_CAP)
    }

    pub fn build_with_cap(modes: ModeSet, sector: Sector, cap: usize) -> Result<Self> {
        match sector {
            Sector::FixedTotal(n) => {
                if n < 1 {
                    return invalid("N must be >= 1");
                }
                if modes.zero_index().is_none() {
                    return invalid("fixed_total sector needs the zero mode");
                }
            }
            Sector::ExcitationTruncated(n) => {
                if n < 1 {
                    return invalid("N must be >= 1");
                }
                if modes.zero_index().is_some() {
                    return invalid("excitation sectors exclude the zero mode");
                }
            }
            Sector::PerModeCap(_) => {
                if modes.zero_index().is_some() {
                    return invalid("excitation sectors exclude the zero mode");
                }
            }
        }
        let dim = sector_dimension(modes.len(), sector).unwrap_or(u128::MAX);
        if dim > cap as u128 {
            return Err(Error::Resource(format!("basis dimension {dim} exceeds cap {cap}")));
        }
        let mut states = Vec::with_capacity(dim as usize);
        let mut cur = vec![0u32; modes.len()];
        fill(&mut states, &mut cur, 0, sector);
        debug_assert_eq!(states.len() as u128, dim);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(FockBasis { modes, sector, states, index })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// N₊ of a state: particles outside the zero mode.
    pub fn excitation_count(&self, occupation: &[u32]) -> u32 {
        let z = self.modes.zero_index();
        occupation.iter().enumerate().filter(|(i, _)| Some(*i) != z).map(|(_, n)| n).sum()
    }

    /// N for sectors that carry one.
    pub fn particle_number(&self) -> Option<u32> {
        match self.sector {
            Sector::FixedTotal(n) | Sector::ExcitationTruncated(n) => Some(n),
            Sector::PerModeCap(_) => None,
        }
    }

    /// Short human-readable description.
    pub fn descriptor(&self) -> String {
        let sector = match self.sector {
            Sector::FixedTotal(n) => format!("fixed_total(N={n})"),
            Sector::ExcitationTruncated(n) => format!("excitation_truncated(N={n})"),
            Sector::PerModeCap(c) => format!("per_mode_cap({c})"),
        };
        let modes: Vec<String> = self.modes.modes().iter().map(|m| m.to_string()).collect();
        format!("{sector}; modes [{}]; dim {}", modes.join(" "), self.dim())
    }
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, i: usize, sector: Sector) {
    let used: u32 = cur[..i].iter().sum();
    if i == cur.len() {
        if let Sector::FixedTotal(n) = sector {
            if used != n {
                return;
            }
        }
        out.push(cur.clone());
        return;
    }
    let (lo, hi) = match sector {
        Sector::FixedTotal(n) if i + 1 == cur.len() => (n - used, n - used),
        Sector::FixedTotal(n) | Sector::ExcitationTruncated(n) => (0, n - used),
        Sector::PerModeCap(c) => (0, c),
    };
    for v in lo..=hi {
        cur[i] = v;
        fill(out, cur, i + 1, sector);
    }
    cur[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let one = ModeSet::new(vec![LatticeVector::new(1, 0, 0)]).unwrap();
        assert_eq!(FockBasis::build(one, Sector::ExcitationTruncated(2)).unwrap().dim(), 3);
        let three =
            ModeSet::new(vec![LatticeVector::ZERO, LatticeVector::new(1, 0, 0), LatticeVector::new(-1, 0, 0)]).unwrap();
        assert_eq!(FockBasis::build(three, Sector::FixedTotal(2)).unwrap().dim(), 6);
        let empty = ModeSet::new(vec![]).unwrap();
        assert_eq!(FockBasis::build(empty, Sector::ExcitationTruncated(5)).unwrap().dim(), 1);
    }

    #[test]
    fn lexicographic_and_complete() {
        let m = ModeSet::from_shells(&[1], false).unwrap();
        let b = FockBasis::build(m, Sector::ExcitationTruncated(3)).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.dim() as u128, sector_dimension(6, Sector::ExcitationTruncated(3)).unwrap());
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn sector_preconditions() {
        let with_zero = ModeSet::from_shells(&[1], true).unwrap();
        let without = ModeSet::from_shells(&[1], false).unwrap();
        assert!(FockBasis::build(without.clone(), Sector::FixedTotal(2)).is_err());
        assert!(FockBasis::build(with_zero.clone(), Sector::ExcitationTruncated(2)).is_err());
        assert!(matches!(
            FockBasis::build_with_cap(without, Sector::ExcitationTruncated(10), 100),
            Err(Error::Resource(_))
        ));
        assert!(ModeSet::new(vec![LatticeVector::ZERO, LatticeVector::ZERO]).is_err());
        assert!(with_zero.is_pairing_closed());
        assert!(!ModeSet::new(vec![LatticeVector::new(1, 0, 0)]).unwrap().is_pairing_closed());
    }
}
