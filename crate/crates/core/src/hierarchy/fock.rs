//! Truncated pseudo-Fock space over `K` modes.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Every `n_k <= cap_k`.
    #[default]
    Hypercube,
    /// Additionally `sum_k n_k <= L`.
    Triangular(usize),
}

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace {
    caps: Vec<usize>,
    truncation: Truncation,
    /// Occupations, `K` entries per state, in lexicographic order.
    occupations: Vec<u16>,
    /// Dense map from the mixed-radix hypercube index to the state offset.
    lookup: Vec<u32>,
}

impl FockSpace {
    pub fn new(caps: Vec<usize>, truncation: Truncation) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::InvalidParameter("pseudo-Fock space needs at least one mode".into()));
        }
        if caps.iter().any(|&c| c > u16::MAX as usize - 1) {
            return Err(Error::InvalidParameter("occupation cap too large".into()));
        }
        let cube = caps
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c + 1))
            .filter(|&n| n <= 1 << 28)
            .ok_or_else(|| Error::InvalidParameter("pseudo-Fock hypercube too large".into()))?;
        let k = caps.len();
        let mut occupations = Vec::new();
        let mut lookup = vec![ABSENT; cube];
        let mut n = vec![0usize; k];
        let mut count = 0u32;
        for slot in lookup.iter_mut() {
            let keep = match truncation {
                Truncation::Hypercube => true,
                Truncation::Triangular(l) => n.iter().sum::<usize>() <= l,
            };
            if keep {
                *slot = count;
                count += 1;
                occupations.extend(n.iter().map(|&x| x as u16));
            }
            // increment, last mode fastest
            for m in (0..k).rev() {
                n[m] += 1;
                if n[m] <= caps[m] {
                    break;
                }
                n[m] = 0;
            }
        }
        Ok(Self {
            caps,
            truncation,
            occupations,
            lookup,
        })
    }

    /// Same cap on every mode.
    pub fn uniform(modes: usize, cap: usize, truncation: Truncation) -> Result<Self> {
        Self::new(vec![cap; modes], truncation)
    }

    pub fn modes(&self) -> usize {
        self.caps.len()
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.caps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn occupation(&self, offset: usize) -> &[u16] {
        let k = self.modes();
        &self.occupations[offset * k..(offset + 1) * k]
    }

    pub fn offset(&self, n: &[usize]) -> Option<usize> {
        if n.len() != self.modes() || n.iter().zip(&self.caps).any(|(&x, &c)| x > c) {
            return None;
        }
        let idx = n
            .iter()
            .zip(&self.caps)
            .fold(0usize, |acc, (&x, &c)| acc * (c + 1) + x);
        match self.lookup[idx] {
            ABSENT => None,
            o => Some(o as usize),
        }
    }

    /// Offset of `n + delta e_k`, if retained.
    pub fn shifted(&self, offset: usize, k: usize, delta: isize) -> Option<usize> {
        self.shifted2(offset, &[(k, delta)])
    }

    /// Offset after applying several single-mode shifts in order.
    pub fn shifted2(&self, offset: usize, shifts: &[(usize, isize)]) -> Option<usize> {
        let mut n: Vec<usize> = self.occupation(offset).iter().map(|&x| x as usize).collect();
        for &(k, d) in shifts {
            n[k] = n[k].checked_add_signed(d)?;
        }
        self.offset(&n)
    }
}

/// Sparse `(row, col, value)` entries of `b_k^dagger` on the truncated space;
/// images outside the space are dropped.
pub fn creation(space: &FockSpace, k: usize) -> Vec<(usize, usize, f64)> {
    (0..space.len())
        .filter_map(|i| {
            let j = space.shifted(i, k, 1)?;
            Some((j, i, (space.occupation(i)[k] as f64 + 1.0).sqrt()))
        })
        .collect()
}

/// Sparse entries of `b_k`.
pub fn annihilation(space: &FockSpace, k: usize) -> Vec<(usize, usize, f64)> {
    (0..space.len())
        .filter_map(|i| {
            let j = space.shifted(i, k, -1)?;
            Some((j, i, (space.occupation(i)[k] as f64).sqrt()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sizes() {
        assert_eq!(FockSpace::new(vec![3, 3], Truncation::Hypercube).unwrap().len(), 16);
        assert_eq!(FockSpace::new(vec![2, 4, 1], Truncation::Hypercube).unwrap().len(), 30);
        assert_eq!(FockSpace::uniform(2, 27, Truncation::Hypercube).unwrap().len(), 784);
        // C(L + K, K)
        assert_eq!(FockSpace::uniform(6, 3, Truncation::Triangular(3)).unwrap().len(), 84);
        assert_eq!(FockSpace::uniform(2, 27, Truncation::Triangular(27)).unwrap().len(), 406);
    }

    #[test]
    fn vacuum_is_first() {
        let s = FockSpace::uniform(3, 2, Truncation::Triangular(2)).unwrap();
        assert_eq!(s.occupation(0), &[0, 0, 0]);
        assert_eq!(s.offset(&[0, 0, 0]), Some(0));
        assert_eq!(s.offset(&[1, 1, 1]), None);
        assert_eq!(s.offset(&[3, 0, 0]), None);
    }

    #[test]
    fn ladder_on_vacuum() {
        let s = FockSpace::uniform(1, 3, Truncation::Hypercube).unwrap();
        assert!(creation(&s, 0).contains(&(1, 0, 1.0)));
        assert!(annihilation(&s, 0).contains(&(0, 1, 1.0)));
        // terminator: no image above the cap
        assert!(creation(&s, 0).iter().all(|&(_, col, _)| col != 3));
    }

    proptest! {
        #[test]
        fn index_map_round_trips(caps in proptest::collection::vec(0usize..5, 1..4), tri in proptest::option::of(0usize..8)) {
            let t = tri.map_or(Truncation::Hypercube, Truncation::Triangular);
            let s = FockSpace::new(caps.clone(), t).unwrap();
            for i in 0..s.len() {
                let n: Vec<usize> = s.occupation(i).iter().map(|&x| x as usize).collect();
                prop_assert_eq!(s.offset(&n), Some(i));
                if let Some(l) = tri { prop_assert!(n.iter().sum::<usize>() <= l); }
            }
            let cube: usize = caps.iter().map(|c| c + 1).product();
            if tri.is_none() { prop_assert_eq!(s.len(), cube); }
        }
    }
}
