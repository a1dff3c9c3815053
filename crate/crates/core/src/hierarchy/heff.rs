//! Application of `-i H_eff` to a hierarchy state.
//!
//! The state is stored aux-major: amplitude `(n, a)` lives at
//! `offset(n) * d + a`.

use nalgebra::DMatrix;

use super::fock::FockSpace;
use crate::basis::BasisSet;
use crate::models::SystemModel;
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// Auxiliaries normalized by `(prod n_k!)^{-1/2}`.
    #[default]
    ExtendedRescaled,
    /// Plain auxiliaries with `n_k` factors.
    ExtendedUnscaled,
    /// Exponential basis only, auxiliaries further scaled by `prod d_k^{-n_k/2}`
    /// so both ladder terms carry `sqrt(d_k)`.
    ExponentialRescaledD,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    col: u32,
    coef: C64,
}

#[derive(Debug, Clone, Default)]
struct Csr {
    ptr: Vec<u32>,
    entries: Vec<Entry>,
}

impl Csr {
    fn push_row(&mut self, row: impl IntoIterator<Item = (usize, C64)>) {
        if self.ptr.is_empty() {
            self.ptr.push(0);
        }
        self.entries.extend(
            row.into_iter()
                .filter(|(_, c)| *c != C64::new(0.0, 0.0))
                .map(|(col, coef)| Entry {
                    col: col as u32,
                    coef,
                }),
        );
        self.ptr.push(self.entries.len() as u32);
    }

    fn row(&self, i: usize) -> &[Entry] {
        &self.entries[self.ptr[i] as usize..self.ptr[i + 1] as usize]
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    dim: usize,
    aux: usize,
    /// `H_S` row-major.
    system: Vec<C64>,
    /// `f` row-major.
    coupling: Vec<C64>,
    /// Terms acting through `f`: up and down ladder neighbours.
    ladder: Csr,
    /// Scalar terms from `eta b+ b`.
    mixing: Csr,
    formulation: Formulation,
}

fn row_major(m: &DMatrix<C64>) -> Vec<C64> {
    m.transpose().iter().copied().collect()
}

impl EffectiveHamiltonian {
    pub fn new(
        model: &SystemModel,
        basis: &BasisSet,
        space: &FockSpace,
        formulation: Formulation,
    ) -> Result<Self> {
        let k = basis.len();
        if space.modes() != k {
            return Err(Error::Dimension(format!(
                "{} pseudo-Fock modes for {k} basis functions",
                space.modes()
            )));
        }
        if formulation == Formulation::ExponentialRescaledD && !basis.is_eta_diagonal() {
            return Err(Error::NonDiagonalEta);
        }
        let eta = basis.eta();
        let phi0 = basis.phi0();
        let d = basis.d();
        let root: Vec<C64> = (0..k).map(|m| d[m].sqrt() * phi0[m].sqrt()).collect();

        let mut ladder = Csr::default();
        let mut mixing = Csr::default();
        for i in 0..space.len() {
            let n: Vec<f64> = space.occupation(i).iter().map(|&x| x as f64).collect();
            let mut row = Vec::new();
            for m in 0..k {
                if let Some(j) = space.shifted(i, m, 1) {
                    let c = match formulation {
                        Formulation::ExtendedRescaled => d[m] * (n[m] + 1.0).sqrt(),
                        Formulation::ExtendedUnscaled => d[m],
                        Formulation::ExponentialRescaledD => root[m] * (n[m] + 1.0).sqrt(),
                    };
                    row.push((j, c));
                }
                if let Some(j) = space.shifted(i, m, -1) {
                    let c = match formulation {
                        Formulation::ExtendedRescaled => -phi0[m] * n[m].sqrt(),
                        Formulation::ExtendedUnscaled => -phi0[m] * n[m],
                        Formulation::ExponentialRescaledD => -root[m] * n[m].sqrt(),
                    };
                    row.push((j, c));
                }
            }
            ladder.push_row(row);

            let mut row = Vec::new();
            let diag: C64 = (0..k).map(|m| eta[(m, m)] * n[m]).sum();
            row.push((i, diag));
            for a in 0..k {
                for b in 0..k {
                    if a == b || n[a] == 0.0 || eta[(a, b)] == C64::new(0.0, 0.0) {
                        continue;
                    }
                    if let Some(j) = space.shifted2(i, &[(a, -1), (b, 1)]) {
                        let c = match formulation {
                            Formulation::ExtendedUnscaled => eta[(a, b)] * n[a],
                            _ => eta[(a, b)] * (n[a] * (n[b] + 1.0)).sqrt(),
                        };
                        row.push((j, c));
                    }
                }
            }
            mixing.push_row(row);
        }
        Ok(Self {
            dim: model.dim(),
            aux: space.len(),
            system: row_major(&model.hamiltonian),
            coupling: row_major(&model.coupling),
            ladder,
            mixing,
            formulation,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.dim
    }

    pub fn aux_count(&self) -> usize {
        self.aux
    }

    /// Total number of complex amplitudes.
    pub fn len(&self) -> usize {
        self.dim * self.aux
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    /// `out = -i H_eff psi` with noise value `z`.
    pub fn apply(&self, psi: &[C64], z: C64, out: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(psi.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        if d == 2 {
            return self.apply_two_level(psi, z, out);
        }
        let mut acc = [C64::new(0.0, 0.0); 8];
        let mut acc_heap;
        let acc: &mut [C64] = if d <= 8 {
            &mut acc[..d]
        } else {
            acc_heap = vec![C64::new(0.0, 0.0); d];
            &mut acc_heap
        };
        let minus_iz = -I * z;
        for i in 0..self.aux {
            let own = &psi[i * d..(i + 1) * d];
            for a in 0..d {
                acc[a] = minus_iz * own[a];
            }
            for e in self.ladder.row(i) {
                let src = &psi[e.col as usize * d..(e.col as usize + 1) * d];
                for a in 0..d {
                    acc[a] += e.coef * src[a];
                }
            }
            let dst = &mut out[i * d..(i + 1) * d];
            for a in 0..d {
                let mut v = C64::new(0.0, 0.0);
                for b in 0..d {
                    v += self.coupling[a * d + b] * acc[b] - I * self.system[a * d + b] * own[b];
                }
                dst[a] = v;
            }
            for e in self.mixing.row(i) {
                let src = &psi[e.col as usize * d..(e.col as usize + 1) * d];
                for a in 0..d {
                    dst[a] += e.coef * src[a];
                }
            }
        }
    }

    fn apply_two_level(&self, psi: &[C64], z: C64, out: &mut [C64]) {
        let psi: &[[C64; 2]] = as_pairs(psi);
        let out: &mut [[C64; 2]] = as_pairs_mut(out);
        let minus_iz = -I * z;
        let f = [self.coupling[0], self.coupling[1], self.coupling[2], self.coupling[3]];
        let h = [
            -I * self.system[0],
            -I * self.system[1],
            -I * self.system[2],
            -I * self.system[3],
        ];
        let (lp, le) = (&self.ladder.ptr, &self.ladder.entries);
        let (mp, me) = (&self.mixing.ptr, &self.mixing.entries);
        for i in 0..self.aux {
            let own = psi[i];
            let mut acc = [minus_iz * own[0], minus_iz * own[1]];
            for e in &le[lp[i] as usize..lp[i + 1] as usize] {
                let src = psi[e.col as usize];
                acc[0] += e.coef * src[0];
                acc[1] += e.coef * src[1];
            }
            let mut v = [
                f[0] * acc[0] + f[1] * acc[1] + h[0] * own[0] + h[1] * own[1],
                f[2] * acc[0] + f[3] * acc[1] + h[2] * own[0] + h[3] * own[1],
            ];
            for e in &me[mp[i] as usize..mp[i + 1] as usize] {
                let src = psi[e.col as usize];
                v[0] += e.coef * src[0];
                v[1] += e.coef * src[1];
            }
            out[i] = v;
        }
    }
}

fn as_pairs(x: &[C64]) -> &[[C64; 2]] {
    let (pairs, rest) = x.as_chunks::<2>();
    debug_assert!(rest.is_empty());
    pairs
}

fn as_pairs_mut(x: &mut [C64]) -> &mut [[C64; 2]] {
    let (pairs, rest) = x.as_chunks_mut::<2>();
    debug_assert!(rest.is_empty());
    pairs
}

#[cfg(test)]
mod tests {
    use super::super::fock::{annihilation, creation, Truncation};
    use super::*;
    use crate::basis::BasisFamily;
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exponential_diagonal_term() {
        let nu = c(0.5, 1.0);
        let basis = BasisSet::exponential(vec![nu], vec![c(0.3, 0.0)]).unwrap();
        let space = FockSpace::uniform(1, 5, Truncation::Hypercube).unwrap();
        let model = SystemModel::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        for f in [
            Formulation::ExtendedRescaled,
            Formulation::ExtendedUnscaled,
            Formulation::ExponentialRescaledD,
        ] {
            let h = EffectiveHamiltonian::new(&model, &basis, &space, f).unwrap();
            let mut psi = vec![c(0.0, 0.0); h.len()];
            psi[3 * 2] = c(0.7, -0.2);
            psi[3 * 2 + 1] = c(0.1, 0.4);
            let mut out = vec![c(0.0, 0.0); h.len()];
            h.apply(&psi, c(0.9, 0.1), &mut out);
            for (o, p) in out.iter().zip(&psi) {
                assert!((o - (-3.0 * nu * p)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sqrt_d_needs_diagonal_eta() {
        let basis = BasisSet::new(BasisFamily::PolyExp { rate: 1.0 }, vec![c(0.0, -0.1), c(0.0, 0.0)]).unwrap();
        let space = FockSpace::uniform(2, 2, Truncation::Hypercube).unwrap();
        let err = EffectiveHamiltonian::new(
            &SystemModel::spin_boson(0.0, 1.0),
            &basis,
            &space,
            Formulation::ExponentialRescaledD,
        )
        .unwrap_err();
        assert_eq!(err, Error::NonDiagonalEta);
    }

    fn random_c(rng: &mut ChaCha8Rng) -> C64 {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    /// Dense `-i H_eff` assembled from ladder matrices.
    fn dense_generator(model: &SystemModel, basis: &BasisSet, space: &FockSpace, z: C64) -> DMatrix<C64> {
        let d = model.dim();
        let n = space.len();
        let lift = |ops: &[(usize, usize, f64)]| {
            let mut m = DMatrix::<C64>::zeros(n, n);
            for &(r, col, v) in ops {
                m[(r, col)] += C64::from(v);
            }
            m
        };
        let k = basis.len();
        let cr: Vec<_> = (0..k).map(|m| lift(&creation(space, m))).collect();
        let an: Vec<_> = (0..k).map(|m| lift(&annihilation(space, m))).collect();
        let id_b = DMatrix::<C64>::identity(n, n);
        let id_s = DMatrix::<C64>::identity(d, d);
        let mut bath_f = DMatrix::<C64>::zeros(n, n);
        let mut bath_only = DMatrix::<C64>::zeros(n, n);
        for m in 0..k {
            bath_f += &cr[m] * (-I * basis.phi0()[m]) + &an[m] * (I * basis.d()[m]);
            for m2 in 0..k {
                bath_only += &cr[m] * &an[m2] * (I * basis.eta()[(m, m2)]);
            }
        }
        // aux-major layout: bath index outer, system inner
        let h = id_b.kronecker(&(&model.hamiltonian + &model.coupling * z))
            + bath_f.kronecker(&model.coupling)
            + bath_only.kronecker(&id_s);
        h * (-I)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn recursion_matches_ladder_operators(seed in 0u64..1_000_000, k in 1usize..=3, cap in 1usize..=4, tri in any::<bool>(), dim in 2usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rates: Vec<C64> = (0..k).map(|_| random_c(&mut rng)).collect();
            let d: Vec<C64> = (0..k).map(|_| random_c(&mut rng)).collect();
            let mut basis = BasisSet::exponential(rates, d).unwrap();
            for a in 0..k {
                for b in 0..k {
                    basis = basis.with_perturbed_eta(a, b, random_c(&mut rng)).unwrap();
                }
            }
            let phi0: Vec<C64> = (0..k).map(|_| random_c(&mut rng)).collect();
            basis.override_phi0(phi0);
            let truncation = if tri { Truncation::Triangular(cap) } else { Truncation::Hypercube };
            let space = FockSpace::uniform(k, cap, truncation).unwrap();
            let h = DMatrix::from_fn(dim, dim, |_, _| random_c(&mut rng));
            let f = DMatrix::from_fn(dim, dim, |_, _| random_c(&mut rng));
            let model = SystemModel::new(
                &h + h.adjoint(),
                &f + f.adjoint(),
                DVector::from_fn(dim, |i, _| c(if i == 0 { 1.0 } else { 0.0 }, 0.0)),
            ).unwrap();
            let z = random_c(&mut rng);
            let heff = EffectiveHamiltonian::new(&model, &basis, &space, Formulation::ExtendedRescaled).unwrap();
            let psi: Vec<C64> = (0..heff.len()).map(|_| random_c(&mut rng)).collect();
            let mut out = vec![c(0.0, 0.0); heff.len()];
            heff.apply(&psi, z, &mut out);
            let dense = dense_generator(&model, &basis, &space, z) * DVector::from_vec(psi);
            for (a, b) in out.iter().zip(dense.iter()) {
                prop_assert!((a - b).norm() < 1e-12, "{} vs {}", a, b);
            }
        }
    }
}
