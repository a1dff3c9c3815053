//! Exact references: two-level Rabi formulas and exact diagonalization of a
//! system coupled to one explicit harmonic mode.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::bath::DiscreteMode;
use crate::models::SystemModel;
use crate::{Error, Result, C64};

/// Largest allowed Boltzmann weight `exp(-beta w N_b)` of the first level
/// beyond the boson cutoff.
pub const BOSON_TAIL: f64 = 1e-8;

/// Population of level 0 for a closed two-level system started in level 0:
/// `1 - (|H01|^2 / W^2) sin^2(W t)`, `W^2 = |H01|^2 + ((H00 - H11) / 2)^2`.
pub fn rabi(model: &SystemModel, t: f64) -> Result<f64> {
    if model.dim() != 2 {
        return Err(Error::Dimension(format!(
            "Rabi formula needs a two-level system, got dimension {}",
            model.dim()
        )));
    }
    let h = &model.hamiltonian;
    let off = h[(0, 1)].norm_sqr();
    let half_gap = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let w2 = off + half_gap * half_gap;
    if w2 == 0.0 {
        return Ok(1.0);
    }
    let s = (w2.sqrt() * t).sin();
    Ok(1.0 - off / w2 * s * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdConfig {
    pub model: SystemModel,
    pub mode: DiscreteMode,
    pub beta: f64,
    /// Number of retained boson levels.
    pub n_boson: usize,
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdResult {
    pub times: Vec<f64>,
    /// Reduced-state populations per time.
    pub populations: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
}

/// Smallest cutoff whose thermal tail is below [`BOSON_TAIL`].
pub fn suggested_boson_cutoff(beta: f64, frequency: f64) -> usize {
    ((-BOSON_TAIL.ln()) / (beta * frequency)).ceil().max(2.0) as usize
}

/// Unitary evolution of `|psi0><psi0| x exp(-beta w b+b)/Z` under
/// `H_S + w b+b + f c/sqrt(2w) (b + b+)` by one eigendecomposition.
pub fn exact_discrete(cfg: &EdConfig) -> Result<EdResult> {
    let nb = cfg.n_boson;
    let w = cfg.mode.frequency;
    let tail = (-cfg.beta * w * nb as f64).exp();
    if nb < 2 || tail > BOSON_TAIL {
        return Err(Error::BosonCutoff {
            n_boson: nb,
            tail,
            suggested: suggested_boson_cutoff(cfg.beta, w),
        });
    }
    if !(cfg.dt > 0.0 && cfg.t_final >= 0.0) {
        return Err(Error::InvalidParameter("dt must be positive and T non-negative".into()));
    }
    let ds = cfg.model.dim();
    let dim = ds * nb;
    let g = cfg.mode.coupling / (2.0 * w).sqrt();
    let hs = &cfg.model.hamiltonian;
    let f = &cfg.model.coupling;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for a in 0..ds {
        for b in 0..ds {
            for n in 0..nb {
                h[(a * nb + n, b * nb + n)] += hs[(a, b)];
                if n + 1 < nb {
                    let x = f[(a, b)] * g * ((n + 1) as f64).sqrt();
                    h[(a * nb + n + 1, b * nb + n)] += x;
                    h[(a * nb + n, b * nb + n + 1)] += x;
                }
            }
        }
        for n in 0..nb {
            h[(a * nb + n, a * nb + n)] += C64::from(w * n as f64);
        }
    }
    let eig = SymmetricEigen::new(h);
    let u = eig.eigenvectors;
    let e = eig.eigenvalues;

    let boltzmann: Vec<f64> = (0..nb).map(|n| (-cfg.beta * w * n as f64).exp()).collect();
    let z: f64 = boltzmann.iter().sum();
    let psi0 = &cfg.model.psi0;
    let rho0 = DMatrix::from_fn(dim, dim, |i, j| {
        let (a, n) = (i / nb, i % nb);
        let (b, m) = (j / nb, j % nb);
        if n == m {
            psi0[a] * psi0[b].conj() * boltzmann[n] / z
        } else {
            C64::from(0.0)
        }
    });
    let r = u.adjoint() * rho0 * &u;

    let steps = (cfg.t_final / cfg.dt).round() as usize;
    let mut out = EdResult {
        times: Vec::with_capacity(steps + 1),
        populations: Vec::with_capacity(steps + 1),
        trace: Vec::with_capacity(steps + 1),
    };
    let mut phase = vec![C64::from(0.0); dim];
    let mut rt = DMatrix::<C64>::zeros(dim, dim);
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        for (p, &ea) in phase.iter_mut().zip(e.iter()) {
            *p = C64::new(0.0, -ea * t).exp();
        }
        for a in 0..dim {
            for b in 0..dim {
                rt[(a, b)] = r[(a, b)] * phase[a] * phase[b].conj();
            }
        }
        // diagonal of U R(t) U+
        let ur = &u * &rt;
        let mut pops = vec![0.0; ds];
        for i in 0..dim {
            let d: C64 = (0..dim).map(|b| ur[(i, b)] * u[(i, b)].conj()).sum();
            pops[i / nb] += d.re;
        }
        out.times.push(t);
        out.trace.push(pops.iter().sum());
        out.populations.push(pops);
    }
    Ok(out)
}
