//! Pseudo-Fock hierarchy: state layout, propagation and ensemble reduction.
//!
//! `rho(t) = E[|psi+(t)><psi-(t)|]` where `psi+` is driven by `Z+` and `psi-`
//! by `Z-`, both read off the vacuum component of their hierarchy.

mod fock;
mod heff;

pub use fock::{annihilation, creation, FockSpace, Truncation};
pub use heff::{EffectiveHamiltonian, Formulation};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::BasisSet;
use crate::models::SystemModel;
use crate::noise::{trajectory_rng, FrequencyGrid, NoiseEvaluator, NoiseRealization, NoiseSeries};
use crate::{Error, Result, C64};

/// Fraction of aborted trajectories above which an ensemble fails.
pub const MAX_ABORT_FRACTION: f64 = 0.01;

pub const DEFAULT_DT: f64 = 0.01;

/// Fixed-step grid with outputs every `stride` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, t_final: f64, stride: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(t_final >= 0.0) || stride == 0 {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0, T >= 0 and stride >= 1 (dt = {dt}, T = {t_final}, stride = {stride})"
            )));
        }
        let ratio = t_final / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "T = {t_final} is not an integer multiple of dt = {dt}"
            )));
        }
        let steps = steps as usize;
        if steps % stride != 0 {
            return Err(Error::InvalidParameter(format!(
                "{steps} steps are not a multiple of the output stride {stride}"
            )));
        }
        Ok(Self { dt, steps, stride })
    }

    pub fn t_final(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn outputs(&self) -> usize {
        self.steps / self.stride + 1
    }

    pub fn output_times(&self) -> Vec<f64> {
        (0..self.outputs())
            .map(|k| (k * self.stride) as f64 * self.dt)
            .collect()
    }

    /// Noise is needed at every half step.
    pub fn noise_evaluator(&self, grid: &FrequencyGrid) -> NoiseEvaluator {
        NoiseEvaluator::new(grid, 0.0, 0.5 * self.dt, 2 * self.steps + 1)
    }
}

/// Scratch buffers for RK4.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    state: Vec<C64>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Workspace {
    fn resize(&mut self, n: usize) {
        let zero = C64::new(0.0, 0.0);
        for v in std::iter::once(&mut self.state)
            .chain(self.k.iter_mut())
            .chain(std::iter::once(&mut self.tmp))
        {
            v.clear();
            v.resize(n, zero);
        }
    }
}

/// A system embedded in a truncated hierarchy.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    heff: EffectiveHamiltonian,
    psi0: DVector<C64>,
}

/// Vacuum-component time series of both directions, `d` entries per output.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTrajectory {
    pub times: Vec<f64>,
    pub forward: Vec<C64>,
    pub backward: Vec<C64>,
}

impl Hierarchy {
    pub fn new(
        model: &SystemModel,
        basis: &BasisSet,
        space: &FockSpace,
        formulation: Formulation,
    ) -> Result<Self> {
        Ok(Self {
            heff: EffectiveHamiltonian::new(model, basis, space, formulation)?,
            psi0: model.psi0.clone(),
        })
    }

    pub fn heff(&self) -> &EffectiveHamiltonian {
        &self.heff
    }

    pub fn system_dim(&self) -> usize {
        self.psi0.len()
    }

    /// Number of complex amplitudes per direction.
    pub fn dimension(&self) -> usize {
        self.heff.len()
    }

    /// RK4 for one direction; `noise[m]` is `Z` at `m dt / 2`. Returns the
    /// vacuum component at every output, appended to `out`.
    pub fn propagate_direction(
        &self,
        noise: &[C64],
        grid: &TimeGrid,
        ws: &mut Workspace,
        out: &mut Vec<C64>,
    ) -> Result<()> {
        assert!(noise.len() >= 2 * grid.steps + 1, "noise series too short");
        let d = self.system_dim();
        let n = self.heff.len();
        ws.resize(n);
        ws.state[..d].copy_from_slice(self.psi0.as_slice());
        out.extend_from_slice(&ws.state[..d]);
        let h = grid.dt;
        let Workspace { state, k, tmp } = ws;
        let [k1, k2, k3, k4] = k;
        for step in 0..grid.steps {
            let (z0, zh, z1) = (noise[2 * step], noise[2 * step + 1], noise[2 * step + 2]);
            self.heff.apply(state, z0, k1);
            axpy_into(tmp, state, 0.5 * h, k1);
            self.heff.apply(tmp, zh, k2);
            axpy_into(tmp, state, 0.5 * h, k2);
            self.heff.apply(tmp, zh, k3);
            axpy_into(tmp, state, h, k3);
            self.heff.apply(tmp, z1, k4);
            let w = h / 6.0;
            let mut finite = true;
            for i in 0..n {
                let v = state[i] + w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
                finite &= v.re.is_finite() && v.im.is_finite();
                state[i] = v;
            }
            if !finite {
                let max_amplitude = state
                    .iter()
                    .map(|z| z.norm())
                    .filter(|x| x.is_finite())
                    .fold(0.0, f64::max);
                return Err(Error::Diverged {
                    time: (step + 1) as f64 * h,
                    max_amplitude,
                });
            }
            if (step + 1) % grid.stride == 0 {
                out.extend_from_slice(&state[..d]);
            }
        }
        Ok(())
    }

    pub fn propagate_series(&self, noise: &NoiseSeries, grid: &TimeGrid) -> Result<PairTrajectory> {
        let mut ws = Workspace::default();
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        self.propagate_direction(&noise.plus, grid, &mut ws, &mut forward)?;
        self.propagate_direction(&noise.minus, grid, &mut ws, &mut backward)?;
        Ok(PairTrajectory {
            times: grid.output_times(),
            forward,
            backward,
        })
    }

    /// Forward run under `Z+`, backward run under `Z-`.
    pub fn propagate(&self, noise: &NoiseRealization, grid: &TimeGrid) -> Result<PairTrajectory> {
        let series = grid.noise_evaluator(&noise.grid).evaluate(noise);
        self.propagate_series(&series, grid)
    }
}

fn axpy_into(out: &mut [C64], x: &[C64], a: f64, y: &[C64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub master_seed: u64,
    pub grid: TimeGrid,
    pub noise: Arc<FrequencyGrid>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// Raw average of `|psi+><psi-|`.
    pub rho: Vec<DMatrix<C64>>,
    pub trace: Vec<C64>,
    /// Standard error of the trace, real and imaginary parts.
    pub trace_se: Vec<C64>,
    /// `Re rho_aa / Re Tr rho`.
    pub populations: Vec<Vec<f64>>,
    pub population_se: Vec<Vec<f64>>,
    /// Standard error of the raw `Re rho_aa`.
    pub raw_population_se: Vec<Vec<f64>>,
    /// Frobenius norm of `rho - rho^dagger`.
    pub hermiticity: Vec<f64>,
    /// Trajectories that contributed.
    pub n_traj: usize,
    pub n_aborted: usize,
    pub master_seed: u64,
    pub batches: usize,
    /// Complex amplitudes per direction.
    pub dimension: usize,
}

/// Per-batch sums of one variant.
#[derive(Debug, Clone)]
struct BatchSums {
    rho: Vec<C64>,
    count: usize,
    aborted: usize,
}

/// Number of batch-means batches for `n` trajectories.
pub fn batch_count(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).clamp(1, n.max(1))
}

/// Runs all variants on shared noise: trajectory `i` draws its realization
/// from stream `i` of the master seed and feeds it to every variant.
///
/// Trajectories are split into `floor(sqrt(N))` fixed contiguous batches;
/// batch sums are merged in batch order, so results do not depend on the
/// thread count.
pub fn run_ensemble(variants: &[Hierarchy], cfg: &EnsembleConfig) -> Result<Vec<EnsembleResult>> {
    if cfg.n_traj == 0 {
        return Err(Error::InvalidParameter("need at least one trajectory".into()));
    }
    let Some(first) = variants.first() else {
        return Err(Error::InvalidParameter("no hierarchy variants given".into()));
    };
    let d = first.system_dim();
    if variants.iter().any(|v| v.system_dim() != d) {
        return Err(Error::Dimension("variants differ in system dimension".into()));
    }
    let outputs = cfg.grid.outputs();
    let evaluator = cfg.grid.noise_evaluator(&cfg.noise);
    let batches = batch_count(cfg.n_traj);
    let bounds = |b: usize| b * cfg.n_traj / batches;

    let per_batch: Vec<Vec<BatchSums>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut sums: Vec<BatchSums> = variants
                .iter()
                .map(|_| BatchSums {
                    rho: vec![C64::new(0.0, 0.0); outputs * d * d],
                    count: 0,
                    aborted: 0,
                })
                .collect();
            let mut ws = Workspace::default();
            let (mut fwd, mut bwd) = (Vec::new(), Vec::new());
            for i in bounds(b)..bounds(b + 1) {
                let mut rng = trajectory_rng(cfg.master_seed, i as u64);
                let nr = NoiseRealization::sample(cfg.noise.clone(), cfg.beta, &mut rng);
                let series = evaluator.evaluate(&nr);
                for (v, s) in variants.iter().zip(sums.iter_mut()) {
                    fwd.clear();
                    bwd.clear();
                    let ok = v
                        .propagate_direction(&series.plus, &cfg.grid, &mut ws, &mut fwd)
                        .and_then(|_| v.propagate_direction(&series.minus, &cfg.grid, &mut ws, &mut bwd));
                    match ok {
                        Ok(()) => {
                            for t in 0..outputs {
                                let (p, m) = (&fwd[t * d..(t + 1) * d], &bwd[t * d..(t + 1) * d]);
                                let r = &mut s.rho[t * d * d..(t + 1) * d * d];
                                for a in 0..d {
                                    for c in 0..d {
                                        r[a * d + c] += p[a] * m[c].conj();
                                    }
                                }
                            }
                            s.count += 1;
                        }
                        Err(Error::Diverged { .. }) => s.aborted += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;

    (0..variants.len())
        .map(|v| {
            let batch: Vec<&BatchSums> = per_batch.iter().map(|b| &b[v]).collect();
            reduce(&batch, cfg, d, outputs, variants[v].dimension())
        })
        .collect()
}

fn reduce(batch: &[&BatchSums], cfg: &EnsembleConfig, d: usize, outputs: usize, dimension: usize) -> Result<EnsembleResult> {
    let aborted: usize = batch.iter().map(|b| b.aborted).sum();
    let count: usize = batch.iter().map(|b| b.count).sum();
    if aborted as f64 > MAX_ABORT_FRACTION * cfg.n_traj as f64 || count == 0 {
        return Err(Error::TooManyAborts {
            aborted,
            total: cfg.n_traj,
        });
    }
    let mut total = vec![C64::new(0.0, 0.0); outputs * d * d];
    for b in batch {
        for (t, x) in total.iter_mut().zip(&b.rho) {
            *t += x;
        }
    }
    let scale = 1.0 / count as f64;
    let usable: Vec<&&BatchSums> = batch.iter().filter(|b| b.count > 0).collect();
    let nb = usable.len() as f64;
    let batch_mean = |b: &BatchSums, idx: usize| b.rho[idx] / b.count as f64;

    let mut out = EnsembleResult {
        times: cfg.grid.output_times(),
        rho: Vec::with_capacity(outputs),
        trace: Vec::with_capacity(outputs),
        trace_se: Vec::with_capacity(outputs),
        populations: Vec::with_capacity(outputs),
        population_se: Vec::with_capacity(outputs),
        raw_population_se: Vec::with_capacity(outputs),
        hermiticity: Vec::with_capacity(outputs),
        n_traj: count,
        n_aborted: aborted,
        master_seed: cfg.master_seed,
        batches: batch.len(),
        dimension,
    };
    for t in 0..outputs {
        let base = t * d * d;
        let rho = DMatrix::from_fn(d, d, |a, c| total[base + a * d + c] * scale);
        let trace = rho.trace();
        let diag = |b: &BatchSums, a: usize| batch_mean(b, base + a * d + a);
        let btrace: Vec<C64> = usable.iter().map(|b| (0..d).map(|a| diag(b, a)).sum()).collect();
        let se_of = |xs: &mut dyn Iterator<Item = f64>, centre: f64| {
            if nb < 2.0 {
                return f64::NAN;
            }
            let ss: f64 = xs.map(|x| (x - centre).powi(2)).sum();
            (ss / (nb * (nb - 1.0))).sqrt()
        };
        let mean_tr = btrace.iter().sum::<C64>() / nb;
        let trace_se = C64::new(
            se_of(&mut btrace.iter().map(|z| z.re), mean_tr.re),
            se_of(&mut btrace.iter().map(|z| z.im), mean_tr.im),
        );
        let mut pops = Vec::with_capacity(d);
        let mut pop_se = Vec::with_capacity(d);
        let mut raw_se = Vec::with_capacity(d);
        for a in 0..d {
            let ratio = rho[(a, a)].re / trace.re;
            pops.push(ratio);
            let xs: Vec<f64> = usable.iter().map(|b| diag(b, a).re).collect();
            let mean_x = xs.iter().sum::<f64>() / nb;
            raw_se.push(se_of(&mut xs.iter().copied(), mean_x));
            let resid = xs.iter().zip(&btrace).map(|(x, y)| x - ratio * y.re);
            pop_se.push(se_of(&mut resid.collect::<Vec<_>>().into_iter(), 0.0) / mean_tr.re.abs());
        }
        out.hermiticity.push((&rho - rho.adjoint()).norm());
        out.trace.push(trace);
        out.trace_se.push(trace_se);
        out.populations.push(pops);
        out.population_se.push(pop_se);
        out.raw_population_se.push(raw_se);
        out.rho.push(rho);
    }
    Ok(out)
}
