//! Correlated forward/backward noise pairs `(Z+, Z-)`.
//!
//! Each frequency mode carries two standard complex Gaussians `g1, g2`
//! (`<g g*> = 1`, `<g g> = 0`). With `u = w = sqrt(s (n+1) / 2)` and
//! `v = n sqrt(s / (2 (n+1)))`,
//!
//! ```text
//! A = u g1 + v g2*    B = w (g1* + g2)    C = v g1 + u g2*    D = B
//! Z+(t) = sum_j A_j e^{-i w_j t} + B_j e^{i w_j t}
//! Z-(t) = sum_j C_j e^{-i w_j t} + D_j e^{i w_j t}
//! ```
//!
//! which gives `<Z+ Z+> = <Z- Z-> = alpha1` and `<Z+(t) Z-*(s)> = alpha*(t-s)`
//! on the discretized grid.

mod chirpz;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bath::{bose_occupation, BathSpec, SpectralDensity, DECAY_LEVEL};
use crate::{Result, C64};

use chirpz::ChirpZ;

pub const DEFAULT_MODES: usize = 3000;

/// Cap on the default cutoff, in units of the characteristic frequency.
pub const OMEGA_MAX_CAP: f64 = 30.0;

/// Midpoint spacing of a continuous grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    pub first: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub frequencies: Vec<f64>,
    /// `S(w_j) dw / pi`, or `c^2 / (2 w)` for discrete modes.
    pub weights: Vec<f64>,
    pub uniform: Option<Uniform>,
}

impl FrequencyGrid {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_j s_j (2 n_j + 1) cos(w_j t)`, the discretized `alpha1`.
    pub fn alpha1(&self, beta: f64, t: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.weights)
            .map(|(&w, &s)| s * (2.0 * bose_occupation(beta, w) + 1.0) * (w * t).cos())
            .sum()
    }

    /// Discretized full BCF `alpha(t)`.
    pub fn alpha(&self, beta: f64, t: f64) -> C64 {
        self.frequencies
            .iter()
            .zip(&self.weights)
            .map(|(&w, &s)| {
                let (sin, cos) = (w * t).sin_cos();
                s * C64::new((2.0 * bose_occupation(beta, w) + 1.0) * cos, -sin)
            })
            .sum()
    }
}

/// `min{w : S(w) < 1e-10 max S}` capped at 30 characteristic frequencies.
pub fn default_omega_max(sd: &SpectralDensity) -> f64 {
    let fc = sd.characteristic_frequency();
    if sd.is_discrete() {
        return fc;
    }
    sd.decay_frequency(DECAY_LEVEL).min(OMEGA_MAX_CAP * fc)
}

/// Midpoint rule `w_j = (j - 1/2) W / J`; discrete densities map onto their modes.
pub fn discretize(sd: &SpectralDensity, modes: usize, omega_max: f64) -> FrequencyGrid {
    if let SpectralDensity::Discrete { modes } = sd {
        return FrequencyGrid {
            frequencies: modes.iter().map(|m| m.frequency).collect(),
            weights: modes.iter().map(|m| m.weight()).collect(),
            uniform: None,
        };
    }
    let j = modes.max(1);
    let step = omega_max / j as f64;
    let frequencies: Vec<f64> = (0..j).map(|i| (i as f64 + 0.5) * step).collect();
    let weights = frequencies
        .iter()
        .map(|&w| sd.density(w) * step / PI)
        .collect();
    FrequencyGrid {
        frequencies,
        weights,
        uniform: Some(Uniform {
            first: 0.5 * step,
            step,
        }),
    }
}

/// `(u, v, w)` mixing amplitudes of one mode.
pub fn mixing_amplitudes(weight: f64, beta: f64, frequency: f64) -> (f64, f64, f64) {
    let n = bose_occupation(beta, frequency);
    let u = (0.5 * weight * (n + 1.0)).sqrt();
    let v = n * (0.5 * weight / (n + 1.0)).sqrt();
    (u, v, u)
}

/// Independent per-trajectory stream: `stream = trajectory index` on a
/// generator keyed by the master seed.
pub fn trajectory_rng(master_seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory);
    rng
}

/// Standard complex Gaussian with `<g g*> = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub grid: Arc<FrequencyGrid>,
    pub beta: f64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub c: Vec<C64>,
}

impl NoiseRealization {
    /// Builds the coefficients from given Gaussians `(g1_j, g2_j)`.
    pub fn from_gaussians(grid: Arc<FrequencyGrid>, beta: f64, g: &[(C64, C64)]) -> Self {
        assert_eq!(g.len(), grid.len());
        let j = grid.len();
        let (mut a, mut b, mut c) = (Vec::with_capacity(j), Vec::with_capacity(j), Vec::with_capacity(j));
        for ((&w, &s), &(g1, g2)) in grid.frequencies.iter().zip(&grid.weights).zip(g) {
            let (u, v, ww) = mixing_amplitudes(s, beta, w);
            a.push(u * g1 + v * g2.conj());
            b.push(ww * (g1.conj() + g2));
            c.push(v * g1 + u * g2.conj());
        }
        Self { grid, beta, a, b, c }
    }

    pub fn sample<R: Rng + ?Sized>(grid: Arc<FrequencyGrid>, beta: f64, rng: &mut R) -> Self {
        let g: Vec<(C64, C64)> = (0..grid.len())
            .map(|_| (complex_gaussian(rng), complex_gaussian(rng)))
            .collect();
        Self::from_gaussians(grid, beta, &g)
    }

    /// Single process with `<Z Z> = 0`, `<Z(t) Z*(s)> = alpha(t - s)`, used
    /// for both directions.
    pub fn sample_diosi_strunz<R: Rng + ?Sized>(
        grid: Arc<FrequencyGrid>,
        beta: f64,
        rng: &mut R,
    ) -> Self {
        let mut a = Vec::with_capacity(grid.len());
        let mut b = Vec::with_capacity(grid.len());
        for (&w, &s) in grid.frequencies.iter().zip(&grid.weights) {
            let n = bose_occupation(beta, w);
            a.push((s * (n + 1.0)).sqrt() * complex_gaussian(rng));
            b.push((s * n).sqrt() * complex_gaussian(rng));
        }
        let c = a.clone();
        Self { grid, beta, a, b, c }
    }

    /// `D_j`, identical to `B_j`.
    pub fn d(&self) -> &[C64] {
        &self.b
    }

    pub fn zero(grid: Arc<FrequencyGrid>, beta: f64) -> Self {
        let z = vec![C64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            beta,
            a: z.clone(),
            b: z.clone(),
            c: z,
        }
    }

    /// `(Z+(t), Z-(t))`.
    pub fn eval(&self, t: f64) -> (C64, C64) {
        let mut plus = C64::new(0.0, 0.0);
        let mut minus = C64::new(0.0, 0.0);
        for (j, &w) in self.grid.frequencies.iter().enumerate() {
            let e = C64::new(0.0, -w * t).exp();
            let ec = e.conj();
            plus += self.a[j] * e + self.b[j] * ec;
            minus += self.c[j] * e + self.b[j] * ec;
        }
        (plus, minus)
    }
}

/// Noise on an equally spaced time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSeries {
    pub t0: f64,
    pub step: f64,
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

/// Batch evaluation of realizations on `t0 + m h`, `m = 0..points`.
///
/// Uniform grids with many modes go through a chirp-z transform; otherwise
/// each mode's phase is advanced by repeated multiplication, re-anchored to
/// the exact exponential every 64 steps.
pub struct NoiseEvaluator {
    pub t0: f64,
    pub step: f64,
    pub points: usize,
    chirp: Option<ChirpZ>,
}

const CHIRP_MIN_MODES: usize = 64;
const REANCHOR: usize = 64;

impl NoiseEvaluator {
    pub fn new(grid: &FrequencyGrid, t0: f64, step: f64, points: usize) -> Self {
        let chirp = match grid.uniform {
            Some(u) if grid.len() >= CHIRP_MIN_MODES && points > 1 => {
                Some(ChirpZ::new(grid.len(), points, u.first, u.step, t0, step))
            }
            _ => None,
        };
        Self {
            t0,
            step,
            points,
            chirp,
        }
    }

    /// Forces the per-mode phasor path.
    pub fn direct(t0: f64, step: f64, points: usize) -> Self {
        Self {
            t0,
            step,
            points,
            chirp: None,
        }
    }

    pub fn uses_chirp_z(&self) -> bool {
        self.chirp.is_some()
    }

    pub fn evaluate(&self, nr: &NoiseRealization) -> NoiseSeries {
        let (plus, minus) = match &self.chirp {
            Some(cz) => {
                let grid = &nr.grid;
                let u = grid.uniform.expect("chirp-z needs a uniform grid");
                assert!(cz.matches(grid.len(), self.points, u.first, u.step, self.t0, self.step));
                let a = cz.apply(&nr.a);
                let c = cz.apply(&nr.c);
                let bc: Vec<C64> = nr.b.iter().map(|z| z.conj()).collect();
                let b = cz.apply(&bc);
                let plus = a.iter().zip(&b).map(|(x, y)| x + y.conj()).collect();
                let minus = c.iter().zip(&b).map(|(x, y)| x + y.conj()).collect();
                (plus, minus)
            }
            None => self.phasor(nr),
        };
        NoiseSeries {
            t0: self.t0,
            step: self.step,
            plus,
            minus,
        }
    }

    fn phasor(&self, nr: &NoiseRealization) -> (Vec<C64>, Vec<C64>) {
        let zero = C64::new(0.0, 0.0);
        let mut plus = vec![zero; self.points];
        let mut minus = vec![zero; self.points];
        for (j, &w) in nr.grid.frequencies.iter().enumerate() {
            let rot = C64::new(0.0, -w * self.step).exp();
            let mut e = zero;
            for m in 0..self.points {
                if m % REANCHOR == 0 {
                    e = C64::new(0.0, -w * (self.t0 + m as f64 * self.step)).exp();
                } else {
                    e *= rot;
                }
                let ec = e.conj();
                plus[m] += nr.a[j] * e + nr.b[j] * ec;
                minus[m] += nr.c[j] * e + nr.b[j] * ec;
            }
        }
        (plus, minus)
    }
}

/// Empirical correlator and its standard error (real and imaginary parts
/// separately).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: C64,
    pub se: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorRow {
    pub t: f64,
    /// `<Z+(t) Z+(0)>`
    pub plus_plus: Estimate,
    /// `<Z-(t) Z-(0)>`
    pub minus_minus: Estimate,
    /// `<Z+(t) Z-*(0)>`
    pub plus_minus: Estimate,
    /// `alpha1(t)` of the bath.
    pub target_alpha1: f64,
    /// `alpha*(t)` of the bath.
    pub target_alpha_conj: C64,
}

#[derive(Debug, Default, Clone, Copy, PartialEq)]
struct Moments {
    n: f64,
    sum: C64,
    sum_sq: (f64, f64),
}

impl Moments {
    fn push(&mut self, z: C64) {
        self.n += 1.0;
        self.sum += z;
        self.sum_sq.0 += z.re * z.re;
        self.sum_sq.1 += z.im * z.im;
    }

    fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq.0 += other.sum_sq.0;
        self.sum_sq.1 += other.sum_sq.1;
    }

    /// Mean with the leave-one-out jackknife error, which for a plain mean
    /// reduces to the sample standard deviation over `sqrt(N)`.
    fn estimate(&self) -> Estimate {
        let n = self.n;
        let mean = self.sum / n;
        let var = |sq: f64, m: f64| ((sq - n * m * m) / (n - 1.0)).max(0.0);
        let se = C64::new(
            (var(self.sum_sq.0, mean.re) / n).sqrt(),
            (var(self.sum_sq.1, mean.im) / n).sqrt(),
        );
        Estimate { mean, se }
    }
}

/// Running sums of the three constrained correlators, so realizations can
/// be streamed and partial sums merged in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorAccumulator {
    times: Vec<f64>,
    acc: Vec<[Moments; 3]>,
}

impl CorrelatorAccumulator {
    pub fn new(times: &[f64]) -> Self {
        Self {
            times: times.to_vec(),
            acc: vec![[Moments::default(); 3]; times.len()],
        }
    }

    pub fn push(&mut self, nr: &NoiseRealization) {
        let values: Vec<(C64, C64)> = self.times.iter().map(|&t| nr.eval(t)).collect();
        self.push_values(nr.eval(0.0), &values);
    }

    /// One realization given as `(Z+, Z-)` at time zero and at each time.
    pub fn push_values(&mut self, zero: (C64, C64), values: &[(C64, C64)]) {
        assert_eq!(values.len(), self.times.len());
        let (p0, m0) = zero;
        for (slot, &(p, m)) in self.acc.iter_mut().zip(values) {
            slot[0].push(p * p0);
            slot[1].push(m * m0);
            slot[2].push(p * m0.conj());
        }
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.times, other.times, "accumulators on different times");
        for (a, b) in self.acc.iter_mut().zip(&other.acc) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
    }

    pub fn count(&self) -> usize {
        self.acc.first().map_or(0, |a| a[0].n as usize)
    }

    pub fn finish(&self, bath: &BathSpec) -> Result<Vec<CorrelatorRow>> {
        self.times
            .iter()
            .zip(&self.acc)
            .map(|(&t, m)| {
                Ok(CorrelatorRow {
                    t,
                    plus_plus: m[0].estimate(),
                    minus_minus: m[1].estimate(),
                    plus_minus: m[2].estimate(),
                    target_alpha1: bath.alpha1(t)?,
                    target_alpha_conj: bath.bcf(t)?.conj(),
                })
            })
            .collect()
    }
}

/// Sample correlators over many realizations against the bath targets.
pub fn empirical_correlators(
    realizations: &[NoiseRealization],
    times: &[f64],
    bath: &BathSpec,
) -> Result<Vec<CorrelatorRow>> {
    let mut acc = CorrelatorAccumulator::new(times);
    for nr in realizations {
        acc.push(nr);
    }
    acc.finish(bath)
}
