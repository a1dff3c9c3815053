//! Basis sets `{phi_k}` closed under differentiation, `phi' = eta phi`, with
//! expansion coefficients `d` such that `alpha~(t) = sum_k d_k phi_k(t)`.
//!
//! Every two-function family carries its aBCF weight on the first
//! (sine-type) member; the second member only closes the ODE system.

mod pencil;

pub use pencil::{fit_exponentials, ExponentialFit};

use nalgebra::DMatrix;

use crate::bath::{self, AbcfScheme, BathSpec, SpectralDensity};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// One Lorentzian term of a Meier–Tannor decomposition
/// `J(w) = sum_k p_k w / ([(w + W_k)^2 + G_k^2][(w - W_k)^2 + G_k^2])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeierTannorMode {
    pub p: f64,
    pub omega: f64,
    pub gamma: f64,
}

/// Three-mode Meier–Tannor fit of `S(w) = alpha w exp(-w/w_c)`, in reduced
/// units `(p / (alpha w_c^4), W / w_c, G / w_c)`.
pub const OHMIC_EXP_MEIER_TANNOR: [(f64, f64, f64); 3] = [
    (12.0677, 0.2378, 2.2593),
    (-19.9762, 0.0888, 5.4377),
    (0.1834, 0.0482, 0.8099),
];

#[derive(Debug, Clone, PartialEq)]
pub struct MeierTannorParams {
    pub modes: Vec<MeierTannorMode>,
}

impl MeierTannorParams {
    pub fn new(modes: Vec<MeierTannorMode>) -> Result<Self> {
        for m in &modes {
            if !(m.gamma > 0.0 && m.omega > 0.0 && m.p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "Meier-Tannor mode needs Gamma > 0 and Omega > 0, got {m:?}"
                )));
            }
        }
        Ok(Self { modes })
    }

    /// The tabulated fit scaled to a given coupling and cutoff.
    pub fn ohmic_exp(alpha: f64, cutoff: f64) -> Self {
        let modes = OHMIC_EXP_MEIER_TANNOR
            .iter()
            .map(|&(p, omega, gamma)| MeierTannorMode {
                p: p * alpha * cutoff.powi(4),
                omega: omega * cutoff,
                gamma: gamma * cutoff,
            })
            .collect();
        Self { modes }
    }

    pub fn density(&self, w: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let g2 = m.gamma * m.gamma;
                m.p * w / (((w + m.omega).powi(2) + g2) * ((w - m.omega).powi(2) + g2))
            })
            .sum()
    }

    /// `-i sum_k p_k e^{-G_k t} sin(W_k t) / (4 W_k G_k)`
    pub fn abcf(&self, t: f64) -> C64 {
        let im: f64 = self
            .modes
            .iter()
            .map(|m| m.p * (-m.gamma * t).exp() * (m.omega * t).sin() / (4.0 * m.omega * m.gamma))
            .sum();
        C64::new(0.0, -im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisChoice {
    /// The natural non-exponential basis of each spectral family.
    #[default]
    Auto,
    /// Complex exponentials `e^{-nu_k t}` (fails where they degenerate).
    ForceExponential,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisFamily {
    /// `{sin(w_k t), cos(w_k t)}` per frequency.
    SinCos { frequencies: Vec<f64> },
    /// `{e^{-G t} sin(W t), e^{-G t} cos(W t)}` per `(W, G)`.
    DampedSinCos { modes: Vec<(f64, f64)> },
    /// `{t e^{-r t}, e^{-r t}}`.
    PolyExp { rate: f64 },
    /// `{phi_p, phi_q}` of the Brownian oscillator; regular at critical damping.
    BrownianCritical { frequency: f64, damping: f64 },
    /// `{e^{-nu_k t}}`.
    Exponential { rates: Vec<C64> },
}

impl BasisFamily {
    fn len(&self) -> usize {
        match self {
            Self::SinCos { frequencies } => 2 * frequencies.len(),
            Self::DampedSinCos { modes } => 2 * modes.len(),
            Self::PolyExp { .. } | Self::BrownianCritical { .. } => 2,
            Self::Exponential { rates } => rates.len(),
        }
    }

    fn eta(&self) -> DMatrix<C64> {
        let k = self.len();
        let mut eta = DMatrix::zeros(k, k);
        let mut block = |i: usize, b: [[f64; 2]; 2]| {
            for r in 0..2 {
                for c in 0..2 {
                    eta[(i + r, i + c)] = C64::from(b[r][c]);
                }
            }
        };
        match self {
            Self::SinCos { frequencies } => {
                for (j, &w) in frequencies.iter().enumerate() {
                    block(2 * j, [[0.0, w], [-w, 0.0]]);
                }
            }
            Self::DampedSinCos { modes } => {
                for (j, &(w, g)) in modes.iter().enumerate() {
                    block(2 * j, [[-g, w], [-w, -g]]);
                }
            }
            Self::PolyExp { rate } => block(0, [[-rate, 1.0], [0.0, -rate]]),
            Self::BrownianCritical { frequency, damping } => {
                block(0, [[-damping, -frequency], [*frequency, 0.0]])
            }
            Self::Exponential { rates } => {
                for (j, nu) in rates.iter().enumerate() {
                    eta[(j, j)] = -nu;
                }
            }
        }
        eta
    }

    fn eval(&self, t: f64) -> Vec<C64> {
        match self {
            Self::SinCos { frequencies } => frequencies
                .iter()
                .flat_map(|&w| [(w * t).sin(), (w * t).cos()])
                .map(C64::from)
                .collect(),
            Self::DampedSinCos { modes } => modes
                .iter()
                .flat_map(|&(w, g)| {
                    let e = (-g * t).exp();
                    [e * (w * t).sin(), e * (w * t).cos()]
                })
                .map(C64::from)
                .collect(),
            Self::PolyExp { rate } => {
                let e = (-rate * t).exp();
                vec![C64::from(t * e), C64::from(e)]
            }
            Self::BrownianCritical { frequency, damping } => {
                let (p, q) = bath::brownian_pair(*frequency, *damping, t);
                vec![C64::from(p), C64::from(q)]
            }
            Self::Exponential { rates } => rates.iter().map(|nu| (-nu * t).exp()).collect(),
        }
    }

    fn derivative(&self, t: f64) -> Vec<C64> {
        match self {
            Self::SinCos { frequencies } => frequencies
                .iter()
                .flat_map(|&w| [w * (w * t).cos(), -w * (w * t).sin()])
                .map(C64::from)
                .collect(),
            Self::DampedSinCos { modes } => modes
                .iter()
                .flat_map(|&(w, g)| {
                    let e = (-g * t).exp();
                    let (s, c) = (w * t).sin_cos();
                    [e * (w * c - g * s), e * (-w * s - g * c)]
                })
                .map(C64::from)
                .collect(),
            Self::PolyExp { rate } => {
                let e = (-rate * t).exp();
                vec![C64::from(e * (1.0 - rate * t)), C64::from(-rate * e)]
            }
            Self::BrownianCritical { frequency, damping } => {
                let (p, q) = bath::brownian_pair_derivative(*frequency, *damping, t);
                vec![C64::from(p), C64::from(q)]
            }
            Self::Exponential { rates } => rates.iter().map(|nu| -nu * (-nu * t).exp()).collect(),
        }
    }
}

/// Max-norm residuals of the basis ODE over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    /// `max_t |Phi'_fd - eta Phi|` with a central difference, `h = 1e-5`.
    pub ode_finite_difference: f64,
    /// `max_t |Phi'_closed - eta Phi|`.
    pub ode_closed_form: f64,
    /// `max_t |Phi(t) - exp(eta t) Phi(0)|`.
    pub propagator: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub t: f64,
    pub ode_finite_difference: f64,
    pub ode_closed_form: f64,
    pub propagator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    family: BasisFamily,
    eta: DMatrix<C64>,
    phi0: Vec<C64>,
    d: Vec<C64>,
}

fn inf_norm(v: impl IntoIterator<Item = C64>) -> f64 {
    v.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl BasisSet {
    pub fn new(family: BasisFamily, d: Vec<C64>) -> Result<Self> {
        let k = family.len();
        if k == 0 {
            return Err(Error::InvalidParameter("basis set must not be empty".into()));
        }
        if d.len() != k {
            return Err(Error::Dimension(format!(
                "{} expansion coefficients for {k} basis functions",
                d.len()
            )));
        }
        let eta = family.eta();
        let phi0 = family.eval(0.0);
        Ok(Self {
            family,
            eta,
            phi0,
            d,
        })
    }

    /// `alpha~(t) = sum_k d_k e^{-nu_k t}`.
    pub fn exponential(rates: Vec<C64>, d: Vec<C64>) -> Result<Self> {
        Self::new(BasisFamily::Exponential { rates }, d)
    }

    /// Basis and coefficients that reproduce the Ke–Zhao aBCF of `bath`.
    pub fn build(bath: &BathSpec, choice: BasisChoice) -> Result<Self> {
        if bath.scheme != AbcfScheme::KeZhao {
            return Err(Error::Unsupported(
                "basis construction is available for the Ke-Zhao aBCF only".into(),
            ));
        }
        match (choice, &bath.sd) {
            (BasisChoice::Auto, SpectralDensity::Discrete { modes }) => {
                let d = modes
                    .iter()
                    .flat_map(|m| [-I * m.weight(), C64::from(0.0)])
                    .collect();
                let frequencies = modes.iter().map(|m| m.frequency).collect();
                Self::new(BasisFamily::SinCos { frequencies }, d)
            }
            (BasisChoice::Auto, SpectralDensity::OhmicExp { alpha, cutoff }) => {
                Self::meier_tannor(&MeierTannorParams::ohmic_exp(*alpha, *cutoff))
            }
            (BasisChoice::Auto, SpectralDensity::OhmicAlg { alpha, cutoff }) => {
                let weight = 0.5 * std::f64::consts::PI * alpha * cutoff.powi(3);
                Self::new(
                    BasisFamily::PolyExp { rate: *cutoff },
                    vec![-I * weight, C64::from(0.0)],
                )
            }
            (
                BasisChoice::Auto,
                &SpectralDensity::Brownian {
                    reorganization,
                    frequency,
                    damping,
                },
            ) => Self::new(
                BasisFamily::BrownianCritical { frequency, damping },
                vec![I * reorganization * frequency, C64::from(0.0)],
            ),
            (BasisChoice::ForceExponential, SpectralDensity::Discrete { modes }) => {
                // -i w sin(wt) = -(w/2) (e^{iwt} - e^{-iwt})
                let mut rates = Vec::with_capacity(2 * modes.len());
                let mut d = Vec::with_capacity(2 * modes.len());
                for m in modes {
                    let half = 0.5 * m.weight();
                    rates.push(C64::new(0.0, -m.frequency));
                    d.push(C64::from(-half));
                    rates.push(C64::new(0.0, m.frequency));
                    d.push(C64::from(half));
                }
                Self::exponential(rates, d)
            }
            (BasisChoice::ForceExponential, SpectralDensity::OhmicExp { alpha, cutoff }) => {
                let mt = MeierTannorParams::ohmic_exp(*alpha, *cutoff);
                let (rates, d) = meier_tannor_exponentials(&mt);
                Self::exponential(rates, d)
            }
            (BasisChoice::ForceExponential, SpectralDensity::OhmicAlg { .. }) => {
                Err(Error::Unsupported(
                    "the algebraic-cutoff aBCF has a second-order pole and no exact exponential \
                     decomposition; use fit_exponentials for an approximate one"
                        .into(),
                ))
            }
            (
                BasisChoice::ForceExponential,
                &SpectralDensity::Brownian {
                    reorganization,
                    frequency,
                    damping,
                },
            ) => {
                if bath::is_critical(frequency, damping) {
                    return Err(Error::DegenerateExponential {
                        gap: (damping - 2.0 * frequency).abs(),
                    });
                }
                // w1 is imaginary in the overdamped regime.
                let w1 = C64::from(frequency * frequency - 0.25 * damping * damping).sqrt();
                let amp = reorganization * frequency * frequency / (2.0 * w1);
                Self::exponential(
                    vec![0.5 * damping + I * w1, 0.5 * damping - I * w1],
                    vec![amp, -amp],
                )
            }
        }
    }

    /// Damped sin/cos basis carrying a Meier–Tannor decomposition.
    pub fn meier_tannor(params: &MeierTannorParams) -> Result<Self> {
        let params = MeierTannorParams::new(params.modes.clone())?;
        let d = params
            .modes
            .iter()
            .flat_map(|m| [-I * m.p / (4.0 * m.omega * m.gamma), C64::from(0.0)])
            .collect();
        let modes = params.modes.iter().map(|m| (m.omega, m.gamma)).collect();
        Self::new(BasisFamily::DampedSinCos { modes }, d)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }

    pub fn eta(&self) -> &DMatrix<C64> {
        &self.eta
    }

    pub fn phi0(&self) -> &[C64] {
        &self.phi0
    }

    pub fn d(&self) -> &[C64] {
        &self.d
    }

    pub fn is_eta_diagonal(&self) -> bool {
        let k = self.len();
        (0..k).all(|i| (0..k).all(|j| i == j || self.eta[(i, j)] == C64::from(0.0)))
    }

    /// Replaces `eta` while keeping the closed-form evaluator, producing an
    /// inconsistent basis for sensitivity checks.
    pub fn with_perturbed_eta(mut self, row: usize, col: usize, delta: C64) -> Result<Self> {
        if row >= self.len() || col >= self.len() {
            return Err(Error::Dimension(format!(
                "eta entry ({row}, {col}) outside a {k}x{k} matrix",
                k = self.len()
            )));
        }
        self.eta[(row, col)] += delta;
        Ok(self)
    }

    #[cfg(test)]
    pub(crate) fn override_phi0(&mut self, phi0: Vec<C64>) {
        assert_eq!(phi0.len(), self.len());
        self.phi0 = phi0;
    }

    /// Closed-form `Phi(t)`.
    pub fn eval(&self, t: f64) -> Vec<C64> {
        self.family.eval(t)
    }

    /// Closed-form `Phi'(t)`.
    pub fn derivative(&self, t: f64) -> Vec<C64> {
        self.family.derivative(t)
    }

    /// `sum_k d_k phi_k(t)`.
    pub fn reconstruct_abcf(&self, t: f64) -> C64 {
        self.eval(t).iter().zip(&self.d).map(|(p, d)| p * d).sum()
    }

    /// `exp(eta t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        (&self.eta * C64::from(t)).exp()
    }

    fn eta_times(&self, phi: &[C64]) -> Vec<C64> {
        let k = self.len();
        (0..k)
            .map(|i| (0..k).map(|j| self.eta[(i, j)] * phi[j]).sum())
            .collect()
    }

    pub fn validate(&self, grid: &[f64]) -> ResidualReport {
        const H: f64 = 1e-5;
        let phi0 = nalgebra::DVector::from_column_slice(&self.phi0);
        let rows: Vec<ResidualRow> = grid
            .iter()
            .map(|&t| {
                let phi = self.eval(t);
                let rhs = self.eta_times(&phi);
                let plus = self.eval(t + H);
                let minus = self.eval(t - H);
                let fd = inf_norm(
                    (0..phi.len()).map(|i| (plus[i] - minus[i]) / (2.0 * H) - rhs[i]),
                );
                let closed = inf_norm(self.derivative(t).iter().zip(&rhs).map(|(a, b)| a - b));
                let exact = self.propagator(t) * &phi0;
                let prop = inf_norm(phi.iter().zip(exact.iter()).map(|(a, b)| a - b));
                ResidualRow {
                    t,
                    ode_finite_difference: fd,
                    ode_closed_form: closed,
                    propagator: prop,
                }
            })
            .collect();
        let max = |f: fn(&ResidualRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        ResidualReport {
            ode_finite_difference: max(|r| r.ode_finite_difference),
            ode_closed_form: max(|r| r.ode_closed_form),
            propagator: max(|r| r.propagator),
            rows,
        }
    }
}

/// Complex-exponential split of a Meier–Tannor aBCF:
/// `-i e^{-Gt} sin(Wt) = (e^{-(G+iW)t} - e^{-(G-iW)t}) / 2`.
pub fn meier_tannor_exponentials(params: &MeierTannorParams) -> (Vec<C64>, Vec<C64>) {
    let mut rates = Vec::with_capacity(2 * params.modes.len());
    let mut d = Vec::with_capacity(2 * params.modes.len());
    for m in &params.modes {
        let amp = m.p / (8.0 * m.omega * m.gamma);
        rates.push(C64::new(m.gamma, m.omega));
        d.push(C64::from(amp));
        rates.push(C64::new(m.gamma, -m.omega));
        d.push(C64::from(-amp));
    }
    (rates, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn brownian(zeta: f64) -> BathSpec {
        BathSpec::new(
            SpectralDensity::Brownian {
                reorganization: 1.0,
                frequency: 1.0,
                damping: zeta,
            },
            1.0,
        )
        .unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn brownian_critical_auto() {
        let b = BasisSet::build(&brownian(2.0), BasisChoice::Auto).unwrap();
        let eta = b.eta();
        assert_eq!(eta[(0, 0)], c(-2.0, 0.0));
        assert_eq!(eta[(0, 1)], c(-1.0, 0.0));
        assert_eq!(eta[(1, 0)], c(1.0, 0.0));
        assert_eq!(eta[(1, 1)], c(0.0, 0.0));
        assert_eq!(b.phi0(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(b.d(), &[c(0.0, 1.0), c(0.0, 0.0)]);
        assert!(close(b.reconstruct_abcf(1.0), c(0.0, -0.367879), 1e-6));
    }

    #[test]
    fn ohmic_alg_auto() {
        let bath = BathSpec::new(
            SpectralDensity::OhmicAlg {
                alpha: 0.1,
                cutoff: 1.0,
            },
            1.0,
        )
        .unwrap();
        let b = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        assert_eq!(b.eta()[(0, 0)], c(-1.0, 0.0));
        assert_eq!(b.eta()[(0, 1)], c(1.0, 0.0));
        assert_eq!(b.eta()[(1, 0)], c(0.0, 0.0));
        assert_eq!(b.eta()[(1, 1)], c(-1.0, 0.0));
        assert_eq!(b.phi0(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(close(b.d()[0], c(0.0, -0.157080), 1e-6));
        assert_eq!(b.d()[1], c(0.0, 0.0));
    }

    #[test]
    fn force_exponential_rejects_critical_damping() {
        let err = BasisSet::build(&brownian(2.0), BasisChoice::ForceExponential).unwrap_err();
        assert!(matches!(err, Error::DegenerateExponential { .. }));
        assert!(err.to_string().contains("degenerate exponential decomposition"));
        // just outside the tolerance band the decomposition exists
        assert!(BasisSet::build(&brownian(2.0 + 1e-5), BasisChoice::ForceExponential).is_ok());
    }

    #[test]
    fn ohmic_exp_uses_tabulated_modes() {
        let bath = BathSpec::new(
            SpectralDensity::OhmicExp {
                alpha: 0.157,
                cutoff: 7.5,
            },
            5.0,
        )
        .unwrap();
        let b = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        assert_eq!(b.len(), 6);
        match b.family() {
            BasisFamily::DampedSinCos { modes } => {
                let ratios: Vec<f64> = modes.iter().map(|m| m.1 / 7.5).collect();
                for (r, expect) in ratios.iter().zip([2.2593, 5.4377, 0.8099]) {
                    assert!((r - expect).abs() < 1e-12);
                }
            }
            other => panic!("unexpected family {other:?}"),
        }
    }

    #[test]
    fn reconstruct_examples() {
        let bath = BathSpec::new(SpectralDensity::single_mode(0.2, 1.0), 1.0).unwrap();
        let b = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        assert_eq!(b.reconstruct_abcf(0.0), c(0.0, 0.0));
        assert!(close(b.reconstruct_abcf(PI / 2.0), c(0.0, -0.02), 1e-15));
        assert!(close(
            b.reconstruct_abcf(PI / 2.0),
            bath.abcf(PI / 2.0).unwrap(),
            1e-15
        ));
    }

    #[test]
    fn eta_block_structure() {
        let bath = BathSpec::new(
            SpectralDensity::Discrete {
                modes: vec![
                    bath::DiscreteMode::new(0.2, 1.0),
                    bath::DiscreteMode::new(0.1, 2.5),
                ],
            },
            1.0,
        )
        .unwrap();
        let b = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        let eta = b.eta();
        assert_eq!(eta, &(-eta.transpose()));

        let mt = BasisSet::meier_tannor(&MeierTannorParams::ohmic_exp(0.157, 7.5)).unwrap();
        let sym = mt.eta() + mt.eta().transpose();
        if let BasisFamily::DampedSinCos { modes } = mt.family() {
            for (j, &(_, g)) in modes.iter().enumerate() {
                let i = 2 * j;
                assert_eq!(sym[(i, i)], c(-2.0 * g, 0.0));
                assert_eq!(sym[(i + 1, i + 1)], c(-2.0 * g, 0.0));
                assert_eq!(sym[(i, i + 1)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn validate_examples() {
        let grid: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        let exp = BasisSet::exponential(vec![c(0.5, 1.0), c(2.0, -0.3)], vec![c(1.0, 0.0); 2])
            .unwrap();
        let r = exp.validate(&grid);
        assert!(r.ode_closed_form < 1e-9 && r.propagator < 1e-9, "{r:?}");

        let crit = BasisSet::build(&brownian(2.0), BasisChoice::Auto).unwrap();
        let r = crit.validate(&grid);
        assert!(r.ode_finite_difference < 1e-8, "{r:?}");
        assert!(r.ode_closed_form < 1e-8 && r.propagator < 1e-8, "{r:?}");

        let bad = crit.with_perturbed_eta(0, 1, c(1e-3, 0.0)).unwrap();
        let r = bad.validate(&grid);
        assert!(r.ode_closed_form > 1e-5 && r.propagator > 1e-5, "{r:?}");
    }

    #[test]
    fn exponential_and_brownian_pair_agree_underdamped() {
        let bath = brownian(1.0);
        let auto = BasisSet::build(&bath, BasisChoice::Auto).unwrap();
        let exp = BasisSet::build(&bath, BasisChoice::ForceExponential).unwrap();
        assert!(exp.is_eta_diagonal() && !auto.is_eta_diagonal());
        for i in 0..=200 {
            let t = 0.1 * i as f64;
            assert!(close(auto.reconstruct_abcf(t), exp.reconstruct_abcf(t), 1e-10));
        }
    }

    #[test]
    fn meier_tannor_split_matches_damped_form() {
        let mt = MeierTannorParams::ohmic_exp(0.157, 7.5);
        let (rates, d) = meier_tannor_exponentials(&mt);
        let exp = BasisSet::exponential(rates, d).unwrap();
        let damped = BasisSet::meier_tannor(&mt).unwrap();
        for i in 0..=200 {
            let t = 0.05 * i as f64;
            assert!(close(exp.reconstruct_abcf(t), mt.abcf(t), 1e-12));
            assert!(close(damped.reconstruct_abcf(t), mt.abcf(t), 1e-12));
        }
    }

    #[test]
    fn non_ke_zhao_scheme_is_rejected() {
        let bath = BathSpec::with_scheme(
            SpectralDensity::single_mode(0.2, 1.0),
            1.0,
            AbcfScheme::SongShi,
        )
        .unwrap();
        assert!(matches!(
            BasisSet::build(&bath, BasisChoice::Auto),
            Err(Error::Unsupported(_))
        ));
    }
}
