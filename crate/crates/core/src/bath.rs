//! Spectral densities and bath correlation functions.
//!
//! Conventions (natural units, hbar = k_B = 1):
//!
//! ```text
//! alpha(t)  = int_0^inf dw S(w)/pi [coth(beta w/2) cos(wt) - i sin(wt)]
//! alpha~(t) = alpha(t) - alpha1(t)
//! ```
//!
//! The default split ([`AbcfScheme::KeZhao`]) puts `Re alpha` into the noise,
//! leaving the purely imaginary, temperature-independent
//! `alpha~(t) = -i int S(w)/pi sin(wt) dw`.

use std::f64::consts::PI;

use crate::quad::{self, Tolerance};
use crate::{Error, Result, C64};

/// Relative level below which the spectral density counts as decayed.
pub const DECAY_LEVEL: f64 = 1e-10;

/// Relative tolerance of every spectral quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteMode {
    pub coupling: f64,
    pub frequency: f64,
}

impl DiscreteMode {
    pub fn new(coupling: f64, frequency: f64) -> Self {
        Self {
            coupling,
            frequency,
        }
    }

    /// `c^2 / (2 w)`, the mode's weight in `S(w)/pi`.
    pub fn weight(&self) -> f64 {
        self.coupling * self.coupling / (2.0 * self.frequency)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `S(w) = pi/2 sum_k c_k^2/w_k delta(w - w_k)`
    Discrete { modes: Vec<DiscreteMode> },
    /// `S(w) = alpha w exp(-w/w_c)`
    OhmicExp { alpha: f64, cutoff: f64 },
    /// `S(w) = 2 pi alpha w / (1 + (w/w_c)^2)^2`
    OhmicAlg { alpha: f64, cutoff: f64 },
    /// `S(w) = 2 lambda zeta w0^2 w / ((w^2 - w0^2)^2 + zeta^2 w^2)`
    Brownian {
        reorganization: f64,
        frequency: f64,
        damping: f64,
    },
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be non-negative and finite, got {value}"
        )))
    }
}

impl SpectralDensity {
    pub fn single_mode(coupling: f64, frequency: f64) -> Self {
        Self::Discrete {
            modes: vec![DiscreteMode::new(coupling, frequency)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Discrete { modes } => {
                if modes.is_empty() {
                    return Err(Error::InvalidParameter(
                        "discrete spectral density needs at least one mode".into(),
                    ));
                }
                for m in modes {
                    positive("mode frequency", m.frequency)?;
                    if !m.coupling.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "mode coupling must be finite, got {}",
                            m.coupling
                        )));
                    }
                }
                Ok(())
            }
            Self::OhmicExp { alpha, cutoff } | Self::OhmicAlg { alpha, cutoff } => {
                non_negative("alpha", *alpha)?;
                positive("cutoff", *cutoff)
            }
            Self::Brownian {
                reorganization,
                frequency,
                damping,
            } => {
                non_negative("reorganization energy", *reorganization)?;
                positive("mode frequency", *frequency)?;
                positive("damping", *damping)
            }
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::Discrete { .. })
    }

    /// `S(w)` for `w >= 0`.
    pub fn eval(&self, omega: f64) -> Result<f64> {
        if self.is_discrete() {
            return Err(Error::DiscretePointwise);
        }
        if !(omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be non-negative, got {omega}"
            )));
        }
        Ok(self.density(omega))
    }

    /// Closed form of a continuous density; zero for the discrete variant.
    pub(crate) fn density(&self, w: f64) -> f64 {
        match *self {
            Self::Discrete { .. } => 0.0,
            Self::OhmicExp { alpha, cutoff } => alpha * w * (-w / cutoff).exp(),
            Self::OhmicAlg { alpha, cutoff } => {
                let x = w / cutoff;
                2.0 * PI * alpha * w / ((1.0 + x * x) * (1.0 + x * x))
            }
            Self::Brownian {
                reorganization,
                frequency,
                damping,
            } => {
                let w0sq = frequency * frequency;
                let gap = w * w - w0sq;
                2.0 * reorganization * damping * w0sq * w / (gap * gap + damping * damping * w * w)
            }
        }
    }

    /// Frequency scale used for grids and caps: the cutoff of the Ohmic
    /// families, `max(w0, zeta)` for the Brownian density and the highest
    /// mode of a discrete density.
    pub fn characteristic_frequency(&self) -> f64 {
        match self {
            Self::Discrete { modes } => modes.iter().map(|m| m.frequency).fold(0.0, f64::max),
            Self::OhmicExp { cutoff, .. } | Self::OhmicAlg { cutoff, .. } => *cutoff,
            Self::Brownian {
                frequency, damping, ..
            } => frequency.max(*damping),
        }
    }

    /// `lim w^3 S(w)` for the algebraically decaying densities, zero otherwise.
    fn tail_coefficient(&self) -> f64 {
        match *self {
            Self::OhmicAlg { alpha, cutoff } => 2.0 * PI * alpha * cutoff.powi(4),
            Self::Brownian {
                reorganization,
                frequency,
                damping,
            } => 2.0 * reorganization * damping * frequency * frequency,
            _ => 0.0,
        }
    }

    /// Location and value of the maximum of a continuous density.
    pub fn peak(&self) -> (f64, f64) {
        if self.is_discrete() {
            return (0.0, 0.0);
        }
        let fc = self.characteristic_frequency();
        // Coarse log scan, then golden-section refinement around the best node.
        let n = 400;
        let lo = (fc * 1e-4).ln();
        let hi = (fc * 1e3).ln();
        let node = |i: usize| (lo + (hi - lo) * i as f64 / n as f64).exp();
        let best = (0..=n)
            .max_by(|&i, &j| self.density(node(i)).total_cmp(&self.density(node(j))))
            .unwrap_or(0);
        let mut a = node(best.saturating_sub(1));
        let mut b = node((best + 1).min(n));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.density(c) > self.density(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let w = 0.5 * (a + b);
        (w, self.density(w))
    }

    /// Smallest frequency above the peak where `S < level * max S`
    /// (bracketed by bisection, returned from the decayed side).
    pub fn decay_frequency(&self, level: f64) -> f64 {
        let (w_peak, s_max) = self.peak();
        if s_max <= 0.0 {
            return self.characteristic_frequency().max(1.0);
        }
        let target = level * s_max;
        let mut lo = w_peak.max(f64::MIN_POSITIVE);
        let mut hi = lo * 2.0;
        while self.density(hi) >= target {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return lo;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.density(mid) >= target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        hi
    }

    fn quadrature_tolerance(&self, upper: f64, t: f64) -> Tolerance {
        let (_, s_max) = self.peak();
        let scale = s_max * self.characteristic_frequency();
        Tolerance {
            abs: 1e-14 * scale.max(f64::MIN_POSITIVE),
            rel: QUAD_REL_TOL,
            initial_panels: ((upper * t.abs() / PI).ceil() as usize + 16).min(400_000),
            max_panels: 4_000_000,
        }
    }

    /// `int_0^inf S(w)/pi sin(wt) dw` by adaptive quadrature.
    ///
    /// Algebraic `w^-3` tails are handled by subtracting
    /// `g(w) = C w / (w^2 + a^2)^2` with matching tail constant `C`, whose sine
    /// transform `C pi t exp(-a t) / (4a)` is added back analytically.
    pub fn sine_transform(&self, t: f64) -> Result<f64> {
        if let Self::Discrete { modes } = self {
            return Ok(modes.iter().map(|m| m.weight() * (m.frequency * t).sin()).sum());
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let upper = self.decay_frequency(DECAY_LEVEL);
        let c3 = self.tail_coefficient();
        let a = 3.0 * self.characteristic_frequency();
        let reference = |w: f64| {
            let den = w * w + a * a;
            c3 * w / (den * den)
        };
        let q = quad::integrate(
            |w| (self.density(w) - reference(w)) * (w * t).sin(),
            0.0,
            upper,
            self.quadrature_tolerance(upper, t),
        )?;
        let analytic = c3 * PI * t * (-a * t).exp() / (4.0 * a);
        Ok((q.value + analytic) / PI)
    }

    /// `int_0^inf S(w)/pi K(w) cos(wt) dw` by adaptive quadrature.
    pub fn cosine_transform(&self, t: f64, kernel: Kernel) -> Result<f64> {
        if let Self::Discrete { modes } = self {
            return Ok(modes
                .iter()
                .map(|m| m.weight() * kernel.eval(m.frequency) * (m.frequency * t).cos())
                .sum());
        }
        let upper = self.decay_frequency(DECAY_LEVEL);
        let q = quad::integrate(
            |w| self.density(w) * kernel.eval(w) * (w * t).cos(),
            0.0,
            upper,
            self.quadrature_tolerance(upper, t),
        )?;
        Ok(q.value / PI)
    }
}

/// Thermal weights multiplying `S(w) cos(wt)` in the real parts of the BCF splits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    One,
    /// `coth(beta w / 2)`
    CothHalf(f64),
    /// `csch(beta w / 2)`
    CschHalf(f64),
    /// `tanh(beta w / 4)`
    TanhQuarter(f64),
}

impl Kernel {
    pub fn eval(self, w: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::CothHalf(beta) => coth_half(beta, w),
            Self::CschHalf(beta) => {
                let x = beta * w;
                if x < 1e-4 {
                    2.0 / x - x / 12.0
                } else {
                    1.0 / (0.5 * x).sinh()
                }
            }
            Self::TanhQuarter(beta) => (0.25 * beta * w).tanh(),
        }
    }
}

/// `coth(beta w / 2)`, switching to `2/(beta w) + beta w/6` for `beta w < 1e-4`.
pub fn coth_half(beta: f64, w: f64) -> f64 {
    let x = beta * w;
    if x < 1e-4 {
        2.0 / x + x / 6.0
    } else {
        1.0 / (0.5 * x).tanh()
    }
}

/// Bose occupation `1 / (e^{beta w} - 1)`; underflows cleanly to zero.
pub fn bose_occupation(beta: f64, w: f64) -> f64 {
    let x = beta * w;
    if x > 700.0 {
        0.0
    } else {
        1.0 / x.exp_m1()
    }
}

/// How the BCF is split between the noise (`alpha1`) and the hierarchy (`alpha~`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbcfScheme {
    /// `alpha1 = Re alpha`, purely imaginary `alpha~`.
    #[default]
    KeZhao,
    /// `alpha1 = int S/pi csch(beta w/2) cos(wt)`.
    SongShi,
    /// `alpha1 = 0`, `alpha~ = alpha`.
    DiosiStrunz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub sd: SpectralDensity,
    pub beta: f64,
    pub scheme: AbcfScheme,
}

impl BathSpec {
    pub fn new(sd: SpectralDensity, beta: f64) -> Result<Self> {
        Self::with_scheme(sd, beta, AbcfScheme::KeZhao)
    }

    pub fn with_scheme(sd: SpectralDensity, beta: f64, scheme: AbcfScheme) -> Result<Self> {
        sd.validate()?;
        positive("beta", beta)?;
        Ok(Self { sd, beta, scheme })
    }

    /// Full bath correlation function `alpha(t)`.
    pub fn bcf(&self, t: f64) -> Result<C64> {
        let re = self.sd.cosine_transform(t, Kernel::CothHalf(self.beta))?;
        let im = -self.sd.sine_transform(t)?;
        Ok(C64::new(re, im))
    }

    /// Adjusted BCF `alpha~(t)`. Closed forms are used for every Ke–Zhao
    /// family; the other schemes go through quadrature.
    pub fn abcf(&self, t: f64) -> Result<C64> {
        check_time(t)?;
        match self.scheme {
            AbcfScheme::KeZhao => Ok(C64::new(0.0, -self.ke_zhao_sine(t)?)),
            AbcfScheme::SongShi => {
                let re = self.sd.cosine_transform(t, Kernel::TanhQuarter(self.beta))?;
                Ok(C64::new(re, -self.sd.sine_transform(t)?))
            }
            AbcfScheme::DiosiStrunz => self.bcf(t),
        }
    }

    /// Noise-carried part `alpha1(t)` (real, even in `t`).
    pub fn alpha1(&self, t: f64) -> Result<f64> {
        match self.scheme {
            AbcfScheme::KeZhao => self.sd.cosine_transform(t, Kernel::CothHalf(self.beta)),
            AbcfScheme::SongShi => self.sd.cosine_transform(t, Kernel::CschHalf(self.beta)),
            AbcfScheme::DiosiStrunz => Ok(0.0),
        }
    }

    /// `int S/pi sin(wt)` from the closed form of each family.
    fn ke_zhao_sine(&self, t: f64) -> Result<f64> {
        Ok(match self.sd {
            SpectralDensity::Discrete { ref modes } => modes
                .iter()
                .map(|m| m.weight() * (m.frequency * t).sin())
                .sum(),
            SpectralDensity::OhmicExp { alpha, cutoff } => {
                let x = cutoff * t;
                2.0 * alpha * cutoff * cutoff * x / (PI * (1.0 + x * x) * (1.0 + x * x))
            }
            SpectralDensity::OhmicAlg { alpha, cutoff } => {
                0.5 * PI * alpha * cutoff.powi(3) * t * (-cutoff * t).exp()
            }
            SpectralDensity::Brownian {
                reorganization,
                frequency,
                damping,
            } => {
                // alpha~ = i lambda w0 phi_p(t)
                let (phi_p, _) = brownian_pair(frequency, damping, t);
                -reorganization * frequency * phi_p
            }
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "time must be non-negative, got {t}"
        )))
    }
}

/// Relative distance from critical damping below which limit forms are used.
pub const CRITICAL_TOLERANCE: f64 = 1e-6;

pub fn is_critical(frequency: f64, damping: f64) -> bool {
    (damping - 2.0 * frequency).abs() < CRITICAL_TOLERANCE * frequency
}

/// `(sin(w1 t)/w1 e^{-zeta t/2}, cos(w1 t) e^{-zeta t/2})` with
/// `w1 = sqrt(w0^2 - zeta^2/4)`, continued to imaginary `w1` (overdamped) and to
/// the critical limit `(t e^{-zeta t/2}, e^{-zeta t/2})`.
fn damped_sin_cos(frequency: f64, damping: f64, t: f64) -> (f64, f64) {
    let half = 0.5 * damping;
    if is_critical(frequency, damping) {
        let e = (-half * t).exp();
        return (t * e, e);
    }
    let disc = frequency * frequency - half * half;
    if disc > 0.0 {
        let w1 = disc.sqrt();
        let e = (-half * t).exp();
        ((w1 * t).sin() / w1 * e, (w1 * t).cos() * e)
    } else {
        // sinh/cosh combined with the decay to stay finite at long times
        let k = (-disc).sqrt();
        let slow = ((k - half) * t).exp();
        let fast = (-(k + half) * t).exp();
        (0.5 * (slow - fast) / k, 0.5 * (slow + fast))
    }
}

/// The Brownian pair
///
/// ```text
/// phi_p(t) = -(w0/w1) sin(w1 t) e^{-zeta t/2}
/// phi_q(t) = ((zeta/(2 w1)) sin(w1 t) + cos(w1 t)) e^{-zeta t/2}
/// ```
///
/// which stays linearly independent at critical damping.
pub fn brownian_pair(frequency: f64, damping: f64, t: f64) -> (f64, f64) {
    let (s, c) = damped_sin_cos(frequency, damping, t);
    (-frequency * s, 0.5 * damping * s + c)
}

/// Time derivative of [`brownian_pair`], differentiated directly.
pub fn brownian_pair_derivative(frequency: f64, damping: f64, t: f64) -> (f64, f64) {
    let (s, c) = damped_sin_cos(frequency, damping, t);
    (
        -frequency * c + 0.5 * damping * frequency * s,
        -frequency * frequency * s,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sd_eval_examples() {
        let ohmic = SpectralDensity::OhmicExp {
            alpha: 0.157,
            cutoff: 7.5,
        };
        assert!(close(ohmic.eval(7.5).unwrap(), 0.157 * 7.5 * (-1f64).exp(), 1e-15));
        assert!(close(ohmic.eval(7.5).unwrap(), 0.433178042, 1e-9));

        let brown = SpectralDensity::Brownian {
            reorganization: 1.0,
            frequency: 1.0,
            damping: 2.0,
        };
        assert!(close(brown.eval(1.0).unwrap(), 1.0, 1e-15));

        let alg = SpectralDensity::OhmicAlg {
            alpha: 0.1,
            cutoff: 1.0,
        };
        assert_eq!(alg.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn discrete_rejects_pointwise() {
        let sd = SpectralDensity::single_mode(0.2, 1.0);
        assert_eq!(sd.eval(1.0), Err(Error::DiscretePointwise));
    }

    #[test]
    fn validation() {
        assert!(SpectralDensity::OhmicExp {
            alpha: 0.1,
            cutoff: 0.0
        }
        .validate()
        .is_err());
        assert!(SpectralDensity::single_mode(0.2, -1.0).validate().is_err());
        assert!(BathSpec::new(SpectralDensity::single_mode(0.2, 1.0), 0.0).is_err());
    }

    #[test]
    fn abcf_examples() {
        let bath = BathSpec::new(SpectralDensity::single_mode(0.2, 1.0), 1.0).unwrap();
        assert_eq!(bath.abcf(0.0).unwrap(), C64::new(0.0, 0.0));
        let v = bath.abcf(PI / 2.0).unwrap();
        assert!(close(v.re, 0.0, 1e-15) && close(v.im, -0.02, 1e-15));

        let alg = BathSpec::new(
            SpectralDensity::OhmicAlg {
                alpha: 0.1,
                cutoff: 1.0,
            },
            1.0,
        )
        .unwrap();
        let v = alg.abcf(1.0).unwrap();
        assert!(close(v.im, -0.0577863675, 1e-10), "{v}");

        let brown = BathSpec::new(
            SpectralDensity::Brownian {
                reorganization: 1.0,
                frequency: 1.0,
                damping: 2.0,
            },
            1.0,
        )
        .unwrap();
        let v = brown.abcf(1.0).unwrap();
        assert!(close(v.im, -(-1f64).exp(), 1e-15), "{v}");
        assert!(close(v.im, -0.367879, 1e-6));
    }

    #[test]
    fn alpha1_examples() {
        let bath = BathSpec::new(SpectralDensity::single_mode(0.2, 1.0), 1.0).unwrap();
        let a0 = bath.alpha1(0.0).unwrap();
        assert!(close(a0, 0.02 / 0.5f64.tanh(), 1e-15));
        assert!(close(a0, 0.0432791, 1e-7));
        assert!(close(bath.alpha1(PI).unwrap(), -a0, 1e-15));

        let ds = BathSpec::with_scheme(
            SpectralDensity::single_mode(0.2, 1.0),
            1.0,
            AbcfScheme::DiosiStrunz,
        )
        .unwrap();
        for t in [0.0, 0.3, 7.0] {
            assert_eq!(ds.alpha1(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn coth_series_matches_direct_near_threshold() {
        let beta = 1.0;
        let w = 1e-4 * (1.0 + 1e-9);
        let direct = 1.0 / (0.5 * beta * w as f64).tanh();
        assert!((coth_half(beta, w) - direct).abs() / direct < 1e-12);
        assert!((coth_half(beta, 0.99e-4) - 1.0 / (0.5 * 0.99e-4f64).tanh()).abs() < 1e-6);
    }

    #[test]
    fn bose_occupation_limits() {
        assert_eq!(bose_occupation(1e3, 1.0), 0.0);
        assert!(close(bose_occupation(1.0, 1.0), 1.0 / (1f64.exp() - 1.0), 1e-15));
    }

    #[test]
    fn brownian_pair_is_continuous_across_regimes() {
        for t in [0.0, 0.5, 2.0, 7.0] {
            let (p_c, q_c) = brownian_pair(1.0, 2.0, t);
            let (p_u, q_u) = brownian_pair(1.0, 2.0 - 1e-4, t);
            let (p_o, q_o) = brownian_pair(1.0, 2.0 + 1e-4, t);
            assert!(close(p_c, p_u, 1e-4) && close(p_c, p_o, 1e-4));
            assert!(close(q_c, q_u, 1e-4) && close(q_c, q_o, 1e-4));
        }
        assert_eq!(brownian_pair(1.0, 5.0, 0.0), (0.0, 1.0));
    }

    #[test]
    fn decay_frequency_brackets_level() {
        let sd = SpectralDensity::OhmicExp {
            alpha: 0.157,
            cutoff: 7.5,
        };
        let (_, smax) = sd.peak();
        assert!(close(smax, 0.157 * 7.5 / 1f64.exp(), 1e-12));
        let w = sd.decay_frequency(DECAY_LEVEL);
        assert!(sd.density(w) < DECAY_LEVEL * smax);
        assert!(sd.density(w * 0.999) >= DECAY_LEVEL * smax);
    }
}
