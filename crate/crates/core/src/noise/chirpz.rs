//! Bluestein chirp-z evaluation of `sum_j x_j exp(-i (w0 + j dw)(t0 + m h))`
//! for `m = 0..points`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

pub(crate) struct ChirpZ {
    modes: usize,
    points: usize,
    w0: f64,
    dw: f64,
    t0: f64,
    h: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<C64>,
    pre: Vec<C64>,
    post: Vec<C64>,
}

/// `exp(-i x)` with the phase reduced modulo `2 pi` first.
fn cis_neg(x: f64) -> C64 {
    let r = x.rem_euclid(std::f64::consts::TAU);
    C64::new(r.cos(), -r.sin())
}

impl ChirpZ {
    pub(crate) fn new(modes: usize, points: usize, w0: f64, dw: f64, t0: f64, h: f64) -> Self {
        let size = (modes + points - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let a = dw * h;
        // chirp(n) = exp(-i a n^2 / 2); jm = (j^2 + m^2 - (m - j)^2) / 2
        let chirp = |n: usize| {
            let n = n as f64;
            cis_neg(0.5 * a * n * n)
        };
        let mut kernel = vec![C64::new(0.0, 0.0); size];
        for l in 0..points {
            kernel[l] = chirp(l).conj();
        }
        for l in 1..modes {
            kernel[size - l] = chirp(l).conj();
        }
        forward.process(&mut kernel);
        let pre = (0..modes).map(|j| chirp(j) * cis_neg(j as f64 * dw * t0)).collect();
        let post = (0..points)
            .map(|m| chirp(m) * cis_neg(w0 * (t0 + m as f64 * h)))
            .collect();
        Self {
            modes,
            points,
            w0,
            dw,
            t0,
            h,
            forward,
            inverse,
            kernel_hat: kernel,
            pre,
            post,
        }
    }

    pub(crate) fn matches(&self, modes: usize, points: usize, w0: f64, dw: f64, t0: f64, h: f64) -> bool {
        self.modes == modes
            && self.points == points
            && self.w0 == w0
            && self.dw == dw
            && self.t0 == t0
            && self.h == h
    }

    pub(crate) fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.modes);
        let size = self.kernel_hat.len();
        let mut buf = vec![C64::new(0.0, 0.0); size];
        for (b, (xj, p)) in buf.iter_mut().zip(x.iter().zip(&self.pre)) {
            *b = xj * p;
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / size as f64;
        buf.truncate(self.points);
        for (b, p) in buf.iter_mut().zip(&self.post) {
            *b *= p * scale;
        }
        buf
    }
}
