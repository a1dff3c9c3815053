//! Matrix-pencil fit of `y(t) ~ sum_k d_k exp(-nu_k t)` on a uniform grid.

use nalgebra::{DMatrix, DVector, Schur, SVD};

use crate::{Error, Result, C64};

/// Singular values below this fraction of the largest count as noise.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFit {
    /// `(nu_k, d_k)` sorted by `(Re nu, Im nu)`.
    pub terms: Vec<(C64, C64)>,
    /// Max absolute deviation of the fit over the samples.
    pub residual: f64,
}

impl ExponentialFit {
    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().map(|(nu, d)| d * (-nu * t).exp()).sum()
    }
}

pub fn fit_exponentials(samples: &[(f64, C64)], order: usize) -> Result<ExponentialFit> {
    let n = samples.len();
    if order == 0 || 2 * order > n {
        return Err(Error::InvalidParameter(format!(
            "order {order} needs 1 <= order <= samples/2 ({n} samples)"
        )));
    }
    let h = samples[1].0 - samples[0].0;
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for (i, s) in samples.iter().enumerate() {
        let expect = samples[0].0 + h * i as f64;
        if (s.0 - expect).abs() > 1e-9 * h.max(expect.abs()) {
            return Err(Error::NonUniformGrid);
        }
    }

    let pencil = n / 2;
    let rows = n - pencil;
    let y = DMatrix::from_fn(rows, pencil + 1, |i, j| samples[i + j].1);
    let svd = SVD::new(y, false, true);
    let sigma = &svd.singular_values;
    let rank = sigma
        .iter()
        .filter(|&&s| s > RANK_TOLERANCE * sigma[0])
        .count();
    if rank < order {
        return Err(Error::PencilRank { rank, order });
    }
    // singular values from nalgebra are not guaranteed sorted
    let mut idx: Vec<usize> = (0..sigma.len()).collect();
    idx.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let v_t = svd.v_t.expect("right singular vectors requested");
    let w = DMatrix::from_fn(pencil + 1, order, |i, k| v_t[(idx[k], i)].conj());
    let w1 = w.rows(0, pencil).into_owned();
    let w2 = w.rows(1, pencil).into_owned();
    let a = SVD::new(w1, true, true)
        .solve(&w2, 0.0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let z = Schur::new(a)
        .eigenvalues()
        .ok_or(Error::PencilRank { rank, order })?;

    let vander = DMatrix::from_fn(n, order, |i, k| z[k].powu(i as u32));
    let rhs = DVector::from_iterator(n, samples.iter().map(|s| s.1));
    let amp = SVD::new(vander, true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let t0 = samples[0].0;
    let mut terms: Vec<(C64, C64)> = z
        .iter()
        .zip(amp.iter())
        .map(|(zk, ck)| {
            let nu = -zk.ln() / h;
            (nu, ck * (nu * t0).exp())
        })
        .collect();
    terms.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let mut fit = ExponentialFit {
        terms,
        residual: 0.0,
    };
    fit.residual = samples
        .iter()
        .map(|&(t, y)| (fit.eval(t) - y).norm())
        .fold(0.0, f64::max);
    Ok(fit)
}
