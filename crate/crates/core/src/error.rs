use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pointwise evaluation undefined for discrete SD")]
    DiscretePointwise,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: value {value:e}, estimated error {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("degenerate exponential decomposition at critical damping (|zeta - 2 omega0| = {gap:e})")]
    DegenerateExponential { gap: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("pencil rank below requested order (rank {rank}, order {order})")]
    PencilRank { rank: usize, order: usize },

    #[error("time grid is not uniform")]
    NonUniformGrid,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("the sqrt(d) formulation requires a diagonal eta (exponential basis)")]
    NonDiagonalEta,

    #[error("trajectory diverged at t = {time}: max amplitude {max_amplitude:e}")]
    Diverged { time: f64, max_amplitude: f64 },

    #[error("{aborted} of {total} trajectories aborted (limit is 1%)")]
    TooManyAborts { aborted: usize, total: usize },

    #[error("boson cutoff {n_boson} leaves thermal tail {tail:e}; use at least {suggested}")]
    BosonCutoff {
        n_boson: usize,
        tail: f64,
        suggested: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
