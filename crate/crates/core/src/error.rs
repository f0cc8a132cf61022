use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system parameters: need 0 < a < 1 < b, got a={a}, b={b}")]
    InvalidParams { a: f64, b: f64 },

    #[error("exact mode requires rational a and b")]
    ExactModeUnavailable,

    #[error("invalid Bernoulli parameter p={0}: need 0 < p < 1")]
    InvalidBernoulli(f64),

    #[error("invalid Markov chain: {0}")]
    InvalidMarkov(String),

    #[error("Lyapunov exponent {lambda} is nonnegative: no stationary measure exists")]
    NonnegativeLyapunov { lambda: f64 },

    #[error("moment of order {order} diverges: contraction-in-mean condition fails ({detail})")]
    DivergentMoment { order: u32, detail: String },

    #[error("sphere depth {requested} exceeds cap {cap}")]
    DepthCapExceeded { requested: u32, cap: u32 },

    #[error("operation requires a Bernoulli driving measure")]
    BernoulliRequired,

    #[error("fixed-point iteration did not converge: residual {residual} after {iters} iterations")]
    NoConvergence { residual: f64, iters: usize },

    #[error("certificate retry budget exhausted: achieved image [{lo}, {hi}] for target [{target_lo}, {target_hi}]")]
    CertificateFailed {
        lo: f64,
        hi: f64,
        target_lo: f64,
        target_hi: f64,
    },

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("point {x} outside the map's domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("empty input sequence")]
    EmptyInput,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
