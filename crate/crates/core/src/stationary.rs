//! The Bernoulli-driven stationary measure as a fixed point of the transfer
//! operator `T_p = p (T0)_* + (1-p) (T1)_*` acting on CDFs, together with
//! closed-form moment oracles, the quantile map, rotation numbers of the
//! comparison circle map, and constructive lower-bound certificates for the
//! measure of small intervals.

use serde::Serialize;

use crate::affine::{compose, SystemParams};
use crate::error::Error;
use crate::measure::{grid_from_cdf_unchecked, Cdf, GridMeasure};
use crate::shift::ShiftMeasure;
use crate::word::Word;
use crate::Result;

pub const DEFAULT_GRID: usize = 1 << 16;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// One application of the transfer operator on a grid CDF:
/// `newCDF(x) = p CDF(x/a) + (1-p) CDF((x-1)/b)`, with `CDF(negative) = 0`.
pub fn tp_pushforward(mu: &GridMeasure, p: f64, params: &SystemParams) -> GridMeasure {
    let n = mu.nodes();
    let mut cdf = Vec::with_capacity(n);
    // Node 0 is x = ∞: the total finite mass is preserved.
    cdf.push(mu.node_cdf(0));
    for i in 1..n {
        let x = mu.node_x(i);
        let from_t0 = mu.cdf_x(x / params.a);
        let shifted = x - 1.0;
        let from_t1 = if shifted < 0.0 {
            0.0
        } else {
            mu.cdf_x(shifted / params.b)
        };
        cdf.push(p * from_t0 + (1.0 - p) * from_t1);
    }
    grid_from_cdf_unchecked(cdf, mu.mass_at_infinity_value())
}

/// Outcome of the fixed-point iteration.
#[derive(Clone, Debug)]
pub struct StationarySolution {
    pub measure: GridMeasure,
    /// Sup-CDF distance between the measure and its pushforward.
    pub residual: f64,
    pub iterations: usize,
}

/// Solve for the stationary measure of the `(p, 1-p)` Bernoulli system by
/// iterating the transfer operator from the point mass at 1. Fails when the
/// Lyapunov exponent is nonnegative (no stationary measure exists).
pub fn solve_stationary(
    p: f64,
    params: &SystemParams,
    grid: usize,
    tol: f64,
    max_iters: usize,
) -> Result<StationarySolution> {
    let nu = ShiftMeasure::bernoulli(p)?;
    let lambda = nu.lyapunov(params);
    if lambda >= 0.0 {
        return Err(Error::NonnegativeLyapunov { lambda });
    }
    let mut mu = GridMeasure::dirac(1.0, grid);
    for iter in 1..=max_iters {
        let next = tp_pushforward(&mu, p, params);
        let diff = next.sup_diff(&mu);
        mu = next;
        if diff <= tol {
            let residual = tp_pushforward(&mu, p, params).sup_diff(&mu);
            return Ok(StationarySolution {
                measure: mu,
                residual,
                iterations: iter,
            });
        }
    }
    let residual = tp_pushforward(&mu, p, params).sup_diff(&mu);
    Err(Error::NoConvergence {
        residual,
        iters: max_iters,
    })
}

/// Closed-form stationary moments from the pushforward identity applied to
/// the identity and square test functions:
/// `E = p a E + (1-p)(b E + 1)` and similarly for the second moment.
pub fn moment_oracle(p: f64, params: &SystemParams, order: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidBernoulli(p));
    }
    let (a, b, q) = (params.a, params.b, 1.0 - p);
    let denom1 = 1.0 - p * a - q * b;
    if order == 1 {
        if denom1 <= 0.0 {
            return Err(Error::DivergentMoment {
                order: 1,
                detail: format!("p*a + (1-p)*b = {} >= 1", p * a + q * b),
            });
        }
        return Ok(q / denom1);
    }
    assert_eq!(order, 2, "only first and second moments are available");
    let denom2 = 1.0 - p * a * a - q * b * b;
    if denom1 <= 0.0 || denom2 <= 0.0 {
        return Err(Error::DivergentMoment {
            order: 2,
            detail: format!("p*a^2 + (1-p)*b^2 = {} >= 1", p * a * a + q * b * b),
        });
    }
    let mean = q / denom1;
    Ok(q * (2.0 * b * mean + 1.0) / denom2)
}

/// The constants of the interval lower-bound construction, all positive.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HolderConstants {
    /// Strict upper bound on the count of expanding-branch preimage steps:
    /// `k < log+(t a) / log b + 1`.
    pub k_bound: f64,
    pub c1_of_t: f64,
    pub c2: f64,
    /// `c3(t) = log+(t a)/log b + 1 + c1(t)`; the word-length budget is
    /// `k + m < c3(t) - c2 log|I|`.
    pub c3_of_t: f64,
    pub c5: f64,
}

fn log_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

pub fn holder_constants(t: f64, p: f64, params: &SystemParams) -> HolderConstants {
    let (a, b) = (params.a, params.b);
    let q = p.min(1.0 - p);
    let log_b = b.ln();
    let log_ratio = ((a + b - 1.0) / a).ln();
    let log_contr = (b / (a + b - 1.0)).ln();
    let k_bound = log_plus(t * a) / log_b + 1.0;
    let c1 = ((2.0 * b.powf(log_plus(t * a) / log_b + 3.0) / (a * a * a)).ln() * log_ratio)
        / (log_b * log_contr)
        + 1.0;
    let c2 = log_ratio / (log_b * log_contr);
    let c3 = log_plus(t * a) / log_b + 1.0 + c1;
    let c5 = -q.ln() * c2;
    HolderConstants {
        k_bound,
        c1_of_t: c1,
        c2,
        c3_of_t: c3,
        c5,
    }
}

/// A constructive witness that the composite of `word` maps `[0, 1/a]` into
/// the target interval, so that `mu(I) >= q^{k+m} mu([0, 1/a])`.
#[derive(Clone, Debug)]
pub struct HolderCertificate {
    pub center: f64,
    pub length: f64,
    /// Expanding-branch preimage steps taken from the center.
    pub k: usize,
    /// Preimage steps along the folding map of `[0, 1/a)`.
    pub m: usize,
    pub word: Word,
    pub constants: HolderConstants,
    pub q: f64,
    /// Verified images of 0 and `1/a`.
    pub image_lo: f64,
    pub image_hi: f64,
}

impl HolderCertificate {
    pub fn word_len(&self) -> usize {
        self.k + self.m
    }

    /// The length-budget inequality `k + m < c3(t) - c2 log|I|`.
    pub fn length_bound_holds(&self) -> bool {
        (self.word_len() as f64) < self.constants.c3_of_t - self.constants.c2 * self.length.ln()
    }
}

/// Build a certificate word for the interval of the given center and
/// length.
///
/// Preimages of the center are taken first through the expanding generator
/// until the point falls into `[0, 1/a]`, then through the folding map
/// `x -> x/a (x < 1), (x-1)/b (x >= 1)` until the forward derivative of the
/// accumulated branch word is at most `a |I| / 2`, which forces the forward
/// image of `[0, 1/a]` inside the interval. The inclusion is then verified
/// on both endpoints; on a rounding failure the folding continues for a
/// bounded number of retries.
pub fn holder_certificate(
    center: f64,
    length: f64,
    p: f64,
    params: &SystemParams,
) -> Result<HolderCertificate> {
    if !(center > 0.0 && length > 0.0) || !center.is_finite() {
        return Err(Error::InvalidInterval(format!(
            "need a positive-length interval at a positive center, got center={center}, length={length}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidBernoulli(p));
    }
    let (a, b) = (params.a, params.b);
    let inv_a = 1.0 / a;
    let lo = center - 0.5 * length;
    let hi = center + 0.5 * length;

    // Preimages of the center through T1 until it lands in [0, 1/a].
    let mut point = center;
    let mut k = 0usize;
    while point > inv_a {
        point = (point - 1.0) / b;
        k += 1;
    }

    // Inverse-branch record, in the order the inverses are taken; the
    // forward word is this record reversed.
    let mut branches: Vec<u8> = vec![1; k];
    // Forward slope of the word so far: the k unfolding steps apply T1
    // forward, each expanding by b.
    let mut slope = b.powi(k as i32);
    let target_slope = 0.5 * a * length;
    let mut m = 0usize;

    let fold = |x: f64| if x < 1.0 { x / a } else { (x - 1.0) / b };

    const RETRY_BUDGET: usize = 64;
    let mut retries = 0usize;
    loop {
        while slope > target_slope {
            let symbol = if point < 1.0 { 0u8 } else { 1u8 };
            slope *= if symbol == 0 { a } else { b };
            point = fold(point);
            branches.push(symbol);
            m += 1;
        }
        let word = Word::from_symbols(&branches).reversed();
        let map = compose(&word, params);
        let image_lo = map.apply(0.0);
        let image_hi = map.apply(inv_a);
        if image_lo >= lo && image_hi <= hi {
            let constants = holder_constants(center, p, params);
            return Ok(HolderCertificate {
                center,
                length,
                k,
                m,
                word,
                constants,
                q: p.min(1.0 - p),
                image_lo,
                image_hi,
            });
        }
        retries += 1;
        if retries > RETRY_BUDGET {
            return Err(Error::CertificateFailed {
                lo: image_lo,
                hi: image_hi,
                target_lo: lo,
                target_hi: hi,
            });
        }
        // Tighten by further folding steps (to the next contracting one)
        // and re-verify.
        loop {
            let symbol = if point < 1.0 { 0u8 } else { 1u8 };
            slope *= if symbol == 0 { a } else { b };
            point = fold(point);
            branches.push(symbol);
            m += 1;
            if symbol == 0 {
                break;
            }
        }
    }
}

/// Rotation number of the comparison circle map, in closed form:
/// `log((a+b-1)/(ab)) / log((a+b-1)/a)`.
pub fn rotation_number(params: &SystemParams) -> f64 {
    let (a, b) = (params.a, params.b);
    ((a + b - 1.0) / (a * b)).ln() / ((a + b - 1.0) / a).ln()
}

/// Numerical rotation number: iterate the piecewise-affine circle map on
/// `[0, 1/a)`, measure displacement through the logarithmic conjugacy that
/// straightens it to a rigid rotation, and average.
pub fn rotation_number_numeric(params: &SystemParams, iters: usize) -> f64 {
    assert!(iters > 0);
    let (a, b) = (params.a, params.b);
    let circle_len = ((a + b - 1.0) / a).ln();
    // Normalized circle coordinate of x in [0, 1/a).
    let coord = |x: f64| ((x + 1.0 / (b - 1.0)).ln() - (1.0 / (b - 1.0)).ln()) / circle_len;
    let psi = |x: f64| {
        if x < 1.0 {
            (1.0 - a) / (a * b) + (a + b - 1.0) / (a * b) * x
        } else {
            (x - 1.0) / b
        }
    };
    let mut x = 0.1_f64.min(0.5 / a);
    let mut y = coord(x);
    let mut total = 0.0;
    for _ in 0..iters {
        x = psi(x);
        // The map wraps at most once per step; the conjugated displacement
        // is constant, so a drop in the normalized coordinate means a wrap.
        let y_next = coord(x);
        let mut d = y_next - y;
        if d < 0.0 {
            d += 1.0;
        }
        total += d;
        y = y_next;
    }
    total / iters as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{kolmogorov_distance, PointMassMeasure};

    fn params() -> SystemParams {
        SystemParams::new(0.5, 1.25).unwrap()
    }

    #[test]
    fn moment_oracle_closed_forms() {
        let p = params();
        assert!((moment_oracle(0.6, &p, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!((moment_oracle(0.6, &p, 2).unwrap() - 32.0 / 3.0).abs() < 1e-12);
        let boundary = SystemParams::new(0.5, 1.5).unwrap();
        assert!(matches!(
            moment_oracle(0.5, &boundary, 1),
            Err(Error::DivergentMoment { order: 1, .. })
        ));
    }

    #[test]
    fn pushforward_of_dirac() {
        let p = params();
        let mu = GridMeasure::dirac(2.0, 1 << 12);
        let out = tp_pushforward(&mu, 0.6, &p);
        // 0.6 delta(1) + 0.4 delta(3.5). The grid smears each atom over one
        // cell, so probe the CDF away from the jump locations.
        assert!(out.cdf_x(0.5).abs() < 1e-3);
        assert!((out.cdf_x(1.5) - 0.6).abs() < 1e-3);
        assert!((out.cdf_x(3.0) - 0.6).abs() < 1e-3);
        assert!((out.cdf_x(4.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pushforward_uniform_spot_value() {
        // Uniform on [0, 1]: CDF(x) = clamp(x, 0, 1).
        let n = 1 << 12;
        let cdf: Vec<f64> = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                let x = if u > 0.0 { 1.0 / u - 1.0 } else { f64::INFINITY };
                x.min(1.0).max(0.0).min(1.0)
            })
            .collect();
        let mu = GridMeasure::from_node_cdf(cdf, 0.0).unwrap();
        let out = tp_pushforward(&mu, 0.6, &params());
        // newCDF(0.5) = 0.6 * CDF(1) + 0.4 * CDF(-0.4) = 0.6.
        assert!((out.cdf_x(0.5) - 0.6).abs() < 1e-3);
    }

    #[test]
    fn solver_refuses_positive_lyapunov() {
        let p = SystemParams::new(0.5, 3.0).unwrap();
        assert!(matches!(
            solve_stationary(0.5, &p, 1 << 10, 1e-6, 100),
            Err(Error::NonnegativeLyapunov { .. })
        ));
    }

    #[test]
    fn solver_fixed_point_and_moments() {
        let p = params();
        let sol = solve_stationary(0.6, &p, 1 << 14, 1e-7, 10_000).unwrap();
        assert!(sol.residual <= 1e-6);
        assert!((sol.measure.moment(1) - 2.0).abs() < 0.01);
        assert!((sol.measure.moment(2) - 32.0 / 3.0).abs() < 0.1);
        // Fixed point maps to itself within grid tolerance.
        let pushed = tp_pushforward(&sol.measure, 0.6, &p);
        assert!(sol.measure.sup_diff(&pushed) <= 1e-6);
    }

    #[test]
    fn quantile_roundtrip() {
        let p = params();
        let sol = solve_stationary(0.6, &p, 1 << 14, 1e-7, 10_000).unwrap();
        let mu = &sol.measure;
        assert_eq!(mu.quantile(0.0), 0.0);
        // Push uniform samples through H and compare against mu.
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|i| mu.quantile((i as f64 + 0.5) / n as f64))
            .collect();
        let emp = PointMassMeasure::empirical(&xs);
        let d = kolmogorov_distance(&emp, mu);
        assert!(d <= 2.0 * mu.cell_resolution() + 2.0 / n as f64, "d={d}");
        // Monotone on a sampled grid.
        let mut prev = -1.0;
        for k in 0..500 {
            let x = mu.quantile(k as f64 / 500.0);
            assert!(x >= prev);
            prev = x;
        }
    }

    #[test]
    fn holder_constant_values() {
        let p = SystemParams::new(0.5, 1.5).unwrap();
        let c = holder_constants(1.0, 0.5, &p);
        let ln2 = 2.0f64.ln();
        let ln15 = 1.5f64.ln();
        assert!((c.c5 - ln2 * ln2 / (ln15 * ln15)).abs() < 1e-12);
        assert!((c.c5 - 2.9225).abs() < 1e-3);
        // c5 = -ln(q) c2 identically.
        assert!((c.c5 + 0.5f64.ln() * c.c2).abs() < 1e-12);
        // t <= 1/a: log+(t a) = 0, so k = 0 is admissible.
        assert!(c.k_bound < 1.0 + 1e-12);
        assert!(c.c1_of_t > 0.0 && c.c2 > 0.0 && c.c3_of_t > 0.0 && c.c5 > 0.0);
    }

    #[test]
    fn certificate_large_interval_degenerates() {
        let p = SystemParams::new(0.5, 1.5).unwrap();
        // I = [0, 2/a] centered at 1/a: already contains [0, 1/a].
        let cert = holder_certificate(2.0, 4.0, 0.5, &p).unwrap();
        assert_eq!(cert.k, 0);
        assert_eq!(cert.m, 0);
        assert!(cert.word.is_empty());
    }

    #[test]
    fn certificate_small_interval() {
        let p = SystemParams::new(0.5, 1.5).unwrap();
        let cert = holder_certificate(10.0, 0.1, 0.5, &p).unwrap();
        assert!(cert.image_lo >= 9.95 && cert.image_hi <= 10.05);
        assert!(cert.length_bound_holds());
        // Slope bound behind the inclusion.
        let slope = compose(&cert.word, &p).slope;
        assert!(slope <= 0.5 * p.a * 0.1 * (1.0 + 1e-12));
    }

    #[test]
    fn rotation_number_values() {
        let p = SystemParams::new(0.5, 1.5).unwrap();
        let rho = rotation_number(&p);
        assert!((rho - (4.0f64 / 3.0).ln() / 2.0f64.ln()).abs() < 1e-15);
        assert!((rho - 0.41504).abs() < 1e-5);
        for (a, b) in [(0.5, 1.5), (1.0 / 3.0, 1.25), (0.7, 1.1)] {
            let p = SystemParams::new(a, b).unwrap();
            let rho = rotation_number(&p);
            assert!(rho > 0.0 && rho < 1.0);
            let numeric = rotation_number_numeric(&p, 200_000);
            assert!((rho - numeric).abs() < 1e-4, "a={a} b={b}");
        }
    }
}
