//! The skew product `(w, x) -> (shift w, T_{w_0} x)`: orbits, path
//! averages, the compactified metric and contraction diagnostics.

use crate::affine::SystemParams;
use crate::measure::{to_u, PointMassMeasure};
use crate::shift::ShiftMeasure;
use crate::word::Word;

/// Points at or above this threshold are promoted to `∞`, which is
/// absorbing under both generators.
pub const OVERFLOW_THRESHOLD: f64 = 1e300;

/// One generator application with overflow promotion.
pub fn step(x: f64, symbol: u8, params: &SystemParams) -> f64 {
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let y = if symbol == 0 {
        params.a * x
    } else {
        params.b * x + 1.0
    };
    if y >= OVERFLOW_THRESHOLD {
        f64::INFINITY
    } else {
        y
    }
}

/// The fiber orbit `x_0, x_1, ..., x_n` driven by `word`.
#[derive(Clone, Debug)]
pub struct PathOrbit {
    pub points: Vec<f64>,
    /// Set if any step overflowed to `∞`.
    pub overflowed: bool,
}

pub fn path_orbit(word: &Word, x0: f64, params: &SystemParams) -> PathOrbit {
    let mut points = Vec::with_capacity(word.len() + 1);
    let mut overflowed = false;
    let mut x = x0;
    points.push(x);
    for s in word.symbols() {
        x = step(x, s, params);
        if x.is_infinite() {
            overflowed = true;
        }
        points.push(x);
    }
    PathOrbit { points, overflowed }
}

/// Uniform-weight empirical measure of the first `n` orbit points driven by
/// a sampled path of `nu`.
pub fn path_average(
    nu: &ShiftMeasure,
    x0: f64,
    n: usize,
    seed: u64,
    params: &SystemParams,
) -> PointMassMeasure {
    assert!(n >= 1);
    let word = nu.sample_path(n - 1, seed);
    let orbit = path_orbit(&word, x0, params);
    PointMassMeasure::empirical(&orbit.points)
}

/// The metric `d(x, y) = |1/(1+x) - 1/(1+y)|` on the compactified
/// half-line.
pub fn compact_metric(x: f64, y: f64) -> f64 {
    (to_u(x) - to_u(y)).abs()
}

/// One row of the contraction table.
#[derive(Clone, Copy, Debug)]
pub struct ContractionStep {
    pub x: f64,
    pub y: f64,
    /// `|ln x_k - ln y_k|`.
    pub log_distance: f64,
    /// `d(x_k, y_k)` in the compactified metric.
    pub metric_distance: f64,
}

/// Per-step contraction table for two fiber orbits under the same word.
///
/// In log coordinates `T0` is an isometry and `T1` has derivative strictly
/// below 1, so the log-distance column is non-increasing. The log distance
/// is carried through symbol-0 steps unchanged and recomputed through
/// symbol-1 steps from the separately tracked gap `x - y`, which keeps the
/// monotonicity visible even when the distance underflows the points'
/// floating resolution.
#[derive(Clone, Debug)]
pub struct ContractionDiagnostics {
    pub steps: Vec<ContractionStep>,
}

pub fn contraction_diagnostics(
    x: f64,
    y: f64,
    word: &Word,
    params: &SystemParams,
) -> ContractionDiagnostics {
    assert!(x > 0.0 && y > 0.0, "contraction diagnostics need x, y > 0");
    // Order so that lo <= hi; the table is symmetric in (x, y).
    let (mut lo, mut hi) = if x <= y { (x, y) } else { (y, x) };
    let mut gap = hi - lo;
    // ratio = gap / lo, so log distance = ln(1 + ratio). Symbol 0 scales gap
    // and lo alike, leaving the ratio untouched.
    let mut ratio = gap / lo;
    let mut steps = Vec::with_capacity(word.len() + 1);
    steps.push(ContractionStep {
        x: lo,
        y: hi,
        log_distance: ratio.ln_1p(),
        metric_distance: compact_metric(lo, hi),
    });
    for s in word.symbols() {
        if s == 0 {
            lo *= params.a;
            hi *= params.a;
            gap *= params.a;
        } else {
            gap *= params.b;
            let new_lo = params.b * lo + 1.0;
            ratio = gap / new_lo;
            lo = new_lo;
            hi = params.b * hi + 1.0;
        }
        steps.push(ContractionStep {
            x: lo,
            y: hi,
            log_distance: ratio.ln_1p(),
            metric_distance: compact_metric(lo, hi),
        });
    }
    ContractionDiagnostics { steps }
}

impl ContractionDiagnostics {
    /// Whether `|ln x_k - ln y_k|` never increases along the table.
    pub fn log_distance_monotone(&self) -> bool {
        self.steps
            .windows(2)
            .all(|w| w[1].log_distance <= w[0].log_distance)
    }

    /// Whether `d <= |ln x - ln y| / 4` holds at every step.
    pub fn quarter_bound_holds(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.metric_distance <= 0.25 * s.log_distance + 1e-15)
    }

    pub fn final_metric_distance(&self) -> f64 {
        self.steps.last().unwrap().metric_distance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::ShiftMeasure;

    fn params() -> SystemParams {
        SystemParams::new(0.5, 1.5).unwrap()
    }

    #[test]
    fn orbit_examples() {
        let p = params();
        let o = path_orbit(&"10".parse().unwrap(), 0.0, &p);
        assert_eq!(o.points, vec![0.0, 1.0, 0.5]);
        assert!(!o.overflowed);

        let zeros = Word::from_symbols(&[0, 0, 0]);
        let o = path_orbit(&zeros, 8.0, &p);
        assert_eq!(o.points, vec![8.0, 4.0, 2.0, 1.0]);
    }

    #[test]
    fn orbit_matches_composition() {
        let p = SystemParams::new_exact(1, 2, 4, 3).unwrap();
        let w: Word = "00110".parse().unwrap();
        let o = path_orbit(&w, 3.0, &p);
        let composed = crate::affine::compose(&w, &p).apply(3.0);
        assert!((o.points[5] - composed).abs() < 1e-12);
        assert!((o.points[5] - 11.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_promotes_and_absorbs() {
        let p = SystemParams::new(0.5, 1e100).unwrap();
        let w = Word::from_symbols(&[1, 1, 1, 1, 0, 1]);
        let o = path_orbit(&w, 1.0, &p);
        assert!(o.overflowed);
        let first_inf = o.points.iter().position(|x| x.is_infinite()).unwrap();
        assert!(o.points[first_inf..].iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn path_average_single_step_is_dirac() {
        let p = params();
        let nu = ShiftMeasure::bernoulli(0.5).unwrap();
        let m = path_average(&nu, 2.5, 1, 0, &p);
        assert_eq!(m.len(), 1);
        assert_eq!(m.mean(), 2.5);
    }

    #[test]
    fn compact_metric_values() {
        assert_eq!(compact_metric(7.0, 7.0), 0.0);
        assert_eq!(compact_metric(0.0, f64::INFINITY), 1.0);
        assert!((compact_metric(1.0, 3.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_equal_points_all_zero() {
        let p = params();
        let d = contraction_diagnostics(2.0, 2.0, &"0110".parse().unwrap(), &p);
        assert!(d.steps.iter().all(|s| s.log_distance == 0.0));
        assert!(d.steps.iter().all(|s| s.metric_distance == 0.0));
    }

    #[test]
    fn all_zero_word_is_log_isometry() {
        let p = params();
        let d = contraction_diagnostics(1.0, 5.0, &Word::from_symbols(&[0; 30]), &p);
        let first = d.steps[0].log_distance;
        assert!(d.steps.iter().all(|s| s.log_distance == first));
    }

    #[test]
    fn random_word_contracts() {
        let p = params();
        let nu = ShiftMeasure::bernoulli(0.5).unwrap();
        let w = nu.sample_path(200, 11);
        let d = contraction_diagnostics(1.0, 5.0, &w, &p);
        assert!(d.log_distance_monotone());
        assert!(d.quarter_bound_holds());
        assert!(d.final_metric_distance() <= 1e-6);
    }
}
