//! Measures on the compactified half-line and the sup-CDF distance between
//! them.
//!
//! The compactified coordinate is `u = 1/(1+x)`, mapping `[0, ∞]` onto
//! `[0, 1]` with `u = 0` encoding `∞`. Grid measures live on a uniform grid
//! in `u` so a finite grid covers the whole space; the sup distance between
//! CDFs metrizes weak-* convergence for the test functions used here.

use crate::error::Error;
use crate::Result;

const MASS_TOL: f64 = 1e-9;

/// `u = 1/(1+x)` with `1/(1+∞) = 0`.
pub fn to_u(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + x)
    }
}

/// Inverse of [`to_u`]; `u = 0` maps to `∞`.
pub fn from_u(u: f64) -> f64 {
    if u <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / u - 1.0
    }
}

/// Distribution-function view of a measure on `[0, ∞]`.
pub trait Cdf {
    /// `mu([0, x])` for finite `x >= 0`.
    fn cdf_x(&self, x: f64) -> f64;

    /// `mu([0, x))`, the left limit. Defaults to [`Cdf::cdf_x`] for
    /// atom-free representations.
    fn cdf_x_left(&self, x: f64) -> f64 {
        self.cdf_x(x)
    }

    fn mass_at_infinity(&self) -> f64 {
        0.0
    }

    /// Finite locations where the CDF can kink or jump; the sup distance is
    /// attained at such points (or at `∞`, handled separately).
    fn breakpoints_x(&self) -> Vec<f64>;
}

/// Sup over the compactified line of the absolute CDF difference,
/// a value in `[0, 1]`.
pub fn kolmogorov_distance(m1: &dyn Cdf, m2: &dyn Cdf) -> f64 {
    let mut cands = m1.breakpoints_x();
    cands.extend(m2.breakpoints_x());
    cands.retain(|x| x.is_finite());
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    // The u = 0 endpoint: total finite masses differ by the infinity-mass gap.
    let mut d = (m1.mass_at_infinity() - m2.mass_at_infinity()).abs();
    for &x in &cands {
        d = d
            .max((m1.cdf_x(x) - m2.cdf_x(x)).abs())
            .max((m1.cdf_x_left(x) - m2.cdf_x_left(x)).abs());
    }
    d
}

/// A finite weighted collection of point masses on `[0, ∞]`.
#[derive(Clone, Debug)]
pub struct PointMassMeasure {
    /// Finite atom locations, sorted ascending.
    xs: Vec<f64>,
    /// Cumulative weights; `cum[i]` is the mass of atoms `0..=i`.
    cum: Vec<f64>,
    mass_inf: f64,
}

impl PointMassMeasure {
    /// Build from `(location, weight)` pairs; weights must be nonnegative
    /// and sum to 1 within `1e-12`. `f64::INFINITY` locations are allowed.
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        let mut total = 0.0;
        let mut mass_inf = 0.0;
        for &(x, w) in &points {
            if w < 0.0 || x < 0.0 || x.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "invalid atom ({x}, {w}): need x >= 0 and weight >= 0"
                )));
            }
            total += w;
            if x.is_infinite() {
                mass_inf += w;
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidConfig(format!(
                "atom weights sum to {total}, not 1"
            )));
        }
        // Scale away accumulated summation error so cumulative masses end
        // exactly at 1.
        for (_, w) in &mut points {
            *w /= total;
        }
        mass_inf /= total;
        points.retain(|(x, _)| x.is_finite());
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        let mut xs = Vec::with_capacity(points.len());
        for (x, w) in points {
            acc += w;
            xs.push(x);
            cum.push(acc);
        }
        Ok(PointMassMeasure { xs, cum, mass_inf })
    }

    pub fn dirac(x: f64) -> Self {
        PointMassMeasure::new(vec![(x, 1.0)]).expect("unit atom")
    }

    /// Uniform-weight empirical measure of a finite orbit.
    pub fn empirical(orbit: &[f64]) -> Self {
        assert!(!orbit.is_empty());
        let w = 1.0 / orbit.len() as f64;
        PointMassMeasure::new(orbit.iter().map(|&x| (x, w)).collect())
            .expect("uniform weights are normalized")
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty() && self.mass_inf == 0.0
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().enumerate().map(|(i, &x)| {
            let prev = if i == 0 { 0.0 } else { self.cum[i - 1] };
            (x, self.cum[i] - prev)
        })
    }

    /// First moment, `∞` if any mass sits at infinity.
    pub fn mean(&self) -> f64 {
        if self.mass_inf > 0.0 {
            return f64::INFINITY;
        }
        self.atoms().map(|(x, w)| x * w).sum()
    }

    /// Mass of the closed interval `[lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        self.cdf_x(hi) - self.cdf_x_left(lo)
    }
}

impl Cdf for PointMassMeasure {
    fn cdf_x(&self, x: f64) -> f64 {
        // Mass of atoms with location <= x.
        let idx = self.xs.partition_point(|&a| a <= x);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    fn cdf_x_left(&self, x: f64) -> f64 {
        let idx = self.xs.partition_point(|&a| a < x);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    fn mass_at_infinity(&self) -> f64 {
        self.mass_inf
    }

    fn breakpoints_x(&self) -> Vec<f64> {
        self.xs.clone()
    }
}

/// A measure represented by its CDF sampled on a uniform grid in
/// `u = 1/(1+x)`, linearly interpolated between nodes.
///
/// Node `i` of `0..n` sits at `u_i = i/(n-1)`; the stored value is
/// `mu([0, x(u_i)])`, non-increasing in `i` (node 0 is `x = ∞`, node `n-1`
/// is `x = 0`).
#[derive(Clone, Debug)]
pub struct GridMeasure {
    /// CDF in `x` at the grid nodes, indexed by the `u` grid.
    cdf: Vec<f64>,
    mass_inf: f64,
}

impl GridMeasure {
    pub fn nodes(&self) -> usize {
        self.cdf.len()
    }

    pub fn node_u(&self, i: usize) -> f64 {
        i as f64 / (self.cdf.len() - 1) as f64
    }

    pub fn node_x(&self, i: usize) -> f64 {
        from_u(self.node_u(i))
    }

    pub fn node_cdf(&self, i: usize) -> f64 {
        self.cdf[i]
    }

    pub fn mass_at_infinity_value(&self) -> f64 {
        self.mass_inf
    }

    /// The point mass at a finite `x >= 0`, sampled on `n` nodes.
    pub fn dirac(x: f64, n: usize) -> Self {
        assert!(n >= 2 && x >= 0.0 && x.is_finite());
        let ux = to_u(x);
        let cdf = (0..n)
            .map(|i| {
                let u = i as f64 / (n - 1) as f64;
                if u <= ux {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        GridMeasure { cdf, mass_inf: 0.0 }
    }

    /// Build from raw node values (used by deserialization and tests).
    pub fn from_node_cdf(cdf: Vec<f64>, mass_inf: f64) -> Result<Self> {
        if cdf.len() < 2 {
            return Err(Error::InvalidConfig("grid needs at least 2 nodes".into()));
        }
        for w in cdf.windows(2) {
            if w[1] > w[0] + MASS_TOL {
                return Err(Error::InvalidConfig(
                    "grid CDF must be non-increasing along u".into(),
                ));
            }
        }
        Ok(GridMeasure { cdf, mass_inf })
    }

    /// Pointwise sup-norm between two grids on the same node set.
    pub fn sup_diff(&self, other: &GridMeasure) -> f64 {
        assert_eq!(self.cdf.len(), other.cdf.len());
        self.cdf
            .iter()
            .zip(&other.cdf)
            .map(|(a, b)| (a - b).abs())
            .fold((self.mass_inf - other.mass_inf).abs(), f64::max)
    }

    /// Mass of the closed interval `[lo, hi]` (up to grid resolution).
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf_x(hi) - self.cdf_x(lo)).max(0.0)
    }

    /// One CDF grid cell of mass resolution: the largest change across a
    /// single cell.
    pub fn cell_resolution(&self) -> f64 {
        self.cdf
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .fold(0.0, f64::max)
    }

    /// First or second moment by cellwise midpoint quadrature.
    pub fn moment(&self, order: u32) -> f64 {
        assert!(order == 1 || order == 2);
        let n = self.cdf.len();
        let mut total = 0.0;
        for i in 0..n - 1 {
            // Cell between nodes i and i+1; x decreases with i.
            let mass = self.cdf[i] - self.cdf[i + 1];
            if mass <= 0.0 {
                continue;
            }
            let x_hi = self.node_x(i);
            let x_lo = self.node_x(i + 1);
            // The u ~ 0 cell reaches x = ∞; evaluate at its finite edge. The
            // tail mass there is negligible for any measure with finite
            // moments on this grid size.
            let x_mid = if x_hi.is_finite() {
                0.5 * (x_lo + x_hi)
            } else {
                x_lo
            };
            total += mass * x_mid.powi(order as i32);
        }
        total
    }

    /// Quantile map: the increasing `H` with `mu([0, H(s)]) = s`, by inverse
    /// linear interpolation of the grid CDF. Requires zero mass at infinity.
    pub fn quantile(&self, s: f64) -> f64 {
        assert!((0.0..1.0).contains(&s), "quantile wants s in [0, 1)");
        let n = self.cdf.len();
        if s <= self.cdf[n - 1] {
            return 0.0;
        }
        // cdf is non-increasing in i; find the cell with cdf[i] >= s >= cdf[i+1].
        let i = self.cdf.partition_point(|&c| c >= s);
        if i == 0 {
            // s exceeds the total finite mass.
            return f64::INFINITY;
        }
        // partition_point gives first index with cdf < s; the cell is i-1..i.
        let (hi_i, lo_i) = (i - 1, i.min(n - 1));
        let (c_hi, c_lo) = (self.cdf[hi_i], self.cdf[lo_i]);
        let u_hi = self.node_u(hi_i);
        let u_lo = self.node_u(lo_i);
        if c_hi <= c_lo {
            return from_u(0.5 * (u_hi + u_lo));
        }
        let t = (s - c_lo) / (c_hi - c_lo);
        // CDF in x increases as u decreases; interpolate in u.
        let u = u_lo + t * (u_hi - u_lo);
        from_u(u)
    }

    /// CSV rows `u,x,cdf` from the `x = 0` end outward, 17 significant
    /// digits so byte-identity is checkable.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,x,cdf")?;
        for i in (0..self.cdf.len()).rev() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.node_u(i),
                self.node_x(i),
                self.cdf[i]
            )?;
        }
        Ok(())
    }
}

impl Cdf for GridMeasure {
    fn cdf_x(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let n = self.cdf.len();
        let u = to_u(x);
        let pos = u * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        // Value at u interpolates between nodes i (smaller u, larger x) and i+1.
        self.cdf[i] * (1.0 - frac) + self.cdf[i + 1] * frac
    }

    fn mass_at_infinity(&self) -> f64 {
        self.mass_inf
    }

    fn breakpoints_x(&self) -> Vec<f64> {
        (1..self.cdf.len()).map(|i| self.node_x(i)).collect()
    }
}

pub(crate) fn grid_from_cdf_unchecked(cdf: Vec<f64>, mass_inf: f64) -> GridMeasure {
    GridMeasure { cdf, mass_inf }
}

/// An analytic CDF on `[0, ∞)` given by a closure, with a sampling grid
/// for breakpoint candidates.
pub struct FnCdf<F: Fn(f64) -> f64> {
    f: F,
    grid: Vec<f64>,
}

impl<F: Fn(f64) -> f64> FnCdf<F> {
    pub fn new(f: F, x_max: f64, samples: usize) -> Self {
        let grid = (0..=samples)
            .map(|i| x_max * i as f64 / samples as f64)
            .collect();
        FnCdf { f, grid }
    }
}

impl<F: Fn(f64) -> f64> Cdf for FnCdf<F> {
    fn cdf_x(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn breakpoints_x(&self) -> Vec<f64> {
        self.grid.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_cdf_and_distance() {
        let m = PointMassMeasure::new(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(m.cdf_x(0.5), 0.0);
        assert_eq!(m.cdf_x(1.0), 0.5);
        assert_eq!(m.cdf_x_left(1.0), 0.0);
        assert_eq!(m.cdf_x(10.0), 1.0);
        assert_eq!(kolmogorov_distance(&m, &m), 0.0);
    }

    #[test]
    fn delta_zero_vs_delta_infinity() {
        let d0 = PointMassMeasure::dirac(0.0);
        let dinf = PointMassMeasure::dirac(f64::INFINITY);
        assert_eq!(kolmogorov_distance(&d0, &dinf), 1.0);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(PointMassMeasure::new(vec![(1.0, 0.7)]).is_err());
        assert!(PointMassMeasure::new(vec![(1.0, -0.5), (2.0, 1.5)]).is_err());
    }

    #[test]
    fn grid_dirac_and_interpolation() {
        let g = GridMeasure::dirac(1.0, 1001);
        assert!(g.cdf_x(0.2) < 1e-12);
        assert!((g.cdf_x(5.0) - 1.0).abs() < 1e-12);
        // The step sits at u = 0.5.
        assert!((g.moment(1) - 1.0).abs() < 0.01);
    }

    #[test]
    fn grid_vs_point_distance_small_for_same_atom() {
        let g = GridMeasure::dirac(2.0, 4097);
        let p = PointMassMeasure::dirac(2.0);
        // Only the interpolation cell around the atom differs.
        assert!(kolmogorov_distance(&g, &p) <= 1.0);
        assert!(g.sup_diff(&g) == 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        // Uniform-like grid measure: cdf linear in u.
        let n = 257;
        let cdf: Vec<f64> = (0..n).map(|i| 1.0 - i as f64 / (n - 1) as f64).collect();
        let g = GridMeasure::from_node_cdf(cdf, 0.0).unwrap();
        assert_eq!(g.quantile(0.0), 0.0);
        let mut prev = -1.0;
        for k in 0..100 {
            let s = k as f64 / 100.0;
            let x = g.quantile(s);
            assert!(x >= prev);
            prev = x;
            assert!((g.cdf_x(x) - s).abs() < 1e-9, "s={s} x={x}");
        }
    }

    #[test]
    fn compact_metric_equivalence() {
        assert_eq!(to_u(0.0), 1.0);
        assert_eq!(to_u(f64::INFINITY), 0.0);
        assert!((to_u(1.0) - to_u(3.0) - 0.25).abs() < 1e-15);
        assert!((from_u(0.25) - 3.0).abs() < 1e-15);
    }
}
