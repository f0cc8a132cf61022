//! Absolutely continuous invariant measures for the piecewise expanding
//! interval map built from the generator inverses, via the Ulam method:
//! transfer matrix, invariant density, support detection, itineraries and
//! reversed-block estimation of the driving measure's cylinder masses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::affine::SystemParams;
use crate::error::Error;
use crate::measure::{kolmogorov_distance, Cdf, PointMassMeasure};
use crate::sphere::DEFAULT_DEPTH_CAP;
use crate::word::Word;
use crate::Result;

/// The interval map
/// `T(x) = x/a` on `[(g-1)/b, g)` and `T(x) = (x-1)/b` on `[g, g/a]`,
/// acting on `I = [(g-1)/b, g/a]` for a threshold `g > 1`.
#[derive(Clone, Debug)]
pub struct AcimSystem {
    pub params: SystemParams,
    pub gamma: f64,
    /// Left endpoint of `I`.
    pub lo: f64,
    /// Right endpoint of `I`.
    pub hi: f64,
}

impl AcimSystem {
    pub fn new(params: SystemParams, gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidConfig(format!("need gamma > 1, got {gamma}")));
        }
        let lo = (gamma - 1.0) / params.b;
        let hi = gamma / params.a;
        let sys = AcimSystem {
            params,
            gamma,
            lo,
            hi,
        };
        // Both branches must map their lap endpoints back into I.
        let eps = 1e-9 * hi;
        for x in [lo, gamma - f64::EPSILON * gamma, gamma, hi] {
            let y = sys.apply_unchecked(x);
            if y < lo - eps || y > hi + eps {
                return Err(Error::InvalidConfig(format!(
                    "map does not send I into itself: T({x}) = {y} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(sys)
    }

    fn apply_unchecked(&self, x: f64) -> f64 {
        if x < self.gamma {
            x / self.params.a
        } else {
            (x - 1.0) / self.params.b
        }
    }

    /// Apply the map; errors outside `I`.
    pub fn t_map(&self, x: f64) -> Result<f64> {
        if x < self.lo || x > self.hi {
            return Err(Error::OutsideDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(self.apply_unchecked(x))
    }

    /// Lap index of a point: 0 on `[(g-1)/b, g)`, 1 on `[g, g/a]`.
    pub fn lap(&self, x: f64) -> u8 {
        u8::from(x >= self.gamma)
    }

    /// The length-`n` symbol record of the orbit of `x`.
    pub fn itinerary(&self, x: f64, n: usize) -> Result<Word> {
        if x < self.lo || x > self.hi {
            return Err(Error::OutsideDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let mut w = Word::empty();
        let mut cur = x;
        for _ in 0..n {
            w.push(self.lap(cur));
            cur = self.apply_unchecked(cur).clamp(self.lo, self.hi);
        }
        Ok(w)
    }
}

/// Invariant density of the Ulam discretization: a probability vector over
/// uniform bins of `I`.
#[derive(Clone, Debug)]
pub struct UlamDensity {
    pub lo: f64,
    pub hi: f64,
    /// Bin masses, nonnegative, summing to 1.
    pub mass: Vec<f64>,
    /// L1 distance between the vector and its image under the transfer
    /// matrix at the last iteration.
    pub residual: f64,
}

impl UlamDensity {
    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.mass.len() as f64
    }

    pub fn bin_left(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.bin_width()
    }

    /// Expectation of `f(x) = x` under the density (bin midpoints).
    pub fn mean(&self) -> f64 {
        let w = self.bin_width();
        self.mass
            .iter()
            .enumerate()
            .map(|(j, m)| m * (self.lo + (j as f64 + 0.5) * w))
            .sum()
    }

    /// Inverse-CDF sample from the piecewise-constant density.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let target: f64 = rng.random();
        let mut acc = 0.0;
        for (j, &m) in self.mass.iter().enumerate() {
            if acc + m >= target {
                let frac = if m > 0.0 { (target - acc) / m } else { 0.5 };
                return self.bin_left(j) + frac * self.bin_width();
            }
            acc += m;
        }
        self.hi
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_left,bin_right,mass")?;
        for (j, &m) in self.mass.iter().enumerate() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.bin_left(j),
                self.bin_left(j) + self.bin_width(),
                m
            )?;
        }
        Ok(())
    }
}

impl Cdf for UlamDensity {
    fn cdf_x(&self, x: f64) -> f64 {
        if x < self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let w = self.bin_width();
        let pos = (x - self.lo) / w;
        let j = (pos.floor() as usize).min(self.mass.len() - 1);
        let head: f64 = self.mass[..j].iter().sum();
        head + self.mass[j] * (pos - j as f64)
    }

    fn breakpoints_x(&self) -> Vec<f64> {
        (0..=self.mass.len()).map(|j| self.lo + j as f64 * self.bin_width()).collect()
    }
}

/// Row-sparse Ulam transfer matrix: entry `(i, j)` is the fraction of bin
/// `i` mapped into bin `j`, computed from the two monotone affine branches.
pub struct UlamMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl UlamMatrix {
    pub fn assemble(sys: &AcimSystem, bins: usize) -> Self {
        let lo = sys.lo;
        let width = (sys.hi - sys.lo) / bins as f64;
        let rows: Vec<Vec<(usize, f64)>> = (0..bins)
            .into_par_iter()
            .map(|i| {
                let left = lo + i as f64 * width;
                let right = left + width;
                let mut row: Vec<(usize, f64)> = Vec::new();
                // Split the bin at the lap boundary if it crosses it.
                let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(2);
                if left < sys.gamma && sys.gamma < right {
                    pieces.push((left, sys.gamma));
                    pieces.push((sys.gamma, right));
                } else {
                    pieces.push((left, right));
                }
                for (pl, pr) in pieces {
                    if pr <= pl {
                        continue;
                    }
                    let frac = (pr - pl) / width;
                    // Affine branch: images of the piece endpoints.
                    let mid = 0.5 * (pl + pr);
                    let (il, ir) = if mid < sys.gamma {
                        (pl / sys.params.a, pr / sys.params.a)
                    } else {
                        ((pl - 1.0) / sys.params.b, (pr - 1.0) / sys.params.b)
                    };
                    let (ilo, ihi) = (il.min(ir), il.max(ir));
                    let span = ihi - ilo;
                    if span <= 0.0 {
                        continue;
                    }
                    // Distribute the piece's fraction over the target bins it
                    // overlaps, proportionally to overlap length.
                    let j_lo = (((ilo - lo) / width).floor() as isize).max(0) as usize;
                    let j_hi = ((((ihi - lo) / width).ceil() as isize).max(1) as usize).min(bins);
                    for j in j_lo..j_hi {
                        let bl = lo + j as f64 * width;
                        let br = bl + width;
                        let overlap = (ihi.min(br) - ilo.max(bl)).max(0.0);
                        if overlap > 0.0 {
                            row.push((j, frac * overlap / span));
                        }
                    }
                }
                row
            })
            .collect();
        UlamMatrix { rows }
    }

    pub fn bins(&self) -> usize {
        self.rows.len()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|(_, w)| w).sum())
            .collect()
    }

    /// One application of the adjoint on densities: `out_j = sum_i v_i P_ij`.
    pub fn push(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for &(j, w) in row {
                out[j] += vi * w;
            }
        }
        out
    }
}

/// Leading eigenvector of the Ulam matrix by power iteration.
pub fn ulam_density(sys: &AcimSystem, bins: usize, iters: usize) -> Result<UlamDensity> {
    assert!(bins >= 64, "Ulam discretization needs at least 64 bins");
    let matrix = UlamMatrix::assemble(sys, bins);
    let mut v = vec![1.0 / bins as f64; bins];
    let mut residual = f64::INFINITY;
    for _ in 0..iters {
        let pushed = matrix.push(&v);
        residual = v
            .iter()
            .zip(&pushed)
            .map(|(a, b)| (a - b).abs())
            .sum();
        // Damped update: averaging with the previous iterate suppresses the
        // oscillating modes that plain power iteration cannot damp when the
        // transfer matrix cycles support components periodically.
        let mut next: Vec<f64> = v
            .iter()
            .zip(&pushed)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let total: f64 = next.iter().sum();
        for x in &mut next {
            *x /= total;
        }
        v = next;
        if residual <= 1e-14 {
            break;
        }
    }
    if residual > 1e-8 {
        return Err(Error::NoConvergence {
            residual,
            iters,
        });
    }
    Ok(UlamDensity {
        lo: sys.lo,
        hi: sys.hi,
        mass: v,
        residual,
    })
}

/// A maximal run of bins carrying mass above the detection threshold.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SupportInterval {
    pub left: f64,
    pub right: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SupportReport {
    pub intervals: Vec<SupportInterval>,
    pub hull_left: f64,
    pub hull_right: f64,
}

/// Detect the support as runs of bins with mass above
/// `threshold / bin_count` (i.e. `threshold` relative to the uniform mass).
pub fn support_intervals(density: &UlamDensity, threshold: f64) -> Result<SupportReport> {
    let cutoff = threshold / density.bins() as f64;
    let mut intervals: Vec<SupportInterval> = Vec::new();
    let mut run: Option<(usize, f64)> = None;
    for (j, &m) in density.mass.iter().enumerate() {
        if m > cutoff {
            run = match run {
                None => Some((j, m)),
                Some((start, acc)) => Some((start, acc + m)),
            };
        } else if let Some((start, acc)) = run.take() {
            intervals.push(SupportInterval {
                left: density.bin_left(start),
                right: density.bin_left(j),
                mass: acc,
            });
        }
    }
    if let Some((start, acc)) = run {
        intervals.push(SupportInterval {
            left: density.bin_left(start),
            right: density.hi,
            mass: acc,
        });
    }
    if intervals.is_empty() {
        return Err(Error::InsufficientSamples(
            "no bins above the support threshold".into(),
        ));
    }
    Ok(SupportReport {
        hull_left: intervals[0].left,
        hull_right: intervals.last().unwrap().right,
        intervals,
    })
}

/// Empirical cylinder-mass table at a fixed depth, indexed by packed word
/// bits (`w_0` is bit 0).
#[derive(Clone, Debug)]
pub struct CylinderTable {
    pub depth: u32,
    /// `freq[bits]` is the estimated cylinder mass of the word encoded by
    /// `bits`.
    pub freq: Vec<f64>,
}

impl CylinderTable {
    pub fn mass(&self, word: &Word) -> f64 {
        assert_eq!(word.len(), self.depth as usize);
        let mut bits = 0usize;
        for (i, s) in word.symbols().enumerate() {
            bits |= (s as usize) << i;
        }
        self.freq[bits]
    }

    /// Lyapunov exponent estimated from depth-1 masses (or from marginal
    /// frequencies at higher depth).
    pub fn lyapunov(&self, params: &SystemParams) -> f64 {
        // Mass of C_0 = sum over words starting with symbol 0 (bit 0 clear).
        let p0: f64 = self
            .freq
            .iter()
            .enumerate()
            .filter(|(bits, _)| bits & 1 == 0)
            .map(|(_, &f)| f)
            .sum();
        p0 * params.a.ln() + (1.0 - p0) * params.b.ln()
    }
}

const ITINERARY_BURN_IN: usize = 1000;

/// Estimate the cylinder masses of the shift measure generated by the
/// interval map, by reversed-block frequencies.
///
/// The driving measure reads the itinerary process backwards (it projects
/// the two-sided extension onto negative coordinates), so the mass of a
/// cylinder word is the stationary frequency of its reversed block in long
/// forward itineraries. Starting points are drawn from the converged Ulam
/// density with a burn-in.
pub fn nu_gamma_cylinders(
    sys: &AcimSystem,
    density: &UlamDensity,
    depth: u32,
    steps: usize,
    seed: u64,
) -> Result<CylinderTable> {
    if depth > 12 {
        return Err(Error::InvalidConfig(format!(
            "cylinder depth {depth} exceeds 12"
        )));
    }
    let window = depth as usize;
    if steps < window.max(1) * 100 {
        return Err(Error::InsufficientSamples(format!(
            "{steps} itinerary steps is too short for depth {depth}"
        )));
    }
    if depth == 0 {
        return Ok(CylinderTable {
            depth,
            freq: vec![1.0],
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = density.sample(&mut rng);
    for _ in 0..ITINERARY_BURN_IN {
        x = sys.apply_unchecked(x).clamp(sys.lo, sys.hi);
    }
    let mask = (1usize << depth) - 1;
    let mut counts = vec![0u64; 1 << depth];
    // Sliding window of the last `depth` symbols, oldest in the low bit.
    let mut window_bits = 0usize;
    let mut filled = 0usize;
    let mut total = 0u64;
    for _ in 0..steps {
        let s = sys.lap(x) as usize;
        window_bits = ((window_bits << 1) | s) & mask;
        if filled + 1 < window {
            filled += 1;
        } else {
            // `window_bits` holds the block with the newest symbol in bit 0
            // after reversal; bit i of the key is the block's i-th symbol
            // counted backwards, which is exactly the reversed block.
            counts[window_bits] += 1;
            total += 1;
        }
        x = sys.apply_unchecked(x).clamp(sys.lo, sys.hi);
    }
    let freq = counts
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect();
    Ok(CylinderTable { depth, freq })
}

/// End-to-end consistency: drive a sphere average with the empirical
/// cylinder masses and compare it against the Ulam measure.
pub fn theorem_g_roundtrip(
    sys: &AcimSystem,
    density: &UlamDensity,
    table: &CylinderTable,
    x: f64,
    n: u32,
) -> Result<f64> {
    if n != table.depth {
        return Err(Error::InvalidConfig(format!(
            "cylinder table depth {} does not match sphere depth {n}",
            table.depth
        )));
    }
    if n > DEFAULT_DEPTH_CAP {
        return Err(Error::DepthCapExceeded {
            requested: n,
            cap: DEFAULT_DEPTH_CAP,
        });
    }
    let mut atoms = Vec::with_capacity(1 << n);
    for bits in 0..1u64 << n {
        let word = Word::from_index(n, bits);
        let weight = table.freq[bits as usize];
        if weight == 0.0 {
            continue;
        }
        let value = crate::affine::compose(&word, &sys.params).apply(x);
        atoms.push((value, weight));
    }
    let sphere = PointMassMeasure::new(atoms)?;
    Ok(kolmogorov_distance(&sphere, density))
}
