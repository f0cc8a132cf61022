//! Cylinder-weighted sphere averages: the exact enumeration of
//! `sum over words w of length n of nu(C_w) * delta at T_w(x)`.

use rayon::prelude::*;

use crate::affine::{AffineMap, SystemParams};
use crate::error::Error;
use crate::measure::{kolmogorov_distance, PointMassMeasure};
use crate::shift::ShiftMeasure;
use crate::Result;

pub const DEFAULT_DEPTH_CAP: u32 = 24;

/// Markov cylinder weights need the last symbol of the prefix; `None`
/// marks the empty prefix (next factor is the stationary mass).
type PrefixState = Option<u8>;

fn weight_step(nu: &ShiftMeasure, state: PrefixState, symbol: u8) -> f64 {
    match nu {
        ShiftMeasure::Bernoulli { p } => {
            if symbol == 0 {
                *p
            } else {
                1.0 - *p
            }
        }
        ShiftMeasure::Markov {
            transition,
            stationary,
        } => match state {
            None => stationary[symbol as usize],
            Some(prev) => transition[prev as usize][symbol as usize],
        },
    }
}

/// Depth-first sweep sharing prefixes: each of the `2^n` leaves costs O(1)
/// arithmetic on an accumulated `(slope, intercept, weight)` triple. Leaves
/// are emitted in lexicographic word order.
fn enumerate_leaves(
    nu: &ShiftMeasure,
    x: f64,
    depth: u32,
    map: AffineMap,
    weight: f64,
    state: PrefixState,
    params: &SystemParams,
    out: &mut Vec<(f64, f64)>,
) {
    if depth == 0 {
        out.push((map.apply(x), weight));
        return;
    }
    for symbol in [0u8, 1u8] {
        enumerate_leaves(
            nu,
            x,
            depth - 1,
            map.then_generator(symbol, params),
            weight * weight_step(nu, state, symbol),
            Some(symbol),
            params,
            out,
        );
    }
}

fn sphere_atoms(
    nu: &ShiftMeasure,
    x: f64,
    n: u32,
    params: &SystemParams,
) -> Vec<(f64, f64)> {
    // Split on the first few symbols and run the subtrees in parallel; the
    // merge order is fixed by prefix index, so the result is reproducible.
    let split = n.min(4);
    let blocks: Vec<Vec<(f64, f64)>> = (0u32..1 << split)
        .into_par_iter()
        .map(|prefix| {
            let mut map = AffineMap::identity();
            let mut weight = 1.0;
            let mut state: PrefixState = None;
            for i in (0..split).rev() {
                let symbol = ((prefix >> i) & 1) as u8;
                map = map.then_generator(symbol, params);
                weight *= weight_step(nu, state, symbol);
                state = Some(symbol);
            }
            let mut out = Vec::with_capacity(1 << (n - split));
            enumerate_leaves(nu, x, n - split, map, weight, state, params, &mut out);
            out
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

/// The weighted sphere measure over all words of length `n` applied to `x`.
pub fn sphere_measure(
    nu: &ShiftMeasure,
    x: f64,
    n: u32,
    params: &SystemParams,
) -> Result<PointMassMeasure> {
    sphere_measure_capped(nu, x, n, params, DEFAULT_DEPTH_CAP)
}

pub fn sphere_measure_capped(
    nu: &ShiftMeasure,
    x: f64,
    n: u32,
    params: &SystemParams,
    cap: u32,
) -> Result<PointMassMeasure> {
    if n > cap {
        return Err(Error::DepthCapExceeded {
            requested: n,
            cap,
        });
    }
    PointMassMeasure::new(sphere_atoms(nu, x, n, params))
}

/// One-step refinement residual for Bernoulli driving measures: the sphere
/// measure at depth `n + 1` against the transfer-operator pushforward of the
/// depth-`n` sphere measure. The identity is algebraic, so the residual must
/// vanish to floating precision.
///
/// The pushforward extends each depth-`n` `(slope, intercept)` pair by one
/// generator exactly as the depth-`n+1` sweep does, so both sides follow the
/// same arithmetic path.
pub fn refinement_check(
    nu: &ShiftMeasure,
    x: f64,
    n: u32,
    params: &SystemParams,
) -> Result<f64> {
    let ShiftMeasure::Bernoulli { p } = nu else {
        return Err(Error::BernoulliRequired);
    };
    let deeper = sphere_measure(nu, x, n + 1, params)?;

    // Depth-n leaves kept as affine maps, then pushed through one generator.
    let mut maps: Vec<(AffineMap, f64)> = Vec::with_capacity(1 << n);
    collect_maps(
        *p,
        n,
        AffineMap::identity(),
        1.0,
        params,
        &mut maps,
    );
    let mut pushed: Vec<(f64, f64)> = Vec::with_capacity(1 << (n + 1));
    for (map, weight) in maps {
        for symbol in [0u8, 1u8] {
            let w = weight * if symbol == 0 { *p } else { 1.0 - *p };
            pushed.push((map.then_generator(symbol, params).apply(x), w));
        }
    }
    let pushed = PointMassMeasure::new(pushed)?;
    Ok(kolmogorov_distance(&deeper, &pushed))
}

fn collect_maps(
    p: f64,
    depth: u32,
    map: AffineMap,
    weight: f64,
    params: &SystemParams,
    out: &mut Vec<(AffineMap, f64)>,
) {
    if depth == 0 {
        out.push((map, weight));
        return;
    }
    for symbol in [0u8, 1u8] {
        let w = weight * if symbol == 0 { p } else { 1.0 - p };
        collect_maps(p, depth - 1, map.then_generator(symbol, params), w, params, out);
    }
}
