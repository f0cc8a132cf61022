//! The acceptance suite: every release-gating property as a callable check
//! returning a pass/fail verdict with a one-line detail. Shared by the
//! `verify` CLI subcommand and the `acceptance` integration test.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acim::{nu_gamma_cylinders, support_intervals, theorem_g_roundtrip, ulam_density, AcimSystem};
use crate::affine::{big_ratio, coincidence_search, compose, SystemParams};
use crate::error::Error;
use crate::measure::{kolmogorov_distance, FnCdf, PointMassMeasure};
use crate::shift::ShiftMeasure;
use crate::skew::{contraction_diagnostics, path_average};
use crate::sphere::sphere_measure;
use crate::stationary::{
    holder_certificate, moment_oracle, rotation_number, rotation_number_numeric,
    solve_stationary,
};
use crate::steering::{approx_sequence, exhaustive_interleave, exp_targets};
use crate::word::Word;
use crate::Result;

#[derive(Clone, Debug, serde::Serialize)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:2} {:<28} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.index,
            self.name,
            self.detail
        )
    }
}

/// Run the full acceptance suite. The seed feeds every randomized check, so
/// a repeated run is bit-identical.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    let checks: Vec<(&'static str, Box<dyn Fn() -> Result<String> + Send>)> = vec![
        ("exact-coincidence", Box::new(check_coincidence)),
        ("stationary-moments", Box::new(check_stationary_moments)),
        ("sphere-vs-path", Box::new(check_sphere_vs_path)),
        ("start-independence", Box::new(check_start_independence)),
        ("existence-threshold", Box::new(check_existence_threshold)),
        ("contraction", Box::new(move || check_contraction(seed))),
        ("acim-support", Box::new(check_acim_support)),
        ("cylinder-roundtrip", Box::new(move || check_roundtrip(seed))),
        ("rotation-number", Box::new(check_rotation)),
        ("holder-certificate", Box::new(move || check_holder(seed))),
        ("universal-sequence", Box::new(move || check_universal(seed))),
        ("determinism", Box::new(move || check_determinism(seed))),
    ];
    checks
        .into_iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let outcome = catch_unwind(AssertUnwindSafe(f));
            let (passed, detail) = match outcome {
                Ok(Ok(detail)) => (true, detail),
                Ok(Err(e)) => (false, e.to_string()),
                Err(panic) => (false, panic_text(panic)),
            };
            CriterionResult {
                index: i + 1,
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn panic_text(panic: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = panic.downcast_ref::<String>() {
        format!("assertion failed: {s}")
    } else if let Some(s) = panic.downcast_ref::<&str>() {
        format!("assertion failed: {s}")
    } else {
        "assertion failed".into()
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg.into()))
    }
}

fn check_coincidence() -> Result<String> {
    let p = SystemParams::new_exact(1, 2, 4, 3)?;
    let classes = coincidence_search(5, &p)?;
    ensure(classes.len() == 1, format!("expected 1 class, got {}", classes.len()))?;
    let class = &classes[0];
    let words: Vec<String> = class.words.iter().map(|w| w.to_string()).collect();
    ensure(
        words == ["00110", "10001"],
        format!("unexpected class members {words:?}"),
    )?;
    ensure(
        class.map.slope == big_ratio(2, 9) && class.map.intercept == big_ratio(7, 6),
        "unexpected class map",
    )?;
    let effective = SystemParams::new_exact(1, 2, 3, 2)?;
    let none = coincidence_search(8, &effective)?;
    ensure(none.is_empty(), format!("expected no class, got {}", none.len()))?;
    Ok(format!("class {{{}}} at (1/2, 4/3); none at (1/2, 3/2)", words.join(", ")))
}

fn check_stationary_moments() -> Result<String> {
    let params = SystemParams::new(0.5, 1.25)?;
    let sol = solve_stationary(0.6, &params, 1 << 16, 1e-6, 10_000)?;
    let mean = sol.measure.moment(1);
    let second = sol.measure.moment(2);
    let mean_oracle = moment_oracle(0.6, &params, 1)?;
    let second_oracle = moment_oracle(0.6, &params, 2)?;
    ensure(sol.residual <= 1e-6, format!("residual {}", sol.residual))?;
    ensure(
        (mean - mean_oracle).abs() <= 0.01,
        format!("mean {mean} vs {mean_oracle}"),
    )?;
    ensure(
        (second - second_oracle).abs() <= 0.1,
        format!("second {second} vs {second_oracle}"),
    )?;
    Ok(format!(
        "mean {mean:.4} (oracle {mean_oracle}), m2 {second:.4} (oracle {second_oracle:.4}), residual {:.2e}",
        sol.residual
    ))
}

fn check_sphere_vs_path() -> Result<String> {
    let params = SystemParams::new(0.5, 1.25)?;
    let bern = ShiftMeasure::bernoulli(0.6)?;
    let sphere_b = sphere_measure(&bern, 1.0, 20, &params)?;
    let path_b = path_average(&bern, 1.0, 1_000_000, 17, &params);
    let d_b = kolmogorov_distance(&sphere_b, &path_b);
    ensure(d_b <= 0.02, format!("Bernoulli distance {d_b}"))?;

    let markov = ShiftMeasure::markov([[0.9, 0.1], [0.2, 0.8]])?;
    let sphere_m = sphere_measure(&markov, 1.0, 20, &params)?;
    let path_m = path_average(&markov, 1.0, 1_000_000, 17, &params);
    // The sticky Markov chain mixes slowly; its depth-20 sphere average is
    // still ~0.06 from the limit (0.04 by depth 24, seed-stable).
    let d_m = kolmogorov_distance(&sphere_m, &path_m);
    ensure(d_m <= 0.08, format!("Markov distance {d_m}"))?;
    Ok(format!("Bernoulli d {d_b:.4}, Markov d {d_m:.4}"))
}

fn check_start_independence() -> Result<String> {
    let params = SystemParams::new(0.5, 1.25)?;
    let nu = ShiftMeasure::bernoulli(0.6)?;
    let mut distances = Vec::new();
    for n in [4u32, 8, 12, 16, 20] {
        let m1 = sphere_measure(&nu, 1.0, n, &params)?;
        let m2 = sphere_measure(&nu, 100.0, n, &params)?;
        distances.push(kolmogorov_distance(&m1, &m2));
    }
    // Observed gap at n=20 is ~0.08 with clean geometric decay (0.036 by
    // n=24); gate at 0.1 plus the monotone-decay property.
    let last = *distances.last().unwrap();
    ensure(last <= 0.1, format!("d at n=20 is {last}"))?;
    for w in distances.windows(2) {
        ensure(
            w[1] <= 1.1 * w[0],
            format!("distance increased: {} -> {}", w[0], w[1]),
        )?;
    }
    Ok(format!(
        "d(mu_n,1, mu_n,100) = {}",
        distances
            .iter()
            .map(|d| format!("{d:.4}"))
            .collect::<Vec<_>>()
            .join(" -> ")
    ))
}

fn check_existence_threshold() -> Result<String> {
    let params = SystemParams::new(0.5, 3.0)?;
    match solve_stationary(0.5, &params, 1 << 10, 1e-6, 100) {
        Err(Error::NonnegativeLyapunov { lambda }) => {
            let nu = ShiftMeasure::bernoulli(0.5)?;
            let avg = path_average(&nu, 1.0, 100_000, 23, &params);
            let mass = avg.interval_mass(0.0, 100.0);
            ensure(mass <= 0.05, format!("mass on [0,100] is {mass}"))?;
            Ok(format!("refused with lambda {lambda:.4}; escaping mass on [0,100] = {mass:.4}"))
        }
        Err(e) => Err(e),
        Ok(_) => Err(Error::InvalidConfig(
            "solver accepted a system with nonnegative Lyapunov exponent".into(),
        )),
    }
}

fn check_contraction(seed: u64) -> Result<String> {
    let params = SystemParams::new(0.5, 1.5)?;
    let nu = ShiftMeasure::bernoulli(0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x636f6e7472);
    let mut worst_final: f64 = 0.0;
    for trial in 0..100 {
        let x = 0.1 + rng.random::<f64>() * 9.9;
        let y = 0.1 + rng.random::<f64>() * 9.9;
        let word = nu.sample_path(200, seed.wrapping_add(trial));
        let diag = contraction_diagnostics(x, y, &word, &params);
        ensure(
            diag.log_distance_monotone(),
            format!("log distance increased for trial {trial}"),
        )?;
        ensure(
            diag.quarter_bound_holds(),
            format!("d > log-distance/4 for trial {trial}"),
        )?;
        let final_d = diag.final_metric_distance();
        ensure(final_d <= 1e-6, format!("final d {final_d} for trial {trial}"))?;
        worst_final = worst_final.max(final_d);
    }
    Ok(format!("100 triples monotone, quarter-bounded; worst final d {worst_final:.2e}"))
}

fn check_acim_support() -> Result<String> {
    let params = SystemParams::new(0.5, 1.5)?;
    let mut hulls: Vec<(f64, f64)> = Vec::new();
    let mut details = Vec::new();
    for gamma in [1.5, 2.0, 3.0] {
        let sys = AcimSystem::new(params.clone(), gamma)?;
        let density = ulam_density(&sys, 4096, 20_000)?;
        ensure(
            density.residual <= 1e-8,
            format!("gamma {gamma}: residual {}", density.residual),
        )?;
        let report = support_intervals(&density, 1e-3)?;
        let bin = density.bin_width();
        ensure(
            (report.hull_left - sys.lo).abs() <= bin && (report.hull_right - sys.hi).abs() <= bin,
            format!("gamma {gamma}: hull [{}, {}]", report.hull_left, report.hull_right),
        )?;
        ensure(
            report
                .intervals
                .iter()
                .any(|iv| iv.left < gamma && gamma < iv.right),
            format!("gamma {gamma} not interior to any support interval"),
        )?;
        hulls.push((report.hull_left, report.hull_right));
        details.push(format!(
            "g={gamma}: {} intervals, hull [{:.3}, {:.3}]",
            report.intervals.len(),
            report.hull_left,
            report.hull_right
        ));
    }
    for i in 0..hulls.len() {
        for j in i + 1..hulls.len() {
            ensure(
                (hulls[i].0 - hulls[j].0).abs() > 1e-6 || (hulls[i].1 - hulls[j].1).abs() > 1e-6,
                "support hulls coincide",
            )?;
        }
    }
    Ok(details.join("; "))
}

fn check_roundtrip(seed: u64) -> Result<String> {
    let params = SystemParams::new(0.5, 1.5)?;
    let sys = AcimSystem::new(params, 2.0)?;
    let density = ulam_density(&sys, 4096, 20_000)?;
    let lyap = {
        let depth1 = nu_gamma_cylinders(&sys, &density, 1, 1_000_000, seed ^ 0x726f756e64)?;
        depth1.lyapunov(&sys.params)
    };
    ensure(lyap < 0.0, format!("depth-1 Lyapunov estimate {lyap}"))?;
    // The itinerary process concentrates ~0.17 of its mass on the
    // alternating depth-10 block, which floors the sup-CDF distance of any
    // depth-10 atomic sphere average near half that mass; the distance is
    // gated at 0.25 together with monotone decay along the depth.
    let mut prev = f64::INFINITY;
    let mut d = f64::INFINITY;
    for n in [2u32, 4, 6, 8, 10] {
        let table = nu_gamma_cylinders(&sys, &density, n, 1_000_000, seed ^ 0x726f756e64)?;
        d = theorem_g_roundtrip(&sys, &density, &table, 1.0, n)?;
        ensure(
            d <= 1.1 * prev,
            format!("roundtrip distance increased at depth {n}: {prev} -> {d}"),
        )?;
        prev = d;
    }
    ensure(d <= 0.25, format!("roundtrip distance {d}"))?;
    Ok(format!("roundtrip d {d:.4} at depth 10, Lyapunov estimate {lyap:.4}"))
}

fn check_rotation() -> Result<String> {
    let mut parts = Vec::new();
    for (a, b) in [(0.5, 1.5), (1.0 / 3.0, 1.25), (0.7, 1.1)] {
        let params = SystemParams::new(a, b)?;
        let exact = rotation_number(&params);
        let numeric = rotation_number_numeric(&params, 1_000_000);
        let gap = (exact - numeric).abs();
        ensure(
            gap <= 1e-5,
            format!("(a,b)=({a},{b}): formula {exact} vs numeric {numeric}"),
        )?;
        parts.push(format!("({a:.3},{b}): rho {exact:.6}"));
    }
    Ok(parts.join("; "))
}

fn check_holder(seed: u64) -> Result<String> {
    let params = SystemParams::new(0.5, 1.5)?;
    let p = 0.5;
    let sol = solve_stationary(p, &params, 1 << 14, 1e-6, 10_000)?;
    let base = sol.measure.interval_mass(0.0, 1.0 / params.a);
    let cell = sol.measure.cell_resolution();
    let q: f64 = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x686f6c646572);
    let mut max_len = 0usize;
    for trial in 0..100 {
        let center = 0.1 + rng.random::<f64>() * 20.0;
        let length = 0.01 + rng.random::<f64>() * 0.19;
        let cert = holder_certificate(center, length, p, &params)?;
        let (lo, hi) = (center - 0.5 * length, center + 0.5 * length);
        ensure(
            cert.image_lo >= lo && cert.image_hi <= hi,
            format!("trial {trial}: image not included"),
        )?;
        ensure(
            cert.length_bound_holds(),
            format!("trial {trial}: length bound violated (k+m = {})", cert.word_len()),
        )?;
        let bound = q.powi(cert.word_len() as i32) * base;
        let mass = sol.measure.interval_mass(lo, hi);
        ensure(
            mass + 2.0 * cell >= bound,
            format!("trial {trial}: mu(I) = {mass} below bound {bound}"),
        )?;
        max_len = max_len.max(cert.word_len());
    }
    Ok(format!("100 certificates verified; longest word {max_len}"))
}

fn check_universal(seed: u64) -> Result<String> {
    let params = SystemParams::new(0.5, 1.5)?;
    let targets = exp_targets(2000, 30.0, seed ^ 0x756e6976);
    let seq = approx_sequence(&targets, &params)?;
    let exp_cdf = FnCdf::new(|x| 1.0 - (-x).exp(), 40.0, 4096);
    let plain_vals: Vec<f64> = seq.iter().map(|e| e.value).collect();
    let d_plain = kolmogorov_distance(&PointMassMeasure::empirical(&plain_vals), &exp_cdf);
    ensure(d_plain <= 0.05, format!("plain distance {d_plain}"))?;

    let words: Vec<Word> = seq.iter().map(|e| e.word.clone()).collect();
    let mixed: Vec<Word> = exhaustive_interleave(words)?.take(2000).collect();
    for rank in 0..15u64 {
        let w = Word::enumerate(rank);
        ensure(
            mixed[..250].contains(&w),
            format!("word {w} of rank {rank} missing from the first 250 positions"),
        )?;
    }
    let mixed_vals: Vec<f64> = mixed.iter().map(|w| compose(w, &params).apply(1.0)).collect();
    let d_mixed = kolmogorov_distance(&PointMassMeasure::empirical(&mixed_vals), &exp_cdf);
    ensure(
        (d_mixed - d_plain).abs() <= 0.02,
        format!("interleaved distance {d_mixed} vs plain {d_plain}"),
    )?;
    Ok(format!("d {d_plain:.4} plain, {d_mixed:.4} interleaved; length<=3 words by position 250"))
}

/// Write the representative artifact set used by the determinism check and
/// the `verify` subcommand.
pub fn write_artifacts(dir: &Path, seed: u64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let params = SystemParams::new(0.5, 1.25)?;
    let sol = solve_stationary(0.6, &params, 1 << 12, 1e-6, 10_000)?;
    sol.measure
        .write_csv(fs::File::create(dir.join("stationary.csv"))?)?;

    let acim_params = SystemParams::new(0.5, 1.5)?;
    let sys = AcimSystem::new(acim_params.clone(), 2.0)?;
    let density = ulam_density(&sys, 512, 20_000)?;
    density.write_csv(fs::File::create(dir.join("density.csv"))?)?;

    let targets = exp_targets(200, 30.0, seed);
    let seq = approx_sequence(&targets, &acim_params)?;
    let mut words = String::new();
    for e in &seq {
        words.push_str(&e.word.to_string());
        words.push('\n');
    }
    fs::write(dir.join("sequence.txt"), words)?;
    fs::write(
        dir.join("sequence.json"),
        serde_json::to_string_pretty(&seq)?,
    )?;
    Ok(())
}

fn check_determinism(seed: u64) -> Result<String> {
    let base = tempfile::tempdir()?;
    let (d1, d2) = (base.path().join("run1"), base.path().join("run2"));
    write_artifacts(&d1, seed)?;
    write_artifacts(&d2, seed)?;
    let mut names: Vec<String> = fs::read_dir(&d1)?
        .map(|e| Ok(e?.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_>>()?;
    names.sort();
    ensure(!names.is_empty(), "no artifacts written")?;
    for name in &names {
        let b1 = fs::read(d1.join(name))?;
        let b2 = fs::read(d2.join(name))?;
        ensure(b1 == b2, format!("{name} differs between runs"))?;
    }
    Ok(format!("{} artifacts byte-identical across repeated runs", names.len()))
}
