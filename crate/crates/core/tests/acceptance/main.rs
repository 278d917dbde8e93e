//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod properties;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mfent_core::premeasure::{CylinderTree, Extremum};
use mfent_core::spectrum::{derivative, uniform_grid, DERIVATIVE_KINK_TOL};
use mfent_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T>(r: mfent_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const LN2: f64 = std::f64::consts::LN_2;

fn bernoulli(p: &[f64]) -> MeasureModel {
    MeasureModel::bernoulli(&ShiftSpace::full(p.len()), p.to_vec()).unwrap()
}

fn quarter() -> MeasureModel {
    bernoulli(&[0.25, 0.75])
}

fn wide_grid() -> Vec<f64> {
    uniform_grid(-30.0, 30.0, 0.25).unwrap()
}

fn default_grid() -> Vec<f64> {
    uniform_grid(-3.0, 3.0, 0.25).unwrap()
}

fn homogeneous_triviality() -> Outcome {
    let fair = bernoulli(&[0.5, 0.5]);
    let schedule = default_schedule();
    let curve = ok(h_curve(&fair, &default_grid(), DepthOffset(0), &schedule))?;
    let worst = curve
        .q_grid
        .iter()
        .zip(&curve.h_values)
        .map(|(q, h)| (h - (1.0 - q) * LN2).abs())
        .fold(0.0, f64::max);
    ensure!(worst <= 2e-2, "max |h(q) - (1-q) log 2| = {worst}");
    let wide = ok(h_curve(&fair, &wide_grid(), DepthOffset(0), &schedule))?;
    let ends = ok(domain_endpoints(&wide))?;
    let width = ends.beta_upper - ends.beta_lower;
    ensure!(width <= 4e-2, "domain width {width}");
    let values: Vec<f64> = [-3.0, -1.0, 0.0, 0.5, 2.0, 3.0]
        .iter()
        .map(|&q| correlation_entropy(&fair, q, 12, 0))
        .collect::<mfent_core::Result<_>>()
        .map_err(|e| e.to_string())?;
    let spread = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
    ensure!(spread <= 1e-12, "correlation entropy spread {spread:e}");
    Ok(format!(
        "max h error {worst:.2e}, domain width {width:.2e}, correlation spread {spread:.1e}"
    ))
}

fn random_markov(seed: u64) -> MeasureModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<Vec<f64>> = (0..3)
        .map(|_| {
            let row: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = row.iter().sum();
            row.iter().map(|x| x / s).collect()
        })
        .collect();
    MeasureModel::markov_stationary(&ShiftSpace::full(3), p).unwrap()
}

fn gibbs_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 1..=5 {
        let model = random_markov(seed);
        for q in [-2.0, -1.0, 0.5, 2.0] {
            let r = ok(gibbs_identity_residual(&model, q))?;
            ensure!(r <= 1e-6, "seed {seed}, q = {q}: residual {r:e}");
            worst = worst.max(r);
        }
    }
    Ok(format!("5 chains x 4 q, max residual {worst:.2e}"))
}

fn same_log(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12
}

fn dp_matches_oracle() -> Outcome {
    let space = ShiftSpace::full(2);
    let model = quarter();
    let leaves = space.words_of_length(4);
    let combos: Vec<(f64, f64, usize)> = [-1.0, 0.0, 2.0]
        .into_iter()
        .flat_map(|q| [0.0, LN2].into_iter().flat_map(move |t| [1, 2].map(|n| (q, t, n))))
        .collect();
    let k = DepthOffset(0);
    let checked: Vec<Result<usize, String>> = (1u32..1 << 16)
        .into_par_iter()
        .map(|mask| {
            let chosen = leaves
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, w)| w.clone());
            let set = CylinderSet::new(&space, chosen).map_err(|e| e.to_string())?;
            let tree = CylinderTree::build(&model, &set, k, 4).map_err(|e| e.to_string())?;
            for &(q, t, n) in &combos {
                let p = PremeasureParams::new(q, t, n, k, 4).unwrap();
                let cover = tree.covering(&p).unwrap().log_value;
                let pack = tree.packing(&p).unwrap().log_value;
                let o_min = antichain_oracle(&model, &set, &p, Extremum::Min).unwrap().ln();
                let o_max = antichain_oracle(&model, &set, &p, Extremum::Max).unwrap().ln();
                if !same_log(cover, o_min) || !same_log(pack, o_max) {
                    return Err(format!(
                        "mask {mask:#06x}, q = {q}, t = {t}, N = {n}: covering {cover} vs {o_min}, packing {pack} vs {o_max}"
                    ));
                }
            }
            Ok(combos.len() * 2)
        })
        .collect();
    let mut total = 0;
    for c in checked {
        total += c?;
    }
    Ok(format!("65535 sets, {total} comparisons, all within 1e-12"))
}

fn q_zero_reduction() -> Outcome {
    let model = ok(MeasureModel::max_entropy(&ShiftSpace::golden_mean()))?;
    let target = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let y = CylinderSet::full();
    let schedule = default_schedule();
    ensure!(
        schedule.last().unwrap().n_min == 16,
        "schedule must end at N = 16"
    );
    let b = ok(bowen_entropy(&model, &y, 0.0, DepthOffset(0), &schedule))?;
    let d = ok(packing_entropy_delta(&model, &y, 0.0, DepthOffset(0), &schedule))?;
    ensure!((b.value - target).abs() <= 1e-2, "Bowen estimate {} vs {target}", b.value);
    ensure!((d.value - target).abs() <= 1e-2, "packing estimate {} vs {target}", d.value);
    Ok(format!(
        "Bowen {:.6}, packing {:.6}, log phi {target:.6}",
        b.value, d.value
    ))
}

fn level_identity_residuals() -> Outcome {
    let model = quarter();
    let curve = ok(h_curve(&model, &default_grid(), DepthOffset(0), &default_schedule()))?;
    let mut parts = Vec::new();
    for q in [-1.0, 0.0, 1.0, 2.0] {
        let c = ok(level_identity_residual(&model, &curve, q, 14, DepthOffset(0), 0.25))?;
        ensure!(c.residual <= 7e-2, "q = {q}: residual {} ({c:?})", c.residual);
        parts.push(format!("q={q}: {:.3}", c.residual));
    }
    Ok(parts.join(", "))
}

fn sandwich() -> Outcome {
    let model = quarter();
    let curve = ok(h_curve(&model, &wide_grid(), DepthOffset(0), &default_schedule()))?;
    let ends = ok(domain_endpoints(&curve))?;
    let (lo_true, hi_true) = ((4.0f64 / 3.0).ln(), 4f64.ln());
    ensure!(
        (ends.beta_lower - lo_true).abs() <= 5e-2 && (ends.beta_upper - hi_true).abs() <= 5e-2,
        "endpoints ({}, {}) vs ({lo_true}, {hi_true})",
        ends.beta_lower,
        ends.beta_upper
    );
    let (lo, hi) = (ends.beta_lower - 5e-2, ends.beta_upper + 5e-2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut values = 0;
    while values < 1000 {
        let x = model.sample_word(200, &mut rng);
        let s = ok(local_entropy(&model, &x, DepthOffset(0), 200, 0.25))?;
        for v in [s.lower, s.upper] {
            ensure!(v >= lo && v <= hi, "local entropy {v} outside [{lo}, {hi}]");
            values += 1;
        }
    }
    let tol = 1e-2;
    let mut checked = 0;
    for i in 0..=250 {
        let beta = i as f64 * 0.01;
        let r = sample_level_set(&model, beta, tol, 200, 2, 5);
        let outside_exact = beta < lo_true - tol || beta > hi_true + tol;
        ensure!(
            matches!(r, Err(Error::OutsideDomain { .. })) == outside_exact,
            "beta = {beta}: sampler returned {r:?}"
        );
        if beta < lo || beta > hi {
            ensure!(r.is_err(), "beta = {beta} outside the padded interval was sampled");
        } else if beta > ends.beta_lower + 5e-2 && beta < ends.beta_upper - 5e-2 {
            ensure!(r.is_ok(), "beta = {beta} inside the interval failed: {r:?}");
        }
        checked += 1;
    }
    Ok(format!(
        "endpoints ({:.4}, {:.4}), {values} local values inside, {checked} sampler betas consistent",
        ends.beta_lower, ends.beta_upper
    ))
}

fn spectrum_bound_and_tangency() -> Outcome {
    let model = quarter();
    let curve = ok(h_curve(&model, &wide_grid(), DepthOffset(0), &default_schedule()))?;
    let width = 0.25;
    let bins = ok(level_set_spectrum_oracle(&model, 14, DepthOffset(0), width))?;
    let betas: Vec<f64> = bins.iter().map(|b| b.beta).collect();
    let star = ok(legendre(&curve, &betas))?;
    let mut worst_gap = f64::NEG_INFINITY;
    for (bin, s) in bins.iter().zip(&star) {
        let h = s.h_star.ok_or_else(|| format!("bin beta {} outside the domain", bin.beta))?;
        let gap = bin.entropy_estimate - h;
        ensure!(gap <= 6e-2, "bin at beta {}: entropy {} > h* {h} + 6e-2", bin.beta, bin.entropy_estimate);
        worst_gap = worst_gap.max(gap);
    }
    let mut parts = Vec::new();
    for q in [0.0, 1.0, 2.0] {
        let beta = -ok(derivative(&curve, q, DERIVATIVE_KINK_TOL))?;
        let index = (beta / width).floor() as i64;
        let bin = bins
            .iter()
            .find(|b| b.index == index)
            .ok_or_else(|| format!("no bin contains beta {beta}"))?;
        let h = ok(legendre(&curve, &[bin.beta]))?[0]
            .h_star
            .ok_or_else(|| format!("bin beta {} outside the domain", bin.beta))?;
        let r = (bin.entropy_estimate - h).abs();
        ensure!(r <= 7e-2, "q = {q}: |{} - {h}| = {r}", bin.entropy_estimate);
        parts.push(format!("q={q}: {r:.3}"));
    }
    Ok(format!(
        "{} bins, max entropy - h* = {worst_gap:.3}; tangency {}",
        bins.len(),
        parts.join(", ")
    ))
}

fn doubling_diagnostics() -> Outcome {
    let k = DepthOffset(1);
    let fair = ok(doubling_check(&bernoulli(&[0.5, 0.5]), k, 10))?;
    ensure!(fair.empirical_sup == 2.0, "fair coin sup {}", fair.empirical_sup);
    ensure!(fair.analytic_bound == DoublingBound::Finite(2.0), "fair coin bound {:?}", fair.analytic_bound);
    let q = ok(doubling_check(&quarter(), k, 10))?;
    ensure!(q.empirical_sup == 4.0, "Bernoulli(1/4, 3/4) sup {}", q.empirical_sup);
    ensure!(q.analytic_bound == DoublingBound::Finite(4.0), "Bernoulli(1/4, 3/4) bound {:?}", q.analytic_bound);
    let degenerate = ok(doubling_check(&bernoulli(&[1.0, 0.0]), k, 10))?;
    ensure!(
        degenerate.analytic_bound == DoublingBound::Unbounded,
        "Bernoulli(1, 0) bound {:?}",
        degenerate.analytic_bound
    );
    let mut worst: f64 = 0.0;
    for seed in 1..=5 {
        let model = random_markov(seed);
        let ModelKind::Markov { p, .. } = model.kind() else { unreachable!() };
        let min = p.iter().flatten().copied().filter(|&x| x > 0.0).fold(1.0, f64::min);
        let report = ok(doubling_check(&model, k, 10))?;
        let DoublingBound::Finite(bound) = report.analytic_bound else {
            return Err(format!("seed {seed}: unbounded"));
        };
        for v in [bound, report.empirical_sup] {
            let err = (v - 1.0 / min).abs() * min;
            ensure!(err <= 1e-12, "seed {seed}: {v} vs 1/p = {}", 1.0 / min);
            worst = worst.max(err);
        }
    }
    Ok(format!("2, 4, unbounded; Markov 1/p relative error {worst:.1e}"))
}

fn run(id: u32, name: &str, budget: Option<Duration>, f: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let result = match (result, budget) {
        (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.1?}, budget {b:?}")),
        (r, _) => r,
    };
    let (status, detail) = match &result {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("criterion {id} {status} [{name}] ({:.2}s) {detail}", elapsed.as_secs_f64());
    result.is_ok()
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [(u32, &str, Option<Duration>, fn() -> Outcome); 9] = [
        (1, "homogeneous measure", secs(10), homogeneous_triviality),
        (2, "Gibbs identity", secs(5), gibbs_identity),
        (3, "DP equals exhaustive oracle", secs(60), dp_matches_oracle),
        (4, "q = 0 gives topological entropy", None, q_zero_reduction),
        (5, "level-set identity residuals", secs(30), level_identity_residuals),
        (6, "local entropies inside the domain", None, sandwich),
        (7, "spectrum bound and tangency", None, spectrum_bound_and_tangency),
        (8, "property suites", secs(120), properties::all),
        (9, "doubling diagnostics", None, doubling_diagnostics),
    ];
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if !run(id, name, budget, f) {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
