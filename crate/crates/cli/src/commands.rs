//! One function per subcommand; each writes its CSVs into `out`.

use std::path::Path;

use mfent_core::entropy::default_cover_depth;
use mfent_core::premeasure::CylinderTree;
use mfent_core::spectrum::one_sided_derivatives;
use mfent_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::CliError;
use crate::table::{int, num, opt, Table};

type Run = Result<(), CliError>;

fn depth_cols(entry: Option<ScheduleEntry>, k: DepthOffset) -> [String; 3] {
    [
        int(entry.map(|e| e.n_min)),
        int(entry.map(|e| e.d_max)),
        k.0.to_string(),
    ]
}

fn with_depth(mut row: Vec<String>, depth: [String; 3]) -> Vec<String> {
    row.extend(depth);
    row
}

pub fn spectrum(c: &Config, out: &Path) -> Run {
    let curve = h_curve(&c.model, &c.q_grid, c.k, &c.schedule)?;
    let depth = depth_cols(curve.depth, c.k);
    let mut h = Table::new(&["q", "h", "error_bar", "h_minus", "h_plus", "h_closed_form", "N", "D", "k"]);
    for (i, &q) in curve.q_grid.iter().enumerate() {
        let (minus, plus) = match one_sided_derivatives(&curve, q) {
            Ok((m, p)) => (Some(m), Some(p)),
            Err(Error::NotInterior(_)) => (None, None),
            Err(e) => return Err(e.into()),
        };
        let closed = closed_form_h(&c.model, q).ok();
        h.push(with_depth(
            vec![num(q), num(curve.h_values[i]), num(curve.error_bars[i]), opt(minus), opt(plus), opt(closed)],
            depth.clone(),
        ));
    }
    h.write(out, "spectrum_h.csv")?;

    let ends = domain_endpoints(&curve)?;
    let mut e = Table::new(&["beta_lower", "beta_upper", "lower_error", "upper_error", "N", "D", "k"]);
    e.push(with_depth(
        vec![num(ends.beta_lower), num(ends.beta_upper), num(ends.lower_error), num(ends.upper_error)],
        depth.clone(),
    ));
    e.write(out, "spectrum_endpoints.csv")?;

    let betas = match &c.beta_grid {
        Some(b) => b.clone(),
        None => {
            let lo = (ends.beta_lower - 0.1).max(0.0);
            let hi = ends.beta_upper + 0.1;
            (0..=200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect()
        }
    };
    let mut l = Table::new(&["beta", "h_star", "in_domain", "N", "D", "k"]);
    for p in legendre(&curve, &betas)? {
        l.push(with_depth(
            vec![num(p.beta), num(p.h_star.unwrap_or(f64::NEG_INFINITY)), p.in_domain().to_string()],
            depth.clone(),
        ));
    }
    l.write(out, "spectrum_legendre.csv")
}

pub fn premeasure(c: &Config, out: &Path) -> Run {
    let tree = CylinderTree::build(&c.model, &c.set, c.k, c.d_max)?;
    let entry = ScheduleEntry::new(c.n_min, c.d_max);
    let cover_depth = c.cover_depth.unwrap_or_else(|| default_cover_depth(entry));
    let depth = depth_cols(Some(entry), c.k);
    let mut t = Table::new(&["q", "t", "construction", "log_value", "value", "exact", "N", "D", "k"]);
    for &q in &c.q {
        for &tt in &c.t {
            let p = PremeasureParams::new(q, tt, c.n_min, c.k, c.d_max)?;
            let values = [
                ("covering", tree.covering(&p)?),
                ("packing", tree.packing(&p)?),
                ("packing_outer", tree.packing_outer(&p, cover_depth)?),
            ];
            for (name, v) in values {
                t.push(with_depth(
                    vec![
                        num(q),
                        num(tt),
                        name.to_string(),
                        num(v.log_value),
                        num(v.value()),
                        v.exact_at_depth.to_string(),
                    ],
                    depth.clone(),
                ));
            }
        }
    }
    t.write(out, "premeasure.csv")
}

pub fn entropy(c: &Config, out: &Path) -> Run {
    let mut t = Table::new(&[
        "q", "quantity", "value", "raw_value", "error_bar", "degenerate", "N", "D", "k",
    ]);
    let mut s = Table::new(&["q", "quantity", "t", "N", "D", "k"]);
    for &q in &c.q {
        let estimates = [
            ("bowen", bowen_entropy(&c.model, &c.set, q, c.k, &c.schedule)?),
            ("packing_delta", packing_entropy_delta(&c.model, &c.set, q, c.k, &c.schedule)?),
            (
                "packing",
                packing_entropy(&c.model, &c.set, q, c.k, &c.schedule, c.cover_depth)?,
            ),
        ];
        for (name, e) in estimates {
            t.push(vec![
                num(q),
                name.to_string(),
                num(e.value),
                num(e.raw_value),
                num(e.error_bar),
                e.degenerate.to_string(),
                e.n_used.to_string(),
                e.d_used.to_string(),
                e.k.0.to_string(),
            ]);
            for v in &e.per_entry {
                s.push(with_depth(vec![num(q), name.to_string(), num(v.t)], depth_cols(Some(v.entry), c.k)));
            }
        }
    }
    t.write(out, "entropy.csv")?;
    s.write(out, "entropy_schedule.csv")
}

pub fn verify_gibbs(c: &Config, out: &Path) -> Run {
    let rows: Vec<(f64, f64, f64)> = c
        .q_grid
        .par_iter()
        .map(|&q| Ok((q, gibbs_identity_residual(&c.model, q)?, closed_form_h(&c.model, q)?)))
        .collect::<mfent_core::Result<_>>()?;
    let mut t = Table::new(&["q", "residual", "h_closed_form", "N", "D", "k"]);
    for (q, r, h) in rows {
        t.push(with_depth(vec![num(q), num(r), num(h)], depth_cols(None, c.k)));
    }
    t.write(out, "gibbs.csv")
}

pub fn doubling(c: &Config, out: &Path) -> Run {
    let k = DepthOffset(c.k.0.max(1));
    let report = doubling_check(&c.model, k, c.n_max)?;
    let bound = match report.analytic_bound {
        DoublingBound::Finite(b) => b,
        DoublingBound::Unbounded => f64::INFINITY,
    };
    let mut t = Table::new(&["empirical_sup", "analytic_bound", "in_doubling_class", "N", "D", "k"]);
    t.push(with_depth(
        vec![num(report.empirical_sup), num(bound), report.in_doubling_class().to_string()],
        depth_cols(Some(ScheduleEntry::new(1, report.n_max)), k),
    ));
    t.write(out, "doubling.csv")
}

pub fn local(c: &Config, out: &Path) -> Run {
    let n = c.n.unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let words: Vec<Word> = (0..c.samples)
        .map(|_| c.model.sample_word(n + c.k.get(), &mut rng))
        .collect();
    let samples: Vec<LocalEntropySample> = words
        .par_iter()
        .map(|x| local_entropy(&c.model, x, c.k, n, c.tail_fraction))
        .collect::<mfent_core::Result<_>>()?;
    let tail = ((c.tail_fraction * n as f64).ceil() as usize).clamp(1, n);
    let depth = depth_cols(Some(ScheduleEntry::new(n - tail + 1, n)), c.k);
    let mut t = Table::new(&["sample", "word", "lower", "upper", "zero_mass", "N", "D", "k"]);
    for (i, s) in samples.iter().enumerate() {
        t.push(with_depth(
            vec![
                i.to_string(),
                s.word.to_string(),
                num(s.lower),
                num(s.upper),
                s.zero_mass.to_string(),
            ],
            depth.clone(),
        ));
    }
    t.write(out, "local_samples.csv")?;
    let mean = |f: fn(&LocalEntropySample) -> f64| samples.iter().map(f).sum::<f64>() / samples.len() as f64;
    let mut m = Table::new(&["samples", "mean_lower_estimate", "mean_upper_estimate", "N", "D", "k"]);
    m.push(with_depth(
        vec![samples.len().to_string(), num(mean(|s| s.lower)), num(mean(|s| s.upper))],
        depth,
    ));
    m.write(out, "local_summary.csv")
}

pub fn level_spectrum(c: &Config, out: &Path) -> Run {
    let n = c.n.unwrap_or(14);
    let bins = level_set_spectrum_oracle(&c.model, n, c.k, c.bin_width)?;
    let curve = h_curve(&c.model, &c.q_grid, c.k, &c.schedule)?;
    let betas: Vec<f64> = bins.iter().map(|b| b.beta).collect();
    let star = legendre(&curve, &betas)?;
    let depth = depth_cols(Some(ScheduleEntry::new(n, n)), c.k);
    let mut t = Table::new(&["beta_bin", "index", "count", "entropy_estimate", "h_star", "N", "D", "k"]);
    for (b, s) in bins.iter().zip(&star) {
        t.push(with_depth(
            vec![
                num(b.beta),
                b.index.to_string(),
                b.count().to_string(),
                num(b.entropy_estimate),
                num(s.h_star.unwrap_or(f64::NEG_INFINITY)),
            ],
            depth.clone(),
        ));
    }
    t.write(out, "level_bins.csv")?;
    let mut r = Table::new(&["q", "beta", "bin_beta", "lhs", "rhs", "residual", "N", "D", "k"]);
    for &q in &c.residual_q {
        let v = level_identity_residual(&c.model, &curve, q, n, c.k, c.bin_width)?;
        r.push(with_depth(
            vec![num(q), num(v.beta), num(v.bin_beta), num(v.lhs), num(v.rhs), num(v.residual)],
            depth.clone(),
        ));
    }
    r.write(out, "level_residuals.csv")
}
