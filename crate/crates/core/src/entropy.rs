//! Critical exponents of the finite-depth pre-measures.
//!
//! Every pre-measure value is nonincreasing in `t`, so its jump from large to
//! small is located by bisection on `log value = 0`. Each schedule entry
//! `(N, D)` gives one root; the reported value extrapolates the last two
//! entries linearly in `N` to cancel the leading `1/N` bias of a root taken
//! at finite depth.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{doubling_check, MeasureModel};
use crate::premeasure::{CylinderTree, PremeasureParams};
use crate::symbolic::{CylinderSet, DepthOffset};

const MAX_DOUBLINGS: u32 = 60;
/// Values within this of 1 (in log) on both ends count as a plateau.
const PLATEAU_TOL: f64 = 1e-12;
pub const DEFAULT_TOL: f64 = 1e-10;
/// The doubling condition is checked up to this Bowen order.
const DOUBLING_ORDERS: usize = 12;

/// One `(N, D)` pair of a depth schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub n_min: usize,
    pub d_max: usize,
}

impl ScheduleEntry {
    pub fn new(n_min: usize, d_max: usize) -> Self {
        ScheduleEntry { n_min, d_max }
    }
}

/// `N = 4, 8, 12, 16` with `D = N`.
pub fn default_schedule() -> Vec<ScheduleEntry> {
    [4, 8, 12, 16].into_iter().map(|n| ScheduleEntry::new(n, n)).collect()
}

/// Default cover depth for the outer packing construction.
pub fn default_cover_depth(entry: ScheduleEntry) -> usize {
    entry.n_min.min(6)
}

fn check_schedule(schedule: &[ScheduleEntry]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("schedule is empty".into()));
    }
    for e in schedule {
        if e.n_min < 1 || e.d_max < e.n_min {
            return Err(Error::InvalidParameter(format!(
                "schedule entry (N = {}, D = {}) needs 1 <= N <= D",
                e.n_min, e.d_max
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalExponent {
    pub t: f64,
    /// Set when the value function sits at 1 over the whole bracket.
    pub degenerate: bool,
}

/// Root of `log_value_at(t) = 0` for a nonincreasing function, to `tol`.
///
/// The bracket is widened by doubling (at most 60 times) until the value is
/// above 1 at the left end and below 1 at the right end. A value that stays
/// 0 to the left gives `-inf`; one that stays infinite to the right gives
/// `+inf`.
pub fn critical_exponent<F>(log_value_at: F, bracket: (f64, f64), tol: f64) -> Result<CriticalExponent>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bad bracket ({lo}, {hi}) or tolerance {tol}"
        )));
    }
    let mid = 0.5 * (lo + hi);
    let mut f_lo = log_value_at(lo)?;
    let mut f_hi = log_value_at(hi)?;
    if f_lo.abs() <= PLATEAU_TOL && f_hi.abs() <= PLATEAU_TOL {
        return Ok(CriticalExponent {
            t: mid,
            degenerate: true,
        });
    }
    let mut width = hi - lo;
    let mut doublings = 0;
    while f_lo <= 0.0 {
        if doublings == MAX_DOUBLINGS {
            if f_lo == f64::NEG_INFINITY {
                return Ok(CriticalExponent {
                    t: f64::NEG_INFINITY,
                    degenerate: false,
                });
            }
            return Err(Error::Bracket {
                doublings,
                tail: format!("value stays at or below 1 as t decreases (log value {f_lo} at t = {lo})"),
            });
        }
        hi = lo;
        f_hi = f_lo;
        lo -= width;
        width *= 2.0;
        f_lo = log_value_at(lo)?;
        doublings += 1;
    }
    width = hi - lo;
    doublings = 0;
    while f_hi >= 0.0 {
        if doublings == MAX_DOUBLINGS {
            if f_hi == f64::INFINITY {
                return Ok(CriticalExponent {
                    t: f64::INFINITY,
                    degenerate: false,
                });
            }
            return Err(Error::Bracket {
                doublings,
                tail: format!("value stays at or above 1 as t increases (log value {f_hi} at t = {hi})"),
            });
        }
        lo = hi;
        hi += width;
        width *= 2.0;
        f_hi = log_value_at(hi)?;
        doublings += 1;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = log_value_at(mid)?;
        if f == 0.0 {
            return Ok(CriticalExponent {
                t: mid,
                degenerate: false,
            });
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalExponent {
        t: 0.5 * (lo + hi),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Root of `value = 1` at fixed `(N, D)`.
    Root,
    /// Slope of the log partition sum against `N`.
    GrowthRate,
}

/// Critical exponent at one schedule entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleValue {
    pub entry: ScheduleEntry,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    /// Extrapolated estimate.
    pub value: f64,
    /// Value at the last schedule entry, without extrapolation.
    pub raw_value: f64,
    pub method: Method,
    pub n_used: usize,
    pub d_used: usize,
    pub k: DepthOffset,
    pub error_bar: f64,
    pub degenerate: bool,
    pub per_entry: Vec<ScheduleValue>,
}

fn extrapolate(per_entry: &[ScheduleValue]) -> (f64, f64) {
    let last = per_entry[per_entry.len() - 1];
    if per_entry.len() < 2 {
        return (last.t, 0.0);
    }
    let prev = per_entry[per_entry.len() - 2];
    if !last.t.is_finite() || !prev.t.is_finite() {
        let bar = if last.t == prev.t { 0.0 } else { f64::INFINITY };
        return (last.t, bar);
    }
    let (n1, n2) = (prev.entry.n_min as f64, last.entry.n_min as f64);
    if n1 == n2 {
        return (last.t, (last.t - prev.t).abs());
    }
    let value = (n2 * last.t - n1 * prev.t) / (n2 - n1);
    let bar = (last.t - prev.t).abs().max((value - last.t).abs());
    (value, bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Construction {
    Covering,
    Packing,
    Outer(Option<usize>),
}

fn root_estimate(
    model: &MeasureModel,
    set: &CylinderSet,
    q: f64,
    k: DepthOffset,
    schedule: &[ScheduleEntry],
    construction: Construction,
) -> Result<EntropyEstimate> {
    check_schedule(schedule)?;
    if !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q must be finite, got {q}")));
    }
    let max_order = schedule.iter().map(|e| e.d_max).max().expect("nonempty");
    let tree = CylinderTree::build(model, set, k, max_order)?;
    let log_m = (model.space().alphabet_size() as f64).ln();
    let bracket = (-1.0, 1.0 + log_m);
    let roots: Vec<Result<(ScheduleValue, bool)>> = schedule
        .par_iter()
        .map(|&entry| {
            let value_at = |t: f64| {
                let p = PremeasureParams::new(q, t, entry.n_min, k, entry.d_max)?;
                let v = match construction {
                    Construction::Covering => tree.covering(&p)?,
                    Construction::Packing => tree.packing(&p)?,
                    Construction::Outer(depth) => {
                        let depth = depth.unwrap_or_else(|| default_cover_depth(entry)).min(entry.d_max);
                        tree.packing_outer(&p, depth)?
                    }
                };
                Ok(v.log_value)
            };
            let c = critical_exponent(value_at, bracket, DEFAULT_TOL)?;
            Ok((ScheduleValue { entry, t: c.t }, c.degenerate))
        })
        .collect();
    let mut per_entry = Vec::with_capacity(roots.len());
    let mut degenerate = false;
    for r in roots {
        let (v, d) = r?;
        per_entry.push(v);
        degenerate |= d;
    }
    let (value, error_bar) = extrapolate(&per_entry);
    let last = per_entry[per_entry.len() - 1];
    Ok(EntropyEstimate {
        value,
        raw_value: last.t,
        method: Method::Root,
        n_used: last.entry.n_min,
        d_used: last.entry.d_max,
        k,
        error_bar,
        degenerate,
        per_entry,
    })
}

/// Bowen-type entropy of `set`: critical exponent of the covering
/// pre-measure. For `q > 0` the measure must satisfy the doubling condition.
pub fn bowen_entropy(
    model: &MeasureModel,
    set: &CylinderSet,
    q: f64,
    k: DepthOffset,
    schedule: &[ScheduleEntry],
) -> Result<EntropyEstimate> {
    if q > 0.0 {
        let report = doubling_check(model, DepthOffset(k.0.max(1)), DOUBLING_ORDERS)?;
        if !report.in_doubling_class() {
            return Err(Error::DoublingViolated { q });
        }
    }
    root_estimate(model, set, q, k, schedule, Construction::Covering)
}

/// Critical exponent of the packing pre-measure.
pub fn packing_entropy_delta(
    model: &MeasureModel,
    set: &CylinderSet,
    q: f64,
    k: DepthOffset,
    schedule: &[ScheduleEntry],
) -> Result<EntropyEstimate> {
    root_estimate(model, set, q, k, schedule, Construction::Packing)
}

/// Critical exponent of the outer packing construction, with pieces cut at
/// `cover_depth` (default `min(6, N)` per entry).
pub fn packing_entropy(
    model: &MeasureModel,
    set: &CylinderSet,
    q: f64,
    k: DepthOffset,
    schedule: &[ScheduleEntry],
    cover_depth: Option<usize>,
) -> Result<EntropyEstimate> {
    root_estimate(model, set, q, k, schedule, Construction::Outer(cover_depth))
}

/// Least-squares slope of `log sum_{|w| = N + k} Psi_q(theta([w]))` against
/// `N` over the schedule's `N` values. The error bar is the spread between
/// the full slope and the slope of the last two entries.
pub fn growth_rate_entropy(
    model: &MeasureModel,
    q: f64,
    k: DepthOffset,
    schedule: &[ScheduleEntry],
) -> Result<EntropyEstimate> {
    check_schedule(schedule)?;
    let points: Vec<(f64, f64)> = schedule
        .iter()
        .map(|e| Ok((e.n_min as f64, model.log_partition_sum(e.n_min + k.get(), q)?)))
        .collect::<Result<_>>()?;
    let last = *schedule.last().expect("nonempty");
    let per_entry: Vec<ScheduleValue> = schedule
        .iter()
        .zip(&points)
        .map(|(&entry, &(n, z))| ScheduleValue { entry, t: z / n })
        .collect();
    let (value, error_bar) = if points.iter().any(|(_, z)| z.is_infinite()) {
        let z = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        (z, 0.0)
    } else if points.len() == 1 {
        (points[0].1 / points[0].0, 0.0)
    } else {
        let slope = least_squares_slope(&points);
        let tail = least_squares_slope(&points[points.len() - 2..]);
        (slope, (slope - tail).abs())
    };
    Ok(EntropyEstimate {
        value,
        raw_value: per_entry.last().expect("nonempty").t,
        method: Method::GrowthRate,
        n_used: last.n_min,
        d_used: last.d_max,
        k,
        error_bar,
        degenerate: false,
        per_entry,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return points[points.len() - 1].1 / points[points.len() - 1].0;
    }
    sxy / sxx
}
