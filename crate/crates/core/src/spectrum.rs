//! The partition growth rate `h(q)`, its Legendre transform
//! `h*(beta) = inf_q (q beta + h(q))`, the endpoints of the domain of `h*`,
//! and the brute-force level-set spectrum by word counting.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::entropy::{growth_rate_entropy, ScheduleEntry};
use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::measure::MeasureModel;
use crate::symbolic::DepthOffset;
use crate::thermo::closed_form_h;

/// Slack on slope comparisons and convexity checks.
const SLOPE_SLACK: f64 = 1e-9;
/// Grid points closer than this to a requested `q` are taken as equal.
const GRID_MATCH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub q_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    /// Per-point error bars; zero for closed forms.
    pub error_bars: Vec<f64>,
    pub provenance: Provenance,
    /// Divided-difference slopes are nondecreasing up to `1e-9`.
    pub convexity_certificate: bool,
    /// Largest `(N, D)` used, `None` for closed forms.
    pub depth: Option<ScheduleEntry>,
    pub k: DepthOffset,
}

impl SpectrumCurve {
    /// Wraps externally computed values, e.g. for tests of the transforms.
    pub fn from_values(q_grid: Vec<f64>, h_values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_grid(&q_grid)?;
        if h_values.len() != q_grid.len() {
            return Err(Error::Grid(format!(
                "{} h values for {} grid points",
                h_values.len(),
                q_grid.len()
            )));
        }
        let convexity_certificate = is_convex(&q_grid, &h_values);
        Ok(SpectrumCurve {
            error_bars: vec![0.0; q_grid.len()],
            q_grid,
            h_values,
            provenance,
            convexity_certificate,
            depth: None,
            k: DepthOffset(0),
        })
    }

    pub fn len(&self) -> usize {
        self.q_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_grid.is_empty()
    }

    fn index_of(&self, q: f64) -> Option<usize> {
        self.q_grid.iter().position(|&g| (g - q).abs() <= GRID_MATCH)
    }

    /// `h` at a grid point.
    pub fn h_at(&self, q: f64) -> Option<f64> {
        self.index_of(q).map(|i| self.h_values[i])
    }

    fn slopes(&self) -> Vec<f64> {
        slopes(&self.q_grid, &self.h_values)
    }
}

fn check_grid(q_grid: &[f64]) -> Result<()> {
    if q_grid.is_empty() {
        return Err(Error::Grid("at least one point".into()));
    }
    if q_grid.iter().any(|q| !q.is_finite()) {
        return Err(Error::Grid("finite points".into()));
    }
    if q_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Grid("strictly increasing points".into()));
    }
    Ok(())
}

fn slopes(q: &[f64], h: &[f64]) -> Vec<f64> {
    q.windows(2)
        .zip(h.windows(2))
        .map(|(q, h)| (h[1] - h[0]) / (q[1] - q[0]))
        .collect()
}

fn is_convex(q: &[f64], h: &[f64]) -> bool {
    if h.iter().any(|v| !v.is_finite()) {
        return false;
    }
    slopes(q, h).windows(2).all(|s| s[1] >= s[0] - SLOPE_SLACK)
}

/// `q_lo, q_lo + step, ..., q_hi`, with the last point snapped to `q_hi`.
pub fn uniform_grid(q_lo: f64, q_hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(q_lo <= q_hi) {
        return Err(Error::Grid(format!("a positive step and q_lo <= q_hi, got ({q_lo}, {q_hi}, {step})")));
    }
    let n = ((q_hi - q_lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| q_lo + i as f64 * step).collect())
}

/// Numeric `h(q)` from the growth rate of the full-space partition sums.
pub fn h_curve(
    model: &MeasureModel,
    q_grid: &[f64],
    k: DepthOffset,
    schedule: &[ScheduleEntry],
) -> Result<SpectrumCurve> {
    if !model.space().is_irreducible() {
        return Err(Error::Reducible);
    }
    check_grid(q_grid)?;
    let estimates: Vec<_> = q_grid
        .par_iter()
        .map(|&q| growth_rate_entropy(model, q, k, schedule))
        .collect::<Result<_>>()?;
    let h_values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    Ok(SpectrumCurve {
        convexity_certificate: is_convex(q_grid, &h_values),
        error_bars: estimates.iter().map(|e| e.error_bar).collect(),
        q_grid: q_grid.to_vec(),
        h_values,
        provenance: Provenance::Numeric,
        depth: schedule.last().copied(),
        k,
    })
}

/// `h(q)` from [`closed_form_h`].
pub fn closed_form_curve(model: &MeasureModel, q_grid: &[f64]) -> Result<SpectrumCurve> {
    check_grid(q_grid)?;
    let h_values: Vec<f64> = q_grid
        .iter()
        .map(|&q| closed_form_h(model, q))
        .collect::<Result<_>>()?;
    SpectrumCurve::from_values(q_grid.to_vec(), h_values, Provenance::ClosedForm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendrePoint {
    pub beta: f64,
    /// `None` stands for `-inf`: `beta` lies outside the slope range.
    pub h_star: Option<f64>,
}

impl LegendrePoint {
    pub fn in_domain(&self) -> bool {
        self.h_star.is_some()
    }
}

/// `h*(beta)` sampled at `betas`.
///
/// The infimum runs over the grid points and, on each window of three
/// consecutive points, over the interpolating parabola when it is convex.
/// Every candidate is affine in `beta`, so the result is exactly concave.
/// Outside `[-s_last, -s_first]` (first and last secant slopes) the value is
/// `-inf`.
pub fn legendre(curve: &SpectrumCurve, betas: &[f64]) -> Result<Vec<LegendrePoint>> {
    if curve.len() < 3 {
        return Err(Error::Grid("at least 3 points for the Legendre transform".into()));
    }
    let q = &curve.q_grid;
    let h = &curve.h_values;
    let s = curve.slopes();
    let finite_slopes: Vec<f64> = s.iter().copied().filter(|x| x.is_finite()).collect();
    let (beta_min, beta_max) = match (finite_slopes.first(), finite_slopes.last()) {
        (Some(&first), Some(&last)) if s[0].is_finite() || s[s.len() - 1].is_finite() => {
            // An infinite end slope (h = +inf at an end) leaves that side open.
            let lo = if s[s.len() - 1].is_finite() { -last } else { f64::NEG_INFINITY };
            let hi = if s[0].is_finite() { -first } else { f64::INFINITY };
            (lo, hi)
        }
        _ => (f64::INFINITY, f64::NEG_INFINITY),
    };
    let parabolas: Vec<Option<[f64; 3]>> = (1..q.len() - 1)
        .map(|i| {
            let (x0, x1, x2) = (q[i - 1], q[i], q[i + 1]);
            let (y0, y1, y2) = (h[i - 1], h[i], h[i + 1]);
            if !(y0.is_finite() && y1.is_finite() && y2.is_finite()) {
                return None;
            }
            // Newton form: y0 + d1 (x - x0) + a (x - x0)(x - x1).
            let d1 = (y1 - y0) / (x1 - x0);
            let d2 = (y2 - y1) / (x2 - x1);
            let a = (d2 - d1) / (x2 - x0);
            (a > 0.0).then_some([a, d1, y0])
        })
        .collect();
    let eval = |beta: f64| -> Option<f64> {
        if beta < beta_min - SLOPE_SLACK || beta > beta_max + SLOPE_SLACK {
            return None;
        }
        let mut best = f64::INFINITY;
        for (qi, hi) in q.iter().zip(h) {
            best = best.min(qi * beta + hi);
        }
        for (j, p) in parabolas.iter().enumerate() {
            let Some([a, d1, y0]) = *p else { continue };
            let (x0, x1, x2) = (q[j], q[j + 1], q[j + 2]);
            // d/dx [beta x + y0 + d1 (x - x0) + a (x - x0)(x - x1)] = 0.
            let x = ((x0 + x1) / 2.0 - (beta + d1) / (2.0 * a)).clamp(x0, x2);
            best = best.min(beta * x + y0 + d1 * (x - x0) + a * (x - x0) * (x - x1));
        }
        best.is_finite().then_some(best)
    };
    Ok(betas
        .par_iter()
        .map(|&beta| LegendrePoint {
            beta,
            h_star: eval(beta),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainEndpoints {
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub lower_error: f64,
    pub upper_error: f64,
}

/// `beta_lower = sup_{q > 0} -h(q)/q` and `beta_upper = inf_{q < 0} -h(q)/q`.
///
/// On a finite grid the ratio converges only like `1/q`. Each endpoint is
/// therefore sharpened with minus the outermost secant slope, which
/// converges exponentially fast for Gibbs measures; the error bar is the
/// gap between the raw grid value and the sharpened one.
pub fn domain_endpoints(curve: &SpectrumCurve) -> Result<DomainEndpoints> {
    let q = &curve.q_grid;
    let h = &curve.h_values;
    let ratio = |i: usize| -h[i] / q[i];
    let pos: Vec<usize> = (0..q.len()).filter(|&i| q[i] > 0.0).collect();
    let neg: Vec<usize> = (0..q.len()).filter(|&i| q[i] < 0.0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Grid("points with both signs of q".into()));
    }
    let raw_lower = pos.iter().map(|&i| ratio(i)).fold(f64::NEG_INFINITY, f64::max);
    let raw_upper = neg.iter().map(|&i| ratio(i)).fold(f64::INFINITY, f64::min);
    let n = q.len();
    let tail_lower = -(h[n - 1] - h[n - 2]) / (q[n - 1] - q[n - 2]);
    let tail_upper = -(h[1] - h[0]) / (q[1] - q[0]);
    let sharpen = |raw: f64, tail: f64, pick: fn(f64, f64) -> f64| {
        if tail.is_finite() && raw.is_finite() {
            let v = pick(raw, tail);
            (v, (v - raw).abs())
        } else {
            (raw, 0.0)
        }
    };
    let (beta_lower, lower_error) = if pos.len() >= 2 {
        sharpen(raw_lower, tail_lower, f64::max)
    } else {
        (raw_lower, 0.0)
    };
    let (beta_upper, upper_error) = if neg.len() >= 2 {
        sharpen(raw_upper, tail_upper, f64::min)
    } else {
        (raw_upper, 0.0)
    };
    Ok(DomainEndpoints {
        beta_lower,
        beta_upper,
        lower_error,
        upper_error,
    })
}

/// Derivative at `x0` of the parabola through three points.
fn three_point_derivative(x: [f64; 3], y: [f64; 3]) -> f64 {
    let [x0, x1, x2] = x;
    let [y0, y1, y2] = y;
    y0 * (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// Left and right derivatives of `h` at the interior grid point `q`, from
/// one-sided three-point stencils (two-point next to the boundary).
pub fn one_sided_derivatives(curve: &SpectrumCurve, q: f64) -> Result<(f64, f64)> {
    let i = curve.index_of(q).ok_or(Error::NotInterior(q))?;
    let n = curve.len();
    if i == 0 || i + 1 >= n {
        return Err(Error::NotInterior(q));
    }
    let g = &curve.q_grid;
    let h = &curve.h_values;
    let minus = if i >= 2 {
        three_point_derivative([g[i], g[i - 1], g[i - 2]], [h[i], h[i - 1], h[i - 2]])
    } else {
        (h[i] - h[i - 1]) / (g[i] - g[i - 1])
    };
    let plus = if i + 2 < n {
        three_point_derivative([g[i], g[i + 1], g[i + 2]], [h[i], h[i + 1], h[i + 2]])
    } else {
        (h[i + 1] - h[i]) / (g[i + 1] - g[i])
    };
    Ok((minus, plus))
}

/// `h'(q)`, or [`Error::Kink`] when the one-sided derivatives differ by more
/// than `tol`.
pub fn derivative(curve: &SpectrumCurve, q: f64, tol: f64) -> Result<f64> {
    let (minus, plus) = one_sided_derivatives(curve, q)?;
    if (minus - plus).abs() > tol || !minus.is_finite() || !plus.is_finite() {
        return Err(Error::Kink { q, minus, plus });
    }
    Ok(0.5 * (minus + plus))
}

/// Words of one length whose local entropy `-(1/n) log theta([w])` falls in
/// one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetBin {
    /// Mean local entropy of the member words.
    pub beta: f64,
    /// The bin covers `[index * width, (index + 1) * width)`.
    pub index: i64,
    pub log_count: f64,
    pub word_length: usize,
    /// `log_count / n`.
    pub entropy_estimate: f64,
    /// Log masses of the member words.
    pub log_masses: Vec<f64>,
}

impl LevelSetBin {
    pub fn count(&self) -> usize {
        self.log_masses.len()
    }

    /// `(1/n) log sum_{w in bin} theta([w])^q`.
    pub fn restricted_growth(&self, q: f64) -> f64 {
        log_sum_exp(self.log_masses.iter().map(|lm| q * lm)) / self.word_length as f64
    }
}

/// Bins all admissible positive-mass words of length `n + k` by their
/// local entropy at order `n`.
pub fn level_set_spectrum_oracle(
    model: &MeasureModel,
    n: usize,
    k: DepthOffset,
    bin_width: f64,
) -> Result<Vec<LevelSetBin>> {
    if n == 0 {
        return Err(Error::InvalidParameter("word length n must be at least 1".into()));
    }
    if !(bin_width > 0.0) {
        return Err(Error::InvalidParameter(format!("bin width must be positive, got {bin_width}")));
    }
    let words = model.enumerate(n + k.get())?;
    let nf = n as f64;
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (_, lm) in words {
        if lm == f64::NEG_INFINITY {
            continue;
        }
        let beta = -lm / nf;
        bins.entry((beta / bin_width).floor() as i64).or_default().push(lm);
    }
    Ok(bins
        .into_iter()
        .map(|(index, log_masses)| {
            let count = log_masses.len() as f64;
            let beta = log_masses.iter().map(|lm| -lm / nf).sum::<f64>() / count;
            LevelSetBin {
                beta,
                index,
                log_count: count.ln(),
                word_length: n,
                entropy_estimate: count.ln() / nf,
                log_masses,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelIdentity {
    pub q: f64,
    /// `-h'(q)`.
    pub beta: f64,
    /// Mean local entropy of the bin used.
    pub bin_beta: f64,
    /// Counting entropy of the bin.
    pub lhs: f64,
    /// `q * bin_beta + t`, with `t` the critical exponent of the
    /// bin-restricted sum `sum theta^q e^(-t n)`.
    pub rhs: f64,
    pub residual: f64,
}

/// Checks `entropy(L_beta) = q beta + t_q(L_beta)` at `beta = -h'(q)` on the
/// level-set bin whose mean is nearest to `beta`.
pub fn level_identity_residual(
    model: &MeasureModel,
    curve: &SpectrumCurve,
    q: f64,
    n: usize,
    k: DepthOffset,
    bin_width: f64,
) -> Result<LevelIdentity> {
    let beta = -derivative(curve, q, DERIVATIVE_KINK_TOL)?;
    let bins = level_set_spectrum_oracle(model, n, k, bin_width)?;
    let bin = nearest_bin(&bins, beta).ok_or(Error::EmptySet)?;
    let lhs = bin.entropy_estimate;
    let rhs = q * bin.beta + bin.restricted_growth(q);
    Ok(LevelIdentity {
        q,
        beta,
        bin_beta: bin.beta,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// One-sided derivatives further apart than this are reported as a kink.
pub const DERIVATIVE_KINK_TOL: f64 = 1e-2;

/// The bin whose mean local entropy is closest to `beta`.
pub fn nearest_bin(bins: &[LevelSetBin], beta: f64) -> Option<&LevelSetBin> {
    bins.iter()
        .min_by(|a, b| (a.beta - beta).abs().total_cmp(&(b.beta - beta).abs()))
}
