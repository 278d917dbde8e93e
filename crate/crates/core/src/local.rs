//! Pointwise local entropies along a point's prefixes, the finite level-set
//! filtration, and sampling of words with a prescribed local entropy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{MeasureModel, ModelKind};
use crate::symbolic::{DepthOffset, Word};

/// Default share of the estimate sequence used for the liminf/limsup proxies.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;
const TYPE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalEntropySample {
    pub word: Word,
    pub k: DepthOffset,
    /// `estimates[n - 1] = -(1/n) log theta([x_0 .. x_(n+k-1)])`.
    pub estimates: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    /// Some prefix has zero mass; the affected estimates are `+inf`.
    pub zero_mass: bool,
}

/// Log masses of the prefixes of `x` of lengths `0..=x.len()`.
fn prefix_log_masses(model: &MeasureModel, x: &Word) -> Result<Vec<f64>> {
    model.space().check_word(x)?;
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(0.0);
    for len in 1..=x.len() {
        let l = model.log_mass_child(&x.prefix(len), out[len - 1]);
        out.push(l);
    }
    Ok(out)
}

fn estimate(log_mass: f64, n: usize) -> f64 {
    if log_mass == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        -log_mass / n as f64
    }
}

pub fn local_entropy(
    model: &MeasureModel,
    x: &Word,
    k: DepthOffset,
    n_max: usize,
    tail_fraction: f64,
) -> Result<LocalEntropySample> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let required = n_max + k.get();
    if x.len() < required {
        return Err(Error::WordTooShort {
            len: x.len(),
            required,
        });
    }
    let masses = prefix_log_masses(model, &x.prefix(required))?;
    let estimates: Vec<f64> = (1..=n_max).map(|n| estimate(masses[n + k.get()], n)).collect();
    let tail = ((tail_fraction * n_max as f64).ceil() as usize).clamp(1, n_max);
    let tail_values = &estimates[n_max - tail..];
    let lower = tail_values.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = tail_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(LocalEntropySample {
        word: x.clone(),
        k,
        zero_mass: masses.contains(&f64::NEG_INFINITY),
        estimates,
        lower,
        upper,
    })
}

/// The two halves of the band condition `beta - delta < estimate < beta +
/// delta`, each over all checked orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiltrationCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl FiltrationCheck {
    pub fn member(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Checks `beta - delta < -(1/n) log theta([x_0 .. x_(n+M-1)]) < beta + delta`
/// for every `n` from `N` up to `x.len() - M`.
pub fn filtration_check(
    model: &MeasureModel,
    x: &Word,
    beta: f64,
    delta: f64,
    m: DepthOffset,
    n: usize,
) -> Result<FiltrationCheck> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let required = n + m.get();
    if x.len() < required {
        return Err(Error::WordTooShort {
            len: x.len(),
            required,
        });
    }
    let masses = prefix_log_masses(model, x)?;
    let mut check = FiltrationCheck {
        lower_ok: true,
        upper_ok: true,
    };
    for order in n..=x.len() - m.get() {
        let e = estimate(masses[order + m.get()], order);
        check.lower_ok &= e > beta - delta;
        check.upper_ok &= e < beta + delta;
    }
    Ok(check)
}

pub fn filtration_member(
    model: &MeasureModel,
    x: &Word,
    beta: f64,
    delta: f64,
    m: DepthOffset,
    n: usize,
) -> Result<bool> {
    Ok(filtration_check(model, x, beta, delta, m, n)?.member())
}

/// Range of local entropies reachable by a Bernoulli measure: the smallest
/// and largest `-log p_i` over symbols of positive probability.
pub fn bernoulli_beta_range(p: &[f64]) -> (f64, f64) {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|x| -x.ln())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| (lo.min(b), hi.max(b)))
}

/// `count` words of length `n` sharing one symbol-count vector whose local
/// entropy `-(1/n) sum c_i log p_i` is within `tol` of `beta`, each a
/// random permutation of the same multiset. The count vector closest to
/// `beta` is used, ties going to the most populous type. Bernoulli only.
pub fn sample_level_set(
    model: &MeasureModel,
    beta: f64,
    tol: f64,
    n: usize,
    count: usize,
    rng_seed: u64,
) -> Result<Vec<Word>> {
    let ModelKind::Bernoulli { p } = model.kind() else {
        return Err(Error::UnsupportedModel(model.kind_name()));
    };
    if n == 0 {
        return Err(Error::InvalidParameter("word length n must be at least 1".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {tol}")));
    }
    let (lower, upper) = bernoulli_beta_range(p);
    if beta < lower - tol || beta > upper + tol {
        return Err(Error::OutsideDomain { beta, lower, upper });
    }
    let symbols: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let costs: Vec<f64> = symbols.iter().map(|&i| -p[i].ln()).collect();
    let types = binomial(n + symbols.len() - 1, symbols.len() - 1);
    if types > TYPE_LIMIT {
        return Err(Error::TooLarge {
            nodes: types,
            limit: TYPE_LIMIT,
        });
    }
    let log_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    let mut counts = vec![0usize; symbols.len()];
    for_each_composition(n, &mut counts, 0, &mut |c| {
        let b: f64 = c.iter().zip(&costs).map(|(&ci, cost)| ci as f64 * cost).sum::<f64>() / n as f64;
        let dist = (b - beta).abs();
        if dist > tol {
            return;
        }
        let log_multinomial = log_fact[n] - c.iter().map(|&ci| log_fact[ci]).sum::<f64>();
        let better = match &best {
            None => true,
            Some((d, lm, _)) => dist < *d || (dist == *d && log_multinomial > *lm),
        };
        if better {
            best = Some((dist, log_multinomial, c.to_vec()));
        }
    });
    let (_, _, chosen) = best.ok_or(Error::NoTypeWithinTolerance { beta, tol, n })?;
    let mut multiset: Vec<u8> = chosen
        .iter()
        .zip(&symbols)
        .flat_map(|(&c, &s)| std::iter::repeat(s as u8).take(c))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok((0..count)
        .map(|_| {
            multiset.shuffle(&mut rng);
            Word::new(multiset.clone())
        })
        .collect())
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

fn for_each_composition(remaining: usize, counts: &mut [usize], at: usize, f: &mut impl FnMut(&[usize])) {
    if at + 1 == counts.len() {
        counts[at] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[at] = c;
        for_each_composition(remaining - c, counts, at + 1, f);
    }
}
