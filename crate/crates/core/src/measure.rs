//! Invariant probability measures given by their cylinder masses.
//!
//! Bernoulli, Markov and Gibbs models all reduce to a block Markov chain whose
//! states are words of a fixed width (1 for Bernoulli and Markov, `r - 1` for
//! a Gibbs measure of a potential on length-`r` words). Mixtures are kept as
//! lazy convex combinations so that `mass = lambda * mass_a + (1 - lambda) *
//! mass_b` holds exactly on every cylinder.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::logspace::{log_add, log_sum_exp, scale_log};
use crate::perron::{perron_left, perron_right, DEFAULT_REL_TOL};
use crate::symbolic::{DepthOffset, ShiftSpace, Word};
use crate::thermo::{Potential, TransferMatrix};

const STOCHASTIC_TOL: f64 = 1e-12;

/// Upper limit on the number of words any exhaustive enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass {
    pub value: f64,
    pub log: f64,
}

impl Mass {
    fn from_log(log: f64) -> Self {
        Mass {
            value: log.exp(),
            log,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Bernoulli {
        p: Vec<f64>,
    },
    Markov {
        p: Vec<Vec<f64>>,
        pi: Vec<f64>,
    },
    Gibbs {
        potential: Potential,
        /// `P(psi)`.
        log_pressure: f64,
        /// `(min, max)` of `theta([w]) / exp(S psi(w) - j P(psi))` over all
        /// words with `j >= 0` transitions.
        distortion: (f64, f64),
    },
    Mixture {
        a: Box<MeasureModel>,
        b: Box<MeasureModel>,
        lambda: f64,
    },
}

/// Block Markov representation shared by every non-mixture model.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Chain {
    pub width: usize,
    pub states: Vec<Word>,
    index: HashMap<Word, usize>,
    pub log_init: Vec<f64>,
    /// `step[s][a]` is the next state and log conditional probability of
    /// symbol `a` after state `s`; `None` when inadmissible.
    pub step: Vec<Vec<Option<(usize, f64)>>>,
}

impl Chain {
    /// `cond[s][t]` is the transition probability between states; zero
    /// entries are allowed on admissible transitions.
    fn new(space: &ShiftSpace, width: usize, init: &[f64], cond: &[Vec<f64>]) -> Self {
        let states = space.words_of_length(width);
        let index: HashMap<Word, usize> = states
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let m = space.alphabet_size();
        let step = states
            .iter()
            .enumerate()
            .map(|(s, u)| {
                let mut row = vec![None; m];
                for c in space.children(u) {
                    let next = index[&Word::from(&c.symbols()[1..])];
                    let a = c.last().expect("child is nonempty") as usize;
                    row[a] = Some((next, cond[s][next].ln()));
                }
                row
            })
            .collect();
        Chain {
            width,
            log_init: init.iter().map(|x| x.ln()).collect(),
            states,
            index,
            step,
        }
    }

    fn state_of(&self, symbols: &[u8]) -> usize {
        if self.width == 1 {
            symbols[0] as usize
        } else {
            self.index[&Word::from(symbols)]
        }
    }

    fn log_mass(&self, w: &Word) -> f64 {
        let s = w.symbols();
        if s.is_empty() {
            return 0.0;
        }
        if s.len() < self.width {
            return log_sum_exp(
                self.states
                    .iter()
                    .zip(&self.log_init)
                    .filter(|(st, _)| w.is_prefix_of(st))
                    .map(|(_, &l)| l),
            );
        }
        let mut state = self.state_of(&s[..self.width]);
        let mut log = self.log_init[state];
        for &a in &s[self.width..] {
            let (next, lp) = self.step[state][a as usize].expect("word is admissible");
            log += lp;
            state = next;
        }
        log
    }
}

/// A shift-invariant Borel probability measure on a subshift.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureModel {
    space: ShiftSpace,
    kind: ModelKind,
    chain: Option<Arc<Chain>>,
}

impl MeasureModel {
    /// I.i.d. symbols; requires the full shift.
    pub fn bernoulli(space: &ShiftSpace, p: Vec<f64>) -> Result<Self> {
        if !space.is_full() {
            return Err(Error::InvalidMeasure(
                "Bernoulli measures need the full shift".into(),
            ));
        }
        check_distribution("p", &p, space.alphabet_size())?;
        let cond: Vec<Vec<f64>> = vec![p.clone(); p.len()];
        let chain = Chain::new(space, 1, &p, &cond);
        Ok(MeasureModel {
            space: space.clone(),
            kind: ModelKind::Bernoulli { p },
            chain: Some(Arc::new(chain)),
        })
    }

    /// Stationary Markov chain with transition matrix `p` and stationary
    /// vector `pi`. Rows must sum to one, `pi P = pi`, and `p` may only be
    /// positive on admissible transitions.
    pub fn markov(space: &ShiftSpace, p: Vec<Vec<f64>>, pi: Vec<f64>) -> Result<Self> {
        let m = space.alphabet_size();
        check_stochastic(space, &p)?;
        check_distribution("pi", &pi, m)?;
        for j in 0..m {
            let flow: f64 = (0..m).map(|i| pi[i] * p[i][j]).sum();
            if (flow - pi[j]).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "pi is not stationary at index {j}: (pi P)_{j} = {flow}, pi_{j} = {}",
                    pi[j]
                )));
            }
        }
        let chain = Chain::new(space, 1, &pi, &p);
        Ok(MeasureModel {
            space: space.clone(),
            kind: ModelKind::Markov { p, pi },
            chain: Some(Arc::new(chain)),
        })
    }

    /// Markov chain with its stationary vector solved for.
    pub fn markov_stationary(space: &ShiftSpace, p: Vec<Vec<f64>>) -> Result<Self> {
        check_stochastic(space, &p)?;
        let pi = stationary_vector(&p)?;
        Self::markov(space, p, pi)
    }

    /// The Parry measure, the unique measure of maximal entropy.
    pub fn max_entropy(space: &ShiftSpace) -> Result<Self> {
        if !space.is_irreducible() {
            return Err(Error::Reducible);
        }
        let m = space.alphabet_size();
        let a: Vec<Vec<f64>> = space
            .transition_rows()
            .iter()
            .map(|row| row.iter().map(|&x| x as f64).collect())
            .collect();
        let right = perron_right(&a, DEFAULT_REL_TOL)?;
        let lambda = right.log_root.exp();
        let r = right.vector;
        let p: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = (0..m).map(|j| a[i][j] * r[j] / (lambda * r[i])).collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
                row
            })
            .collect();
        Self::markov_stationary(space, p)
    }

    /// Equilibrium state of a locally constant potential, built from the
    /// left and right Perron vectors of its transfer matrix.
    pub fn gibbs(space: &ShiftSpace, potential: Potential) -> Result<Self> {
        if !space.is_irreducible() {
            return Err(Error::Reducible);
        }
        if !potential.is_finite() {
            return Err(Error::InvalidMeasure(
                "Gibbs potentials must be finite on admissible words".into(),
            ));
        }
        let transfer = TransferMatrix::new(space, &potential);
        let right = perron_right(&transfer.entries, DEFAULT_REL_TOL)?;
        let left = perron_left(&transfer.entries, DEFAULT_REL_TOL)?;
        let lambda = right.log_root.exp();
        let (l, r) = (&left.vector, &right.vector);
        let n = transfer.states.len();
        let cond: Vec<Vec<f64>> = (0..n)
            .map(|u| {
                let mut row: Vec<f64> = (0..n)
                    .map(|v| transfer.entries[u][v] * r[v] / (lambda * r[u]))
                    .collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
                row
            })
            .collect();
        let pi = stationary_vector(&cond)?;
        let z: f64 = l.iter().zip(r).map(|(a, b)| a * b).sum();
        let fold = |f: fn(f64, f64) -> f64, init: f64, v: &[f64]| v.iter().copied().fold(init, f);
        let distortion = (
            fold(f64::min, f64::INFINITY, l) * fold(f64::min, f64::INFINITY, r) / z,
            fold(f64::max, 0.0, l) * fold(f64::max, 0.0, r) / z,
        );
        let chain = Chain::new(space, potential.locality() - 1, &pi, &cond);
        Ok(MeasureModel {
            space: space.clone(),
            kind: ModelKind::Gibbs {
                potential,
                log_pressure: right.log_root,
                distortion,
            },
            chain: Some(Arc::new(chain)),
        })
    }

    /// The formal combination `lambda * a + (1 - lambda) * b`.
    pub fn mixture(a: &MeasureModel, b: &MeasureModel, lambda: f64) -> Result<Self> {
        if a.space != b.space {
            return Err(Error::SpaceMismatch);
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(MeasureModel {
            space: a.space.clone(),
            kind: ModelKind::Mixture {
                a: Box::new(a.clone()),
                b: Box::new(b.clone()),
                lambda,
            },
            chain: None,
        })
    }

    pub fn space(&self) -> &ShiftSpace {
        &self.space
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Bernoulli { .. } => "bernoulli",
            ModelKind::Markov { .. } => "markov",
            ModelKind::Gibbs { .. } => "gibbs",
            ModelKind::Mixture { .. } => "mixture",
        }
    }

    pub(crate) fn chain(&self) -> Option<&Chain> {
        self.chain.as_deref()
    }

    /// The potential the measure is the equilibrium state of: `log p_j` on
    /// `ij` for Bernoulli, `log P_ij` for Markov, the defining table for
    /// Gibbs. Mixtures have none.
    pub fn potential(&self) -> Option<Potential> {
        let log_table = |f: &dyn Fn(u8, u8) -> f64| {
            self.space
                .words_of_length(2)
                .into_iter()
                .map(|w| {
                    let v = f(w.symbols()[0], w.symbols()[1]);
                    (w, v)
                })
                .collect()
        };
        match &self.kind {
            ModelKind::Bernoulli { p } => Some(
                Potential::new(&self.space, 2, log_table(&|_, j| p[j as usize].ln()))
                    .expect("table covers the full shift"),
            ),
            ModelKind::Markov { p, .. } => Some(
                Potential::new(
                    &self.space,
                    2,
                    log_table(&|i, j| p[i as usize][j as usize].ln()),
                )
                .expect("table covers admissible pairs"),
            ),
            ModelKind::Gibbs { potential, .. } => Some(potential.clone()),
            ModelKind::Mixture { .. } => None,
        }
    }

    /// Mass of the cylinder `[w]` with its log.
    pub fn cylinder_mass(&self, w: &Word) -> Result<Mass> {
        self.space.check_word(w)?;
        Ok(Mass::from_log(self.log_mass_unchecked(w)))
    }

    pub(crate) fn log_mass_unchecked(&self, w: &Word) -> f64 {
        match (&self.kind, &self.chain) {
            (ModelKind::Mixture { a, b, lambda }, _) => mix(
                *lambda,
                a.log_mass_unchecked(w),
                b.log_mass_unchecked(w),
            ),
            (_, Some(chain)) => chain.log_mass(w),
            (_, None) => unreachable!("non-mixture models carry a chain"),
        }
    }

    /// Log mass of an admissible `child` given its parent's log mass.
    pub(crate) fn log_mass_child(&self, child: &Word, parent_log: f64) -> f64 {
        match &self.chain {
            Some(chain) if child.len() > chain.width => {
                if parent_log == f64::NEG_INFINITY {
                    return parent_log;
                }
                let s = child.symbols();
                let n = s.len();
                let state = chain.state_of(&s[n - 1 - chain.width..n - 1]);
                let (_, lp) = chain.step[state][s[n - 1] as usize].expect("child is admissible");
                parent_log + lp
            }
            _ => self.log_mass_unchecked(child),
        }
    }

    /// Every admissible word of length `len` with its log mass, in
    /// lexicographic order.
    pub fn enumerate(&self, len: usize) -> Result<Vec<(Word, f64)>> {
        let count = self.space.count_words(len);
        if count > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                nodes: count,
                limit: ENUMERATION_LIMIT,
            });
        }
        let mut level = vec![(Word::empty(), 0.0)];
        for _ in 0..len {
            let mut next = Vec::with_capacity(level.len() * 2);
            for (w, lm) in &level {
                for c in self.space.children(w) {
                    let l = self.log_mass_child(&c, *lm);
                    next.push((c, l));
                }
            }
            level = next;
        }
        Ok(level)
    }

    /// `log sum_{|w| = len} Psi_q(theta([w]))` over admissible words.
    pub fn log_partition_sum(&self, len: usize, q: f64) -> Result<f64> {
        self.weighted_sum(len, |lm| scale_log(q, lm))
    }

    /// `log sum theta([w])^q` over admissible words of length `len` with
    /// positive mass.
    pub fn log_moment_sum(&self, len: usize, q: f64) -> Result<f64> {
        self.weighted_sum(len, |lm| {
            if lm == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                q * lm
            }
        })
    }

    /// Sum of `exp(weight(log mass))` over words of length `len`. `weight`
    /// must be multiplicative (additive on logs), which holds for both
    /// callers.
    fn weighted_sum(&self, len: usize, weight: impl Fn(f64) -> f64) -> Result<f64> {
        let chain = match &self.chain {
            Some(chain) if len >= chain.width => chain,
            _ => {
                let words = self.enumerate(len)?;
                return Ok(log_sum_exp(words.iter().map(|(_, lm)| weight(*lm))));
            }
        };
        let mut v: Vec<f64> = chain.log_init.iter().map(|&l| weight(l)).collect();
        for _ in chain.width..len {
            let mut next = vec![f64::NEG_INFINITY; v.len()];
            for (s, row) in chain.step.iter().enumerate() {
                if v[s] == f64::NEG_INFINITY {
                    continue;
                }
                for &(t, lp) in row.iter().flatten() {
                    next[t] = log_add(next[t], v[s] + weight(lp));
                }
            }
            v = next;
        }
        Ok(log_sum_exp(v))
    }

    /// Draws a word of length `n` from the measure.
    pub fn sample_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Word {
        let mut w = Word::empty();
        let mut lm = 0.0;
        for _ in 0..n {
            let mut children: Vec<(Word, f64)> = self
                .space
                .children(&w)
                .into_iter()
                .map(|c| {
                    let l = self.log_mass_child(&c, lm);
                    (c, l)
                })
                .collect();
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = children.len() - 1;
            for (i, (_, l)) in children.iter().enumerate() {
                acc += (l - lm).exp();
                if u < acc {
                    pick = i;
                    break;
                }
            }
            let (c, l) = children.swap_remove(pick);
            w = c;
            lm = l;
        }
        w
    }

    /// `min / max` bounds of the Gibbs ratio; `None` for non-Gibbs kinds.
    pub fn gibbs_distortion(&self) -> Option<(f64, f64)> {
        match &self.kind {
            ModelKind::Gibbs { distortion, .. } => Some(*distortion),
            _ => None,
        }
    }
}

fn mix(lambda: f64, la: f64, lb: f64) -> f64 {
    let wa = if lambda == 0.0 { f64::NEG_INFINITY } else { lambda.ln() + la };
    let wb = if lambda == 1.0 {
        f64::NEG_INFINITY
    } else {
        (1.0 - lambda).ln() + lb
    };
    log_add(wa, wb)
}

fn check_distribution(name: &str, p: &[f64], m: usize) -> Result<()> {
    if p.len() != m {
        return Err(Error::InvalidMeasure(format!(
            "{name} has {} entries, expected {m}",
            p.len()
        )));
    }
    if let Some(i) = p.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidMeasure(format!(
            "{name}[{i}] = {} is not a probability",
            p[i]
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidMeasure(format!("{name} sums to {s}, expected 1")));
    }
    Ok(())
}

fn check_stochastic(space: &ShiftSpace, p: &[Vec<f64>]) -> Result<()> {
    let m = space.alphabet_size();
    if p.len() != m {
        return Err(Error::InvalidMeasure(format!(
            "P has {} rows, expected {m}",
            p.len()
        )));
    }
    for (i, row) in p.iter().enumerate() {
        check_distribution(&format!("row {i} of P"), row, m)?;
        for (j, &x) in row.iter().enumerate() {
            if x > 0.0 && !space.allows(i as u8, j as u8) {
                return Err(Error::InvalidMeasure(format!(
                    "P[{i}][{j}] = {x} on a forbidden transition"
                )));
            }
        }
    }
    Ok(())
}

/// Solves `pi P = pi`, `sum pi = 1` by Gaussian elimination with partial
/// pivoting on `(P^T - I)` with the last equation replaced by normalization.
pub(crate) fn stationary_vector(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .map(|j| p[j][i] - if i == j { 1.0 } else { 0.0 })
                .collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::InvalidMeasure(
                "transition matrix has no unique stationary vector".into(),
            ));
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DoublingBound {
    Finite(f64),
    Unbounded,
}

impl DoublingBound {
    pub fn is_finite(self) -> bool {
        matches!(self, DoublingBound::Finite(_))
    }

    fn max(self, other: DoublingBound) -> DoublingBound {
        match (self, other) {
            (DoublingBound::Finite(a), DoublingBound::Finite(b)) => DoublingBound::Finite(a.max(b)),
            _ => DoublingBound::Unbounded,
        }
    }
}

/// Empirical and analytic sizes of `theta(B^n_{2 eps}) / theta(B^n_eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    pub k: DepthOffset,
    pub n_max: usize,
    /// `+inf` when some positive-mass ball has a null sub-ball.
    pub empirical_sup: f64,
    pub analytic_bound: DoublingBound,
}

impl DoublingReport {
    /// Whether the measure passes the doubling test (finite analytic bound).
    pub fn in_doubling_class(&self) -> bool {
        self.analytic_bound.is_finite()
    }
}

/// Under the dyadic metric, doubling `eps = 2^-k` drops one symbol from the
/// Bowen cylinder, so the ratio is `theta([w_..n+k-1]) / theta([w_..n+k])`.
/// Pairs with a null parent are skipped (the ratio is 0/0 there).
pub fn doubling_check(model: &MeasureModel, k: DepthOffset, n_max: usize) -> Result<DoublingReport> {
    if k.0 < 1 || n_max < 1 {
        return Err(Error::InvalidParameter(
            "doubling check needs k >= 1 and n_max >= 1".into(),
        ));
    }
    let lo = k.get();
    let hi = n_max + k.get() - 1;
    let empirical_sup = match &model.chain {
        Some(chain) => chain_doubling_sup(model, chain, lo, hi),
        None => enumerated_doubling_sup(model, lo, hi)?,
    };
    Ok(DoublingReport {
        k,
        n_max,
        empirical_sup,
        analytic_bound: analytic_doubling_bound(model),
    })
}

/// Largest parent/child ratio over parents of length in `lo..=hi`.
fn chain_doubling_sup(model: &MeasureModel, chain: &Chain, lo: usize, hi: usize) -> f64 {
    let mut sup: f64 = 0.0;
    let mut ratio = |parent: f64, child: f64| {
        if parent > f64::NEG_INFINITY {
            sup = sup.max((parent - child).exp());
        }
    };
    // Parents shorter than the chain width: explicit marginals.
    for len in lo..=hi.min(chain.width.saturating_sub(1)) {
        for w in model.space.words_of_length(len) {
            let pl = chain.log_mass(&w);
            for c in model.space.children(&w) {
                ratio(pl, chain.log_mass(&c));
            }
        }
    }
    if hi < chain.width {
        return sup;
    }
    // From the chain width on, ratios depend only on the current state; the
    // reachable state set evolves deterministically, so stop once it cycles.
    let mut current: BTreeSet<usize> = (0..chain.states.len())
        .filter(|&s| chain.log_init[s] > f64::NEG_INFINITY)
        .collect();
    let mut seen: Vec<BTreeSet<usize>> = Vec::new();
    let start = lo.max(chain.width);
    for len in chain.width..=hi {
        if len >= start {
            if seen.contains(&current) {
                break;
            }
            for &s in &current {
                for &(_, lp) in chain.step[s].iter().flatten() {
                    ratio(0.0, lp);
                }
            }
            seen.push(current.clone());
        }
        current = current
            .iter()
            .flat_map(|&s| {
                chain.step[s]
                    .iter()
                    .flatten()
                    .filter(|(_, lp)| *lp > f64::NEG_INFINITY)
                    .map(|&(t, _)| t)
            })
            .collect();
    }
    sup
}

fn enumerated_doubling_sup(model: &MeasureModel, lo: usize, hi: usize) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for len in lo..=hi {
        for (w, pl) in model.enumerate(len)? {
            if pl == f64::NEG_INFINITY {
                continue;
            }
            for c in model.space.children(&w) {
                sup = sup.max((pl - model.log_mass_unchecked(&c)).exp());
            }
        }
    }
    Ok(sup)
}

fn analytic_doubling_bound(model: &MeasureModel) -> DoublingBound {
    match (&model.kind, &model.chain) {
        (ModelKind::Mixture { a, b, lambda }, _) => {
            // Mediant inequality: the mixed ratio never exceeds the larger
            // component ratio.
            if *lambda == 1.0 {
                analytic_doubling_bound(a)
            } else if *lambda == 0.0 {
                analytic_doubling_bound(b)
            } else {
                analytic_doubling_bound(a).max(analytic_doubling_bound(b))
            }
        }
        (_, Some(chain)) => {
            let mut worst: f64 = 0.0;
            // Parents have length at least k >= 1.
            for len in 1..chain.width {
                for w in model.space.words_of_length(len) {
                    let pl = chain.log_mass(&w);
                    if pl == f64::NEG_INFINITY {
                        continue;
                    }
                    for c in model.space.children(&w) {
                        worst = worst.max((pl - chain.log_mass(&c)).exp());
                    }
                }
            }
            for (s, row) in chain.step.iter().enumerate() {
                if chain.log_init[s] == f64::NEG_INFINITY {
                    continue;
                }
                for &(_, lp) in row.iter().flatten() {
                    worst = worst.max((-lp).exp());
                }
            }
            if worst.is_finite() {
                DoublingBound::Finite(worst)
            } else {
                DoublingBound::Unbounded
            }
        }
        (_, None) => unreachable!("non-mixture models carry a chain"),
    }
}
