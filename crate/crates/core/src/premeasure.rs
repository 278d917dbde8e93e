//! Finite-depth covering and packing pre-measures on the cylinder tree.
//!
//! Under the dyadic metric with `eps = 2^-k`, a Bowen ball of order `n` is the
//! cylinder of length `n + k` around its centre, so centred coverings of a
//! clopen set `K` are antichains of cylinders meeting `K` that cover it, and
//! centred packings are arbitrary antichains of cylinders meeting `K`. Both
//! optima are computed exactly by one bottom-up pass over the tree of words
//! meeting `K`, truncated at Bowen order `D`.

use crate::error::{Error, Result};
use crate::logspace::{log_add, scale_log};
use crate::measure::MeasureModel;
use crate::symbolic::{CylinderSet, DepthOffset, Word};

/// Node budget for [`CylinderTree::build`].
pub const TREE_LIMIT: u128 = 1 << 22;
/// Node budget for [`antichain_oracle`].
pub const ORACLE_TREE_LIMIT: u128 = 1 << 16;
const ORACLE_CUT_LIMIT: usize = 1 << 22;

/// `Psi_s(x)` with its natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    pub log: f64,
}

/// `Psi_s(x)`: `x^s` for `s > 0`, 1 for `s = 0`, and for `s < 0` `x^s` with
/// `Psi_s(0) = inf`.
pub fn psi(s: f64, x: f64) -> Result<PsiValue> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::NegativeArgument(x));
    }
    let log = scale_log(s, x.ln());
    Ok(PsiValue {
        value: log.exp(),
        log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremeasureParams {
    pub q: f64,
    pub t: f64,
    /// Smallest admissible Bowen order `N`.
    pub n_min: usize,
    pub k: DepthOffset,
    /// Largest Bowen order considered, `D >= N`.
    pub d_max: usize,
}

impl PremeasureParams {
    pub fn new(q: f64, t: f64, n_min: usize, k: DepthOffset, d_max: usize) -> Result<Self> {
        let p = PremeasureParams {
            q,
            t,
            n_min,
            k,
            d_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if self.d_max < self.n_min {
            return Err(Error::InvalidParameter(format!(
                "depth cap D = {} is below N = {}",
                self.d_max, self.n_min
            )));
        }
        if !self.q.is_finite() || !self.t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "q and t must be finite, got q = {}, t = {}",
                self.q, self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremeasureValue {
    /// Natural log of the value; `-inf` is 0.
    pub log_value: f64,
    /// `true` when the value is the exact optimum at the given `(N, D)`;
    /// `false` for the cylinder-partition restriction of the outer
    /// construction, which over-estimates.
    pub exact_at_depth: bool,
    pub n_min: usize,
    pub d_max: usize,
    pub k: DepthOffset,
}

impl PremeasureValue {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

/// The words meeting `K`, level by level, with their log masses. Built once
/// and evaluated for many `(q, t, N, D)`; any `D` up to the build depth can
/// be used since levels are stored in order.
#[derive(Debug, Clone)]
pub struct CylinderTree {
    k: DepthOffset,
    max_order: usize,
    /// `level_start[d]` is the index of the first node of depth `d`; one
    /// extra entry marks the end.
    level_start: Vec<usize>,
    log_mass: Vec<f64>,
    /// Children of node `i` are `first_child[i]..first_child[i + 1]`
    /// (meaningless on the deepest level).
    first_child: Vec<usize>,
}

impl CylinderTree {
    pub fn build(model: &MeasureModel, set: &CylinderSet, k: DepthOffset, max_order: usize) -> Result<Self> {
        Self::build_with_limit(model, set, k, max_order, TREE_LIMIT)
    }

    fn build_with_limit(
        model: &MeasureModel,
        set: &CylinderSet,
        k: DepthOffset,
        max_order: usize,
        limit: u128,
    ) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let space = model.space();
        let depth = max_order + k.get();
        let mut level: Vec<(Word, f64)> = vec![(Word::empty(), 0.0)];
        let mut level_start = vec![0];
        let mut log_mass = vec![0.0];
        let mut first_child = Vec::new();
        let mut total = 1usize;
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * space.alphabet_size());
            for (w, lm) in &level {
                first_child.push(total + next.len());
                for c in space.children(w) {
                    if set.intersects(&c) {
                        let l = model.log_mass_child(&c, *lm);
                        next.push((c, l));
                    }
                }
            }
            level_start.push(total);
            total += next.len();
            if total as u128 > limit {
                return Err(Error::TooLarge {
                    nodes: total as u128,
                    limit,
                });
            }
            log_mass.extend(next.iter().map(|(_, l)| *l));
            level = next;
        }
        first_child.push(total);
        level_start.push(total);
        Ok(CylinderTree {
            k,
            max_order,
            level_start,
            log_mass,
            first_child,
        })
    }

    pub fn node_count(&self) -> usize {
        self.log_mass.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn check(&self, p: &PremeasureParams) -> Result<()> {
        p.validate()?;
        if p.k != self.k {
            return Err(Error::InvalidParameter(format!(
                "tree built for k = {}, evaluated with k = {}",
                self.k.0, p.k.0
            )));
        }
        if p.d_max > self.max_order {
            return Err(Error::InvalidParameter(format!(
                "tree built to order {}, D = {} requested",
                self.max_order, p.d_max
            )));
        }
        Ok(())
    }

    fn weight(&self, i: usize, depth: usize, p: &PremeasureParams) -> f64 {
        let order = (depth - self.k.get()) as f64;
        let w = scale_log(p.q, self.log_mass[i]);
        if w.is_infinite() {
            w
        } else {
            w - p.t * order
        }
    }

    /// Optimal value of every node for the subtree it roots, over nodes down
    /// to depth `D + k`.
    fn solve(&self, p: &PremeasureParams, mode: Extremum) -> Vec<f64> {
        let leaf_depth = p.d_max + self.k.get();
        let end = self.level_start[leaf_depth + 1];
        let mut cost = vec![0.0; end];
        for depth in (0..=leaf_depth).rev() {
            let has_order = depth >= p.n_min + self.k.get();
            for i in self.level_start[depth]..self.level_start[depth + 1] {
                if depth == leaf_depth {
                    cost[i] = self.weight(i, depth, p);
                    continue;
                }
                let below = cost[self.first_child[i]..self.first_child[i + 1]]
                    .iter()
                    .fold(f64::NEG_INFINITY, |acc, &c| log_add(acc, c));
                cost[i] = if has_order {
                    let single = self.weight(i, depth, p);
                    // Ties go to the single (shallower) ball.
                    match mode {
                        Extremum::Min if single <= below => single,
                        Extremum::Max if single >= below => single,
                        _ => below,
                    }
                } else {
                    below
                };
            }
        }
        cost
    }

    pub fn covering(&self, p: &PremeasureParams) -> Result<PremeasureValue> {
        self.check(p)?;
        Ok(self.value(self.solve(p, Extremum::Min)[0], true, p))
    }

    pub fn packing(&self, p: &PremeasureParams) -> Result<PremeasureValue> {
        self.check(p)?;
        Ok(self.value(self.solve(p, Extremum::Max)[0], true, p))
    }

    /// Cheapest partition of `K` into pieces `K ∩ [w]` with `|w| <=
    /// cover_depth`, each piece priced at its packing pre-measure.
    pub fn packing_outer(&self, p: &PremeasureParams, cover_depth: usize) -> Result<PremeasureValue> {
        self.check(p)?;
        if cover_depth > p.d_max {
            return Err(Error::InvalidParameter(format!(
                "cover depth {cover_depth} exceeds D = {}",
                p.d_max
            )));
        }
        let pack = self.solve(p, Extremum::Max);
        let top = cover_depth.min(p.d_max + self.k.get());
        // Packings of K ∩ [w] may also use a single ancestor ball of w.
        let mut ancestor = vec![f64::NEG_INFINITY; self.level_start[top + 1]];
        for depth in 0..top {
            for i in self.level_start[depth]..self.level_start[depth + 1] {
                let mut best = ancestor[i];
                if depth >= p.n_min + self.k.get() {
                    best = best.max(self.weight(i, depth, p));
                }
                for c in self.first_child[i]..self.first_child[i + 1] {
                    ancestor[c] = best;
                }
            }
        }
        let mut outer = vec![0.0; self.level_start[top + 1]];
        for depth in (0..=top).rev() {
            for i in self.level_start[depth]..self.level_start[depth + 1] {
                let piece = pack[i].max(ancestor[i]);
                outer[i] = if depth == top {
                    piece
                } else {
                    let split = outer[self.first_child[i]..self.first_child[i + 1]]
                        .iter()
                        .fold(f64::NEG_INFINITY, |acc, &c| log_add(acc, c));
                    piece.min(split)
                };
            }
        }
        Ok(self.value(outer[0], false, p))
    }

    fn value(&self, log_value: f64, exact_at_depth: bool, p: &PremeasureParams) -> PremeasureValue {
        PremeasureValue {
            log_value,
            exact_at_depth,
            n_min: p.n_min,
            d_max: p.d_max,
            k: p.k,
        }
    }

    /// Every cut of the subtree of node `i`, summed in the linear domain.
    fn cut_sums(&self, i: usize, depth: usize, p: &PremeasureParams, out_limit: usize) -> Result<Vec<f64>> {
        let leaf_depth = p.d_max + self.k.get();
        let single = if depth >= p.n_min + self.k.get() {
            Some(self.weight(i, depth, p).exp())
        } else {
            None
        };
        if depth == leaf_depth {
            return Ok(single.into_iter().collect());
        }
        let mut sums = vec![0.0];
        for c in self.first_child[i]..self.first_child[i + 1] {
            let child = self.cut_sums(c, depth + 1, p, out_limit)?;
            if sums.len() * child.len() > out_limit {
                return Err(Error::TooLarge {
                    nodes: (sums.len() * child.len()) as u128,
                    limit: out_limit as u128,
                });
            }
            sums = sums
                .iter()
                .flat_map(|a| child.iter().map(move |b| a + b))
                .collect();
        }
        sums.extend(single);
        Ok(sums)
    }
}

pub fn covering_premeasure(model: &MeasureModel, set: &CylinderSet, p: &PremeasureParams) -> Result<PremeasureValue> {
    p.validate()?;
    CylinderTree::build(model, set, p.k, p.d_max)?.covering(p)
}

pub fn packing_premeasure(model: &MeasureModel, set: &CylinderSet, p: &PremeasureParams) -> Result<PremeasureValue> {
    p.validate()?;
    CylinderTree::build(model, set, p.k, p.d_max)?.packing(p)
}

pub fn packing_outer(
    model: &MeasureModel,
    set: &CylinderSet,
    p: &PremeasureParams,
    cover_depth: usize,
) -> Result<PremeasureValue> {
    p.validate()?;
    CylinderTree::build(model, set, p.k, p.d_max)?.packing_outer(p, cover_depth)
}

/// Exhaustive optimum over all covering (`Min`) or packing (`Max`)
/// antichains with orders in `[N, D]`, evaluated in the linear domain.
///
/// Only cuts (maximal antichains) are listed. For `Max` this loses nothing:
/// every packing extends to a cut by adding leaves, and weights are
/// nonnegative.
pub fn antichain_oracle(
    model: &MeasureModel,
    set: &CylinderSet,
    p: &PremeasureParams,
    mode: Extremum,
) -> Result<f64> {
    p.validate()?;
    let tree = CylinderTree::build_with_limit(model, set, p.k, p.d_max, ORACLE_TREE_LIMIT)?;
    let sums = tree.cut_sums(0, 0, p, ORACLE_CUT_LIMIT)?;
    let pick = match mode {
        Extremum::Min => sums.iter().copied().fold(f64::INFINITY, f64::min),
        Extremum::Max => sums.iter().copied().fold(0.0, f64::max),
    };
    Ok(pick)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::ShiftSpace;

    const LN2: f64 = std::f64::consts::LN_2;

    fn fair() -> MeasureModel {
        MeasureModel::bernoulli(&ShiftSpace::full(2), vec![0.5, 0.5]).unwrap()
    }

    fn params(q: f64, t: f64, n: usize, d: usize) -> PremeasureParams {
        PremeasureParams::new(q, t, n, DepthOffset(0), d).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(0.0, 0.37).unwrap().value, 1.0);
        assert_eq!(psi(-1.0, 0.0).unwrap().value, f64::INFINITY);
        assert!((psi(2.0, 3.0).unwrap().value - 9.0).abs() < 1e-12);
        assert_eq!(psi(2.0, 0.0).unwrap().value, 0.0);
        assert_eq!(psi(1.0, -0.5).unwrap_err(), Error::NegativeArgument(-0.5));
    }

    #[test]
    fn fair_coin_at_critical_t() {
        let y = CylinderSet::full();
        let m = fair();
        let p = params(0.0, LN2, 1, 8);
        assert!(covering_premeasure(&m, &y, &p).unwrap().log_value.abs() < 1e-12);
        assert!(packing_premeasure(&m, &y, &p).unwrap().log_value.abs() < 1e-12);
        for depth in 0..=3 {
            assert!(packing_outer(&m, &y, &p, depth).unwrap().log_value.abs() < 1e-12);
        }
    }

    #[test]
    fn deepest_antichain_wins_off_critical() {
        let y = CylinderSet::full();
        let m = fair();
        let above = params(0.0, LN2 + 0.1, 1, 8);
        let got = covering_premeasure(&m, &y, &above).unwrap().log_value;
        assert!((got + 0.8).abs() < 1e-12);
        let below = params(0.0, LN2 - 0.1, 1, 8);
        let got = packing_premeasure(&m, &y, &below).unwrap().log_value;
        assert!((got - 0.8).abs() < 1e-12);
    }

    #[test]
    fn single_cylinder_single_ball() {
        let space = ShiftSpace::full(2);
        let k = CylinderSet::new(&space, ["0".parse().unwrap()]).unwrap();
        let v = covering_premeasure(&fair(), &k, &params(0.0, 0.0, 1, 5)).unwrap();
        assert!(v.log_value.abs() < 1e-15);
    }

    #[test]
    fn normalization_at_q_one() {
        let m = MeasureModel::bernoulli(&ShiftSpace::full(2), vec![0.3, 0.7]).unwrap();
        for d in 1..=6 {
            let v = packing_premeasure(&m, &CylinderSet::full(), &params(1.0, 0.0, 1, d)).unwrap();
            assert!(v.log_value.abs() < 1e-12);
        }
    }

    #[test]
    fn outer_at_depth_zero_is_packing() {
        let m = MeasureModel::bernoulli(&ShiftSpace::full(2), vec![0.3, 0.7]).unwrap();
        let space = m.space().clone();
        let k = CylinderSet::new(&space, ["01".parse().unwrap(), "1".parse().unwrap()]).unwrap();
        let p = params(-1.0, 0.4, 2, 6);
        let outer = packing_outer(&m, &k, &p, 0).unwrap();
        let pack = packing_premeasure(&m, &k, &p).unwrap();
        assert_eq!(outer.log_value, pack.log_value);
        assert!(!outer.exact_at_depth);
    }

    #[test]
    fn oracle_single_leaf() {
        let space = ShiftSpace::full(2);
        let k = CylinderSet::new(&space, ["0".parse().unwrap()]).unwrap();
        let m = MeasureModel::bernoulli(&space, vec![0.25, 0.75]).unwrap();
        let p = params(2.0, 0.5, 1, 1);
        let leaf = (2.0 * 0.25f64.ln() - 0.5).exp();
        for mode in [Extremum::Min, Extremum::Max] {
            assert!((antichain_oracle(&m, &k, &p, mode).unwrap() - leaf).abs() < 1e-15);
        }
    }

    #[test]
    fn oracle_refuses_large_trees() {
        let p = params(0.0, 0.0, 1, 16);
        assert!(matches!(
            antichain_oracle(&fair(), &CylinderSet::full(), &p, Extremum::Min),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn zero_mass_cylinder_with_negative_q() {
        let space = ShiftSpace::full(2);
        let m = MeasureModel::bernoulli(&space, vec![1.0, 0.0]).unwrap();
        let v = covering_premeasure(&m, &CylinderSet::full(), &params(-1.0, 0.0, 1, 3)).unwrap();
        assert_eq!(v.log_value, f64::INFINITY);
    }

    #[test]
    fn invalid_params() {
        assert!(PremeasureParams::new(0.0, 0.0, 0, DepthOffset(0), 3).is_err());
        assert!(PremeasureParams::new(0.0, 0.0, 4, DepthOffset(0), 3).is_err());
        let p = params(0.0, 0.0, 1, 3);
        assert_eq!(
            covering_premeasure(&fair(), &CylinderSet::empty(), &p).unwrap_err(),
            Error::EmptySet
        );
    }
}
