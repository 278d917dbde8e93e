//! Randomized invariant checks, 1000 cases each, on a deterministic seed.

use std::fmt::Debug;

use mfent_core::logspace::log_add;
use mfent_core::premeasure::CylinderTree;
use mfent_core::spectrum::uniform_grid;
use mfent_core::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: u32 = 1000;
const TOL: f64 = 1e-9;

/// `a <= b` in the log domain, up to `TOL`.
fn le(a: f64, b: f64) -> bool {
    a <= b || a - b <= TOL
}

fn check<S>(name: &str, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<String, String>
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&strategy, test)
        .map(|_| format!("{name} x{CASES}"))
        .map_err(|e| format!("{name}: {e}"))
}

/// A full-support model: Bernoulli on 2 or 3 symbols, or a Markov chain on
/// the golden-mean shift.
fn model(rng: &mut ChaCha8Rng) -> MeasureModel {
    match rng.gen_range(0..3) {
        0 => {
            let p = rng.gen_range(0.05..0.95);
            MeasureModel::bernoulli(&ShiftSpace::full(2), vec![p, 1.0 - p]).unwrap()
        }
        1 => {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = raw.iter().sum();
            MeasureModel::bernoulli(&ShiftSpace::full(3), raw.iter().map(|x| x / s).collect()).unwrap()
        }
        _ => {
            let p = rng.gen_range(0.05..0.95);
            MeasureModel::markov_stationary(&ShiftSpace::golden_mean(), vec![vec![p, 1.0 - p], vec![1.0, 0.0]])
                .unwrap()
        }
    }
}

/// A nonempty random union of cylinders of length at most `depth`.
fn random_set(space: &ShiftSpace, depth: usize, rng: &mut ChaCha8Rng) -> CylinderSet {
    loop {
        let len = rng.gen_range(1..=depth);
        let words: Vec<Word> = space
            .words_of_length(len)
            .into_iter()
            .filter(|_| rng.gen_bool(0.4))
            .collect();
        let extra: Vec<Word> = space
            .words_of_length(depth)
            .into_iter()
            .filter(|_| rng.gen_bool(0.1))
            .collect();
        let set = CylinderSet::union(space, words.into_iter().chain(extra)).unwrap();
        if !set.is_empty() {
            return set;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Params {
    seed: u64,
    q: f64,
    t: f64,
    n: usize,
    d: usize,
    k: u32,
}

fn params() -> impl Strategy<Value = Params> {
    (any::<u64>(), -2.0..2.0f64, -0.5..1.5f64, 1usize..=3, 0usize..=2, 0u32..=1).prop_map(
        |(seed, q, t, n, extra, k)| Params {
            seed,
            q,
            t,
            n,
            d: n + extra,
            k,
        },
    )
}

struct Values {
    cover: f64,
    pack: f64,
    outer: f64,
}

fn values(model: &MeasureModel, set: &CylinderSet, p: &PremeasureParams, cover_depth: usize) -> Values {
    let tree = CylinderTree::build(model, set, p.k, p.d_max).unwrap();
    Values {
        cover: tree.covering(p).unwrap().log_value,
        pack: tree.packing(p).unwrap().log_value,
        outer: tree.packing_outer(p, cover_depth).unwrap().log_value,
    }
}

fn setup(c: &Params) -> (ChaCha8Rng, MeasureModel, PremeasureParams, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let m = model(&mut rng);
    let p = PremeasureParams::new(c.q, c.t, c.n, DepthOffset(c.k), c.d).unwrap();
    let cover_depth = rng.gen_range(0..=c.d);
    (rng, m, p, cover_depth)
}

fn monotone_in_set() -> Result<String, String> {
    check("monotone in K", params(), |c| {
        let (mut rng, m, p, cd) = setup(&c);
        let small = random_set(m.space(), 4, &mut rng);
        let big = small.union_with(m.space(), &random_set(m.space(), 4, &mut rng));
        let (a, b) = (values(&m, &small, &p, cd), values(&m, &big, &p, cd));
        prop_assert!(le(a.cover, b.cover), "covering {} > {}", a.cover, b.cover);
        prop_assert!(le(a.pack, b.pack), "packing {} > {}", a.pack, b.pack);
        prop_assert!(le(a.outer, b.outer), "outer {} > {}", a.outer, b.outer);
        Ok(())
    })
}

fn monotone_in_t() -> Result<String, String> {
    check("nonincreasing in t", (params(), 0.0..1.0f64), |(c, dt)| {
        let (mut rng, m, p, cd) = setup(&c);
        let set = random_set(m.space(), 4, &mut rng);
        let later = PremeasureParams { t: p.t + dt, ..p };
        let (a, b) = (values(&m, &set, &p, cd), values(&m, &set, &later, cd));
        prop_assert!(le(b.cover, a.cover));
        prop_assert!(le(b.pack, a.pack));
        prop_assert!(le(b.outer, a.outer));
        Ok(())
    })
}

fn monotone_in_n() -> Result<String, String> {
    check("covering up, packing down in N", params(), |c| {
        let (mut rng, m, p, cd) = setup(&c);
        let set = random_set(m.space(), 4, &mut rng);
        let next = PremeasureParams {
            n_min: p.n_min + 1,
            d_max: p.d_max.max(p.n_min + 1),
            ..p
        };
        let wider = PremeasureParams { d_max: next.d_max, ..p };
        let (a, b) = (values(&m, &set, &wider, cd), values(&m, &set, &next, cd));
        prop_assert!(le(a.cover, b.cover), "covering {} > {}", a.cover, b.cover);
        prop_assert!(le(b.pack, a.pack), "packing {} < {}", a.pack, b.pack);
        Ok(())
    })
}

fn covering_below_packing() -> Result<String, String> {
    check("covering <= outer <= packing", params(), |c| {
        let (mut rng, m, p, cd) = setup(&c);
        let set = random_set(m.space(), 4, &mut rng);
        let v = values(&m, &set, &p, cd);
        prop_assert!(le(v.cover, v.pack), "covering {} > packing {}", v.cover, v.pack);
        prop_assert!(le(v.outer, v.pack), "outer {} > packing {}", v.outer, v.pack);
        Ok(())
    })
}

fn outer_subadditive() -> Result<String, String> {
    check("outer subadditive", params(), |c| {
        let (mut rng, m, p, cd) = setup(&c);
        let a = random_set(m.space(), 4, &mut rng);
        let b = random_set(m.space(), 4, &mut rng);
        let u = a.union_with(m.space(), &b);
        let (va, vb, vu) = (values(&m, &a, &p, cd), values(&m, &b, &p, cd), values(&m, &u, &p, cd));
        let sum = log_add(va.outer, vb.outer);
        prop_assert!(le(vu.outer, sum), "outer(A u B) {} > {sum}", vu.outer);
        Ok(())
    })
}

fn psi_identities() -> Result<String, String> {
    check("Psi identities", (-3.0..3.0f64, -3.0..3.0f64, 1e-6..10.0f64, 1e-6..10.0f64), |(s, r, x, y)| {
        let (px, py, pxy) = (psi(s, x).unwrap(), psi(s, y).unwrap(), psi(s, x * y).unwrap());
        prop_assert!((px.log + py.log - pxy.log).abs() <= TOL * (1.0 + pxy.log.abs()));
        let sum = psi(s + r, x).unwrap();
        prop_assert!((px.log + psi(r, x).unwrap().log - sum.log).abs() <= TOL * (1.0 + sum.log.abs()));
        prop_assert_eq!(psi(0.0, x).unwrap().value, 1.0);
        prop_assert_eq!(psi(0.0, 0.0).unwrap().value, 1.0);
        prop_assert!((px.value - x.powf(s)).abs() <= TOL * x.powf(s));
        let zero = psi(s, 0.0).unwrap().value;
        let expect = if s < 0.0 { f64::INFINITY } else if s == 0.0 { 1.0 } else { 0.0 };
        prop_assert_eq!(zero, expect);
        Ok(())
    })
}

fn h_convex() -> Result<String, String> {
    let grid = uniform_grid(-3.0, 3.0, 0.5).unwrap();
    let schedule = [ScheduleEntry::new(4, 4), ScheduleEntry::new(8, 8)];
    check("h convex", any::<u64>(), |seed| {
        let m = model(&mut ChaCha8Rng::seed_from_u64(seed));
        let numeric = h_curve(&m, &grid, DepthOffset(0), &schedule).unwrap();
        let exact = closed_form_curve(&m, &grid).unwrap();
        prop_assert!(exact.convexity_certificate);
        for h in numeric.h_values.windows(3) {
            prop_assert!(h[0] - 2.0 * h[1] + h[2] >= -2e-2, "second difference {:?}", h);
        }
        for h in exact.h_values.windows(3) {
            prop_assert!(h[0] - 2.0 * h[1] + h[2] >= -TOL);
        }
        Ok(())
    })
}

fn legendre_concave() -> Result<String, String> {
    let grid = uniform_grid(-6.0, 6.0, 0.5).unwrap();
    check("h* concave", (any::<u64>(), any::<bool>()), |(seed, numeric)| {
        let m = model(&mut ChaCha8Rng::seed_from_u64(seed));
        let curve = if numeric {
            h_curve(&m, &grid, DepthOffset(0), &default_schedule()).unwrap()
        } else {
            closed_form_curve(&m, &grid).unwrap()
        };
        // Sample the closed interval the transform is finite on.
        let n = curve.len();
        let slope = |i: usize| (curve.h_values[i + 1] - curve.h_values[i]) / (curve.q_grid[i + 1] - curve.q_grid[i]);
        let (lo, hi) = (-slope(n - 2), -slope(0));
        let betas: Vec<f64> = (0..=100).map(|i| lo + (hi - lo) * i as f64 / 100.0).collect();
        let finite: Vec<f64> = legendre(&curve, &betas)
            .unwrap()
            .iter()
            .filter_map(|p| p.h_star)
            .collect();
        prop_assert!(!finite.is_empty());
        for h in finite.windows(3) {
            prop_assert!(h[0] - 2.0 * h[1] + h[2] <= TOL, "second difference {:?}", h);
        }
        Ok(())
    })
}

fn filtration_nesting() -> Result<String, String> {
    check(
        "filtration nested in N and M",
        (any::<u64>(), 0.0..2.0f64, 0.01..0.5f64, 1usize..20, 0u32..4),
        |(seed, beta, delta, n, mm)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = model(&mut rng);
            let x = m.sample_word(40, &mut rng);
            let at = filtration_check(&m, &x, beta, delta, DepthOffset(mm), n).unwrap();
            let next_n = filtration_check(&m, &x, beta, delta, DepthOffset(mm), n + 1).unwrap();
            prop_assert!(!at.member() || next_n.member());
            let next_m = filtration_check(&m, &x, beta, delta, DepthOffset(mm + 1), n).unwrap();
            prop_assert!(!at.lower_ok || next_m.lower_ok);
            Ok(())
        },
    )
}

fn hausdorff_axioms() -> Result<String, String> {
    check("Hausdorff metric axioms", any::<u64>(), |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = if rng.gen_bool(0.5) { ShiftSpace::full(2) } else { ShiftSpace::golden_mean() };
        let a = random_set(&space, 5, &mut rng);
        let b = random_set(&space, 5, &mut rng);
        let c = random_set(&space, 5, &mut rng);
        let d = |x: &CylinderSet, y: &CylinderSet| hausdorff_distance(&space, x, y);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == 0.0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        Ok(())
    })
}

/// `set` with the cylinder `[u]` removed; `u` must lie inside `set`.
fn remove_cylinder(space: &ShiftSpace, set: &CylinderSet, u: &Word) -> CylinderSet {
    let host = set.members().find(|w| w.is_prefix_of(u)).unwrap().clone();
    let mut pieces: Vec<Word> = set.members().filter(|w| **w != host).cloned().collect();
    for len in host.len()..u.len() {
        let stem = u.prefix(len);
        let keep = u.prefix(len + 1);
        pieces.extend(space.children(&stem).into_iter().filter(|c| *c != keep));
    }
    CylinderSet::new(space, pieces).unwrap()
}

fn semicontinuity() -> Result<String, String> {
    check("semicontinuity probes", params(), |c| {
        let (mut rng, m, p, _) = setup(&c);
        let space = m.space().clone();
        let set = random_set(&space, 3, &mut rng);
        let other = model(&mut rng);
        let other = if other.space() == &space { other } else { m.clone() };
        let base = values(&m, &set, &p, 0);
        let host = set.members().next().unwrap().clone();
        let mut point = host.clone();
        let mut worst_cover = f64::NEG_INFINITY;
        let mut worst_pack = f64::INFINITY;
        for j in 1..=60u32 {
            let u = loop {
                let sym = rng.gen_range(0..space.alphabet_size() as u8);
                let next = point.child(sym);
                if space.is_admissible(&next) {
                    point = next;
                    break point.clone();
                }
            };
            let set_j = remove_cylinder(&space, &set, &u);
            let lambda = 0.5f64.powi(j as i32);
            let model_j = MeasureModel::mixture(&other, &m, lambda).unwrap();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            // Mass ratios between the two models reach ~1e6 at this depth, so the
            // mixture weight decays faster than the exponent offset.
            let p_j = PremeasureParams { q: p.q + sign * 0.5f64.powi(j as i32 - 16), ..p };
            if j >= 56 {
                // A forced symbol can push the nearest surviving sibling one level up.
                let bound = 0.5f64.powi((host.len() + j as usize) as i32 - 2);
                prop_assert!(hausdorff_distance(&space, &set_j, &set) <= bound);
                let v = values(&model_j, &set_j, &p_j, 0);
                worst_cover = worst_cover.max(v.cover - base.cover);
                worst_pack = worst_pack.min(v.pack - base.pack);
            }
        }
        prop_assert!(worst_cover <= TOL, "covering limsup exceeds by {worst_cover}");
        prop_assert!(worst_pack >= -TOL, "packing liminf falls short by {worst_pack}");
        Ok(())
    })
}

pub fn all() -> Result<String, String> {
    let suites: [fn() -> Result<String, String>; 11] = [
        monotone_in_set,
        monotone_in_t,
        monotone_in_n,
        covering_below_packing,
        outer_subadditive,
        psi_identities,
        h_convex,
        legendre_concave,
        filtration_nesting,
        hausdorff_axioms,
        semicontinuity,
    ];
    let mut passed = Vec::new();
    let mut failed = Vec::new();
    for s in suites {
        match s() {
            Ok(m) => passed.push(m),
            Err(e) => failed.push(e),
        }
    }
    if failed.is_empty() {
        Ok(format!("{} cases: {}", passed.len() as u32 * CASES, passed.join(", ")))
    } else {
        Err(failed.join("; "))
    }
}
