//! Lower-bound instances on a binary hierarchically well-separated tree.
//!
//! The tree has `lambda = m * alpha` levels; an edge from a level-`i`
//! vertex to its child has length `m^(lambda-1-i) / alpha`. A random
//! root-to-leaf path `v_0..v_lambda` is drawn and phase `i` places
//! `m^i / alpha` demands on `v_i` (rounded up when not integral). The
//! opening cost is `f = m^lambda / alpha` and the single facility at
//! `v_lambda` is the reference optimum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace, WeightedTree};
use crate::offline::{Exactness, Instance, OfflineSolution};
use crate::online::{ratio, run, Algorithm};
use crate::predictors::{compute_errors, PredictionSequence};
use crate::seed::{derive_seed, rng_from};

/// Trees deeper than this keep only the drawn path and its siblings.
pub const FULL_TREE_MAX_LEVELS: u32 = 20;
pub const DEFAULT_NODE_BUDGET: usize = (1 << (FULL_TREE_MAX_LEVELS + 1)) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HstParams {
    pub m: u32,
    pub alpha: f64,
    pub levels: u32,
}

impl HstParams {
    pub fn new(m: u32, alpha: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m = {m} must be at least 2")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        let lambda = m as f64 * alpha;
        let levels = lambda.round();
        if (lambda - levels).abs() > 1e-9 || levels < 1.0 {
            return Err(Error::InvalidParameter(format!("lambda = m * alpha = {lambda} is not a positive integer")));
        }
        if levels > 60.0 {
            return Err(Error::InvalidParameter(format!("lambda = {levels} is too deep")));
        }
        Ok(HstParams { m, alpha, levels: levels as u32 })
    }

    fn pow(&self, e: i32) -> f64 {
        (self.m as f64).powi(e)
    }

    /// Length of the edge from a level-`i` vertex down to its children.
    pub fn child_edge(&self, level: u32) -> f64 {
        self.pow(self.levels as i32 - 1 - level as i32) / self.alpha
    }

    pub fn facility_cost(&self) -> f64 {
        self.pow(self.levels as i32) / self.alpha
    }

    /// Demands issued in phase `i`: `m^i / alpha`, rounded up.
    pub fn phase_demands(&self, phase: u32) -> usize {
        let exact = self.pow(phase as i32) / self.alpha;
        let rounded = exact.round();
        if (exact - rounded).abs() <= 1e-9 * exact.max(1.0) {
            rounded as usize
        } else {
            exact.ceil() as usize
        }
    }

    /// `(m^(lambda+1) - 1) / (alpha (m - 1))`
    pub fn closed_form_demands(&self) -> f64 {
        (self.pow(self.levels as i32 + 1) - 1.0) / (self.alpha * (self.m as f64 - 1.0))
    }

    /// Upper bound `2 f m / (m - 1)` on the single-center cost.
    pub fn opt_bound(&self) -> f64 {
        2.0 * self.facility_cost() * self.m as f64 / (self.m as f64 - 1.0)
    }

    pub fn full_tree_nodes(&self) -> usize {
        (1usize << (self.levels + 1)) - 1
    }
}

/// A materialized HST. Node ids of a full tree follow heap order
/// (children of `v` are `2v+1` and `2v+2`).
#[derive(Clone, Debug)]
pub struct Hst {
    pub params: HstParams,
    pub tree: WeightedTree,
}

/// Complete binary tree with the HST edge lengths.
pub fn build_hst(m: u32, alpha: f64, node_budget: usize) -> Result<Hst> {
    let params = HstParams::new(m, alpha)?;
    if params.levels >= usize::BITS - 1 || params.full_tree_nodes() > node_budget {
        return Err(Error::InvalidParameter(format!(
            "full tree with {} levels exceeds the node budget of {node_budget}",
            params.levels
        )));
    }
    let n = params.full_tree_nodes();
    let mut parent = vec![None; n];
    let mut length = vec![0.0; n];
    for v in 1..n {
        let p = (v - 1) / 2;
        parent[v] = Some(p);
        let level_of_p = usize::BITS - 1 - (p + 1).leading_zeros();
        length[v] = params.child_edge(level_of_p);
    }
    Ok(Hst { params, tree: WeightedTree::new(parent, length)? })
}

#[derive(Clone, Debug)]
pub struct HstInstance {
    pub params: HstParams,
    pub tree: WeightedTree,
    pub full_tree: bool,
    /// `v_0..v_lambda`
    pub path: Vec<usize>,
    pub instance: Instance,
    pub predictions: PredictionSequence,
    /// Phase of each demand.
    pub phase_of: Vec<u32>,
    pub declared_eta1: f64,
}

/// Portable instance description for replay through the online engine.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayInstance {
    pub space: MetricSpace,
    pub facility_cost: f64,
    pub demands: Vec<Location>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predictions: Option<Vec<Location>>,
}

impl ReplayInstance {
    pub fn into_parts(self) -> Result<(Instance, Option<PredictionSequence>)> {
        let instance = Instance::new(self.space, self.demands, self.facility_cost)?;
        let preds = self.predictions.map(PredictionSequence::from_locations);
        if let Some(p) = &preds {
            if p.len() != instance.len() {
                return Err(Error::LengthMismatch { expected: instance.len(), found: p.len() });
            }
            for loc in &p.locations {
                instance.space.check(loc)?;
            }
        }
        Ok((instance, preds))
    }
}

impl HstInstance {
    /// The reference solution: one facility at `v_lambda`.
    pub fn single_center_solution(&self) -> Result<OfflineSolution> {
        let leaf = *self.path.last().expect("path is never empty");
        OfflineSolution::from_centers(&self.instance, vec![Location::Node(leaf)], Exactness::Declared)
    }

    pub fn to_replay(&self) -> ReplayInstance {
        ReplayInstance {
            space: self.instance.space.clone(),
            facility_cost: self.instance.facility_cost,
            demands: self.instance.demands.clone(),
            predictions: Some(self.predictions.locations.clone()),
        }
    }
}

/// Only the root-to-leaf path and, for each path vertex, its off-path
/// child. Distances between the kept nodes equal those in the full tree.
fn path_tree(params: &HstParams, turns: &[bool]) -> Result<(WeightedTree, Vec<usize>)> {
    let mut parent = vec![None];
    let mut length = vec![0.0];
    let mut path = vec![0usize];
    for (level, _) in turns.iter().enumerate() {
        let here = *path.last().expect("non-empty");
        let edge = params.child_edge(level as u32);
        // on-path child first, then its sibling
        parent.push(Some(here));
        length.push(edge);
        let next = parent.len() - 1;
        parent.push(Some(here));
        length.push(edge);
        path.push(next);
    }
    Ok((WeightedTree::new(parent, length)?, path))
}

/// Draws a lower-bound instance with its adversarial predictions.
///
/// Each phase-`i` prediction sits on the path from `v_lambda` toward `v_i`
/// at distance `alpha * d(v_i, v_lambda)` from `v_lambda`, clamped to the
/// edge `(v_i, v_(i+1))`.
pub fn generate_lower_bound_instance(m: u32, alpha: f64, seed: u64) -> Result<HstInstance> {
    generate_with_budget(m, alpha, seed, DEFAULT_NODE_BUDGET)
}

pub fn generate_with_budget(m: u32, alpha: f64, seed: u64, node_budget: usize) -> Result<HstInstance> {
    let params = HstParams::new(m, alpha)?;
    let mut rng = rng_from(seed);
    let turns: Vec<bool> = (0..params.levels).map(|_| rng.random()).collect();

    let full = params.levels <= FULL_TREE_MAX_LEVELS && params.full_tree_nodes() <= node_budget;
    let (tree, path) = if full {
        let hst = build_hst(m, alpha, node_budget)?;
        let mut path = vec![0usize];
        for &right in &turns {
            let v = *path.last().expect("non-empty");
            path.push(2 * v + 1 + usize::from(right));
        }
        (hst.tree, path)
    } else {
        path_tree(&params, &turns)?
    };

    let leaf = *path.last().expect("non-empty");
    let space = MetricSpace::Tree(tree.clone());
    let mut demands = Vec::new();
    let mut predictions = Vec::new();
    let mut phase_of = Vec::new();
    for (phase, &v) in path.iter().enumerate() {
        let phase = phase as u32;
        let dist_to_leaf = tree.root_distance(leaf) - tree.root_distance(v);
        let prediction = if v == leaf {
            Location::Node(leaf)
        } else {
            let next = path[phase as usize + 1];
            let lo = tree.root_distance(leaf) - tree.root_distance(next);
            let along = (alpha * dist_to_leaf).clamp(lo, dist_to_leaf);
            tree.point_on_path(leaf, v, along)
        };
        for _ in 0..params.phase_demands(phase) {
            demands.push(Location::Node(v));
            predictions.push(prediction.clone());
            phase_of.push(phase);
        }
    }

    let instance = Instance::new(space, demands, params.facility_cost())?;
    let mut out = HstInstance {
        params,
        tree,
        full_tree: full,
        path,
        instance,
        predictions: PredictionSequence::from_locations(predictions),
        phase_of,
        declared_eta1: 0.0,
    };
    let reference = out.single_center_solution()?;
    out.declared_eta1 = compute_errors(&out.instance, &reference, &out.predictions)?.eta1;
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversarialSummary {
    pub algorithm: Algorithm,
    pub m: u32,
    pub alpha: f64,
    pub levels: u32,
    pub trials: usize,
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub max: f64,
    /// Single-center cost per trial.
    pub opt_totals: Vec<f64>,
    pub opt_bound: f64,
}

impl AdversarialSummary {
    pub fn bound_holds(&self) -> bool {
        self.opt_totals.iter().all(|&o| o <= self.opt_bound + 1e-9 * self.opt_bound)
    }
}

/// Runs `algorithm` on `trials` freshly drawn instances. Ratios are taken
/// against the single-center cost at `v_lambda`, an upper bound on the
/// optimum, so they under-estimate the true ratios.
pub fn measure_adversarial_ratio(
    m: u32,
    alpha: f64,
    algorithm: Algorithm,
    trials: usize,
    seed: u64,
) -> Result<AdversarialSummary> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let params = HstParams::new(m, alpha)?;
    let mut ratios = Vec::with_capacity(trials);
    let mut opt_totals = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        let hst = generate_lower_bound_instance(m, alpha, derive_seed(seed, &[t, 0]))?;
        let opt = hst.single_center_solution()?.total;
        let result = run(algorithm, &hst.instance, Some(&hst.predictions), derive_seed(seed, &[t, 1]))?;
        ratios.push(ratio(result.total, opt)?);
        opt_totals.push(opt);
    }
    let mean = ratios.iter().sum::<f64>() / trials as f64;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(AdversarialSummary {
        algorithm,
        m,
        alpha,
        levels: params.levels,
        trials,
        ratios,
        mean,
        max,
        opt_totals,
        opt_bound: params.opt_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offline::{solve_exact, DEFAULT_MAX_EXACT};

    #[test]
    fn parameter_checks() {
        assert!(HstParams::new(1, 1.0).is_err());
        assert!(HstParams::new(2, 0.3).is_err());
        assert!(HstParams::new(2, -1.0).is_err());
        let p = HstParams::new(3, 1.0 / 3.0).unwrap();
        assert_eq!(p.levels, 1);
    }

    #[test]
    fn hst_edge_lengths_m2_alpha1() {
        let hst = build_hst(2, 1.0, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(hst.params.levels, 2);
        assert_eq!(hst.tree.len(), 7);
        assert_eq!(hst.tree.edge_length(1), 2.0);
        assert_eq!(hst.tree.edge_length(3), 1.0);
        let s = MetricSpace::Tree(hst.tree);
        assert_eq!(s.distance(&Location::Node(3), &Location::Node(6)).unwrap(), 6.0);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(build_hst(2, 4.0, 100).is_err());
        assert!(build_hst(2, 4.0, 511).is_ok());
    }

    #[test]
    fn subtree_distance_bounds() {
        for (m, alpha) in [(2, 1.0), (2, 2.0), (3, 1.0), (4, 0.5)] {
            let hst = build_hst(m, alpha, DEFAULT_NODE_BUDGET).unwrap();
            let p = hst.params;
            let t = &hst.tree;
            let space = MetricSpace::Tree(t.clone());
            for v in 0..t.len() {
                let i = t.level(v) as i32;
                let inside = p.pow(p.levels as i32 - i) / (p.alpha * (m as f64 - 1.0));
                let outside = p.pow(p.levels as i32 - i) / p.alpha;
                for u in 0..t.len() {
                    let d = space.distance(&Location::Node(v), &Location::Node(u)).unwrap();
                    if t.is_ancestor(v, u) {
                        assert!(d <= inside + 1e-9, "({v},{u})");
                    } else {
                        assert!(d >= outside - 1e-9, "({v},{u})");
                    }
                }
            }
        }
    }

    #[test]
    fn demand_counts_match_closed_form() {
        let h = generate_lower_bound_instance(2, 1.0, 0).unwrap();
        assert_eq!(h.instance.len(), 7);
        assert_eq!(h.instance.facility_cost, 4.0);
        for (m, alpha) in [(2, 1.0), (3, 1.0), (2, 0.5), (4, 0.5), (3, 1.0 / 3.0)] {
            let h = generate_lower_bound_instance(m, alpha, 1).unwrap();
            let p = h.params;
            for i in 0..=p.levels {
                let count = h.phase_of.iter().filter(|&&q| q == i).count();
                assert_eq!(count as f64, p.pow(i as i32) / alpha);
            }
            assert!((h.instance.len() as f64 - p.closed_form_demands()).abs() < 1e-9);
        }
    }

    #[test]
    fn fractional_counts_round_up() {
        let p = HstParams::new(2, 2.0).unwrap();
        let counts: Vec<usize> = (0..=p.levels).map(|i| p.phase_demands(i)).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 8]);
    }

    #[test]
    fn single_center_within_bound_and_optimal_on_small_tree() {
        let h = generate_lower_bound_instance(2, 1.0, 5).unwrap();
        let single = h.single_center_solution().unwrap();
        assert!(single.total <= h.params.opt_bound());
        let exact = solve_exact(&h.instance, DEFAULT_MAX_EXACT).unwrap();
        assert!(exact.total <= single.total + 1e-12);
        for alg in [Algorithm::Meyerson, Algorithm::PredFl] {
            let r = run(alg, &h.instance, Some(&h.predictions), 3).unwrap();
            assert!(r.total / exact.total >= 1.0 - 1e-9);
        }
        for lambda in [4u32, 6, 8] {
            let h = generate_lower_bound_instance(2, lambda as f64 / 2.0, 9).unwrap();
            assert!(h.single_center_solution().unwrap().total <= h.params.opt_bound());
        }
    }

    #[test]
    fn predictions_lie_on_the_next_path_edge() {
        for (m, alpha) in [(2, 1.0), (4, 0.5), (3, 1.0), (2, 2.0)] {
            let h = generate_lower_bound_instance(m, alpha, 11).unwrap();
            let space = &h.instance.space;
            for (k, pred) in h.predictions.locations.iter().enumerate() {
                let phase = h.phase_of[k] as usize;
                if phase == h.params.levels as usize {
                    assert_eq!(pred, &Location::Node(h.path[phase]));
                    continue;
                }
                let (vi, vn) = (Location::Node(h.path[phase]), Location::Node(h.path[phase + 1]));
                let edge = space.distance(&vi, &vn).unwrap();
                let on = space.distance(&vi, pred).unwrap() + space.distance(pred, &vn).unwrap();
                assert!((on - edge).abs() < 1e-9);
                if alpha < 1.0 {
                    // strictly revealing the next subtree
                    assert!(space.distance(pred, &vn).unwrap() < edge);
                }
            }
        }
    }

    #[test]
    fn lazy_tree_matches_full_tree_distances() {
        let full = generate_with_budget(2, 3.0, 4, DEFAULT_NODE_BUDGET).unwrap();
        let lazy = generate_with_budget(2, 3.0, 4, 10).unwrap();
        assert!(full.full_tree && !lazy.full_tree);
        assert_eq!(full.instance.len(), lazy.instance.len());
        let n = full.instance.len();
        for i in 0..n {
            for j in 0..n {
                let a = full.instance.space.distance(&full.instance.demands[i], &full.instance.demands[j]).unwrap();
                let b = lazy.instance.space.distance(&lazy.instance.demands[i], &lazy.instance.demands[j]).unwrap();
                assert!((a - b).abs() < 1e-9);
                let pa = full.instance.space.distance(&full.predictions.locations[i], &full.instance.demands[j]).unwrap();
                let pb = lazy.instance.space.distance(&lazy.predictions.locations[i], &lazy.instance.demands[j]).unwrap();
                assert!((pa - pb).abs() < 1e-9);
            }
        }
        assert_eq!(full.declared_eta1, lazy.declared_eta1);
    }

    #[test]
    fn deep_instances_use_the_path_tree() {
        let h = generate_lower_bound_instance(2, 10.5, 0).unwrap();
        assert!(!h.full_tree);
        assert_eq!(h.tree.len(), 2 * 21 + 1);
    }

    #[test]
    fn replay_round_trip() {
        let h = generate_lower_bound_instance(2, 2.0, 3).unwrap();
        let json = serde_json::to_string(&h.to_replay()).unwrap();
        let back: ReplayInstance = serde_json::from_str(&json).unwrap();
        let (inst, preds) = back.into_parts().unwrap();
        let a = run(Algorithm::PredFl, &h.instance, Some(&h.predictions), 1).unwrap();
        let b = run(Algorithm::PredFl, &inst, preds.as_ref(), 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn summary_shape() {
        let s = measure_adversarial_ratio(2, 1.0, Algorithm::Meyerson, 5, 0).unwrap();
        assert_eq!(s.ratios.len(), 5);
        assert!(s.mean <= s.max);
        assert!(s.bound_holds());
        assert!(measure_adversarial_ratio(2, 1.0, Algorithm::Meyerson, 0, 0).is_err());
    }
}
