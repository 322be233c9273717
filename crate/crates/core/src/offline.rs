//! Offline facility-location baselines.
//!
//! Candidate centers are the demand locations themselves. [`solve_exact`]
//! enumerates every non-empty candidate subset; [`solve_local_search`] runs
//! best-improvement add / drop / swap moves from a single center.

use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Location, MetricSpace};
use crate::seed::rng_from;

/// Ordered demand sequence with a uniform opening cost over a metric space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instance {
    pub space: MetricSpace,
    pub demands: Vec<Location>,
    pub facility_cost: f64,
}

impl Instance {
    pub fn new(space: MetricSpace, demands: Vec<Location>, facility_cost: f64) -> Result<Self> {
        if demands.is_empty() {
            return Err(Error::InvalidInstance("no demands".into()));
        }
        if !(facility_cost > 0.0 && facility_cost.is_finite()) {
            return Err(Error::InvalidInstance(format!("facility cost {facility_cost} must be positive")));
        }
        for d in &demands {
            space.check(d)?;
        }
        Ok(Instance { space, demands, facility_cost })
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    /// Dense `n x n` table of demand-to-demand distances.
    pub fn demand_distances(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.space.distance(&self.demands[i], &self.demands[j])?;
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exactness {
    Exact,
    LocalSearch,
    /// Built from a center set supplied by the caller.
    Declared,
}

impl fmt::Display for Exactness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exactness::Exact => "Exact",
            Exactness::LocalSearch => "LocalSearch",
            Exactness::Declared => "Declared",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OfflineSolution {
    pub centers: Vec<Location>,
    /// Index into `centers` for every demand.
    pub assignment: Vec<usize>,
    pub facility_cost_total: f64,
    pub assignment_cost_total: f64,
    pub total: f64,
    pub exactness: Exactness,
}

impl OfflineSolution {
    /// Opens `centers` and connects every demand to its nearest one
    /// (lowest center index on ties).
    pub fn from_centers(instance: &Instance, centers: Vec<Location>, exactness: Exactness) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        let mut assignment = Vec::with_capacity(instance.len());
        let mut assignment_cost_total = 0.0;
        for d in &instance.demands {
            let near = crate::metric::nearest(&instance.space, d, &centers)?;
            assignment.push(near.index);
            assignment_cost_total += near.distance;
        }
        let facility_cost_total = instance.facility_cost * centers.len() as f64;
        Ok(OfflineSolution {
            centers,
            assignment,
            facility_cost_total,
            assignment_cost_total,
            total: facility_cost_total + assignment_cost_total,
            exactness,
        })
    }

    fn from_demand_indices(instance: &Instance, mut idx: Vec<usize>, exactness: Exactness) -> Result<Self> {
        idx.sort_unstable();
        let centers = idx.iter().map(|&i| instance.demands[i].clone()).collect();
        Self::from_centers(instance, centers, exactness)
    }
}

pub const DEFAULT_MAX_EXACT: usize = 16;
/// Hard ceiling on exact enumeration regardless of the caller's limit.
const EXACT_CEILING: usize = 24;

/// Minimum-cost solution over all non-empty subsets of demand locations.
pub fn solve_exact(instance: &Instance, max_candidates: usize) -> Result<OfflineSolution> {
    let n = instance.len();
    let max = max_candidates.min(EXACT_CEILING);
    if n > max {
        return Err(Error::TooLargeForExact { n, max });
    }
    let dist = instance.demand_distances()?;
    let f = instance.facility_cost;

    let mut best_mask = 0u32;
    let mut best_cost = f64::INFINITY;
    let mut members = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        members.clear();
        members.extend((0..n).filter(|&c| mask & (1 << c) != 0));
        let mut cost = f * members.len() as f64;
        for row in &dist {
            cost += members.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
            if cost >= best_cost {
                break;
            }
        }
        if cost < best_cost {
            best_cost = cost;
            best_mask = mask;
        }
    }
    let idx = (0..n).filter(|&c| best_mask & (1 << c) != 0).collect();
    OfflineSolution::from_demand_indices(instance, idx, Exactness::Exact)
}

pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Per-demand nearest and second-nearest open centers.
struct Coverage {
    near: Vec<usize>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Coverage {
    fn compute(dist: &[Vec<f64>], open: &[usize]) -> Self {
        let n = dist.len();
        let mut cov = Coverage { near: vec![0; n], d1: vec![f64::INFINITY; n], d2: vec![f64::INFINITY; n] };
        for (j, row) in dist.iter().enumerate() {
            for &c in open {
                let d = row[c];
                if d < cov.d1[j] {
                    cov.d2[j] = cov.d1[j];
                    cov.d1[j] = d;
                    cov.near[j] = c;
                } else if d < cov.d2[j] {
                    cov.d2[j] = d;
                }
            }
        }
        cov
    }

    fn total(&self, f: f64, open: usize) -> f64 {
        f * open as f64 + self.d1.iter().sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug)]
enum Move {
    Add(usize),
    Drop(usize),
    Swap { add: usize, drop: usize },
}

/// Best-improvement local search over add, drop and swap moves, starting
/// from the first demand as the only center. A move is taken only when it
/// improves the total by more than `epsilon * total`. `seed` fixes the
/// candidate scan order, which decides ties between equally good moves.
pub fn solve_local_search(instance: &Instance, epsilon: f64, seed: u64) -> Result<OfflineSolution> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be non-negative")));
    }
    let n = instance.len();
    let f = instance.facility_cost;
    let dist = instance.demand_distances()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(seed));

    let mut is_open = vec![false; n];
    is_open[0] = true;
    let mut open = vec![0usize];
    let mut cov = Coverage::compute(&dist, &open);
    let mut total = cov.total(f, open.len());

    let mut bucket = vec![0.0; n];
    loop {
        let mut best: Option<(f64, Move)> = None;
        let mut consider = |delta: f64, mv: Move| {
            if best.is_none_or(|(d, _)| delta < d) {
                best = Some((delta, mv));
            }
        };

        // Drops: demands served by the dropped center fall back to their second choice.
        if open.len() > 1 {
            bucket.iter_mut().for_each(|b| *b = 0.0);
            for j in 0..n {
                bucket[cov.near[j]] += cov.d2[j] - cov.d1[j];
            }
            for &c in order.iter().filter(|&&c| is_open[c]) {
                consider(bucket[c] - f, Move::Drop(c));
            }
        }

        for &c in order.iter().filter(|&&c| !is_open[c]) {
            // gain of adding c with everything else open
            let mut gain = 0.0;
            bucket.iter_mut().for_each(|b| *b = 0.0);
            for j in 0..n {
                let djc = dist[j][c];
                let g = (cov.d1[j] - djc).max(0.0);
                gain += g;
                bucket[cov.near[j]] += djc.min(cov.d2[j]) - cov.d1[j] + g;
            }
            consider(f - gain, Move::Add(c));
            for &o in order.iter().filter(|&&o| is_open[o]) {
                consider(bucket[o] - gain, Move::Swap { add: c, drop: o });
            }
        }

        let Some((delta, mv)) = best else { break };
        if -delta <= epsilon * total {
            break;
        }
        match mv {
            Move::Add(c) => is_open[c] = true,
            Move::Drop(c) => is_open[c] = false,
            Move::Swap { add, drop } => {
                is_open[add] = true;
                is_open[drop] = false;
            }
        }
        let next_open: Vec<usize> = (0..n).filter(|&c| is_open[c]).collect();
        let next_cov = Coverage::compute(&dist, &next_open);
        let next_total = next_cov.total(f, next_open.len());
        if next_total >= total {
            // rounding made the predicted gain vanish; undo and stop
            break;
        }
        open = next_open;
        cov = next_cov;
        total = next_total;
    }
    OfflineSolution::from_demand_indices(instance, open, Exactness::LocalSearch)
}

/// The center demand `index` is assigned to.
pub fn optimal_center_of(solution: &OfflineSolution, index: usize) -> Result<&Location> {
    let c = *solution
        .assignment
        .get(index)
        .ok_or(Error::IndexOutOfRange { index, len: solution.assignment.len() })?;
    Ok(&solution.centers[c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64], f: f64) -> Instance {
        let demands = xs.iter().map(|&x| Location::Point(vec![x])).collect();
        Instance::new(MetricSpace::euclidean(1), demands, f).unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
        let demands = (0..n)
            .map(|_| Location::Point(vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]))
            .collect();
        Instance::new(MetricSpace::euclidean(2), demands, rng.random_range(0.5..8.0)).unwrap()
    }

    /// Direct subset enumeration with no pruning.
    fn brute_force(inst: &Instance) -> f64 {
        let d = inst.demand_distances().unwrap();
        let n = inst.len();
        (1u32..(1 << n))
            .map(|mask| {
                let open: Vec<usize> = (0..n).filter(|c| mask & (1 << c) != 0).collect();
                inst.facility_cost * open.len() as f64
                    + d.iter().map(|row| open.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min)).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(MetricSpace::euclidean(1), vec![], 1.0).is_err());
        assert!(Instance::new(MetricSpace::euclidean(1), vec![Location::Point(vec![0.0])], 0.0).is_err());
        assert!(Instance::new(MetricSpace::euclidean(2), vec![Location::Point(vec![0.0])], 1.0).is_err());
    }

    #[test]
    fn exact_small_cases() {
        let s = solve_exact(&line(&[0.0], 1.0), DEFAULT_MAX_EXACT).unwrap();
        assert_eq!((s.centers.len(), s.total), (1, 1.0));
        let s = solve_exact(&line(&[0.0, 3.0], 1.0), DEFAULT_MAX_EXACT).unwrap();
        assert_eq!((s.centers.len(), s.total), (2, 2.0));
        let s = solve_exact(&line(&[0.0, 0.5], 1.0), DEFAULT_MAX_EXACT).unwrap();
        assert_eq!((s.centers.len(), s.total), (1, 1.5));
        assert_eq!(s.exactness, Exactness::Exact);
    }

    #[test]
    fn exact_rejects_large() {
        let xs: Vec<f64> = (0..17).map(f64::from).collect();
        assert!(matches!(
            solve_exact(&line(&xs, 1.0), DEFAULT_MAX_EXACT),
            Err(Error::TooLargeForExact { n: 17, max: 16 })
        ));
    }

    #[test]
    fn exact_matches_brute_force_and_is_order_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.random_range(1..=9);
            let inst = random_instance(&mut rng, n);
            let s = solve_exact(&inst, DEFAULT_MAX_EXACT).unwrap();
            assert!((s.total - brute_force(&inst)).abs() < 1e-9);
            assert!((s.total - (s.facility_cost_total + s.assignment_cost_total)).abs() < 1e-12);

            let mut rev = inst.clone();
            rev.demands.reverse();
            let r = solve_exact(&rev, DEFAULT_MAX_EXACT).unwrap();
            assert!((r.total - s.total).abs() < 1e-9);
        }
    }

    #[test]
    fn local_search_coincident_demands() {
        let s = solve_local_search(&line(&[2.0; 5], 3.0), DEFAULT_EPSILON, 0).unwrap();
        assert_eq!((s.centers.len(), s.total), (1, 3.0));
    }

    #[test]
    fn local_search_two_clusters() {
        let xs = [0.0, 0.01, 0.02, 100.0, 100.01, 100.02];
        let inst = line(&xs, 1.0);
        assert_eq!(solve_exact(&inst, DEFAULT_MAX_EXACT).unwrap().centers.len(), 2);
        let s = solve_local_search(&inst, DEFAULT_EPSILON, 3).unwrap();
        assert_eq!(s.centers.len(), 2);
        assert_eq!(s.exactness, Exactness::LocalSearch);
    }

    #[test]
    fn local_search_within_three_of_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..40 {
            let n = rng.random_range(1..=12);
            let inst = random_instance(&mut rng, n);
            let exact = solve_exact(&inst, DEFAULT_MAX_EXACT).unwrap();
            let ls = solve_local_search(&inst, DEFAULT_EPSILON, k).unwrap();
            assert!(exact.total <= ls.total + 1e-9);
            assert!(ls.total <= 3.0 * exact.total);
        }
    }

    #[test]
    fn local_search_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = random_instance(&mut rng, 60);
        let a = solve_local_search(&inst, DEFAULT_EPSILON, 4).unwrap();
        let b = solve_local_search(&inst, DEFAULT_EPSILON, 4).unwrap();
        assert_eq!(a.centers, b.centers);
        assert_eq!(a.total.to_bits(), b.total.to_bits());
    }

    #[test]
    fn assignment_is_nearest_center() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let inst = random_instance(&mut rng, 10);
        let s = solve_local_search(&inst, DEFAULT_EPSILON, 1).unwrap();
        for (i, d) in inst.demands.iter().enumerate() {
            let mut best = (0, f64::INFINITY);
            for (c, loc) in s.centers.iter().enumerate() {
                let dd = inst.space.distance(d, loc).unwrap();
                if dd < best.1 {
                    best = (c, dd);
                }
            }
            assert_eq!(optimal_center_of(&s, i).unwrap(), &s.centers[best.0]);
        }
        let again = OfflineSolution::from_centers(&inst, s.centers.clone(), s.exactness).unwrap();
        assert_eq!(again.total, s.total);
    }

    #[test]
    fn optimal_center_lookup() {
        let inst = line(&[0.0, 1.0, 2.0], 10.0);
        let s = solve_exact(&inst, DEFAULT_MAX_EXACT).unwrap();
        for i in 0..3 {
            assert_eq!(optimal_center_of(&s, i).unwrap(), &s.centers[0]);
        }
        assert!(matches!(optimal_center_of(&s, 3), Err(Error::IndexOutOfRange { .. })));

        // demand at 1.0 is equidistant to centers at 0.0 and 2.0
        let two = OfflineSolution::from_centers(
            &inst,
            vec![Location::Point(vec![0.0]), Location::Point(vec![2.0])],
            Exactness::Declared,
        )
        .unwrap();
        assert_eq!(optimal_center_of(&two, 1).unwrap(), &Location::Point(vec![0.0]));
    }
}
