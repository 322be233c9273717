//! MIN: follow one of two online algorithms at a time under doubling
//! cost thresholds, buying the other algorithm's recent facilities when
//! switching to it.
//!
//! Both algorithms run as shadows on every demand. While following `A_i`
//! the combination is charged `A_i`'s step costs. After each demand, as
//! long as `cost(A_i) > 2^ell`:
//!
//! * if `fcost(A_j) - prev_fcost[j] > cost(A_i) + prev_cost[j]` (with
//!   `j = 1 - i`) the threshold doubles and `A_i` stays followed;
//! * otherwise `fcost(A_j) - prev_fcost[j]` is paid, both ledgers are
//!   snapshotted into `prev_*`, the threshold doubles and `A_j` becomes
//!   the followed algorithm.

use crate::error::Result;
use crate::online::{Algorithm, CombinerTrace, FollowStep, OnlineRunner, RunResult, SwitchEvent};
use crate::offline::Instance;
use crate::predictions_for;
use crate::predictors::PredictionSequence;
use crate::seed::derive_seed;

/// Seeds of the two shadow simulations for a MIN run seeded by `seed`.
pub fn shadow_seeds(seed: u64) -> [u64; 2] {
    [derive_seed(seed, &[0]), derive_seed(seed, &[1])]
}

/// A MIN run together with the complete shadow runs it followed.
#[derive(Clone, Debug)]
pub struct CombinedRun {
    pub result: RunResult,
    pub shadows: [RunResult; 2],
}

impl CombinedRun {
    pub fn min_shadow_total(&self) -> f64 {
        self.shadows[0].total.min(self.shadows[1].total)
    }
}

pub fn min_combine(
    instance: &Instance,
    predictions: Option<&PredictionSequence>,
    alg_a: Algorithm,
    alg_b: Algorithm,
    seed: u64,
) -> Result<RunResult> {
    Ok(min_combine_detailed(instance, predictions, alg_a, alg_b, seed)?.result)
}

pub fn min_combine_detailed(
    instance: &Instance,
    predictions: Option<&PredictionSequence>,
    alg_a: Algorithm,
    alg_b: Algorithm,
    seed: u64,
) -> Result<CombinedRun> {
    let f = instance.facility_cost;
    let seeds = shadow_seeds(seed);
    let mut shadows = [
        OnlineRunner::new(alg_a, instance, predictions_for(alg_a, predictions), seeds[0])?,
        OnlineRunner::new(alg_b, instance, predictions_for(alg_b, predictions), seeds[1])?,
    ];

    let mut ell: u32 = 0;
    let mut following = 0usize;
    let mut prev_fcost = [0.0f64; 2];
    let mut prev_cost = [0.0f64; 2];
    let mut prev_opened = [0usize; 2];

    let mut fcost = 0.0;
    let mut acost = 0.0;
    let mut n_opened = 0usize;
    let mut decisions = Vec::with_capacity(instance.len());
    let mut trace = CombinerTrace::default();

    let cost = |s: &OnlineRunner| s.state.total();
    let threshold = |ell: u32| 2f64.powi(ell as i32);

    for t in 0..instance.len() {
        let mut records = Vec::with_capacity(2);
        for s in shadows.iter_mut() {
            records.push(s.step()?.clone());
        }
        let rec = records.swap_remove(following);
        let opened_fee = if rec.opened.is_some() { f } else { 0.0 };
        fcost += opened_fee;
        acost += rec.step_cost - opened_fee;
        n_opened += usize::from(rec.opened.is_some());
        trace.steps.push(FollowStep { demand_index: t, followed: following, charged: rec.step_cost });
        decisions.push(rec);

        while cost(&shadows[following]) > threshold(ell) {
            let other = 1 - following;
            let pending = shadows[other].state.fcost - prev_fcost[other];
            if pending > cost(&shadows[following]) + prev_cost[other] {
                ell += 1;
                trace.stays += 1;
                continue;
            }
            let bought = shadows[other].state.open.len() - prev_opened[other];
            for k in 0..2 {
                prev_fcost[k] = shadows[k].state.fcost;
                prev_cost[k] = cost(&shadows[k]);
                prev_opened[k] = shadows[k].state.open.len();
            }
            ell += 1;
            fcost += pending;
            n_opened += bought;
            trace.switches.push(SwitchEvent { after_demand: t, from: following, to: other, payment: pending, ell });
            following = other;
        }
    }
    trace.final_ell = ell;

    let [a, b] = shadows;
    let shadows = [a.finish(seeds[0])?, b.finish(seeds[1])?];
    let result = RunResult {
        algorithm: format!("min({alg_a},{alg_b})"),
        seed,
        total: fcost + acost,
        fcost,
        acost,
        n_opened,
        trace: Some(decisions),
        combiner: Some(trace),
    };
    Ok(CombinedRun { result, shadows })
}
