use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PlannerError;
use crate::exec::Exec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IlsParams {
    /// Distinct candidate evaluations per run.
    pub max_evaluations: usize,
    /// Share of bits flipped by a perturbation.
    pub perturbation: f64,
    /// Non-improving perturbations before a random restart.
    pub restart_after: usize,
    pub max_restarts: usize,
}

impl Default for IlsParams {
    fn default() -> Self {
        IlsParams { max_evaluations: 20_000, perturbation: 0.05, restart_after: 20, max_restarts: usize::MAX }
    }
}

/// Outcome of one candidate evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// €/a of the active measures.
    pub cost: f64,
    /// Number of violated constraints.
    pub violations: usize,
    /// Summed violation magnitude.
    pub magnitude: f64,
}

impl Evaluation {
    pub fn feasible(&self) -> bool {
        self.violations == 0
    }
}

/// Step-wise objective: cost plus a per-violation step and a magnitude term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub per_violation: f64,
    pub per_magnitude: f64,
}

impl Penalty {
    /// Step weight of ten times the pool cost, so every feasible candidate
    /// beats every infeasible one.
    pub fn for_pool(pool_cost: f64, per_magnitude: f64) -> Self {
        Penalty { per_violation: 10.0 * pool_cost.max(1000.0), per_magnitude }
    }

    pub fn value(&self, e: &Evaluation) -> f64 {
        e.cost + self.per_violation * e.violations as f64 + self.per_magnitude * e.magnitude
    }
}

/// Activation vector over a measure pool with its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    pub active: Vec<bool>,
    pub evaluation: Evaluation,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct IlsResult {
    pub best: CandidateSolution,
    pub evaluations: usize,
    /// Best value after the initial descent and after every iteration.
    pub trace: Vec<f64>,
}

struct Search<'a, F> {
    objective: &'a F,
    penalty: Penalty,
    exec: Exec,
    batch: usize,
    budget: usize,
    cache: HashMap<Vec<bool>, Evaluation>,
    counted: HashSet<Vec<bool>>,
}

impl<F> Search<'_, F>
where
    F: Fn(&[bool]) -> Evaluation + Sync,
{
    fn exhausted(&self) -> bool {
        self.counted.len() >= self.budget
    }

    /// Evaluation of `x` in sequential bookkeeping: the first request of a
    /// vector spends one unit of budget. `None` once the budget is spent.
    fn request(&mut self, x: &[bool]) -> Option<CandidateSolution> {
        if !self.counted.contains(x) {
            if self.exhausted() {
                return None;
            }
            self.counted.insert(x.to_vec());
        }
        let e = match self.cache.get(x) {
            Some(e) => *e,
            None => {
                let e = (self.objective)(x);
                self.cache.insert(x.to_vec(), e);
                e
            }
        };
        Some(CandidateSolution { active: x.to_vec(), evaluation: e, value: self.penalty.value(&e) })
    }

    /// Fills the cache for a batch of vectors, in parallel where enabled.
    fn prefetch(&mut self, xs: &[Vec<bool>]) {
        let missing: Vec<Vec<bool>> = xs.iter().filter(|x| !self.cache.contains_key(*x)).cloned().collect();
        if missing.len() < 2 {
            return;
        }
        let objective = self.objective;
        let evals = self.exec.map(&missing, |x| objective(x));
        for (x, e) in missing.into_iter().zip(evals) {
            self.cache.insert(x, e);
        }
    }

    /// First-improvement hill climbing over single-bit flips in random order.
    fn climb(&mut self, start: CandidateSolution, rng: &mut ChaCha8Rng) -> CandidateSolution {
        let n = start.active.len();
        let mut cur = start;
        'sweep: loop {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            for chunk in order.chunks(self.batch.max(1)) {
                let flips: Vec<Vec<bool>> = chunk
                    .iter()
                    .map(|&j| {
                        let mut y = cur.active.clone();
                        y[j] = !y[j];
                        y
                    })
                    .collect();
                self.prefetch(&flips);
                for y in flips {
                    let Some(c) = self.request(&y) else { return cur };
                    if c.value < cur.value {
                        cur = c;
                        continue 'sweep;
                    }
                }
            }
            return cur;
        }
    }
}

/// Iterated local search over activation vectors of length `n`.
///
/// The empty vector is evaluated first, then `initial` if given; the better
/// one seeds a hill climb. Each iteration perturbs the incumbent, climbs,
/// and accepts the result if it is no worse. After `restart_after`
/// iterations without a new best the incumbent is replaced by a random
/// vector. Results do not depend on `exec`.
pub fn ils<F>(
    n: usize,
    objective: &F,
    penalty: Penalty,
    params: &IlsParams,
    seed: u64,
    initial: Option<&[bool]>,
    exec: Exec,
) -> Result<IlsResult, PlannerError>
where
    F: Fn(&[bool]) -> Evaluation + Sync,
{
    if params.max_evaluations == 0 {
        return Err(PlannerError::ZeroBudget);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch = match exec {
        Exec::Sequential => 1,
        Exec::Parallel => 8,
    };
    let mut s = Search {
        objective,
        penalty,
        exec,
        batch,
        budget: params.max_evaluations,
        cache: HashMap::new(),
        counted: HashSet::new(),
    };
    let empty = vec![false; n];
    let mut start = s.request(&empty).expect("budget is positive");
    if let Some(init) = initial {
        if init.len() != n {
            return Err(PlannerError::PoolMismatch { expected: n, got: init.len() });
        }
        if let Some(c) = s.request(init) {
            if c.value < start.value {
                start = c;
            }
        }
    }
    if n == 0 {
        return Ok(IlsResult { trace: vec![start.value], best: start, evaluations: s.counted.len() });
    }
    let mut best = s.climb(start, &mut rng);
    let mut current = best.clone();
    let mut trace = vec![best.value];
    let k = ((params.perturbation * n as f64).ceil() as usize).clamp(1, n);
    let space = if n < 63 { 1usize << n } else { usize::MAX };
    let (mut stale, mut restarts) = (0usize, 0usize);
    let mut iterations = 0;
    while !s.exhausted() && s.counted.len() < space && iterations < params.max_evaluations {
        iterations += 1;
        let mut y = current.active.clone();
        for j in rand::seq::index::sample(&mut rng, n, k) {
            y[j] = !y[j];
        }
        let Some(c) = s.request(&y) else { break };
        let c = s.climb(c, &mut rng);
        if c.value <= current.value {
            current = c.clone();
        }
        if c.value < best.value {
            best = c;
            stale = 0;
        } else {
            stale += 1;
        }
        if stale >= params.restart_after {
            if restarts >= params.max_restarts {
                trace.push(best.value);
                break;
            }
            restarts += 1;
            stale = 0;
            let r: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            if let Some(c) = s.request(&r) {
                let c = s.climb(c, &mut rng);
                if c.value < best.value {
                    best = c.clone();
                }
                current = c;
            }
        }
        trace.push(best.value);
    }
    Ok(IlsResult { best, evaluations: s.counted.len(), trace })
}
