//! Distributed multiagent pseudogradient ascent, simulated in process.
//!
//! Every worker holds a full replica of the training state. Per iteration
//! each active worker is assigned a player and a perturbation scale by a
//! rule all workers evaluate identically, regenerates every worker's noise
//! vector from the shared seed, evaluates its own central difference, and
//! sends that single scalar to the coordinator. The coordinator broadcasts
//! the collected scalars and every replica applies the same update.
//!
//! Randomness is keyed, not sequential: worker `j`'s noise at iteration `t`
//! comes from the stream `(seed, [NOISE, t, phase, j])` and its episodes
//! from `(seed, [EPISODE, t, phase, j])`. The whole PRNG state is therefore
//! `(seed, iteration)`.
//!
//! [`run_sequential`] is the straight-line reference; [`run_distributed`]
//! runs the worker pool on threads with explicit messages. Both produce
//! bit-identical states.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsConfig, DynamicsKind, OptimizerState};
use crate::error::{Error, Result};
use crate::estimator::{perturbation, stencil_delta, EstimatorConfig};
use crate::policy::Policy;
use crate::prng::RngStream;
use crate::utility::Utility;

const TRAIN_STREAM: u64 = 0x7472_6169_6e00_0001;
const NOISE_KEY: u64 = 1;
const EPISODE_KEY: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerAssignment {
    pub worker_id: u64,
    pub player: usize,
    pub scale: f64,
    /// Empty until filled from the shared stream.
    pub noise: Vec<f64>,
}

/// The only cross-worker payload: `(worker_id: u64, delta: f64)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaMessage {
    pub worker_id: u64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentRule {
    /// Player `(rank + iteration) mod n_players`.
    #[default]
    RoundRobin,
    /// Player `rank mod n_players`, every iteration.
    Static,
}

impl AssignmentRule {
    fn player(self, rank: usize, iteration: u64, n_players: usize) -> usize {
        match self {
            AssignmentRule::RoundRobin => ((rank as u64 + iteration) % n_players as u64) as usize,
            AssignmentRule::Static => rank % n_players,
        }
    }
}

/// Assignments for the sorted worker set; every worker uses scale `sigma`.
pub fn assign(iteration: u64, workers: &[u64], n_players: usize, sigma: f64) -> Vec<WorkerAssignment> {
    assign_with(AssignmentRule::RoundRobin, iteration, workers, n_players, sigma)
}

pub fn assign_with(
    rule: AssignmentRule,
    iteration: u64,
    workers: &[u64],
    n_players: usize,
    sigma: f64,
) -> Vec<WorkerAssignment> {
    let mut sorted = workers.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .enumerate()
        .map(|(rank, &worker_id)| WorkerAssignment {
            worker_id,
            player: rule.player(rank, iteration, n_players),
            scale: sigma,
            noise: Vec::new(),
        })
        .collect()
}

/// Mean of `delta_j * z_j` over the workers assigned to each player. Players
/// without workers get a zero vector and a zero count.
pub fn aggregate(
    deltas: &[DeltaMessage],
    assignments: &[WorkerAssignment],
    dims: &[usize],
    iteration: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let by_worker: BTreeMap<u64, f64> = deltas.iter().map(|d| (d.worker_id, d.delta)).collect();
    let mut grads: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
    let mut counts = vec![0usize; dims.len()];
    for a in assignments {
        let delta = *by_worker.get(&a.worker_id).ok_or(Error::MissingDelta {
            worker: a.worker_id,
            iteration,
        })?;
        for (g, z) in grads[a.player].iter_mut().zip(&a.noise) {
            *g += delta * z;
        }
        counts[a.player] += 1;
    }
    for (g, &c) in grads.iter_mut().zip(&counts) {
        if c > 1 {
            let inv = c as f64;
            g.iter_mut().for_each(|x| *x /= inv);
        }
    }
    Ok((grads, counts))
}

/// Everything a joining worker needs: PRNG state `(seed, iteration)`, the
/// active worker set, parameters and optimizer states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seed: u64,
    pub iteration: u64,
    pub workers: Vec<u64>,
    pub profile: Vec<Policy>,
    pub optimizers: Vec<OptimizerState>,
}

impl Snapshot {
    pub fn new(seed: u64, profile: Vec<Policy>, dynamics: &DynamicsConfig, n_workers: usize) -> Self {
        let optimizers = profile.iter().map(|_| OptimizerState::new(dynamics)).collect();
        Snapshot {
            seed,
            iteration: 0,
            workers: (0..n_workers as u64).collect(),
            profile,
            optimizers,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn root(&self) -> RngStream {
        RngStream::new(self.seed, TRAIN_STREAM)
    }

    fn params(&self) -> Vec<Vec<f64>> {
        self.profile.iter().map(|p| p.params.0.clone()).collect()
    }

    fn dims(&self) -> Vec<usize> {
        self.profile.iter().map(|p| p.params.len()).collect()
    }
}

pub fn sync_worker(state: &Snapshot) -> Snapshot {
    state.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum MembershipEvent {
    /// Worker becomes active at the start of `iteration`.
    Join { iteration: u64, worker: u64 },
    /// Worker departs before `iteration` starts.
    Leave { iteration: u64, worker: u64 },
    /// Worker drops its delta during `iteration`; the iteration is retried
    /// without it.
    Fail { iteration: u64, worker: u64 },
}

/// Shared read-only inputs for one training run.
pub struct Context<'a> {
    pub utility: &'a dyn Utility,
    pub estimator: &'a EstimatorConfig,
    pub dynamics: &'a DynamicsConfig,
    pub rule: AssignmentRule,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Scalars sent to the coordinator.
    pub delta_messages: u64,
    /// Coordinator broadcasts (delta vectors and retry notices).
    pub broadcasts: u64,
    pub retries: u64,
}

impl Context<'_> {
    fn assignments(&self, state: &Snapshot, phase: usize) -> Vec<WorkerAssignment> {
        let root = state.root();
        let mut out = assign_with(
            self.rule,
            state.iteration,
            &state.workers,
            state.profile.len(),
            self.estimator.sigma,
        );
        for a in &mut out {
            let mut s = root.derive(&[NOISE_KEY, state.iteration, phase as u64, a.worker_id]);
            a.noise = perturbation(self.estimator.smoothing, state.profile[a.player].params.len(), &mut s);
        }
        out
    }

    fn delta(&self, state: &Snapshot, phase: usize, point: &[Vec<f64>], a: &WorkerAssignment) -> DeltaMessage {
        let episode = state
            .root()
            .derive(&[EPISODE_KEY, state.iteration, phase as u64, a.worker_id]);
        DeltaMessage {
            worker_id: a.worker_id,
            delta: worker_delta(self.utility, point, a, self.estimator, &episode),
        }
    }

    /// Consumes one phase's aggregate. Returns `true` once the iteration's
    /// update has been applied.
    fn finish_phase(
        &self,
        state: &mut Snapshot,
        phase: usize,
        point: &mut [Vec<f64>],
        grads: &[Vec<f64>],
        counts: &[usize],
    ) -> Result<bool> {
        if self.dynamics.kind == DynamicsKind::Extragradient && phase == 0 {
            let beta = self.dynamics.beta();
            for (i, (p, g)) in point.iter_mut().zip(grads).enumerate() {
                if counts[i] > 0 {
                    for (x, gi) in p.iter_mut().zip(g) {
                        *x += beta * gi;
                    }
                }
            }
            return Ok(false);
        }
        for (i, (policy, opt)) in state.profile.iter_mut().zip(&mut state.optimizers).enumerate() {
            if counts[i] == 0 {
                continue;
            }
            opt.step(self.dynamics.kind, &mut policy.params, &grads[i]);
            if !policy.params.is_finite() {
                return Err(Error::NonFinite {
                    step: state.iteration,
                    player: i,
                });
            }
        }
        state.iteration += 1;
        Ok(true)
    }
}

/// One worker's scaled finite difference for its assigned player, evaluated
/// at `point` with the other players held fixed.
pub fn worker_delta(
    utility: &dyn Utility,
    point: &[Vec<f64>],
    assignment: &WorkerAssignment,
    estimator: &EstimatorConfig,
    episode: &RngStream,
) -> f64 {
    let player = assignment.player;
    let mut f = |x: &[f64], s: &mut RngStream| {
        let params: Vec<&[f64]> = point
            .iter()
            .enumerate()
            .map(|(j, p)| if j == player { x } else { p.as_slice() })
            .collect();
        utility.utility(&params, player, s)
    };
    let mut f0 = None;
    stencil_delta(
        &mut f,
        &point[player],
        &assignment.noise,
        assignment.scale,
        estimator.stencil,
        estimator.common_random_numbers,
        episode,
        &mut f0,
    )
}

/// Applies joins and leaves scheduled for `iteration`; returns `(joined, left)`.
fn apply_membership(workers: &mut Vec<u64>, events: &[MembershipEvent], iteration: u64) -> (Vec<u64>, Vec<u64>) {
    let mut joined = Vec::new();
    let mut left = Vec::new();
    for e in events {
        match *e {
            MembershipEvent::Join { iteration: t, worker } if t == iteration && !workers.contains(&worker) => {
                workers.push(worker);
                joined.push(worker);
            }
            MembershipEvent::Leave { iteration: t, worker } if t == iteration && workers.contains(&worker) => {
                workers.retain(|&w| w != worker);
                left.push(worker);
            }
            _ => {}
        }
    }
    workers.sort_unstable();
    (joined, left)
}

fn fails_at(events: &[MembershipEvent], iteration: u64) -> BTreeSet<u64> {
    events
        .iter()
        .filter_map(|e| match *e {
            MembershipEvent::Fail { iteration: t, worker } if t == iteration => Some(worker),
            _ => None,
        })
        .collect()
}

/// Straight-line reference implementation.
pub fn run_sequential(
    ctx: &Context<'_>,
    state: &mut Snapshot,
    iterations: u64,
    events: &[MembershipEvent],
) -> Result<RunStats> {
    let mut stats = RunStats::default();
    let end = state.iteration + iterations;
    let dims = state.dims();
    apply_membership(&mut state.workers, events, state.iteration);
    while state.iteration < end {
        let t = state.iteration;
        let mut failing = fails_at(events, t);
        'attempt: loop {
            if state.workers.is_empty() {
                return Err(Error::NoWorkers(t));
            }
            let mut point = state.params();
            for phase in 0..ctx.dynamics.phases() {
                let assignments = ctx.assignments(state, phase);
                let mut deltas = Vec::with_capacity(assignments.len());
                let mut lost = Vec::new();
                for a in &assignments {
                    if failing.remove(&a.worker_id) {
                        lost.push(a.worker_id);
                    } else {
                        deltas.push(ctx.delta(state, phase, &point, a));
                    }
                }
                stats.delta_messages += deltas.len() as u64;
                stats.broadcasts += 1;
                if !lost.is_empty() {
                    stats.retries += 1;
                    state.workers.retain(|w| !lost.contains(w));
                    continue 'attempt;
                }
                let (grads, counts) = aggregate(&deltas, &assignments, &dims, t)?;
                if ctx.finish_phase(state, phase, &mut point, &grads, &counts)? {
                    break 'attempt;
                }
            }
        }
        if state.iteration < end {
            apply_membership(&mut state.workers, events, state.iteration);
        }
    }
    Ok(stats)
}

enum Up {
    Delta(DeltaMessage),
    Lost(u64),
}

#[derive(Clone)]
enum Down {
    /// All deltas of the phase, sorted by worker id, plus membership changes
    /// taking effect at the next iteration when this closes one.
    Deltas {
        deltas: Arc<Vec<DeltaMessage>>,
        joined: Arc<Vec<u64>>,
        left: Arc<Vec<u64>>,
    },
    Retry {
        removed: Arc<Vec<u64>>,
    },
}

struct WorkerHandle {
    tx: Sender<Down>,
    hosted: BTreeSet<u64>,
}

fn worker_loop(
    ctx: &Context<'_>,
    mut state: Snapshot,
    mut hosted: BTreeSet<u64>,
    mut failures: BTreeSet<(u64, u64)>,
    end: u64,
    up: Sender<Up>,
    down: Receiver<Down>,
) -> Result<(Snapshot, BTreeSet<u64>)> {
    let dims = state.dims();
    'iteration: while state.iteration < end && !hosted.is_empty() {
        let mut point = state.params();
        let mut phase = 0;
        loop {
            let assignments = ctx.assignments(&state, phase);
            for a in assignments.iter().filter(|a| hosted.contains(&a.worker_id)) {
                let msg = if failures.remove(&(state.iteration, a.worker_id)) {
                    Up::Lost(a.worker_id)
                } else {
                    Up::Delta(ctx.delta(&state, phase, &point, a))
                };
                // The coordinator outlives every worker inside the scope.
                let _ = up.send(msg);
            }
            match down.recv() {
                Ok(Down::Deltas { deltas, joined, left }) => {
                    let (grads, counts) = aggregate(&deltas, &assignments, &dims, state.iteration)?;
                    if ctx.finish_phase(&mut state, phase, &mut point, &grads, &counts)? {
                        state.workers.extend(joined.iter());
                        state.workers.retain(|w| !left.contains(w));
                        state.workers.sort_unstable();
                        hosted.retain(|w| !left.contains(w));
                        continue 'iteration;
                    }
                    phase += 1;
                }
                Ok(Down::Retry { removed }) => {
                    state.workers.retain(|w| !removed.contains(w));
                    hosted.retain(|w| !removed.contains(w));
                    if hosted.is_empty() {
                        break 'iteration;
                    }
                    point = state.params();
                    phase = 0;
                }
                Err(_) => break 'iteration,
            }
        }
    }
    Ok((state, hosted))
}

/// Runs `iterations` steps on a simulated pool of `physical` threads. The
/// active workers (virtual ids) are spread over threads by `id mod physical`;
/// joiners get a thread of their own, seeded via [`sync_worker`].
pub fn run_distributed(
    ctx: &Context<'_>,
    state: &mut Snapshot,
    iterations: u64,
    physical: usize,
    events: &[MembershipEvent],
) -> Result<RunStats> {
    let physical = physical.max(1);
    let end = state.iteration + iterations;
    let dims = state.dims();
    let mut stats = RunStats::default();
    apply_membership(&mut state.workers, events, state.iteration);
    if iterations == 0 {
        return Ok(stats);
    }
    let failures_for = |ids: &BTreeSet<u64>| -> BTreeSet<(u64, u64)> {
        events
            .iter()
            .filter_map(|e| match *e {
                MembershipEvent::Fail { iteration, worker } if ids.contains(&worker) => Some((iteration, worker)),
                _ => None,
            })
            .collect()
    };

    thread::scope(|scope| -> Result<RunStats> {
        let (up_tx, up_rx) = channel::<Up>();
        let mut pool: Vec<WorkerHandle> = Vec::new();
        let mut joins = Vec::new();

        let spawn = |hosted: BTreeSet<u64>, snapshot: Snapshot, pool: &mut Vec<WorkerHandle>, joins: &mut Vec<_>| {
            let (tx, rx) = channel::<Down>();
            let up = up_tx.clone();
            let failures = failures_for(&hosted);
            let h = hosted.clone();
            joins.push(scope.spawn(move || worker_loop(ctx, snapshot, h, failures, end, up, rx)));
            pool.push(WorkerHandle { tx, hosted });
        };

        let mut groups: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for &w in &state.workers {
            groups.entry(w % physical as u64).or_default().insert(w);
        }
        for hosted in groups.into_values() {
            spawn(hosted, sync_worker(state), &mut pool, &mut joins);
        }

        let broadcast = |pool: &mut Vec<WorkerHandle>, msg: Down| {
            for h in pool.iter().filter(|h| !h.hosted.is_empty()) {
                let _ = h.tx.send(msg.clone());
            }
        };

        let outcome = (|| -> Result<()> {
            while state.iteration < end {
                let t = state.iteration;
                let mut point = state.params();
                let mut phase = 0;
                loop {
                    if state.workers.is_empty() {
                        return Err(Error::NoWorkers(t));
                    }
                    let assignments = ctx.assignments(state, phase);
                    let mut deltas = Vec::with_capacity(assignments.len());
                    let mut lost = Vec::new();
                    for _ in 0..state.workers.len() {
                        match up_rx.recv() {
                            Ok(Up::Delta(d)) => deltas.push(d),
                            Ok(Up::Lost(w)) => lost.push(w),
                            Err(_) => return Err(Error::MissingDelta { worker: u64::MAX, iteration: t }),
                        }
                    }
                    stats.delta_messages += deltas.len() as u64;
                    stats.broadcasts += 1;
                    if !lost.is_empty() {
                        stats.retries += 1;
                        lost.sort_unstable();
                        state.workers.retain(|w| !lost.contains(w));
                        broadcast(&mut pool, Down::Retry { removed: Arc::new(lost.clone()) });
                        for h in &mut pool {
                            h.hosted.retain(|w| !lost.contains(w));
                        }
                        point = state.params();
                        phase = 0;
                        continue;
                    }
                    deltas.sort_by_key(|d| d.worker_id);
                    let (grads, counts) = aggregate(&deltas, &assignments, &dims, t)?;
                    let done = ctx.finish_phase(state, phase, &mut point, &grads, &counts)?;
                    let (joined, left) = if done && state.iteration < end {
                        apply_membership(&mut state.workers, events, state.iteration)
                    } else {
                        (Vec::new(), Vec::new())
                    };
                    broadcast(
                        &mut pool,
                        Down::Deltas {
                            deltas: Arc::new(deltas),
                            joined: Arc::new(joined.clone()),
                            left: Arc::new(left.clone()),
                        },
                    );
                    for h in &mut pool {
                        h.hosted.retain(|w| !left.contains(w));
                    }
                    for w in joined {
                        spawn(BTreeSet::from([w]), sync_worker(state), &mut pool, &mut joins);
                    }
                    if done {
                        break;
                    }
                    phase += 1;
                }
            }
            Ok(())
        })();
        // Hang up so blocked workers exit on error paths.
        drop(pool);
        let mut replicas = Vec::new();
        for j in joins {
            replicas.push(j.join().expect("worker thread panicked"));
        }
        outcome?;
        for r in replicas {
            let (replica, hosted) = r?;
            if !hosted.is_empty() && replica != *state {
                return Err(Error::ReplicaDivergence(replica.iteration));
            }
        }
        Ok(stats)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicsKind;
    use crate::policy::{OutputHead, ParamVector, PolicyArchitecture};

    /// u_i(x) = g_i . x_i, no randomness.
    struct Linear {
        g: Vec<Vec<f64>>,
    }

    impl Utility for Linear {
        fn n_players(&self) -> usize {
            self.g.len()
        }
        fn dim(&self, player: usize) -> usize {
            self.g[player].len()
        }
        fn utility(&self, params: &[&[f64]], player: usize, _: &mut RngStream) -> f64 {
            params[player].iter().zip(&self.g[player]).map(|(a, b)| a * b).sum()
        }
    }

    fn flat_policy(dim: usize) -> Policy {
        // A 1 -> 1 affine map has 2 parameters; `dim` only has to match.
        let arch = PolicyArchitecture {
            obs_dim: dim - 1,
            noise_dim: 0,
            hidden_layers: vec![],
            action_dim: 1,
            head: OutputHead::identity(),
        };
        Policy::new(arch, ParamVector::zeros(dim)).unwrap()
    }

    #[test]
    fn round_robin_assignments() {
        let p = |t, ws: &[u64], n| assign(t, ws, n, 0.01).iter().map(|a| a.player).collect::<Vec<_>>();
        assert_eq!(p(0, &[0, 1, 2, 3], 2), vec![0, 1, 0, 1]);
        assert_eq!(p(1, &[0, 1, 2, 3], 2), vec![1, 0, 1, 0]);
        assert_eq!((0..3).map(|t| p(t, &[0], 3)[0]).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(assign(0, &[3, 1], 2, 0.5).iter().all(|a| a.scale == 0.5));
    }

    #[test]
    fn linear_delta_is_exact_and_scale_free() {
        let u = Linear {
            g: vec![vec![1.0, -2.0, 0.5]],
        };
        let point = vec![vec![0.3, 0.1, -0.2]];
        let z = vec![0.7, 1.1, -0.4];
        let est = EstimatorConfig::default();
        let ep = RngStream::new(0, 0);
        let mut a = WorkerAssignment {
            worker_id: 0,
            player: 0,
            scale: 0.01,
            noise: z.clone(),
        };
        let d1 = worker_delta(&u, &point, &a, &est, &ep);
        let want: f64 = z.iter().zip(&u.g[0]).map(|(a, b)| a * b).sum();
        assert!((d1 - want).abs() < 1e-12);
        a.scale = 0.02;
        let d2 = worker_delta(&u, &point, &a, &est, &ep);
        assert!((d1 - d2).abs() < 1e-12);
        let zero = Linear { g: vec![vec![0.0; 3]] };
        assert_eq!(worker_delta(&zero, &point, &a, &est, &ep), 0.0);
    }

    #[test]
    fn aggregate_means_and_missing() {
        let mk = |w, player, z: Vec<f64>| WorkerAssignment {
            worker_id: w,
            player,
            scale: 0.1,
            noise: z,
        };
        let asg = vec![mk(0, 0, vec![1.0, 2.0]), mk(1, 0, vec![1.0, 2.0]), mk(2, 1, vec![3.0])];
        let deltas = vec![
            DeltaMessage { worker_id: 0, delta: 0.5 },
            DeltaMessage { worker_id: 1, delta: 0.5 },
            DeltaMessage { worker_id: 2, delta: 2.0 },
        ];
        let (g, c) = aggregate(&deltas, &asg, &[2, 1, 4], 0).unwrap();
        assert_eq!(g[0], vec![0.5, 1.0]);
        assert_eq!(g[1], vec![6.0]);
        assert_eq!(g[2], vec![0.0; 4]);
        assert_eq!(c, vec![2, 1, 0]);
        assert!(matches!(
            aggregate(&deltas[..2], &asg, &[2, 1, 4], 7),
            Err(Error::MissingDelta { worker: 2, iteration: 7 })
        ));
    }

    fn linear_ctx_run(kind: DynamicsKind, n_workers: usize, physical: Option<usize>, events: &[MembershipEvent]) -> (Snapshot, RunStats) {
        let u = Linear {
            g: vec![vec![1.0, -1.0, 2.0], vec![0.5, 0.25]],
        };
        let est = EstimatorConfig::default();
        let dyncfg = DynamicsConfig {
            kind,
            alpha: 0.05,
            beta: Some(0.02),
        };
        let ctx = Context {
            utility: &u,
            estimator: &est,
            dynamics: &dyncfg,
            rule: AssignmentRule::RoundRobin,
        };
        let mut st = Snapshot::new(9, vec![flat_policy(3), flat_policy(2)], &dyncfg, n_workers);
        let stats = match physical {
            None => run_sequential(&ctx, &mut st, 20, events).unwrap(),
            Some(p) => run_distributed(&ctx, &mut st, 20, p, events).unwrap(),
        };
        (st, stats)
    }

    #[test]
    fn pool_matches_reference_for_every_rule() {
        for kind in [DynamicsKind::Simultaneous, DynamicsKind::Extragradient, DynamicsKind::Optimistic] {
            let (reference, rs) = linear_ctx_run(kind, 3, None, &[]);
            for p in [1, 2, 3] {
                let (pooled, ps) = linear_ctx_run(kind, 3, Some(p), &[]);
                assert_eq!(pooled, reference, "{kind:?} physical={p}");
                assert_eq!(ps, rs);
            }
            assert_eq!(rs.delta_messages, 20 * 3 * kind_phases(kind));
        }
    }

    fn kind_phases(kind: DynamicsKind) -> u64 {
        if kind == DynamicsKind::Extragradient {
            2
        } else {
            1
        }
    }

    #[test]
    fn membership_changes_match_reference() {
        let events = [
            MembershipEvent::Join { iteration: 5, worker: 7 },
            MembershipEvent::Leave { iteration: 8, worker: 1 },
            MembershipEvent::Fail { iteration: 12, worker: 0 },
            MembershipEvent::Join { iteration: 12, worker: 9 },
        ];
        for kind in [DynamicsKind::Simultaneous, DynamicsKind::Extragradient] {
            let (reference, rs) = linear_ctx_run(kind, 2, None, &events);
            let (pooled, ps) = linear_ctx_run(kind, 2, Some(2), &events);
            assert_eq!(pooled, reference);
            assert_eq!(rs.retries, 1);
            assert_eq!(ps, rs);
            assert_eq!(reference.workers, vec![7, 9]);
        }
    }

    #[test]
    fn unassigned_player_is_untouched() {
        let (st, _) = linear_ctx_run(DynamicsKind::Simultaneous, 1, None, &[]);
        // One worker alternates between the two players, so both move.
        assert!(st.profile[1].params.iter().any(|&x| x != 0.0));
        let u = Linear {
            g: vec![vec![1.0], vec![1.0]],
        };
        let est = EstimatorConfig::default();
        let dyncfg = DynamicsConfig {
            alpha: 0.1,
            ..DynamicsConfig::default()
        };
        let ctx = Context {
            utility: &u,
            estimator: &est,
            dynamics: &dyncfg,
            rule: AssignmentRule::Static,
        };
        let mut st = Snapshot::new(1, vec![flat_policy(1), flat_policy(1)], &dyncfg, 1);
        run_sequential(&ctx, &mut st, 10, &[]).unwrap();
        assert_eq!(st.profile[1].params.0, vec![0.0]);
        assert_ne!(st.profile[0].params.0, vec![0.0]);
    }

    #[test]
    fn snapshot_resume_matches_uninterrupted() {
        let u = Linear {
            g: vec![vec![1.0, 2.0], vec![-1.0, 0.5]],
        };
        let est = EstimatorConfig::default();
        let dyncfg = DynamicsConfig {
            kind: DynamicsKind::Optimistic,
            alpha: 0.1,
            beta: None,
        };
        let ctx = Context {
            utility: &u,
            estimator: &est,
            dynamics: &dyncfg,
            rule: AssignmentRule::RoundRobin,
        };
        let mut full = Snapshot::new(3, vec![flat_policy(2), flat_policy(2)], &dyncfg, 2);
        let mut part = full.clone();
        run_sequential(&ctx, &mut full, 20, &[]).unwrap();
        run_sequential(&ctx, &mut part, 10, &[]).unwrap();
        let text = sync_worker(&part).to_json().unwrap();
        let mut resumed = Snapshot::from_json(&text).unwrap();
        assert_eq!(resumed, part);
        run_sequential(&ctx, &mut resumed, 10, &[]).unwrap();
        assert_eq!(resumed, full);
    }

    #[test]
    fn all_workers_lost_is_an_error() {
        let events = [MembershipEvent::Fail { iteration: 2, worker: 0 }];
        let u = Linear { g: vec![vec![1.0]] };
        let est = EstimatorConfig::default();
        let dyncfg = DynamicsConfig::default();
        let ctx = Context {
            utility: &u,
            estimator: &est,
            dynamics: &dyncfg,
            rule: AssignmentRule::RoundRobin,
        };
        let mut st = Snapshot::new(1, vec![flat_policy(1)], &dyncfg, 1);
        assert!(matches!(run_sequential(&ctx, &mut st, 5, &events), Err(Error::NoWorkers(2))));
        let mut st = Snapshot::new(1, vec![flat_policy(1)], &dyncfg, 1);
        assert!(matches!(run_distributed(&ctx, &mut st, 5, 1, &events), Err(Error::NoWorkers(2))));
    }
}
