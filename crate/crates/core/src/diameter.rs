//! Fully dynamic 2-approximate diameter and MEB radius.
//!
//! A centerpoint of the live set serves as a robust representative: the
//! farthest distance from it 2-approximates the diameter and keeps doing so
//! for up to eps*|P| adversarial deletions, tracked by a deletion counter.
//! Distances from the representative live in an ordered index so queries are
//! a max lookup. In de-amortized mode a background task rebuilds the next
//! representative over a snapshot, a bounded number of operations per update,
//! so no query ever waits on a from-scratch build.

use crate::centerpoint::{CenterpointConfig, CenterpointError, CenterpointTask, Progress};
use crate::geometry::{dist, farthest_of, GeomError, Point, PointId};
use crate::scalar::Real;
use ordered_float::OrderedFloat;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiamError {
    #[error("empty point set")]
    Empty,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Amortized,
    Deamortized,
}

#[derive(Debug, Clone)]
pub struct DiameterConfig {
    pub d: usize,
    pub eps: Real,
    pub delta: Real,
    pub small_threshold: usize,
    pub op_budget_per_update: u64,
    pub mode: Mode,
    pub seed: u64,
}

impl DiameterConfig {
    pub fn new(d: usize, delta: Real, mode: Mode, seed: u64) -> Self {
        assert!(d >= 1);
        assert!(delta > 0.0 && delta < 1.0);
        let eps = 1.0 / (4.0 * (d * d) as Real);
        DiameterConfig {
            d,
            eps,
            delta,
            small_threshold: d.pow(4),
            op_budget_per_update: Self::recommended_budget(d, 1_000_000, delta),
            mode,
            seed,
        }
    }

    /// Per-update operation budget sized for streams up to `n_hint` updates.
    pub fn recommended_budget(d: usize, n_hint: u64, delta: Real) -> u64 {
        let d = d as f64;
        let log_d = d.ln().max(1.0);
        let log_n = ((n_hint as f64 + 2.0) / delta).ln().max(1.0);
        (512.0 * d.powi(5) * log_d.powf(1.5) * log_n.powf(1.5)).ceil() as u64
    }
}

#[derive(Debug, Clone)]
struct Slot {
    point: Point<Real>,
    deleted: bool,
}

type DistKey = (OrderedFloat<Real>, PointId);

enum BuildPhase {
    Copy,
    Centerpoint,
    Distances,
    Ready,
}

/// Background rebuild over a snapshot of the slot store.
struct BuildTask {
    t_b: u64,
    snapshot_boundary: usize,
    snapshot_live: usize,
    expiration: u64,
    phase: BuildPhase,
    copy_cursor: usize,
    copied: Vec<Point<Real>>,
    cp_task: Option<CenterpointTask>,
    cp_ops_seen: u64,
    next_centerpoint: Option<Point<Real>>,
    next_distances: BTreeSet<DistKey>,
    dist_cursor: usize,
    synced: bool,
    deletions_during_build: u64,
}

/// A finished build waiting for the current representative to expire.
/// Its distance index is kept in step with foreground updates meanwhile.
struct StagedBuild {
    centerpoint: Point<Real>,
    distances: BTreeSet<DistKey>,
    budgeted: u64,
    deletions: u64,
    expiration: u64,
}

struct Scheduler {
    expiration_time: u64,
    update_time: u64,
    task: Option<BuildTask>,
    staged: Option<StagedBuild>,
    deadline_misses: u64,
}

pub struct DiameterState {
    cfg: DiameterConfig,
    cp_failure_events: u64,
    slots: Vec<Slot>,
    live: HashMap<PointId, usize>,
    live_count: usize,
    t: u64,
    counter: u64,
    counter_initial: u64,
    centerpoint: Option<Point<Real>>,
    distances: BTreeSet<DistKey>,
    sched: Scheduler,
    build_index: u64,
    ops_this_update: u64,
    total_ops: u64,
    rebuild_count: u64,
}

impl DiameterState {
    pub fn new(cfg: DiameterConfig) -> Self {
        DiameterState {
            cfg,
            cp_failure_events: 0,
            slots: Vec::new(),
            live: HashMap::new(),
            live_count: 0,
            t: 0,
            counter: 0,
            counter_initial: 0,
            centerpoint: None,
            distances: BTreeSet::new(),
            sched: Scheduler {
                expiration_time: 0,
                update_time: 0,
                task: None,
                staged: None,
                deadline_misses: 0,
            },
            build_index: 0,
            ops_this_update: 0,
            total_ops: 0,
            rebuild_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.live_count
    }

    pub fn is_empty(&self) -> bool {
        self.live_count == 0
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn centerpoint(&self) -> Option<&Point<Real>> {
        self.centerpoint.as_ref()
    }

    pub fn has_valid_centerpoint(&self) -> bool {
        self.counter > 0 && self.centerpoint.is_some()
    }

    pub fn last_update_ops(&self) -> u64 {
        self.ops_this_update
    }

    pub fn total_ops(&self) -> u64 {
        self.total_ops
    }

    pub fn rebuild_count(&self) -> u64 {
        self.rebuild_count
    }

    pub fn deadline_misses(&self) -> u64 {
        self.sched.deadline_misses
    }

    pub fn centerpoint_failures(&self) -> u64 {
        self.cp_failure_events
    }

    pub fn iter_live(&self) -> impl Iterator<Item = &Point<Real>> {
        self.slots.iter().filter(|s| !s.deleted).map(|s| &s.point)
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.live.contains_key(&id)
    }

    /// Minimum live-set size for which the background scheduler runs.
    pub fn large_set_floor(&self) -> usize {
        let d = self.cfg.d as f64;
        let t = (self.t.max(1)) as f64;
        let log_d = d.ln().max(1.0);
        let log_t = (t / self.cfg.delta).ln().max(1.0);
        let poly = (log_d.powf(1.5) * log_t.powf(1.5)).ceil();
        4 * self.cfg.d.pow(4) * poly as usize
    }

    pub fn insert(&mut self, p: Point<Real>) -> Result<(), DiamError> {
        if self.live.contains_key(&p.id) {
            return Err(GeomError::DuplicateId(p.id).into());
        }
        if p.dim() != self.cfg.d {
            return Err(GeomError::DimensionMismatch(p.dim(), self.cfg.d).into());
        }
        self.begin_update();
        let slot_idx = self.slots.len();
        self.live.insert(p.id, slot_idx);
        if self.counter > 0 {
            let c = self.centerpoint.clone().expect("counter > 0 implies centerpoint");
            let d = self.charged_dist(&c, &p);
            self.index_insert((OrderedFloat(d), p.id));
        }
        // keep a staged build's distance index in step
        if let Some(staged) = self.sched.staged.as_mut() {
            let dv = dist(&staged.centerpoint, &p);
            staged.distances.insert((OrderedFloat(dv), p.id));
            let cost = 2 + index_op_cost(staged.distances.len());
            self.ops_this_update += cost;
            self.total_ops += cost;
        }
        // and an in-flight build's, once its full scan has caught up
        if let Some(task) = self.sched.task.as_mut() {
            if task.synced {
                if let Some(nc) = task.next_centerpoint.clone() {
                    let dv = dist(&nc, &p);
                    task.next_distances.insert((OrderedFloat(dv), p.id));
                    let cost = 2 + index_op_cost(task.next_distances.len());
                    self.ops_this_update += cost;
                    self.total_ops += cost;
                    task.dist_cursor = slot_idx + 1;
                }
            }
        }
        self.slots.push(Slot { point: p, deleted: false });
        self.live_count += 1;
        self.tick();
        Ok(())
    }

    pub fn delete(&mut self, id: PointId) -> Result<(), DiamError> {
        let slot_idx = *self.live.get(&id).ok_or(GeomError::UnknownId(id))?;
        self.begin_update();
        self.live.remove(&id);
        self.slots[slot_idx].deleted = true;
        self.live_count -= 1;
        if self.counter > 0 {
            let c = self.centerpoint.clone().expect("counter > 0 implies centerpoint");
            let d = self.charged_dist(&c, &self.slots[slot_idx].point.clone());
            self.index_remove(&(OrderedFloat(d), id));
            self.counter -= 1;
        }
        if let Some(staged) = self.sched.staged.as_mut() {
            staged.deletions += 1;
            let dv = dist(&staged.centerpoint, &self.slots[slot_idx].point);
            staged.distances.remove(&(OrderedFloat(dv), id));
            let cost = 2 + index_op_cost(staged.distances.len());
            self.ops_this_update += cost;
            self.total_ops += cost;
        }
        if let Some(task) = self.sched.task.as_mut() {
            task.deletions_during_build += 1;
            if slot_idx < task.dist_cursor {
                if let Some(nc) = task.next_centerpoint.clone() {
                    let dv = dist(&nc, &self.slots[slot_idx].point);
                    task.next_distances.remove(&(OrderedFloat(dv), id));
                    let cost = 2 + index_op_cost(task.next_distances.len());
                    self.ops_this_update += cost;
                    self.total_ops += cost;
                }
            }
        }
        self.tick();
        Ok(())
    }

    /// 2-approximate diameter of the current set.
    pub fn query(&mut self) -> Result<Real, DiamError> {
        self.query_witness().map(|(v, _)| v)
    }

    /// Diameter estimate together with the witness point attaining it.
    pub fn query_witness(&mut self) -> Result<(Real, PointId), DiamError> {
        if self.live_count == 0 {
            return Err(DiamError::Empty);
        }
        if self.live_count == 1 {
            let id = *self.live.keys().next().unwrap();
            return Ok((0.0, id));
        }
        self.ops_this_update = 0;
        if self.counter > 0 {
            let &(OrderedFloat(d), id) = self.distances.iter().next_back().expect("index nonempty");
            self.charge_index_op(self.distances.len());
            return Ok((d, id));
        }
        let lazy_rebuild = self.cfg.mode == Mode::Amortized
            && self.live_count > self.effective_small_threshold();
        if lazy_rebuild && self.rebuild_centerpoint_now() {
            let &(OrderedFloat(d), id) = self.distances.iter().next_back().expect("index nonempty");
            self.charge_index_op(self.distances.len());
            return Ok((d, id));
        }
        // arbitrary-point fallback: F(p, P) for p in P is a 2-approximation
        self.farthest_from_arbitrary()
    }

    /// 2-approximate MEB radius: same machinery as `query`.
    pub fn query_meb_radius(&mut self) -> Result<Real, DiamError> {
        self.query()
    }

    fn effective_small_threshold(&self) -> usize {
        let by_counter = (1.0 / self.cfg.eps).ceil() as usize;
        self.cfg
            .small_threshold
            .max(self.cfg.d + 1)
            .max(by_counter)
    }

    fn farthest_from_arbitrary(&mut self) -> Result<(Real, PointId), DiamError> {
        let anchor = self
            .iter_live()
            .min_by_key(|p| p.id)
            .expect("non-empty")
            .clone();
        self.ops_this_update += self.live_count as u64;
        self.total_ops += self.live_count as u64;
        let (far, d) = farthest_of(&anchor, self.iter_live()).expect("non-empty");
        Ok((d, far.id))
    }

    /// Synchronous centerpoint rebuild (Algorithm 1's counter=0 path).
    /// Returns false when the subroutine degenerates; the caller falls back.
    fn rebuild_centerpoint_now(&mut self) -> bool {
        let phi = self.phi_now();
        let cp_cfg = CenterpointConfig::new(self.cfg.d, phi);
        let seed = self.next_build_seed();
        let snapshot: Vec<Point<Real>> = self.iter_live().cloned().collect();
        let mut task = match CenterpointTask::from_snapshot(snapshot, cp_cfg, seed) {
            Ok(t) => t,
            Err(_) => return false,
        };
        let point = loop {
            match task.advance(u64::MAX) {
                Ok(Progress::Done(p)) => break p,
                Ok(Progress::Pending) => {}
                Err(CenterpointError::DegenerateExhausted(_)) => {
                    self.cp_failure_events += 1;
                    return false;
                }
                Err(_) => return false,
            }
        };
        self.ops_this_update += task.ops_used();
        self.total_ops += task.ops_used();
        self.install_centerpoint(point, self.live_count);
        true
    }

    fn install_centerpoint(&mut self, c: Point<Real>, basis_size: usize) {
        self.counter_initial = (self.cfg.eps * basis_size as Real).floor() as u64;
        self.counter = self.counter_initial;
        self.distances.clear();
        let c2 = c.clone();
        let keys: Vec<DistKey> = self
            .iter_live()
            .map(|p| (OrderedFloat(dist(&c2, p)), p.id))
            .collect();
        self.ops_this_update += keys.len() as u64;
        self.total_ops += keys.len() as u64;
        for k in keys {
            self.index_insert(k);
        }
        self.centerpoint = Some(c);
        self.rebuild_count += 1;
        if self.counter == 0 {
            // degenerate basis: nothing to protect, drop the representative
            self.centerpoint = None;
            self.distances.clear();
        }
    }

    fn phi_now(&self) -> Real {
        let t = self.t.max(1) as Real;
        (self.cfg.delta / (2.0 * t * t)).min(0.25)
    }

    fn next_build_seed(&mut self) -> u64 {
        self.build_index += 1;
        splitmix(self.cfg.seed ^ self.build_index.wrapping_mul(0x9e3779b97f4a7c15))
    }

    fn begin_update(&mut self) {
        self.t += 1;
        self.ops_this_update = 0;
    }

    fn charged_dist(&mut self, a: &Point<Real>, b: &Point<Real>) -> Real {
        self.ops_this_update += 1;
        self.total_ops += 1;
        dist(a, b)
    }

    fn charge_index_op(&mut self, len: usize) {
        let cost = index_op_cost(len);
        self.ops_this_update += cost;
        self.total_ops += cost;
    }

    fn index_insert(&mut self, key: DistKey) {
        self.distances.insert(key);
        self.charge_index_op(self.distances.len());
    }

    fn index_remove(&mut self, key: &DistKey) {
        self.distances.remove(key);
        self.charge_index_op(self.distances.len());
    }

    /// The de-amortized state machine, run once per update (idle calls are
    /// also fine). Promotes a finished build at its expiration time, starts
    /// a new build at its update time, and otherwise spends the remaining
    /// per-update budget advancing the in-flight build.
    pub fn tick(&mut self) {
        if self.cfg.mode != Mode::Deamortized {
            return;
        }
        self.maybe_promote();
        self.maybe_start_build();
        self.advance_build();
        self.maybe_promote();
    }

    fn maybe_promote(&mut self) {
        let due = self.t >= self.sched.expiration_time || !self.has_valid_centerpoint();
        if !due {
            return;
        }
        let Some(staged) = self.sched.staged.take() else {
            if self.centerpoint.is_some() && self.counter == 0 {
                // nothing ready to take over; queries fall back meanwhile
                self.sched.deadline_misses += 1;
                self.centerpoint = None;
                self.distances.clear();
            }
            return;
        };
        let remaining = staged.budgeted.saturating_sub(staged.deletions);
        if remaining == 0 {
            self.centerpoint = None;
            self.distances.clear();
            self.counter = 0;
            self.sched.deadline_misses += 1;
            return;
        }
        self.centerpoint = Some(staged.centerpoint);
        self.distances = staged.distances;
        self.counter = remaining;
        self.counter_initial = staged.budgeted;
        self.sched.expiration_time = staged.expiration;
        self.rebuild_count += 1;
    }

    fn maybe_start_build(&mut self) {
        if self.sched.task.is_some() {
            return;
        }
        if self.t < self.sched.update_time {
            return;
        }
        // ramp in at half the floor so the first representative is ready by
        // the time the floor itself is crossed
        let start_floor = (self.large_set_floor() / 2).max(self.cfg.d + 2);
        if self.live_count < start_floor {
            return;
        }
        let window = (self.cfg.eps * self.live_count as Real).floor() as u64;
        if window < 4 {
            return;
        }
        let t_b = self.t;
        self.sched.update_time = t_b + (3 * window) / 4;
        self.sched.task = Some(BuildTask {
            t_b,
            snapshot_boundary: self.slots.len(),
            snapshot_live: self.live_count,
            expiration: t_b + window,
            phase: BuildPhase::Copy,
            copy_cursor: 0,
            copied: Vec::with_capacity(self.live_count),
            cp_task: None,
            cp_ops_seen: 0,
            next_centerpoint: None,
            next_distances: BTreeSet::new(),
            dist_cursor: 0,
            synced: false,
            deletions_during_build: 0,
        });
    }

    fn advance_build(&mut self) {
        let budget = self
            .cfg
            .op_budget_per_update
            .saturating_sub(self.ops_this_update);
        let mut remaining = budget;
        let mut abort = false;
        let delta = self.cfg.delta;
        let d = self.cfg.d;
        let seed = {
            // derive lazily only when the centerpoint phase begins
            self.cfg.seed
        };
        let Some(task) = self.sched.task.as_mut() else {
            return;
        };
        let mut build_seed_request = false;
        while remaining > 0 {
            match task.phase {
                BuildPhase::Copy => {
                    if task.copy_cursor < task.snapshot_boundary {
                        let slot = &self.slots[task.copy_cursor];
                        if !slot.deleted {
                            task.copied.push(slot.point.clone());
                        }
                        task.copy_cursor += 1;
                        remaining -= 1;
                        self.ops_this_update += 1;
                        self.total_ops += 1;
                    } else {
                        if task.copied.len() < d + 2 {
                            abort = true;
                            break;
                        }
                        build_seed_request = true;
                        break;
                    }
                }
                BuildPhase::Centerpoint => {
                    let cp = task.cp_task.as_mut().expect("centerpoint phase has a task");
                    match cp.advance(remaining) {
                        Ok(Progress::Done(p)) => {
                            let used = cp.ops_used() - task.cp_ops_seen;
                            remaining -= used.min(remaining);
                            self.ops_this_update += used;
                            self.total_ops += used;
                            task.cp_ops_seen = cp.ops_used();
                            task.next_centerpoint = Some(p);
                            task.phase = BuildPhase::Distances;
                            task.dist_cursor = 0;
                        }
                        Ok(Progress::Pending) => {
                            let used = cp.ops_used() - task.cp_ops_seen;
                            task.cp_ops_seen = cp.ops_used();
                            self.ops_this_update += used;
                            self.total_ops += used;
                            remaining = 0;
                        }
                        Err(_) => {
                            self.cp_failure_events += 1;
                            abort = true;
                            break;
                        }
                    }
                }
                BuildPhase::Distances => {
                    if task.dist_cursor < self.slots.len() {
                        let slot = &self.slots[task.dist_cursor];
                        if !slot.deleted {
                            let nc = task.next_centerpoint.as_ref().unwrap();
                            let dv = dist(nc, &slot.point);
                            task.next_distances.insert((OrderedFloat(dv), slot.point.id));
                            let cost = (usize::BITS
                                - task.next_distances.len().max(1).leading_zeros())
                                as u64
                                + 2;
                            let spent = cost.min(remaining);
                            remaining -= spent;
                            self.ops_this_update += cost;
                            self.total_ops += cost;
                        } else {
                            remaining -= 1;
                            self.ops_this_update += 1;
                            self.total_ops += 1;
                        }
                        task.dist_cursor += 1;
                    } else {
                        task.synced = true;
                        task.phase = BuildPhase::Ready;
                        break;
                    }
                }
                BuildPhase::Ready => break,
            }
        }
        if build_seed_request {
            // transition Copy -> Centerpoint outside the borrow of `task`
            let phi = {
                let t = task.t_b.max(1) as Real;
                (delta / (2.0 * t * t)).min(0.25)
            };
            let cp_cfg = CenterpointConfig::new(d, phi);
            let copied = std::mem::take(&mut task.copied);
            self.build_index += 1;
            let build_seed =
                splitmix(seed ^ self.build_index.wrapping_mul(0x9e3779b97f4a7c15));
            match CenterpointTask::from_snapshot(copied, cp_cfg, build_seed) {
                Ok(cp) => {
                    task.cp_task = Some(cp);
                    task.phase = BuildPhase::Centerpoint;
                }
                Err(_) => abort = true,
            }
        }
        if abort {
            self.sched.task = None;
            // try again shortly rather than waiting a full window
            self.sched.update_time = self.t + 1;
            return;
        }
        let ready = matches!(
            self.sched.task.as_ref().map(|t| &t.phase),
            Some(BuildPhase::Ready)
        );
        if ready {
            let task = self.sched.task.take().unwrap();
            let budgeted = (self.cfg.eps * task.snapshot_live as Real).floor() as u64;
            // a fresher build supersedes any staged one
            self.sched.staged = Some(StagedBuild {
                centerpoint: task.next_centerpoint.expect("ready build has a centerpoint"),
                distances: task.next_distances,
                budgeted,
                deletions: task.deletions_during_build,
                expiration: task.expiration,
            });
        }
    }
}

fn index_op_cost(len: usize) -> u64 {
    (usize::BITS - len.max(1).leading_zeros()) as u64 + 1
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSet;
    use crate::oracles::brute_diameter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(id: PointId, coords: &[Real]) -> Point<Real> {
        Point::new(id, coords.to_vec()).unwrap()
    }

    #[test]
    fn empty_and_singleton() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 1));
        assert_eq!(st.query().unwrap_err(), DiamError::Empty);
        st.insert(pt(1, &[1.0, 2.0])).unwrap();
        assert_eq!(st.query().unwrap(), 0.0);
        assert_eq!(st.len(), 1);
        assert_eq!(st.counter(), 0);
    }

    #[test]
    fn two_point_query_is_exact() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 1));
        st.insert(pt(1, &[0.0, 0.0])).unwrap();
        st.insert(pt(2, &[6.0, 8.0])).unwrap();
        assert_eq!(st.query().unwrap(), 10.0);
    }

    #[test]
    fn duplicate_and_unknown_ids_rejected() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 1));
        st.insert(pt(1, &[0.0, 0.0])).unwrap();
        assert!(st.insert(pt(1, &[1.0, 1.0])).is_err());
        assert!(st.delete(9).is_err());
    }

    #[test]
    fn counter_zero_delete_touches_nothing() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 1));
        for i in 0..5u64 {
            st.insert(pt(i, &[i as Real, 0.0])).unwrap();
        }
        assert_eq!(st.counter(), 0);
        st.delete(3).unwrap();
        assert_eq!(st.len(), 4);
        assert_eq!(st.counter(), 0);
    }

    #[test]
    fn counter_exhaustion_triggers_recompute() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 7));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..100u64 {
            st.insert(pt(i, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .unwrap();
        }
        let a0 = st.query().unwrap();
        assert!(st.counter() > 0);
        let builds_before = st.rebuild_count();
        // exhaust the counter
        let c0 = st.counter();
        for i in 0..c0 {
            st.delete(i).unwrap();
        }
        assert_eq!(st.counter(), 0);
        let _ = st.query().unwrap();
        assert!(st.rebuild_count() > builds_before);
        assert!(a0 > 0.0);
    }

    #[test]
    fn insert_with_active_centerpoint_updates_index_not_counter() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 7));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..60u64 {
            st.insert(pt(i, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .unwrap();
        }
        let _ = st.query().unwrap();
        let c = st.counter();
        assert!(c > 0);
        st.insert(pt(1000, &[10.0, 10.0])).unwrap();
        assert_eq!(st.counter(), c);
        // the far inserted point dominates the farthest distance
        let a = st.query().unwrap();
        assert!(a > 10.0);
    }

    #[test]
    fn random_stream_stays_2_approximate() {
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 11));
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut oracle = PointSet::new(2);
        let mut next_id = 0u64;
        for step in 0..1500 {
            let do_delete = !oracle.is_empty() && rng.gen_bool(0.35);
            if do_delete {
                let ids: Vec<PointId> = oracle.ids().collect();
                let id = ids[rng.gen_range(0..ids.len())];
                st.delete(id).unwrap();
                oracle.remove(id).unwrap();
            } else {
                let p = pt(next_id, &[rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
                next_id += 1;
                st.insert(p.clone()).unwrap();
                oracle.insert(p).unwrap();
            }
            if step % 100 == 99 && !oracle.is_empty() {
                let truth = brute_diameter(&oracle).unwrap();
                let ans = st.query().unwrap();
                assert!(
                    ans >= truth / 2.0 - 1e-9 && ans <= truth * (1.0 + 1e-9),
                    "step {step}: answer {ans} vs oracle {truth}"
                );
            }
        }
    }

    #[test]
    fn adversarial_near_deletions_stay_2_approximate() {
        // delete the points nearest the centerpoint, the worst case for
        // counter exhaustion
        let mut st = DiameterState::new(DiameterConfig::new(2, 0.01, Mode::Amortized, 5));
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut oracle = PointSet::new(2);
        for i in 0..400u64 {
            let p = pt(i, &[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
            st.insert(p.clone()).unwrap();
            oracle.insert(p).unwrap();
        }
        for _ in 0..300 {
            let ans = st.query().unwrap();
            let truth = brute_diameter(&oracle).unwrap();
            assert!(ans >= truth / 2.0 - 1e-9 && ans <= truth * (1.0 + 1e-9));
            let c = st.centerpoint().cloned().unwrap_or_else(|| {
                st.iter_live().next().unwrap().clone()
            });
            let victim = st
                .iter_live()
                .min_by(|a, b| {
                    dist(&c, a).partial_cmp(&dist(&c, b)).unwrap()
                })
                .unwrap()
                .id;
            st.delete(victim).unwrap();
            oracle.remove(victim).unwrap();
            if oracle.is_empty() {
                break;
            }
        }
    }

    #[test]
    fn deamortized_budget_is_respected() {
        let mut cfg = DiameterConfig::new(2, 0.01, Mode::Deamortized, 23);
        cfg.op_budget_per_update = DiameterConfig::recommended_budget(2, 100_000, 0.01);
        let budget = cfg.op_budget_per_update;
        let mut st = DiameterState::new(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut max_ops = 0u64;
        let mut next_id = 0u64;
        let mut live: Vec<PointId> = Vec::new();
        for _ in 0..20_000 {
            if !live.is_empty() && rng.gen_bool(0.3) {
                let idx = rng.gen_range(0..live.len());
                let id = live.swap_remove(idx);
                st.delete(id).unwrap();
            } else {
                let p = pt(next_id, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
                live.push(next_id);
                next_id += 1;
                st.insert(p).unwrap();
            }
            max_ops = max_ops.max(st.last_update_ops());
        }
        assert!(
            max_ops <= budget,
            "max per-update ops {max_ops} exceeded budget {budget}"
        );
        assert_eq!(st.deadline_misses(), 0);
        // deep into the stream the scheduler must keep a representative live
        assert!(st.len() >= st.large_set_floor() / 2);
    }

    #[test]
    fn deamortized_cycles_do_not_overlap_and_finish_early() {
        let mut cfg = DiameterConfig::new(2, 0.01, Mode::Deamortized, 31);
        cfg.op_budget_per_update = DiameterConfig::recommended_budget(2, 100_000, 0.01);
        let mut st = DiameterState::new(cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for i in 0..30_000u64 {
            st.insert(pt(i, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .unwrap();
        }
        assert!(st.has_valid_centerpoint());
        assert_eq!(st.deadline_misses(), 0);
        assert!(st.rebuild_count() >= 2);
    }
}
