//! Approximate centerpoints via an iterated-Radon tournament.
//!
//! A pool seeded with random data points is repeatedly refined by replacing a
//! drawn pool member with the Radon point of d+2 drawn members. The last Radon
//! point is returned; its Tukey depth concentrates around the 1/(3d^2) target.
//!
//! The whole computation runs as a resumable task ([`CenterpointTask`]) whose
//! primitive operations (pivot rows, pool writes) can be metered one at a
//! time, so a caller can spread the work over many updates while the live set
//! keeps mutating.

use crate::geometry::{Point, PointSet};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Consecutive degenerate Radon draws tolerated before giving up.
const MAX_CONSECUTIVE_DEGENERATE: u32 = 50;

#[derive(Debug, Error, PartialEq)]
pub enum CenterpointError {
    #[error("point set too small: need at least d+2 = {need} points, have {have}")]
    TooSmall { need: usize, have: usize },
    #[error("task already complete")]
    AlreadyComplete,
    #[error("degenerate configuration persisted for {0} consecutive draws")]
    DegenerateExhausted(u32),
}

#[derive(Debug, Clone)]
pub struct CenterpointConfig {
    pub d: usize,
    pub target_alpha: Real,
    pub phi: Real,
    pub pool_size: usize,
    pub rounds: usize,
}

impl CenterpointConfig {
    /// Default schedule: pool_size = 8 d^2 ceil(ln(1/phi)),
    /// rounds = 4 d^2 pool_size.
    pub fn new(d: usize, phi: Real) -> Self {
        assert!(d >= 1);
        assert!(phi > 0.0 && phi < 1.0);
        let d2 = d * d;
        let log_term = (1.0 / phi).ln().ceil().max(1.0) as usize;
        let pool_size = 8 * d2 * log_term;
        let rounds = 4 * d2 * pool_size;
        CenterpointConfig {
            d,
            target_alpha: 1.0 / (3.0 * d2 as Real),
            phi,
            pool_size,
            rounds,
        }
    }
}

/// Result of advancing a task by a bounded number of operations.
#[derive(Debug)]
pub enum Progress {
    Pending,
    Done(Point<Real>),
}

enum Phase {
    FillPool {
        next: usize,
    },
    RoundSetup {
        round: usize,
    },
    RoundPivot {
        round: usize,
        draw: Vec<usize>,
        mat: Vec<Vec<Real>>,
        pivot_cols: Vec<usize>,
        row: usize,
        col: usize,
    },
    Done(Point<Real>),
}

/// A budgeted centerpoint computation over an immutable snapshot.
pub struct CenterpointTask {
    snapshot: Vec<Point<Real>>,
    cfg: CenterpointConfig,
    rng: ChaCha8Rng,
    pool: Vec<Point<Real>>,
    phase: Phase,
    last_radon: Option<Point<Real>>,
    consecutive_degenerate: u32,
    ops_used: u64,
}

/// One-shot centerpoint computation. Deterministic given the seed; identical
/// to running [`start_task`] to completion.
pub fn approximate_centerpoint(
    set: &PointSet<Real>,
    cfg: &CenterpointConfig,
    seed: u64,
) -> Result<Point<Real>, CenterpointError> {
    let mut task = start_task(set, cfg, seed)?;
    loop {
        match task.advance(u64::MAX)? {
            Progress::Done(p) => return Ok(p),
            Progress::Pending => {}
        }
    }
}

/// Capture a snapshot of `set` and prepare a resumable computation.
pub fn start_task(
    set: &PointSet<Real>,
    cfg: &CenterpointConfig,
    seed: u64,
) -> Result<CenterpointTask, CenterpointError> {
    let snapshot: Vec<Point<Real>> = set.iter().cloned().collect();
    CenterpointTask::from_snapshot(snapshot, cfg.clone(), seed)
}

impl CenterpointTask {
    pub fn from_snapshot(
        snapshot: Vec<Point<Real>>,
        cfg: CenterpointConfig,
        seed: u64,
    ) -> Result<Self, CenterpointError> {
        let need = cfg.d + 2;
        if snapshot.len() < need {
            return Err(CenterpointError::TooSmall {
                need,
                have: snapshot.len(),
            });
        }
        Ok(CenterpointTask {
            snapshot,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool: Vec::new(),
            phase: Phase::FillPool { next: 0 },
            last_radon: None,
            consecutive_degenerate: 0,
            ops_used: 0,
        })
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done(_))
    }

    pub fn ops_used(&self) -> u64 {
        self.ops_used
    }

    pub fn snapshot(&self) -> &[Point<Real>] {
        &self.snapshot
    }

    /// Run at most `op_budget` primitive operations. Returns `Done` exactly
    /// once; advancing a finished task is an error.
    pub fn advance(&mut self, op_budget: u64) -> Result<Progress, CenterpointError> {
        if self.is_done() {
            return Err(CenterpointError::AlreadyComplete);
        }
        let mut remaining = op_budget;
        while remaining > 0 {
            self.micro_step()?;
            self.ops_used += 1;
            remaining -= 1;
            if let Phase::Done(p) = &self.phase {
                return Ok(Progress::Done(p.clone()));
            }
        }
        Ok(Progress::Pending)
    }

    /// Exactly one primitive operation: a pool write, a round setup, or one
    /// elimination pivot.
    fn micro_step(&mut self) -> Result<(), CenterpointError> {
        match std::mem::replace(&mut self.phase, Phase::FillPool { next: 0 }) {
            Phase::FillPool { next } => {
                let idx = self.rng.gen_range(0..self.snapshot.len());
                self.pool.push(self.snapshot[idx].clone());
                self.phase = if next + 1 < self.cfg.pool_size {
                    Phase::FillPool { next: next + 1 }
                } else {
                    Phase::RoundSetup { round: 0 }
                };
                Ok(())
            }
            Phase::RoundSetup { round } => {
                let draw = self.draw_distinct(self.cfg.d + 2);
                let mat = self.dependence_matrix(&draw);
                self.phase = Phase::RoundPivot {
                    round,
                    draw,
                    mat,
                    pivot_cols: Vec::new(),
                    row: 0,
                    col: 0,
                };
                Ok(())
            }
            Phase::RoundPivot {
                round,
                draw,
                mut mat,
                mut pivot_cols,
                mut row,
                mut col,
            } => {
                let rows = mat.len();
                let cols = mat[0].len();
                // advance the elimination by one successful pivot (skipping
                // null columns costs nothing extra)
                while row < rows && col < cols {
                    if crate::geometry::eliminate_pivot(&mut mat, row, col) {
                        pivot_cols.push(col);
                        row += 1;
                        col += 1;
                        break;
                    }
                    col += 1;
                }
                let elimination_done = row >= rows || col >= cols;
                if !elimination_done {
                    self.phase = Phase::RoundPivot {
                        round,
                        draw,
                        mat,
                        pivot_cols,
                        row,
                        col,
                    };
                    return Ok(());
                }
                self.finish_round(round, draw, mat, pivot_cols)
            }
            Phase::Done(_) => unreachable!("advance guards completed tasks"),
        }
    }

    fn draw_distinct(&mut self, count: usize) -> Vec<usize> {
        let mut draw = Vec::with_capacity(count);
        while draw.len() < count {
            let idx = self.rng.gen_range(0..self.pool.len());
            if !draw.contains(&idx) {
                draw.push(idx);
            }
        }
        draw
    }

    fn dependence_matrix(&self, draw: &[usize]) -> Vec<Vec<Real>> {
        let d = self.cfg.d;
        let mut mat = vec![vec![0.0; d + 2]; d + 1];
        for (j, &slot) in draw.iter().enumerate() {
            for i in 0..d {
                mat[i][j] = self.pool[slot].coords[i];
            }
            mat[d][j] = 1.0;
        }
        mat
    }

    /// Final op of a round: back-substitute the kernel vector, split by sign,
    /// and write the Radon point into the pool.
    fn finish_round(
        &mut self,
        round: usize,
        draw: Vec<usize>,
        mat: Vec<Vec<Real>>,
        pivot_cols: Vec<usize>,
    ) -> Result<(), CenterpointError> {
        match kernel_radon(&self.pool, &draw, &mat, &pivot_cols) {
            Some(point) => {
                self.consecutive_degenerate = 0;
                self.pool[draw[0]] = point.clone();
                self.last_radon = Some(point);
                if round + 1 < self.cfg.rounds {
                    self.phase = Phase::RoundSetup { round: round + 1 };
                } else {
                    self.phase = Phase::Done(self.last_radon.clone().unwrap());
                }
                Ok(())
            }
            None => {
                self.consecutive_degenerate += 1;
                if self.consecutive_degenerate >= MAX_CONSECUTIVE_DEGENERATE {
                    return Err(CenterpointError::DegenerateExhausted(
                        self.consecutive_degenerate,
                    ));
                }
                // discard and redraw; the wasted pivots stay on the meter
                self.phase = Phase::RoundSetup { round };
                Ok(())
            }
        }
    }
}

/// Kernel vector from the eliminated dependence matrix, then the Radon point
/// of the positive-sign part. `None` on a one-sided (degenerate) split.
fn kernel_radon(
    pool: &[Point<Real>],
    draw: &[usize],
    mat: &[Vec<Real>],
    pivot_cols: &[usize],
) -> Option<Point<Real>> {
    let cols = mat[0].len();
    let free_col = (0..cols).find(|c| !pivot_cols.contains(c))?;
    let mut sol = vec![0.0; cols];
    sol[free_col] = 1.0;
    for (r, &pc) in pivot_cols.iter().enumerate().rev() {
        let mut acc = 0.0;
        for c in pc + 1..cols {
            acc += mat[r][c] * sol[c];
        }
        sol[pc] = -acc / mat[r][pc];
    }
    let tol = 1e-9;
    let mut sum_pos = 0.0;
    let mut any_neg = false;
    for &l in &sol {
        if l > tol {
            sum_pos += l;
        } else if l < -tol {
            any_neg = true;
        }
    }
    if sum_pos == 0.0 || !any_neg {
        return None;
    }
    let d = pool[draw[0]].dim();
    let mut coords = vec![0.0; d];
    for (j, &l) in sol.iter().enumerate() {
        if l > tol {
            let w = l / sum_pos;
            for c in 0..d {
                coords[c] += w * pool[draw[j]].coords[c];
            }
        }
    }
    Some(Point::anon(coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointSet;
    use crate::oracles::tukey_depth_exact;

    fn uniform_set(n: usize, d: usize, seed: u64) -> PointSet<Real> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = PointSet::new(d);
        for id in 0..n as u64 {
            let coords: Vec<Real> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            set.insert(Point::new(id, coords).unwrap()).unwrap();
        }
        set
    }

    #[test]
    fn one_dimensional_centerpoint_is_deep() {
        let mut set = PointSet::new(1);
        for id in 1..=100u64 {
            set.insert(Point::new(id, vec![id as Real]).unwrap()).unwrap();
        }
        let cfg = CenterpointConfig::new(1, 0.01);
        // each build fails with probability ~phi, so grade over many seeds
        let mut deep = 0;
        for seed in 0..100u64 {
            let c = approximate_centerpoint(&set, &cfg, seed).unwrap();
            let depth = tukey_depth_exact(&c, &set).unwrap();
            if depth >= 34 {
                deep += 1;
            }
        }
        assert!(deep >= 85, "only {deep}/100 builds reached depth ceil(100/3)");
    }

    #[test]
    fn too_small_set_is_rejected() {
        let set = uniform_set(3, 2, 0);
        let cfg = CenterpointConfig::new(2, 0.1);
        assert_eq!(
            approximate_centerpoint(&set, &cfg, 0).unwrap_err(),
            CenterpointError::TooSmall { need: 4, have: 3 }
        );
    }

    #[test]
    fn stepped_run_replays_monolithic() {
        let set = uniform_set(60, 2, 5);
        let cfg = CenterpointConfig::new(2, 0.1);
        let mono = approximate_centerpoint(&set, &cfg, 99).unwrap();

        let mut task = start_task(&set, &cfg, 99).unwrap();
        let stepped;
        let mut calls = 0u64;
        loop {
            calls += 1;
            match task.advance(1).unwrap() {
                Progress::Done(p) => {
                    stepped = Some(p);
                    break;
                }
                Progress::Pending => {}
            }
        }
        let stepped = stepped.unwrap();
        assert_eq!(stepped.coords, mono.coords);
        // unit stepping: one op per call
        assert_eq!(calls, task.ops_used());
        assert_eq!(task.advance(1).unwrap_err(), CenterpointError::AlreadyComplete);
    }

    #[test]
    fn snapshot_isolation() {
        let mut set = uniform_set(60, 2, 6);
        let cfg = CenterpointConfig::new(2, 0.1);
        let mut task = task_for(&set, &cfg);
        let _ = task.advance(10).unwrap();
        // mutate the live set mid-flight
        set.insert(Point::new(10_000, vec![50.0, 50.0]).unwrap()).unwrap();
        set.remove(0).unwrap();
        let result = run_to_done(&mut task);

        let set2 = uniform_set(60, 2, 6);
        let mut task2 = task_for(&set2, &cfg);
        let result2 = run_to_done(&mut task2);
        assert_eq!(result.coords, result2.coords);
    }

    fn task_for(set: &PointSet<Real>, cfg: &CenterpointConfig) -> CenterpointTask {
        start_task(set, cfg, 7).unwrap()
    }

    fn run_to_done(task: &mut CenterpointTask) -> Point<Real> {
        loop {
            if let Progress::Done(p) = task.advance(1_000).unwrap() {
                return p;
            }
        }
    }

    #[test]
    fn op_accounting_stays_within_cap() {
        // measured constant K for the d^7 log^3 d log^3 (1/phi) cap
        const K: f64 = 2_000.0;
        for (d, phi) in [(1usize, 0.05), (2, 0.05), (3, 0.01)] {
            let set = uniform_set(200, d, 17);
            let cfg = CenterpointConfig::new(d, phi);
            let mut task = start_task(&set, &cfg, 3).unwrap();
            run_to_done(&mut task);
            let cap = K
                * (d as f64).powi(7)
                * (d as f64).ln().max(1.0).powi(3)
                * (1.0 / phi).ln().max(1.0).powi(3);
            assert!(
                (task.ops_used() as f64) <= cap,
                "d={d} phi={phi}: ops {} over cap {cap}",
                task.ops_used()
            );
        }
    }
}
