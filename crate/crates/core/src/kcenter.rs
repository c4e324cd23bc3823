//! Fully dynamic (4+eps)-approximate k-center clustering.
//!
//! A ladder of radius guesses r_l = dmin*(1+eps)^l is maintained in parallel.
//! For each guess, clusters are opened around density-sampled robust centers:
//! a center is only accepted if its inner ball (radius 2*r_{l+1}) holds a
//! constant fraction of the still-uncovered points, so an adversary must
//! delete many points to invalidate it. Each cluster tracks m, the number of
//! current members inside the inner ball; m = 0 forces a rebuild of that
//! cluster and all later ones. Points no cluster covers sit in the remainder
//! set Q, the "guess too low" certificate. The answer is the smallest guess
//! with empty Q; its outer radius 4*r_{l+1} covers every live point
//! unconditionally.

use crate::geometry::{dist, GeomError, Point, PointId, PointSet};
use crate::scalar::Real;
use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KCenterError {
    #[error("guess ladder exhausted; raise dmax")]
    LadderExhausted,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone)]
pub struct KCenterConfig {
    pub k: usize,
    pub d: usize,
    pub eps: Real,
    pub delta: Real,
    pub dmin: Real,
    pub dmax: Real,
    /// Ladder length L; guesses are l in 0..=L.
    pub ladder_len: usize,
    pub sample_const: Real,
    pub seed: u64,
}

impl KCenterConfig {
    pub fn new(
        k: usize,
        d: usize,
        eps: Real,
        delta: Real,
        dmin: Real,
        dmax: Real,
        seed: u64,
    ) -> Self {
        assert!(k >= 1);
        assert!(eps > 0.0 && eps <= 1.0);
        assert!(delta > 0.0 && delta < 1.0);
        assert!(dmin > 0.0 && dmax >= dmin);
        let ladder_len = ((dmax / dmin).ln() / (1.0 + eps).ln()).ceil().max(1.0) as usize;
        KCenterConfig {
            k,
            d,
            eps,
            delta,
            dmin,
            dmax,
            ladder_len,
            sample_const: 4.0,
            seed,
        }
    }

    pub fn guess_radius(&self, ell: usize) -> Real {
        self.dmin * (1.0 + self.eps).powi(ell as i32)
    }

    pub fn inner_radius(&self, ell: usize) -> Real {
        2.0 * self.guess_radius(ell + 1)
    }

    pub fn outer_radius(&self, ell: usize) -> Real {
        4.0 * self.guess_radius(ell + 1)
    }

    /// Neighbor-count trigger for resuming a suspended guess.
    pub fn sparse_floor(&self, t: u64) -> u64 {
        (8.0 * self.eps.powi(-2) * ((t + 2) as Real).ln()).ceil() as u64
    }

    /// Below this active-set size, clustering scans exhaustively.
    pub fn small_cutoff(&self) -> usize {
        (2 * self.k).max(64)
    }
}

#[derive(Debug, Clone)]
pub struct Cluster {
    pub center: Point<Real>,
    pub members: IndexSet<PointId>,
    /// Current members within the inner radius of `center`.
    pub m: u64,
    /// Active-set size when this cluster was opened.
    pub basis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Assign {
    Cluster(usize),
    Remainder,
}

#[derive(Debug, Clone)]
struct WatchEntry {
    id: PointId,
    point: Point<Real>,
    gained: u64,
}

#[derive(Debug, Clone)]
pub struct GuessState {
    ell: usize,
    clusters: Vec<Cluster>,
    q: IndexSet<PointId>,
    assign: HashMap<PointId, Assign>,
    suspended: bool,
    watch: Vec<WatchEntry>,
    epoch: u64,
    m_exhaustions: u64,
}

impl GuessState {
    fn new(ell: usize) -> Self {
        GuessState {
            ell,
            clusters: Vec::new(),
            q: IndexSet::new(),
            assign: HashMap::new(),
            suspended: false,
            watch: Vec::new(),
            epoch: 0,
            m_exhaustions: 0,
        }
    }

    pub fn m_exhaustions(&self) -> u64 {
        self.m_exhaustions
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn remainder(&self) -> &IndexSet<PointId> {
        &self.q
    }

    pub fn is_suspended(&self) -> bool {
        self.suspended
    }
}

#[derive(Default)]
struct UpdateFx {
    ops: u64,
    m_exhaustions: u64,
    clustering_runs: u64,
}

pub struct KCenterState {
    cfg: KCenterConfig,
    points: PointSet<Real>,
    guesses: Vec<GuessState>,
    t: u64,
    ops_this_update: u64,
    total_ops: u64,
    m_exhaustion_rebuilds: u64,
    clustering_runs: u64,
}

impl KCenterState {
    pub fn new(cfg: KCenterConfig) -> Self {
        let guesses = (0..=cfg.ladder_len).map(GuessState::new).collect();
        KCenterState {
            points: PointSet::new(cfg.d),
            cfg,
            guesses,
            t: 0,
            ops_this_update: 0,
            total_ops: 0,
            m_exhaustion_rebuilds: 0,
            clustering_runs: 0,
        }
    }

    pub fn init(points: PointSet<Real>, cfg: KCenterConfig) -> Result<Self, KCenterError> {
        assert_eq!(points.dim(), cfg.d);
        let mut st = KCenterState::new(cfg);
        st.points = points;
        st.t = 1;
        let ids: Vec<PointId> = st.points.ids().collect();
        let mut fx = UpdateFx::default();
        let (points, cfg, t) = (&st.points, &st.cfg, st.t);
        for guess in st.guesses.iter_mut() {
            run_clustering(guess, points, cfg, t, ids.clone(), &mut fx);
        }
        st.ops_this_update = fx.ops;
        st.total_ops = fx.ops;
        st.clustering_runs = fx.clustering_runs;
        Ok(st)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn cfg(&self) -> &KCenterConfig {
        &self.cfg
    }

    pub fn points(&self) -> &PointSet<Real> {
        &self.points
    }

    pub fn guesses(&self) -> &[GuessState] {
        &self.guesses
    }

    pub fn last_update_ops(&self) -> u64 {
        self.ops_this_update
    }

    pub fn total_ops(&self) -> u64 {
        self.total_ops
    }

    pub fn m_exhaustion_rebuilds(&self) -> u64 {
        self.m_exhaustion_rebuilds
    }

    pub fn clustering_runs(&self) -> u64 {
        self.clustering_runs
    }

    pub fn insert(&mut self, p: Point<Real>) -> Result<(), KCenterError> {
        self.points.insert(p.clone())?;
        self.t += 1;
        let mut fx = UpdateFx::default();
        let (points, cfg, t) = (&self.points, &self.cfg, self.t);
        for guess in self.guesses.iter_mut() {
            guess_insert(guess, points, cfg, t, &p, &mut fx);
        }
        self.commit(fx);
        Ok(())
    }

    pub fn delete(&mut self, id: PointId) -> Result<(), KCenterError> {
        let p = self.points.remove(id)?;
        self.t += 1;
        let mut fx = UpdateFx::default();
        let (points, cfg, t) = (&self.points, &self.cfg, self.t);
        for guess in self.guesses.iter_mut() {
            guess_delete(guess, points, cfg, t, &p, &mut fx);
        }
        self.commit(fx);
        Ok(())
    }

    fn commit(&mut self, fx: UpdateFx) {
        self.ops_this_update = fx.ops;
        self.total_ops += fx.ops;
        self.m_exhaustion_rebuilds += fx.m_exhaustions;
        self.clustering_runs += fx.clustering_runs;
    }

    /// Index of the answering guess: the smallest one whose remainder is
    /// empty.
    pub fn answer_index(&self) -> Option<usize> {
        if self.points.is_empty() {
            return None;
        }
        self.guesses.iter().position(|g| g.q.is_empty())
    }

    /// Centers of the answering guess and a radius covering every live point.
    pub fn current_solution(&self) -> Result<(Vec<Point<Real>>, Real), KCenterError> {
        if self.points.is_empty() {
            return Ok((Vec::new(), 0.0));
        }
        let g = self.answer_index().ok_or(KCenterError::LadderExhausted)?;
        let centers = self.guesses[g]
            .clusters
            .iter()
            .map(|c| c.center.clone())
            .collect();
        Ok((centers, self.cfg.outer_radius(g)))
    }

    /// Full bookkeeping audit of every guess; `Err` describes the first
    /// violation found. Test-scale only: O(L * n * k).
    pub fn check_invariants(&self) -> Result<(), String> {
        for guess in &self.guesses {
            let ell = guess.ell;
            let inner = self.cfg.inner_radius(ell);
            let outer = self.cfg.outer_radius(ell);
            let mut seen: HashMap<PointId, Assign> = HashMap::new();
            for (ci, cl) in guess.clusters.iter().enumerate() {
                let mut inner_count = 0u64;
                for &id in &cl.members {
                    let p = self
                        .points
                        .get(id)
                        .ok_or_else(|| format!("guess {ell}: dead member {id}"))?;
                    if seen.insert(id, Assign::Cluster(ci)).is_some() {
                        return Err(format!("guess {ell}: {id} in two clusters"));
                    }
                    let dv = dist(&cl.center, p);
                    if dv > outer * (1.0 + 1e-9) {
                        return Err(format!(
                            "guess {ell}: member {id} outside outer radius of cluster {ci}"
                        ));
                    }
                    if dv <= inner {
                        inner_count += 1;
                    }
                    // assignment tie-break: not covered by an earlier center
                    for (cj, other) in guess.clusters.iter().enumerate().take(ci) {
                        if dist(&other.center, p) <= outer {
                            return Err(format!(
                                "guess {ell}: member {id} of cluster {ci} covered by {cj}"
                            ));
                        }
                    }
                }
                if inner_count != cl.m {
                    return Err(format!(
                        "guess {ell}: cluster {ci} m={} but exact inner count {}",
                        cl.m, inner_count
                    ));
                }
                if cl.m == 0 && !cl.members.is_empty() {
                    return Err(format!("guess {ell}: cluster {ci} live with m=0"));
                }
            }
            for &id in &guess.q {
                if self.points.get(id).is_none() {
                    return Err(format!("guess {ell}: dead remainder point {id}"));
                }
                if seen.insert(id, Assign::Remainder).is_some() {
                    return Err(format!("guess {ell}: {id} in cluster and remainder"));
                }
            }
            if seen.len() != self.points.len() {
                return Err(format!(
                    "guess {ell}: {} assigned vs {} live",
                    seen.len(),
                    self.points.len()
                ));
            }
            for (id, a) in &guess.assign {
                if seen.get(id) != Some(a) {
                    return Err(format!("guess {ell}: stale assignment for {id}"));
                }
            }
            // disjointedness of centers at build time persists: centers are
            // immutable coordinates
            for (ci, cl) in guess.clusters.iter().enumerate() {
                for other in guess.clusters.iter().take(ci) {
                    if dist(&other.center, &cl.center) <= outer {
                        return Err(format!(
                            "guess {ell}: centers of clusters within outer radius"
                        ));
                    }
                }
            }
            if guess.suspended && guess.q.is_empty() {
                return Err(format!("guess {ell}: suspended with empty remainder"));
            }
        }
        Ok(())
    }
}

fn guess_insert(
    guess: &mut GuessState,
    points: &PointSet<Real>,
    cfg: &KCenterConfig,
    t: u64,
    p: &Point<Real>,
    fx: &mut UpdateFx,
) {
    let ell = guess.ell;
    let inner = cfg.inner_radius(ell);
    let outer = cfg.outer_radius(ell);
    let was_suspended = guess.suspended;
    let mut covered: Option<(usize, Real)> = None;
    for (ci, cl) in guess.clusters.iter().enumerate() {
        fx.ops += 1;
        let dv = dist(&cl.center, p);
        if dv <= outer {
            covered = Some((ci, dv));
            break;
        }
    }
    match covered {
        Some((ci, dv)) => {
            guess.clusters[ci].members.insert(p.id);
            guess.assign.insert(p.id, Assign::Cluster(ci));
            if dv <= inner {
                guess.clusters[ci].m += 1;
            }
        }
        None if guess.suspended => {
            guess.q.insert(p.id);
            guess.assign.insert(p.id, Assign::Remainder);
        }
        None if guess.clusters.len() < cfg.k => {
            // extend the clustering over the new point plus the remainder
            let mut x: Vec<PointId> = guess.q.iter().copied().collect();
            x.push(p.id);
            guess.q.clear();
            run_clustering(guess, points, cfg, t, x, fx);
        }
        None => {
            guess.q.insert(p.id);
            guess.assign.insert(p.id, Assign::Remainder);
        }
    }
    if was_suspended && guess.suspended {
        // the sparsity watch: count inserts landing near retained samples
        let floor = cfg.sparse_floor(t);
        let mut resume = false;
        for w in guess.watch.iter_mut() {
            fx.ops += 1;
            if dist(&w.point, p) <= inner {
                w.gained += 1;
                if w.gained >= floor {
                    resume = true;
                }
            }
        }
        if resume {
            let x: Vec<PointId> = guess.q.iter().copied().collect();
            guess.q.clear();
            run_clustering(guess, points, cfg, t, x, fx);
        }
    }
}

fn guess_delete(
    guess: &mut GuessState,
    points: &PointSet<Real>,
    cfg: &KCenterConfig,
    t: u64,
    p: &Point<Real>,
    fx: &mut UpdateFx,
) {
    let inner = cfg.inner_radius(guess.ell);
    guess.watch.retain(|w| w.id != p.id);
    match guess.assign.remove(&p.id) {
        Some(Assign::Cluster(ci)) => {
            guess.clusters[ci].members.swap_remove(&p.id);
            fx.ops += 1;
            if dist(&guess.clusters[ci].center, p) <= inner {
                guess.clusters[ci].m -= 1;
                if guess.clusters[ci].m == 0 {
                    fx.m_exhaustions += 1;
                    guess.m_exhaustions += 1;
                    // rebuild this cluster and all later ones over their
                    // union, together with the remainder
                    let mut x: Vec<PointId> = Vec::new();
                    for cl in &guess.clusters[ci..] {
                        x.extend(cl.members.iter().copied());
                    }
                    x.extend(guess.q.iter().copied());
                    guess.clusters.truncate(ci);
                    guess.q.clear();
                    run_clustering(guess, points, cfg, t, x, fx);
                }
            }
        }
        Some(Assign::Remainder) => {
            guess.q.swap_remove(&p.id);
            if guess.clusters.len() < cfg.k {
                let x: Vec<PointId> = guess.q.iter().copied().collect();
                guess.q.clear();
                run_clustering(guess, points, cfg, t, x, fx);
            }
        }
        None => unreachable!("every live point is assigned"),
    }
}

/// Algorithm core: open clusters over `x` starting after the existing ones.
/// Existing clusters are untouched. Sets the remainder, assignments, and the
/// suspension state for the ids in `x`.
fn run_clustering(
    guess: &mut GuessState,
    points: &PointSet<Real>,
    cfg: &KCenterConfig,
    t: u64,
    x: Vec<PointId>,
    fx: &mut UpdateFx,
) {
    fx.clustering_runs += 1;
    guess.epoch += 1;
    guess.suspended = false;
    guess.watch.clear();
    let ell = guess.ell;
    let inner = cfg.inner_radius(ell);
    let outer = cfg.outer_radius(ell);
    let mut y: Vec<(PointId, &Point<Real>)> = x
        .iter()
        .map(|&id| (id, points.get(id).expect("clustering over live ids")))
        .collect();
    while !y.is_empty() && guess.clusters.len() < cfg.k {
        let i1 = guess.clusters.len() + 1;
        let kmi = (cfg.k - i1).max(1);
        let chosen = choose_center(guess, cfg, t, &y, kmi, inner, fx);
        let Some(center_idx) = chosen else {
            // guess too low: remember the sample as the sparsity watch
            guess.suspended = true;
            break;
        };
        let center = y[center_idx].1.clone();
        let basis = y.len();
        let mut members = IndexSet::new();
        let mut m = 0u64;
        let mut rest = Vec::with_capacity(y.len());
        for (id, p) in y {
            fx.ops += 1;
            let dv = dist(&center, p);
            if dv <= outer {
                members.insert(id);
                if dv <= inner {
                    m += 1;
                }
            } else {
                rest.push((id, p));
            }
        }
        let ci = guess.clusters.len();
        for &id in &members {
            guess.assign.insert(id, Assign::Cluster(ci));
        }
        guess.clusters.push(Cluster {
            center,
            members,
            m,
            basis,
        });
        y = rest;
    }
    for (id, _) in y {
        guess.q.insert(id);
        guess.assign.insert(id, Assign::Remainder);
    }
}

/// Pick a center candidate by inner-ball density, or `None` when the best
/// density certifies the guess as too low. On `None` the sampled points are
/// installed as the suspension watch.
fn choose_center(
    guess: &mut GuessState,
    cfg: &KCenterConfig,
    t: u64,
    y: &[(PointId, &Point<Real>)],
    kmi: usize,
    inner: Real,
    fx: &mut UpdateFx,
) -> Option<usize> {
    let n = y.len();
    let thresh_frac = (1.0 - cfg.eps) / (4.0 * kmi as Real);
    if n <= cfg.small_cutoff() {
        // exact: scan every pair
        let mut best = (0usize, 0u64);
        for (qi, (_, q)) in y.iter().enumerate() {
            let mut count = 0u64;
            for (_, p) in y {
                fx.ops += 1;
                if dist(q, p) <= inner {
                    count += 1;
                }
            }
            if count > best.1 {
                best = (qi, count);
            }
        }
        if (best.1 as Real) < thresh_frac * n as Real {
            guess.watch = y
                .iter()
                .map(|(id, p)| WatchEntry {
                    id: *id,
                    point: (*p).clone(),
                    gained: 0,
                })
                .collect();
            return None;
        }
        return Some(best.0);
    }
    let log_l = ((cfg.ladder_len + 1) as Real).ln().max(1.0);
    let log_t = (((t + 2) as Real) / cfg.delta).ln().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(
        cfg.seed
            ^ (guess.ell as u64).wrapping_mul(0x9e3779b97f4a7c15)
            ^ guess.epoch.wrapping_mul(0xc2b2ae3d27d4eb4f)
            ^ (guess.clusters.len() as u64).wrapping_mul(0x165667b19e3779f9),
    ));
    let dense_regime = kmi as Real <= (n as Real).powf(2.0 / 3.0);
    let sample_size = if dense_regime {
        (cfg.sample_const * kmi as Real * log_l * log_t).ceil() as usize
    } else {
        (cfg.sample_const * (kmi as Real).sqrt() * log_l * log_t).ceil() as usize
    }
    .min(n);
    let sample: Vec<usize> = (0..sample_size).map(|_| rng.gen_range(0..n)).collect();
    let (best_idx, best_count, threshold) = if dense_regime {
        // count neighbors within the sample; threshold scales with |S|
        let mut best = (sample[0], 0u64);
        for &qi in &sample {
            let mut count = 0u64;
            for &pi in &sample {
                fx.ops += 1;
                if dist(y[qi].1, y[pi].1) <= inner {
                    count += 1;
                }
            }
            if count > best.1 {
                best = (qi, count);
            }
        }
        (best.0, best.1, thresh_frac * sample.len() as Real)
    } else {
        // count neighbors against the whole active set
        let mut best = (sample[0], 0u64);
        for &qi in &sample {
            let mut count = 0u64;
            for (_, p) in y {
                fx.ops += 1;
                if dist(y[qi].1, p) <= inner {
                    count += 1;
                }
            }
            if count > best.1 {
                best = (qi, count);
            }
        }
        (best.0, best.1, thresh_frac * n as Real)
    };
    if (best_count as Real) < threshold {
        let mut seen = std::collections::HashSet::new();
        guess.watch = sample
            .iter()
            .filter(|&&qi| seen.insert(y[qi].0))
            .map(|&qi| WatchEntry {
                id: y[qi].0,
                point: y[qi].1.clone(),
                gained: 0,
            })
            .collect();
        return None;
    }
    Some(best_idx)
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
    use crate::oracles::{exact_kcenter, gonzalez};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(id: PointId, coords: &[Real]) -> Point<Real> {
        Point::new(id, coords.to_vec()).unwrap()
    }

    fn cfg(k: usize) -> KCenterConfig {
        KCenterConfig::new(k, 2, 0.2, 0.01, 0.05, 100.0, 7)
    }

    fn covers(st: &KCenterState) -> bool {
        let (centers, radius) = st.current_solution().unwrap();
        st.points.iter().all(|p| {
            centers
                .iter()
                .any(|c| dist(c, p) <= radius * (1.0 + 1e-9))
        })
    }

    #[test]
    fn empty_state() {
        let st = KCenterState::init(PointSet::new(2), cfg(3)).unwrap();
        let (centers, radius) = st.current_solution().unwrap();
        assert!(centers.is_empty());
        assert_eq!(radius, 0.0);
        assert_eq!(st.answer_index(), None);
        st.check_invariants().unwrap();
    }

    #[test]
    fn well_separated_singletons() {
        let mut set = PointSet::new(2);
        for i in 0..3u64 {
            set.insert(pt(i, &[30.0 * i as Real, 0.0])).unwrap();
        }
        let st = KCenterState::init(set, cfg(3)).unwrap();
        let g = st.answer_index().unwrap();
        assert_eq!(st.guesses()[g].clusters().len(), 3);
        assert!(st.guesses()[g].remainder().is_empty());
        assert!(covers(&st));
        st.check_invariants().unwrap();
    }

    #[test]
    fn single_tight_cluster_has_full_m() {
        let mut set = PointSet::new(2);
        for i in 0..20u64 {
            let a = i as Real * 0.3;
            set.insert(pt(i, &[0.02 * a.cos(), 0.02 * a.sin()])).unwrap();
        }
        let st = KCenterState::init(set, cfg(3)).unwrap();
        let g = st.answer_index().unwrap();
        let gs = &st.guesses()[g];
        assert_eq!(gs.clusters().len(), 1);
        assert!(gs.remainder().is_empty());
        assert_eq!(gs.clusters()[0].m, 20);
        st.check_invariants().unwrap();
    }

    #[test]
    fn two_far_groups_are_disjoint_clusters() {
        let mut set = PointSet::new(2);
        for i in 0..10u64 {
            set.insert(pt(i, &[0.1 * i as Real, 0.0])).unwrap();
            set.insert(pt(100 + i, &[80.0 + 0.1 * i as Real, 0.0])).unwrap();
        }
        let st = KCenterState::init(set, cfg(2)).unwrap();
        let g = st.answer_index().unwrap();
        let gs = &st.guesses()[g];
        assert_eq!(gs.clusters().len(), 2);
        let c0 = &gs.clusters()[0].center;
        let c1 = &gs.clusters()[1].center;
        assert!(dist(c0, c1) > st.cfg.outer_radius(g));
        assert!(covers(&st));
        st.check_invariants().unwrap();
    }

    #[test]
    fn inner_insert_increments_m_without_rebuild() {
        let mut set = PointSet::new(2);
        for i in 0..20u64 {
            set.insert(pt(i, &[0.01 * i as Real, 0.0])).unwrap();
        }
        let mut st = KCenterState::init(set, cfg(2)).unwrap();
        let g = st.answer_index().unwrap();
        let m0 = st.guesses()[g].clusters()[0].m;
        let runs = st.clustering_runs();
        st.insert(pt(999, &[0.05, 0.0])).unwrap();
        assert_eq!(st.guesses()[g].clusters()[0].m, m0 + 1);
        assert_eq!(st.clustering_runs(), runs);
        st.check_invariants().unwrap();
    }

    #[test]
    fn far_insert_with_full_clusters_goes_to_remainder() {
        let mut set = PointSet::new(2);
        for i in 0..5u64 {
            set.insert(pt(i, &[0.01 * i as Real, 0.0])).unwrap();
            set.insert(pt(50 + i, &[90.0 + 0.01 * i as Real, 0.0])).unwrap();
        }
        let mut st = KCenterState::init(set, cfg(2)).unwrap();
        let g0 = st.answer_index().unwrap();
        st.insert(pt(999, &[45.0, 40.0])).unwrap();
        // the low guess can no longer cover with k=2; answer moves up
        let g1 = st.answer_index().unwrap();
        assert!(g1 > g0, "answer index {g1} should exceed {g0}");
        assert!(!st.guesses()[g0].remainder().is_empty());
        assert!(covers(&st));
        st.check_invariants().unwrap();
    }

    #[test]
    fn outer_shell_delete_leaves_m() {
        let mut set = PointSet::new(2);
        for i in 0..10u64 {
            set.insert(pt(i, &[0.01 * i as Real, 0.0])).unwrap();
        }
        let mut st = KCenterState::init(set, cfg(1)).unwrap();
        let g = st.answer_index().unwrap();
        let inner = st.cfg.inner_radius(g);
        let outer = st.cfg.outer_radius(g);
        let c = st.guesses()[g].clusters()[0].center.clone();
        // a point in the shell between inner and outer radius
        let shell = pt(999, &[c.coords[0] + (inner + outer) / 2.0, c.coords[1]]);
        st.insert(shell).unwrap();
        let m0 = st.guesses()[g].clusters()[0].m;
        st.delete(999).unwrap();
        assert_eq!(st.guesses()[g].clusters()[0].m, m0);
        st.check_invariants().unwrap();
    }

    #[test]
    fn m_exhaustion_rebuilds_exactly_once_per_event() {
        let mut set = PointSet::new(2);
        for i in 0..30u64 {
            set.insert(pt(i, &[0.02 * i as Real, 0.0])).unwrap();
        }
        for i in 0..30u64 {
            set.insert(pt(100 + i, &[70.0 + 0.02 * i as Real, 0.0])).unwrap();
        }
        let mut st = KCenterState::init(set, cfg(2)).unwrap();
        let g = st.answer_index().unwrap();
        // drive cluster 0's m to zero by deleting its inner-ball members
        let inner = st.cfg.inner_radius(g);
        let c = st.guesses()[g].clusters()[0].center.clone();
        let victims: Vec<PointId> = st
            .points()
            .iter()
            .filter(|p| dist(&c, p) <= inner)
            .map(|p| p.id)
            .collect();
        let m = st.guesses()[g].clusters()[0].m;
        assert_eq!(victims.len() as u64, m);
        let before = st.guesses()[g].m_exhaustions();
        for id in victims {
            st.delete(id).unwrap();
            st.check_invariants().unwrap();
        }
        assert_eq!(st.guesses()[g].m_exhaustions(), before + 1);
        assert!(covers(&st));
    }

    #[test]
    fn deleting_last_remainder_point_lowers_answer() {
        let mut set = PointSet::new(2);
        for i in 0..5u64 {
            set.insert(pt(i, &[0.01 * i as Real, 0.0])).unwrap();
            set.insert(pt(50 + i, &[90.0 + 0.01 * i as Real, 0.0])).unwrap();
        }
        set.insert(pt(999, &[45.0, 40.0])).unwrap();
        let mut st = KCenterState::init(set, cfg(2)).unwrap();
        let g0 = st.answer_index().unwrap();
        st.delete(999).unwrap();
        let g1 = st.answer_index().unwrap();
        assert!(g1 < g0, "answer index {g1} should drop below {g0}");
        assert!(covers(&st));
        st.check_invariants().unwrap();
    }

    #[test]
    fn random_stream_coverage_and_invariants() {
        let mut st = KCenterState::init(PointSet::new(2), cfg(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut live: Vec<PointId> = Vec::new();
        let mut next_id = 0u64;
        for step in 0..600 {
            if !live.is_empty() && rng.gen_bool(0.35) {
                let idx = rng.gen_range(0..live.len());
                let id = live.swap_remove(idx);
                st.delete(id).unwrap();
            } else {
                let p = pt(next_id, &[rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)]);
                live.push(next_id);
                next_id += 1;
                st.insert(p).unwrap();
            }
            st.check_invariants().unwrap();
            if !st.is_empty() {
                assert!(covers(&st), "coverage failed at step {step}");
            }
        }
    }

    #[test]
    fn ratio_against_exhaustive_oracle() {
        let mut st = KCenterState::init(PointSet::new(2), cfg(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut live: Vec<PointId> = Vec::new();
        let mut next_id = 0u64;
        for _ in 0..40 {
            let p = pt(next_id, &[rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)]);
            live.push(next_id);
            next_id += 1;
            st.insert(p).unwrap();
        }
        for _ in 0..60 {
            if live.len() > 10 && rng.gen_bool(0.5) {
                let idx = rng.gen_range(0..live.len());
                st.delete(live.swap_remove(idx)).unwrap();
            } else {
                let p = pt(next_id, &[rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)]);
                live.push(next_id);
                next_id += 1;
                st.insert(p).unwrap();
            }
            let (_, radius) = st.current_solution().unwrap();
            let (_, opt) = exact_kcenter(st.points(), 2).unwrap();
            assert!(covers(&st));
            assert!(
                radius <= 4.0 * (1.0 + st.cfg.eps) * opt.max(st.cfg.dmin) * (1.0 + 1e-9),
                "radius {radius} vs opt {opt}"
            );
        }
    }

    #[test]
    fn k1_matches_discrete_one_center() {
        let mut st = KCenterState::init(PointSet::new(2), cfg(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for i in 0..50u64 {
            st.insert(pt(i, &[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]))
                .unwrap();
        }
        let (_, radius) = st.current_solution().unwrap();
        let (_, opt) = exact_kcenter(st.points(), 1).unwrap();
        assert!(covers(&st));
        assert!(radius <= 4.0 * (1.0 + st.cfg.eps) * opt * (1.0 + 1e-9));
        // sanity against the greedy baseline too
        let (_, gr) = gonzalez(st.points(), 1).unwrap();
        assert!(radius <= 4.0 * (1.0 + st.cfg.eps) * gr * (1.0 + 1e-9));
    }
}
