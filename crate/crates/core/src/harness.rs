//! Experiment plumbing: update streams, adversary generators, the
//! experiment runner, and metrics emission.
//!
//! Streams are plain text, one event per line:
//! `+ <id> <x1> … <xd>` insert, `- <id>` delete, `? diam|meb|kcenter` query.
//!
//! Three adversaries grade the engines. The oblivious and output-adaptive
//! generators never see engine internals — they track their own view of the
//! point set and, for the latter, the answers the engine reported. The
//! randomness-adaptive generator receives a read-only view of internal state
//! (centerpoint location, cluster counters) before every event, and aims its
//! deletions to force maximal rebuilds.

use crate::diameter::{DiamError, DiameterConfig, DiameterState, Mode};
use crate::geometry::{dist, dist_coords, Point, PointId, PointSet};
use crate::kcenter::{KCenterConfig, KCenterError, KCenterState};
use crate::oracles::{brute_diameter, exact_kcenter, exact_meb, OracleBudget};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Diam,
    Meb,
    KCenter,
}

impl QueryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Diam => "diam",
            QueryKind::Meb => "meb",
            QueryKind::KCenter => "kcenter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpdateEvent {
    Insert { id: PointId, coords: Vec<Real> },
    Delete { id: PointId },
    Query(QueryKind),
}

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("line {0}: malformed event: {1}")]
    Malformed(usize, String),
    #[error("line {0}: expected {1} coordinates, found {2}")]
    DimensionMismatch(usize, usize, usize),
}

/// Parse a stream; `dim` fixes the expected coordinate count.
pub fn parse_stream(text: &str, dim: usize) -> Result<Vec<UpdateEvent>, StreamError> {
    let mut events = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let bad = |msg: &str| StreamError::Malformed(lineno, msg.to_string());
        match fields[0] {
            "+" => {
                if fields.len() < 2 {
                    return Err(bad("insert needs an id"));
                }
                let id: PointId = fields[1].parse().map_err(|_| bad("bad id"))?;
                let coords: Vec<Real> = fields[2..]
                    .iter()
                    .map(|f| f.parse().map_err(|_| bad("bad coordinate")))
                    .collect::<Result<_, _>>()?;
                if coords.len() != dim {
                    return Err(StreamError::DimensionMismatch(lineno, dim, coords.len()));
                }
                events.push(UpdateEvent::Insert { id, coords });
            }
            "-" => {
                if fields.len() != 2 {
                    return Err(bad("delete takes exactly an id"));
                }
                let id: PointId = fields[1].parse().map_err(|_| bad("bad id"))?;
                events.push(UpdateEvent::Delete { id });
            }
            "?" => {
                if fields.len() != 2 {
                    return Err(bad("query takes exactly one kind"));
                }
                let kind = match fields[1] {
                    "diam" => QueryKind::Diam,
                    "meb" => QueryKind::Meb,
                    "kcenter" => QueryKind::KCenter,
                    other => return Err(bad(&format!("unknown query kind {other}"))),
                };
                events.push(UpdateEvent::Query(kind));
            }
            other => return Err(bad(&format!("unknown op {other}"))),
        }
    }
    Ok(events)
}

pub fn serialize_stream(events: &[UpdateEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        match ev {
            UpdateEvent::Insert { id, coords } => {
                write!(out, "+ {id}").unwrap();
                for c in coords {
                    write!(out, " {c}").unwrap();
                }
                out.push('\n');
            }
            UpdateEvent::Delete { id } => {
                writeln!(out, "- {id}").unwrap();
            }
            UpdateEvent::Query(kind) => {
                writeln!(out, "? {}", kind.as_str()).unwrap();
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    ObliviousRandom,
    OutputAdaptive,
    RandomnessAdaptive,
}

impl AdversaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AdversaryKind::ObliviousRandom => "oblivious_random",
            AdversaryKind::OutputAdaptive => "output_adaptive",
            AdversaryKind::RandomnessAdaptive => "randomness_adaptive",
        }
    }

    pub fn from_str(s: &str) -> Option<Self> {
        match s {
            "oblivious_random" => Some(AdversaryKind::ObliviousRandom),
            "output_adaptive" => Some(AdversaryKind::OutputAdaptive),
            "randomness_adaptive" => Some(AdversaryKind::RandomnessAdaptive),
            _ => None,
        }
    }
}

/// Read-only engine internals, handed only to the randomness-adaptive
/// adversary before each event.
#[derive(Default)]
pub struct EngineView {
    /// Current diameter-engine centerpoint, if one is active.
    pub centerpoint: Option<Point<Real>>,
    /// Minimum-m cluster of the answering k-center guess:
    /// (center, inner radius, current inner-ball member ids).
    pub weak_cluster: Option<(Point<Real>, Real, Vec<PointId>)>,
}

/// Stateful event generator. Tracks its own copy of the live set so the
/// oblivious and output-adaptive kinds stay isolated from engine internals.
pub struct Adversary {
    pub kind: AdversaryKind,
    rng: ChaCha8Rng,
    pub delete_frac: f64,
    coord_scale: Real,
    dim: usize,
    next_id: PointId,
    live: Vec<PointId>,
    coords: HashMap<PointId, Vec<Real>>,
    /// Witness coordinates from the last reported answer (output-adaptive).
    last_witnesses: Vec<Vec<Real>>,
}

impl Adversary {
    pub fn new(kind: AdversaryKind, dim: usize, coord_scale: Real, seed: u64) -> Self {
        Adversary {
            kind,
            rng: ChaCha8Rng::seed_from_u64(seed),
            delete_frac: 0.3,
            coord_scale,
            dim,
            next_id: 0,
            live: Vec::new(),
            coords: HashMap::new(),
            last_witnesses: Vec::new(),
        }
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    /// Feed back the witness coordinates of the engine's last answer.
    /// Only the output-adaptive kind uses them.
    pub fn observe_answer(&mut self, witnesses: Vec<Vec<Real>>) {
        self.last_witnesses = witnesses;
    }

    pub fn next_event(&mut self, view: &EngineView) -> UpdateEvent {
        let do_delete = !self.live.is_empty() && self.rng.gen_bool(self.delete_frac);
        if !do_delete {
            return self.gen_insert();
        }
        let victim = match self.kind {
            AdversaryKind::ObliviousRandom => {
                let idx = self.rng.gen_range(0..self.live.len());
                self.live[idx]
            }
            AdversaryKind::OutputAdaptive => {
                let witnesses = std::mem::take(&mut self.last_witnesses);
                let v = self.nearest_to(&witnesses);
                self.last_witnesses = witnesses;
                v
            }
            AdversaryKind::RandomnessAdaptive => self.targeted_victim(view),
        };
        self.apply_delete(victim);
        UpdateEvent::Delete { id: victim }
    }

    fn gen_insert(&mut self) -> UpdateEvent {
        let id = self.next_id;
        self.next_id += 1;
        let coords: Vec<Real> = (0..self.dim)
            .map(|_| self.rng.gen_range(-self.coord_scale..self.coord_scale))
            .collect();
        self.live.push(id);
        self.coords.insert(id, coords.clone());
        UpdateEvent::Insert { id, coords }
    }

    fn apply_delete(&mut self, id: PointId) {
        self.live.retain(|&x| x != id);
        self.coords.remove(&id);
    }

    /// Own live point nearest to any of the given coordinate targets;
    /// random fallback when there are none.
    fn nearest_to(&mut self, targets: &[Vec<Real>]) -> PointId {
        let mut best: Option<(Real, PointId)> = None;
        for &id in &self.live {
            let c = &self.coords[&id];
            for tgt in targets {
                if tgt.len() != c.len() {
                    continue;
                }
                let dv = dist_coords(c, tgt);
                if best.map_or(true, |(b, _)| dv < b) {
                    best = Some((dv, id));
                }
            }
        }
        match best {
            Some((_, id)) => id,
            None => self.live[self.rng.gen_range(0..self.live.len())],
        }
    }

    fn targeted_victim(&mut self, view: &EngineView) -> PointId {
        if let Some((_, _, inner_ids)) = &view.weak_cluster {
            // hit the weakest cluster's inner ball to drain its counter
            if let Some(&id) = inner_ids.iter().find(|id| self.coords.contains_key(id)) {
                return id;
            }
        }
        if let Some(c) = &view.centerpoint {
            let target = vec![c.coords.clone()];
            return self.nearest_to(&target);
        }
        self.live[self.rng.gen_range(0..self.live.len())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Diam,
    Meb,
    KCenter,
}

impl Algo {
    pub fn query_kind(self) -> QueryKind {
        match self {
            Algo::Diam => QueryKind::Diam,
            Algo::Meb => QueryKind::Meb,
            Algo::KCenter => QueryKind::KCenter,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub d: usize,
    pub eps: Option<Real>,
    pub delta: Real,
    pub k: usize,
    pub dmin: Real,
    pub dmax: Real,
    pub seed: u64,
    pub mode: Mode,
    pub adversary: AdversaryKind,
    pub n: usize,
    /// Issue a query every this many generated events.
    pub query_every: usize,
    /// Check against the exact oracle every this many queries (0 = never).
    pub oracle_cadence: usize,
    pub coord_scale: Real,
}

impl ExperimentConfig {
    pub fn new(algo: Algo, d: usize, n: usize, seed: u64) -> Self {
        ExperimentConfig {
            algo,
            d,
            eps: None,
            delta: 0.01,
            k: 2,
            dmin: 0.05,
            dmax: 1000.0,
            seed,
            mode: Mode::Amortized,
            adversary: AdversaryKind::ObliviousRandom,
            n,
            query_every: 10,
            oracle_cadence: 10,
            coord_scale: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub t: u64,
    pub op: String,
    pub op_count: u64,
    pub answer: Option<Real>,
    pub oracle: Option<Real>,
    pub ratio: Option<Real>,
    pub rebuild_flag: bool,
    pub seed: u64,
}

#[derive(Debug, Default)]
pub struct ExperimentReport {
    pub rows: Vec<MetricsRow>,
    pub violations: u64,
    pub queries: u64,
    pub oracle_checks: u64,
    pub max_update_ops: u64,
    pub total_ops: u64,
    pub rebuilds: u64,
    pub deadline_misses: u64,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,op,op_count,answer,oracle,ratio,rebuild_flag,seed\n");
        for r in &self.rows {
            let opt = |v: &Option<Real>| v.map_or(String::new(), |x| format!("{x}"));
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.t,
                r.op,
                r.op_count,
                opt(&r.answer),
                opt(&r.oracle),
                opt(&r.ratio),
                r.rebuild_flag as u8,
                r.seed
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("event {0}: {1}")]
    Diam(usize, DiamError),
    #[error("event {0}: {1}")]
    KCenter(usize, KCenterError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

enum Engine {
    Diam(DiameterState),
    KC(KCenterState),
}

impl Engine {
    fn new(cfg: &ExperimentConfig) -> Self {
        match cfg.algo {
            Algo::Diam | Algo::Meb => {
                let mut dc = DiameterConfig::new(cfg.d, cfg.delta, cfg.mode, cfg.seed);
                if let Some(eps) = cfg.eps {
                    dc.eps = eps;
                }
                dc.op_budget_per_update =
                    DiameterConfig::recommended_budget(cfg.d, cfg.n as u64, cfg.delta);
                Engine::Diam(DiameterState::new(dc))
            }
            Algo::KCenter => {
                let eps = cfg.eps.unwrap_or(0.2);
                let kc = KCenterConfig::new(
                    cfg.k, cfg.d, eps, cfg.delta, cfg.dmin, cfg.dmax, cfg.seed,
                );
                Engine::KC(KCenterState::new(kc))
            }
        }
    }

    fn rebuild_marker(&self) -> u64 {
        match self {
            Engine::Diam(st) => st.rebuild_count(),
            Engine::KC(st) => st.clustering_runs(),
        }
    }

    fn last_update_ops(&self) -> u64 {
        match self {
            Engine::Diam(st) => st.last_update_ops(),
            Engine::KC(st) => st.last_update_ops(),
        }
    }

    fn total_ops(&self) -> u64 {
        match self {
            Engine::Diam(st) => st.total_ops(),
            Engine::KC(st) => st.total_ops(),
        }
    }

    fn live_points(&self) -> PointSet<Real> {
        match self {
            Engine::Diam(st) => {
                let mut set = PointSet::new(st.centerpoint().map_or(0, |c| c.dim()).max(1));
                // dimension from any live point
                let mut iter = st.iter_live().peekable();
                if let Some(p) = iter.peek() {
                    set = PointSet::new(p.dim());
                }
                for p in iter {
                    set.insert(p.clone()).unwrap();
                }
                set
            }
            Engine::KC(st) => {
                let mut set = PointSet::new(st.points().dim());
                for p in st.points().iter() {
                    set.insert(p.clone()).unwrap();
                }
                set
            }
        }
    }

    fn view(&self) -> EngineView {
        match self {
            Engine::Diam(st) => diam_view(st),
            Engine::KC(st) => kcenter_view(st),
        }
    }
}

/// Internal-state view of the diameter engine for the randomness-adaptive
/// adversary.
pub fn diam_view(st: &DiameterState) -> EngineView {
    EngineView {
        centerpoint: st.centerpoint().cloned(),
        weak_cluster: None,
    }
}

/// Internal-state view of the k-center engine: the minimum-m cluster of the
/// answering guess, with its current inner-ball members.
pub fn kcenter_view(st: &KCenterState) -> EngineView {
    let mut view = EngineView::default();
    if let Some(g) = st.answer_index() {
        let guess = &st.guesses()[g];
        let inner = st.cfg().inner_radius(g);
        view.weak_cluster = guess.clusters().iter().min_by_key(|c| c.m).map(|c| {
            let ids: Vec<PointId> = c
                .members
                .iter()
                .copied()
                .filter(|&id| {
                    st.points()
                        .get(id)
                        .map_or(false, |p| dist(&c.center, p) <= inner)
                })
                .collect();
            (c.center.clone(), inner, ids)
        });
    }
    view
}

/// Replay `events` through an engine, answering queries and auditing them
/// against the exact oracles at the configured cadence.
pub fn run_stream(
    cfg: &ExperimentConfig,
    events: &[UpdateEvent],
) -> Result<ExperimentReport, RunError> {
    let mut engine = Engine::new(cfg);
    let mut report = ExperimentReport::default();
    let mut t = 0u64;
    for (idx, ev) in events.iter().enumerate() {
        apply_event(cfg, &mut engine, &mut report, &mut t, idx, ev, None)?;
    }
    Ok(report)
}

/// Generate `cfg.n` events with the configured adversary and replay them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let mut engine = Engine::new(cfg);
    let mut report = ExperimentReport::default();
    let mut adversary = Adversary::new(
        cfg.adversary,
        cfg.d,
        cfg.coord_scale,
        splitmix(cfg.seed ^ 0xadf0adf0adf0adf0),
    );
    let mut t = 0u64;
    let mut witnesses: Vec<Vec<Real>> = Vec::new();
    for idx in 0..cfg.n {
        let ev = if cfg.query_every > 0 && idx > 0 && idx % cfg.query_every == 0 {
            UpdateEvent::Query(cfg.algo.query_kind())
        } else {
            let view = if cfg.adversary == AdversaryKind::RandomnessAdaptive {
                engine.view()
            } else {
                EngineView::default()
            };
            adversary.next_event(&view)
        };
        apply_event(cfg, &mut engine, &mut report, &mut t, idx, &ev, Some(&mut witnesses))?;
        if matches!(ev, UpdateEvent::Query(_)) {
            adversary.observe_answer(witnesses.clone());
        }
    }
    Ok(report)
}

fn apply_event(
    cfg: &ExperimentConfig,
    engine: &mut Engine,
    report: &mut ExperimentReport,
    t: &mut u64,
    idx: usize,
    ev: &UpdateEvent,
    witnesses: Option<&mut Vec<Vec<Real>>>,
) -> Result<(), RunError> {
    *t += 1;
    let marker_before = engine.rebuild_marker();
    let mut answer = None;
    let mut oracle = None;
    let mut ratio = None;
    let op_name;
    match ev {
        UpdateEvent::Insert { id, coords } => {
            op_name = "insert".to_string();
            let p = Point::new(*id, coords.clone())
                .map_err(|e| RunError::Diam(idx, DiamError::Geom(e)))?;
            match engine {
                Engine::Diam(st) => st.insert(p).map_err(|e| RunError::Diam(idx, e))?,
                Engine::KC(st) => st.insert(p).map_err(|e| RunError::KCenter(idx, e))?,
            }
        }
        UpdateEvent::Delete { id } => {
            op_name = "delete".to_string();
            match engine {
                Engine::Diam(st) => st.delete(*id).map_err(|e| RunError::Diam(idx, e))?,
                Engine::KC(st) => st.delete(*id).map_err(|e| RunError::KCenter(idx, e))?,
            }
        }
        UpdateEvent::Query(kind) => {
            op_name = format!("query_{}", kind.as_str());
            report.queries += 1;
            let (ans, wits) = run_query(engine, *kind, idx)?;
            answer = Some(ans);
            if let Some(w) = witnesses {
                *w = wits;
            }
            let due = cfg.oracle_cadence > 0 && report.queries % cfg.oracle_cadence as u64 == 0;
            if due {
                if let Some((orc, ok)) = oracle_check(cfg, engine, *kind, ans) {
                    report.oracle_checks += 1;
                    oracle = Some(orc);
                    if orc > 0.0 {
                        ratio = Some(ans / orc);
                    }
                    if !ok {
                        report.violations += 1;
                    }
                }
            }
        }
    }
    let ops = engine.last_update_ops();
    if !matches!(ev, UpdateEvent::Query(_)) {
        report.max_update_ops = report.max_update_ops.max(ops);
    }
    report.rows.push(MetricsRow {
        t: *t,
        op: op_name,
        op_count: ops,
        answer,
        oracle,
        ratio,
        rebuild_flag: engine.rebuild_marker() > marker_before,
        seed: cfg.seed,
    });
    report.total_ops = engine.total_ops();
    if let Engine::Diam(st) = engine {
        report.rebuilds = st.rebuild_count();
        report.deadline_misses = st.deadline_misses();
    } else if let Engine::KC(st) = engine {
        report.rebuilds = st.clustering_runs();
    }
    Ok(())
}

fn run_query(
    engine: &mut Engine,
    kind: QueryKind,
    idx: usize,
) -> Result<(Real, Vec<Vec<Real>>), RunError> {
    match (engine, kind) {
        (Engine::Diam(st), QueryKind::Diam) | (Engine::Diam(st), QueryKind::Meb) => {
            if st.is_empty() {
                return Ok((0.0, Vec::new()));
            }
            let (v, wid) = st.query_witness().map_err(|e| RunError::Diam(idx, e))?;
            let wit = st
                .iter_live()
                .find(|p| p.id == wid)
                .map(|p| vec![p.coords.clone()])
                .unwrap_or_default();
            Ok((v, wit))
        }
        (Engine::KC(st), QueryKind::KCenter) => {
            let (centers, radius) = st
                .current_solution()
                .map_err(|e| RunError::KCenter(idx, e))?;
            Ok((radius, centers.into_iter().map(|c| c.coords).collect()))
        }
        _ => Err(RunError::Stream(StreamError::Malformed(
            idx + 1,
            "query kind does not match engine".to_string(),
        ))),
    }
}

/// Exact-oracle audit of one answer, when the instance fits the budgets.
/// Returns (oracle value, answer-in-valid-range).
fn oracle_check(
    _cfg: &ExperimentConfig,
    engine: &Engine,
    kind: QueryKind,
    answer: Real,
) -> Option<(Real, bool)> {
    let set = engine.live_points();
    if set.is_empty() {
        return None;
    }
    let budget = OracleBudget::default();
    match kind {
        QueryKind::Diam => {
            if set.len() > budget.max_points {
                return None;
            }
            let orc = brute_diameter(&set).ok()?;
            let ok = answer >= orc / 2.0 - 1e-9 && answer <= orc * (1.0 + 1e-9);
            Some((orc, ok))
        }
        QueryKind::Meb => {
            if set.len() > budget.max_points || set.dim() > budget.max_dim {
                return None;
            }
            let (_, r) = exact_meb(&set).ok()?;
            let ok = answer >= r * (1.0 - 1e-9) && answer <= 2.0 * r * (1.0 + 1e-9);
            Some((r, ok))
        }
        QueryKind::KCenter => {
            // unconditional coverage against the reported centers
            let Engine::KC(st) = engine else { return None };
            let (centers, radius) = st.current_solution().ok()?;
            let covered = set
                .iter()
                .all(|p| centers.iter().any(|c| dist(c, p) <= radius * (1.0 + 1e-9)));
            let n = set.len();
            let k = st.cfg().k;
            if !subsets_within(n, k, budget.max_kcenter_subsets) {
                return Some((Real::NAN, covered));
            }
            let (_, opt) = exact_kcenter(&set, k).ok()?;
            let bound = 4.0 * (1.0 + st.cfg().eps) * opt.max(st.cfg().dmin);
            let ok = covered && radius <= bound * (1.0 + 1e-9);
            Some((opt, ok))
        }
    }
}

fn subsets_within(n: usize, k: usize, cap: u64) -> bool {
    let mut total = 1u64;
    for i in 0..k.min(n) {
        total = total.saturating_mul((n - i) as u64) / (i as u64 + 1);
        if total > cap {
            return false;
        }
    }
    true
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}
