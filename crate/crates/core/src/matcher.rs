//! Greedy closed-area correspondence.
//!
//! Every non-background pair `(a_i, b_j)` first gets a tentative score
//! `PS = N * S` (shape similarity times area ratio). The best pair seeds the
//! search; each committed seed re-scores the pairs formed by its neighbors in
//! both keyframes using the relation term `R`, which rewards matching
//! seed-to-neighbor directions and agreeing depth order. The best re-scored
//! pair becomes the next seed, until one side runs out of regions.
//!
//! User pins are committed before anything else and act as seeds.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depth::DepthGraph;
use crate::error::{Error, Result};
use crate::eval::Assignment;
use crate::label::RegionGraph;
use crate::shape::{area_ratio, region_masks, scorer_by_name, shape_score, ShapeDescriptor, ShapeScorer, HU_MOMENTS};

/// Which cues drive the matcher.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Shape, connection and depth.
    #[serde(rename = "SCD")]
    Scd,
    /// Shape and connection; the depth term is held neutral.
    #[serde(rename = "SC")]
    Sc,
    /// Shape only: pairs are taken greedily by tentative score.
    #[serde(rename = "S")]
    S,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Scd, Mode::Sc, Mode::S];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Scd => "SCD",
            Mode::Sc => "SC",
            Mode::S => "S",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SCD" => Ok(Mode::Scd),
            "SC" => Ok(Mode::Sc),
            "S" => Ok(Mode::S),
            _ => Err(Error::Parameter(format!("unknown mode {s:?}, expected SCD, SC or S"))),
        }
    }
}

/// How the propagated score combines the tentative score with `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreRule {
    /// `PS * N * S * R`, i.e. `(N S)^2 R`.
    #[serde(rename = "LITERAL")]
    Literal,
    /// `N * S * R`.
    #[serde(rename = "SIMPLIFIED")]
    Simplified,
}

impl FromStr for ScoreRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LITERAL" => Ok(ScoreRule::Literal),
            "SIMPLIFIED" => Ok(ScoreRule::Simplified),
            _ => Err(Error::Parameter(format!(
                "unknown score rule {s:?}, expected LITERAL or SIMPLIFIED"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Angle constant `a` of the relation term, degrees.
    pub angle_const_a: f64,
    /// Situation constant `s` of the relation term.
    pub situation_const_s: f64,
    pub mode: Mode,
    pub score_rule: ScoreRule,
    pub shape_scorer: String,
    /// Log floor of the Hu-moment scorer.
    pub moment_floor: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            angle_const_a: 180.0,
            situation_const_s: 1.0,
            mode: Mode::Scd,
            score_rule: ScoreRule::Literal,
            shape_scorer: HU_MOMENTS.to_string(),
            moment_floor: 1e-4,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.angle_const_a.is_nan() || self.angle_const_a <= 0.0 {
            return Err(Error::Parameter(format!(
                "angle constant must be positive, got {}",
                self.angle_const_a
            )));
        }
        if self.situation_const_s.is_nan() || self.situation_const_s <= 0.0 {
            return Err(Error::Parameter(format!(
                "situation constant must be positive, got {}",
                self.situation_const_s
            )));
        }
        scorer_by_name(&self.shape_scorer, self.moment_floor).map(|_| ())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionPair {
    pub a: u32,
    pub b: u32,
}

/// A user-asserted correspondence the matcher must keep.
pub type Pin = RegionPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Auto,
    Pinned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub a: u32,
    pub b: u32,
    pub provenance: Provenance,
    /// Latest propagated score, or the tentative score for pairs no seed
    /// ever re-scored.
    pub score: f64,
    /// Tentative score `N * S`, in [0, 1].
    pub shape_score: f64,
}

/// One-to-one pairing of the character regions of two keyframes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    /// In commit order.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_a: Vec<u32>,
    pub unmatched_b: Vec<u32>,
    /// Backgrounds are paired with each other, outside the matching.
    pub background: Option<RegionPair>,
    /// Pairs in the order they were committed and used as seeds.
    pub seed_history: Vec<RegionPair>,
    pub mode: Mode,
    pub config: MatchConfig,
}

impl Correspondence {
    pub fn partner_of_a(&self, a: u32) -> Option<u32> {
        if let Some(bg) = self.background {
            if bg.a == a {
                return Some(bg.b);
            }
        }
        self.pairs.iter().find(|p| p.a == a).map(|p| p.b)
    }

    pub fn partner_of_b(&self, b: u32) -> Option<u32> {
        if let Some(bg) = self.background {
            if bg.b == b {
                return Some(bg.a);
            }
        }
        self.pairs.iter().find(|p| p.b == b).map(|p| p.a)
    }

    /// Character pairs only, without provenance.
    pub fn assignment(&self) -> Assignment {
        Assignment::from_pairs(self.pairs.iter().map(|p| (p.a, p.b)))
            .expect("matcher output is one-to-one")
    }

    /// Same pairing with the keyframe roles exchanged.
    pub fn inverse(&self) -> Correspondence {
        let swap = |p: &RegionPair| RegionPair { a: p.b, b: p.a };
        Correspondence {
            pairs: self
                .pairs
                .iter()
                .map(|p| MatchedPair {
                    a: p.b,
                    b: p.a,
                    ..p.clone()
                })
                .collect(),
            unmatched_a: self.unmatched_b.clone(),
            unmatched_b: self.unmatched_a.clone(),
            background: self.background.as_ref().map(swap),
            seed_history: self.seed_history.iter().map(swap).collect(),
            mode: self.mode,
            config: self.config.clone(),
        }
    }
}

/// Matcher view of one keyframe: character regions with their descriptors,
/// neighbor directions and depth ranks.
#[derive(Clone, Debug)]
pub struct MatchFrame {
    ids: Vec<u32>,
    areas: Vec<u32>,
    descriptors: Vec<ShapeDescriptor>,
    /// Per region: (neighbor index, direction in degrees).
    neighbors: Vec<Vec<(usize, f64)>>,
    depth: DepthGraph,
    background: Option<u32>,
}

impl MatchFrame {
    pub fn new(graph: &RegionGraph, depth: &DepthGraph, scorer: &dyn ShapeScorer) -> Self {
        let ids = graph.character_ids();
        let index_of = |id: u32| ids.binary_search(&id).ok();
        let masks = region_masks(graph);
        let mut areas = Vec::with_capacity(ids.len());
        let mut descriptors = Vec::with_capacity(ids.len());
        let mut neighbors = Vec::with_capacity(ids.len());
        for &id in &ids {
            let region = graph.region(id).expect("character id is a region");
            areas.push(region.area);
            descriptors.push(scorer.describe(&masks[&id]));
            neighbors.push(
                region
                    .neighbors
                    .iter()
                    .filter_map(|n| index_of(n.id).map(|k| (k, n.angle)))
                    .collect(),
            );
        }
        Self {
            ids,
            areas,
            descriptors,
            neighbors,
            depth: depth.clone(),
            background: graph.background(),
        }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn depth(&self) -> &DepthGraph {
        &self.depth
    }

    fn index_of(&self, id: u32) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }
}

/// Tentative and propagated scores over all character pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreState {
    a_ids: Vec<u32>,
    b_ids: Vec<u32>,
    ps: Vec<f64>,
    score: Vec<f64>,
    updated: Vec<bool>,
    seed_history: Vec<RegionPair>,
}

impl ScoreState {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.b_ids.len() + j
    }

    pub fn a_ids(&self) -> &[u32] {
        &self.a_ids
    }

    pub fn b_ids(&self) -> &[u32] {
        &self.b_ids
    }

    fn lookup(&self, a: u32, b: u32) -> Option<usize> {
        let i = self.a_ids.binary_search(&a).ok()?;
        let j = self.b_ids.binary_search(&b).ok()?;
        Some(self.idx(i, j))
    }

    /// Tentative score `N * S` of a pair of region ids.
    pub fn ps(&self, a: u32, b: u32) -> Option<f64> {
        self.lookup(a, b).map(|k| self.ps[k])
    }

    /// Propagated score, if some seed updated this pair.
    pub fn score(&self, a: u32, b: u32) -> Option<f64> {
        self.lookup(a, b).filter(|&k| self.updated[k]).map(|k| self.score[k])
    }

    /// Max tentative score of `a` over all regions of the other keyframe.
    pub fn seed_score(&self, a: u32) -> Option<f64> {
        let i = self.a_ids.binary_search(&a).ok()?;
        (0..self.b_ids.len())
            .map(|j| self.ps[self.idx(i, j)])
            .max_by(f64::total_cmp)
    }

    pub fn seed_history(&self) -> &[RegionPair] {
        &self.seed_history
    }
}

/// Tentative scores for every character pair plus the first seed: the
/// global argmax, ties broken by larger smaller-area, then smaller ids.
pub fn seed_scores(a: &MatchFrame, b: &MatchFrame, scorer: &dyn ShapeScorer) -> Result<(ScoreState, RegionPair)> {
    if a.is_empty() {
        return Err(Error::NoRegions("A"));
    }
    if b.is_empty() {
        return Err(Error::NoRegions("B"));
    }
    let (n, m) = (a.len(), b.len());
    let mut ps = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            let value = shape_score(scorer, &a.descriptors[i], &b.descriptors[j])
                * area_ratio(a.areas[i], b.areas[j]);
            ps.push(value.clamp(0.0, 1.0));
        }
    }
    let state = ScoreState {
        a_ids: a.ids.clone(),
        b_ids: b.ids.clone(),
        ps,
        score: vec![0.0; n * m],
        updated: vec![false; n * m],
        seed_history: Vec::new(),
    };
    let (i, j) = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .max_by(|&p, &q| {
            state.ps[state.idx(p.0, p.1)]
                .total_cmp(&state.ps[state.idx(q.0, q.1)])
                .then_with(|| tie_order(a, b, p, q))
        })
        .expect("both frames are non-empty");
    let first = RegionPair {
        a: a.ids[i],
        b: b.ids[j],
    };
    Ok((state, first))
}

/// Tie order between candidate pairs: `Greater` means `p` is preferred.
fn tie_order(a: &MatchFrame, b: &MatchFrame, p: (usize, usize), q: (usize, usize)) -> Ordering {
    let min_area = |(i, j): (usize, usize)| a.areas[i].min(b.areas[j]);
    min_area(p)
        .cmp(&min_area(q))
        .then(q.0.cmp(&p.0))
        .then(q.1.cmp(&p.1))
}

/// Angular distance between two directions, degrees in [0, 180].
pub fn angle_def(theta_a: f64, theta_b: f64) -> f64 {
    let d = (theta_a - theta_b).abs().rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Relation term `(1 + ((a - AngleDef)/a)^2) (1 + Situation/s)`.
pub fn relation(angle_def: f64, situation: bool, cfg: &MatchConfig) -> f64 {
    let a = cfg.angle_const_a;
    let angular = 1.0 + ((a - angle_def) / a).powi(2);
    let sit = if situation { 1.0 } else { 0.0 };
    angular * (1.0 + sit / cfg.situation_const_s)
}

/// Whether the seed-to-neighbor depth order agrees across keyframes.
pub fn situation(depth_a: &DepthGraph, seed_a: u32, a_i: u32, depth_b: &DepthGraph, seed_b: u32, b_j: u32) -> bool {
    depth_a.relative_depth(seed_a, a_i) == depth_b.relative_depth(seed_b, b_j)
}

/// Propagated score of a pair from its tentative score and relation term.
pub fn pair_score(ps: f64, relation: f64, rule: ScoreRule) -> f64 {
    match rule {
        ScoreRule::Literal => ps * ps * relation,
        ScoreRule::Simplified => ps * relation,
    }
}

/// Result of one matcher run.
#[derive(Clone, Debug)]
pub struct MatchOutcome {
    pub correspondence: Correspondence,
    pub state: ScoreState,
}

/// Both keyframes prepared for matching, with tentative scores cached so
/// that re-running with different pins is cheap.
#[derive(Debug)]
pub struct Matcher {
    a: MatchFrame,
    b: MatchFrame,
    cfg: MatchConfig,
    base: ScoreState,
    first_seed: RegionPair,
}

impl Matcher {
    pub fn new(a: &RegionGraph, depth_a: &DepthGraph, b: &RegionGraph, depth_b: &DepthGraph, cfg: MatchConfig) -> Result<Self> {
        cfg.validate()?;
        let scorer = scorer_by_name(&cfg.shape_scorer, cfg.moment_floor)?;
        let a = MatchFrame::new(a, depth_a, scorer.as_ref());
        let b = MatchFrame::new(b, depth_b, scorer.as_ref());
        let (base, first_seed) = seed_scores(&a, &b, scorer.as_ref())?;
        Ok(Self {
            a,
            b,
            cfg,
            base,
            first_seed,
        })
    }

    pub fn config(&self) -> &MatchConfig {
        &self.cfg
    }

    pub fn frame_a(&self) -> &MatchFrame {
        &self.a
    }

    pub fn frame_b(&self) -> &MatchFrame {
        &self.b
    }

    pub fn tentative_scores(&self) -> &ScoreState {
        &self.base
    }

    pub fn first_seed(&self) -> RegionPair {
        self.first_seed
    }

    /// Checks ids and one-to-one-ness of the pins, returning their indices.
    pub fn validate_pins(&self, pins: &[Pin]) -> Result<Vec<(usize, usize)>> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(pins.len());
        for pin in pins {
            let i = self.a.index_of(pin.a).ok_or_else(|| {
                if self.a.background == Some(pin.a) {
                    Error::PinConflict(format!("region {} is the background of A", pin.a))
                } else {
                    Error::UnknownRegion { frame: "A", id: pin.a }
                }
            })?;
            let j = self.b.index_of(pin.b).ok_or_else(|| {
                if self.b.background == Some(pin.b) {
                    Error::PinConflict(format!("region {} is the background of B", pin.b))
                } else {
                    Error::UnknownRegion { frame: "B", id: pin.b }
                }
            })?;
            if out.iter().any(|&(pi, _)| pi == i) {
                return Err(Error::PinConflict(format!("region {} of A is pinned twice", pin.a)));
            }
            if out.iter().any(|&(_, pj)| pj == j) {
                return Err(Error::PinConflict(format!("region {} of B is pinned twice", pin.b)));
            }
            out.push((i, j));
        }
        Ok(out)
    }

    /// Runs the greedy matcher with `pins` committed first.
    pub fn run(&self, pins: &[Pin]) -> Result<MatchOutcome> {
        let pins = self.validate_pins(pins)?;
        let mut run = Run::new(self);
        for &(i, j) in &pins {
            run.commit(i, j, Provenance::Pinned);
            if self.cfg.mode != Mode::S {
                run.propagate(i, j, false);
            }
        }
        if self.cfg.mode == Mode::S {
            run.assign_by_tentative_score();
        } else {
            if pins.is_empty() {
                let i = self.a.index_of(self.first_seed.a).expect("seed in A");
                let j = self.b.index_of(self.first_seed.b).expect("seed in B");
                run.commit(i, j, Provenance::Auto);
                run.propagate(i, j, false);
            }
            while let Some((i, j)) = run.next_seed() {
                run.commit(i, j, Provenance::Auto);
                run.propagate(i, j, false);
            }
            run.swap_pass();
        }
        Ok(run.finish())
    }
}

/// Convenience wrapper: prepare both frames and run once.
pub fn greedy_match(
    a: &RegionGraph,
    depth_a: &DepthGraph,
    b: &RegionGraph,
    depth_b: &DepthGraph,
    cfg: &MatchConfig,
    pins: &[Pin],
) -> Result<MatchOutcome> {
    Matcher::new(a, depth_a, b, depth_b, cfg.clone())?.run(pins)
}

/// Re-runs the matcher after a correction. Pinned pairs are kept verbatim;
/// automatic pairs may change.
pub fn rematch_with_pins(matcher: &Matcher, pins: &[Pin]) -> Result<MatchOutcome> {
    matcher.run(pins)
}

struct Run<'m> {
    m: &'m Matcher,
    state: ScoreState,
    used_a: Vec<bool>,
    used_b: Vec<bool>,
    open_a: usize,
    open_b: usize,
    pairs: Vec<(usize, usize, Provenance)>,
}

impl<'m> Run<'m> {
    fn new(m: &'m Matcher) -> Self {
        Self {
            m,
            state: m.base.clone(),
            used_a: vec![false; m.a.len()],
            used_b: vec![false; m.b.len()],
            open_a: m.a.len(),
            open_b: m.b.len(),
            pairs: Vec::new(),
        }
    }

    fn commit(&mut self, i: usize, j: usize, provenance: Provenance) {
        debug_assert!(!self.used_a[i] && !self.used_b[j]);
        self.used_a[i] = true;
        self.used_b[j] = true;
        self.open_a -= 1;
        self.open_b -= 1;
        self.pairs.push((i, j, provenance));
        self.state.seed_history.push(RegionPair {
            a: self.m.a.ids[i],
            b: self.m.b.ids[j],
        });
    }

    /// Re-scores neighbor pairs of the seed `(si, sj)`. The main loop only
    /// touches uncommitted pairs; the swap pass refreshes all of them.
    fn propagate(&mut self, si: usize, sj: usize, include_committed: bool) {
        let (a, b, cfg) = (&self.m.a, &self.m.b, &self.m.cfg);
        for &(ai, theta_a) in &a.neighbors[si] {
            if self.used_a[ai] && !include_committed {
                continue;
            }
            for &(bj, theta_b) in &b.neighbors[sj] {
                if self.used_b[bj] && !include_committed {
                    continue;
                }
                let agree = match cfg.mode {
                    Mode::Scd => situation(&a.depth, a.ids[si], a.ids[ai], &b.depth, b.ids[sj], b.ids[bj]),
                    Mode::Sc | Mode::S => true,
                };
                let r = relation(angle_def(theta_a, theta_b), agree, cfg);
                let k = self.state.idx(ai, bj);
                self.state.score[k] = pair_score(self.state.ps[k], r, cfg.score_rule);
                self.state.updated[k] = true;
            }
        }
    }

    /// Best re-scored open pair, else the best open pair by tentative score.
    fn next_seed(&self) -> Option<(usize, usize)> {
        if self.open_a == 0 || self.open_b == 0 {
            return None;
        }
        let open = || {
            (0..self.m.a.len())
                .filter(|&i| !self.used_a[i])
                .flat_map(|i| (0..self.m.b.len()).map(move |j| (i, j)))
                .filter(|&(_, j)| !self.used_b[j])
        };
        let st = &self.state;
        let by_score = |p: &(usize, usize), q: &(usize, usize)| {
            let (kp, kq) = (st.idx(p.0, p.1), st.idx(q.0, q.1));
            st.score[kp]
                .total_cmp(&st.score[kq])
                .then(st.ps[kp].total_cmp(&st.ps[kq]))
                .then_with(|| tie_order(&self.m.a, &self.m.b, *p, *q))
        };
        let by_ps = |p: &(usize, usize), q: &(usize, usize)| {
            st.ps[st.idx(p.0, p.1)]
                .total_cmp(&st.ps[st.idx(q.0, q.1)])
                .then_with(|| tie_order(&self.m.a, &self.m.b, *p, *q))
        };
        open()
            .filter(|&(i, j)| st.updated[st.idx(i, j)])
            .max_by(by_score)
            .or_else(|| open().max_by(by_ps))
    }

    fn assign_by_tentative_score(&mut self) {
        let (n, m) = (self.m.a.len(), self.m.b.len());
        let mut order: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
        let st = &self.state;
        order.sort_by(|p, q| {
            st.ps[st.idx(q.0, q.1)]
                .total_cmp(&st.ps[st.idx(p.0, p.1)])
                .then_with(|| tie_order(&self.m.a, &self.m.b, *q, *p))
        });
        for (i, j) in order {
            if self.open_a == 0 || self.open_b == 0 {
                break;
            }
            if !self.used_a[i] && !self.used_b[j] {
                self.commit(i, j, Provenance::Auto);
            }
        }
    }

    /// Refreshes scores around every seed with the keyframe roles exchanged.
    /// The relation term is symmetric in the two keyframes, so this only
    /// brings every committed pair's score up to date; pairings stay fixed.
    fn swap_pass(&mut self) {
        let seeds: Vec<(usize, usize)> = self.pairs.iter().map(|&(i, j, _)| (i, j)).collect();
        for (i, j) in seeds {
            self.propagate(i, j, true);
        }
    }

    fn finish(self) -> MatchOutcome {
        let (a, b) = (&self.m.a, &self.m.b);
        let st = &self.state;
        let pairs = self
            .pairs
            .iter()
            .map(|&(i, j, provenance)| {
                let k = st.idx(i, j);
                MatchedPair {
                    a: a.ids[i],
                    b: b.ids[j],
                    provenance,
                    score: if st.updated[k] { st.score[k] } else { st.ps[k] },
                    shape_score: st.ps[k],
                }
            })
            .collect();
        let background = match (a.background, b.background) {
            (Some(a), Some(b)) => Some(RegionPair { a, b }),
            _ => None,
        };
        let correspondence = Correspondence {
            pairs,
            unmatched_a: (0..a.len()).filter(|&i| !self.used_a[i]).map(|i| a.ids[i]).collect(),
            unmatched_b: (0..b.len()).filter(|&j| !self.used_b[j]).map(|j| b.ids[j]).collect(),
            background,
            seed_history: st.seed_history.clone(),
            mode: self.m.cfg.mode,
            config: self.m.cfg.clone(),
        };
        MatchOutcome {
            correspondence,
            state: self.state,
        }
    }
}
