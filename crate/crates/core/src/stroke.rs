//! Strokes between closed areas and their correspondence.
//!
//! A stroke is the chain of ink pixels whose 3x3 owner window sees exactly
//! two regions. Each chain is ordered end to end, cut at junctions, and
//! matched across keyframes through the region correspondence: a stroke
//! separating `(a1, a2)` pairs with the stroke separating their partners.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::depth::Junction;
use crate::error::{Error, Result};
use crate::label::{neighbors8, palette_color, window_owners, RegionGraph, INK};
use crate::matcher::Correspondence;

/// How a stroke ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "junction", rename_all = "lowercase")]
pub enum Endpoint {
    Junction(usize),
    Open,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub id: u32,
    /// `[x, y]` pixel centres; consecutive points are 8-neighbors.
    pub polyline: Vec<[u32; 2]>,
    /// The two separated regions, smaller id first.
    pub region_pair: (u32, u32),
    pub endpoints: [Endpoint; 2],
    /// Every boundary pixel attributed to this stroke.
    #[serde(skip)]
    pub pixels: Vec<[u32; 2]>,
}

impl Stroke {
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.polyline.iter().map(|p| [p[0] as f64, p[1] as f64]).collect()
    }

    pub fn arc_length(&self) -> f64 {
        arc_length(&self.points())
    }

    /// Direction of the first-to-last chord in degrees, [0, 180).
    pub fn chord_angle(&self) -> f64 {
        let (p, q) = (self.polyline[0], self.polyline[self.polyline.len() - 1]);
        let dx = q[0] as f64 - p[0] as f64;
        let dy = q[1] as f64 - p[1] as f64;
        dy.atan2(dx).to_degrees().rem_euclid(180.0)
    }

    pub fn midpoint(&self) -> [f64; 2] {
        let pts = self.points();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
        [sx / n, sy / n]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrokeDiagnostics {
    /// Ink components touching a single region, e.g. a stray scribble
    /// inside one area. They separate nothing and produce no stroke.
    pub isolated_scribbles: usize,
    /// Boundary pixels dropped because their chain had fewer than two
    /// ordered points.
    pub dropped_pixels: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrokeSet {
    pub strokes: Vec<Stroke>,
    pub diagnostics: StrokeDiagnostics,
}

impl StrokeSet {
    pub fn ids(&self) -> Vec<u32> {
        self.strokes.iter().map(|s| s.id).collect()
    }

    pub fn get(&self, id: u32) -> Option<&Stroke> {
        self.strokes.iter().find(|s| s.id == id)
    }
}

/// Junction proximity, in pixels, at which an interior chain point is cut.
const JUNCTION_CUT_DISTANCE: f64 = 2.0;
/// A chain is treated as closed when its end-to-end path leaves more than
/// this share of its pixels farther than 2 px away.
const LOOP_COVERAGE: f64 = 0.9;

/// Boundary strokes of a labeled keyframe.
pub fn extract_strokes(graph: &RegionGraph, junctions: &[Junction]) -> StrokeSet {
    let lm = graph.label_map();
    let (w, h) = (lm.width(), lm.height());
    let owners = graph.ink_owners();

    let mut groups: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            if lm.get(x, y) != INK {
                continue;
            }
            let seen = window_owners(owners, w, h, x, y, 1);
            if let [r, s] = seen[..] {
                groups.entry((r, s)).or_default().push(y as usize * w as usize + x as usize);
            }
        }
    }

    let mut diagnostics = StrokeDiagnostics {
        isolated_scribbles: count_isolated_scribbles(graph),
        dropped_pixels: 0,
    };
    let mut pieces: Vec<Stroke> = Vec::new();
    for (pair, pixels) in groups {
        for chain in connected_chains(&pixels, w as usize, h as usize) {
            let grid = ChainGrid::new(&chain, w as usize);
            let path = grid.ordered_path();
            if path.len() < 2 {
                diagnostics.dropped_pixels += chain.len();
                continue;
            }
            for (polyline, pixels) in split_at_junctions(&grid, path, junctions) {
                if polyline.len() < 2 {
                    diagnostics.dropped_pixels += pixels.len();
                    continue;
                }
                let endpoints = [
                    endpoint_at(polyline[0], junctions),
                    endpoint_at(polyline[polyline.len() - 1], junctions),
                ];
                pieces.push(Stroke {
                    id: 0,
                    polyline,
                    region_pair: pair,
                    endpoints,
                    pixels,
                });
            }
        }
    }
    pieces.sort_by_key(|s| (s.region_pair, s.polyline[0][1], s.polyline[0][0]));
    for (k, s) in pieces.iter_mut().enumerate() {
        s.id = k as u32 + 1;
    }
    StrokeSet {
        strokes: pieces,
        diagnostics,
    }
}

/// 8-connected components of the given pixel indices, each sorted.
fn connected_chains(pixels: &[usize], w: usize, h: usize) -> Vec<Vec<usize>> {
    let mut member: BTreeMap<usize, bool> = pixels.iter().map(|&p| (p, false)).collect();
    let mut out = Vec::new();
    for &start in pixels {
        if member[&start] {
            continue;
        }
        member.insert(start, true);
        let mut chain = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in neighbors8(p, w, h) {
                if let Some(seen) = member.get_mut(&q) {
                    if !*seen {
                        *seen = true;
                        chain.push(q);
                        queue.push_back(q);
                    }
                }
            }
        }
        chain.sort_unstable();
        out.push(chain);
    }
    out
}

/// One chain rasterized into its own bounding box.
struct ChainGrid {
    x0: usize,
    y0: usize,
    gw: usize,
    gh: usize,
    inside: Vec<bool>,
    /// Local indices of chain pixels, raster order.
    cells: Vec<usize>,
}

impl ChainGrid {
    fn new(chain: &[usize], w: usize) -> Self {
        let xs = chain.iter().map(|p| p % w);
        let (x0, x1) = (xs.clone().min().unwrap(), xs.max().unwrap());
        let ys = chain.iter().map(|p| p / w);
        let (y0, y1) = (ys.clone().min().unwrap(), ys.max().unwrap());
        let (gw, gh) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut inside = vec![false; gw * gh];
        let mut cells: Vec<usize> = chain
            .iter()
            .map(|p| (p / w - y0) * gw + (p % w - x0))
            .collect();
        cells.sort_unstable();
        for &c in &cells {
            inside[c] = true;
        }
        Self {
            x0,
            y0,
            gw,
            gh,
            inside,
            cells,
        }
    }

    fn global(&self, c: usize) -> [u32; 2] {
        [(self.x0 + c % self.gw) as u32, (self.y0 + c / self.gw) as u32]
    }

    /// BFS distances and parents from `sources`, restricted to `allowed`.
    fn bfs(&self, sources: &[usize], allowed: &[bool]) -> (Vec<u32>, Vec<usize>) {
        let mut dist = vec![u32::MAX; self.inside.len()];
        let mut parent = vec![usize::MAX; self.inside.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(p) = queue.pop_front() {
            for q in neighbors8(p, self.gw, self.gh) {
                if allowed[q] && dist[q] == u32::MAX {
                    dist[q] = dist[p] + 1;
                    parent[q] = p;
                    queue.push_back(q);
                }
            }
        }
        (dist, parent)
    }

    /// Farthest reachable cell; ties go to the first in raster order.
    fn farthest(&self, dist: &[u32]) -> usize {
        let mut best = usize::MAX;
        for (c, &d) in dist.iter().enumerate() {
            if d != u32::MAX && (best == usize::MAX || d > dist[best]) {
                best = c;
            }
        }
        best
    }

    fn trace(parent: &[usize], to: usize) -> Vec<usize> {
        let mut path = vec![to];
        let mut cur = to;
        while parent[cur] != usize::MAX {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Longest shortest path within `allowed`, starting from `seed`'s component.
    fn diameter_path(&self, seed: usize, allowed: &[bool]) -> Vec<usize> {
        let (d0, _) = self.bfs(&[seed], allowed);
        let u = self.farthest(&d0);
        let (d1, parent) = self.bfs(&[u], allowed);
        let v = self.farthest(&d1);
        Self::trace(&parent, v)
    }

    /// End-to-end ordering of the chain as a chain of 8-neighbors. Open
    /// chains start at the end with the smaller `(y, x)`; closed loops start
    /// and end at their smallest `(y, x)` pixel.
    fn ordered_path(&self) -> Vec<usize> {
        let path = self.diameter_path(self.cells[0], &self.inside);
        if self.near_path_fraction(&path) < LOOP_COVERAGE {
            if let Some(lp) = self.loop_path() {
                return lp;
            }
        }
        let (first, last) = (path[0], path[path.len() - 1]);
        // Local raster order equals global (y, x) order.
        if last < first {
            path.into_iter().rev().collect()
        } else {
            path
        }
    }

    fn near_path_fraction(&self, path: &[usize]) -> f64 {
        let mut near = vec![false; self.inside.len()];
        for &c in path {
            let (x, y) = ((c % self.gw) as i64, (c / self.gw) as i64);
            for dy in -2..=2 {
                for dx in -2..=2 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < self.gw && (ny as usize) < self.gh {
                        near[ny as usize * self.gw + nx as usize] = true;
                    }
                }
            }
        }
        let covered = self.cells.iter().filter(|&&c| near[c]).count();
        covered as f64 / self.cells.len() as f64
    }

    /// Cuts a small block out at the smallest pixel, orders the remaining
    /// arc, and closes it through the cut.
    fn loop_path(&self) -> Option<Vec<usize>> {
        let start = self.cells[0];
        let (sx, sy) = ((start % self.gw) as i64, (start / self.gw) as i64);
        let mut rest = self.inside.clone();
        for &c in &self.cells {
            let (x, y) = ((c % self.gw) as i64, (c / self.gw) as i64);
            if (x - sx).abs() <= 2 && (y - sy).abs() <= 2 {
                rest[c] = false;
            }
        }
        let seed = self.cells.iter().copied().find(|&c| rest[c])?;
        let arc = self.diameter_path(seed, &rest);
        if arc.len() < 2 {
            return None;
        }
        let (_, from_start) = self.bfs(&[start], &self.inside);
        let lead = Self::trace(&from_start, arc[0]);
        let tail = Self::trace(&from_start, arc[arc.len() - 1]);
        let mut path = lead;
        path.extend_from_slice(&arc[1..]);
        path.extend(tail.into_iter().rev().skip(1));
        Some(path)
    }
}

/// Cuts an ordered path at interior points that sit on a junction, and
/// attributes every chain pixel to the piece of its nearest path point.
/// A polyline and the pixels attributed to it.
type Piece = (Vec<[u32; 2]>, Vec<[u32; 2]>);

fn split_at_junctions(grid: &ChainGrid, path: Vec<usize>, junctions: &[Junction]) -> Vec<Piece> {
    let near_junction = |c: usize| {
        let [x, y] = grid.global(c);
        junctions.iter().any(|j| {
            let (dx, dy) = (x as f64 - j.position[0], y as f64 - j.position[1]);
            (dx * dx + dy * dy).sqrt() <= JUNCTION_CUT_DISTANCE
        })
    };
    // piece[k] = index of the piece path point k belongs to; cut points end
    // one piece and start the next.
    let mut piece_of_point = vec![0usize; path.len()];
    let mut bounds = vec![(0usize, 0usize)];
    for k in 1..path.len() {
        piece_of_point[k] = bounds.len() - 1;
        bounds.last_mut().unwrap().1 = k;
        if k + 1 < path.len() && near_junction(path[k]) && !near_junction(path[k - 1]) {
            bounds.push((k, k));
        }
    }

    // Nearest path point per chain pixel, by BFS from the whole path.
    let mut owner = vec![usize::MAX; grid.inside.len()];
    let mut queue = VecDeque::new();
    for (k, &c) in path.iter().enumerate() {
        if owner[c] == usize::MAX {
            owner[c] = k;
            queue.push_back(c);
        }
    }
    while let Some(p) = queue.pop_front() {
        for q in neighbors8(p, grid.gw, grid.gh) {
            if grid.inside[q] && owner[q] == usize::MAX {
                owner[q] = owner[p];
                queue.push_back(q);
            }
        }
    }

    let mut out: Vec<Piece> = bounds
        .iter()
        .map(|&(s, e)| (path[s..=e].iter().map(|&c| grid.global(c)).collect(), Vec::new()))
        .collect();
    for &c in &grid.cells {
        let k = owner[c];
        if k != usize::MAX {
            out[piece_of_point[k]].1.push(grid.global(c));
        }
    }
    out
}

fn endpoint_at(p: [u32; 2], junctions: &[Junction]) -> Endpoint {
    junctions
        .iter()
        .map(|j| {
            let (dx, dy) = (p[0] as f64 - j.position[0], p[1] as f64 - j.position[1]);
            (j, (dx * dx + dy * dy).sqrt())
        })
        .filter(|(j, d)| *d <= j.radius + JUNCTION_CUT_DISTANCE)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.id.cmp(&b.0.id)))
        .map_or(Endpoint::Open, |(j, _)| Endpoint::Junction(j.id))
}

/// Ink components (8-connected) that border exactly one region.
fn count_isolated_scribbles(graph: &RegionGraph) -> usize {
    let lm = graph.label_map();
    let (w, h) = (lm.width() as usize, lm.height() as usize);
    let labels = lm.labels();
    let mut seen = vec![false; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if labels[start] != INK || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut touching: Vec<u32> = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in neighbors8(p, w, h) {
                let l = labels[q];
                if l == INK {
                    if !seen[q] {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                } else if !touching.contains(&l) {
                    touching.push(l);
                }
            }
        }
        if touching.len() == 1 {
            count += 1;
        }
    }
    count
}

/// Matched strokes with vertices resampled to a common count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrokePair {
    pub stroke_a: u32,
    pub stroke_b: u32,
    pub vertices_a: Vec<[f64; 2]>,
    pub vertices_b: Vec<[f64; 2]>,
    /// Weakest shape score among the region pairs behind this match; the
    /// background pairing counts as certain.
    pub confidence: f64,
    /// Whether B's polyline was reversed to align with A's.
    pub reversed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrokeMatching {
    pub pairs: Vec<StrokePair>,
    pub unmatched_a: Vec<u32>,
    pub unmatched_b: Vec<u32>,
}

impl StrokeMatching {
    /// Stroke id pairs, A first.
    pub fn id_pairs(&self) -> Vec<(u32, u32)> {
        self.pairs.iter().map(|p| (p.stroke_a, p.stroke_b)).collect()
    }
}

/// Resampling spacing for stroke pairs, pixels.
pub const VERTEX_SPACING: f64 = 2.0;

/// Pairs strokes whose separated regions correspond. Several chains with
/// the same region pair are matched greedily by arc-length ratio, then
/// chord direction, then midpoint distance.
pub fn match_strokes(a: &StrokeSet, b: &StrokeSet, corr: &Correspondence) -> StrokeMatching {
    let mut by_pair_b: BTreeMap<(u32, u32), Vec<&Stroke>> = BTreeMap::new();
    for s in &b.strokes {
        by_pair_b.entry(s.region_pair).or_default().push(s);
    }
    let mut by_pair_a: BTreeMap<(u32, u32), Vec<&Stroke>> = BTreeMap::new();
    for s in &a.strokes {
        by_pair_a.entry(s.region_pair).or_default().push(s);
    }
    let confidence_of = |r: u32, s: u32| {
        let score = |x: u32| {
            if corr.background.is_some_and(|bg| bg.a == x) {
                1.0
            } else {
                corr.pairs
                    .iter()
                    .find(|p| p.a == x)
                    .map_or(0.0, |p| p.shape_score)
            }
        };
        score(r).min(score(s))
    };

    let mut pairs = Vec::new();
    let mut used_a = Vec::new();
    let mut used_b = Vec::new();
    for (&(r, s), group_a) in &by_pair_a {
        let (Some(pr), Some(ps)) = (corr.partner_of_a(r), corr.partner_of_a(s)) else {
            continue;
        };
        let key = (pr.min(ps), pr.max(ps));
        let Some(group_b) = by_pair_b.get(&key) else {
            continue;
        };
        let mut cands: Vec<(f64, f64, f64, u32, u32)> = Vec::new();
        for sa in group_a {
            for sb in group_b {
                cands.push((
                    length_ratio(sa.arc_length(), sb.arc_length()),
                    chord_difference(sa.chord_angle(), sb.chord_angle()),
                    distance(sa.midpoint(), sb.midpoint()),
                    sa.id,
                    sb.id,
                ));
            }
        }
        cands.sort_by(|x, y| {
            y.0.total_cmp(&x.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.total_cmp(&y.2))
                .then(x.3.cmp(&y.3))
                .then(x.4.cmp(&y.4))
        });
        for (_, _, _, ia, ib) in cands {
            if used_a.contains(&ia) || used_b.contains(&ib) {
                continue;
            }
            used_a.push(ia);
            used_b.push(ib);
            let (sa, sb) = (a.get(ia).unwrap(), b.get(ib).unwrap());
            pairs.push(align_pair(sa, sb, confidence_of(r, s)));
        }
    }
    pairs.sort_by_key(|p| (p.stroke_a, p.stroke_b));
    StrokeMatching {
        pairs,
        unmatched_a: a.ids().into_iter().filter(|id| !used_a.contains(id)).collect(),
        unmatched_b: b.ids().into_iter().filter(|id| !used_b.contains(id)).collect(),
    }
}

fn length_ratio(x: f64, y: f64) -> f64 {
    if x.max(y) == 0.0 {
        1.0
    } else {
        x.min(y) / x.max(y)
    }
}

fn chord_difference(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(180.0);
    d.min(180.0 - d)
}

fn distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn align_pair(sa: &Stroke, sb: &Stroke, confidence: f64) -> StrokePair {
    let (pa, pb) = (sa.points(), sb.points());
    let longest = arc_length(&pa).max(arc_length(&pb));
    let count = ((longest / VERTEX_SPACING).ceil() as usize + 1).max(2);
    let va = resample(&pa, count).expect("count >= 2");
    let vb = resample(&pb, count).expect("count >= 2");
    let travel = |v: &[[f64; 2]]| va.iter().zip(v).map(|(p, q)| distance(*p, *q)).sum::<f64>();
    let rev: Vec<[f64; 2]> = vb.iter().rev().copied().collect();
    let reversed = travel(&rev) < travel(&vb);
    StrokePair {
        stroke_a: sa.id,
        stroke_b: sb.id,
        vertices_a: va,
        vertices_b: if reversed { rev } else { vb },
        confidence,
        reversed,
    }
}

pub fn arc_length(points: &[[f64; 2]]) -> f64 {
    points.windows(2).map(|w| distance(w[0], w[1])).sum()
}

/// `count` points at equal arc-length spacing, both endpoints included. A
/// zero-length polyline yields `count` copies of its point.
pub fn resample(points: &[[f64; 2]], count: usize) -> Result<Vec<[f64; 2]>> {
    if count < 2 {
        return Err(Error::Parameter(format!("resample count must be at least 2, got {count}")));
    }
    if points.is_empty() {
        return Err(Error::Parameter("cannot resample an empty polyline".into()));
    }
    let total = arc_length(points);
    if total == 0.0 {
        return Ok(vec![points[0]; count]);
    }
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    let mut walked = 0.0;
    for k in 0..count {
        if k == count - 1 {
            out.push(points[points.len() - 1]);
            break;
        }
        let target = total * k as f64 / (count - 1) as f64;
        loop {
            let len = distance(points[seg], points[seg + 1]);
            if walked + len >= target || seg + 2 == points.len() {
                let f = if len > 0.0 { ((target - walked) / len).clamp(0.0, 1.0) } else { 0.0 };
                let (p, q) = (points[seg], points[seg + 1]);
                out.push([p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1])]);
                break;
            }
            walked += len;
            seg += 1;
        }
    }
    Ok(out)
}

/// Per-vertex linear blend of every stroke pair at time `t`.
pub fn interpolate(pairs: &[StrokePair], t: f64) -> Result<Vec<Vec<[f64; 2]>>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(pairs
        .iter()
        .map(|p| {
            if t == 0.0 {
                return p.vertices_a.clone();
            }
            if t == 1.0 {
                return p.vertices_b.clone();
            }
            p.vertices_a
                .iter()
                .zip(&p.vertices_b)
                .map(|(a, b)| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
                .collect()
        })
        .collect())
}

fn svg_points(points: &[[f64; 2]], dx: f64) -> String {
    let mut s = String::new();
    for (k, p) in points.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", p[0] + dx, p[1]);
    }
    s
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

const UNMATCHED_COLOR: &str = "#b0b0b0";

/// Both keyframes side by side; matched strokes share a color, unmatched
/// ones are gray.
pub fn stroke_overlay_svg(a: &StrokeSet, b: &StrokeSet, matching: &StrokeMatching, size_a: (u32, u32), size_b: (u32, u32)) -> String {
    let gap = 16.0;
    let offset = size_a.0 as f64 + gap;
    let width = offset + size_b.0 as f64;
    let height = size_a.1.max(size_b.1);
    let mut color_a = BTreeMap::new();
    let mut color_b = BTreeMap::new();
    for (k, p) in matching.pairs.iter().enumerate() {
        let c = hex(palette_color(k as u32 + 1));
        color_a.insert(p.stroke_a, c.clone());
        color_b.insert(p.stroke_b, c);
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (set, colors, dx, side) in [(a, &color_a, 0.0, "a"), (b, &color_b, offset, "b")] {
        let _ = writeln!(svg, r#"<g id="frame-{side}" fill="none" stroke-width="2">"#);
        for s in &set.strokes {
            let color = colors.get(&s.id).map_or(UNMATCHED_COLOR, String::as_str);
            let _ = writeln!(
                svg,
                r#"<polyline data-stroke="{}" stroke="{}" points="{}"/>"#,
                s.id,
                color,
                svg_points(&s.points(), dx)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

/// One SVG document holding the interpolated frame at each `t`.
pub fn inbetween_svg(pairs: &[StrokePair], ts: &[f64], size: (u32, u32)) -> Result<String> {
    let (w, h) = size;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    for &t in ts {
        let frame = interpolate(pairs, t)?;
        let _ = writeln!(svg, r#"<g class="frame" data-t="{t}" fill="none" stroke="black" stroke-width="2">"#);
        for (p, points) in pairs.iter().zip(&frame) {
            let _ = writeln!(
                svg,
                r#"<polyline data-pair="{}-{}" points="{}"/>"#,
                p.stroke_a,
                p.stroke_b,
                svg_points(points, 0.0)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Sample times for an inbetween request: `frames == 1` gives just `t`;
/// more frames span [0, 1] evenly, keyframes included.
pub fn inbetween_times(t: f64, frames: usize) -> Result<Vec<f64>> {
    match frames {
        0 => Err(Error::Parameter("frames must be at least 1".into())),
        1 => Ok(vec![t]),
        n => Ok((0..n).map(|k| k as f64 / (n - 1) as f64).collect()),
    }
}
