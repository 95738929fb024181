//! Front/behind ordering of regions from junction-centred coverage circles.
//!
//! Junctions are ink pixels that see three or more regions. Around each
//! junction a disc is rasterized and the share of disc pixels per region is
//! measured; the dominant region votes itself in front of every other
//! incident region. Votes form a weighted directed graph whose layered
//! topological order gives an integer depth rank per region.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Cursor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{window_owners, LabelMap, RegionGraph, INK};
use crate::raster::RasterImage;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthConfig {
    /// Side of the square window used to find junction candidates.
    pub window: u32,
    /// Candidates closer than `merge_factor * radius` collapse into one junction.
    pub merge_factor: f64,
    /// Lower clamp for the coverage radius, pixels.
    pub min_radius: f64,
}

impl Default for DepthConfig {
    fn default() -> Self {
        Self {
            window: 5,
            merge_factor: 2.0,
            min_radius: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub id: usize,
    /// `[x, y]`, pixels.
    pub position: [f64; 2],
    /// Ascending region ids meeting at this junction.
    pub incident_regions: Vec<u32>,
    pub radius: f64,
    /// Fraction of in-bounds disc pixels per incident region.
    pub coverage: BTreeMap<u32, f64>,
    pub ink_fraction: f64,
}

/// Disc coverage around a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    pub fractions: BTreeMap<u32, f64>,
    pub ink_fraction: f64,
}

/// `sqrt(2 * (width * height - background_area) / 10000)`, clamped below
/// at `min_radius`.
pub fn junction_radius(width: u32, height: u32, background_area: u32, min_radius: f64) -> f64 {
    let screen = width as f64 * height as f64;
    let character = (screen - background_area as f64).max(0.0);
    (2.0 * character / 10_000.0).sqrt().max(min_radius)
}

/// Ink pixels whose window of ink owners holds at least three regions.
pub fn junction_candidates(graph: &RegionGraph, window: u32) -> Vec<(u32, u32)> {
    let lm = graph.label_map();
    let (w, h) = (lm.width(), lm.height());
    let owners = graph.ink_owners();
    let radius = window / 2;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if lm.get(x, y) == INK && window_owners(owners, w, h, x, y, radius).len() >= 3 {
                out.push((x, y));
            }
        }
    }
    out
}

/// Fraction of in-bounds pixels of the disc of radius `r` around `center`
/// carrying each region id; ink pixels are reported separately.
pub fn coverage_ratios(label_map: &LabelMap, center: [f64; 2], r: f64) -> Coverage {
    let (w, h) = (label_map.width() as i64, label_map.height() as i64);
    let x0 = ((center[0] - r).floor() as i64).max(0);
    let x1 = ((center[0] + r).ceil() as i64).min(w - 1);
    let y0 = ((center[1] - r).floor() as i64).max(0);
    let y1 = ((center[1] + r).ceil() as i64).min(h - 1);
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    let (mut total, mut ink) = (0u64, 0u64);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let (dx, dy) = (x as f64 - center[0], y as f64 - center[1]);
            if dx * dx + dy * dy > r * r {
                continue;
            }
            total += 1;
            match label_map.get(x as u32, y as u32) {
                INK => ink += 1,
                id => *counts.entry(id).or_default() += 1,
            }
        }
    }
    if total == 0 {
        return Coverage {
            fractions: BTreeMap::new(),
            ink_fraction: 0.0,
        };
    }
    Coverage {
        fractions: counts
            .into_iter()
            .map(|(id, c)| (id, c as f64 / total as f64))
            .collect(),
        ink_fraction: ink as f64 / total as f64,
    }
}

/// Finds junctions, merges nearby candidates and measures their coverage.
pub fn detect_junctions(graph: &RegionGraph, cfg: &DepthConfig) -> Vec<Junction> {
    let (w, h) = graph.source_dims();
    let radius = junction_radius(w, h, graph.background_area(), cfg.min_radius);
    let candidates = junction_candidates(graph, cfg.window);
    let clusters = cluster_points(&candidates, cfg.merge_factor * radius);
    let owners = graph.ink_owners();

    let mut junctions = Vec::new();
    for members in clusters {
        let n = members.len() as f64;
        let position = [
            members.iter().map(|&i| candidates[i].0 as f64).sum::<f64>() / n,
            members.iter().map(|&i| candidates[i].1 as f64).sum::<f64>() / n,
        ];
        let cov = coverage_ratios(graph.label_map(), position, radius);
        let mut incident: BTreeSet<u32> = cov.fractions.keys().copied().collect();
        for &i in &members {
            let (x, y) = candidates[i];
            incident.extend(window_owners(owners, w, h, x, y, cfg.window / 2));
        }
        if incident.len() < 3 {
            continue;
        }
        let coverage = incident
            .iter()
            .map(|id| (*id, cov.fractions.get(id).copied().unwrap_or(0.0)))
            .collect();
        junctions.push(Junction {
            id: junctions.len(),
            position,
            incident_regions: incident.into_iter().collect(),
            radius,
            coverage,
            ink_fraction: cov.ink_fraction,
        });
    }
    junctions
}

/// Single-linkage clusters of points within `max_dist`, each sorted, ordered
/// by first member.
fn cluster_points(points: &[(u32, u32)], max_dist: f64) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i].0, points[i].1));
    let d2 = max_dist * max_dist;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            let dx = points[j].0 as f64 - points[i].0 as f64;
            if dx > max_dist {
                break;
            }
            let dy = points[j].1 as f64 - points[i].1 as f64;
            if dx * dx + dy * dy <= d2 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..points.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthVote {
    pub front: u32,
    pub behind: u32,
    pub weight: u32,
}

/// Accumulated front/behind votes and the resulting depth ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthGraph {
    pub votes: Vec<DepthVote>,
    /// Region id to rank, 0 = frontmost. The background ranks strictly last.
    pub rank: BTreeMap<u32, u32>,
    pub background: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelativeDepth {
    Front,
    Behind,
    Equal,
}

impl DepthGraph {
    /// Where `r` sits relative to `s`.
    pub fn relative_depth(&self, r: u32, s: u32) -> RelativeDepth {
        match (self.rank.get(&r), self.rank.get(&s)) {
            (Some(a), Some(b)) if a < b => RelativeDepth::Front,
            (Some(a), Some(b)) if a > b => RelativeDepth::Behind,
            _ => RelativeDepth::Equal,
        }
    }

    pub fn total_weight(&self) -> u64 {
        self.votes.iter().map(|v| v.weight as u64).sum()
    }
}

/// Dominant-coverage region of a junction; ties go to the smaller id.
pub fn dominant_region(junction: &Junction) -> Option<u32> {
    junction
        .coverage
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(id, _)| *id)
}

/// Collects one vote per (dominant, other) incident pair and ranks regions
/// by layered peeling of vertices nobody is in front of. Cycles are broken
/// by dropping the lightest edge, ties to the smaller front then behind id.
pub fn build_depth_graph(region_ids: &[u32], background: Option<u32>, junctions: &[Junction]) -> DepthGraph {
    let mut weights: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for junction in junctions {
        let Some(front) = dominant_region(junction) else {
            continue;
        };
        for &other in &junction.incident_regions {
            if other != front {
                *weights.entry((front, other)).or_default() += 1;
            }
        }
    }

    let mut remaining: BTreeSet<u32> = region_ids
        .iter()
        .copied()
        .filter(|&id| Some(id) != background)
        .collect();
    let mut edges: BTreeMap<(u32, u32), u32> = weights
        .iter()
        .filter(|((f, b), _)| remaining.contains(f) && remaining.contains(b))
        .map(|(&k, &w)| (k, w))
        .collect();
    let mut rank = BTreeMap::new();
    let mut layer = 0u32;
    while !remaining.is_empty() {
        let blocked: BTreeSet<u32> = edges.keys().map(|&(_, behind)| behind).collect();
        let free: Vec<u32> = remaining.difference(&blocked).copied().collect();
        if free.is_empty() {
            let (&lightest, _) = edges
                .iter()
                .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
                .expect("a cycle implies edges");
            log::debug!("depth cycle: dropping edge {:?}", lightest);
            edges.remove(&lightest);
            continue;
        }
        for id in free {
            rank.insert(id, layer);
            remaining.remove(&id);
        }
        edges.retain(|(f, b), _| remaining.contains(f) && remaining.contains(b));
        layer += 1;
    }
    if let Some(bg) = background {
        rank.insert(bg, layer);
    }

    DepthGraph {
        votes: weights
            .into_iter()
            .map(|((front, behind), weight)| DepthVote {
                front,
                behind,
                weight,
            })
            .collect(),
        rank,
        background,
    }
}

/// Grayscale keyframe with junction discs outlined in red.
pub fn junction_overlay_png(raster: &RasterImage, junctions: &[Junction]) -> Result<Vec<u8>> {
    let (w, h) = (raster.width(), raster.height());
    let mut img = image::RgbImage::from_fn(w, h, |x, y| {
        let v = raster.get(x, y);
        image::Rgb([v, v, v])
    });
    for j in junctions {
        let steps = (j.radius * 8.0).ceil().max(16.0) as usize;
        for k in 0..steps {
            let t = k as f64 / steps as f64 * std::f64::consts::TAU;
            let x = (j.position[0] + j.radius * t.cos()).round();
            let y = (j.position[1] + j.radius * t.sin()).round();
            if x >= 0.0 && y >= 0.0 && (x as u32) < w && (y as u32) < h {
                img.put_pixel(x as u32, y as u32, image::Rgb([230, 30, 30]));
            }
        }
    }
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(out.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn junction(id: usize, coverage: &[(u32, f64)]) -> Junction {
        Junction {
            id,
            position: [0.0, 0.0],
            incident_regions: coverage.iter().map(|c| c.0).collect(),
            radius: 3.0,
            coverage: coverage.iter().copied().collect(),
            ink_fraction: 0.0,
        }
    }

    #[test]
    fn radius_matches_direct_substitution() {
        assert_eq!(junction_radius(1000, 1000, 500_000, 3.0), 10.0);
        assert_eq!(junction_radius(500, 500, 125_000, 3.0), 5.0);
        assert_eq!(junction_radius(640, 480, 640 * 480, 3.0), 3.0);
    }

    #[test]
    fn no_junctions_means_flat_ranks() {
        let g = build_depth_graph(&[1, 2, 3], Some(1), &[]);
        assert_eq!(g.rank[&2], 0);
        assert_eq!(g.rank[&3], 0);
        assert_eq!(g.rank[&1], 1);
        assert_eq!(g.relative_depth(2, 3), RelativeDepth::Equal);
        assert_eq!(g.relative_depth(1, 2), RelativeDepth::Behind);
    }

    #[test]
    fn dominant_region_goes_in_front() {
        let j = junction(0, &[(1, 0.2), (2, 0.5), (3, 0.2)]);
        let g = build_depth_graph(&[1, 2, 3, 4], Some(4), &[j]);
        assert_eq!(g.relative_depth(2, 1), RelativeDepth::Front);
        assert_eq!(g.relative_depth(1, 2), RelativeDepth::Behind);
        assert_eq!(g.relative_depth(1, 3), RelativeDepth::Equal);
        assert_eq!(g.relative_depth(4, 1), RelativeDepth::Behind);
        assert_eq!(g.total_weight(), 2);
    }

    #[test]
    fn symmetric_cycle_breaks_on_smallest_front_id() {
        let js = [
            junction(0, &[(1, 0.6), (2, 0.3), (9, 0.0)]),
            junction(1, &[(2, 0.6), (3, 0.3), (9, 0.0)]),
            junction(2, &[(3, 0.6), (1, 0.3), (9, 0.0)]),
        ];
        let g = build_depth_graph(&[1, 2, 3, 9], Some(9), &js);
        // Edge 1->2 is dropped: 2 is free first, then 3, then 1.
        assert_eq!(g.rank[&2], 0);
        assert_eq!(g.rank[&3], 1);
        assert_eq!(g.rank[&1], 2);
        assert_eq!(g.rank[&9], 3);
    }

    #[test]
    fn coverage_of_plain_region_is_full() {
        let lm = LabelMap::new(9, 9, vec![1; 81]).unwrap();
        let cov = coverage_ratios(&lm, [4.0, 4.0], 3.0);
        assert_eq!(cov.fractions[&1], 1.0);
        assert_eq!(cov.ink_fraction, 0.0);
    }

    #[test]
    fn coverage_clips_to_image() {
        let lm = LabelMap::new(4, 4, vec![2; 16]).unwrap();
        let cov = coverage_ratios(&lm, [0.0, 0.0], 2.0);
        assert_eq!(cov.fractions[&2], 1.0);
    }
}
