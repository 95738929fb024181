//! Closed-area labeling: connected components over the binarized keyframe,
//! per-region properties, ink-mediated adjacency and background detection.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{binarize, median_denoise, BinaryMask, RasterImage};

/// Label value reserved for ink pixels. Region ids start at 1.
pub const INK: u32 = 0;

/// Knobs for turning a raster into a [`RegionGraph`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Pixels brighter than this are paper, the rest is ink.
    pub threshold: u8,
    /// Odd median kernel side; 1 disables denoising.
    pub median_kernel: usize,
    /// Regions smaller than this are merged into their largest neighbor; 0 disables.
    pub min_region_area: u32,
    /// Widest ink line across which two regions still count as adjacent.
    pub max_ink_thickness: u32,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            threshold: 220,
            median_kernel: 5,
            min_region_area: 10,
            max_ink_thickness: 8,
        }
    }
}

/// Row-major region id per pixel, [`INK`] for stroke pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width as usize * height as usize {
            return Err(Error::Parameter("label map dimensions do not match data".into()));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn ink_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == INK).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: u32,
    /// Direction from this region's centroid to the neighbor's, degrees in
    /// [0, 360), measured in image coordinates (y down).
    pub angle: f64,
    /// Ink pixels whose 3x3 window sees both regions.
    pub shared_length: u32,
}

/// One closed area of a keyframe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: u32,
    pub area: u32,
    /// Mean pixel position `[x, y]`.
    pub centroid: [f64; 2],
    /// Inclusive bounding box `[x0, y0, x1, y1]`.
    pub bbox: [u32; 4],
    /// Number of image-border pixels that belong to this region.
    pub border_contact: u32,
    pub is_background: bool,
    pub neighbors: Vec<Neighbor>,
    pub display_color: [u8; 3],
}

impl Region {
    pub fn neighbor(&self, id: u32) -> Option<&Neighbor> {
        self.neighbors.iter().find(|n| n.id == id)
    }
}

/// Labeled closed areas of one keyframe.
#[derive(Clone, Debug)]
pub struct RegionGraph {
    regions: Vec<Region>,
    label_map: LabelMap,
    owners: Vec<u32>,
    background: Option<u32>,
}

impl RegionGraph {
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: u32) -> Option<&Region> {
        if id == INK {
            return None;
        }
        self.regions.get(id as usize - 1)
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    /// Region labels with ink pixels assigned to the nearest region (within
    /// half the maximum ink thickness); 0 where no region is close enough.
    pub fn ink_owners(&self) -> &[u32] {
        &self.owners
    }

    pub fn background(&self) -> Option<u32> {
        self.background
    }

    pub fn background_area(&self) -> u32 {
        self.background
            .and_then(|id| self.region(id))
            .map_or(0, |r| r.area)
    }

    pub fn source_dims(&self) -> (u32, u32) {
        (self.label_map.width, self.label_map.height)
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Ids of every region except the background, ascending.
    pub fn character_ids(&self) -> Vec<u32> {
        self.regions
            .iter()
            .filter(|r| !r.is_background)
            .map(|r| r.id)
            .collect()
    }
}

/// Full ingest: median denoise, binarize, then [`segment`].
pub fn ingest(raster: &RasterImage, cfg: &IngestConfig) -> Result<RegionGraph> {
    let denoised = median_denoise(raster, cfg.median_kernel)?;
    let mask = binarize(&denoised, cfg.threshold);
    Ok(segment(&mask, cfg))
}

/// Labels the mask, merges undersized regions, then fills in adjacency and
/// the background flag. An all-ink mask yields an empty graph.
pub fn segment(mask: &BinaryMask, cfg: &IngestConfig) -> RegionGraph {
    let (mut label_map, mut regions) = label_components(mask);
    let mut owners = build_adjacency(&label_map, &mut regions, cfg.max_ink_thickness);

    if cfg.min_region_area > 0 && regions.iter().any(|r| r.area < cfg.min_region_area) {
        let merged = merge_small_regions(&label_map, &regions, cfg.min_region_area);
        if merged != label_map.labels {
            label_map = relabel_in_scan_order(label_map.width, label_map.height, merged);
            regions = region_stats(&label_map);
            owners = build_adjacency(&label_map, &mut regions, cfg.max_ink_thickness);
        }
    }

    let background = detect_background(&regions);
    if let Some(bg) = background {
        regions[bg as usize - 1].is_background = true;
        regions[bg as usize - 1].display_color = [255, 255, 255];
    }
    RegionGraph {
        regions,
        label_map,
        owners,
        background,
    }
}

/// 4-connected components of the white pixels. Ids follow raster-scan
/// first-encounter order; neighbor lists are left empty.
pub fn label_components(mask: &BinaryMask) -> (LabelMap, Vec<Region>) {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let white = mask.data();
    let mut labels = vec![INK; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !white[start] || labels[start] != INK {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut visit = |q: usize| {
                if white[q] && labels[q] == INK {
                    labels[q] = next;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < w {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - w);
            }
            if y + 1 < h {
                visit(p + w);
            }
        }
    }
    let label_map = LabelMap {
        width: mask.width(),
        height: mask.height(),
        labels,
    };
    let regions = region_stats(&label_map);
    (label_map, regions)
}

fn region_stats(label_map: &LabelMap) -> Vec<Region> {
    let (w, h) = (label_map.width, label_map.height);
    let count = label_map.labels.iter().copied().max().unwrap_or(INK) as usize;
    let mut area = vec![0u64; count];
    let mut sum_x = vec![0u64; count];
    let mut sum_y = vec![0u64; count];
    let mut border = vec![0u32; count];
    let mut bbox = vec![[u32::MAX, u32::MAX, 0, 0]; count];
    for y in 0..h {
        for x in 0..w {
            let label = label_map.get(x, y);
            if label == INK {
                continue;
            }
            let k = label as usize - 1;
            area[k] += 1;
            sum_x[k] += x as u64;
            sum_y[k] += y as u64;
            if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                border[k] += 1;
            }
            let b = &mut bbox[k];
            b[0] = b[0].min(x);
            b[1] = b[1].min(y);
            b[2] = b[2].max(x);
            b[3] = b[3].max(y);
        }
    }
    (0..count)
        .map(|k| {
            let id = k as u32 + 1;
            Region {
                id,
                area: area[k] as u32,
                centroid: [
                    sum_x[k] as f64 / area[k] as f64,
                    sum_y[k] as f64 / area[k] as f64,
                ],
                bbox: bbox[k],
                border_contact: border[k],
                is_background: false,
                neighbors: Vec::new(),
                display_color: palette_color(id),
            }
        })
        .collect()
}

/// Region with the most border pixels; ties go to the larger area, then the
/// smaller id.
pub fn detect_background(regions: &[Region]) -> Option<u32> {
    regions
        .iter()
        .max_by(|a, b| {
            a.border_contact
                .cmp(&b.border_contact)
                .then(a.area.cmp(&b.area))
                .then(b.id.cmp(&a.id))
        })
        .map(|r| r.id)
}

/// Assigns each ink pixel within `max_ink_thickness / 2` (rounded up,
/// 8-connected steps) the label of the nearest region. Region pixels keep
/// their own label; unreached ink stays [`INK`].
pub fn propagate_ink_owners(label_map: &LabelMap, max_ink_thickness: u32) -> Vec<u32> {
    let (w, h) = (label_map.width as usize, label_map.height as usize);
    let mut owners = label_map.labels.clone();
    let steps = max_ink_thickness.div_ceil(2);
    if steps == 0 {
        return owners;
    }
    let mut depth = vec![0u32; w * h];
    let mut queue = VecDeque::new();
    for (p, &owner) in owners.iter().enumerate() {
        if owner != INK && neighbors8(p, w, h).any(|q| label_map.labels[q] == INK) {
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        if depth[p] >= steps {
            continue;
        }
        for q in neighbors8(p, w, h) {
            if owners[q] == INK {
                owners[q] = owners[p];
                depth[q] = depth[p] + 1;
                queue.push_back(q);
            }
        }
    }
    owners
}

pub(crate) fn neighbors8(p: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = ((p % w) as i64, (p / w) as i64);
    const OFFSETS: [(i64, i64); 8] = [
        (-1, -1),
        (0, -1),
        (1, -1),
        (-1, 0),
        (1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    OFFSETS.into_iter().filter_map(move |(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64).then(|| ny as usize * w + nx as usize)
    })
}

/// Distinct nonzero owner labels in the (2·radius+1)² window around `(x, y)`,
/// ascending.
pub(crate) fn window_owners(owners: &[u32], w: u32, h: u32, x: u32, y: u32, radius: u32) -> Vec<u32> {
    let mut seen: Vec<u32> = Vec::with_capacity(4);
    let (x0, x1) = (x.saturating_sub(radius), (x + radius).min(w - 1));
    let (y0, y1) = (y.saturating_sub(radius), (y + radius).min(h - 1));
    for yy in y0..=y1 {
        let row = yy as usize * w as usize;
        for xx in x0..=x1 {
            let o = owners[row + xx as usize];
            if o != INK && !seen.contains(&o) {
                seen.push(o);
            }
        }
    }
    seen.sort_unstable();
    seen
}

/// Fills `neighbors` on every region and returns the ink-owner map.
///
/// Two regions are adjacent when some ink pixel has both in its 3x3 window
/// of owners; the shared length counts those ink pixels.
pub fn build_adjacency(label_map: &LabelMap, regions: &mut [Region], max_ink_thickness: u32) -> Vec<u32> {
    let owners = propagate_ink_owners(label_map, max_ink_thickness);
    let (w, h) = (label_map.width, label_map.height);
    let mut shared: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for y in 0..h {
        for x in 0..w {
            if label_map.get(x, y) != INK {
                continue;
            }
            let seen = window_owners(&owners, w, h, x, y, 1);
            for (i, &r) in seen.iter().enumerate() {
                for &s in &seen[i + 1..] {
                    *shared.entry((r, s)).or_default() += 1;
                }
            }
        }
    }
    for region in regions.iter_mut() {
        region.neighbors.clear();
    }
    for (&(r, s), &len) in &shared {
        let cr = regions[r as usize - 1].centroid;
        let cs = regions[s as usize - 1].centroid;
        regions[r as usize - 1].neighbors.push(Neighbor {
            id: s,
            angle: direction_degrees(cr, cs),
            shared_length: len,
        });
        regions[s as usize - 1].neighbors.push(Neighbor {
            id: r,
            angle: direction_degrees(cs, cr),
            shared_length: len,
        });
    }
    for region in regions.iter_mut() {
        region.neighbors.sort_by_key(|n| n.id);
    }
    owners
}

/// atan2 direction from `from` to `to` in degrees, normalized to [0, 360).
pub fn direction_degrees(from: [f64; 2], to: [f64; 2]) -> f64 {
    let deg = (to[1] - from[1]).atan2(to[0] - from[0]).to_degrees().rem_euclid(360.0);
    if deg >= 360.0 {
        0.0
    } else {
        deg
    }
}

fn merge_small_regions(label_map: &LabelMap, regions: &[Region], min_area: u32) -> Vec<u32> {
    let n = regions.len();
    let mut parent: Vec<u32> = (0..=n as u32).collect();
    let mut area: Vec<u64> = std::iter::once(0)
        .chain(regions.iter().map(|r| r.area as u64))
        .collect();
    fn root(parent: &mut [u32], mut id: u32) -> u32 {
        while parent[id as usize] != id {
            parent[id as usize] = parent[parent[id as usize] as usize];
            id = parent[id as usize];
        }
        id
    }
    for region in regions {
        let me = root(&mut parent, region.id);
        if area[me as usize] >= min_area as u64 {
            continue;
        }
        let target = region
            .neighbors
            .iter()
            .map(|nb| root(&mut parent, nb.id))
            .filter(|&r| r != me)
            .max_by(|&a, &b| area[a as usize].cmp(&area[b as usize]).then(b.cmp(&a)));
        if let Some(target) = target {
            parent[me as usize] = target;
            area[target as usize] += area[me as usize];
        }
    }
    label_map
        .labels
        .iter()
        .map(|&l| if l == INK { INK } else { root(&mut parent, l) })
        .collect()
}

fn relabel_in_scan_order(width: u32, height: u32, labels: Vec<u32>) -> LabelMap {
    let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
    let labels = labels
        .into_iter()
        .map(|l| {
            if l == INK {
                INK
            } else {
                let next = remap.len() as u32 + 1;
                *remap.entry(l).or_insert(next)
            }
        })
        .collect();
    LabelMap {
        width,
        height,
        labels,
    }
}

/// Deterministic, well-spread color per region id.
pub fn palette_color(id: u32) -> [u8; 3] {
    let hue = (id as f64 * 0.618_033_988_749_895).fract();
    hsv_to_rgb(hue, 0.55, 0.95)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let i = (h * 6.0).floor();
    let f = h * 6.0 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - f * s), v * (1.0 - (1.0 - f) * s));
    let (r, g, b) = match i as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [(r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8]
}

/// Renders the label map as a PNG: ink black, each region in `color_of(id)`.
///
/// Uses an indexed palette (palette index = region id) when the ids fit in a
/// byte, so a client can recover the region under a pixel; RGB otherwise.
pub fn overlay_png(label_map: &LabelMap, mut color_of: impl FnMut(u32) -> [u8; 3]) -> Result<Vec<u8>> {
    let count = label_map.labels.iter().copied().max().unwrap_or(INK);
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, label_map.width, label_map.height);
    encoder.set_depth(png::BitDepth::Eight);
    let data: Vec<u8> = if count <= 255 {
        let mut palette = vec![0u8, 0, 0];
        for id in 1..=count {
            palette.extend_from_slice(&color_of(id));
        }
        encoder.set_color(png::ColorType::Indexed);
        encoder.set_palette(palette);
        label_map.labels.iter().map(|&l| l as u8).collect()
    } else {
        let colors: Vec<[u8; 3]> = (0..=count)
            .map(|id| if id == INK { [0, 0, 0] } else { color_of(id) })
            .collect();
        encoder.set_color(png::ColorType::Rgb);
        label_map
            .labels
            .iter()
            .flat_map(|&l| colors[l as usize])
            .collect()
    };
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::Format(e.to_string()))?;
    writer
        .write_image_data(&data)
        .map_err(|e| Error::Format(e.to_string()))?;
    writer.finish().map_err(|e| Error::Format(e.to_string()))?;
    Ok(out)
}
