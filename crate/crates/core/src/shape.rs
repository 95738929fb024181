//! Shape similarity between closed areas.
//!
//! The default scorer compares the seven Hu moment invariants of the two
//! region masks after a signed log scaling. Scorers are looked up by name so
//! another descriptor (keypoints, contours) can be dropped in without
//! touching the matcher.

use std::collections::BTreeMap;
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::label::{RegionGraph, INK};

/// Binary mask of one region cropped to its bounding box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl RegionMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width as usize * height as usize {
            return Err(Error::Parameter("region mask dimensions do not match data".into()));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn area(&self) -> u32 {
        self.bits.iter().filter(|b| **b).count() as u32
    }

    fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| ((i % w) as f64, (i / w) as f64))
    }
}

/// Cropped masks for every region, in one pass over the label map.
pub fn region_masks(graph: &RegionGraph) -> BTreeMap<u32, RegionMask> {
    let mut masks: BTreeMap<u32, RegionMask> = graph
        .regions()
        .iter()
        .map(|r| {
            let [x0, y0, x1, y1] = r.bbox;
            let (w, h) = (x1 - x0 + 1, y1 - y0 + 1);
            (
                r.id,
                RegionMask {
                    width: w,
                    height: h,
                    bits: vec![false; w as usize * h as usize],
                },
            )
        })
        .collect();
    let lm = graph.label_map();
    for y in 0..lm.height() {
        for x in 0..lm.width() {
            let id = lm.get(x, y);
            if id == INK {
                continue;
            }
            let [x0, y0, ..] = graph.regions()[id as usize - 1].bbox;
            let mask = masks.get_mut(&id).expect("mask per region");
            let i = (y - y0) as usize * mask.width as usize + (x - x0) as usize;
            mask.bits[i] = true;
        }
    }
    masks
}

/// Per-region feature vector produced by a [`ShapeScorer`].
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeDescriptor {
    pub values: Vec<f64>,
    pub area: u32,
}

pub trait ShapeScorer: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    fn describe(&self, mask: &RegionMask) -> ShapeDescriptor;

    /// Similarity in [0, 1], 1 for identical shapes.
    fn similarity(&self, a: &ShapeDescriptor, b: &ShapeDescriptor) -> f64;
}

pub const HU_MOMENTS: &str = "hu-moments";

/// Hu-moment scorer: `1 / (1 + Σ |m_a,k - m_b,k|)` over log-scaled moments.
#[derive(Clone, Debug)]
pub struct HuMomentScorer {
    /// Magnitudes at or below this are treated as zero before taking logs,
    /// which keeps rasterization noise in vanishing moments from dominating.
    pub floor: f64,
}

impl Default for HuMomentScorer {
    fn default() -> Self {
        Self { floor: 1e-4 }
    }
}

impl ShapeScorer for HuMomentScorer {
    fn name(&self) -> &'static str {
        HU_MOMENTS
    }

    fn describe(&self, mask: &RegionMask) -> ShapeDescriptor {
        ShapeDescriptor {
            values: log_scaled(&hu_moments(mask), self.floor).to_vec(),
            area: mask.area(),
        }
    }

    fn similarity(&self, a: &ShapeDescriptor, b: &ShapeDescriptor) -> f64 {
        let dist: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .sum();
        1.0 / (1.0 + dist)
    }
}

/// Looks up a scorer by name.
pub fn scorer_by_name(name: &str, moment_floor: f64) -> Result<Box<dyn ShapeScorer>> {
    match name {
        HU_MOMENTS => {
            if moment_floor.is_nan() || moment_floor <= 0.0 {
                return Err(Error::Parameter(format!(
                    "moment floor must be positive, got {moment_floor}"
                )));
            }
            Ok(Box::new(HuMomentScorer {
                floor: moment_floor,
            }))
        }
        other => Err(Error::Parameter(format!("unknown shape scorer {other:?}"))),
    }
}

/// The seven Hu invariants of a binary mask.
pub fn hu_moments(mask: &RegionMask) -> [f64; 7] {
    let m00 = mask.area() as f64;
    if m00 == 0.0 {
        return [0.0; 7];
    }
    let (sx, sy) = mask
        .points()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x, sy + y));
    let (cx, cy) = (sx / m00, sy / m00);

    let (mut mu20, mut mu02, mut mu11) = (0.0, 0.0, 0.0);
    let (mut mu30, mut mu03, mut mu21, mut mu12) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in mask.points() {
        let (dx, dy) = (x - cx, y - cy);
        mu20 += dx * dx;
        mu02 += dy * dy;
        mu11 += dx * dy;
        mu30 += dx * dx * dx;
        mu03 += dy * dy * dy;
        mu21 += dx * dx * dy;
        mu12 += dx * dy * dy;
    }
    let s2 = m00 * m00;
    let s3 = m00.powf(2.5);
    let (n20, n02, n11) = (mu20 / s2, mu02 / s2, mu11 / s2);
    let (n30, n03, n21, n12) = (mu30 / s3, mu03 / s3, mu21 / s3, mu12 / s3);

    let t0 = n30 + n12;
    let t1 = n21 + n03;
    let q0 = n30 - 3.0 * n12;
    let q1 = 3.0 * n21 - n03;
    [
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11 * n11,
        q0 * q0 + q1 * q1,
        t0 * t0 + t1 * t1,
        q0 * t0 * (t0 * t0 - 3.0 * t1 * t1) + q1 * t1 * (3.0 * t0 * t0 - t1 * t1),
        (n20 - n02) * (t0 * t0 - t1 * t1) + 4.0 * n11 * t0 * t1,
        q1 * t0 * (t0 * t0 - 3.0 * t1 * t1) - q0 * t1 * (3.0 * t0 * t0 - t1 * t1),
    ]
}

/// `sign(h) * max(0, log10(|h| / floor))`, continuous through zero.
pub fn log_scaled(hu: &[f64; 7], floor: f64) -> [f64; 7] {
    hu.map(|h| {
        let mag = (h.abs() / floor).log10().max(0.0);
        if h < 0.0 {
            -mag
        } else {
            mag
        }
    })
}

/// Smaller area over larger area, in (0, 1].
pub fn area_ratio(a: u32, b: u32) -> f64 {
    debug_assert!(a > 0 && b > 0, "areas must be positive");
    a.min(b) as f64 / a.max(b) as f64
}

/// Shape term N of the seed score. Single-pixel regions have no usable
/// moments and fall back to the area ratio.
pub fn shape_score(scorer: &dyn ShapeScorer, a: &ShapeDescriptor, b: &ShapeDescriptor) -> f64 {
    if a.area <= 1 || b.area <= 1 {
        return area_ratio(a.area.max(1), b.area.max(1));
    }
    scorer.similarity(a, b).clamp(0.0, 1.0)
}
