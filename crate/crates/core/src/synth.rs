//! Synthetic line-art scenes with known ground truth.
//!
//! Scenes are stacks of filled, outlined polygons drawn back to front, so
//! later parts occlude earlier ones exactly like paint over paint. Every
//! pixel remembers which part painted it last, which gives the true part of
//! each labeled region and hence a reference correspondence between two
//! renderings of the same scene.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::Assignment;
use crate::label::{RegionGraph, INK};
use crate::raster::RasterImage;

/// Outline half-width in pixels.
pub const BRUSH_RADIUS: f64 = 2.0;
/// Owner value of paper pixels.
pub const PAPER: u32 = 0;
/// Owner value of ink pixels.
pub const INK_OWNER: u32 = u32::MAX;

/// One filled and outlined part. `part` ids are positive and stable across
/// the two frames of a scene.
#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub part: u32,
    pub polygon: Vec<[f64; 2]>,
}

/// Parts in paint order: later parts are drawn on top.
#[derive(Clone, Debug, PartialEq)]
pub struct Drawing {
    pub width: u32,
    pub height: u32,
    pub parts: Vec<Part>,
}

#[derive(Clone, Debug)]
pub struct Rendered {
    pub raster: RasterImage,
    /// Per pixel: part id, [`PAPER`] or [`INK_OWNER`].
    pub owner: Vec<u32>,
}

impl Drawing {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            parts: Vec::new(),
        }
    }

    pub fn push(&mut self, part: u32, polygon: Vec<[f64; 2]>) -> &mut Self {
        self.parts.push(Part { part, polygon });
        self
    }

    pub fn render(&self) -> Rendered {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut pixels = vec![255u8; w * h];
        let mut owner = vec![PAPER; w * h];
        for part in &self.parts {
            fill_polygon(&part.polygon, w, h, |i| {
                pixels[i] = 255;
                owner[i] = part.part;
            });
            stroke_polygon(&part.polygon, w, h, BRUSH_RADIUS, |i| {
                pixels[i] = 0;
                owner[i] = INK_OWNER;
            });
        }
        Rendered {
            raster: RasterImage::new(self.width, self.height, pixels).expect("dimensions match"),
            owner,
        }
    }
}

/// Even-odd scanline fill sampling pixel centres.
fn fill_polygon(poly: &[[f64; 2]], w: usize, h: usize, mut paint: impl FnMut(usize)) {
    let n = poly.len();
    let mut xs: Vec<f64> = Vec::new();
    for y in 0..h {
        let cy = y as f64 + 0.5;
        xs.clear();
        for k in 0..n {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            if (p[1] <= cy) != (q[1] <= cy) {
                xs.push(p[0] + (cy - p[1]) / (q[1] - p[1]) * (q[0] - p[0]));
            }
        }
        xs.sort_by(f64::total_cmp);
        for span in xs.chunks_exact(2) {
            let x0 = (span[0] - 0.5).ceil().max(0.0) as usize;
            let x1 = (span[1] - 0.5).floor().min(w as f64 - 1.0);
            if x1 < 0.0 {
                continue;
            }
            for x in x0..=x1 as usize {
                paint(y * w + x);
            }
        }
    }
}

/// Paints every pixel whose centre lies within `radius` of the outline.
fn stroke_polygon(poly: &[[f64; 2]], w: usize, h: usize, radius: f64, mut paint: impl FnMut(usize)) {
    let n = poly.len();
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        let x0 = (p[0].min(q[0]) - radius - 1.0).floor().max(0.0) as usize;
        let x1 = (p[0].max(q[0]) + radius + 1.0).ceil().min(w as f64 - 1.0);
        let y0 = (p[1].min(q[1]) - radius - 1.0).floor().max(0.0) as usize;
        let y1 = (p[1].max(q[1]) + radius + 1.0).ceil().min(h as f64 - 1.0);
        if x1 < 0.0 || y1 < 0.0 {
            continue;
        }
        for y in y0..=y1 as usize {
            for x in x0..=x1 as usize {
                if segment_distance([x as f64 + 0.5, y as f64 + 0.5], p, q) <= radius {
                    paint(y * w + x);
                }
            }
        }
    }
}

fn segment_distance(c: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((c[0] - p[0]) * dx + (c[1] - p[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (p[0] + t * dx - c[0], p[1] + t * dy - c[1]);
    (ex * ex + ey * ey).sqrt()
}

/// Region id to part id for a labeled rendering, by majority vote over each
/// region's pixels. `None` when a part is split into several regions or the
/// paper falls apart into pockets, i.e. when the scene has no clean truth.
pub fn region_parts(graph: &RegionGraph, owner: &[u32]) -> Option<BTreeMap<u32, u32>> {
    let labels = graph.label_map().labels();
    let mut votes: BTreeMap<u32, BTreeMap<u32, u32>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != INK && owner[i] != INK_OWNER {
            *votes.entry(l).or_default().entry(owner[i]).or_default() += 1;
        }
    }
    let mut out = BTreeMap::new();
    let mut seen_parts: Vec<u32> = Vec::new();
    for region in graph.regions() {
        let tally = votes.get(&region.id)?;
        let (&part, _) = tally.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
        if seen_parts.contains(&part) {
            return None;
        }
        if (part == PAPER) != region.is_background {
            return None;
        }
        seen_parts.push(part);
        out.insert(region.id, part);
    }
    Some(out)
}

/// Reference pairing of character regions that show the same part.
pub fn reference_assignment(parts_a: &BTreeMap<u32, u32>, parts_b: &BTreeMap<u32, u32>) -> Assignment {
    let by_part_b: BTreeMap<u32, u32> = parts_b
        .iter()
        .filter(|(_, &p)| p != PAPER)
        .map(|(&r, &p)| (p, r))
        .collect();
    Assignment::from_pairs(
        parts_a
            .iter()
            .filter(|(_, &p)| p != PAPER)
            .filter_map(|(&r, p)| by_part_b.get(p).map(|&rb| (r, rb))),
    )
    .expect("parts are unique per frame")
}

/// Two drawings of the same parts.
#[derive(Clone, Debug)]
pub struct Scene {
    pub name: String,
    pub a: Drawing,
    pub b: Drawing,
}

// Shape outlines centred on the origin, roughly unit radius.

pub fn ellipse(rx: f64, ry: f64, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [rx * t.cos(), ry * t.sin()]
        })
        .collect()
}

pub fn disc() -> Vec<[f64; 2]> {
    ellipse(1.0, 1.0, 96)
}

pub fn rect(w: f64, h: f64) -> Vec<[f64; 2]> {
    vec![[-w / 2.0, -h / 2.0], [w / 2.0, -h / 2.0], [w / 2.0, h / 2.0], [-w / 2.0, h / 2.0]]
}

pub fn star(points: usize, inner: f64) -> Vec<[f64; 2]> {
    (0..2 * points)
        .map(|k| {
            let t = PI * k as f64 / points as f64 - PI / 2.0;
            let r = if k % 2 == 0 { 1.0 } else { inner };
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

/// Closed-shape classes with clearly separated moment signatures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeClass {
    Disc,
    Triangle,
    Bar,
    LShape,
    Cross,
    Star,
    Arrow,
    Chevron,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 8] = [
        ShapeClass::Disc,
        ShapeClass::Triangle,
        ShapeClass::Bar,
        ShapeClass::LShape,
        ShapeClass::Cross,
        ShapeClass::Star,
        ShapeClass::Arrow,
        ShapeClass::Chevron,
    ];

    /// Three-fold or higher rotational symmetry: every Hu invariant past
    /// the first vanishes, so these classes are told apart by spread alone.
    pub fn is_isotropic(&self) -> bool {
        matches!(self, ShapeClass::Disc | ShapeClass::Cross | ShapeClass::Star)
    }

    pub fn outline(&self) -> Vec<[f64; 2]> {
        match self {
            ShapeClass::Disc => disc(),
            ShapeClass::Triangle => vec![[0.0, -1.0], [0.95, 0.75], [-0.95, 0.75]],
            ShapeClass::Bar => rect(2.0, 0.66),
            ShapeClass::LShape => vec![[-0.8, -1.0], [-0.2, -1.0], [-0.2, 0.4], [0.8, 0.4], [0.8, 1.0], [-0.8, 1.0]],
            ShapeClass::Cross => vec![
                [-0.3, -1.0],
                [0.3, -1.0],
                [0.3, -0.3],
                [1.0, -0.3],
                [1.0, 0.3],
                [0.3, 0.3],
                [0.3, 1.0],
                [-0.3, 1.0],
                [-0.3, 0.3],
                [-1.0, 0.3],
                [-1.0, -0.3],
                [-0.3, -0.3],
            ],
            ShapeClass::Star => star(5, 0.5),
            ShapeClass::Arrow => vec![
                [-1.0, -0.25],
                [0.2, -0.25],
                [0.2, -0.7],
                [1.0, 0.0],
                [0.2, 0.7],
                [0.2, 0.25],
                [-1.0, 0.25],
            ],
            ShapeClass::Chevron => vec![[-1.0, -0.9], [-0.4, -0.9], [0.3, 0.0], [-0.4, 0.9], [-1.0, 0.9], [-0.3, 0.0]],
        }
    }
}

/// Scales, rotates (degrees) and translates an outline.
pub fn place(outline: &[[f64; 2]], scale: f64, rotation_deg: f64, at: [f64; 2]) -> Vec<[f64; 2]> {
    let (s, c) = rotation_deg.to_radians().sin_cos();
    outline
        .iter()
        .map(|p| {
            let (x, y) = (p[0] * scale, p[1] * scale);
            [at[0] + c * x - s * y, at[1] + s * x + c * y]
        })
        .collect()
}

fn rotate_about(p: [f64; 2], center: [f64; 2], deg: f64) -> [f64; 2] {
    let (s, c) = deg.to_radians().sin_cos();
    let (x, y) = (p[0] - center[0], p[1] - center[1]);
    [center[0] + c * x - s * y, center[1] + s * x + c * y]
}

fn polar(center: [f64; 2], r: f64, deg: f64) -> [f64; 2] {
    let t = deg.to_radians();
    [center[0] + r * t.cos(), center[1] + r * t.sin()]
}

/// Up to six separated shapes of distinct classes, at most one of them
/// isotropic (see [`ShapeClass::is_isotropic`]). Frame B moves each shape
/// by at most 15% of the frame size and rescales the whole frame by a
/// common factor in [0.8, 1.25].
pub fn separated_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 560.0;
    loop {
        let count = rng.random_range(2..=6usize);
        let mut classes = ShapeClass::ALL.to_vec();
        for k in (1..classes.len()).rev() {
            classes.swap(k, rng.random_range(0..=k));
        }
        let first_isotropic = classes.iter().position(ShapeClass::is_isotropic);
        let mut k = 0;
        classes.retain(|c| {
            k += 1;
            !c.is_isotropic() || Some(k - 1) == first_isotropic
        });
        classes.truncate(count);
        let frame_scale = rng.random_range(0.8..=1.25f64);
        let max_shift = 0.15 * size;
        let mut placed: Vec<(ShapeClass, f64, [f64; 2], [f64; 2])> = Vec::new();
        let mut ok = true;
        for &class in &classes {
            let radius = rng.random_range(34.0..58.0);
            let mut found = None;
            for _ in 0..200 {
                let margin = radius * 1.25 + 8.0;
                let pa = [rng.random_range(margin..size - margin), rng.random_range(margin..size - margin)];
                let shift = [rng.random_range(-max_shift..=max_shift), rng.random_range(-max_shift..=max_shift)];
                let centre = [size / 2.0, size / 2.0];
                let pb = [
                    centre[0] + (pa[0] + shift[0] - centre[0]) * frame_scale,
                    centre[1] + (pa[1] + shift[1] - centre[1]) * frame_scale,
                ];
                let rb = radius * frame_scale;
                let inside = |p: [f64; 2], r: f64| p[0] - r > 6.0 && p[1] - r > 6.0 && p[0] + r < size - 6.0 && p[1] + r < size - 6.0;
                if !inside(pb, rb * 1.05) {
                    continue;
                }
                let clear = placed.iter().all(|&(_, r, qa, qb)| {
                    let da = ((pa[0] - qa[0]).powi(2) + (pa[1] - qa[1]).powi(2)).sqrt();
                    let db = ((pb[0] - qb[0]).powi(2) + (pb[1] - qb[1]).powi(2)).sqrt();
                    da > (radius + r) * 1.45 + 10.0 && db > (radius + r) * frame_scale * 1.45 + 10.0
                });
                if clear {
                    found = Some((pa, pb));
                    break;
                }
            }
            match found {
                Some((pa, pb)) => placed.push((class, radius, pa, pb)),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let dim = size as u32;
        let mut a = Drawing::new(dim, dim);
        let mut b = Drawing::new(dim, dim);
        for (k, &(class, radius, pa, pb)) in placed.iter().enumerate() {
            let rot = rng.random_range(0.0..360.0);
            a.push(k as u32 + 1, place(&class.outline(), radius, rot, pa));
            b.push(k as u32 + 1, place(&class.outline(), radius * frame_scale, rot, pb));
        }
        return Scene {
            name: format!("separated-{seed}"),
            a,
            b,
        };
    }
}

/// A hub over identical petals. Frame B turns the whole flower by up to
/// 15 degrees and shifts it, so only the petal directions around the hub
/// tell the petals apart.
pub fn flower_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let petals = rng.random_range(4..=6usize);
    let turn = rng.random_range(6.0..15.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let phase = rng.random_range(0.0..360.0);
    let shift = [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)];
    let draw = |centre: [f64; 2], extra: f64| {
        let mut d = Drawing::new(400, 400);
        for k in 0..petals {
            let deg = phase + extra + 360.0 * k as f64 / petals as f64;
            d.push(k as u32 + 2, place(&ellipse(62.0, 24.0, 72), 1.0, deg, polar(centre, 88.0, deg)));
        }
        d.push(1, place(&disc(), 48.0, 0.0, centre));
        d
    };
    Scene {
        name: format!("flower-{seed}"),
        a: draw([200.0, 200.0], 0.0),
        b: draw([200.0 + shift[0], 200.0 + shift[1]], turn),
    }
}

/// A head followed by a chain of identical body segments, each partly
/// under the next. Frame B bends the chain slightly and moves it.
pub fn caterpillar_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments = rng.random_range(4..=6usize);
    let heading = rng.random_range(-20.0..20.0);
    let bend = rng.random_range(-8.0..8.0);
    let shift = [rng.random_range(-25.0..25.0), rng.random_range(-25.0..25.0)];
    let draw = |start: [f64; 2], heading: f64, bend: f64| {
        let mut d = Drawing::new(520, 320);
        let mut centres = vec![start];
        let mut dir = heading;
        for _ in 0..segments {
            let last = *centres.last().unwrap();
            centres.push(polar(last, 52.0, dir));
            dir += bend;
        }
        // Tail first so every segment sits on top of the one behind it.
        for (k, c) in centres.iter().enumerate().skip(1).rev() {
            d.push(k as u32 + 1, place(&disc(), 34.0, 0.0, *c));
        }
        d.push(1, place(&ellipse(44.0, 38.0, 96), 1.0, heading, centres[0]));
        d
    };
    let start = [90.0, 160.0];
    Scene {
        name: format!("caterpillar-{seed}"),
        a: draw(start, heading, 0.0),
        b: draw([start[0] + shift[0], start[1] + shift[1]], heading, bend),
    }
}

/// Part ids of the occlusion scene.
pub const OCC_HEAD: u32 = 1;
pub const OCC_BODY: u32 = 2;
pub const OCC_FRONT_ARM: u32 = 3;
pub const OCC_BACK_ARM: u32 = 4;

/// Body with one arm painted over it and one arm painted under it. Between
/// frames the arms swing so that each arm's new direction is closer to the
/// other arm's old direction; only the front/behind relation to the body
/// identifies them.
pub fn occlusion_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = rng.random_range(-10.0..10.0);
    let mirror = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let swing = rng.random_range(140.0..155.0) * mirror;
    let head_dir = if mirror > 0.0 { 270.0 } else { 90.0 };
    let draw = |front: f64, back: f64| {
        let mut d = Drawing::new(1000, 1000);
        let centre = [500.0, 500.0];
        let body_r = 220.0;
        let (arm_w, arm_len) = (70.0, 200.0);
        // Back arm: hidden under the body for its first part.
        let back_inner = body_r - 60.0;
        let back_len = arm_len + 60.0;
        d.push(
            OCC_BACK_ARM,
            place(&rect(back_len, arm_w), 1.0, back, polar(centre, back_inner + back_len / 2.0, back)),
        );
        d.push(OCC_BODY, place(&disc(), body_r, 0.0, centre));
        d.push(OCC_HEAD, place(&disc(), 90.0, 0.0, polar(centre, body_r + 50.0, head_dir)));
        // Front arm: painted over the body, starting inside it.
        let front_inner = body_r - 60.0;
        d.push(
            OCC_FRONT_ARM,
            place(&rect(arm_len, arm_w), 1.0, front, polar(centre, front_inner + arm_len / 2.0, front)),
        );
        d
    };
    Scene {
        name: format!("occlusion-{seed}"),
        a: draw(phi, phi + 180.0),
        b: draw(phi + swing, phi + 180.0 + swing),
    }
}

/// A T-junction fixture: `front` is painted over `behind`.
#[derive(Clone, Debug)]
pub struct DepthFixture {
    pub name: String,
    pub drawing: Drawing,
    pub front: u32,
    pub behind: u32,
}

pub fn depth_fixtures() -> Vec<DepthFixture> {
    let fixture = |name: &str, size: u32, behind: Vec<[f64; 2]>, front: Vec<[f64; 2]>| {
        let mut drawing = Drawing::new(size, size);
        drawing.push(2, behind).push(1, front);
        DepthFixture {
            name: name.to_string(),
            drawing,
            front: 1,
            behind: 2,
        }
    };
    vec![
        fixture(
            "rect-over-rect",
            900,
            place(&rect(420.0, 300.0), 1.0, 0.0, [360.0, 380.0]),
            place(&rect(360.0, 360.0), 1.0, 0.0, [560.0, 540.0]),
        ),
        fixture(
            "disc-over-rect",
            900,
            place(&rect(520.0, 320.0), 1.0, 0.0, [400.0, 360.0]),
            place(&disc(), 190.0, 0.0, [560.0, 560.0]),
        ),
        fixture(
            "rect-over-disc",
            900,
            place(&disc(), 230.0, 0.0, [380.0, 400.0]),
            place(&rect(300.0, 300.0), 1.0, 20.0, [600.0, 580.0]),
        ),
        fixture(
            "triangle-over-square",
            900,
            place(&rect(420.0, 420.0), 1.0, 0.0, [380.0, 380.0]),
            place(&ShapeClass::Triangle.outline(), 230.0, 0.0, [600.0, 600.0]),
        ),
        fixture(
            "ellipse-over-ellipse",
            900,
            place(&ellipse(260.0, 160.0, 128), 1.0, 10.0, [380.0, 360.0]),
            place(&ellipse(150.0, 240.0, 128), 1.0, -15.0, [590.0, 560.0]),
        ),
    ]
}

/// A robot-like character of 20 closed areas, with nested and repeated
/// parts (eyes inside the head, buttons on the body, mirrored limbs).
pub fn robot_character(offset: [f64; 2], arm_swing: f64) -> Drawing {
    let mut d = Drawing::new(480, 560);
    let at = |x: f64, y: f64| [x + offset[0], y + offset[1]];
    let mut id = 0u32;
    let mut next = || {
        id += 1;
        id
    };
    // Legs and feet under the body.
    d.push(next(), place(&rect(40.0, 110.0), 1.0, 0.0, at(200.0, 430.0)));
    d.push(next(), place(&rect(40.0, 110.0), 1.0, 0.0, at(280.0, 430.0)));
    d.push(next(), place(&ellipse(38.0, 18.0, 64), 1.0, 0.0, at(190.0, 492.0)));
    d.push(next(), place(&ellipse(38.0, 18.0, 64), 1.0, 0.0, at(290.0, 492.0)));
    // Arms behind the torso, hands on their ends.
    let l_dir = 160.0 - arm_swing;
    let r_dir = 20.0 + arm_swing;
    let shoulder_l = at(175.0, 255.0);
    let shoulder_r = at(305.0, 255.0);
    d.push(next(), place(&rect(130.0, 34.0), 1.0, l_dir, polar(shoulder_l, 60.0, l_dir)));
    d.push(next(), place(&rect(130.0, 34.0), 1.0, r_dir, polar(shoulder_r, 60.0, r_dir)));
    d.push(next(), place(&disc(), 24.0, 0.0, polar(shoulder_l, 135.0, l_dir)));
    d.push(next(), place(&disc(), 24.0, 0.0, polar(shoulder_r, 135.0, r_dir)));
    // Torso with a chest panel and buttons.
    d.push(next(), place(&rect(160.0, 190.0), 1.0, 0.0, at(240.0, 300.0)));
    d.push(next(), place(&rect(100.0, 70.0), 1.0, 0.0, at(240.0, 270.0)));
    d.push(next(), place(&disc(), 10.0, 0.0, at(240.0, 345.0)));
    d.push(next(), place(&star(5, 0.5), 16.0, 0.0, at(240.0, 375.0)));
    // Neck and head.
    d.push(next(), place(&rect(44.0, 40.0), 1.0, 0.0, at(240.0, 195.0)));
    d.push(next(), place(&rect(170.0, 120.0), 1.0, 0.0, at(240.0, 125.0)));
    d.push(next(), place(&disc(), 22.0, 0.0, at(205.0, 115.0)));
    d.push(next(), place(&disc(), 22.0, 0.0, at(275.0, 115.0)));
    d.push(next(), place(&disc(), 9.0, 0.0, at(205.0, 115.0)));
    d.push(next(), place(&disc(), 9.0, 0.0, at(275.0, 115.0)));
    d.push(next(), place(&rect(70.0, 14.0), 1.0, 0.0, at(240.0, 163.0)));
    // Antenna.
    d.push(next(), place(&ShapeClass::Triangle.outline(), 22.0, 0.0, at(240.0, 50.0)));
    d
}

/// A lattice of cells covering most of a square frame, for timing. With
/// `cells_per_side = 7` this is 49 character regions.
pub fn grid_drawing(size: u32, cells_per_side: u32, jitter_seed: u64) -> Drawing {
    let mut rng = ChaCha8Rng::seed_from_u64(jitter_seed);
    let mut d = Drawing::new(size, size);
    let margin = size as f64 * 0.06;
    let cell = (size as f64 - 2.0 * margin) / cells_per_side as f64;
    let mut id = 0;
    for row in 0..cells_per_side {
        for col in 0..cells_per_side {
            id += 1;
            let cx = margin + (col as f64 + 0.5) * cell;
            let cy = margin + (row as f64 + 0.5) * cell;
            let class = ShapeClass::ALL[(id as usize) % ShapeClass::ALL.len()];
            let r = cell * rng.random_range(0.3..0.42);
            d.push(id, place(&class.outline(), r, rng.random_range(0.0..360.0), [cx, cy]));
        }
    }
    d
}

/// Translates every part of a drawing.
pub fn translated(d: &Drawing, dx: f64, dy: f64) -> Drawing {
    Drawing {
        width: d.width,
        height: d.height,
        parts: d
            .parts
            .iter()
            .map(|p| Part {
                part: p.part,
                polygon: p.polygon.iter().map(|q| [q[0] + dx, q[1] + dy]).collect(),
            })
            .collect(),
    }
}

/// Rotates every part of a drawing about `center`.
pub fn rotated(d: &Drawing, center: [f64; 2], deg: f64) -> Drawing {
    Drawing {
        width: d.width,
        height: d.height,
        parts: d
            .parts
            .iter()
            .map(|p| Part {
                part: p.part,
                polygon: p.polygon.iter().map(|&q| rotate_about(q, center, deg)).collect(),
            })
            .collect(),
    }
}
