#![allow(dead_code)]

use cellmatch_core::pipeline::{analyze_keyframe, EngineConfig};
use cellmatch_core::synth::{reference_assignment, region_parts, robot_character, Drawing};
use cellmatch_core::RasterImage;

pub fn robot_pair() -> (Drawing, Drawing) {
    (robot_character([0.0, 0.0], 0.0), robot_character([14.0, 8.0], 12.0))
}

pub fn png(d: &Drawing) -> Vec<u8> {
    d.render().raster.to_png().unwrap()
}

pub fn blank_png() -> Vec<u8> {
    RasterImage::filled(64, 64, 255).to_png().unwrap()
}

/// Ground-truth region pairs from the part ownership of both renders.
pub fn reference_pairs(a: &Drawing, b: &Drawing) -> Vec<(u32, u32)> {
    let cfg = EngineConfig::default();
    let parts = |d: &Drawing, frame| {
        let r = d.render();
        let kf = analyze_keyframe(r.raster, &cfg, frame).unwrap();
        region_parts(&kf.graph, &r.owner).expect("every region maps to one part")
    };
    reference_assignment(&parts(a, "A"), &parts(b, "B")).pairs().collect()
}
