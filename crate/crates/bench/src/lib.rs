//! Benchmark inputs shared by the criterion targets.

use cellmatch_core::synth::{grid_drawing, robot_character, translated};
use cellmatch_core::RasterImage;

/// A `size`-square lattice keyframe pair with `cells²` regions; B is A
/// shifted by a few pixels.
pub fn grid_frames(size: u32, cells: u32) -> (RasterImage, RasterImage) {
    let a = grid_drawing(size, cells, 7);
    let b = translated(&a, 9.0, -6.0);
    (a.render().raster, b.render().raster)
}

/// The 20-part robot in two poses.
pub fn robot_frames() -> (RasterImage, RasterImage) {
    let a = robot_character([0.0, 0.0], 0.0);
    let b = robot_character([14.0, 8.0], 12.0);
    (a.render().raster, b.render().raster)
}
