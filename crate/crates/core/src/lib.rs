//! Closed-area and stroke correspondence between two raster keyframes of
//! hand-drawn animation.
//!
//! The pipeline labels the white areas enclosed by ink, orders them by depth
//! from junction evidence, pairs areas across keyframes with a greedy
//! seed-and-propagate matcher, and derives stroke pairs for inbetweening.

pub mod depth;
pub mod error;
pub mod eval;
pub mod label;
pub mod matcher;
pub mod pipeline;
pub mod raster;
pub mod session;
pub mod shape;
pub mod stroke;
pub mod synth;

pub use depth::{DepthGraph, Junction, RelativeDepth};
pub use error::{Error, Result};
pub use eval::{area_match, count_corrections, line_match, Assignment, CorrectionEvent, EvalReport, Side};
pub use label::{IngestConfig, LabelMap, Region, RegionGraph};
pub use matcher::{greedy_match, rematch_with_pins, Correspondence, MatchConfig, MatchedPair, Matcher, Mode, Pin, Provenance, ScoreRule};
pub use pipeline::{analyze_keyframe, Analysis, EngineConfig, Keyframe};
pub use raster::{load_grayscale, RasterImage};
pub use session::{Session, SessionState, SessionStore};
pub use stroke::{Stroke, StrokeMatching, StrokePair, StrokeSet};
