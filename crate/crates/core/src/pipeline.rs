//! End-to-end analysis of a keyframe pair.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::depth::{build_depth_graph, detect_junctions, DepthConfig, DepthGraph, Junction};
use crate::error::{Error, Result};
use crate::label::{ingest, IngestConfig, RegionGraph};
use crate::matcher::{Correspondence, MatchConfig, MatchOutcome, Matcher, Mode, Pin, ScoreRule};
use crate::raster::{load_grayscale, RasterImage};
use crate::shape::HU_MOMENTS;
use crate::stroke::{extract_strokes, match_strokes, StrokeMatching, StrokeSet};

/// All tunables, loadable from a TOML file. Missing keys take defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub threshold: u8,
    pub median_kernel: usize,
    pub min_region_area: u32,
    pub max_ink_thickness: u32,
    pub angle_const_a: f64,
    pub situation_const_s: f64,
    pub mode: Mode,
    pub score_rule: ScoreRule,
    pub shape_scorer: String,
    pub moment_floor: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let ingest = IngestConfig::default();
        let matching = MatchConfig::default();
        Self {
            threshold: ingest.threshold,
            median_kernel: ingest.median_kernel,
            min_region_area: ingest.min_region_area,
            max_ink_thickness: ingest.max_ink_thickness,
            angle_const_a: matching.angle_const_a,
            situation_const_s: matching.situation_const_s,
            mode: matching.mode,
            score_rule: matching.score_rule,
            shape_scorer: HU_MOMENTS.to_string(),
            moment_floor: matching.moment_floor,
        }
    }
}

impl EngineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.median_kernel == 0 || self.median_kernel.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "median kernel must be odd and positive, got {}",
                self.median_kernel
            )));
        }
        self.matching().validate()
    }

    pub fn ingest(&self) -> IngestConfig {
        IngestConfig {
            threshold: self.threshold,
            median_kernel: self.median_kernel,
            min_region_area: self.min_region_area,
            max_ink_thickness: self.max_ink_thickness,
        }
    }

    pub fn matching(&self) -> MatchConfig {
        MatchConfig {
            angle_const_a: self.angle_const_a,
            situation_const_s: self.situation_const_s,
            mode: self.mode,
            score_rule: self.score_rule,
            shape_scorer: self.shape_scorer.clone(),
            moment_floor: self.moment_floor,
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }
}

/// One analyzed keyframe.
#[derive(Clone, Debug)]
pub struct Keyframe {
    pub raster: RasterImage,
    pub graph: RegionGraph,
    pub junctions: Vec<Junction>,
    pub depth: DepthGraph,
    pub strokes: StrokeSet,
}

/// Labels a keyframe, orders its regions by depth and extracts strokes.
/// `frame` names the keyframe in errors.
pub fn analyze_keyframe(raster: RasterImage, cfg: &EngineConfig, frame: &'static str) -> Result<Keyframe> {
    let graph = ingest(&raster, &cfg.ingest())?;
    if graph.character_ids().is_empty() {
        return Err(Error::NoRegions(frame));
    }
    let junctions = detect_junctions(&graph, &DepthConfig::default());
    let depth = build_depth_graph(&graph.character_ids(), graph.background(), &junctions);
    let strokes = extract_strokes(&graph, &junctions);
    Ok(Keyframe {
        raster,
        graph,
        junctions,
        depth,
        strokes,
    })
}

/// Analysis of a keyframe pair plus the current correspondence.
#[derive(Debug)]
pub struct Analysis {
    pub a: Keyframe,
    pub b: Keyframe,
    pub config: EngineConfig,
    matcher: Matcher,
    pub outcome: MatchOutcome,
    pub strokes: StrokeMatching,
}

impl Analysis {
    /// Runs the whole pipeline. The two keyframes are analyzed in parallel.
    pub fn run(a: RasterImage, b: RasterImage, config: &EngineConfig, pins: &[Pin]) -> Result<Self> {
        config.validate()?;
        let (ka, kb) = std::thread::scope(|s| {
            let ha = s.spawn(|| analyze_keyframe(a, config, "A"));
            let kb = analyze_keyframe(b, config, "B");
            (ha.join().expect("keyframe analysis panicked"), kb)
        });
        Self::from_keyframes(ka?, kb?, config, pins)
    }

    /// Decodes two images and runs the pipeline.
    pub fn from_png(a: &[u8], b: &[u8], config: &EngineConfig, pins: &[Pin]) -> Result<Self> {
        Self::run(load_grayscale(a)?, load_grayscale(b)?, config, pins)
    }

    pub fn from_keyframes(a: Keyframe, b: Keyframe, config: &EngineConfig, pins: &[Pin]) -> Result<Self> {
        let matcher = Matcher::new(&a.graph, &a.depth, &b.graph, &b.depth, config.matching())?;
        let outcome = matcher.run(pins)?;
        let strokes = match_strokes(&a.strokes, &b.strokes, &outcome.correspondence);
        Ok(Self {
            a,
            b,
            config: config.clone(),
            matcher,
            outcome,
            strokes,
        })
    }

    pub fn correspondence(&self) -> &Correspondence {
        &self.outcome.correspondence
    }

    pub fn matcher(&self) -> &Matcher {
        &self.matcher
    }

    /// Re-runs the matcher and stroke matching with a new pin set. On error
    /// the previous result is kept.
    pub fn rematch(&mut self, pins: &[Pin]) -> Result<&Correspondence> {
        let outcome = self.matcher.run(pins)?;
        self.strokes = match_strokes(&self.a.strokes, &self.b.strokes, &outcome.correspondence);
        self.outcome = outcome;
        Ok(&self.outcome.correspondence)
    }
}
