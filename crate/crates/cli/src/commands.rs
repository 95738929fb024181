//! The `match` subcommand: run the pipeline on two files and write every
//! artifact to an output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cellmatch_core::eval::{
    area_match, count_corrections, greedy_correction_log, line_match, mismatched_slots, report_table, Assignment,
    EvalReport,
};
use cellmatch_core::matcher::Mode;
use cellmatch_core::pipeline::{Analysis, EngineConfig};
use cellmatch_core::session::Session;
use cellmatch_core::stroke::{StrokeMatching, StrokeSet};
use cellmatch_core::{Error, Side};

use crate::versioned;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },

    #[error("reference {}: {message}", path.display())]
    Reference { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 2 for unreadable inputs, 3 when a keyframe has no closed regions,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Core(Error::Format(_)) => 2,
            CliError::Core(Error::NoRegions(_)) => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatchArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    pub mode: Option<Mode>,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub reference: Option<PathBuf>,
    /// Number of inbetween frames to render, keyframes included.
    pub frames: Option<usize>,
}

/// Ground-truth pairs for evaluation. Stroke pairs are optional; without
/// them no stroke accuracy is reported.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub pairs: Vec<(u32, u32)>,
    #[serde(default)]
    pub stroke_pairs: Option<Vec<(u32, u32)>>,
}

#[derive(Debug)]
pub struct MatchSummary {
    pub out: PathBuf,
    pub files: Vec<PathBuf>,
    pub report: Option<EvalReport>,
}

#[derive(Serialize)]
struct StrokesDoc<'a> {
    strokes_a: &'a StrokeSet,
    strokes_b: &'a StrokeSet,
    matching: &'a StrokeMatching,
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_output(path: PathBuf, bytes: &[u8], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    std::fs::write(&path, bytes).map_err(|e| CliError::Output {
        path: path.clone(),
        message: e.to_string(),
    })?;
    files.push(path);
    Ok(())
}

pub fn load_reference(path: &Path) -> Result<ReferenceFile, CliError> {
    let text = std::fs::read(path).map_err(|e| CliError::Reference {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_slice(&text).map_err(|e| CliError::Reference {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn run_match(args: &MatchArgs) -> Result<MatchSummary, CliError> {
    let mut config = match &args.config {
        Some(path) => EngineConfig::load(path)?,
        None => EngineConfig::default(),
    };
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    let session = Session::create(read_input(&args.a)?, read_input(&args.b)?, &config)?;
    let analysis = session.analysis();

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Output {
        path: args.out.clone(),
        message: e.to_string(),
    })?;
    let mut files = Vec::new();
    let json = |v: serde_json::Value| serde_json::to_vec_pretty(&v).expect("json");
    write_output(
        args.out.join("correspondence.json"),
        &json(versioned(analysis.correspondence())),
        &mut files,
    )?;
    let strokes = StrokesDoc {
        strokes_a: &analysis.a.strokes,
        strokes_b: &analysis.b.strokes,
        matching: &analysis.strokes,
    };
    write_output(args.out.join("strokes.json"), &json(versioned(&strokes)), &mut files)?;
    write_output(args.out.join("overlay_a.png"), &session.overlay_png(Side::A)?, &mut files)?;
    write_output(args.out.join("overlay_b.png"), &session.overlay_png(Side::B)?, &mut files)?;
    write_output(args.out.join("strokes.svg"), session.stroke_overlay_svg().as_bytes(), &mut files)?;
    if let Some(frames) = args.frames {
        let svg = session.inbetween_svg(0.5, frames)?;
        write_output(args.out.join("inbetween.svg"), svg.as_bytes(), &mut files)?;
    }

    let report = match &args.reference {
        Some(path) => {
            let reference = load_reference(path)?;
            let report = evaluate(analysis, &reference).map_err(|e| match e {
                CliError::Core(Error::Parameter(m)) => CliError::Reference {
                    path: path.clone(),
                    message: m,
                },
                other => other,
            })?;
            write_output(args.out.join("report.json"), &json(versioned(&report)), &mut files)?;
            let table = report_table(&[(args.a.display().to_string(), report.clone())]);
            write_output(args.out.join("report.txt"), table.as_bytes(), &mut files)?;
            Some(report)
        }
        None => None,
    };
    Ok(MatchSummary {
        out: args.out.clone(),
        files,
        report,
    })
}

/// Scores an analysis against a reference: area and stroke accuracy, and
/// the number of pins a user would need, pinning one wrong region at a time.
pub fn evaluate(analysis: &Analysis, reference: &ReferenceFile) -> Result<EvalReport, CliError> {
    let truth = Assignment::from_pairs(reference.pairs.iter().copied())?;
    let ids_a = analysis.a.graph.character_ids();
    let ids_b = analysis.b.graph.character_ids();
    let auto = analysis.correspondence().assignment();
    let area = area_match(&auto, &truth, &ids_a, &ids_b)?;
    let line = match &reference.stroke_pairs {
        Some(pairs) => {
            let truth = Assignment::from_pairs(pairs.iter().copied())?;
            let auto = Assignment::from_pairs(analysis.strokes.id_pairs())?;
            Some(line_match(&auto, &truth, &analysis.a.strokes.ids(), &analysis.b.strokes.ids())?)
        }
        None => None,
    };
    let matcher = analysis.matcher();
    let rematch = |pins: &[cellmatch_core::Pin]| Ok(matcher.run(pins)?.correspondence.assignment());
    let log = greedy_correction_log(&truth, &ids_a, &ids_b, rematch)?;
    let corrections = count_corrections(&log, &truth, &ids_a, &ids_b, rematch)?;
    Ok(EvalReport {
        mode: analysis.config.mode,
        area_match: area,
        line_match: line,
        corrections,
        mismatches: mismatched_slots(&auto, &truth, &ids_a, &ids_b, false),
    })
}
