//! Correction sessions: a keyframe pair, its analysis, and the log of user
//! pins, with persistence to a directory store.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{replay_pins, CorrectionEvent, Side};
use crate::label::{overlay_png, RegionGraph};
use crate::matcher::{Correspondence, Pin, Provenance};
use crate::pipeline::{Analysis, EngineConfig};
use crate::stroke::{inbetween_svg, inbetween_times, stroke_overlay_svg, StrokeMatching};

/// Version tag written into every persisted or served JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the session store directory.
pub const STORE_ENV: &str = "CELLMATCH_STORE";

/// Display color of regions without a partner.
pub const UNMATCHED_COLOR: [u8; 3] = [160, 160, 160];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedEvent {
    #[serde(flatten)]
    pub event: CorrectionEvent,
    pub at_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

#[derive(Debug)]
pub struct Session {
    id: String,
    png_a: Vec<u8>,
    png_b: Vec<u8>,
    analysis: Analysis,
    pins: Vec<Pin>,
    log: Vec<LoggedEvent>,
    created_ms: u64,
    updated_ms: u64,
}

impl Session {
    /// Decodes both keyframes and runs the full pipeline under a fresh id.
    pub fn create(png_a: Vec<u8>, png_b: Vec<u8>, config: &EngineConfig) -> Result<Self> {
        Self::with_id(uuid::Uuid::new_v4().to_string(), png_a, png_b, config)
    }

    pub fn with_id(id: String, png_a: Vec<u8>, png_b: Vec<u8>, config: &EngineConfig) -> Result<Self> {
        validate_id(&id)?;
        let analysis = Analysis::from_png(&png_a, &png_b, config, &[])?;
        let now = now_ms();
        Ok(Self {
            id,
            png_a,
            png_b,
            analysis,
            pins: Vec::new(),
            log: Vec::new(),
            created_ms: now,
            updated_ms: now,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &EngineConfig {
        &self.analysis.config
    }

    pub fn analysis(&self) -> &Analysis {
        &self.analysis
    }

    pub fn correspondence(&self) -> &Correspondence {
        self.analysis.correspondence()
    }

    pub fn strokes(&self) -> &StrokeMatching {
        &self.analysis.strokes
    }

    pub fn pins(&self) -> &[Pin] {
        &self.pins
    }

    pub fn log(&self) -> &[LoggedEvent] {
        &self.log
    }

    pub fn png(&self, side: Side) -> &[u8] {
        match side {
            Side::A => &self.png_a,
            Side::B => &self.png_b,
        }
    }

    /// Adds a pin and re-runs the matcher. Pins may not share a region with
    /// an existing pin; unpin first to move one.
    pub fn pin(&mut self, a: u32, b: u32) -> Result<&Correspondence> {
        self.analysis.matcher().validate_pins(&[Pin { a, b }])?;
        if let Some(p) = self.pins.iter().find(|p| p.a == a || p.b == b) {
            return Err(Error::PinConflict(format!(
                "({a}, {b}) overlaps existing pin ({}, {})",
                p.a, p.b
            )));
        }
        let mut pins = self.pins.clone();
        pins.push(Pin { a, b });
        self.analysis.rematch(&pins)?;
        self.pins = pins;
        self.record(CorrectionEvent::Pin { a, b });
        Ok(self.analysis.correspondence())
    }

    /// Removes the pin on A region `a` and re-runs the matcher.
    pub fn unpin(&mut self, a: u32) -> Result<&Correspondence> {
        if !self.pins.iter().any(|p| p.a == a) {
            return Err(Error::NotPinned(a));
        }
        let pins: Vec<Pin> = self.pins.iter().copied().filter(|p| p.a != a).collect();
        self.analysis.rematch(&pins)?;
        self.pins = pins;
        self.record(CorrectionEvent::Unpin { a });
        Ok(self.analysis.correspondence())
    }

    fn record(&mut self, event: CorrectionEvent) {
        self.updated_ms = now_ms();
        self.log.push(LoggedEvent {
            event,
            at_ms: self.updated_ms,
        });
    }

    /// Correspondence obtained by replaying the event log from scratch.
    pub fn replay(&self) -> Result<Correspondence> {
        let events: Vec<CorrectionEvent> = self.log.iter().map(|e| e.event).collect();
        Ok(self.analysis.matcher().run(&replay_pins(&events))?.correspondence)
    }

    /// SHA-256 over the canonical JSON of everything except timestamps.
    pub fn state_hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            schema_version: u32,
            config: &'a EngineConfig,
            pins: &'a [Pin],
            events: Vec<CorrectionEvent>,
            correspondence: &'a Correspondence,
            depth_a: &'a BTreeMap<u32, u32>,
            depth_b: &'a BTreeMap<u32, u32>,
            stroke_pairs: Vec<(u32, u32)>,
        }
        let hashed = Hashed {
            schema_version: SCHEMA_VERSION,
            config: self.config(),
            pins: &self.pins,
            events: self.log.iter().map(|e| e.event).collect(),
            correspondence: self.correspondence(),
            depth_a: &self.analysis.a.depth.rank,
            depth_b: &self.analysis.b.depth.rank,
            stroke_pairs: self.analysis.strokes.id_pairs(),
        };
        let bytes = serde_json::to_vec(&hashed).expect("state serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Pair color of a region: A regions keep their own color, B regions
    /// take their partner's, unpaired regions are gray.
    pub fn pair_color(&self, side: Side, id: u32) -> [u8; 3] {
        let corr = self.correspondence();
        let (graph_a, graph_b) = (&self.analysis.a.graph, &self.analysis.b.graph);
        let color_a = |a: u32| graph_a.region(a).map_or(UNMATCHED_COLOR, |r| r.display_color);
        match side {
            Side::A => corr.partner_of_a(id).map_or(UNMATCHED_COLOR, |_| color_a(id)),
            Side::B => {
                if graph_b.background() == Some(id) {
                    return graph_b.region(id).map_or(UNMATCHED_COLOR, |r| r.display_color);
                }
                corr.partner_of_b(id).map_or(UNMATCHED_COLOR, color_a)
            }
        }
    }

    /// Label overlay in pair colors; the palette index is the region id.
    pub fn overlay_png(&self, side: Side) -> Result<Vec<u8>> {
        let graph = self.graph(side);
        overlay_png(graph.label_map(), |id| self.pair_color(side, id))
    }

    fn graph(&self, side: Side) -> &RegionGraph {
        match side {
            Side::A => &self.analysis.a.graph,
            Side::B => &self.analysis.b.graph,
        }
    }

    pub fn stroke_overlay_svg(&self) -> String {
        let (a, b) = (&self.analysis.a, &self.analysis.b);
        stroke_overlay_svg(
            &a.strokes,
            &b.strokes,
            &self.analysis.strokes,
            (a.raster.width(), a.raster.height()),
            (b.raster.width(), b.raster.height()),
        )
    }

    /// Inbetween frames as one SVG document; see [`inbetween_times`].
    pub fn inbetween_svg(&self, t: f64, frames: usize) -> Result<String> {
        let ts = inbetween_times(t, frames)?;
        let (a, b) = (&self.analysis.a.raster, &self.analysis.b.raster);
        let size = (a.width().max(b.width()), a.height().max(b.height()));
        inbetween_svg(&self.analysis.strokes.pairs, &ts, size)
    }

    pub fn state(&self) -> SessionState {
        let corr = self.correspondence();
        let score_of = |a: u32| corr.pairs.iter().find(|p| p.a == a);
        let views = |side: Side| {
            let graph = self.graph(side);
            let depth = match side {
                Side::A => &self.analysis.a.depth,
                Side::B => &self.analysis.b.depth,
            };
            graph
                .regions()
                .iter()
                .map(|r| {
                    let partner = match side {
                        Side::A => corr.partner_of_a(r.id),
                        Side::B => corr.partner_of_b(r.id),
                    };
                    let pair = match (side, partner) {
                        (Side::A, Some(_)) => score_of(r.id),
                        (Side::B, Some(a)) => score_of(a),
                        _ => None,
                    };
                    RegionView {
                        id: r.id,
                        area: r.area,
                        centroid: r.centroid,
                        bbox: r.bbox,
                        is_background: r.is_background,
                        display_color: r.display_color,
                        pair_color: self.pair_color(side, r.id),
                        partner,
                        provenance: pair.map(|p| p.provenance),
                        score: pair.map(|p| p.score),
                        shape_score: pair.map(|p| p.shape_score),
                        depth_rank: depth.rank.get(&r.id).copied(),
                        neighbors: r.neighbors.iter().map(|n| n.id).collect(),
                    }
                })
                .collect()
        };
        SessionState {
            schema_version: SCHEMA_VERSION,
            id: self.id.clone(),
            config: self.config().clone(),
            regions_a: views(Side::A),
            regions_b: views(Side::B),
            correspondence: corr.clone(),
            pins: self.pins.clone(),
            events: self.log.len(),
            state_hash: self.state_hash(),
            created_ms: self.created_ms,
            updated_ms: self.updated_ms,
        }
    }
}

/// Served view of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub schema_version: u32,
    pub id: String,
    pub config: EngineConfig,
    pub regions_a: Vec<RegionView>,
    pub regions_b: Vec<RegionView>,
    pub correspondence: Correspondence,
    pub pins: Vec<Pin>,
    pub events: usize,
    pub state_hash: String,
    pub created_ms: u64,
    pub updated_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionView {
    pub id: u32,
    pub area: u32,
    pub centroid: [f64; 2],
    pub bbox: [u32; 4],
    pub is_background: bool,
    pub display_color: [u8; 3],
    pub pair_color: [u8; 3],
    pub partner: Option<u32>,
    pub provenance: Option<Provenance>,
    pub score: Option<f64>,
    pub shape_score: Option<f64>,
    pub depth_rank: Option<u32>,
    pub neighbors: Vec<u32>,
}

/// Ids become directory names, so only a conservative alphabet is allowed.
fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!("invalid session id {id:?}")))
    }
}

#[derive(Serialize, Deserialize)]
struct PersistedSession {
    schema_version: u32,
    id: String,
    config: EngineConfig,
    pins: Vec<Pin>,
    log: Vec<LoggedEvent>,
    created_ms: u64,
    updated_ms: u64,
    correspondence: Correspondence,
    state_hash: String,
}

/// Directory of sessions, one subdirectory per id holding `a.png`,
/// `b.png` and `session.json`.
#[derive(Clone, Debug)]
pub struct SessionStore {
    root: PathBuf,
}

impl SessionStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Store rooted at `$CELLMATCH_STORE`, or `./cellmatch-store`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(STORE_ENV).map_or_else(|| PathBuf::from("cellmatch-store"), PathBuf::from))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf> {
        validate_id(id)?;
        Ok(self.root.join(id))
    }

    pub fn save(&self, session: &Session) -> Result<PathBuf> {
        let dir = self.dir(&session.id)?;
        let store_err = |path: &Path, e: std::io::Error| Error::Store {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(&dir).map_err(|e| store_err(&dir, e))?;
        let doc = PersistedSession {
            schema_version: SCHEMA_VERSION,
            id: session.id.clone(),
            config: session.config().clone(),
            pins: session.pins.clone(),
            log: session.log.clone(),
            created_ms: session.created_ms,
            updated_ms: session.updated_ms,
            correspondence: session.correspondence().clone(),
            state_hash: session.state_hash(),
        };
        let json = serde_json::to_vec_pretty(&doc).expect("session serializes");
        for (name, bytes) in [("a.png", &session.png_a), ("b.png", &session.png_b), ("session.json", &json)] {
            let path = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            std::fs::write(&tmp, bytes).map_err(|e| store_err(&tmp, e))?;
            std::fs::rename(&tmp, &path).map_err(|e| store_err(&path, e))?;
        }
        log::debug!("saved session {} to {}", session.id, dir.display());
        Ok(dir)
    }

    /// Loads a session and re-runs the pipeline, failing unless the result
    /// reproduces the stored correspondence and state hash exactly.
    pub fn load(&self, id: &str) -> Result<Session> {
        let dir = self.dir(id)?;
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read(&path).map_err(|e| Error::Store {
                path: path.clone(),
                message: e.to_string(),
            })
        };
        let corrupt = |name: &str, message: String| Error::Store {
            path: dir.join(name),
            message,
        };
        let json = read("session.json")?;
        let png_a = read("a.png")?;
        let png_b = read("b.png")?;
        let doc: PersistedSession =
            serde_json::from_slice(&json).map_err(|e| corrupt("session.json", e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(corrupt(
                "session.json",
                format!("schema version {} is not supported", doc.schema_version),
            ));
        }
        if doc.id != id {
            return Err(corrupt("session.json", format!("holds session {:?}", doc.id)));
        }
        let analysis = Analysis::from_png(&png_a, &png_b, &doc.config, &doc.pins).map_err(|e| match e {
            Error::Format(m) => corrupt("a.png or b.png", m),
            other => other,
        })?;
        let session = Session {
            id: doc.id,
            png_a,
            png_b,
            analysis,
            pins: doc.pins,
            log: doc.log,
            created_ms: doc.created_ms,
            updated_ms: doc.updated_ms,
        };
        if session.correspondence() != &doc.correspondence {
            return Err(corrupt("session.json", "stored correspondence does not reproduce".into()));
        }
        if session.state_hash() != doc.state_hash {
            return Err(corrupt("session.json", "state hash mismatch".into()));
        }
        Ok(session)
    }

    /// Whether a session with this id has been saved.
    pub fn contains(&self, id: &str) -> bool {
        self.dir(id).is_ok_and(|d| d.join("session.json").is_file())
    }

    /// Ids of stored sessions, sorted.
    pub fn ids(&self) -> Result<Vec<String>> {
        let entries = match std::fs::read_dir(&self.root) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => {
                return Err(Error::Store {
                    path: self.root.clone(),
                    message: e.to_string(),
                })
            }
        };
        let mut ids: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join("session.json").is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        ids.sort();
        Ok(ids)
    }
}
