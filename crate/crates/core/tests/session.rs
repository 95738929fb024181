use cellmatch_core::eval::CorrectionEvent;
use cellmatch_core::pipeline::EngineConfig;
use cellmatch_core::session::{Session, SessionStore, SCHEMA_VERSION};
use cellmatch_core::synth::robot_character;
use cellmatch_core::{Error, Mode, RasterImage, Side};

fn robot_session() -> Session {
    let a = robot_character([0.0, 0.0], 0.0).render().raster.to_png().unwrap();
    let b = robot_character([14.0, 8.0], 12.0).render().raster.to_png().unwrap();
    Session::create(a, b, &EngineConfig::default()).unwrap()
}

fn ids(s: &Session) -> (Vec<u32>, Vec<u32>) {
    let an = s.analysis();
    (an.a.graph.character_ids(), an.b.graph.character_ids())
}

#[test]
fn pin_unpin_and_replay_agree() {
    let mut s = robot_session();
    let (a, b) = ids(&s);
    let original = s.correspondence().clone();
    let hash0 = s.state_hash();
    s.pin(a[0], b[2]).unwrap();
    assert_eq!(s.correspondence().partner_of_a(a[0]), Some(b[2]));
    assert_eq!(s.replay().unwrap(), *s.correspondence());
    assert!(matches!(s.pin(a[0], b[3]), Err(Error::PinConflict(_))));
    assert!(matches!(s.pin(a[1], b[2]), Err(Error::PinConflict(_))));
    assert!(matches!(s.pin(9_999, b[4]), Err(Error::UnknownRegion { .. })));
    assert!(matches!(s.unpin(a[1]), Err(Error::NotPinned(_))));
    s.unpin(a[0]).unwrap();
    assert_eq!(*s.correspondence(), original);
    assert_eq!(s.log().len(), 2);
    assert_eq!(s.log()[0].event, CorrectionEvent::Pin { a: a[0], b: b[2] });
    assert_ne!(s.state_hash(), hash0, "the event log is part of the state");
}

#[test]
fn save_and_restore_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::new(dir.path());
    let mut s = robot_session();
    let (a, b) = ids(&s);
    s.pin(a[3], b[5]).unwrap();
    let path = store.save(&s).unwrap();
    for name in ["a.png", "b.png", "session.json"] {
        assert!(path.join(name).is_file());
    }
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(path.join("session.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], SCHEMA_VERSION);

    let restored = store.load(s.id()).unwrap();
    assert_eq!(restored.state_hash(), s.state_hash());
    assert_eq!(restored.state(), s.state());
    assert_eq!(restored.pins(), s.pins());
    assert_eq!(restored.png(Side::A), s.png(Side::A));
    assert!(store.contains(s.id()));
    assert_eq!(store.ids().unwrap(), vec![s.id().to_string()]);
}

#[test]
fn sessions_share_a_store_independently() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::new(dir.path());
    let mut first = robot_session();
    let a = robot_character([0.0, 0.0], 0.0).render().raster.to_png().unwrap();
    let cfg = EngineConfig::default().with_mode(Mode::S);
    let second = Session::with_id("second-session".into(), a.clone(), a, &cfg).unwrap();
    let (ia, ib) = ids(&first);
    first.pin(ia[0], ib[1]).unwrap();
    store.save(&first).unwrap();
    store.save(&second).unwrap();
    let mut listed = vec![first.id().to_string(), "second-session".to_string()];
    listed.sort();
    assert_eq!(store.ids().unwrap(), listed);
    assert_eq!(store.load(first.id()).unwrap().state_hash(), first.state_hash());
    let back = store.load("second-session").unwrap();
    assert_eq!(back.config().mode, Mode::S);
    assert!(back.pins().is_empty());
}

#[test]
fn restore_reports_the_broken_file() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::new(dir.path());
    let s = robot_session();
    let path = store.save(&s).unwrap();

    std::fs::remove_file(path.join("b.png")).unwrap();
    match store.load(s.id()) {
        Err(Error::Store { path, .. }) => assert!(path.ends_with("b.png")),
        other => panic!("expected a store error, got {:?}", other.map(|s| s.id().to_string())),
    }

    store.save(&s).unwrap();
    let json = path.join("session.json");
    let text = std::fs::read_to_string(&json).unwrap();
    std::fs::write(&json, text.replacen(&format!("\"schema_version\": {SCHEMA_VERSION}"), "\"schema_version\": 99", 1)).unwrap();
    let Err(err) = store.load(s.id()) else { panic!("schema mismatch accepted") };
    assert!(err.to_string().contains("schema version 99"), "{err}");

    std::fs::write(&json, "{ not json").unwrap();
    assert!(matches!(store.load(s.id()), Err(Error::Store { .. })));
    assert!(matches!(store.load("../escape"), Err(Error::Parameter(_))));
    assert!(!store.contains("missing"));
}

#[test]
fn tampered_state_hash_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::new(dir.path());
    let s = robot_session();
    let path = store.save(&s).unwrap().join("session.json");
    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    doc["state_hash"] = serde_json::json!("00");
    std::fs::write(&path, serde_json::to_vec(&doc).unwrap()).unwrap();
    let Err(err) = store.load(s.id()) else { panic!("hash mismatch accepted") };
    assert!(err.to_string().contains("state hash"), "{err}");
}

#[test]
fn blank_or_undecodable_frames_are_rejected() {
    let blank = RasterImage::filled(80, 80, 255).to_png().unwrap();
    let robot = robot_character([0.0, 0.0], 0.0).render().raster.to_png().unwrap();
    let cfg = EngineConfig::default();
    assert!(matches!(Session::create(robot.clone(), blank, &cfg), Err(Error::NoRegions("B"))));
    assert!(matches!(Session::create(b"junk".to_vec(), robot, &cfg), Err(Error::Format(_))));
}

#[test]
fn overlays_use_pair_colors() {
    let s = robot_session();
    let corr = s.correspondence();
    let pair = &corr.pairs[0];
    assert_eq!(s.pair_color(Side::A, pair.a), s.pair_color(Side::B, pair.b));
    for side in [Side::A, Side::B] {
        let png = s.overlay_png(side).unwrap();
        let img = cellmatch_core::load_grayscale(&png).unwrap();
        let raster = match side {
            Side::A => &s.analysis().a.raster,
            Side::B => &s.analysis().b.raster,
        };
        assert_eq!((img.width(), img.height()), (raster.width(), raster.height()));
    }
    let svg = s.inbetween_svg(0.25, 4).unwrap();
    assert_eq!(svg.matches("<g").count(), 4);
    assert!(s.stroke_overlay_svg().starts_with("<svg"));
}
