mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use proptest::prelude::*;

use cellmatch_core::eval::{area_match, line_match, Assignment};
use cellmatch_core::label::INK;
use cellmatch_core::matcher::{angle_def, relation, MatchConfig, Pin, Provenance};
use cellmatch_core::pipeline::{analyze_keyframe, Analysis, EngineConfig, Keyframe};
use cellmatch_core::shape::area_ratio;
use cellmatch_core::stroke::{arc_length, interpolate, match_strokes, resample};
use cellmatch_core::synth::{flower_scene, grid_drawing, robot_character, separated_scene, Drawing};

use common::brute_force_best;

fn robot_analysis() -> &'static Analysis {
    static CELL: OnceLock<Analysis> = OnceLock::new();
    CELL.get_or_init(|| {
        let a = robot_character([0.0, 0.0], 0.0).render().raster;
        let b = robot_character([14.0, 8.0], 12.0).render().raster;
        Analysis::run(a, b, &EngineConfig::default(), &[]).unwrap()
    })
}

fn keyframe(d: &Drawing) -> Keyframe {
    analyze_keyframe(d.render().raster, &EngineConfig::default(), "A").unwrap()
}

fn frame_strategy() -> impl Strategy<Value = Drawing> {
    prop_oneof![
        (2u32..=4, any::<u64>()).prop_map(|(cells, seed)| grid_drawing(260, cells, seed)),
        any::<u64>().prop_map(|seed| separated_scene(seed).a),
        (0u64..50).prop_map(|seed| flower_scene(seed).b),
    ]
}

/// Partial one-to-one map between ids `1..=n` and `1..=m`.
fn assignment_strategy(n: u32, m: u32) -> impl Strategy<Value = Assignment> {
    (Just((1..=m).collect::<Vec<u32>>()).prop_shuffle(), proptest::collection::vec(any::<bool>(), n as usize)).prop_map(
        move |(perm, keep)| {
            Assignment::from_pairs((1..=n).zip(perm).filter(|&(a, _)| keep[a as usize - 1])).unwrap()
        },
    )
}

fn two_assignments() -> impl Strategy<Value = (u32, u32, Assignment, Assignment)> {
    (1u32..8, 1u32..8).prop_flat_map(|(n, m)| (Just(n), Just(m), assignment_strategy(n, m), assignment_strategy(n, m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adjacency_is_symmetric_with_opposite_angles(drawing in frame_strategy()) {
        let kf = keyframe(&drawing);
        for r in kf.graph.regions() {
            for n in &r.neighbors {
                let back = kf.graph.region(n.id).unwrap().neighbor(r.id);
                prop_assert!(back.is_some(), "{} lists {} but not the reverse", r.id, n.id);
                let back = back.unwrap();
                prop_assert_eq!(back.shared_length, n.shared_length);
                let turn = (back.angle - n.angle).rem_euclid(360.0);
                prop_assert!((turn - 180.0).abs() < 1e-9, "angles {} and {}", n.angle, back.angle);
                prop_assert!((0.0..360.0).contains(&n.angle));
            }
        }
    }

    #[test]
    fn every_two_region_pixel_lands_in_one_stroke(drawing in frame_strategy()) {
        let kf = keyframe(&drawing);
        let lm = kf.graph.label_map();
        let owners = kf.graph.ink_owners();
        let (w, h) = (lm.width(), lm.height());
        let mut boundary = BTreeMap::new();
        for y in 0..h {
            for x in 0..w {
                if lm.get(x, y) != INK {
                    continue;
                }
                let mut seen = BTreeSet::new();
                for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        let o = owners[(yy * w + xx) as usize];
                        if o != INK {
                            seen.insert(o);
                        }
                    }
                }
                if seen.len() == 2 {
                    let v: Vec<u32> = seen.into_iter().collect();
                    boundary.insert([x, y], (v[0], v[1]));
                }
            }
        }
        let mut covered = BTreeSet::new();
        for s in &kf.strokes.strokes {
            for p in &s.pixels {
                prop_assert!(covered.insert(*p), "pixel {:?} in two strokes", p);
                prop_assert_eq!(boundary.get(p), Some(&s.region_pair));
            }
        }
        prop_assert_eq!(covered.len() + kf.strokes.diagnostics.dropped_pixels, boundary.len());
    }

    #[test]
    fn matching_is_one_to_one_and_deterministic(seed in any::<u64>()) {
        let scene = separated_scene(seed);
        let (a, b) = (scene.a.render().raster, scene.b.render().raster);
        let cfg = EngineConfig::default();
        let first = Analysis::run(a.clone(), b.clone(), &cfg, &[]).unwrap();
        let second = Analysis::run(a, b, &cfg, &[]).unwrap();
        prop_assert_eq!(first.correspondence(), second.correspondence());
        let corr = first.correspondence();
        prop_assert!(Assignment::from_pairs(corr.pairs.iter().map(|p| (p.a, p.b))).is_ok());
        let ids_a = first.a.graph.character_ids();
        let ids_b = first.b.graph.character_ids();
        prop_assert_eq!(corr.pairs.len() + corr.unmatched_a.len(), ids_a.len());
        prop_assert_eq!(corr.pairs.len() + corr.unmatched_b.len(), ids_b.len());
        prop_assert_eq!(corr.pairs.len(), ids_a.len().min(ids_b.len()));
    }

    #[test]
    fn greedy_stays_near_the_brute_force_optimum(seed in any::<u64>()) {
        let scene = separated_scene(seed);
        let (a, b) = (scene.a.render().raster, scene.b.render().raster);
        let an = Analysis::run(a, b, &EngineConfig::default(), &[]).unwrap();
        let st = &an.outcome.state;
        let greedy: f64 = an.correspondence().pairs.iter().map(|p| p.shape_score).sum();
        let best = brute_force_best(st.a_ids(), st.b_ids(), |x, y| st.ps(x, y).unwrap());
        prop_assert!(greedy >= 0.8 * best, "greedy {} best {}", greedy, best);
    }

    #[test]
    fn stroke_matching_is_symmetric(seed in 0u64..40) {
        let scene = flower_scene(seed);
        let an = Analysis::run(scene.a.render().raster, scene.b.render().raster, &EngineConfig::default(), &[]).unwrap();
        let forward: BTreeSet<(u32, u32)> = an.strokes.id_pairs().into_iter().collect();
        let backward = match_strokes(&an.b.strokes, &an.a.strokes, &an.correspondence().inverse());
        let backward: BTreeSet<(u32, u32)> = backward.id_pairs().into_iter().map(|(b, a)| (a, b)).collect();
        prop_assert_eq!(forward, backward);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pins_win_regardless_of_order(
        picks in proptest::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..6),
        order in any::<u64>(),
    ) {
        let an = robot_analysis();
        let ids_a = an.a.graph.character_ids();
        let ids_b = an.b.graph.character_ids();
        let mut pins: Vec<Pin> = Vec::new();
        for (ia, ib) in picks {
            let (a, b) = (*ia.get(&ids_a), *ib.get(&ids_b));
            if pins.iter().all(|p| p.a != a && p.b != b) {
                pins.push(Pin { a, b });
            }
        }
        let corr = an.matcher().run(&pins).unwrap().correspondence;
        for p in &pins {
            let pair = corr.pairs.iter().find(|q| q.a == p.a);
            prop_assert!(pair.is_some_and(|q| q.b == p.b && q.provenance == Provenance::Pinned));
        }
        prop_assert!(corr.pairs.iter().filter(|q| q.provenance == Provenance::Pinned).count() == pins.len());
        let mut shuffled = pins.clone();
        let k = (order as usize) % shuffled.len();
        shuffled.rotate_left(k);
        if order % 2 == 1 {
            shuffled.reverse();
        }
        let other = an.matcher().run(&shuffled).unwrap().correspondence;
        prop_assert_eq!(corr.assignment(), other.assignment());
    }

    #[test]
    fn area_ratio_is_scale_invariant(a in 1u32..50_000, b in 1u32..50_000, k in 1u32..80) {
        let s = area_ratio(a, b);
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert_eq!(s, area_ratio(b, a));
        prop_assert!((area_ratio(a * k, b * k) - s).abs() <= 1e-12);
    }

    #[test]
    fn relation_is_bounded(ta in 0.0f64..360.0, tb in 0.0f64..360.0, sit in any::<bool>()) {
        let d = angle_def(ta, tb);
        prop_assert!((0.0..=180.0).contains(&d));
        prop_assert!((d - angle_def(tb, ta)).abs() < 1e-12);
        let r = relation(d, sit, &MatchConfig::default());
        prop_assert!((1.0..=4.0).contains(&r));
    }

    #[test]
    fn area_match_is_side_symmetric((n, m, auto, reference) in two_assignments()) {
        let ids_a: Vec<u32> = (1..=n).collect();
        let ids_b: Vec<u32> = (1..=m).collect();
        let forward = area_match(&auto, &reference, &ids_a, &ids_b).unwrap();
        let backward = area_match(&auto.inverse(), &reference.inverse(), &ids_b, &ids_a).unwrap();
        prop_assert_eq!(forward, backward);
        prop_assert!((0.0..=100.0).contains(&forward));
        prop_assert_eq!(area_match(&reference, &reference, &ids_a, &ids_b).unwrap(), 100.0);
    }

    #[test]
    fn line_match_never_rises_when_a_pair_is_deleted((n, m, auto, reference) in two_assignments(), pick in any::<prop::sample::Index>()) {
        let ids_a: Vec<u32> = (1..=n).collect();
        let ids_b: Vec<u32> = (1..=m).collect();
        let before = line_match(&auto, &reference, &ids_a, &ids_b).unwrap();
        let paired: Vec<u32> = auto.pairs().map(|(a, _)| a).collect();
        if !paired.is_empty() {
            let after = line_match(&auto.without_a(*pick.get(&paired)), &reference, &ids_a, &ids_b).unwrap();
            prop_assert!(after <= before);
        }
    }

    #[test]
    fn resampling_keeps_ends_and_count(
        points in proptest::collection::vec((0.0f64..500.0, 0.0f64..500.0), 2..30),
        count in 2usize..60,
    ) {
        let points: Vec<[f64; 2]> = points.into_iter().map(|(x, y)| [x, y]).collect();
        let out = resample(&points, count).unwrap();
        prop_assert_eq!(out.len(), count);
        let near = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-6;
        prop_assert!(near(out[0], points[0]));
        prop_assert!(near(out[count - 1], points[points.len() - 1]));
        prop_assert!(arc_length(&out) <= arc_length(&points) + 1e-6);
    }
}

#[test]
fn interpolation_hits_both_keyframes() {
    let an = robot_analysis();
    let pairs = &an.strokes.pairs;
    assert!(!pairs.is_empty());
    let at0 = interpolate(pairs, 0.0).unwrap();
    let at1 = interpolate(pairs, 1.0).unwrap();
    for (k, p) in pairs.iter().enumerate() {
        assert_eq!(at0[k], p.vertices_a);
        assert_eq!(at1[k], p.vertices_b);
        assert_eq!(p.vertices_a.len(), p.vertices_b.len());
    }
    let mid = interpolate(pairs, 0.5).unwrap();
    for (k, p) in pairs.iter().enumerate() {
        for (i, v) in mid[k].iter().enumerate() {
            let want = [
                (p.vertices_a[i][0] + p.vertices_b[i][0]) / 2.0,
                (p.vertices_a[i][1] + p.vertices_b[i][1]) / 2.0,
            ];
            assert!((v[0] - want[0]).abs() < 1e-9 && (v[1] - want[1]).abs() < 1e-9);
        }
    }
}
