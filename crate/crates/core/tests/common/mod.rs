#![allow(dead_code)]

use cellmatch_core::eval::{area_match, Assignment};
use cellmatch_core::matcher::{MatchOutcome, Mode, Pin};
use cellmatch_core::pipeline::{Analysis, EngineConfig};
use cellmatch_core::synth::{
    caterpillar_scene, depth_fixtures, flower_scene, occlusion_scene, reference_assignment, region_parts,
    robot_character, separated_scene, Drawing, Scene,
};

/// An analysed scene with its part-derived ground truth.
pub struct Scored {
    pub analysis: Analysis,
    pub reference: Assignment,
    pub accuracy: f64,
}

impl Scored {
    pub fn ids(&self) -> (Vec<u32>, Vec<u32>) {
        (self.analysis.a.graph.character_ids(), self.analysis.b.graph.character_ids())
    }

    pub fn rematch(&self, pins: &[Pin]) -> cellmatch_core::Result<Assignment> {
        Ok(self.analysis.matcher().run(pins)?.correspondence.assignment())
    }

    pub fn outcome(&self, pins: &[Pin]) -> MatchOutcome {
        self.analysis.matcher().run(pins).unwrap()
    }

    /// Reference pairs the automatic result gets wrong.
    pub fn mismatched_pairs(&self) -> usize {
        let auto = self.analysis.correspondence().assignment();
        self.reference.pairs().filter(|&(a, b)| auto.partner_of_a(a) != Some(b)).count()
    }
}

/// Runs a scene under `mode`; `None` if the ground truth is ambiguous
/// (a region spanning two parts).
pub fn score_scene(scene: &Scene, mode: Mode) -> Option<Scored> {
    let (ra, rb) = (scene.a.render(), scene.b.render());
    let cfg = EngineConfig::default().with_mode(mode);
    let analysis = Analysis::run(ra.raster, rb.raster, &cfg, &[]).ok()?;
    let parts_a = region_parts(&analysis.a.graph, &ra.owner)?;
    let parts_b = region_parts(&analysis.b.graph, &rb.owner)?;
    let reference = reference_assignment(&parts_a, &parts_b);
    let auto = analysis.correspondence().assignment();
    let accuracy = area_match(
        &auto,
        &reference,
        &analysis.a.graph.character_ids(),
        &analysis.b.graph.character_ids(),
    )
    .ok()?;
    Some(Scored {
        analysis,
        reference,
        accuracy,
    })
}

/// Single-frame fixtures: the robot, several generated frames and the
/// depth fixtures.
pub fn identity_fixtures() -> Vec<(String, Drawing)> {
    let mut out = vec![("robot".to_string(), robot_character([0.0, 0.0], 0.0))];
    for seed in 0..3 {
        out.push((format!("flower-{seed}"), flower_scene(seed).a));
        out.push((format!("caterpillar-{seed}"), caterpillar_scene(seed).a));
        out.push((format!("separated-{seed}"), separated_scene(seed).a));
    }
    out.push(("occlusion-0".to_string(), occlusion_scene(0).a));
    out.extend(depth_fixtures().into_iter().map(|f| (f.name, f.drawing)));
    out
}

/// Largest Σ ps over all injective pairings of the smaller side into the
/// larger one.
pub fn brute_force_best(a: &[u32], b: &[u32], ps: impl Fn(u32, u32) -> f64) -> f64 {
    fn walk(k: usize, small: &[u32], large: &[u32], used: &mut [bool], acc: f64, best: &mut f64, f: &dyn Fn(u32, u32) -> f64) {
        if k == small.len() {
            *best = best.max(acc);
            return;
        }
        for j in 0..large.len() {
            if !used[j] {
                used[j] = true;
                walk(k + 1, small, large, used, acc + f(small[k], large[j]), best, f);
                used[j] = false;
            }
        }
    }
    let mut best = 0.0;
    if a.len() <= b.len() {
        walk(0, a, b, &mut vec![false; b.len()], 0.0, &mut best, &|x, y| ps(x, y));
    } else {
        walk(0, b, a, &mut vec![false; a.len()], 0.0, &mut best, &|y, x| ps(x, y));
    }
    best
}
