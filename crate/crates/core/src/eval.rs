//! Accuracy metrics and correction-effort counting.
//!
//! Both metrics count slots: every region (or stroke) of either keyframe is
//! one slot, and a slot is mismatched when its partner in the automatic
//! result differs from its partner in the reference.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::{Mode, Pin};

/// One-to-one partial map between ids of keyframe A and keyframe B.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    a_to_b: BTreeMap<u32, u32>,
    b_to_a: BTreeMap<u32, u32>,
}

impl Assignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut out = Self::default();
        for (a, b) in pairs {
            if out.a_to_b.contains_key(&a) || out.b_to_a.contains_key(&b) {
                return Err(Error::Parameter(format!(
                    "assignment is not one-to-one at pair ({a}, {b})"
                )));
            }
            out.a_to_b.insert(a, b);
            out.b_to_a.insert(b, a);
        }
        Ok(out)
    }

    pub fn partner_of_a(&self, a: u32) -> Option<u32> {
        self.a_to_b.get(&a).copied()
    }

    pub fn partner_of_b(&self, b: u32) -> Option<u32> {
        self.b_to_a.get(&b).copied()
    }

    pub fn len(&self) -> usize {
        self.a_to_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_to_b.is_empty()
    }

    /// Pairs ordered by A id.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.a_to_b.iter().map(|(&a, &b)| (a, b))
    }

    pub fn inverse(&self) -> Assignment {
        Assignment {
            a_to_b: self.b_to_a.clone(),
            b_to_a: self.a_to_b.clone(),
        }
    }

    pub fn without_a(&self, a: u32) -> Assignment {
        Assignment::from_pairs(self.pairs().filter(|&(x, _)| x != a)).expect("subset stays one-to-one")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// A slot whose automatic partner differs from the reference partner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotMismatch {
    pub side: Side,
    pub id: u32,
    pub auto: Option<u32>,
    pub reference: Option<u32>,
}

/// Mismatched slots over the given ids. With `unpaired_is_mismatch`, a slot
/// the automatic result leaves unpaired always counts, even when the
/// reference leaves it unpaired too.
pub fn mismatched_slots(
    auto: &Assignment,
    reference: &Assignment,
    a_ids: &[u32],
    b_ids: &[u32],
    unpaired_is_mismatch: bool,
) -> Vec<SlotMismatch> {
    let check = |side, id, got: Option<u32>, want: Option<u32>| {
        let bad = got != want || (unpaired_is_mismatch && got.is_none());
        bad.then_some(SlotMismatch {
            side,
            id,
            auto: got,
            reference: want,
        })
    };
    let a = a_ids
        .iter()
        .filter_map(|&id| check(Side::A, id, auto.partner_of_a(id), reference.partner_of_a(id)));
    let b = b_ids
        .iter()
        .filter_map(|&id| check(Side::B, id, auto.partner_of_b(id), reference.partner_of_b(id)));
    a.chain(b).collect()
}

/// `((n + m) - mismatch) / (n + m) * 100`.
pub fn match_percent(slots: usize, mismatch: usize) -> Result<f64> {
    if slots == 0 {
        return Err(Error::UndefinedMetric("no slots to score"));
    }
    if mismatch > slots {
        return Err(Error::Parameter(format!("{mismatch} mismatches exceed {slots} slots")));
    }
    Ok((slots - mismatch) as f64 / slots as f64 * 100.0)
}

/// Closed-area accuracy over the character regions `a_ids`, `b_ids`.
pub fn area_match(auto: &Assignment, reference: &Assignment, a_ids: &[u32], b_ids: &[u32]) -> Result<f64> {
    let mismatch = mismatched_slots(auto, reference, a_ids, b_ids, false).len();
    match_percent(a_ids.len() + b_ids.len(), mismatch)
}

/// Stroke accuracy over stroke ids `a_strokes`, `b_strokes`. Strokes the
/// automatic result leaves unpaired count as mismatches.
pub fn line_match(auto: &Assignment, reference: &Assignment, a_strokes: &[u32], b_strokes: &[u32]) -> Result<f64> {
    let mismatch = mismatched_slots(auto, reference, a_strokes, b_strokes, true).len();
    match_percent(a_strokes.len() + b_strokes.len(), mismatch)
}

/// Rounds to three decimals, the precision accuracies are reported at.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Mean of values reported at three decimals, itself reported at three
/// decimals with halves rounded up. Works in integer thousandths so that
/// e.g. a true mean of 59.5125 reports as 59.513 rather than falling to
/// 59.512 through binary representation error.
pub fn mean_reported(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric("mean of no values"));
    }
    let sum: i64 = values.iter().map(|v| (v * 1000.0).round() as i64).sum();
    let n = values.len() as i64;
    let rounded = (2 * sum + n).div_euclid(2 * n);
    Ok(rounded as f64 / 1000.0)
}

/// A user correction as recorded in a session log.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CorrectionEvent {
    Pin { a: u32, b: u32 },
    Unpin { a: u32 },
}

/// Pins in effect after replaying `log`. A pin displaces earlier pins that
/// share either region.
pub fn replay_pins(log: &[CorrectionEvent]) -> Vec<Pin> {
    let mut pins: Vec<Pin> = Vec::new();
    for event in log {
        match *event {
            CorrectionEvent::Pin { a, b } => {
                pins.retain(|p| p.a != a && p.b != b);
                pins.push(Pin { a, b });
            }
            CorrectionEvent::Unpin { a } => pins.retain(|p| p.a != a),
        }
    }
    pins
}

/// Number of pin events applied before the area accuracy first reaches
/// 100%, replaying `log` through `rematch`. Unpin events are not counted.
/// `Some(0)` when the unpinned result is already perfect; `None` when the
/// log never reaches a perfect result.
pub fn count_corrections<F>(
    log: &[CorrectionEvent],
    reference: &Assignment,
    a_ids: &[u32],
    b_ids: &[u32],
    mut rematch: F,
) -> Result<Option<usize>>
where
    F: FnMut(&[Pin]) -> Result<Assignment>,
{
    let perfect = |auto: &Assignment| mismatched_slots(auto, reference, a_ids, b_ids, false).is_empty();
    if perfect(&rematch(&[])?) {
        return Ok(Some(0));
    }
    let mut pins_applied = 0;
    for (k, event) in log.iter().enumerate() {
        if matches!(event, CorrectionEvent::Pin { .. }) {
            pins_applied += 1;
        }
        if perfect(&rematch(&replay_pins(&log[..=k]))?) {
            return Ok(Some(pins_applied));
        }
    }
    Ok(None)
}

/// Pins that repair an automatic result, one mismatched A slot at a time in
/// ascending id order, re-matching after each pin and stopping as soon as
/// the result is perfect.
pub fn greedy_correction_log<F>(
    reference: &Assignment,
    a_ids: &[u32],
    b_ids: &[u32],
    mut rematch: F,
) -> Result<Vec<CorrectionEvent>>
where
    F: FnMut(&[Pin]) -> Result<Assignment>,
{
    let mut log = Vec::new();
    let mut auto = rematch(&[])?;
    loop {
        let wrong = mismatched_slots(&auto, reference, a_ids, b_ids, false);
        if wrong.is_empty() {
            return Ok(log);
        }
        let pinned = replay_pins(&log);
        let next = wrong.iter().find_map(|s| match (s.side, s.reference) {
            (Side::A, Some(b)) if !pinned.iter().any(|p| p.a == s.id) => Some((s.id, b)),
            (Side::B, Some(a)) if !pinned.iter().any(|p| p.b == s.id) => Some((a, s.id)),
            _ => None,
        });
        let Some((a, b)) = next else {
            return Ok(log);
        };
        log.push(CorrectionEvent::Pin { a, b });
        auto = rematch(&replay_pins(&log))?;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub area_match: f64,
    pub line_match: Option<f64>,
    pub corrections: Option<usize>,
    pub mismatches: Vec<SlotMismatch>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Plain-text accuracy table, one row per labelled report.
pub fn report_table(rows: &[(String, EvalReport)]) -> String {
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$}  {:<4}  {:>10}  {:>10}  {:>11}",
        "case", "mode", "AreaMatch", "LineMatch", "corrections"
    );
    for (name, r) in rows {
        let line = r.line_match.map_or("-".to_string(), |v| format!("{v:.3}"));
        let corr = r.corrections.map_or("-".to_string(), |c| c.to_string());
        let _ = writeln!(
            out,
            "{:<name_w$}  {:<4}  {:>10.3}  {:>10}  {:>11}",
            name, r.mode, r.area_match, line, corr
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asg(pairs: &[(u32, u32)]) -> Assignment {
        Assignment::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn identical_assignments_score_100() {
        let a = asg(&[(1, 1), (2, 2), (3, 3)]);
        assert_eq!(area_match(&a, &a, &[1, 2, 3], &[1, 2, 3]).unwrap(), 100.0);
    }

    #[test]
    fn eleven_plus_eleven_with_three_mismatches() {
        let v = match_percent(22, 3).unwrap();
        assert!((v - 86.363_636_363_636_36).abs() < 1e-9 * 86.4);
        assert_eq!(round3(v), 86.364);
    }

    #[test]
    fn swap_mismatches_four_slots() {
        let reference = asg(&[(1, 1), (2, 2), (3, 3)]);
        let auto = asg(&[(1, 2), (2, 1), (3, 3)]);
        let ids = [1, 2, 3];
        assert_eq!(mismatched_slots(&auto, &reference, &ids, &ids, false).len(), 4);
        assert!((area_match(&auto, &reference, &ids, &ids).unwrap() - 200.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn everything_mismatched_is_zero() {
        let reference = asg(&[(1, 1), (2, 2)]);
        let auto = asg(&[(1, 2), (2, 1)]);
        assert_eq!(area_match(&auto, &reference, &[1, 2], &[1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn empty_slots_are_undefined() {
        let e = Assignment::default();
        assert!(matches!(area_match(&e, &e, &[], &[]), Err(Error::UndefinedMetric(_))));
        assert!(line_match(&e, &e, &[], &[]).is_err());
    }

    #[test]
    fn unpaired_auto_strokes_count_as_mismatch() {
        let reference = asg(&[(1, 1)]);
        let none = Assignment::default();
        assert_eq!(line_match(&none, &reference, &[1], &[1]).unwrap(), 0.0);
        // A stroke unpaired in both still counts for lines, not for areas.
        let both = asg(&[(1, 1)]);
        assert!((line_match(&both, &both, &[1, 2], &[1]).unwrap() - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(area_match(&both, &both, &[1, 2], &[1]).unwrap(), 100.0);
    }

    #[test]
    fn reported_mean_of_four_cuts() {
        let m = mean_reported(&[69.595, 58.670, 41.304, 68.481]).unwrap();
        assert_eq!(m, 59.513);
        assert_eq!(mean_reported(&[1.0, 2.0]).unwrap(), 1.5);
    }

    #[test]
    fn replay_handles_unpin_and_displacement() {
        let log = [
            CorrectionEvent::Pin { a: 1, b: 2 },
            CorrectionEvent::Pin { a: 3, b: 4 },
            CorrectionEvent::Unpin { a: 1 },
            CorrectionEvent::Pin { a: 5, b: 4 },
        ];
        assert_eq!(replay_pins(&log), vec![Pin { a: 5, b: 4 }]);
    }

    fn fake_rematch(pins: &[Pin]) -> Result<Assignment> {
        // Regions 1 and 2 come out swapped unless one of them is pinned.
        let fixed = pins.iter().any(|p| p.a == 1 || p.a == 2);
        Ok(if fixed { asg(&[(1, 1), (2, 2)]) } else { asg(&[(1, 2), (2, 1)]) })
    }

    #[test]
    fn corrections_count_pins_only() {
        let reference = asg(&[(1, 1), (2, 2)]);
        let ids = [1, 2];
        let perfect = |_: &[Pin]| Ok(reference.clone());
        assert_eq!(count_corrections(&[], &reference, &ids, &ids, perfect).unwrap(), Some(0));

        let one = [CorrectionEvent::Pin { a: 1, b: 1 }];
        assert_eq!(count_corrections(&one, &reference, &ids, &ids, fake_rematch).unwrap(), Some(1));

        let churn = [
            CorrectionEvent::Pin { a: 1, b: 1 },
            CorrectionEvent::Unpin { a: 1 },
            CorrectionEvent::Pin { a: 1, b: 1 },
        ];
        let only_after_second = {
            let mut calls = 0;
            move |pins: &[Pin]| {
                calls += 1;
                // The first pin is applied but the result stays wrong.
                if calls <= 3 {
                    fake_rematch(&[])
                } else {
                    fake_rematch(pins)
                }
            }
        };
        assert_eq!(
            count_corrections(&churn, &reference, &ids, &ids, only_after_second).unwrap(),
            Some(2)
        );
        assert_eq!(count_corrections(&[], &reference, &ids, &ids, fake_rematch).unwrap(), None);
    }

    #[test]
    fn greedy_log_fixes_swap_with_one_pin() {
        let reference = asg(&[(1, 1), (2, 2)]);
        let log = greedy_correction_log(&reference, &[1, 2], &[1, 2], fake_rematch).unwrap();
        assert_eq!(log, vec![CorrectionEvent::Pin { a: 1, b: 1 }]);
    }

    #[test]
    fn table_lists_rows() {
        let r = EvalReport {
            mode: Mode::Scd,
            area_match: 86.363_636,
            line_match: None,
            corrections: Some(1),
            mismatches: vec![],
        };
        let t = report_table(&[("C_a".into(), r)]);
        assert!(t.contains("86.364"));
        assert!(t.lines().count() == 2);
    }
}
