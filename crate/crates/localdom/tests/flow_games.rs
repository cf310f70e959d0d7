//! Stage preferences and stage-dominance.

use localdom::dominance::wishfully_dominates;
use localdom::ending_analysis::locally_e_dominates;
use localdom::ending_analysis::ProofMode;
use localdom::flow_games::{
    locally_s_dominates, median, s_strategy_proofness, Decomposition, FlowError, FlowGame,
    StagePreferenceVerdict, Utility,
};
use localdom::game_core::{expand_model, Caps, Frame, Slot, StageModel};
use localdom::harness::claims::single_outcome_flow;
use localdom::harness::random::{random_game, RandomGameSpec};
use localdom::mechanisms::grab_or_nab::{GRAB, NAB};
use localdom::mechanisms::{gen_ausubel, gen_grab_or_nab, gen_grab_or_nab_stage, AusubelParams};
use localdom::strategy_space::PlayerView;
use localdom::{ActionId, Rational};
use proptest::prelude::*;

fn instances() -> Vec<(String, FlowGame)> {
    vec![
        ("grab_or_nab".into(), gen_grab_or_nab()),
        ("grab_or_nab_stage".into(), gen_grab_or_nab_stage()),
        (
            "ausubel excess".into(),
            gen_ausubel(&AusubelParams::desk(Decomposition::ExcessWithBounds)).unwrap(),
        ),
        (
            "ausubel final".into(),
            gen_ausubel(&AusubelParams::desk(Decomposition::FinalOnly)).unwrap(),
        ),
    ]
}

/// Every completion of the slots other than `(t, r)`, by recursion.
fn completions(fg: &FlowGame, player: usize, t: usize, r: usize) -> Vec<Vec<Vec<Slot>>> {
    let spaces = &fg.spaces[player];
    let mut out = vec![spaces
        .iter()
        .map(|s| vec![None; s.len()])
        .collect::<Vec<_>>()];
    for (s, stage) in spaces.iter().enumerate() {
        for (q, space) in stage.iter().enumerate() {
            if s + 1 == t && q == r {
                continue;
            }
            out = out
                .into_iter()
                .flat_map(|seq| {
                    space.iter().map(move |&y| {
                        let mut next = seq.clone();
                        next[s][q] = y;
                        next
                    })
                })
                .collect();
        }
    }
    out
}

fn classify(
    fg: &FlowGame,
    player: usize,
    t: usize,
    r: usize,
    left: (usize, Slot),
    right: (usize, Slot),
) -> &'static str {
    let mut diffs = Vec::new();
    for mut seq in completions(fg, player, t, r) {
        seq[t - 1][r] = left.1;
        let ul = fg.utility_of(player, left.0, &seq);
        seq[t - 1][r] = right.1;
        let ur = fg.utility_of(player, right.0, &seq);
        diffs.push(ul.cmp(&ur));
    }
    use std::cmp::Ordering::*;
    let ge = diffs.iter().all(|&d| d != Less);
    let le = diffs.iter().all(|&d| d != Greater);
    match (ge, le) {
        (true, true) => "Equal",
        (true, false) if diffs.iter().all(|&d| d == Greater) => "Strictly",
        (true, false) => "WeaklyPreferred",
        (false, true) => "Dispreferred",
        (false, false) => "Incomparable",
    }
}

fn kind(v: &StagePreferenceVerdict) -> &'static str {
    match v {
        StagePreferenceVerdict::Equal => "Equal",
        StagePreferenceVerdict::Strictly => "Strictly",
        StagePreferenceVerdict::WeaklyPreferred => "WeaklyPreferred",
        StagePreferenceVerdict::Dispreferred { .. } => "Dispreferred",
        StagePreferenceVerdict::Incomparable { .. } => "Incomparable",
    }
}

#[test]
fn stage_preferences_match_enumeration() {
    let mut checked = 0;
    for (name, fg) in instances() {
        let thetas = fg.game.nature().len();
        for i in 0..fg.game.n_players() {
            for t in 1..=fg.slots.len() {
                for r in 0..fg.slots[t - 1] {
                    let count: u128 = completions(&fg, i, t, r).len() as u128;
                    assert_eq!(fg.completion_count(i, t, r), count, "{name}");
                    let space = &fg.spaces[i][t - 1][r];
                    for th_l in 0..thetas {
                        for th_r in 0..thetas {
                            for &yl in space {
                                for &yr in space {
                                    let want = classify(&fg, i, t, r, (th_l, yl), (th_r, yr));
                                    let fast =
                                        fg.stage_prefers(i, t, r, (th_l, yl), (th_r, yr)).unwrap();
                                    let slow = fg
                                        .stage_prefers_exhaustive(i, t, r, (th_l, yl), (th_r, yr))
                                        .unwrap();
                                    assert_eq!(kind(&slow), want, "{name}: slot ({t},{r})");
                                    // The separable shortcut may only differ in the strength of a weak preference.
                                    assert_eq!(
                                        fast.weakly(),
                                        slow.weakly(),
                                        "{name}: slot ({t},{r})"
                                    );
                                    if let StagePreferenceVerdict::Dispreferred { witness }
                                    | StagePreferenceVerdict::Incomparable { witness } = &slow
                                    {
                                        let mut seq = witness.clone();
                                        seq[t - 1][r] = yl;
                                        let ul = fg.utility_of(i, th_l, &seq);
                                        seq[t - 1][r] = yr;
                                        assert!(
                                            ul < fg.utility_of(i, th_r, &seq),
                                            "{name}: witness reverses the preference"
                                        );
                                    }
                                    checked += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 100);
}

/// Stage-dominance never claims more than wishful dominance on the payoff game.
#[test]
fn stage_dominance_implies_wishful() {
    let mut flows = instances();
    for seed in 0..60 {
        let spec = RandomGameSpec::from_seed(seed);
        let g = random_game(&spec).unwrap();
        flows.push((spec.describe(), single_outcome_flow(&g).unwrap()));
    }
    let mut held = 0;
    for (name, fg) in &flows {
        for i in 0..fg.game.n_players() {
            let Ok(view) = PlayerView::new(&fg.game, i) else {
                continue;
            };
            for h in fg.game.active_info_sets(i) {
                let local = view.local(h);
                if local.members.is_empty() {
                    continue;
                }
                let acts = local.actions().to_vec();
                for &abar in &acts {
                    for &a in acts.iter().filter(|&&a| a != abar) {
                        let Ok(v) = locally_s_dominates(fg, &local, abar, a) else {
                            continue;
                        };
                        if v.holds {
                            assert!(
                                wishfully_dominates(&local, abar, a).unwrap().holds,
                                "{name}: `{}`",
                                fg.game.info(i, h).label
                            );
                            held += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(held > 50, "only {held} stage-dominance verdicts held");
}

#[test]
fn grab_beats_nab_stage_by_stage() {
    let fg = gen_grab_or_nab();
    for i in 0..2 {
        let view = PlayerView::new(&fg.game, i).unwrap();
        for h in fg.game.active_info_sets(i) {
            let local = view.local(h);
            assert!(
                locally_s_dominates(&fg, &local, GRAB, NAB).unwrap().holds,
                "`{}`",
                fg.game.info(i, h).label
            );
            assert!(!locally_s_dominates(&fg, &local, NAB, GRAB).unwrap().holds);
        }
        let root = fg.game.find_info(i, "stage1").unwrap();
        assert!(
            !locally_e_dominates(&view.local(root), GRAB, NAB)
                .unwrap()
                .holds
        );
        let report = s_strategy_proofness(&fg, i, ProofMode::Everywhere).unwrap();
        assert!(report.holds);
        let induced = report.induced.unwrap();
        assert!(induced.domain().all(|k| induced.action(k) == Some(GRAB)));
    }
}

struct Stray;

impl StageModel for Stray {
    type State = usize;

    fn root(&self, _theta: usize) -> usize {
        0
    }

    fn info(&self, _s: &usize, _player: usize) -> (String, Vec<ActionId>) {
        ("h".into(), vec![0])
    }

    fn advance(&self, s: &usize, _profile: &[ActionId]) -> usize {
        s + 1
    }

    fn outcome(&self, _s: &usize, _player: usize) -> (String, Rational) {
        (String::new(), Rational::from_integer(0))
    }

    fn stage_outcome(&self, _s: &usize, _profile: &[ActionId], _player: usize) -> Vec<Slot> {
        vec![Some(Rational::from_integer(7))]
    }
}

#[test]
fn slots_outside_their_space_are_rejected() {
    let frame = Frame {
        players: vec!["P".into()],
        nature: vec!["θ".into()],
        horizon: 1,
        actions: vec![vec!["x".into()]],
    };
    let def = expand_model(&frame, &Stray, Caps::default()).unwrap();
    let space = vec![None, Some(Rational::from_integer(0))];
    let err = FlowGame::build(
        def.clone(),
        vec![1],
        vec![vec![vec![space]]],
        Utility::Additive,
        Caps::default(),
    )
    .unwrap_err();
    assert!(matches!(err, FlowError::SlotOutOfSpace { .. }), "{err}");
    let err = FlowGame::build(
        def,
        vec![2],
        vec![vec![vec![vec![None]; 2]]],
        Utility::Additive,
        Caps::default(),
    )
    .unwrap_err();
    assert!(matches!(err, FlowError::SlotCount { .. }), "{err}");
}

proptest! {
    #[test]
    fn median_is_the_middle_value(a in -50i64..50, b in -50i64..50, c in -50i64..50) {
        let m = median(a, b, c);
        prop_assert_eq!(m, median(c, a, b));
        prop_assert_eq!(m, median(b, c, a));
        prop_assert!([a, b, c].contains(&m));
        let below = [a, b, c].iter().filter(|&&x| x <= m).count();
        let above = [a, b, c].iter().filter(|&&x| x >= m).count();
        prop_assert!(below >= 2 && above >= 2);
    }
}
