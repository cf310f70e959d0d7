//! Grab or Nab: a 2×2 stage game, once or twice, with no monitoring.

use crate::flow_games::{FlowGame, Utility};
use crate::game_core::{expand_model, ActionId, Caps, Frame, Rational, Slot, StageModel};

pub const GRAB: ActionId = 0;
pub const NAB: ActionId = 1;

/// Stage payoff of `player` at the profile.
pub fn stage_payoff(profile: &[ActionId], player: usize) -> i64 {
    let own = profile[player];
    let other = profile[1 - player];
    match (own, other) {
        (NAB, NAB) => 0,
        (NAB, GRAB) => 2,
        (GRAB, NAB) => 3,
        _ => 5,
    }
}

struct GrabOrNab;

impl StageModel for GrabOrNab {
    type State = Vec<Vec<ActionId>>;

    fn root(&self, _theta: usize) -> Self::State {
        Vec::new()
    }

    fn info(&self, s: &Self::State, player: usize) -> (String, Vec<ActionId>) {
        let stage = s.len() + 1;
        let own: Vec<&str> = s.iter().map(|p| ["G", "N"][p[player]]).collect();
        let label = if stage == 1 {
            "stage1".to_string()
        } else {
            format!("stage{stage}.after-{}", own.join(""))
        };
        (label, vec![GRAB, NAB])
    }

    fn advance(&self, s: &Self::State, profile: &[ActionId]) -> Self::State {
        let mut next = s.clone();
        next.push(profile.to_vec());
        next
    }

    fn outcome(&self, _s: &Self::State, _player: usize) -> (String, Rational) {
        (String::new(), Rational::from_integer(0))
    }

    fn stage_outcome(&self, _s: &Self::State, profile: &[ActionId], player: usize) -> Vec<Slot> {
        vec![Some(Rational::from_integer(stage_payoff(profile, player)))]
    }
}

fn build(stages: usize) -> FlowGame {
    let frame = Frame {
        players: vec!["1".into(), "2".into()],
        nature: vec!["θ".into()],
        horizon: stages,
        actions: vec![vec!["G".into(), "N".into()], vec!["G".into(), "N".into()]],
    };
    let def = expand_model(&frame, &GrabOrNab, Caps::default()).expect("expands");
    let space: Vec<Slot> = [None, Some(0), Some(2), Some(3), Some(5)]
        .iter()
        .map(|v| v.map(Rational::from_integer))
        .collect();
    let spaces = vec![vec![vec![space.clone()]; stages]; 2];
    FlowGame::build(
        def,
        vec![1; stages],
        spaces,
        Utility::Additive,
        Caps::default(),
    )
    .expect("valid flow game")
}

/// The twice-repeated game with one payoff slot per stage.
pub fn gen_grab_or_nab() -> FlowGame {
    build(2)
}

/// The stage game on its own.
pub fn gen_grab_or_nab_stage() -> FlowGame {
    build(1)
}
