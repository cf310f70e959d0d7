//! Four-stage centipede between Ann and Bob.

use crate::game_core::{
    build_game, expand_model, ActionId, Caps, Frame, Game, Rational, StageModel,
};

const ACROSS: ActionId = 0;
const DOWN: ActionId = 1;
const WAIT: ActionId = 2;

/// Payoffs `(Ann, Bob)` when the mover plays down at stage `t`, then at the end.
const PAYOFFS: [(i64, i64); 5] = [(2, 0), (0, 1), (1, 0), (0, 1), (3, 3)];

struct Centipede;

#[derive(Clone)]
struct State {
    moves: Vec<ActionId>,
    down_at: Option<usize>,
}

impl StageModel for Centipede {
    type State = State;

    fn root(&self, _theta: usize) -> State {
        State {
            moves: Vec::new(),
            down_at: None,
        }
    }

    fn info(&self, s: &State, player: usize) -> (String, Vec<ActionId>) {
        let stage = s.moves.len() + 1;
        let mover = (stage + 1) % 2;
        if s.down_at.is_some() || mover != player {
            let path: Vec<&str> = s
                .moves
                .iter()
                .map(|&a| ["across", "down", "wait"][a])
                .collect();
            return (format!("idle:{}", path.join(".")), vec![WAIT]);
        }
        let label = if stage == 1 {
            "root".to_string()
        } else {
            vec!["across"; stage - 1].join(".")
        };
        (label, vec![ACROSS, DOWN])
    }

    fn advance(&self, s: &State, profile: &[ActionId]) -> State {
        let stage = s.moves.len() + 1;
        let mover = (stage + 1) % 2;
        let mut next = s.clone();
        let a = profile[mover];
        next.moves.push(if s.down_at.is_some() { WAIT } else { a });
        if s.down_at.is_none() && a == DOWN {
            next.down_at = Some(stage);
        }
        next
    }

    fn outcome(&self, s: &State, player: usize) -> (String, Rational) {
        let (label, k) = match s.down_at {
            Some(t) => (format!("down@{t}"), t - 1),
            None => ("across@4".to_string(), 4),
        };
        let (ann, bob) = PAYOFFS[k];
        (
            label,
            Rational::from_integer(if player == 0 { ann } else { bob }),
        )
    }
}

pub fn gen_centipede() -> Game {
    let frame = Frame {
        players: vec!["Ann".into(), "Bob".into()],
        nature: vec!["θ".into()],
        horizon: 4,
        actions: vec![
            vec!["across".into(), "down".into(), "wait".into()],
            vec!["across".into(), "down".into(), "wait".into()],
        ],
    };
    let def = expand_model(&frame, &Centipede, Caps::default()).expect("centipede expands");
    build_game(&def).expect("centipede is valid")
}
