//! Seeded random games for property runs.
//!
//! Info set labels extend the previous own label with the own action and a
//! coarse signal, so perfect recall holds by construction. Action counts are
//! drawn once per label, which keeps availability consistent inside an info
//! set. Outcome labels are the payoff itself.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game_core::{
    build_game_with_caps, expand_model, ActionId, Caps, Frame, Game, GameError, Rational,
    StageModel,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RandomGameSpec {
    pub seed: u64,
    pub players: usize,
    pub thetas: usize,
    pub horizon: usize,
    /// Upper bound on actions per info set.
    pub max_actions: usize,
    /// Percent chance that a player gets an informative signal at a stage.
    pub observation: u32,
    /// Percent chance that play stops (everyone forced) after a stage.
    pub stop: u32,
    /// Payoffs are drawn from `0..=payoff_range`.
    pub payoff_range: i64,
}

impl RandomGameSpec {
    /// Small shapes: at most 3 actions, 3 stages and 2 nature states.
    pub fn from_seed(seed: u64) -> RandomGameSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let horizon = rng.gen_range(1..=3);
        let players = if horizon == 3 {
            rng.gen_range(1..=2)
        } else {
            rng.gen_range(1..=3)
        };
        RandomGameSpec {
            seed,
            players,
            thetas: rng.gen_range(1..=2),
            horizon,
            max_actions: rng.gen_range(2..=3),
            observation: rng.gen_range(0..=100),
            stop: rng.gen_range(0..=40),
            payoff_range: rng.gen_range(1..=4),
        }
    }

    /// One-shot variant of [`RandomGameSpec::from_seed`].
    pub fn static_from_seed(seed: u64) -> RandomGameSpec {
        RandomGameSpec {
            horizon: 1,
            stop: 0,
            ..RandomGameSpec::from_seed(seed)
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "seed={} players={} thetas={} horizon={} actions≤{} obs={}% stop={}% payoffs≤{}",
            self.seed,
            self.players,
            self.thetas,
            self.horizon,
            self.max_actions,
            self.observation,
            self.stop,
            self.payoff_range
        )
    }
}

#[derive(Clone, Debug)]
struct State {
    theta: usize,
    labels: Vec<String>,
    stopped: bool,
    depth: usize,
}

struct RandomModel<'a> {
    spec: &'a RandomGameSpec,
    rng: RefCell<ChaCha8Rng>,
    actions: RefCell<HashMap<(usize, String), Vec<ActionId>>>,
}

impl RandomModel<'_> {
    fn signal(&self, rng: &mut ChaCha8Rng) -> String {
        if rng.gen_range(0..100) < self.spec.observation {
            rng.gen_range(0..2).to_string()
        } else {
            "?".into()
        }
    }
}

impl StageModel for RandomModel<'_> {
    type State = State;

    fn root(&self, theta: usize) -> State {
        let mut rng = self.rng.borrow_mut();
        let labels = (0..self.spec.players)
            .map(|_| {
                // Private type: the own bit of θ, or nothing.
                if rng.gen_range(0..100) < self.spec.observation {
                    format!("t{}", theta)
                } else {
                    "t?".into()
                }
            })
            .collect();
        State {
            theta,
            labels,
            stopped: false,
            depth: 0,
        }
    }

    fn info(&self, s: &State, player: usize) -> (String, Vec<ActionId>) {
        let label = s.labels[player].clone();
        if s.stopped {
            return (label, vec![0]);
        }
        let mut memo = self.actions.borrow_mut();
        let acts = memo
            .entry((player, label.clone()))
            .or_insert_with(|| {
                let k = self.rng.borrow_mut().gen_range(1..=self.spec.max_actions);
                (0..k).collect()
            })
            .clone();
        (label, acts)
    }

    fn advance(&self, s: &State, profile: &[ActionId]) -> State {
        let mut rng = self.rng.borrow_mut();
        let stopped = s.stopped || rng.gen_range(0..100) < self.spec.stop;
        let labels = (0..profile.len())
            .map(|j| {
                let sig = if stopped {
                    "x".to_string()
                } else {
                    self.signal(&mut rng)
                };
                format!("{}/{}:{}", s.labels[j], profile[j], sig)
            })
            .collect();
        State {
            theta: s.theta,
            labels,
            stopped,
            depth: s.depth + 1,
        }
    }

    fn outcome(&self, _s: &State, _player: usize) -> (String, Rational) {
        let u = self.rng.borrow_mut().gen_range(0..=self.spec.payoff_range);
        (u.to_string(), Rational::from_integer(u))
    }
}

/// Builds the game of `spec`. Identical specs give identical games.
pub fn random_game(spec: &RandomGameSpec) -> Result<Game, GameError> {
    random_game_with_caps(spec, Caps::default())
}

pub fn random_game_with_caps(spec: &RandomGameSpec, caps: Caps) -> Result<Game, GameError> {
    let frame = Frame {
        players: (1..=spec.players).map(|j| format!("p{j}")).collect(),
        nature: (0..spec.thetas).map(|t| format!("θ{t}")).collect(),
        horizon: spec.horizon,
        actions: vec![(0..spec.max_actions).map(|a| format!("a{a}")).collect(); spec.players],
    };
    let model = RandomModel {
        spec,
        rng: RefCell::new(ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5e_ed0f_9a3e)),
        actions: RefCell::new(HashMap::new()),
    };
    let def = expand_model(&frame, &model, caps)?;
    build_game_with_caps(&def, caps)
}
