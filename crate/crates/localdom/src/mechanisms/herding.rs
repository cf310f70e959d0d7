//! Herding game: a dog calls sheep down a hill in stops; each sheep wants to
//! sleep strictly closest to the guard post at 2/3 of the average sleeping
//! altitude.

use std::sync::Arc;

use num_traits::Signed;

use crate::dominance::{Partition, PartitionFamily};
use crate::game_core::{
    build_game, expand_model, ActionId, Caps, Frame, Game, Rational, StageModel,
};
use crate::mechanisms::{join, MechanismError};

#[derive(Clone, Debug, PartialEq)]
pub struct HerdingParams {
    pub sheep: usize,
    /// Altitudes where a sheep may stop; the highest is the hilltop.
    pub grid: Vec<i64>,
    /// Strictly decreasing dog positions.
    pub stops: Vec<i64>,
}

impl HerdingParams {
    pub fn desk() -> HerdingParams {
        HerdingParams {
            sheep: 2,
            grid: (1..=7).collect(),
            stops: vec![6, 4, 1],
        }
    }
}

#[derive(Clone, Debug)]
struct State {
    round: usize,
    /// Current altitude per sheep.
    at: Vec<i64>,
    awake: Vec<bool>,
    counts: Vec<usize>,
    acts: Vec<Vec<ActionId>>,
}

struct Herding<'a> {
    params: &'a HerdingParams,
    top: i64,
}

impl Herding<'_> {
    fn action_of(&self, altitude: i64) -> ActionId {
        self.params
            .grid
            .iter()
            .position(|&g| g == altitude)
            .expect("grid altitude")
    }
}

impl StageModel for Herding<'_> {
    type State = State;

    fn root(&self, _theta: usize) -> State {
        let n = self.params.sheep;
        State {
            round: 0,
            at: vec![self.top; n],
            awake: vec![true; n],
            counts: Vec::new(),
            acts: vec![Vec::new(); n],
        }
    }

    fn info(&self, s: &State, player: usize) -> (String, Vec<ActionId>) {
        let grid = &self.params.grid;
        let own = join(
            &s.acts[player].iter().map(|&a| grid[a]).collect::<Vec<_>>(),
            ",",
        );
        let seen = join(&s.counts, ",");
        let label = format!(
            "moves={};reached={}",
            if own.is_empty() { "-" } else { &own },
            if seen.is_empty() { "-" } else { &seen }
        );
        if !s.awake[player] {
            return (label, vec![self.action_of(s.at[player])]);
        }
        let stop = self.params.stops[s.round];
        let w = s.at[player];
        let acts = (0..grid.len())
            .filter(|&k| grid[k] >= stop && grid[k] <= w)
            .collect();
        (label, acts)
    }

    fn advance(&self, s: &State, profile: &[ActionId]) -> State {
        let stop = self.params.stops[s.round];
        let mut next = s.clone();
        next.round += 1;
        for (j, &a) in profile.iter().enumerate() {
            next.acts[j].push(a);
            if s.awake[j] {
                let x = self.params.grid[a];
                next.at[j] = x;
                next.awake[j] = x == stop;
            }
        }
        next.counts.push(next.awake.iter().filter(|&&w| w).count());
        next
    }

    fn outcome(&self, s: &State, player: usize) -> (String, Rational) {
        let n = s.at.len() as i64;
        let total: i64 = s.at.iter().sum();
        let guard = Rational::new(2 * total, 3 * n);
        let dist = |x: i64| (Rational::from_integer(x) - guard).abs();
        let mine = dist(s.at[player]);
        let closest = (0..s.at.len())
            .filter(|&j| j != player)
            .all(|j| mine < dist(s.at[j]));
        let label = format!(
            "sleep@{}{}",
            s.at[player],
            if closest { ":closest" } else { "" }
        );
        (label, Rational::from_integer(closest as i64))
    }
}

pub fn gen_herding(params: &HerdingParams) -> Result<Game, MechanismError> {
    if params.sheep == 0 {
        return Err(MechanismError::BadParams("need at least one sheep".into()));
    }
    if params.stops.is_empty() || params.stops.windows(2).any(|w| w[0] <= w[1]) {
        return Err(MechanismError::BadGrid(
            "stops must be nonempty and strictly decreasing".into(),
        ));
    }
    if params.stops.iter().any(|s| !params.grid.contains(s)) {
        return Err(MechanismError::BadGrid(
            "every stop must lie on the altitude grid".into(),
        ));
    }
    let mut sorted = params.grid.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != params.grid.len() || sorted.iter().any(|&g| g <= 0) {
        return Err(MechanismError::BadGrid(
            "altitudes must be distinct and positive".into(),
        ));
    }
    let top = *sorted.last().expect("nonempty");
    if params.stops[0] > top {
        return Err(MechanismError::BadGrid(
            "the first stop lies above the hilltop".into(),
        ));
    }
    let frame = Frame {
        players: (1..=params.sheep).map(|j| format!("sheep{j}")).collect(),
        nature: vec!["dusk".into()],
        horizon: params.stops.len(),
        actions: vec![params.grid.iter().map(|g| g.to_string()).collect(); params.sheep],
    };
    let model = Herding { params, top };
    let def = expand_model(&frame, &model, Caps::from_env().unwrap_or_default())?;
    Ok(build_game(&def)?)
}

/// Two scenarios per compared pair: whether some other sheep also takes the
/// first action of the pair in the current round.
pub fn herding_partition() -> PartitionFamily {
    PartitionFamily::Custom(Arc::new(|local, abar, _a| {
        let game = local.game();
        let i = local.player();
        let labels: Vec<bool> = (0..local.members.len())
            .map(|m| {
                let child = game.node(local.one_step(abar, m));
                (0..game.n_players()).any(|j| j != i && child.profile[j] == abar)
            })
            .collect();
        Partition::from_labels(&labels)
    }))
}
