//! Japanese (ascending clock) auction for one object.
//!
//! Each round the price rises to the next grid point and every eligible
//! bidder chooses to bid or leave. The auction ends when at most one bidder
//! bids. A sole bidder wins at the current price. If everyone leaves, the
//! object goes by lottery among that round's deciders at the current price.
//! If two or more still bid at the last grid price, the lottery is among
//! them. Bidders observe only their own value, their own moves and whether
//! the auction has ended.

use crate::game_core::{
    build_game, expand_model, ActionId, Caps, Frame, Game, Rational, StageModel,
};
use crate::mechanisms::{join, label_rational, MechanismError};

pub const BID: ActionId = 0;
pub const LEAVE: ActionId = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct JapaneseParams {
    pub bidders: usize,
    /// Strictly ascending clock prices, one per round.
    pub prices: Vec<Rational>,
    /// Possible private values; nature draws one per bidder.
    pub values: Vec<Rational>,
    pub reentry: bool,
}

impl JapaneseParams {
    pub fn desk() -> JapaneseParams {
        JapaneseParams {
            bidders: 2,
            prices: (1..=3).map(Rational::from_integer).collect(),
            values: (0..=3).map(Rational::from_integer).collect(),
            reentry: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum End {
    Winner(usize, usize),
    /// Round and lottery participants.
    Lottery(usize, Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct State {
    round: usize,
    values: Vec<Rational>,
    eligible: Vec<bool>,
    acts: Vec<Vec<ActionId>>,
    end: Option<End>,
    ended_round: Option<usize>,
}

struct Japanese<'a> {
    params: &'a JapaneseParams,
    profiles: Vec<Vec<usize>>,
}

impl StageModel for Japanese<'_> {
    type State = State;

    fn root(&self, theta: usize) -> State {
        let n = self.params.bidders;
        State {
            round: 0,
            values: self.profiles[theta]
                .iter()
                .map(|&k| self.params.values[k])
                .collect(),
            eligible: vec![true; n],
            acts: vec![Vec::new(); n],
            end: None,
            ended_round: None,
        }
    }

    fn info(&self, s: &State, player: usize) -> (String, Vec<ActionId>) {
        let acts: Vec<&str> = s.acts[player]
            .iter()
            .map(|&a| if a == BID { "bid" } else { "leave" })
            .collect();
        let end = s
            .ended_round
            .map_or("open".to_string(), |r| format!("ended@{}", r + 1));
        let label = format!(
            "v={};{};{}",
            label_rational(&s.values[player]),
            if acts.is_empty() {
                "-".to_string()
            } else {
                acts.join(",")
            },
            end
        );
        let active = s.end.is_none() && s.eligible[player];
        (
            label,
            if active {
                vec![BID, LEAVE]
            } else {
                vec![LEAVE]
            },
        )
    }

    fn advance(&self, s: &State, profile: &[ActionId]) -> State {
        let n = self.params.bidders;
        let mut next = s.clone();
        for (j, &a) in profile.iter().enumerate() {
            next.acts[j].push(a);
        }
        next.round += 1;
        if s.end.is_some() {
            return next;
        }
        let deciders: Vec<usize> = (0..n).filter(|&j| s.eligible[j]).collect();
        let bidders: Vec<usize> = deciders
            .iter()
            .copied()
            .filter(|&j| profile[j] == BID)
            .collect();
        let last = s.round + 1 == self.params.prices.len();
        let end = match bidders.len() {
            0 => Some(End::Lottery(s.round, deciders)),
            1 => Some(End::Winner(bidders[0], s.round)),
            _ if last => Some(End::Lottery(s.round, bidders.clone())),
            _ => None,
        };
        if end.is_some() {
            next.end = end;
            next.ended_round = Some(s.round);
        } else if !self.params.reentry {
            next.eligible = (0..n).map(|j| bidders.contains(&j)).collect();
        }
        next
    }

    fn outcome(&self, s: &State, player: usize) -> (String, Rational) {
        let v = s.values[player];
        match s.end.as_ref().expect("every play ends by the last round") {
            End::Winner(w, r) if *w == player => {
                let p = self.params.prices[*r];
                (format!("win@{}", label_rational(&p)), v - p)
            }
            End::Lottery(r, group) if group.contains(&player) => {
                let p = self.params.prices[*r];
                let m = group.len() as i64;
                (
                    format!("lottery@{}/{}", label_rational(&p), m),
                    (v - p) / Rational::from_integer(m),
                )
            }
            _ => ("none".to_string(), Rational::from_integer(0)),
        }
    }
}

fn profiles(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..k).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn gen_japanese(params: &JapaneseParams) -> Result<Game, MechanismError> {
    if params.bidders == 0 {
        return Err(MechanismError::BadParams("at least one bidder".into()));
    }
    if params.prices.is_empty() || params.values.is_empty() {
        return Err(MechanismError::BadGrid(
            "price and value grids must be nonempty".into(),
        ));
    }
    if params.prices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MechanismError::BadGrid(
            "prices must be strictly ascending".into(),
        ));
    }
    let profiles = profiles(params.bidders, params.values.len());
    let nature = profiles
        .iter()
        .map(|p| {
            format!(
                "v=({})",
                join(
                    &p.iter()
                        .map(|&k| label_rational(&params.values[k]))
                        .collect::<Vec<_>>(),
                    ","
                )
            )
        })
        .collect();
    let frame = Frame {
        players: (1..=params.bidders).map(|j| format!("bidder{j}")).collect(),
        nature,
        horizon: params.prices.len(),
        actions: vec![vec!["bid".into(), "leave".into()]; params.bidders],
    };
    let model = Japanese { params, profiles };
    let def = expand_model(&frame, &model, Caps::from_env().unwrap_or_default())?;
    Ok(build_game(&def)?)
}
