//! Discrete Ausubel clinching auction for `M` identical units.
//!
//! Prices ascend round by round. Bids are monotone: each round a bidder
//! names a quantity no larger than her previous bid (the first cap is `M`).
//! While total demand exceeds supply, each bidder clinches whatever the
//! others leave uncovered, paying the current price per newly clinched unit.
//! Once demand no longer exceeds supply the auction closes with sequential
//! rationing in the fixed order `1..n`: bidder `i` may be raised up to what
//! is left after earlier bidders keep their previous bids and later bidders
//! keep their current ones, never above her previous bid. Bidders never see
//! the others' bids, only whether the auction has closed.

use std::collections::BTreeSet;

use crate::flow_games::{median, AusubelUtility, Decomposition, FlowGame, Utility};
use crate::game_core::{expand_model, ActionId, Caps, Frame, GameDef, Rational, Slot, StageModel};
use crate::mechanisms::{join, label_rational, MechanismError};

#[derive(Clone, Debug, PartialEq)]
pub struct AusubelParams {
    pub supply: i64,
    pub bidders: usize,
    /// Strictly ascending, one per round.
    pub prices: Vec<Rational>,
    /// Marginal values `[θ][bidder][unit]`, non-increasing per bidder.
    pub values: Vec<Vec<Vec<Rational>>>,
    pub decomposition: Decomposition,
}

impl AusubelParams {
    pub fn desk(decomposition: Decomposition) -> AusubelParams {
        let v = vec![Rational::new(5, 2), Rational::new(3, 2)];
        AusubelParams {
            supply: 2,
            bidders: 2,
            prices: vec![Rational::from_integer(1), Rational::from_integer(2)],
            values: vec![vec![v.clone(), v]],
            decomposition,
        }
    }

    /// Units worth at least `price` to the bidder.
    pub fn demand(&self, theta: usize, bidder: usize, price: Rational) -> i64 {
        self.values[theta][bidder]
            .iter()
            .filter(|&&v| v >= price)
            .count() as i64
    }
}

/// One round's bookkeeping for a bidder, as seen by the auctioneer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub bid: i64,
    pub clinched: i64,
    pub cap: i64,
    pub previous_bid: i64,
    pub previous_clinched: i64,
    pub closing: bool,
    pub final_quantity: Option<i64>,
}

#[derive(Clone, Debug)]
pub struct State {
    round: usize,
    theta: usize,
    prev_bid: Vec<i64>,
    prev_q: Vec<i64>,
    payment: Vec<Rational>,
    closed: Option<usize>,
    final_q: Vec<i64>,
    acts: Vec<Vec<ActionId>>,
}

pub struct Ausubel<'a> {
    pub params: &'a AusubelParams,
}

impl Ausubel<'_> {
    /// Per-bidder records of a round played at `s` with `bids`.
    pub fn round_records(&self, s: &State, bids: &[i64]) -> Vec<RoundRecord> {
        let m = self.params.supply;
        let n = bids.len();
        let total: i64 = bids.iter().sum();
        let last = s.round + 1 == self.params.prices.len();
        (0..n)
            .map(|i| {
                let others: i64 = total - bids[i];
                let q = (m - others).max(0);
                let earlier: i64 = (0..i).map(|j| s.prev_bid[j]).sum();
                let later: i64 = (i + 1..n).map(|j| bids[j]).sum();
                let cap = (m - earlier - later).clamp(0, m);
                if total <= m {
                    let fin = median(bids[i], cap, s.prev_bid[i]).max(s.prev_q[i]);
                    RoundRecord {
                        bid: bids[i],
                        clinched: q.min(bids[i]),
                        cap,
                        previous_bid: s.prev_bid[i],
                        previous_clinched: s.prev_q[i],
                        closing: true,
                        final_quantity: Some(fin),
                    }
                } else if last {
                    RoundRecord {
                        bid: bids[i],
                        clinched: q,
                        cap: q,
                        previous_bid: s.prev_bid[i],
                        previous_clinched: s.prev_q[i],
                        closing: true,
                        final_quantity: Some(q),
                    }
                } else {
                    RoundRecord {
                        bid: bids[i],
                        clinched: q,
                        cap,
                        previous_bid: s.prev_bid[i],
                        previous_clinched: s.prev_q[i],
                        closing: false,
                        final_quantity: None,
                    }
                }
            })
            .collect()
    }

    fn bids_of(&self, _s: &State, profile: &[ActionId]) -> Vec<i64> {
        profile.iter().map(|&a| a as i64).collect()
    }
}

impl StageModel for Ausubel<'_> {
    type State = State;

    fn root(&self, theta: usize) -> State {
        let n = self.params.bidders;
        State {
            round: 0,
            theta,
            prev_bid: vec![self.params.supply; n],
            prev_q: vec![0; n],
            payment: vec![Rational::from_integer(0); n],
            closed: None,
            final_q: vec![0; n],
            acts: vec![Vec::new(); n],
        }
    }

    fn info(&self, s: &State, player: usize) -> (String, Vec<ActionId>) {
        let values = join(
            &self.params.values[s.theta][player]
                .iter()
                .map(label_rational)
                .collect::<Vec<_>>(),
            ",",
        );
        let own = join(&s.acts[player], ",");
        let status = s
            .closed
            .map_or("open".to_string(), |r| format!("closed@{}", r + 1));
        let label = format!(
            "v=({values});bids={};{status}",
            if own.is_empty() { "-" } else { &own }
        );
        if s.closed.is_some() {
            return (label, vec![s.prev_bid[player] as ActionId]);
        }
        (label, (0..=s.prev_bid[player] as ActionId).collect())
    }

    fn advance(&self, s: &State, profile: &[ActionId]) -> State {
        let mut next = s.clone();
        next.round += 1;
        for (j, &a) in profile.iter().enumerate() {
            next.acts[j].push(a);
        }
        if s.closed.is_some() {
            return next;
        }
        let bids = self.bids_of(s, profile);
        let price = self.params.prices[s.round];
        let records = self.round_records(s, &bids);
        for (j, r) in records.iter().enumerate() {
            match r.final_quantity {
                Some(f) => {
                    next.payment[j] += price * Rational::from_integer(f - s.prev_q[j]);
                    next.final_q[j] = f;
                }
                None => {
                    next.payment[j] += price * Rational::from_integer(r.clinched - s.prev_q[j]);
                    next.prev_q[j] = r.clinched;
                }
            }
            next.prev_bid[j] = bids[j];
        }
        if records.iter().any(|r| r.closing) {
            next.closed = Some(s.round);
        }
        next
    }

    fn outcome(&self, _s: &State, _player: usize) -> (String, Rational) {
        (String::new(), Rational::from_integer(0))
    }

    fn stage_outcome(&self, s: &State, profile: &[ActionId], player: usize) -> Vec<Slot> {
        let int = |x: i64| Some(Rational::from_integer(x));
        if s.closed.is_some() {
            return match self.params.decomposition {
                Decomposition::ExcessWithBounds => vec![None; 3],
                Decomposition::FinalOnly => vec![None; 2],
            };
        }
        let bids = self.bids_of(s, profile);
        let r = &self.round_records(s, &bids)[player];
        match self.params.decomposition {
            Decomposition::ExcessWithBounds => {
                vec![int(r.bid), int(r.bid.min(r.clinched)), int(r.cap)]
            }
            Decomposition::FinalOnly => match r.final_quantity {
                None => vec![None; 2],
                Some(f) => {
                    let next = self.advance(s, profile);
                    vec![int(f), Some(next.payment[player])]
                }
            },
        }
    }
}

impl Ausubel<'_> {
    /// Records of every round along a play, for invariant checks.
    pub fn trace(&self, theta: usize, profiles: &[Vec<ActionId>]) -> Vec<Vec<RoundRecord>> {
        let mut s = self.root(theta);
        let mut out = Vec::new();
        for p in profiles {
            if s.closed.is_none() {
                out.push(self.round_records(&s, &self.bids_of(&s, p)));
            }
            s = self.advance(&s, p);
        }
        out
    }

    /// Final quantities and payments at the end of a play.
    pub fn settle(&self, theta: usize, profiles: &[Vec<ActionId>]) -> (Vec<i64>, Vec<Rational>) {
        let mut s = self.root(theta);
        for p in profiles {
            s = self.advance(&s, p);
        }
        (s.final_q, s.payment)
    }
}

fn validate(params: &AusubelParams) -> Result<(), MechanismError> {
    if params.supply < 1 || params.bidders == 0 {
        return Err(MechanismError::BadParams(
            "need supply ≥ 1 and at least one bidder".into(),
        ));
    }
    if params.prices.is_empty() || params.prices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MechanismError::BadGrid(
            "prices must be nonempty and strictly ascending".into(),
        ));
    }
    if params.values.is_empty() {
        return Err(MechanismError::BadParams(
            "need at least one valuation profile".into(),
        ));
    }
    for theta in &params.values {
        if theta.len() != params.bidders {
            return Err(MechanismError::BadParams(
                "one value list per bidder".into(),
            ));
        }
        for v in theta {
            if v.len() != params.supply as usize {
                return Err(MechanismError::BadParams(
                    "one marginal value per unit".into(),
                ));
            }
            if v.windows(2).any(|w| w[0] < w[1]) {
                return Err(MechanismError::NonMonotoneValuations(join(
                    &v.iter().map(label_rational).collect::<Vec<_>>(),
                    ",",
                )));
            }
        }
    }
    Ok(())
}

pub fn gen_ausubel(params: &AusubelParams) -> Result<FlowGame, MechanismError> {
    validate(params)?;
    let n = params.bidders;
    let k = params.prices.len();
    let frame = Frame {
        players: (1..=n).map(|j| format!("bidder{j}")).collect(),
        nature: params
            .values
            .iter()
            .map(|t| {
                t.iter()
                    .map(|v| {
                        format!(
                            "({})",
                            join(&v.iter().map(label_rational).collect::<Vec<_>>(), ",")
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("/")
            })
            .collect(),
        horizon: k,
        actions: vec![(0..=params.supply).map(|q| q.to_string()).collect(); n],
    };
    let model = Ausubel { params };
    let caps = Caps::from_env().unwrap_or_default();
    let def = expand_model(&frame, &model, caps)?;
    let quantities: Vec<Slot> = std::iter::once(None)
        .chain((0..=params.supply).map(|q| Some(Rational::from_integer(q))))
        .collect();
    let (slots, spaces) = match params.decomposition {
        Decomposition::ExcessWithBounds => {
            (vec![3; k], vec![vec![vec![quantities.clone(); 3]; k]; n])
        }
        Decomposition::FinalOnly => {
            let payments = payment_space(&def, n);
            let spaces = (0..n)
                .map(|j| vec![vec![quantities.clone(), payments[j].clone()]; k])
                .collect();
            (vec![2; k], spaces)
        }
    };
    let utility = Utility::Ausubel(AusubelUtility {
        supply: params.supply,
        prices: params.prices.clone(),
        values: params.values.clone(),
        decomposition: params.decomposition,
    });
    Ok(FlowGame::build(def, slots, spaces, utility, caps)?)
}

/// Payments that occur anywhere in the tree, plus the dummy.
fn payment_space(def: &GameDef, n: usize) -> Vec<Vec<Slot>> {
    let mut sets: Vec<BTreeSet<Rational>> = vec![BTreeSet::new(); n];
    let stages = def
        .histories
        .iter()
        .map(|h| &h.stage)
        .chain(def.terminals.iter().map(|z| &z.stage));
    for stage in stages {
        for (j, ys) in stage.iter().enumerate() {
            if let Some(Some(p)) = ys.get(1) {
                sets[j].insert(*p);
            }
        }
    }
    sets.into_iter()
        .map(|s| {
            std::iter::once(None)
                .chain(s.into_iter().map(Some))
                .collect()
        })
        .collect()
}
