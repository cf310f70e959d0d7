//! Games whose outcomes mature stage by stage, derived stage preferences and
//! local stage-dominance.

use std::collections::HashMap;
use std::sync::RwLock;

use thiserror::Error;

use crate::dominance::{Counterexample, DominanceError, DominanceVerdict, Failure, WitnessEntry};
use crate::ending_analysis::{self, ProofMode, ProofnessReport};
use crate::game_core::{
    build_game_with_caps, format_slot, ActionId, Caps, Game, GameDef, GameError, NodeId, Rational,
    Slot,
};
use crate::strategy_space::{play, ExternalState, LocalView, Strategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error(
        "stage {stage} of {history} emits {found} slots for player {player}, expected {expected}"
    )]
    SlotCount {
        history: String,
        player: usize,
        stage: usize,
        found: usize,
        expected: usize,
    },
    #[error("slot value {value} at stage {stage}, slot {slot} is outside the declared space of player {player}")]
    SlotOutOfSpace {
        player: usize,
        stage: usize,
        slot: usize,
        value: String,
    },
    #[error("infeasible input: {0}")]
    InfeasibleInput(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// How units of an Ausubel outcome sequence are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decomposition {
    /// Per round `(bid, clinched-so-far, rationing cap)`.
    ExcessWithBounds,
    /// One `(quantity, payment)` pair at the closing round.
    FinalOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AusubelUtility {
    pub supply: i64,
    pub prices: Vec<Rational>,
    /// Marginal values `[θ][player][unit]`.
    pub values: Vec<Vec<Vec<Rational>>>,
    pub decomposition: Decomposition,
}

impl AusubelUtility {
    fn value_of(&self, theta: usize, player: usize, units: i64) -> Rational {
        let units = units.clamp(0, self.supply) as usize;
        self.values[theta][player][..units].iter().copied().sum()
    }

    fn eval(&self, player: usize, theta: usize, seq: &[Vec<Slot>]) -> Rational {
        let int = |s: &Slot| s.map(|r| r.to_integer()).unwrap_or(0);
        match self.decomposition {
            Decomposition::FinalOnly => {
                let mut total = Rational::from_integer(0);
                for stage in seq {
                    if let Some(Some(q)) = stage.first() {
                        let pay = stage.get(1).copied().flatten().unwrap_or_default();
                        total += self.value_of(theta, player, q.to_integer()) - pay;
                    }
                }
                total
            }
            Decomposition::ExcessWithBounds => {
                let live: Vec<usize> = (0..seq.len())
                    .filter(|&t| seq[t].first().is_some_and(|y| y.is_some()))
                    .collect();
                let mut prev_q = 0i64;
                let mut prev_b = self.supply;
                let mut paid = Rational::from_integer(0);
                let mut units = 0;
                for (k, &t) in live.iter().enumerate() {
                    let price = self.prices.get(t).copied().unwrap_or_default();
                    let b = int(&seq[t][0]);
                    let q = int(&seq[t][1]);
                    if k + 1 == live.len() {
                        let cap = int(&seq[t][2]);
                        let final_q = median(q, cap, prev_b).max(prev_q);
                        paid += price * Rational::from_integer(final_q - prev_q);
                        units = final_q;
                    } else {
                        paid += price * Rational::from_integer(q - prev_q);
                        prev_q = q;
                        units = q;
                    }
                    prev_b = b;
                }
                self.value_of(theta, player, units) - paid
            }
        }
    }
}

pub fn median(a: i64, b: i64, c: i64) -> i64 {
    let mut v = [a, b, c];
    v.sort_unstable();
    v[1]
}

/// Preferences over `Θ × Y_i`, represented by an exact utility.
#[derive(Clone, Debug, PartialEq)]
pub enum Utility {
    /// Sum of all slots, dummies counting as zero.
    Additive,
    Ausubel(AusubelUtility),
}

impl Utility {
    pub fn eval(&self, player: usize, theta: usize, seq: &[Vec<Slot>]) -> Rational {
        match self {
            Utility::Additive => seq.iter().flatten().map(|s| s.unwrap_or_default()).sum(),
            Utility::Ausubel(a) => a.eval(player, theta, seq),
        }
    }

    /// Additive utilities compare stage outcomes slot by slot.
    pub fn is_separable(&self) -> bool {
        matches!(self, Utility::Additive)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StagePreferenceVerdict {
    Equal,
    /// Strictly better under every completion.
    Strictly,
    /// At least as good under every completion, but neither equal nor strict.
    WeaklyPreferred,
    /// At least as bad under every completion, and not equal.
    Dispreferred {
        witness: Vec<Vec<Slot>>,
    },
    Incomparable {
        witness: Vec<Vec<Slot>>,
    },
}

impl StagePreferenceVerdict {
    /// Whether the left side is weakly preferred.
    pub fn weakly(&self) -> bool {
        matches!(self, Self::Equal | Self::Strictly | Self::WeaklyPreferred)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Equal => "equal",
            Self::Strictly => "strictly",
            Self::WeaklyPreferred => "weaklyPreferred",
            Self::Dispreferred { .. } => "dispreferred",
            Self::Incomparable { .. } => "incomparable",
        }
    }
}

type PrefKey = (usize, usize, usize, usize, Slot, usize, Slot);

/// A multistage game with per-stage outcome slots and a utility over sequences.
#[derive(Debug)]
pub struct FlowGame {
    pub game: Game,
    /// `k(t)`, indexed by `t - 1`.
    pub slots: Vec<usize>,
    /// Declared slot spaces `[player][t - 1][r]`, each containing `d`.
    pub spaces: Vec<Vec<Vec<Vec<Slot>>>>,
    pub utility: Utility,
    cache: RwLock<HashMap<PrefKey, StagePreferenceVerdict>>,
}

fn render_sequence(seq: &[Vec<Slot>]) -> String {
    seq.iter()
        .map(|stage| {
            let parts: Vec<String> = stage.iter().map(format_slot).collect();
            if parts.len() == 1 {
                parts[0].clone()
            } else {
                format!("({})", parts.join(","))
            }
        })
        .collect::<Vec<_>>()
        .join("|")
}

impl FlowGame {
    /// Fills terminal outcomes and payoffs of `def` from its stage slots, then builds.
    pub fn build(
        mut def: GameDef,
        slots: Vec<usize>,
        spaces: Vec<Vec<Vec<Vec<Slot>>>>,
        utility: Utility,
        caps: Caps,
    ) -> Result<FlowGame, FlowError> {
        let n = def.players.len();
        if slots.len() != def.horizon {
            return Err(FlowError::InfeasibleInput(format!(
                "{} slot counts for horizon {}",
                slots.len(),
                def.horizon
            )));
        }
        let mut by_path: HashMap<(usize, Vec<Vec<ActionId>>), Vec<Vec<Slot>>> = HashMap::new();
        for h in &def.histories {
            if !h.path.is_empty() {
                by_path.insert((h.theta, h.path.clone()), h.stage.clone());
            }
        }
        let check = |stage: &Vec<Vec<Slot>>,
                     t: usize,
                     label: &dyn Fn() -> String|
         -> Result<(), FlowError> {
            for (j, ys) in stage.iter().enumerate().take(n) {
                if ys.len() != slots[t - 1] {
                    return Err(FlowError::SlotCount {
                        history: label(),
                        player: j,
                        stage: t,
                        found: ys.len(),
                        expected: slots[t - 1],
                    });
                }
                for (r, y) in ys.iter().enumerate() {
                    if !spaces[j][t - 1][r].contains(y) {
                        return Err(FlowError::SlotOutOfSpace {
                            player: j,
                            stage: t,
                            slot: r + 1,
                            value: format_slot(y),
                        });
                    }
                }
            }
            if stage.len() != n {
                return Err(FlowError::SlotCount {
                    history: label(),
                    player: stage.len(),
                    stage: t,
                    found: 0,
                    expected: slots[t - 1],
                });
            }
            Ok(())
        };
        for z in &mut def.terminals {
            let mut seqs: Vec<Vec<Vec<Slot>>> = vec![Vec::with_capacity(def.horizon); n];
            for t in 1..=def.horizon {
                let stage = if t == def.horizon {
                    z.stage.clone()
                } else {
                    by_path
                        .get(&(z.theta, z.path[..t].to_vec()))
                        .cloned()
                        .ok_or_else(|| {
                            FlowError::InfeasibleInput(format!("missing prefix of length {t}"))
                        })?
                };
                check(&stage, t, &|| {
                    format!("stage {t} of a history under nature state #{}", z.theta)
                })?;
                for j in 0..n {
                    seqs[j].push(stage[j].clone());
                }
            }
            z.outcomes = seqs.iter().map(|s| render_sequence(s)).collect();
            z.payoffs = (0..n).map(|j| utility.eval(j, z.theta, &seqs[j])).collect();
        }
        let game = build_game_with_caps(&def, caps)?;
        Ok(FlowGame {
            game,
            slots,
            spaces,
            utility,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Stage slots of `player` along the path to `z`, `[t - 1][r]`.
    pub fn sequence(&self, player: usize, z: NodeId) -> Vec<Vec<Slot>> {
        self.game.path(z)[1..]
            .iter()
            .map(|&v| self.game.node(v).stage[player].clone())
            .collect()
    }

    /// Slots of stages up to `t`, dummies afterwards.
    pub fn truncated(&self, player: usize, z: NodeId, t: usize) -> Vec<Vec<Slot>> {
        let mut seq = self.sequence(player, z);
        for (s, stage) in seq.iter_mut().enumerate() {
            if s + 1 > t {
                stage.iter_mut().for_each(|y| *y = None);
            }
        }
        seq
    }

    pub fn utility_of(&self, player: usize, theta: usize, seq: &[Vec<Slot>]) -> Rational {
        self.utility.eval(player, theta, seq)
    }

    /// Size of the completion space for slot `(t, r)`.
    pub fn completion_count(&self, player: usize, t: usize, r: usize) -> u128 {
        let mut count: u128 = 1;
        for (s, stage) in self.spaces[player].iter().enumerate() {
            for (q, space) in stage.iter().enumerate() {
                if s + 1 == t && q == r {
                    continue;
                }
                count = count.saturating_mul(space.len() as u128);
            }
        }
        count
    }

    /// Exhaustive derivation of the stage preference between two stage outcomes.
    pub fn stage_prefers_exhaustive(
        &self,
        player: usize,
        t: usize,
        r: usize,
        left: (usize, Slot),
        right: (usize, Slot),
    ) -> Result<StagePreferenceVerdict, FlowError> {
        let cap = self.game.caps().completions;
        let count = self.completion_count(player, t, r);
        if count > cap as u128 {
            return Err(FlowError::Game(GameError::SpaceCap {
                what: "stage-outcome completions".into(),
                cap,
                count: usize::try_from(count).unwrap_or(usize::MAX),
            }));
        }
        let spaces = &self.spaces[player];
        let mut seq: Vec<Vec<Slot>> = spaces.iter().map(|stage| vec![None; stage.len()]).collect();
        let positions: Vec<(usize, usize)> = spaces
            .iter()
            .enumerate()
            .flat_map(|(s, stage)| (0..stage.len()).map(move |q| (s, q)))
            .filter(|&(s, q)| !(s + 1 == t && q == r))
            .collect();
        let mut digits = vec![0usize; positions.len()];
        let (mut ge, mut le, mut gt) = (true, true, true);
        let mut ge_witness = None;
        let mut le_witness = None;
        loop {
            for (k, &(s, q)) in positions.iter().enumerate() {
                seq[s][q] = spaces[s][q][digits[k]];
            }
            seq[t - 1][r] = left.1;
            let ul = self.utility.eval(player, left.0, &seq);
            seq[t - 1][r] = right.1;
            let ur = self.utility.eval(player, right.0, &seq);
            if ul < ur && ge {
                ge = false;
                ge_witness = Some(seq.clone());
            }
            if ul > ur && le {
                le = false;
                le_witness = Some(seq.clone());
            }
            gt &= ul > ur;
            let mut k = 0;
            loop {
                if k == digits.len() {
                    break;
                }
                digits[k] += 1;
                if digits[k] < spaces[positions[k].0][positions[k].1].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
            if !ge && !le {
                break;
            }
        }
        Ok(match (ge, le) {
            (true, true) => StagePreferenceVerdict::Equal,
            (true, false) if gt => StagePreferenceVerdict::Strictly,
            (true, false) => StagePreferenceVerdict::WeaklyPreferred,
            (false, true) => StagePreferenceVerdict::Dispreferred {
                witness: ge_witness.unwrap_or_default(),
            },
            (false, false) => StagePreferenceVerdict::Incomparable {
                witness: ge_witness.or(le_witness).unwrap_or_default(),
            },
        })
    }

    /// Separable shortcut: compare the two slot values directly.
    fn stage_prefers_separable(&self, left: Slot, right: Slot) -> StagePreferenceVerdict {
        let l = left.unwrap_or_default();
        let r = right.unwrap_or_default();
        if l == r {
            StagePreferenceVerdict::Equal
        } else if l > r {
            StagePreferenceVerdict::Strictly
        } else {
            StagePreferenceVerdict::Dispreferred {
                witness: Vec::new(),
            }
        }
    }

    /// `(θ̄, ȳ) ≿^{t,r} (θ, y)`, memoized.
    pub fn stage_prefers(
        &self,
        player: usize,
        t: usize,
        r: usize,
        left: (usize, Slot),
        right: (usize, Slot),
    ) -> Result<StagePreferenceVerdict, FlowError> {
        let key = (player, t, r, left.0, left.1, right.0, right.1);
        if let Some(v) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let verdict = if self.utility.is_separable() && left.0 == right.0 {
            self.stage_prefers_separable(left.1, right.1)
        } else {
            self.stage_prefers_exhaustive(player, t, r, left, right)?
        };
        self.cache
            .write()
            .expect("cache lock")
            .insert(key, verdict.clone());
        Ok(verdict)
    }
}

/// `g_i^t(x^{t-1}, a)`: the stage outcomes of `player` after `profile` at `node`.
pub fn stage_outcome(
    fg: &FlowGame,
    player: usize,
    node: NodeId,
    profile: &[ActionId],
) -> Result<Vec<Slot>, FlowError> {
    let child = fg.game.child(node, profile).ok_or_else(|| {
        FlowError::InfeasibleInput(format!(
            "profile {:?} at {}",
            profile,
            fg.game.describe(node)
        ))
    })?;
    Ok(fg.game.node(child).stage[player].clone())
}

/// `ζ^t(s_i, s_{-i})`.
pub fn prefix_history(
    fg: &FlowGame,
    player: usize,
    own: &Strategy,
    ext: &ExternalState,
    t: usize,
) -> NodeId {
    let z = play(&fg.game, player, own, ext);
    fg.game.path(z)[t]
}

/// `ζ^h(a, e)` for member `m` of the local view.
pub fn one_step(local: &LocalView, a: ActionId, m: usize) -> NodeId {
    local.one_step(a, m)
}

/// Slots of `player` at every stage after `after` along the path to `z`.
fn future_slots(fg: &FlowGame, player: usize, z: NodeId, after: usize) -> Vec<Vec<Slot>> {
    fg.sequence(player, z).split_off(after)
}

fn mimics(fg: &FlowGame, local: &LocalView, zbar: NodeId, z: NodeId) -> bool {
    // Reuse the ending-analysis notion through concrete strategies' terminals.
    let game = &fg.game;
    let i = local.player();
    let stage = local.stage();
    let first = {
        let path = game.path(zbar);
        (stage..game.horizon())
            .find(|&d| game.is_active(i, game.node(path[d]).info[i]))
            .map(|d| d + 1)
    };
    match first {
        None => true,
        Some(t0) => {
            let pa = game.path(zbar);
            let pb = game.path(z);
            (t0..=game.horizon())
                .all(|t| game.node(pa[t]).profile[i] == game.node(pb[t]).profile[i])
        }
    }
}

/// Every plan after `a` has a mimicking plan after `ā` with the same future
/// stage outcomes on each scenario of `cell`.
pub fn is_locally_relevant(
    fg: &FlowGame,
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    cell: &[usize],
) -> Result<bool, DominanceError> {
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let i = local.player();
    let tau = local.stage();
    Ok((0..bad.plans.len()).all(|p| {
        (0..good.plans.len()).any(|q| {
            cell.iter().all(|&m| {
                let zq = good.outcomes[q][m];
                let zp = bad.outcomes[p][m];
                mimics(fg, local, zq, zp)
                    && future_slots(fg, i, zq, tau) == future_slots(fg, i, zp, tau)
            })
        })
    }))
}

/// The non-relevant branch of the first condition: some continuation after
/// `ā` is never worse than stopping there, and stopping there is never worse
/// than the plan after `a`.
fn continuation_comparison(
    fg: &FlowGame,
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    cell: &[usize],
) -> Result<Option<usize>, DominanceError> {
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let i = local.player();
    let tau = local.stage();
    let theta = |m: usize| local.external(m).theta;
    let mut qualified: Vec<(usize, Vec<Rational>)> = Vec::new();
    for q in 0..good.plans.len() {
        let mut truncated = Vec::with_capacity(cell.len());
        let mut ok = true;
        for &m in cell {
            let z = good.outcomes[q][m];
            let cut = fg.utility_of(i, theta(m), &fg.truncated(i, z, tau));
            if fg.game.payoff(z, i) < cut {
                ok = false;
                break;
            }
            truncated.push(cut);
        }
        if ok {
            qualified.push((q, truncated));
        }
    }
    for p in 0..bad.plans.len() {
        let beaten = qualified.iter().any(|(_, cuts)| {
            cell.iter()
                .zip(cuts)
                .all(|(&m, cut)| *cut >= fg.game.payoff(bad.outcomes[p][m], i))
        });
        if !beaten {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Local stage-dominance on the ending partition.
pub fn locally_s_dominates(
    fg: &FlowGame,
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<DominanceVerdict, DominanceError> {
    let ep = ending_analysis::ending_partition(local, abar, a)?;
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let i = local.player();
    let tau = local.stage();
    let k = fg.slots[tau - 1];
    let mut witnesses = Vec::new();
    let mut strict = false;
    for (c, (kind, cell)) in ep.cells().iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        if !is_locally_relevant(fg, local, abar, a, cell)? {
            if let Some(p) = continuation_comparison(fg, local, abar, a, cell)? {
                return Ok(DominanceVerdict::fails(Counterexample {
                    dominated: bad.plans[p].clone(),
                    failures: Vec::new(),
                    note: Some(format!(
                        "cell {} is not locally relevant and no continuation comparison holds",
                        kind.name()
                    )),
                }));
            }
        }
        let now_good: Vec<NodeId> = cell.iter().map(|&m| local.one_step(abar, m)).collect();
        let now_bad: Vec<NodeId> = cell.iter().map(|&m| local.one_step(a, m)).collect();
        for r in 0..k {
            let equal = now_good
                .iter()
                .zip(&now_bad)
                .all(|(&x, &y)| fg.game.node(x).stage[i][r] == fg.game.node(y).stage[i][r]);
            if equal {
                continue;
            }
            for (u, &mb) in cell.iter().enumerate() {
                for (v, &m) in cell.iter().enumerate() {
                    let left = (
                        local.external(mb).theta,
                        fg.game.node(now_good[u]).stage[i][r],
                    );
                    let right = (
                        local.external(m).theta,
                        fg.game.node(now_bad[v]).stage[i][r],
                    );
                    let verdict =
                        fg.stage_prefers(i, tau, r, left, right)
                            .map_err(|e| match e {
                                FlowError::Game(g) => DominanceError::Game(g),
                                other => DominanceError::BadPartition(other.to_string()),
                            })?;
                    if !verdict.weakly() {
                        return Ok(DominanceVerdict::fails(Counterexample {
                            dominated: bad.plans[0].clone(),
                            failures: vec![Failure {
                                candidate: good.plans[0].clone(),
                                cell: Some(c),
                                low: local.members[mb],
                                high: local.members[m],
                                info: None,
                            }],
                            note: Some(format!(
                                "slot {} of stage {} in cell {}: {} vs {} is {}",
                                r + 1,
                                tau,
                                kind.name(),
                                format_slot(&left.1),
                                format_slot(&right.1),
                                verdict.name()
                            )),
                        }));
                    }
                    strict |= matches!(verdict, StagePreferenceVerdict::Strictly);
                }
            }
        }
        for plan in &bad.plans {
            witnesses.push(WitnessEntry {
                dominated: plan.clone(),
                cell: Some(c),
                dominator: good.plans[0].clone(),
            });
        }
    }
    Ok(DominanceVerdict::holds(witnesses, strict))
}

pub fn s_strategy_proofness(
    fg: &FlowGame,
    player: usize,
    mode: ProofMode,
) -> Result<ProofnessReport, DominanceError> {
    ending_analysis::local_strategy_proofness(&fg.game, player, mode, |l, abar, a| {
        locally_s_dominates(fg, l, abar, a)
    })
}
