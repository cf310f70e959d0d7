//! Terminating scenarios, the ending partition, mimicking, irrelevance and
//! local end-dominance.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::dominance::{
    dominant_action_by, ActionSearch, Counterexample, DominanceError, DominanceVerdict, Failure,
    Partition, WitnessEntry,
};
use crate::game_core::{ActionId, Game, NodeId};
use crate::strategy_space::{LocalView, PlayerView, Strategy};

/// Walks forced moves of the player from `x`; returns the first node where
/// the player is active, or `None` if play ends first.
fn next_active_node(local: &LocalView, m: usize, x: NodeId) -> Option<NodeId> {
    let game = local.game();
    let i = local.player();
    let ext = local.external(m);
    let mut cur = x;
    loop {
        let node = game.node(cur);
        if node.terminal.is_some() {
            return None;
        }
        let set = game.info(i, node.info[i]);
        if set.is_active() {
            return Some(cur);
        }
        let profile: Vec<ActionId> = (0..game.n_players())
            .map(|j| {
                if j == i {
                    set.actions[0]
                } else {
                    ext.profile[j]
                        .action(node.info[j])
                        .unwrap_or_else(|| game.info(j, node.info[j]).actions[0])
                }
            })
            .collect();
        cur = game.child(cur, &profile).expect("feasible");
    }
}

/// Scenarios after which taking `a` leaves the player no further active info set.
pub fn terminating_set(local: &LocalView, a: ActionId) -> Vec<usize> {
    (0..local.members.len())
        .filter(|&m| next_active_node(local, m, local.one_step(a, m)).is_none())
        .collect()
}

/// The four-way split of `S_{-i}(h)` by which of `ā`, `a` terminates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndingPartition {
    pub both_end: Vec<usize>,
    /// `a` terminates, `ā` does not.
    pub only_a_ends: Vec<usize>,
    /// `ā` terminates, `a` does not.
    pub only_abar_ends: Vec<usize>,
    pub neither_ends: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndingCell {
    BothEnd,
    OnlyAEnds,
    OnlyABarEnds,
    NeitherEnds,
}

impl EndingCell {
    pub fn name(self) -> &'static str {
        match self {
            EndingCell::BothEnd => "bothEnd",
            EndingCell::OnlyAEnds => "onlyAEnds",
            EndingCell::OnlyABarEnds => "onlyABarEnds",
            EndingCell::NeitherEnds => "neitherEnds",
        }
    }

    /// Whether `ā` terminates on this cell.
    pub fn abar_ends(self) -> bool {
        matches!(self, EndingCell::BothEnd | EndingCell::OnlyABarEnds)
    }
}

impl EndingPartition {
    pub fn cells(&self) -> [(EndingCell, &Vec<usize>); 4] {
        [
            (EndingCell::BothEnd, &self.both_end),
            (EndingCell::OnlyAEnds, &self.only_a_ends),
            (EndingCell::OnlyABarEnds, &self.only_abar_ends),
            (EndingCell::NeitherEnds, &self.neither_ends),
        ]
    }

    /// Nonempty cells as a canonical partition.
    pub fn as_partition(&self) -> Partition {
        let mut cells: Vec<Vec<usize>> = self
            .cells()
            .iter()
            .filter(|c| !c.1.is_empty())
            .map(|c| c.1.clone())
            .collect();
        cells.sort_unstable_by_key(|c| c[0]);
        Partition { cells }
    }
}

pub fn ending_partition(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<EndingPartition, DominanceError> {
    local.branch(abar)?;
    local.branch(a)?;
    let n = local.members.len();
    let mut t_abar = vec![false; n];
    let mut t_a = vec![false; n];
    for m in terminating_set(local, abar) {
        t_abar[m] = true;
    }
    for m in terminating_set(local, a) {
        t_a[m] = true;
    }
    let mut out = EndingPartition {
        both_end: vec![],
        only_a_ends: vec![],
        only_abar_ends: vec![],
        neither_ends: vec![],
    };
    for m in 0..n {
        match (t_abar[m], t_a[m]) {
            (true, true) => out.both_end.push(m),
            (false, true) => out.only_a_ends.push(m),
            (true, false) => out.only_abar_ends.push(m),
            (false, false) => out.neither_ends.push(m),
        }
    }
    Ok(out)
}

/// Cells by the first active info set reached after `a`, plus one residual
/// cell for scenarios where play ends first.
pub fn next_active_partition(local: &LocalView, a: ActionId) -> Result<Partition, DominanceError> {
    local.branch(a)?;
    let i = local.player();
    let labels: Vec<Option<usize>> = (0..local.members.len())
        .map(|m| {
            next_active_node(local, m, local.one_step(a, m)).map(|x| local.game().node(x).info[i])
        })
        .collect();
    Ok(Partition::from_labels(&labels))
}

/// Own actions by stage along the path to terminal `z`, indexed `0..T`.
fn own_actions(game: &Game, player: usize, z: NodeId) -> Vec<ActionId> {
    game.path(z)[1..]
        .iter()
        .map(|&v| game.node(v).profile[player])
        .collect()
}

/// First stage `t > τ(h)` at which the player is active on the path to `z`.
fn first_active_stage(game: &Game, player: usize, z: NodeId, after: usize) -> Option<usize> {
    let path = game.path(z);
    (after..game.horizon())
        .find(|&d| {
            let node = game.node(path[d]);
            game.is_active(player, node.info[player])
        })
        .map(|d| d + 1)
}

/// Mimicking on one scenario: from the first active stage after `h` on the
/// mimicking path, both paths carry the same own action at every stage.
fn mimics_on(game: &Game, player: usize, stage: usize, zbar: NodeId, z: NodeId) -> bool {
    match first_active_stage(game, player, zbar, stage) {
        None => true,
        Some(t0) => {
            let xs = own_actions(game, player, zbar);
            let ys = own_actions(game, player, z);
            (t0..=game.horizon()).all(|t| xs[t - 1] == ys[t - 1])
        }
    }
}

fn plan_mimics(
    local: &LocalView,
    abar: ActionId,
    q: usize,
    a: ActionId,
    p: usize,
    cell: &[usize],
) -> Result<bool, DominanceError> {
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let game = local.game();
    let i = local.player();
    let stage = local.stage();
    Ok(cell
        .iter()
        .all(|&m| mimics_on(game, i, stage, good.outcomes[q][m], bad.outcomes[p][m])))
}

/// Whether `sbar` mimics `s` after the view's info set on the scenarios `cell`.
pub fn mimicks(local: &LocalView, sbar: &Strategy, s: &Strategy, cell: &[usize]) -> bool {
    let game = local.game();
    let i = local.player();
    let stage = local.stage();
    cell.iter().all(|&m| {
        let e = local.external(m);
        let zbar = crate::strategy_space::play_from(game, i, sbar, e, local.entries[m]);
        let z = crate::strategy_space::play_from(game, i, s, e, local.entries[m]);
        mimics_on(game, i, stage, zbar, z)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Irrelevance {
    pub irrelevant: bool,
    /// `(plan after a, mimicking plan after ā)` indices.
    pub witnesses: Vec<(usize, usize)>,
    /// A plan after `a` with no outcome-matching mimic.
    pub failing: Option<usize>,
}

/// Every plan after `a` has a mimicking plan after `ā` with the same outcome
/// on each scenario of `cell`.
pub fn irrelevance(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    cell: &[usize],
) -> Result<Irrelevance, DominanceError> {
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let game = local.game();
    let i = local.player();
    let mut witnesses = Vec::with_capacity(bad.plans.len());
    for p in 0..bad.plans.len() {
        let mut found = None;
        for q in 0..good.plans.len() {
            let same = cell.iter().all(|&m| {
                game.outcome(good.outcomes[q][m], i) == game.outcome(bad.outcomes[p][m], i)
            });
            if same && plan_mimics(local, abar, q, a, p, cell)? {
                found = Some(q);
                break;
            }
        }
        match found {
            Some(q) => witnesses.push((p, q)),
            None => {
                return Ok(Irrelevance {
                    irrelevant: false,
                    witnesses,
                    failing: Some(p),
                })
            }
        }
    }
    Ok(Irrelevance {
        irrelevant: true,
        witnesses,
        failing: None,
    })
}

pub fn is_irrelevant(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    cell: &[usize],
) -> Result<bool, DominanceError> {
    Ok(irrelevance(local, abar, a, cell)?.irrelevant)
}

/// Worst and best own payoff of a plan over a cell, with the scenario attaining it.
fn min_max(
    local: &LocalView,
    row: &[NodeId],
    cell: &[usize],
) -> (
    (crate::game_core::Rational, usize),
    (crate::game_core::Rational, usize),
) {
    let game = local.game();
    let i = local.player();
    let mut lo = (game.payoff(row[cell[0]], i), cell[0]);
    let mut hi = lo;
    for &m in &cell[1..] {
        let u = game.payoff(row[m], i);
        if u < lo.0 {
            lo = (u, m);
        }
        if u > hi.0 {
            hi = (u, m);
        }
    }
    (lo, hi)
}

/// Local end-dominance: on every relevant cell of the ending partition, each
/// plan after `a` is beaten by a mimicking plan after `ā` in the worst case.
pub fn locally_e_dominates(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<DominanceVerdict, DominanceError> {
    let ep = ending_partition(local, abar, a)?;
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let mut witnesses = Vec::new();
    let mut strict = false;
    for (c, (kind, cell)) in ep.cells().iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        let irr = irrelevance(local, abar, a, cell)?;
        if irr.irrelevant {
            for &(p, q) in &irr.witnesses {
                witnesses.push(WitnessEntry {
                    dominated: bad.plans[p].clone(),
                    cell: Some(c),
                    dominator: good.plans[q].clone(),
                });
            }
            continue;
        }
        if kind.abar_ends() {
            // After ā the player never moves again, so every plan after ā
            // yields the same play and mimicking is vacuous.
            let top = min_max(local, &good.outcomes[0], cell).0;
            let mut worst_bad = None;
            for p in 0..bad.plans.len() {
                let hi = min_max(local, &bad.outcomes[p], cell).1;
                if worst_bad.is_none_or(|(u, _, _)| hi.0 > u) {
                    worst_bad = Some((hi.0, hi.1, p));
                }
            }
            let (hi, hm, hp) = worst_bad.expect("nonempty plans");
            if top.0 < hi {
                let failures = good
                    .plans
                    .iter()
                    .take(64)
                    .map(|q| Failure {
                        candidate: q.clone(),
                        cell: Some(c),
                        low: local.members[top.1],
                        high: local.members[hm],
                        info: None,
                    })
                    .collect();
                return Ok(DominanceVerdict::fails(Counterexample {
                    dominated: bad.plans[hp].clone(),
                    failures,
                    note: Some(format!("relevant cell {} fails", kind.name())),
                }));
            }
            strict |= top.0 > hi;
            for p in 0..bad.plans.len() {
                witnesses.push(WitnessEntry {
                    dominated: bad.plans[p].clone(),
                    cell: Some(c),
                    dominator: good.plans[0].clone(),
                });
            }
            continue;
        }
        for p in 0..bad.plans.len() {
            let hi = min_max(local, &bad.outcomes[p], cell).1;
            let mut found = None;
            let mut failures = Vec::new();
            for q in 0..good.plans.len() {
                let lo = min_max(local, &good.outcomes[q], cell).0;
                let mimics = plan_mimics(local, abar, q, a, p, cell)?;
                if lo.0 >= hi.0 && mimics {
                    found = Some((q, lo.0));
                    break;
                }
                if failures.len() < 64 {
                    failures.push(Failure {
                        candidate: good.plans[q].clone(),
                        cell: Some(c),
                        low: local.members[lo.1],
                        high: local.members[hi.1],
                        info: None,
                    });
                }
            }
            match found {
                Some((q, lo)) => {
                    strict |= lo > hi.0;
                    witnesses.push(WitnessEntry {
                        dominated: bad.plans[p].clone(),
                        cell: Some(c),
                        dominator: good.plans[q].clone(),
                    });
                }
                None => {
                    return Ok(DominanceVerdict::fails(Counterexample {
                        dominated: bad.plans[p].clone(),
                        failures,
                        note: Some(format!(
                            "relevant cell {} has no mimicking dominator",
                            kind.name()
                        )),
                    }))
                }
            }
        }
    }
    Ok(DominanceVerdict::holds(witnesses, strict))
}

/// At every history of the info set and for every opponent profile, `ā`
/// and `a` yield the same outcome. Defined where the next histories are terminal.
pub fn strategically_equivalent(
    game: &Game,
    player: usize,
    info: usize,
    abar: ActionId,
    a: ActionId,
) -> bool {
    let set = game.info(player, info);
    set.members.iter().all(|&x| {
        let node = game.node(x);
        let lists: Vec<Vec<ActionId>> = (0..game.n_players())
            .map(|j| {
                if j == player {
                    vec![abar]
                } else {
                    game.info(j, node.info[j]).actions.clone()
                }
            })
            .collect();
        crate::game_core::product(&lists)
            .into_iter()
            .all(|mut prof| {
                let za = game.child(x, &prof).expect("feasible");
                prof[player] = a;
                let zb = game.child(x, &prof).expect("feasible");
                game.is_terminal(za)
                    && game.is_terminal(zb)
                    && game.outcome(za, player) == game.outcome(zb, player)
            })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofMode {
    Everywhere,
    OnPath,
}

#[derive(Clone, Debug)]
pub struct InfoVerdict {
    pub player: usize,
    pub info: usize,
    pub label: String,
    pub on_path: bool,
    pub search: ActionSearch,
}

#[derive(Clone, Debug)]
pub struct ProofnessReport {
    pub player: usize,
    pub mode: ProofMode,
    pub holds: bool,
    pub verdicts: Vec<InfoVerdict>,
    /// The strategy that plays the dominant action wherever one exists.
    pub induced: Option<Strategy>,
    /// First info set (of any player) on path without a dominant action.
    pub blocked: Option<(usize, usize)>,
}

/// Assembles the strategy playing `choice` at each reached info set.
fn induced_strategy(
    game: &Game,
    player: usize,
    choice: &HashMap<usize, ActionId>,
) -> Option<Strategy> {
    let mut s = Strategy::blank(game.info_sets(player).len());
    let mut stack: Vec<usize> = (0..game.info_sets(player).len())
        .filter(|&k| game.info(player, k).stage == 1)
        .collect();
    while let Some(k) = stack.pop() {
        let set = game.info(player, k);
        let a = if set.is_active() {
            *choice.get(&k)?
        } else {
            set.actions[0]
        };
        s.assign[k] = Some(a);
        if let Some(next) = set.succ.get(&a) {
            stack.extend(next.iter().copied());
        }
    }
    Some(s)
}

/// Local strategy-proofness of one player under a pairwise check.
pub fn local_strategy_proofness<F>(
    game: &Game,
    player: usize,
    mode: ProofMode,
    check: F,
) -> Result<ProofnessReport, DominanceError>
where
    F: Fn(&LocalView, ActionId, ActionId) -> Result<DominanceVerdict, DominanceError> + Sync,
{
    match mode {
        ProofMode::Everywhere => {
            let view = PlayerView::new(game, player)?;
            let infos = game.active_info_sets(player);
            let results: Vec<Result<InfoVerdict, DominanceError>> = infos
                .par_iter()
                .map(|&k| {
                    let local = view.local(k);
                    let search = dominant_action_by(&local, &check)?;
                    Ok(InfoVerdict {
                        player,
                        info: k,
                        label: game.info(player, k).label.clone(),
                        on_path: false,
                        search,
                    })
                })
                .collect();
            let mut verdicts = Vec::with_capacity(results.len());
            for r in results {
                verdicts.push(r?);
            }
            let choice: HashMap<usize, ActionId> = verdicts
                .iter()
                .filter_map(|v| v.search.found.map(|a| (v.info, a)))
                .collect();
            let holds = verdicts.iter().all(|v| v.search.found.is_some());
            let blocked = verdicts
                .iter()
                .find(|v| v.search.found.is_none())
                .map(|v| (player, v.info));
            Ok(ProofnessReport {
                player,
                mode,
                holds,
                induced: induced_strategy(game, player, &choice),
                verdicts,
                blocked,
            })
        }
        ProofMode::OnPath => {
            let views: Vec<PlayerView> = (0..game.n_players())
                .map(|j| PlayerView::new(game, j))
                .collect::<Result<_, _>>()?;
            let mut memo: HashMap<(usize, usize), ActionSearch> = HashMap::new();
            let mut order: Vec<(usize, usize)> = Vec::new();
            let mut blocked = None;
            'theta: for theta in 0..game.nature().len() {
                let mut x = game.root(theta);
                while !game.is_terminal(x) {
                    let mut profile = Vec::with_capacity(game.n_players());
                    for j in 0..game.n_players() {
                        let k = game.node(x).info[j];
                        let set = game.info(j, k);
                        if !set.is_active() {
                            profile.push(set.actions[0]);
                            continue;
                        }
                        if let Entry::Vacant(slot) = memo.entry((j, k)) {
                            let local = views[j].local(k);
                            slot.insert(dominant_action_by(&local, &check)?);
                            order.push((j, k));
                        }
                        match memo[&(j, k)].found {
                            Some(a) => profile.push(a),
                            None => {
                                if blocked.is_none() {
                                    blocked = Some((j, k));
                                }
                                continue 'theta;
                            }
                        }
                    }
                    x = game.child(x, &profile).expect("feasible");
                }
            }
            let verdicts: Vec<InfoVerdict> = order
                .iter()
                .filter(|(j, _)| *j == player)
                .map(|&(j, k)| InfoVerdict {
                    player: j,
                    info: k,
                    label: game.info(j, k).label.clone(),
                    on_path: true,
                    search: memo[&(j, k)].clone(),
                })
                .collect();
            Ok(ProofnessReport {
                player,
                mode,
                holds: blocked.is_none(),
                verdicts,
                induced: None,
                blocked,
            })
        }
    }
}

/// Local strategy-proofness under local end-dominance.
pub fn e_strategy_proofness(
    game: &Game,
    player: usize,
    mode: ProofMode,
) -> Result<ProofnessReport, DominanceError> {
    local_strategy_proofness(game, player, mode, locally_e_dominates)
}
