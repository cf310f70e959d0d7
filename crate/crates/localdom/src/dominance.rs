//! Global and local dominance under exogenous scenario partitions.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ending_analysis;
use crate::game_core::{ActionId, GameError, NodeId, Rational};
use crate::strategy_space::{LocalView, PlayerView, Strategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DominanceError {
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A partition of `S_{-i}(h)`, given by positions in the local member list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    pub cells: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates and canonicalizes: cells sorted, ordered by smallest member.
    pub fn new(mut cells: Vec<Vec<usize>>, size: usize) -> Result<Partition, DominanceError> {
        let mut seen = vec![false; size];
        for cell in &mut cells {
            if cell.is_empty() {
                return Err(DominanceError::BadPartition("empty cell".into()));
            }
            cell.sort_unstable();
            for &m in cell.iter() {
                if m >= size {
                    return Err(DominanceError::BadPartition(format!(
                        "scenario {m} is outside S_-i(h), which has {size} elements"
                    )));
                }
                if seen[m] {
                    return Err(DominanceError::BadPartition(format!(
                        "scenario {m} is in two cells"
                    )));
                }
                seen[m] = true;
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(DominanceError::BadPartition(format!(
                "scenario {m} is in no cell"
            )));
        }
        cells.sort_unstable_by_key(|c| c[0]);
        Ok(Partition { cells })
    }

    /// Builds the partition induced by a cell label per member.
    pub fn from_labels<K: Ord + Clone>(labels: &[K]) -> Partition {
        let mut keys: Vec<K> = labels.to_vec();
        keys.sort();
        keys.dedup();
        let mut cells = vec![Vec::new(); keys.len()];
        for (m, k) in labels.iter().enumerate() {
            let c = keys.binary_search(k).expect("present");
            cells[c].push(m);
        }
        cells.retain(|c| !c.is_empty());
        cells.sort_unstable_by_key(|c| c[0]);
        Partition { cells }
    }

    pub fn singleton(size: usize) -> Partition {
        Partition {
            cells: (0..size).map(|m| vec![m]).collect(),
        }
    }

    pub fn trivial(size: usize) -> Partition {
        if size == 0 {
            Partition { cells: Vec::new() }
        } else {
            Partition {
                cells: vec![(0..size).collect()],
            }
        }
    }

    pub fn size(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut out = vec![0; self.size()];
        for (c, cell) in self.cells.iter().enumerate() {
            for &m in cell {
                out[m] = c;
            }
        }
        out
    }

    /// Whether every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let labels = coarser.labels();
        self.cells
            .iter()
            .all(|cell| cell.iter().all(|&m| labels[m] == labels[cell[0]]))
    }

    /// Coarsest common refinement.
    pub fn meet(&self, other: &Partition) -> Partition {
        let a = self.labels();
        let b = other.labels();
        let pairs: Vec<(usize, usize)> = a.into_iter().zip(b).collect();
        Partition::from_labels(&pairs)
    }
}

/// Partition of the scenarios at a local view for a compared pair `(ā, a)`.
pub type PartitionFn = Arc<dyn Fn(&LocalView, ActionId, ActionId) -> Partition + Send + Sync>;

/// Per-pair partition choice.
#[derive(Clone)]
pub enum PartitionFamily {
    Singleton,
    Trivial,
    /// The ending partition of the compared pair.
    Ending,
    /// Meet of the next-active partitions of both actions.
    NextActive,
    Explicit(Partition),
    Custom(PartitionFn),
}

impl fmt::Debug for PartitionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionFamily::Singleton => write!(f, "Singleton"),
            PartitionFamily::Trivial => write!(f, "Trivial"),
            PartitionFamily::Ending => write!(f, "Ending"),
            PartitionFamily::NextActive => write!(f, "NextActive"),
            PartitionFamily::Explicit(p) => write!(f, "Explicit({:?})", p.cells),
            PartitionFamily::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PartitionFamily {
    pub fn partition(
        &self,
        local: &LocalView,
        abar: ActionId,
        a: ActionId,
    ) -> Result<Partition, DominanceError> {
        let size = local.members.len();
        Ok(match self {
            PartitionFamily::Singleton => Partition::singleton(size),
            PartitionFamily::Trivial => Partition::trivial(size),
            PartitionFamily::Ending => {
                ending_analysis::ending_partition(local, abar, a)?.as_partition()
            }
            PartitionFamily::NextActive => ending_analysis::next_active_partition(local, abar)?
                .meet(&ending_analysis::next_active_partition(local, a)?),
            PartitionFamily::Explicit(p) => Partition::new(p.cells.clone(), size)?,
            PartitionFamily::Custom(f) => {
                let p = f(local, abar, a);
                Partition::new(p.cells, size)?
            }
        })
    }
}

/// One entry of a witness map. `cell` is set for per-cell witnesses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessEntry {
    pub dominated: Strategy,
    pub cell: Option<usize>,
    pub dominator: Strategy,
}

/// A violated inequality: `candidate` at `low` is below `dominated` at `high`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub candidate: Strategy,
    pub cell: Option<usize>,
    /// External-state indices of the view.
    pub low: usize,
    pub high: usize,
    /// Departure info set for obvious dominance.
    pub info: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub dominated: Strategy,
    pub failures: Vec<Failure>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominanceVerdict {
    pub holds: bool,
    pub witnesses: Vec<WitnessEntry>,
    pub counterexample: Option<Counterexample>,
    /// Some compared payoff is strictly larger under the dominator.
    pub strict_somewhere: bool,
}

impl DominanceVerdict {
    pub fn holds(witnesses: Vec<WitnessEntry>, strict_somewhere: bool) -> Self {
        DominanceVerdict {
            holds: true,
            witnesses,
            counterexample: None,
            strict_somewhere,
        }
    }

    pub fn fails(counterexample: Counterexample) -> Self {
        DominanceVerdict {
            holds: false,
            witnesses: Vec::new(),
            counterexample: Some(counterexample),
            strict_somewhere: false,
        }
    }
}

/// Failures kept per counterexample.
const MAX_FAILURES: usize = 64;

fn extremes(
    row: &[NodeId],
    cell: &[usize],
    payoff: &dyn Fn(NodeId) -> Rational,
) -> ((Rational, usize), (Rational, usize)) {
    let mut lo = (payoff(row[cell[0]]), cell[0]);
    let mut hi = lo;
    for &m in &cell[1..] {
        let u = payoff(row[m]);
        if u < lo.0 {
            lo = (u, m);
        }
        if u > hi.0 {
            hi = (u, m);
        }
    }
    (lo, hi)
}

struct CellTable {
    /// `[plan][cell]` minimum with arg.
    min: Vec<Vec<(Rational, usize)>>,
    max: Vec<Vec<(Rational, usize)>>,
}

fn cell_table(
    local: &LocalView,
    a: ActionId,
    partition: &Partition,
) -> Result<CellTable, DominanceError> {
    let game = local.game();
    let i = local.player();
    let branch = local.branch(a)?;
    let payoff = |z: NodeId| game.payoff(z, i);
    let mut min = Vec::with_capacity(branch.plans.len());
    let mut max = Vec::with_capacity(branch.plans.len());
    for row in &branch.outcomes {
        let mut lo = Vec::with_capacity(partition.cells.len());
        let mut hi = Vec::with_capacity(partition.cells.len());
        for cell in &partition.cells {
            let (l, h) = extremes(row, cell, &payoff);
            lo.push(l);
            hi.push(h);
        }
        min.push(lo);
        max.push(hi);
    }
    Ok(CellTable { min, max })
}

fn check_partition(local: &LocalView, partition: &Partition) -> Result<(), DominanceError> {
    Partition::new(partition.cells.clone(), local.members.len()).map(|_| ())
}

/// `ā` locally dominates `a` at the view's info set given `partition`.
pub fn locally_dominates(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    partition: &Partition,
) -> Result<DominanceVerdict, DominanceError> {
    check_partition(local, partition)?;
    let top = cell_table(local, abar, partition)?;
    let low = cell_table(local, a, partition)?;
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let mut witnesses = Vec::with_capacity(bad.plans.len());
    let mut strict = false;
    for (p, plan) in bad.plans.iter().enumerate() {
        let found = (0..good.plans.len())
            .find(|&q| (0..partition.cells.len()).all(|c| top.min[q][c].0 >= low.max[p][c].0));
        match found {
            Some(q) => {
                let i = local.player();
                strict |= (0..local.members.len()).any(|m| {
                    local.game().payoff(good.outcomes[q][m], i)
                        > local.game().payoff(bad.outcomes[p][m], i)
                });
                witnesses.push(WitnessEntry {
                    dominated: plan.clone(),
                    cell: None,
                    dominator: good.plans[q].clone(),
                });
            }
            None => {
                let failures = (0..good.plans.len())
                    .take(MAX_FAILURES)
                    .map(|q| {
                        let c = (0..partition.cells.len())
                            .find(|&c| top.min[q][c].0 < low.max[p][c].0)
                            .expect("candidate fails in some cell");
                        Failure {
                            candidate: good.plans[q].clone(),
                            cell: Some(c),
                            low: local.members[top.min[q][c].1],
                            high: local.members[low.max[p][c].1],
                            info: None,
                        }
                    })
                    .collect();
                return Ok(DominanceVerdict::fails(Counterexample {
                    dominated: plan.clone(),
                    failures,
                    note: None,
                }));
            }
        }
    }
    Ok(DominanceVerdict::holds(witnesses, strict))
}

pub fn locally_weakly_dominates(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<DominanceVerdict, DominanceError> {
    locally_dominates(local, abar, a, &Partition::singleton(local.members.len()))
}

/// Min and max taken over all of `S_{-i}(h)`.
pub fn locally_obviously_dominates(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<DominanceVerdict, DominanceError> {
    locally_dominates(local, abar, a, &Partition::trivial(local.members.len()))
}

/// Contingency-wise dominance in max-min form: per cell, the best guaranteed
/// payoff after `ā` is at least the best possible payoff after `a`.
pub fn locally_c_dominates(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    partition: &Partition,
) -> Result<DominanceVerdict, DominanceError> {
    check_partition(local, partition)?;
    let top = cell_table(local, abar, partition)?;
    let low = cell_table(local, a, partition)?;
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let mut witnesses = Vec::new();
    let mut strict = false;
    for c in 0..partition.cells.len() {
        let q = (0..good.plans.len())
            .max_by(|&x, &y| top.min[x][c].0.cmp(&top.min[y][c].0).then(y.cmp(&x)))
            .expect("nonempty plans");
        let p = (0..bad.plans.len())
            .max_by(|&x, &y| low.max[x][c].0.cmp(&low.max[y][c].0).then(y.cmp(&x)))
            .expect("nonempty plans");
        if top.min[q][c].0 < low.max[p][c].0 {
            let failures = (0..good.plans.len())
                .take(MAX_FAILURES)
                .map(|q| Failure {
                    candidate: good.plans[q].clone(),
                    cell: Some(c),
                    low: local.members[top.min[q][c].1],
                    high: local.members[low.max[p][c].1],
                    info: None,
                })
                .collect();
            return Ok(DominanceVerdict::fails(Counterexample {
                dominated: bad.plans[p].clone(),
                failures,
                note: None,
            }));
        }
        strict |= top.min[q][c].0 > low.min.iter().map(|r| r[c].0).min().expect("nonempty");
        for plan in &bad.plans {
            witnesses.push(WitnessEntry {
                dominated: plan.clone(),
                cell: Some(c),
                dominator: good.plans[q].clone(),
            });
        }
    }
    Ok(DominanceVerdict::holds(witnesses, strict))
}

/// Contingency-wise dominance by its quantifiers: per cell, every plan after
/// `a` is matched by some plan after `ā`.
pub fn locally_c_dominates_direct(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
    partition: &Partition,
) -> Result<bool, DominanceError> {
    check_partition(local, partition)?;
    let good = local.branch(abar)?;
    let bad = local.branch(a)?;
    let game = local.game();
    let i = local.player();
    Ok(partition.cells.iter().all(|cell| {
        bad.outcomes.iter().all(|row_p| {
            good.outcomes.iter().any(|row_q| {
                cell.iter().all(|&m1| {
                    cell.iter()
                        .all(|&m2| game.payoff(row_q[m1], i) >= game.payoff(row_p[m2], i))
                })
            })
        })
    }))
}

/// Best payoff reachable from the child after `a`, opponents fixed by member `m`.
fn best_reachable(local: &LocalView, a: ActionId, m: usize) -> Rational {
    let game = local.game();
    let i = local.player();
    let ext = local.external(m);
    let mut best: Option<Rational> = None;
    let mut stack = vec![local.one_step(a, m)];
    while let Some(x) = stack.pop() {
        let node = game.node(x);
        if node.terminal.is_some() {
            let u = game.payoff(x, i);
            best = Some(best.map_or(u, |b| b.max(u)));
            continue;
        }
        let mut profile: Vec<ActionId> = (0..game.n_players())
            .map(|j| {
                if j == i {
                    0
                } else {
                    ext.profile[j]
                        .action(node.info[j])
                        .unwrap_or_else(|| game.info(j, node.info[j]).actions[0])
                }
            })
            .collect();
        for &b in &game.info(i, node.info[i]).actions {
            profile[i] = b;
            stack.push(game.child(x, &profile).expect("feasible"));
        }
    }
    best.expect("some terminal is reachable")
}

/// Wishful dominance: against every scenario, the best reachable payoff after
/// `ā` is at least the best reachable payoff after `a`.
pub fn wishfully_dominates(
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<DominanceVerdict, DominanceError> {
    let mut strict = false;
    for m in 0..local.members.len() {
        let top = best_reachable(local, abar, m);
        let low = best_reachable(local, a, m);
        if top < low {
            let bad = local.branch(a)?;
            let good = local.branch(abar)?;
            let game = local.game();
            let i = local.player();
            let p = (0..bad.plans.len())
                .find(|&p| game.payoff(bad.outcomes[p][m], i) == low)
                .expect("maximum is attained");
            let failures = good
                .plans
                .iter()
                .take(MAX_FAILURES)
                .map(|q| Failure {
                    candidate: q.clone(),
                    cell: Some(m),
                    low: local.members[m],
                    high: local.members[m],
                    info: None,
                })
                .collect();
            return Ok(DominanceVerdict::fails(Counterexample {
                dominated: bad.plans[p].clone(),
                failures,
                note: None,
            }));
        }
        strict |= top > low;
    }
    Ok(DominanceVerdict::holds(Vec::new(), strict))
}

/// `s̄` weakly dominates `s` over the view's external states.
pub fn weakly_dominates(view: &PlayerView, sbar: &Strategy, s: &Strategy) -> DominanceVerdict {
    let mut strict = false;
    let (top_row, low_row) = (view.payoff_row(sbar), view.payoff_row(s));
    for e in 0..view.external.len() {
        let (top, low) = (top_row[e], low_row[e]);
        if top < low {
            return DominanceVerdict::fails(Counterexample {
                dominated: s.clone(),
                failures: vec![Failure {
                    candidate: sbar.clone(),
                    cell: None,
                    low: e,
                    high: e,
                    info: None,
                }],
                note: None,
            });
        }
        strict |= top > low;
    }
    DominanceVerdict::holds(
        vec![WitnessEntry {
            dominated: s.clone(),
            cell: None,
            dominator: sbar.clone(),
        }],
        strict,
    )
}

/// Active info sets in both domains where the two strategies choose differently.
pub fn departure_points(view: &PlayerView, sbar: &Strategy, s: &Strategy) -> Vec<usize> {
    let game = view.game;
    let i = view.player;
    (0..game.info_sets(i).len())
        .filter(|&k| game.is_active(i, k))
        .filter(|&k| matches!((sbar.action(k), s.action(k)), (Some(x), Some(y)) if x != y))
        .collect()
}

/// Obvious dominance: at each departure point `h`, the worst payoff of `s̄`
/// over `S_{-i}(h)` is at least the best payoff of `s`.
pub fn obviously_dominates(view: &PlayerView, sbar: &Strategy, s: &Strategy) -> DominanceVerdict {
    let mut strict = false;
    let (top_row, low_row) = (view.payoff_row(sbar), view.payoff_row(s));
    for h in departure_points(view, sbar, s) {
        let (members, _) = view.scenarios(h);
        if members.is_empty() {
            continue;
        }
        let top: Vec<(Rational, usize)> = members.iter().map(|&e| (top_row[e], e)).collect();
        let low: Vec<(Rational, usize)> = members.iter().map(|&e| (low_row[e], e)).collect();
        let lo = *top
            .iter()
            .min_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)))
            .expect("nonempty");
        let hi = *low
            .iter()
            .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))
            .expect("nonempty");
        if lo.0 < hi.0 {
            return DominanceVerdict::fails(Counterexample {
                dominated: s.clone(),
                failures: vec![Failure {
                    candidate: sbar.clone(),
                    cell: None,
                    low: lo.1,
                    high: hi.1,
                    info: Some(h),
                }],
                note: None,
            });
        }
        strict |= lo.0 > low.iter().map(|x| x.0).min().expect("nonempty");
    }
    DominanceVerdict::holds(
        vec![WitnessEntry {
            dominated: s.clone(),
            cell: None,
            dominator: sbar.clone(),
        }],
        strict,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlobalKind {
    Weak,
    Obvious,
}

/// Result of a search for a dominant strategy.
#[derive(Clone, Debug)]
pub struct DominantSearch {
    pub found: Option<Strategy>,
    /// For each rejected candidate, one rival it fails to dominate.
    pub absence: Vec<(Strategy, Strategy, Counterexample)>,
}

pub fn find_dominant(
    view: &PlayerView,
    kind: GlobalKind,
) -> Result<DominantSearch, DominanceError> {
    let all = view.strategies()?;
    let mut absence = Vec::new();
    match kind {
        GlobalKind::Weak => {
            // Column maxima first, then each candidate in one pass.
            let rows: Vec<_> = all.iter().map(|s| view.payoff_row(s)).collect();
            let mut best: Vec<(Rational, usize)> = Vec::with_capacity(view.external.len());
            for e in 0..view.external.len() {
                let mut b = (rows[0][e], 0);
                for (k, row) in rows.iter().enumerate().skip(1) {
                    let u = row[e];
                    if u > b.0 {
                        b = (u, k);
                    }
                }
                best.push(b);
            }
            for (cand, row) in all.iter().zip(&rows) {
                match (0..view.external.len()).find(|&e| row[e] < best[e].0) {
                    None => {
                        return Ok(DominantSearch {
                            found: Some(cand.clone()),
                            absence,
                        })
                    }
                    Some(e) => {
                        let rival = &all[best[e].1];
                        let cx = weakly_dominates(view, cand, rival)
                            .counterexample
                            .expect("fails");
                        absence.push((cand.clone(), rival.clone(), cx));
                    }
                }
            }
        }
        GlobalKind::Obvious => {
            for cand in all {
                let mut failed = None;
                for rival in all {
                    if rival == cand {
                        continue;
                    }
                    let v = obviously_dominates(view, cand, rival);
                    if !v.holds {
                        failed = Some((rival.clone(), v.counterexample.expect("fails")));
                        break;
                    }
                }
                match failed {
                    None => {
                        return Ok(DominantSearch {
                            found: Some(cand.clone()),
                            absence,
                        })
                    }
                    Some((rival, cx)) => absence.push((cand.clone(), rival, cx)),
                }
            }
        }
    }
    Ok(DominantSearch {
        found: None,
        absence,
    })
}

/// Local dominance notions with exogenous partitions, plus end-dominance.
#[derive(Clone, Debug)]
pub enum LocalNotion {
    Dominance(PartitionFamily),
    ContingencyWise(PartitionFamily),
    Weak,
    Obvious,
    Wishful,
    End,
}

impl LocalNotion {
    pub fn check(
        &self,
        local: &LocalView,
        abar: ActionId,
        a: ActionId,
    ) -> Result<DominanceVerdict, DominanceError> {
        match self {
            LocalNotion::Dominance(f) => {
                locally_dominates(local, abar, a, &f.partition(local, abar, a)?)
            }
            LocalNotion::ContingencyWise(f) => {
                locally_c_dominates(local, abar, a, &f.partition(local, abar, a)?)
            }
            LocalNotion::Weak => locally_weakly_dominates(local, abar, a),
            LocalNotion::Obvious => locally_obviously_dominates(local, abar, a),
            LocalNotion::Wishful => wishfully_dominates(local, abar, a),
            LocalNotion::End => ending_analysis::locally_e_dominates(local, abar, a),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ActionSearch {
    pub found: Option<ActionId>,
    /// Verdicts of the found action against each rival.
    pub verdicts: Vec<(ActionId, DominanceVerdict)>,
    /// For each rejected candidate, the rival it fails against.
    pub absence: Vec<(ActionId, ActionId, DominanceVerdict)>,
}

/// First action (in action order) dominating every other under `check`.
pub fn dominant_action_by<F>(local: &LocalView, check: F) -> Result<ActionSearch, DominanceError>
where
    F: Fn(&LocalView, ActionId, ActionId) -> Result<DominanceVerdict, DominanceError>,
{
    let actions = local.actions().to_vec();
    let mut absence = Vec::new();
    'cand: for &abar in &actions {
        let mut verdicts = Vec::new();
        for &a in actions.iter().filter(|&&a| a != abar) {
            let v = check(local, abar, a)?;
            if !v.holds {
                absence.push((abar, a, v));
                continue 'cand;
            }
            verdicts.push((a, v));
        }
        return Ok(ActionSearch {
            found: Some(abar),
            verdicts,
            absence,
        });
    }
    Ok(ActionSearch {
        found: None,
        verdicts: Vec::new(),
        absence,
    })
}

pub fn locally_dominant_action(
    local: &LocalView,
    notion: &LocalNotion,
) -> Result<ActionSearch, DominanceError> {
    dominant_action_by(local, |l, abar, a| notion.check(l, abar, a))
}

/// Replays a local verdict against raw payoffs: witnesses satisfy the
/// inequality in each cell, and every counterexample failure is a genuine
/// violation.
pub fn reverify_local(
    local: &LocalView,
    partition: &Partition,
    verdict: &DominanceVerdict,
) -> bool {
    let view = local.view;
    let cells: Vec<Vec<usize>> = partition
        .cells
        .iter()
        .map(|c| c.iter().map(|&m| local.members[m]).collect())
        .collect();
    let ok_pair = |q: &Strategy, p: &Strategy, cell: &[usize]| {
        let lo = cell.iter().map(|&e| view.payoff(q, e)).min();
        let hi = cell.iter().map(|&e| view.payoff(p, e)).max();
        lo >= hi
    };
    if verdict.holds {
        verdict.witnesses.iter().all(|w| match w.cell {
            Some(c) => ok_pair(&w.dominator, &w.dominated, &cells[c]),
            None => cells
                .iter()
                .all(|cell| ok_pair(&w.dominator, &w.dominated, cell)),
        })
    } else {
        let cx = match &verdict.counterexample {
            Some(cx) => cx,
            None => return false,
        };
        cx.failures.iter().all(|f| {
            let same_cell = match f.cell {
                Some(c) if c < cells.len() => {
                    cells[c].contains(&f.low) && cells[c].contains(&f.high)
                }
                Some(_) => true,
                None => true,
            };
            same_cell && view.payoff(&f.candidate, f.low) < view.payoff(&cx.dominated, f.high)
        })
    }
}
