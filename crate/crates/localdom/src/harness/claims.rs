//! Brute-force re-verification of the characterization results.
//!
//! Each claim runs against raw definitions: global dominance by exhaustive
//! strategy matching, local notions from the dominance module, and every
//! positive local verdict is replayed through [`reverify_local`].

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dominance::{
    find_dominant, locally_c_dominates, locally_dominates, locally_obviously_dominates,
    locally_weakly_dominates, obviously_dominates, reverify_local, weakly_dominates,
    wishfully_dominates, DominanceError, GlobalKind, Partition, PartitionFamily,
};
use crate::ending_analysis::{
    e_strategy_proofness, irrelevance, locally_e_dominates, strategically_equivalent, ProofMode,
};
use crate::flow_games::{locally_s_dominates, FlowError, FlowGame, Utility};
use crate::game_core::{
    build_game, expand_model, ActionId, Caps, Frame, Game, Rational, Slot, StageModel,
};
use crate::harness::random::{random_game, RandomGameSpec};
use crate::mechanisms::ttc::{
    all_rankings, parse_ranking, ranking_label, ttc_reference_allocation, Ranking,
};
use crate::strategy_space::{active_domain, reduced_count, LocalView, PlayerView, Strategy};

/// Random games above this many strategies or external states are skipped.
pub const RANDOM_LIMIT: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Confirmed,
    Counterexample(String),
    Skipped(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Confirmed => write!(f, "confirmed"),
            Verdict::Counterexample(s) => write!(f, "counterexample: {s}"),
            Verdict::Skipped(s) => write!(f, "skipped: {s}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TheoremReport {
    pub claim: String,
    pub instance: String,
    pub verdict: Verdict,
    /// Elementary comparisons behind the verdict.
    pub checked: usize,
    /// Games on which at least one comparison ran.
    pub instances: usize,
    /// Instances (or players) left out, with reasons.
    pub skipped: Vec<String>,
    pub witnesses: Vec<String>,
    pub runtime: Duration,
}

impl TheoremReport {
    pub fn confirmed(&self) -> bool {
        self.verdict == Verdict::Confirmed
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{} on {}: {} ({} checks, {} skipped)\n",
            self.claim,
            self.instance,
            self.verdict,
            self.checked,
            self.skipped.len()
        );
        for w in &self.witnesses {
            out.push_str("  ");
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Claim {
    Prop1,
    Theorem1,
    Theorem2,
    StaticEquivalence,
    Refinement,
    Remark8,
    ReducedExternal,
    DirectTtc,
}

impl Claim {
    pub const ALL: [Claim; 8] = [
        Claim::Prop1,
        Claim::Theorem1,
        Claim::Theorem2,
        Claim::StaticEquivalence,
        Claim::Refinement,
        Claim::Remark8,
        Claim::ReducedExternal,
        Claim::DirectTtc,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Claim::Prop1 => "prop1",
            Claim::Theorem1 => "theorem1",
            Claim::Theorem2 => "theorem2",
            Claim::StaticEquivalence => "static-equivalence",
            Claim::Refinement => "refinement",
            Claim::Remark8 => "remark8",
            Claim::ReducedExternal => "reduced-external",
            Claim::DirectTtc => "prop4-direct-ttc",
        }
    }

    pub fn parse(id: &str) -> Option<Claim> {
        Claim::ALL.iter().copied().find(|c| c.id() == id)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Claim::Prop1 => "local weak/obvious dominance of an action iff every strategy through it is dominated",
            Claim::Theorem1 => "weakly/obviously dominant strategy iff locally dominant actions on its path",
            Claim::Theorem2 => "locally dominant everywhere iff locally c-dominant everywhere; singleton case via wishful",
            Claim::StaticEquivalence => "static games: local e-dominance equals local obvious dominance",
            Claim::Refinement => "finer partitions weaken local (c-)dominance",
            Claim::Remark8 => "local e-dominance implies wishful dominance and weak dominance of the induced strategy",
            Claim::ReducedExternal => "verdicts agree on the reduced and literal external-state spaces",
            Claim::DirectTtc => "direct TTC admits no irrelevant bipartition for the rank swap",
        }
    }
}

/// Outcome of one claim on one player.
#[derive(Clone, Debug, Default)]
pub struct Check {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl Check {
    fn absorb(&mut self, other: Check) {
        self.checked += other.checked;
        self.mismatches.extend(other.mismatches);
    }
}

fn view_within<'g>(game: &'g Game, i: usize, limit: usize) -> Result<PlayerView<'g>, String> {
    let n = reduced_count(game, i);
    if n > limit as u128 {
        return Err(format!(
            "{}: {} strategies exceed {}",
            game.players()[i],
            n,
            limit
        ));
    }
    let view = PlayerView::new(game, i).map_err(|e| e.to_string())?;
    if view.external.len() > limit {
        return Err(format!(
            "{}: {} external states exceed {}",
            game.players()[i],
            view.external.len(),
            limit
        ));
    }
    Ok(view)
}

fn pairs(local: &LocalView) -> Vec<(ActionId, ActionId)> {
    let acts = local.actions();
    acts.iter()
        .flat_map(|&x| acts.iter().filter(move |&&y| y != x).map(move |&y| (x, y)))
        .collect()
}

fn at(view: &PlayerView, h: usize) -> String {
    format!(
        "{} at `{}`",
        view.game.players()[view.player],
        view.game.info(view.player, h).label
    )
}

fn act<'g>(view: &PlayerView<'g>, a: ActionId) -> &'g str {
    view.game.action_label(view.player, a)
}

// ---------------------------------------------------------------- action versus strategy dominance

/// Both directions of the equivalence at one info set and action pair.
pub fn prop1_check(
    view: &PlayerView,
    h: usize,
    abar: ActionId,
    a: ActionId,
) -> Result<Check, DominanceError> {
    let local = view.local(h);
    let mut out = Check::default();
    if local.members.is_empty() {
        return Ok(out);
    }
    let through_a = local.full_strategies_through(a)?;
    let through_abar = local.full_strategies_through(abar)?;
    type Global = fn(&PlayerView, &Strategy, &Strategy) -> crate::dominance::DominanceVerdict;
    let variants: [(&str, bool, Global); 2] = [
        (
            "weak",
            locally_weakly_dominates(&local, abar, a)?.holds,
            weakly_dominates,
        ),
        (
            "obvious",
            locally_obviously_dominates(&local, abar, a)?.holds,
            obviously_dominates,
        ),
    ];
    for (name, lhs, global) in variants {
        let rhs = through_a
            .iter()
            .all(|s| through_abar.iter().any(|sb| global(view, sb, s).holds));
        out.checked += 1;
        if lhs != rhs {
            out.mismatches.push(format!(
                "{}: {} vs {} ({name}): local {} but strategy matching {}",
                at(view, h),
                act(view, abar),
                act(view, a),
                lhs,
                rhs
            ));
        }
    }
    Ok(out)
}

fn prop1_player(view: &PlayerView) -> Result<Check, DominanceError> {
    let mut out = Check::default();
    for h in view.game.active_info_sets(view.player) {
        let local = view.local(h);
        for (abar, a) in pairs(&local) {
            out.absorb(prop1_check(view, h, abar, a)?);
        }
    }
    Ok(out)
}

/// Action dominance against strategy dominance at one info set and action pair.
pub fn verify_prop1(game: &Game, i: usize, h: usize, abar: ActionId, a: ActionId) -> TheoremReport {
    let start = Instant::now();
    let instance = format!(
        "{} at `{}`, {} vs {}",
        game.players()[i],
        game.info(i, h).label,
        game.action_label(i, abar),
        game.action_label(i, a)
    );
    let result = view_within(game, i, game.caps().strategies)
        .map_err(Verdict::Skipped)
        .and_then(|view| {
            prop1_check(&view, h, abar, a).map_err(|e| Verdict::Skipped(e.to_string()))
        });
    finish("prop1", instance, result, start)
}

fn finish(
    claim: &str,
    instance: String,
    result: Result<Check, Verdict>,
    start: Instant,
) -> TheoremReport {
    let (verdict, checked, witnesses) = match result {
        Ok(c) if c.mismatches.is_empty() => (Verdict::Confirmed, c.checked, Vec::new()),
        Ok(c) => (
            Verdict::Counterexample(c.mismatches[0].clone()),
            c.checked,
            c.mismatches,
        ),
        Err(v) => (v, 0, Vec::new()),
    };
    TheoremReport {
        claim: claim.into(),
        instance,
        verdict,
        checked,
        instances: usize::from(checked > 0),
        skipped: Vec::new(),
        witnesses,
        runtime: start.elapsed(),
    }
}

// ---------------------------------------------------------------- dominant strategies from local dominance

/// `s̄(h)` locally dominates every other action at `h` under `kind`.
fn locally_dominant_here(
    view: &PlayerView,
    h: usize,
    abar: ActionId,
    kind: GlobalKind,
) -> Result<bool, DominanceError> {
    let local = view.local(h);
    for &a in local.actions().iter().filter(|&&a| a != abar) {
        let v = match kind {
            GlobalKind::Weak => locally_weakly_dominates(&local, abar, a)?,
            GlobalKind::Obvious => locally_obviously_dominates(&local, abar, a)?,
        };
        if !v.holds {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per strategy: (globally dominant, locally dominant on its active domain).
pub fn theorem1_table(
    view: &PlayerView,
    kind: GlobalKind,
    reverse: bool,
) -> Result<Vec<(Strategy, bool, bool)>, DominanceError> {
    let all = view.strategies()?;
    let mut order: Vec<&Strategy> = all.iter().collect();
    if reverse {
        order.reverse();
    }
    let mut memo: HashMap<(usize, ActionId), bool> = HashMap::new();
    let mut out = Vec::with_capacity(all.len());
    for sbar in order {
        let global = all.iter().all(|s| {
            s == sbar
                || match kind {
                    GlobalKind::Weak => weakly_dominates(view, sbar, s).holds,
                    GlobalKind::Obvious => obviously_dominates(view, sbar, s).holds,
                }
        });
        let mut local = true;
        for h in active_domain(view.game, view.player, sbar) {
            let ab = sbar.action(h).expect("in domain");
            let ok = match memo.get(&(h, ab)) {
                Some(&b) => b,
                None => {
                    let b = locally_dominant_here(view, h, ab, kind)?;
                    memo.insert((h, ab), b);
                    b
                }
            };
            if !ok {
                local = false;
                break;
            }
        }
        out.push((sbar.clone(), global, local));
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}

fn theorem1_player(view: &PlayerView) -> Result<Check, DominanceError> {
    let mut out = Check::default();
    for kind in [GlobalKind::Weak, GlobalKind::Obvious] {
        for (s, global, local) in theorem1_table(view, kind, false)? {
            out.checked += 1;
            if global != local {
                out.mismatches.push(format!(
                    "{} strategy {} ({:?}): globally dominant {} but locally dominant everywhere {}",
                    view.game.players()[view.player],
                    view.label(&s),
                    kind,
                    global,
                    local
                ));
            }
        }
    }
    Ok(out)
}

pub fn verify_theorem1(game: &Game, i: usize) -> TheoremReport {
    let start = Instant::now();
    let result = view_within(game, i, game.caps().strategies)
        .map_err(Verdict::Skipped)
        .and_then(|view| theorem1_player(&view).map_err(|e| Verdict::Skipped(e.to_string())));
    finish("theorem1", game.players()[i].clone(), result, start)
}

// ---------------------------------------------------------------- local dominance against c-dominance

#[derive(Clone, Copy, Default)]
struct PairFacts {
    dominates: bool,
    c_dominates: bool,
    weak: bool,
    wishful: bool,
}

fn theorem2_player(view: &PlayerView, family: &PartitionFamily) -> Result<Check, DominanceError> {
    let game = view.game;
    let i = view.player;
    let mut out = Check::default();
    let mut facts: HashMap<(usize, ActionId, ActionId), PairFacts> = HashMap::new();
    for h in game.active_info_sets(i) {
        let local = view.local(h);
        if local.members.is_empty() {
            continue;
        }
        for (abar, a) in pairs(&local) {
            let p = family.partition(&local, abar, a)?;
            let dom = locally_dominates(&local, abar, a, &p)?;
            let cdom = locally_c_dominates(&local, abar, a, &p)?;
            let weak = locally_weakly_dominates(&local, abar, a)?;
            let wish = wishfully_dominates(&local, abar, a)?;
            out.checked += 1;
            if !reverify_local(&local, &p, &dom) {
                out.mismatches.push(format!(
                    "{}: {} vs {}: local dominance verdict fails re-verification",
                    at(view, h),
                    act(view, abar),
                    act(view, a)
                ));
            }
            if dom.holds && !cdom.holds {
                out.mismatches.push(format!(
                    "{}: {} dominates {} but does not c-dominate it",
                    at(view, h),
                    act(view, abar),
                    act(view, a)
                ));
            }
            facts.insert(
                (h, abar, a),
                PairFacts {
                    dominates: dom.holds,
                    c_dominates: cdom.holds,
                    weak: weak.holds,
                    wishful: wish.holds,
                },
            );
        }
    }
    for sbar in view.strategies()? {
        let mut all = PairFacts {
            dominates: true,
            c_dominates: true,
            weak: true,
            wishful: true,
        };
        for h in active_domain(game, i, sbar) {
            let ab = sbar.action(h).expect("in domain");
            for &a in game.info(i, h).actions.iter().filter(|&&a| a != ab) {
                let Some(f) = facts.get(&(h, ab, a)) else {
                    continue;
                };
                all.dominates &= f.dominates;
                all.c_dominates &= f.c_dominates;
                all.weak &= f.weak;
                all.wishful &= f.wishful;
            }
        }
        out.checked += 1;
        if all.dominates != all.c_dominates {
            out.mismatches.push(format!(
                "{} strategy {}: locally dominant everywhere {} but c-dominant everywhere {}",
                game.players()[i],
                view.label(sbar),
                all.dominates,
                all.c_dominates
            ));
        }
        if all.weak != all.wishful {
            out.mismatches.push(format!(
                "{} strategy {}: locally weakly dominant everywhere {} but wishfully dominant everywhere {}",
                game.players()[i],
                view.label(sbar),
                all.weak,
                all.wishful
            ));
        }
    }
    Ok(out)
}

pub fn verify_theorem2(game: &Game, i: usize, family: &PartitionFamily) -> TheoremReport {
    let start = Instant::now();
    let result = view_within(game, i, game.caps().strategies)
        .map_err(Verdict::Skipped)
        .and_then(|view| {
            theorem2_player(&view, family).map_err(|e| Verdict::Skipped(e.to_string()))
        });
    finish(
        "theorem2",
        format!("{} with {:?} partitions", game.players()[i], family),
        result,
        start,
    )
}

/// A partition of `size` members with at most three cells.
pub fn random_partition(rng: &mut ChaCha8Rng, size: usize) -> Partition {
    let k = rng.gen_range(1..=size.clamp(1, 3));
    let labels: Vec<usize> = (0..size).map(|_| rng.gen_range(0..k)).collect();
    Partition::from_labels(&labels)
}

/// A random refinement of `p`: each cell split by a coin per member.
pub fn random_refinement(rng: &mut ChaCha8Rng, p: &Partition) -> Partition {
    let base = p.labels();
    let labels: Vec<(usize, bool)> = base.iter().map(|&c| (c, rng.gen_bool(0.5))).collect();
    Partition::from_labels(&labels)
}

fn pair_rng(seed: u64, info: usize, abar: ActionId, a: ActionId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((info as u64) << 32) ^ ((abar as u64) << 16) ^ a as u64);
    rng
}

/// Partitions drawn independently per info set and action pair.
pub fn random_family(seed: u64) -> PartitionFamily {
    PartitionFamily::Custom(Arc::new(move |local: &LocalView, abar, a| {
        let mut rng = pair_rng(seed, local.info, abar, a);
        random_partition(&mut rng, local.members.len())
    }))
}

// ---------------------------------------------------------------- static games

/// The game as a flow game with one payoff slot at the last stage.
pub fn single_outcome_flow(game: &Game) -> Result<FlowGame, FlowError> {
    let mut def = game.to_def();
    let n = def.players.len();
    let t = def.horizon;
    for h in &mut def.histories {
        h.stage = if h.path.is_empty() {
            Vec::new()
        } else {
            vec![vec![None]; n]
        };
    }
    let mut values: Vec<Vec<Rational>> = vec![Vec::new(); n];
    for z in &mut def.terminals {
        z.stage = (0..n).map(|j| vec![Some(z.payoffs[j])]).collect();
        for (j, vals) in values.iter_mut().enumerate() {
            vals.push(z.payoffs[j]);
        }
    }
    let spaces = (0..n)
        .map(|j| {
            let mut v = values[j].clone();
            v.sort();
            v.dedup();
            let last: Vec<Slot> = std::iter::once(None)
                .chain(v.into_iter().map(Some))
                .collect();
            (1..=t)
                .map(|s| {
                    if s == t {
                        vec![last.clone()]
                    } else {
                        vec![vec![None]]
                    }
                })
                .collect()
        })
        .collect();
    FlowGame::build(def, vec![1; t], spaces, Utility::Additive, game.caps())
}

fn static_player(
    game: &Game,
    view: &PlayerView,
    flow: Option<&FlowGame>,
) -> Result<Check, DominanceError> {
    let i = view.player;
    let mut out = Check::default();
    let mut equivalent = 0;
    for h in game.active_info_sets(i) {
        let local = view.local(h);
        if local.members.is_empty() {
            continue;
        }
        for (abar, a) in pairs(&local) {
            let e = locally_e_dominates(&local, abar, a)?.holds;
            if strategically_equivalent(game, i, h, abar, a) {
                equivalent += 1;
            } else {
                let o = locally_obviously_dominates(&local, abar, a)?.holds;
                out.checked += 1;
                if e != o {
                    out.mismatches.push(format!(
                        "{}: {} vs {}: e-dominance {} but obvious dominance {}",
                        at(view, h),
                        act(view, abar),
                        act(view, a),
                        e,
                        o
                    ));
                }
            }
            if let Some(fg) = flow {
                let fview = PlayerView::new(&fg.game, i)?;
                let flocal = fview.local(h);
                let fe = locally_e_dominates(&flocal, abar, a)?.holds;
                let fs = locally_s_dominates(fg, &flocal, abar, a)?.holds;
                out.checked += 1;
                if fe != fs {
                    out.mismatches.push(format!(
                        "{}: {} vs {}: s-dominance {} but e-dominance {} with a single outcome",
                        at(view, h),
                        act(view, abar),
                        act(view, a),
                        fs,
                        fe
                    ));
                }
            }
        }
    }
    if equivalent == 0 {
        let osp = find_dominant(view, GlobalKind::Obvious)?.found.is_some();
        let lsp = e_strategy_proofness(game, i, ProofMode::Everywhere)?.holds;
        out.checked += 1;
        if osp != lsp {
            out.mismatches.push(format!(
                "{}: obviously dominant strategy {} but locally e-strategy-proof {}",
                game.players()[i],
                osp,
                lsp
            ));
        }
    }
    Ok(out)
}

pub fn verify_static_equivalence(game: &Game) -> TheoremReport {
    let start = Instant::now();
    if game.horizon() != 1 {
        return finish(
            "static-equivalence",
            "game".into(),
            Err(Verdict::Skipped(format!(
                "not static: horizon {}",
                game.horizon()
            ))),
            start,
        );
    }
    let flow = single_outcome_flow(game).ok();
    let mut check = Check::default();
    let mut skipped = Vec::new();
    for i in 0..game.n_players() {
        match view_within(game, i, game.caps().strategies) {
            Ok(view) => match static_player(game, &view, flow.as_ref()) {
                Ok(c) => check.absorb(c),
                Err(e) => skipped.push(e.to_string()),
            },
            Err(reason) => skipped.push(reason),
        }
    }
    let mut report = finish("static-equivalence", "all players".into(), Ok(check), start);
    report.skipped = skipped;
    report
}

// ---------------------------------------------------------------- Remarks on partitions

fn refinement_player(view: &PlayerView, seed: u64) -> Result<Check, DominanceError> {
    let mut out = Check::default();
    for h in view.game.active_info_sets(view.player) {
        let local = view.local(h);
        let size = local.members.len();
        if size == 0 {
            continue;
        }
        for (abar, a) in pairs(&local) {
            let mut rng = pair_rng(seed, h, abar, a);
            let coarse = random_partition(&mut rng, size);
            let fine = random_refinement(&mut rng, &coarse);
            let d_coarse = locally_dominates(&local, abar, a, &coarse)?.holds;
            let d_fine = locally_dominates(&local, abar, a, &fine)?.holds;
            let c_coarse = locally_c_dominates(&local, abar, a, &coarse)?.holds;
            let c_fine = locally_c_dominates(&local, abar, a, &fine)?.holds;
            let obvious = locally_obviously_dominates(&local, abar, a)?.holds;
            let weak = locally_weakly_dominates(&local, abar, a)?.holds;
            out.checked += 1;
            let here = || format!("{}: {} vs {}", at(view, h), act(view, abar), act(view, a));
            if d_coarse && !d_fine {
                out.mismatches.push(format!(
                    "{}: dominance lost under refinement {:?} of {:?}",
                    here(),
                    fine.cells,
                    coarse.cells
                ));
            }
            if c_coarse && !c_fine {
                out.mismatches.push(format!(
                    "{}: c-dominance lost under refinement {:?} of {:?}",
                    here(),
                    fine.cells,
                    coarse.cells
                ));
            }
            if obvious && !d_coarse || d_coarse && !weak {
                out.mismatches.push(format!(
                    "{}: partition {:?} falls outside the obvious/weak bounds",
                    here(),
                    coarse.cells
                ));
            }
        }
    }
    Ok(out)
}

fn remark8_player(game: &Game, view: &PlayerView) -> Result<Check, DominanceError> {
    let i = view.player;
    let mut out = Check::default();
    for h in game.active_info_sets(i) {
        let local = view.local(h);
        if local.members.is_empty() {
            continue;
        }
        for (abar, a) in pairs(&local) {
            let e = locally_e_dominates(&local, abar, a)?.holds;
            out.checked += 1;
            if e && !wishfully_dominates(&local, abar, a)?.holds {
                out.mismatches.push(format!(
                    "{}: {} e-dominates {} but does not wishfully dominate it",
                    at(view, h),
                    act(view, abar),
                    act(view, a)
                ));
            }
        }
    }
    let report = e_strategy_proofness(game, i, ProofMode::Everywhere)?;
    if report.holds {
        let s = report
            .induced
            .expect("induced strategy exists when every info set has a dominant action");
        for h in active_domain(game, i, &s) {
            out.checked += 1;
            if !locally_dominant_here(view, h, s.action(h).expect("in domain"), GlobalKind::Weak)? {
                out.mismatches.push(format!(
                    "{}: e-dominant action is not locally weakly dominant",
                    at(view, h)
                ));
            }
        }
        out.checked += 1;
        if let Some(rival) = view
            .strategies()?
            .iter()
            .find(|r| !weakly_dominates(view, &s, r).holds)
        {
            out.mismatches.push(format!(
                "{}: induced strategy {} does not weakly dominate {}",
                game.players()[i],
                view.label(&s),
                view.label(rival)
            ));
        }
    }
    Ok(out)
}

fn reduced_player(
    game: &Game,
    view: &PlayerView,
    limit: usize,
) -> Result<Result<Check, String>, DominanceError> {
    let i = view.player;
    let literal = PlayerView::literal(game, i)?;
    if literal.external.len() > limit {
        return Ok(Err(format!(
            "{}: {} literal external states exceed {}",
            game.players()[i],
            literal.external.len(),
            limit
        )));
    }
    let mut out = Check::default();
    for h in game.active_info_sets(i) {
        let (r, l) = (view.local(h), literal.local(h));
        if r.members.is_empty() {
            continue;
        }
        for (abar, a) in pairs(&r) {
            let verdicts = [
                (
                    "weak",
                    locally_weakly_dominates(&r, abar, a)?.holds,
                    locally_weakly_dominates(&l, abar, a)?.holds,
                ),
                (
                    "obvious",
                    locally_obviously_dominates(&r, abar, a)?.holds,
                    locally_obviously_dominates(&l, abar, a)?.holds,
                ),
                (
                    "wishful",
                    wishfully_dominates(&r, abar, a)?.holds,
                    wishfully_dominates(&l, abar, a)?.holds,
                ),
                (
                    "e",
                    locally_e_dominates(&r, abar, a)?.holds,
                    locally_e_dominates(&l, abar, a)?.holds,
                ),
            ];
            for (name, x, y) in verdicts {
                out.checked += 1;
                if x != y {
                    out.mismatches.push(format!(
                        "{}: {} vs {} ({name}): reduced {} but literal {}",
                        at(view, h),
                        act(view, abar),
                        act(view, a),
                        x,
                        y
                    ));
                }
            }
        }
    }
    for kind in [GlobalKind::Weak, GlobalKind::Obvious] {
        let x = find_dominant(view, kind)?.found;
        let y = find_dominant(&literal, kind)?.found;
        out.checked += 1;
        if x != y {
            out.mismatches.push(format!(
                "{}: {:?}-dominant strategy differs between the reduced and literal spaces",
                game.players()[i],
                kind
            ));
        }
    }
    Ok(Ok(out))
}

// ---------------------------------------------------------------- Drivers

/// Runs a claim for every player of `game` (the direct-TTC claim ignores it).
pub fn verify_on_game(
    claim: Claim,
    game: &Game,
    instance: &str,
    limit: usize,
    seed: u64,
) -> TheoremReport {
    let start = Instant::now();
    if claim == Claim::DirectTtc {
        return verify_direct_ttc_bipartition();
    }
    if claim == Claim::StaticEquivalence {
        let mut r = verify_static_equivalence(game);
        r.instance = instance.into();
        return r;
    }
    let mut check = Check::default();
    let mut skipped = Vec::new();
    for i in 0..game.n_players() {
        let view = match view_within(game, i, limit) {
            Ok(v) => v,
            Err(reason) => {
                skipped.push(reason);
                continue;
            }
        };
        let result = match claim {
            Claim::Prop1 => prop1_player(&view).map(Ok),
            Claim::Theorem1 => theorem1_player(&view).map(Ok),
            Claim::Theorem2 => theorem2_player(&view, &random_family(seed)).map(Ok),
            Claim::Refinement => refinement_player(&view, seed).map(Ok),
            Claim::Remark8 => remark8_player(game, &view).map(Ok),
            Claim::ReducedExternal => reduced_player(game, &view, limit),
            Claim::StaticEquivalence | Claim::DirectTtc => unreachable!("handled above"),
        };
        match result {
            Ok(Ok(c)) => check.absorb(c),
            Ok(Err(reason)) => skipped.push(reason),
            Err(e) => skipped.push(format!("{}: {}", game.players()[i], e)),
        }
    }
    let mut report = finish(claim.id(), instance.into(), Ok(check), start);
    report.skipped = skipped;
    report
}

/// Runs a claim over seeded random games, in parallel, merging by seed order.
pub fn verify_random(claim: Claim, seeds: Range<u64>) -> TheoremReport {
    let start = Instant::now();
    if claim == Claim::DirectTtc {
        return verify_direct_ttc_bipartition();
    }
    let seeds: Vec<u64> = seeds.collect();
    let per_seed: Vec<(u64, TheoremReport)> = seeds
        .par_iter()
        .map(|&seed| {
            let spec = if claim == Claim::StaticEquivalence {
                RandomGameSpec::static_from_seed(seed)
            } else {
                RandomGameSpec::from_seed(seed)
            };
            let report = match random_game(&spec) {
                Ok(game) => verify_on_game(claim, &game, &spec.describe(), RANDOM_LIMIT, seed),
                Err(e) => finish(
                    claim.id(),
                    spec.describe(),
                    Err(Verdict::Skipped(e.to_string())),
                    Instant::now(),
                ),
            };
            (seed, report)
        })
        .collect();
    let mut checked = 0;
    let mut games = 0;
    let mut skipped = Vec::new();
    let mut witnesses = Vec::new();
    for (seed, r) in per_seed {
        checked += r.checked;
        if r.checked > 0 {
            games += 1;
        }
        skipped.extend(r.skipped.iter().map(|s| format!("seed {seed}: {s}")));
        if let Verdict::Skipped(s) = &r.verdict {
            skipped.push(format!("seed {seed}: {s}"));
        }
        witnesses.extend(
            r.witnesses
                .iter()
                .map(|w| format!("seed {seed} [{}]: {w}", r.instance)),
        );
    }
    let verdict = match witnesses.first() {
        None => Verdict::Confirmed,
        Some(w) => Verdict::Counterexample(w.clone()),
    };
    TheoremReport {
        claim: claim.id().into(),
        instance: format!("{} random games ({} checked)", seeds.len(), games),
        verdict,
        checked,
        instances: games,
        skipped,
        witnesses,
        runtime: start.elapsed(),
    }
}

// ---------------------------------------------------------------- Direct TTC bipartitions

/// The four opponent profiles of the bipartition argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectTtcWitnesses {
    pub truth: Ranking,
    pub alternative: Ranking,
    /// Opponent rankings per scenario, in the order a, b, c, d.
    pub scenarios: Vec<(char, Vec<Ranking>)>,
}

const DIRECT_N: usize = 4;
/// The player under study owns the last item.
const OWNER: usize = DIRECT_N - 1;

fn direct_item(reports_of_others: &[Ranking], own: &Ranking) -> usize {
    let mut prefs: Vec<Ranking> = reports_of_others.to_vec();
    prefs.push(own.clone());
    ttc_reference_allocation(&prefs, &(0..DIRECT_N).collect::<Vec<_>>())[OWNER]
}

/// First opponent profiles (in lexicographic order) realizing each of the
/// four item pairs `(item under truth, item under alternative)`.
pub fn direct_ttc_witnesses() -> DirectTtcWitnesses {
    let truth = parse_ranking("abcd", DIRECT_N).expect("ranking");
    let alternative = parse_ranking("badc", DIRECT_N).expect("ranking");
    let rankings = all_rankings(DIRECT_N);
    let targets = [('a', (0, 1)), ('b', (1, 1)), ('c', (2, 3)), ('d', (3, 3))];
    let mut found: Vec<Option<Vec<Ranking>>> = vec![None; targets.len()];
    'outer: for x in &rankings {
        for y in &rankings {
            for z in &rankings {
                let others = [x.clone(), y.clone(), z.clone()];
                let got = (
                    direct_item(&others, &truth),
                    direct_item(&others, &alternative),
                );
                for (k, (_, want)) in targets.iter().enumerate() {
                    if found[k].is_none() && got == *want {
                        found[k] = Some(others.to_vec());
                    }
                }
                if found.iter().all(Option::is_some) {
                    break 'outer;
                }
            }
        }
    }
    DirectTtcWitnesses {
        truth,
        alternative,
        scenarios: targets
            .iter()
            .zip(found)
            .map(|((c, _), f)| (*c, f.expect("scenario exists")))
            .collect(),
    }
}

struct DirectScenarios<'a> {
    w: &'a DirectTtcWitnesses,
    rankings: Vec<Ranking>,
}

impl StageModel for DirectScenarios<'_> {
    type State = (usize, Option<ActionId>);

    fn root(&self, theta: usize) -> Self::State {
        (theta, None)
    }

    fn info(&self, _s: &Self::State, _player: usize) -> (String, Vec<ActionId>) {
        (
            format!("r={}", ranking_label(&self.w.truth)),
            (0..self.rankings.len()).collect(),
        )
    }

    fn advance(&self, s: &Self::State, profile: &[ActionId]) -> Self::State {
        (s.0, Some(profile[0]))
    }

    fn outcome(&self, s: &Self::State, _player: usize) -> (String, Rational) {
        let report = &self.rankings[s.1.expect("played")];
        let item = direct_item(&self.w.scenarios[s.0].1, report);
        let pos = self
            .w
            .truth
            .iter()
            .position(|&k| k == item)
            .expect("ranked");
        (
            crate::mechanisms::letter(item),
            Rational::from_integer((DIRECT_N - pos) as i64),
        )
    }
}

/// The owner of `d` reporting a ranking against the four scenarios, with
/// nature choosing the scenario.
pub fn direct_ttc_scenario_game(w: &DirectTtcWitnesses) -> Game {
    let rankings = all_rankings(DIRECT_N);
    let frame = Frame {
        players: vec!["owner-d".into()],
        nature: w
            .scenarios
            .iter()
            .map(|(c, rs)| {
                format!(
                    "s^{c}:{}",
                    rs.iter().map(ranking_label).collect::<Vec<_>>().join("/")
                )
            })
            .collect(),
        horizon: 1,
        actions: vec![rankings.iter().map(ranking_label).collect()],
    };
    let model = DirectScenarios { w, rankings };
    let def = expand_model(&frame, &model, Caps::default()).expect("small game");
    build_game(&def).expect("valid game")
}

/// One row of the 16-case table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartitionCase {
    pub irrelevant: Vec<char>,
    pub irrelevance_holds: bool,
    /// Worst item under the truth and best under the alternative on the complement.
    pub complement: Option<(String, String)>,
    pub led_holds: bool,
}

impl BipartitionCase {
    pub fn fails(&self) -> bool {
        !self.irrelevance_holds || !self.led_holds
    }

    /// The case split: sets touching `s^a` or `s^c` fail irrelevance, the rest fail on the complement.
    pub fn expected_reason(&self) -> bool {
        let touches = self.irrelevant.iter().any(|&c| c == 'a' || c == 'c');
        if touches {
            !self.irrelevance_holds
        } else {
            self.irrelevance_holds && !self.led_holds
        }
    }

    pub fn render(&self) -> String {
        let set = if self.irrelevant.is_empty() {
            "∅".to_string()
        } else {
            format!(
                "{{{}}}",
                self.irrelevant
                    .iter()
                    .map(|c| format!("s^{c}"))
                    .collect::<Vec<_>>()
                    .join(",")
            )
        };
        let why = if !self.irrelevance_holds {
            "irrelevance fails".to_string()
        } else {
            match &self.complement {
                Some((lo, hi)) if !self.led_holds => {
                    format!("comparison fails on the complement: worst {lo} vs best {hi}")
                }
                Some((lo, hi)) => {
                    format!("comparison holds on the complement: worst {lo} vs best {hi}")
                }
                None => "complement empty".into(),
            }
        };
        format!("{set}: {why}")
    }
}

pub fn direct_ttc_cases() -> (DirectTtcWitnesses, Vec<BipartitionCase>) {
    let w = direct_ttc_witnesses();
    let game = direct_ttc_scenario_game(&w);
    let view = PlayerView::new(&game, 0).expect("one player");
    let local = view.local(0);
    let truth = game.action_id(0, &ranking_label(&w.truth)).expect("action");
    let alt = game
        .action_id(0, &ranking_label(&w.alternative))
        .expect("action");
    let names: Vec<char> = w.scenarios.iter().map(|(c, _)| *c).collect();
    let mut cases = Vec::with_capacity(16);
    for mask in 0u32..16 {
        let inside: Vec<usize> = (0..4).filter(|k| mask & (1 << k) != 0).collect();
        let outside: Vec<usize> = (0..4).filter(|k| mask & (1 << k) == 0).collect();
        let irr = irrelevance(&local, truth, alt, &inside)
            .expect("small")
            .irrelevant;
        let item = |a: ActionId, m: usize| game.outcome(local.one_step(a, m), 0).to_string();
        let pay = |a: ActionId, m: usize| local.payoff(a, 0, m).expect("single plan");
        let (complement, led) = if outside.is_empty() {
            (None, true)
        } else {
            let lo = *outside
                .iter()
                .min_by_key(|&&m| pay(truth, m))
                .expect("nonempty");
            let hi = *outside
                .iter()
                .max_by_key(|&&m| pay(alt, m))
                .expect("nonempty");
            (
                Some((item(truth, lo), item(alt, hi))),
                pay(truth, lo) >= pay(alt, hi),
            )
        };
        cases.push(BipartitionCase {
            irrelevant: inside.iter().map(|&k| names[k]).collect(),
            irrelevance_holds: irr,
            complement,
            led_holds: led,
        });
    }
    (w, cases)
}

pub fn verify_direct_ttc_bipartition() -> TheoremReport {
    let start = Instant::now();
    let (w, cases) = direct_ttc_cases();
    let mut witnesses: Vec<String> = w
        .scenarios
        .iter()
        .map(|(c, rs)| {
            format!(
                "s^{c} = owners a,b,c report {}",
                rs.iter().map(ranking_label).collect::<Vec<_>>().join("/")
            )
        })
        .collect();
    witnesses.extend(cases.iter().map(BipartitionCase::render));
    let bad: Vec<&BipartitionCase> = cases
        .iter()
        .filter(|c| !c.fails() || !c.expected_reason())
        .collect();
    let verdict = match bad.first() {
        None => Verdict::Confirmed,
        Some(c) => Verdict::Counterexample(c.render()),
    };
    TheoremReport {
        claim: Claim::DirectTtc.id().into(),
        instance: format!(
            "truth {} vs {} for the owner of d",
            ranking_label(&w.truth),
            ranking_label(&w.alternative)
        ),
        verdict,
        checked: cases.len(),
        instances: 1,
        skipped: Vec::new(),
        witnesses,
        runtime: start.elapsed(),
    }
}
