//! Reduced strategies, external states, and the local view at an info set.
//!
//! A reduced strategy assigns actions only at info sets that its own earlier
//! choices do not exclude. Strategies are enumerated from the decision forest
//! of each player, so the domain is correct by construction.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::game_core::{ActionId, Game, GameError, NodeId, Rational};

/// A reduced strategy: one optional action per info set of its player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    pub assign: Vec<Option<ActionId>>,
}

impl Strategy {
    pub fn empty() -> Strategy {
        Strategy { assign: Vec::new() }
    }

    pub fn blank(len: usize) -> Strategy {
        Strategy {
            assign: vec![None; len],
        }
    }

    pub fn action(&self, info: usize) -> Option<ActionId> {
        self.assign.get(info).copied().flatten()
    }

    /// Info sets in the domain.
    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.assign
            .iter()
            .enumerate()
            .filter_map(|(k, a)| a.map(|_| k))
    }
}

/// `(θ, s_{-i})`. The entry of the player it belongs to is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExternalState {
    pub theta: usize,
    pub profile: Vec<Strategy>,
}

type Plan = Vec<(usize, ActionId)>;

/// Number of plans rooted at `roots`, saturating.
fn count_plans(game: &Game, player: usize, roots: &[usize], keep: &dyn Fn(usize) -> bool) -> u128 {
    fn count_set(
        game: &Game,
        player: usize,
        h: usize,
        keep: &dyn Fn(usize) -> bool,
        memo: &mut HashMap<usize, u128>,
    ) -> u128 {
        if let Some(&c) = memo.get(&h) {
            return c;
        }
        let set = game.info(player, h);
        let mut total: u128 = 0;
        for &a in &set.actions {
            let mut prod: u128 = 1;
            if let Some(next) = set.succ.get(&a) {
                for &k in next.iter().filter(|&&k| keep(k)) {
                    prod = prod.saturating_mul(count_set(game, player, k, keep, memo));
                }
            }
            total = total.saturating_add(prod);
        }
        memo.insert(h, total);
        total
    }
    let mut memo = HashMap::new();
    roots.iter().fold(1u128, |acc, &h| {
        acc.saturating_mul(count_set(game, player, h, keep, &mut memo))
    })
}

fn plans_of_forest(
    game: &Game,
    player: usize,
    roots: &[usize],
    keep: &dyn Fn(usize) -> bool,
) -> Vec<Plan> {
    fn plans_of_set(
        game: &Game,
        player: usize,
        h: usize,
        keep: &dyn Fn(usize) -> bool,
    ) -> Vec<Plan> {
        let set = game.info(player, h);
        let mut out = Vec::new();
        for &a in &set.actions {
            let children: Vec<usize> = set
                .succ
                .get(&a)
                .map(|v| v.iter().copied().filter(|&k| keep(k)).collect())
                .unwrap_or_default();
            for mut tail in plans_of_forest(game, player, &children, keep) {
                tail.push((h, a));
                out.push(tail);
            }
        }
        out
    }
    let mut acc: Vec<Plan> = vec![Vec::new()];
    for &h in roots {
        let sub = plans_of_set(game, player, h, keep);
        let mut next = Vec::with_capacity(acc.len() * sub.len());
        for prefix in &acc {
            for p in &sub {
                let mut q = prefix.clone();
                q.extend_from_slice(p);
                next.push(q);
            }
        }
        acc = next;
    }
    acc
}

fn stage_one_roots(game: &Game, player: usize) -> Vec<usize> {
    (0..game.info_sets(player).len())
        .filter(|&k| game.info(player, k).stage == 1)
        .collect()
}

fn plan_to_strategy(len: usize, plan: &Plan) -> Strategy {
    let mut s = Strategy::blank(len);
    for &(h, a) in plan {
        s.assign[h] = Some(a);
    }
    s
}

fn cap_error(what: &str, cap: usize, count: u128) -> GameError {
    GameError::SpaceCap {
        what: what.to_string(),
        cap,
        count: usize::try_from(count).unwrap_or(usize::MAX),
    }
}

/// `|S_i|` without enumerating.
pub fn reduced_count(game: &Game, player: usize) -> u128 {
    count_plans(game, player, &stage_one_roots(game, player), &|_| true)
}

/// `S_i` in canonical order.
pub fn enumerate_reduced(game: &Game, player: usize) -> Result<Vec<Strategy>, GameError> {
    let roots = stage_one_roots(game, player);
    let count = count_plans(game, player, &roots, &|_| true);
    let cap = game.caps().strategies;
    if count > cap as u128 {
        return Err(cap_error(
            &format!("strategies of {}", game.players()[player]),
            cap,
            count,
        ));
    }
    let len = game.info_sets(player).len();
    let mut out: Vec<Strategy> = plans_of_forest(game, player, &roots, &|_| true)
        .iter()
        .map(|p| plan_to_strategy(len, p))
        .collect();
    out.sort();
    Ok(out)
}

/// Active info sets in the domain of `s`, `H*(s)`.
pub fn active_domain(game: &Game, player: usize, s: &Strategy) -> Vec<usize> {
    s.domain().filter(|&k| game.is_active(player, k)).collect()
}

/// Dotted action labels at the active info sets of the domain, by stage.
pub fn strategy_label(game: &Game, player: usize, s: &Strategy) -> String {
    let mut keys: Vec<(usize, usize, ActionId)> = s
        .assign
        .iter()
        .enumerate()
        .filter_map(|(k, a)| a.map(|a| (k, a)))
        .filter(|&(k, _)| game.is_active(player, k))
        .map(|(k, a)| (game.info(player, k).stage, k, a))
        .collect();
    keys.sort_unstable();
    if keys.is_empty() {
        return "-".to_string();
    }
    keys.iter()
        .map(|&(_, _, a)| game.action_label(player, a))
        .collect::<Vec<_>>()
        .join(".")
}

/// Labels for all of `S_i`, suffixed with `#k` where a label repeats.
pub fn strategy_labels(game: &Game, player: usize, all: &[Strategy]) -> Vec<String> {
    let raw: Vec<String> = all
        .iter()
        .map(|s| strategy_label(game, player, s))
        .collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in &raw {
        *counts.entry(r.as_str()).or_default() += 1;
    }
    raw.iter()
        .enumerate()
        .map(|(k, r)| {
            if counts[r.as_str()] > 1 {
                format!("{r}#{k}")
            } else {
                r.clone()
            }
        })
        .collect()
}

/// Resolves a strategy by label or by `#k` index into `S_i`.
pub fn find_strategy(game: &Game, player: usize, label: &str) -> Result<Strategy, GameError> {
    let all = enumerate_reduced(game, player)?;
    if let Some(idx) = label
        .strip_prefix('#')
        .and_then(|k| k.parse::<usize>().ok())
    {
        return all
            .get(idx)
            .cloned()
            .ok_or_else(|| GameError::Malformed(format!("no strategy #{idx}")));
    }
    let labels = strategy_labels(game, player, &all);
    labels
        .iter()
        .position(|l| l == label)
        .map(|k| all[k].clone())
        .ok_or_else(|| GameError::Malformed(format!("unknown strategy `{label}`")))
}

fn product_of_profiles(
    theta: usize,
    player: usize,
    per_player: Vec<Vec<Strategy>>,
    out: &mut Vec<ExternalState>,
) {
    let mut acc: Vec<Vec<Strategy>> = vec![Vec::new()];
    for (j, list) in per_player.into_iter().enumerate() {
        let list = if j == player {
            vec![Strategy::empty()]
        } else {
            list
        };
        let mut next = Vec::with_capacity(acc.len() * list.len());
        for prefix in &acc {
            for s in &list {
                let mut p = prefix.clone();
                p.push(s.clone());
                next.push(p);
            }
        }
        acc = next;
    }
    out.extend(
        acc.into_iter()
            .map(|profile| ExternalState { theta, profile }),
    );
}

/// `E_i = Θ × Π_{j≠i} S_j`, literally.
pub fn enumerate_external(game: &Game, player: usize) -> Result<Vec<ExternalState>, GameError> {
    let n = game.n_players();
    let cap = game.caps().external;
    let mut count: u128 = game.nature().len() as u128;
    for j in (0..n).filter(|&j| j != player) {
        count = count.saturating_mul(reduced_count(game, j));
    }
    if count > cap as u128 {
        return Err(cap_error("external states", cap, count));
    }
    let mut lists = Vec::with_capacity(n);
    for j in 0..n {
        lists.push(if j == player {
            Vec::new()
        } else {
            enumerate_reduced(game, j)?
        });
    }
    let mut out = Vec::new();
    for theta in 0..game.nature().len() {
        product_of_profiles(theta, player, lists.clone(), &mut out);
    }
    Ok(out)
}

/// External states with each opponent's plan restricted to the `θ` subgame.
///
/// Two literal states that agree on `θ` and on every opponent action reachable
/// under `θ` induce the same play against every own strategy, so this space
/// gives the same answers to every universal or extremal question while
/// staying small.
pub fn reduced_external(game: &Game, player: usize) -> Result<Vec<ExternalState>, GameError> {
    let n = game.n_players();
    let cap = game.caps().external;
    let mut out = Vec::new();
    let mut total: u128 = 0;
    for theta in 0..game.nature().len() {
        let mut per_theta: u128 = 1;
        let mut lists = Vec::with_capacity(n);
        for j in 0..n {
            if j == player {
                lists.push(Vec::new());
                continue;
            }
            let keep = |k: usize| game.info(j, k).thetas.binary_search(&theta).is_ok();
            let roots: Vec<usize> = stage_one_roots(game, j)
                .into_iter()
                .filter(|&k| keep(k))
                .collect();
            per_theta = per_theta.saturating_mul(count_plans(game, j, &roots, &keep));
            if total.saturating_add(per_theta) > cap as u128 {
                return Err(cap_error(
                    "external states",
                    cap,
                    total.saturating_add(per_theta),
                ));
            }
            let len = game.info_sets(j).len();
            let mut plans: Vec<Strategy> = plans_of_forest(game, j, &roots, &keep)
                .iter()
                .map(|p| plan_to_strategy(len, p))
                .collect();
            plans.sort();
            lists.push(plans);
        }
        total = total.saturating_add(per_theta);
        product_of_profiles(theta, player, lists, &mut out);
    }
    Ok(out)
}

/// Plays `own` against `ext` from `start`, which must lie on their joint path.
pub fn play_from(
    game: &Game,
    player: usize,
    own: &Strategy,
    ext: &ExternalState,
    start: NodeId,
) -> NodeId {
    game.play_from(start, |j, k| {
        let s = if j == player { own } else { &ext.profile[j] };
        match s.action(k) {
            Some(a) => a,
            None => {
                let set = game.info(j, k);
                if set.actions.len() == 1 {
                    set.actions[0]
                } else {
                    panic!(
                        "strategy of {} is undefined at reached info set `{}`",
                        game.players()[j],
                        set.label
                    )
                }
            }
        }
    })
}

/// Terminal history `z(s_i, e)`.
pub fn play(game: &Game, player: usize, own: &Strategy, ext: &ExternalState) -> NodeId {
    play_from(game, player, own, ext, game.root(ext.theta))
}

/// Node at depth `t` on the path of `(s_i, e)`.
pub fn prefix_history(
    game: &Game,
    player: usize,
    own: &Strategy,
    ext: &ExternalState,
    t: usize,
) -> NodeId {
    let z = play(game, player, own, ext);
    game.path(z)[t]
}

/// One player's strategy space together with an external state space.
pub struct PlayerView<'g> {
    pub game: &'g Game,
    pub player: usize,
    pub external: Vec<ExternalState>,
    strategies: OnceLock<Result<Vec<Strategy>, GameError>>,
    /// Members and entry nodes per own info set.
    scenarios: Vec<OnceLock<(Vec<usize>, Vec<NodeId>)>>,
    rows: Mutex<HashMap<Strategy, Arc<[Rational]>>>,
}

impl<'g> PlayerView<'g> {
    /// View over the θ-restricted external space.
    pub fn new(game: &'g Game, player: usize) -> Result<PlayerView<'g>, GameError> {
        Ok(PlayerView::with_external(
            game,
            player,
            reduced_external(game, player)?,
        ))
    }

    /// View over the literal product `Θ × S_{-i}`.
    pub fn literal(game: &'g Game, player: usize) -> Result<PlayerView<'g>, GameError> {
        Ok(PlayerView::with_external(
            game,
            player,
            enumerate_external(game, player)?,
        ))
    }

    fn with_external(
        game: &'g Game,
        player: usize,
        external: Vec<ExternalState>,
    ) -> PlayerView<'g> {
        PlayerView {
            game,
            player,
            external,
            strategies: OnceLock::new(),
            scenarios: (0..game.info_sets(player).len())
                .map(|_| OnceLock::new())
                .collect(),
            rows: Mutex::new(HashMap::new()),
        }
    }

    /// `S_{-i}(h)` as indices into `external`, with the entry node of each.
    pub fn scenarios(&self, info: usize) -> (&[usize], &[NodeId]) {
        let (m, x) = self.scenarios[info].get_or_init(|| self.compute_scenarios(info));
        (m, x)
    }

    fn compute_scenarios(&self, info: usize) -> (Vec<usize>, Vec<NodeId>) {
        let game = self.game;
        let i = self.player;
        let recalled = game.recalled(i, info);
        let mut members = Vec::new();
        let mut entries = Vec::new();
        let mut profile = vec![0; game.n_players()];
        'ext: for (idx, ext) in self.external.iter().enumerate() {
            let mut node = game.root(ext.theta);
            for &(k, a) in &recalled {
                let x = game.node(node);
                if x.info[i] != k {
                    continue 'ext;
                }
                for (j, slot) in profile.iter_mut().enumerate() {
                    *slot = if j == i {
                        a
                    } else {
                        match ext.profile[j].action(x.info[j]) {
                            Some(b) => b,
                            None => continue 'ext,
                        }
                    };
                }
                node = game.child(node, &profile).expect("feasible profile");
            }
            if game.node(node).info[i] == info {
                members.push(idx);
                entries.push(node);
            }
        }
        (members, entries)
    }

    pub fn strategies(&self) -> Result<&[Strategy], GameError> {
        self.strategies
            .get_or_init(|| enumerate_reduced(self.game, self.player))
            .as_ref()
            .map(Vec::as_slice)
            .map_err(Clone::clone)
    }

    pub fn play(&self, own: &Strategy, e: usize) -> NodeId {
        play(self.game, self.player, own, &self.external[e])
    }

    pub fn payoff(&self, own: &Strategy, e: usize) -> Rational {
        self.game.payoff(self.play(own, e), self.player)
    }

    /// Payoffs of `own` against every external state, memoized.
    pub fn payoff_row(&self, own: &Strategy) -> Arc<[Rational]> {
        if let Some(row) = self.rows.lock().expect("row cache").get(own) {
            return row.clone();
        }
        let row: Arc<[Rational]> = (0..self.external.len())
            .map(|e| self.payoff(own, e))
            .collect();
        self.rows
            .lock()
            .expect("row cache")
            .insert(own.clone(), row.clone());
        row
    }

    pub fn local(&self, info: usize) -> LocalView<'_, 'g> {
        LocalView::new(self, info)
    }

    pub fn label(&self, s: &Strategy) -> String {
        strategy_label(self.game, self.player, s)
    }
}

/// Continuation plans after `(h, a)` and the terminals they reach.
#[derive(Clone, Debug)]
pub struct Branch {
    pub action: ActionId,
    /// Each plan fixes the recalled path to `h`, then `a`, then a continuation.
    pub plans: Vec<Strategy>,
    /// `outcomes[p][m]` is the terminal node of plan `p` against member `m`.
    pub outcomes: Vec<Vec<NodeId>>,
}

/// `S_{-i}(h)` with entry histories and lazily built branches.
pub struct LocalView<'v, 'g> {
    pub view: &'v PlayerView<'g>,
    pub info: usize,
    /// Indices into the view's external states, in canonical order.
    pub members: Vec<usize>,
    /// `x_e` per member.
    pub entries: Vec<NodeId>,
    pub recalled: Vec<(usize, ActionId)>,
    branches: Vec<OnceLock<Result<Branch, GameError>>>,
}

impl<'v, 'g> LocalView<'v, 'g> {
    pub fn new(view: &'v PlayerView<'g>, info: usize) -> LocalView<'v, 'g> {
        let game = view.game;
        let i = view.player;
        let recalled = game.recalled(i, info);
        let (members, entries) = view.scenarios(info);
        let (members, entries) = (members.to_vec(), entries.to_vec());
        let n_actions = game.info(i, info).actions.len();
        LocalView {
            view,
            info,
            members,
            entries,
            recalled,
            branches: (0..n_actions).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn game(&self) -> &'g Game {
        self.view.game
    }

    pub fn player(&self) -> usize {
        self.view.player
    }

    pub fn stage(&self) -> usize {
        self.game().info(self.player(), self.info).stage
    }

    /// `A_i^h`.
    pub fn actions(&self) -> &[ActionId] {
        &self.game().info(self.player(), self.info).actions
    }

    pub fn external(&self, member: usize) -> &ExternalState {
        &self.view.external[self.members[member]]
    }

    fn action_pos(&self, a: ActionId) -> Result<usize, GameError> {
        self.actions()
            .binary_search(&a)
            .map_err(|_| GameError::AvailabilityMismatch {
                history: self.game().info(self.player(), self.info).label.clone(),
                detail: format!(
                    "action `{}` is not available",
                    self.game().action_label(self.player(), a)
                ),
            })
    }

    /// Plans and outcome matrix for action `a`.
    pub fn branch(&self, a: ActionId) -> Result<&Branch, GameError> {
        let pos = self.action_pos(a)?;
        self.branches[pos]
            .get_or_init(|| self.build_branch(a))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn build_branch(&self, a: ActionId) -> Result<Branch, GameError> {
        let game = self.game();
        let i = self.player();
        let set = game.info(i, self.info);
        let roots: Vec<usize> = set.succ.get(&a).cloned().unwrap_or_default();
        let count = count_plans(game, i, &roots, &|_| true);
        let cap = game.caps().strategies;
        if count > cap as u128 {
            return Err(cap_error("continuation plans", cap, count));
        }
        let len = game.info_sets(i).len();
        let mut base = Strategy::blank(len);
        for &(k, b) in &self.recalled {
            base.assign[k] = Some(b);
        }
        base.assign[self.info] = Some(a);
        let mut plans: Vec<Strategy> = plans_of_forest(game, i, &roots, &|_| true)
            .into_iter()
            .map(|p| {
                let mut s = base.clone();
                for (k, b) in p {
                    s.assign[k] = Some(b);
                }
                s
            })
            .collect();
        plans.sort();
        let outcomes = plans
            .iter()
            .map(|p| {
                self.entries
                    .iter()
                    .zip(&self.members)
                    .map(|(&x, &e)| play_from(game, i, p, &self.view.external[e], x))
                    .collect()
            })
            .collect();
        Ok(Branch {
            action: a,
            plans,
            outcomes,
        })
    }

    /// `u_i` of plan `p` of `a` against member `m`.
    pub fn payoff(&self, a: ActionId, p: usize, m: usize) -> Result<Rational, GameError> {
        let b = self.branch(a)?;
        Ok(self.game().payoff(b.outcomes[p][m], self.player()))
    }

    /// The child of `x_e` after the player takes `a` and the others follow `e`.
    pub fn one_step(&self, a: ActionId, m: usize) -> NodeId {
        let game = self.game();
        let i = self.player();
        let x = self.entries[m];
        let ext = self.external(m);
        let node = game.node(x);
        let profile: Vec<ActionId> = (0..game.n_players())
            .map(|j| {
                if j == i {
                    a
                } else {
                    ext.profile[j]
                        .action(node.info[j])
                        .unwrap_or_else(|| game.info(j, node.info[j]).actions[0])
                }
            })
            .collect();
        game.child(x, &profile).expect("feasible profile")
    }

    /// Full strategies in `S_i` that reach `h` and take `a` there.
    pub fn full_strategies_through(&self, a: ActionId) -> Result<Vec<Strategy>, GameError> {
        let all = self.view.strategies()?;
        Ok(all
            .iter()
            .filter(|s| {
                s.action(self.info) == Some(a)
                    && self.recalled.iter().all(|&(k, b)| s.action(k) == Some(b))
            })
            .cloned()
            .collect())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .assign
            .iter()
            .enumerate()
            .filter_map(|(k, a)| a.map(|a| format!("{k}:{a}")))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
