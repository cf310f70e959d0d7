//! Finite multistage games with an initial move of nature.
//!
//! A game is stored as an explicit tree of histories. Nature picks `θ` at
//! stage 0, then every player moves simultaneously at stages `1..=T`. Each
//! non-terminal history carries one information set per player, and the
//! profiles leaving a history are exactly the product of the players'
//! available actions there.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

/// Exact payoff type.
pub type Rational = Ratio<i64>;

/// A stage-outcome slot value; `None` is the dummy outcome `d`.
pub type Slot = Option<Rational>;

pub type ActionId = usize;
pub type NodeId = usize;

/// Enumeration limits. Exceeding one is reported as [`GameError::SpaceCap`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub histories: usize,
    pub strategies: usize,
    pub external: usize,
    pub completions: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            histories: 2_000_000,
            strategies: 100_000,
            external: 1_000_000,
            completions: 1_000_000,
        }
    }
}

impl Caps {
    /// Parses `key=value` pairs separated by commas, starting from the defaults.
    pub fn parse(spec: &str) -> Result<Caps, String> {
        let mut caps = Caps::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found `{part}`"))?;
            let value: usize = value
                .trim()
                .replace('_', "")
                .parse()
                .map_err(|_| format!("`{value}` is not a non-negative integer"))?;
            match key.trim() {
                "histories" => caps.histories = value,
                "strategies" => caps.strategies = value,
                "external" => caps.external = value,
                "completions" => caps.completions = value,
                other => return Err(format!("unknown cap `{other}`")),
            }
        }
        Ok(caps)
    }

    /// Reads `LOCALDOM_CAPS`, falling back to the defaults when unset.
    pub fn from_env() -> Result<Caps, String> {
        match std::env::var("LOCALDOM_CAPS") {
            Ok(spec) => Caps::parse(&spec),
            Err(_) => Ok(Caps::default()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("partition violation: {0}")]
    PartitionViolation(String),
    #[error("perfect recall violated for player {player} at info set `{info}`: {first} and {second} carry different own experience")]
    PerfectRecallViolation {
        player: String,
        info: String,
        first: String,
        second: String,
    },
    #[error("availability mismatch at {history}: {detail}")]
    AvailabilityMismatch { history: String, detail: String },
    #[error("dangling history {0}: no feasible continuation")]
    DanglingHistory(String),
    #[error("history {0} is not terminal")]
    NotTerminal(String),
    #[error("unknown info set `{0}`")]
    UnknownInfoSet(String),
    #[error("space cap exceeded: {what} exceeds {cap} (reached {count})")]
    SpaceCap {
        what: String,
        cap: usize,
        count: usize,
    },
    #[error("payoffs do not represent outcomes for player {player}: outcome `{outcome}` at {theta} has payoffs {first} and {second}")]
    IncoherentPayoffs {
        player: String,
        theta: String,
        outcome: String,
        first: Rational,
        second: Rational,
    },
    #[error("malformed game: {0}")]
    Malformed(String),
}

/// Raw, unvalidated game description.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GameDef {
    pub players: Vec<String>,
    pub nature: Vec<String>,
    pub horizon: usize,
    /// `Ā_i` per player.
    pub actions: Vec<Vec<String>>,
    pub info_sets: Vec<Vec<InfoSetDef>>,
    /// Non-terminal histories, including the stage-0 roots.
    pub histories: Vec<HistoryDef>,
    pub terminals: Vec<TerminalDef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfoSetDef {
    pub label: String,
    pub stage: usize,
    pub actions: Vec<ActionId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistoryDef {
    pub theta: usize,
    pub path: Vec<Vec<ActionId>>,
    /// Info set index per player.
    pub info: Vec<usize>,
    /// Stage outcomes per player for the last stage of `path` (flow games only).
    pub stage: Vec<Vec<Slot>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerminalDef {
    pub theta: usize,
    pub path: Vec<Vec<ActionId>>,
    pub outcomes: Vec<String>,
    pub payoffs: Vec<Rational>,
    pub stage: Vec<Vec<Slot>>,
}

/// A history `(θ, a¹, …, aᵗ)` by value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History {
    pub theta: usize,
    pub actions: Vec<Vec<ActionId>>,
}

/// Reference to an information set of one player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoSetRef {
    pub player: usize,
    pub index: usize,
    pub stage: usize,
}

#[derive(Clone, Debug)]
pub struct InfoSet {
    pub label: String,
    pub stage: usize,
    /// Sorted by action id.
    pub actions: Vec<ActionId>,
    pub members: Vec<NodeId>,
    /// The own info set and action of the previous stage (none at stage 1).
    pub pred: Option<(usize, ActionId)>,
    /// Info sets of the next stage, keyed by the action taken here.
    pub succ: BTreeMap<ActionId, Vec<usize>>,
    /// Nature states with a member in this set.
    pub thetas: Vec<usize>,
}

impl InfoSet {
    pub fn is_active(&self) -> bool {
        self.actions.len() > 1
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub theta: usize,
    pub depth: usize,
    pub parent: Option<NodeId>,
    /// Profile played to reach this node; empty at roots.
    pub profile: Vec<ActionId>,
    /// Children in canonical (lexicographic profile) order.
    pub children: Vec<NodeId>,
    /// Info set per player; empty at terminals.
    pub info: Vec<usize>,
    pub terminal: Option<usize>,
    pub stage: Vec<Vec<Slot>>,
}

#[derive(Clone, Debug)]
pub struct Terminal {
    pub node: NodeId,
    pub outcomes: Vec<String>,
    pub payoffs: Vec<Rational>,
}

/// A validated multistage game. Immutable after [`build_game`].
#[derive(Clone, Debug)]
pub struct Game {
    players: Vec<String>,
    nature: Vec<String>,
    horizon: usize,
    actions: Vec<Vec<String>>,
    info_sets: Vec<Vec<InfoSet>>,
    nodes: Vec<Node>,
    roots: Vec<NodeId>,
    terminals: Vec<Terminal>,
    caps: Caps,
}

fn render_path(
    players: usize,
    actions: &[Vec<String>],
    nature: &[String],
    theta: usize,
    path: &[Vec<ActionId>],
) -> String {
    let mut out = nature
        .get(theta)
        .cloned()
        .unwrap_or_else(|| format!("θ#{theta}"));
    for profile in path {
        out.push('|');
        let parts: Vec<String> = (0..players)
            .map(|j| {
                profile
                    .get(j)
                    .and_then(|&a| actions.get(j).and_then(|acts| acts.get(a)))
                    .cloned()
                    .unwrap_or_else(|| "?".to_string())
            })
            .collect();
        out.push_str(&parts.join(","));
    }
    out
}

/// Validates a raw description and builds the game with the caps from the environment.
pub fn build_game(def: &GameDef) -> Result<Game, GameError> {
    let caps = Caps::from_env().map_err(GameError::Malformed)?;
    build_game_with_caps(def, caps)
}

pub fn build_game_with_caps(def: &GameDef, caps: Caps) -> Result<Game, GameError> {
    let n = def.players.len();
    if n == 0 {
        return Err(GameError::Malformed("no players".into()));
    }
    if def.nature.is_empty() {
        return Err(GameError::Malformed("no nature states".into()));
    }
    if def.horizon == 0 {
        return Err(GameError::Malformed("horizon must be positive".into()));
    }
    if def.actions.len() != n || def.info_sets.len() != n {
        return Err(GameError::Malformed(
            "actions and info sets must be listed for every player".into(),
        ));
    }
    let total = def.histories.len() + def.terminals.len();
    if total > caps.histories {
        return Err(GameError::SpaceCap {
            what: "histories".into(),
            cap: caps.histories,
            count: total,
        });
    }
    let show = |theta: usize, path: &[Vec<ActionId>]| {
        render_path(n, &def.actions, &def.nature, theta, path)
    };

    for (i, sets) in def.info_sets.iter().enumerate() {
        let mut seen = HashMap::new();
        for set in sets {
            if seen.insert(set.label.as_str(), ()).is_some() {
                return Err(GameError::PartitionViolation(format!(
                    "player {} has two info sets labelled `{}`",
                    def.players[i], set.label
                )));
            }
            if set.stage == 0 || set.stage > def.horizon {
                return Err(GameError::PartitionViolation(format!(
                    "info set `{}` has stage {} outside 1..={}",
                    set.label, set.stage, def.horizon
                )));
            }
            if set.actions.is_empty() {
                return Err(GameError::AvailabilityMismatch {
                    history: set.label.clone(),
                    detail: "empty action set".into(),
                });
            }
            for &a in &set.actions {
                if a >= def.actions[i].len() {
                    return Err(GameError::AvailabilityMismatch {
                        history: set.label.clone(),
                        detail: format!(
                            "action #{a} is not in the action set of {}",
                            def.players[i]
                        ),
                    });
                }
            }
        }
    }

    #[derive(Clone, Copy)]
    enum Entry<'a> {
        Inner(&'a HistoryDef),
        Leaf(&'a TerminalDef),
    }
    let mut index: HashMap<(usize, Vec<Vec<ActionId>>), (Entry, bool)> = HashMap::new();
    for h in &def.histories {
        if h.theta >= def.nature.len() {
            return Err(GameError::Malformed(format!(
                "unknown nature state #{}",
                h.theta
            )));
        }
        if h.path.len() >= def.horizon {
            return Err(GameError::NotTerminal(format!(
                "{} is listed as non-terminal but has full length",
                show(h.theta, &h.path)
            )));
        }
        if h.info.len() != n {
            return Err(GameError::PartitionViolation(format!(
                "{} does not name one info set per player",
                show(h.theta, &h.path)
            )));
        }
        if index
            .insert((h.theta, h.path.clone()), (Entry::Inner(h), false))
            .is_some()
        {
            return Err(GameError::Malformed(format!(
                "duplicate history {}",
                show(h.theta, &h.path)
            )));
        }
    }
    for z in &def.terminals {
        if z.theta >= def.nature.len() {
            return Err(GameError::Malformed(format!(
                "unknown nature state #{}",
                z.theta
            )));
        }
        if z.path.len() != def.horizon {
            return Err(GameError::Malformed(format!(
                "terminal {} must have length {} (pad with dummy actions)",
                show(z.theta, &z.path),
                def.horizon
            )));
        }
        if z.outcomes.len() != n || z.payoffs.len() != n {
            return Err(GameError::Malformed(format!(
                "terminal {} needs one outcome and one payoff per player",
                show(z.theta, &z.path)
            )));
        }
        if index
            .insert((z.theta, z.path.clone()), (Entry::Leaf(z), false))
            .is_some()
        {
            return Err(GameError::Malformed(format!(
                "duplicate history {}",
                show(z.theta, &z.path)
            )));
        }
    }

    let mut nodes: Vec<Node> = Vec::with_capacity(total);
    let mut terminals = Vec::new();
    let mut roots = Vec::with_capacity(def.nature.len());
    let mut info_members: Vec<Vec<Vec<NodeId>>> = def
        .info_sets
        .iter()
        .map(|sets| vec![Vec::new(); sets.len()])
        .collect();

    for theta in 0..def.nature.len() {
        match index.get(&(theta, Vec::new())) {
            Some((Entry::Inner(_), _)) => {}
            _ => {
                return Err(GameError::Malformed(format!(
                    "nature state `{}` has no root history",
                    def.nature[theta]
                )))
            }
        }
        // Iterative DFS in canonical order.
        let mut stack: Vec<(Vec<Vec<ActionId>>, Option<NodeId>)> = vec![(Vec::new(), None)];
        while let Some((path, parent)) = stack.pop() {
            let id = nodes.len();
            let entry = {
                let (entry, visited) = index
                    .get_mut(&(theta, path.clone()))
                    .expect("children are checked before being pushed");
                *visited = true;
                *entry
            };
            let depth = path.len();
            let profile = path.last().cloned().unwrap_or_default();
            match entry {
                Entry::Leaf(z) => {
                    terminals.push(Terminal {
                        node: id,
                        outcomes: z.outcomes.clone(),
                        payoffs: z.payoffs.clone(),
                    });
                    nodes.push(Node {
                        theta,
                        depth,
                        parent,
                        profile,
                        children: Vec::new(),
                        info: Vec::new(),
                        terminal: Some(terminals.len() - 1),
                        stage: z.stage.clone(),
                    });
                }
                Entry::Inner(h) => {
                    let mut avail = Vec::with_capacity(n);
                    for (j, &info) in h.info.iter().enumerate() {
                        let set = def.info_sets[j].get(info).ok_or_else(|| {
                            GameError::PartitionViolation(format!(
                                "{} names unknown info set #{} for {}",
                                show(theta, &path),
                                info,
                                def.players[j]
                            ))
                        })?;
                        if set.stage != depth + 1 {
                            return Err(GameError::PartitionViolation(format!(
                                "{} (stage {}) placed in info set `{}` of stage {}",
                                show(theta, &path),
                                depth + 1,
                                set.label,
                                set.stage
                            )));
                        }
                        let mut acts = set.actions.clone();
                        acts.sort_unstable();
                        acts.dedup();
                        avail.push(acts);
                        info_members[j][info].push(id);
                    }
                    let stage = h.stage.clone();
                    let info = h.info.clone();
                    nodes.push(Node {
                        theta,
                        depth,
                        parent,
                        profile,
                        children: Vec::new(),
                        info,
                        terminal: None,
                        stage,
                    });
                    let mut kids = Vec::new();
                    let mut missing = Vec::new();
                    for prof in product(&avail) {
                        let mut child = path.clone();
                        child.push(prof);
                        if index.contains_key(&(theta, child.clone())) {
                            kids.push(child);
                        } else {
                            missing.push(child);
                        }
                    }
                    if kids.is_empty() {
                        return Err(GameError::DanglingHistory(show(theta, &path)));
                    }
                    if let Some(m) = missing.first() {
                        return Err(GameError::AvailabilityMismatch {
                            history: show(theta, &path),
                            detail: format!("continuation {} is not listed", show(theta, m)),
                        });
                    }
                    for child in kids.into_iter().rev() {
                        stack.push((child, Some(id)));
                    }
                }
            }
            if let Some(p) = parent {
                nodes[p].children.push(id);
            } else {
                roots.push(id);
            }
        }
    }

    // Children were pushed in DFS completion order; DFS preorder already lists them in order.
    if let Some(((theta, path), _)) = index.iter().find(|(_, (_, visited))| !*visited) {
        return Err(GameError::AvailabilityMismatch {
            history: show(*theta, path),
            detail: "history is not reachable through available actions".into(),
        });
    }

    let mut info_sets: Vec<Vec<InfoSet>> = Vec::with_capacity(n);
    for (j, sets) in def.info_sets.iter().enumerate() {
        let mut out = Vec::with_capacity(sets.len());
        for (k, set) in sets.iter().enumerate() {
            let members = std::mem::take(&mut info_members[j][k]);
            if members.is_empty() {
                return Err(GameError::PartitionViolation(format!(
                    "info set `{}` of {} contains no history",
                    set.label, def.players[j]
                )));
            }
            let mut actions = set.actions.clone();
            actions.sort_unstable();
            actions.dedup();
            let mut thetas: Vec<usize> = members.iter().map(|&m| nodes[m].theta).collect();
            thetas.sort_unstable();
            thetas.dedup();
            out.push(InfoSet {
                label: set.label.clone(),
                stage: set.stage,
                actions,
                members,
                pred: None,
                succ: BTreeMap::new(),
                thetas,
            });
        }
        info_sets.push(out);
    }

    let mut game = Game {
        players: def.players.clone(),
        nature: def.nature.clone(),
        horizon: def.horizon,
        actions: def.actions.clone(),
        info_sets,
        nodes,
        roots,
        terminals,
        caps,
    };
    game.link_recall()?;
    game.check_coherence()?;
    Ok(game)
}

/// Cartesian product of action lists, first list varying slowest.
pub(crate) fn product(lists: &[Vec<ActionId>]) -> Vec<Vec<ActionId>> {
    let mut out: Vec<Vec<ActionId>> = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for &a in list {
                let mut p = prefix.clone();
                p.push(a);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl Game {
    fn link_recall(&mut self) -> Result<(), GameError> {
        for j in 0..self.players.len() {
            for k in 0..self.info_sets[j].len() {
                let set = &self.info_sets[j][k];
                if set.stage == 1 {
                    continue;
                }
                let mut pred: Option<((usize, ActionId), NodeId)> = None;
                for &m in &set.members {
                    let node = &self.nodes[m];
                    let parent = node.parent.expect("non-root member");
                    let key = (self.nodes[parent].info[j], node.profile[j]);
                    match pred {
                        None => pred = Some((key, m)),
                        Some((p, first)) if p != key => {
                            return Err(GameError::PerfectRecallViolation {
                                player: self.players[j].clone(),
                                info: set.label.clone(),
                                first: self.describe(first),
                                second: self.describe(m),
                            })
                        }
                        _ => {}
                    }
                }
                let ((hp, a), _) = pred.expect("info sets are nonempty");
                self.info_sets[j][k].pred = Some((hp, a));
                self.info_sets[j][hp].succ.entry(a).or_default().push(k);
            }
            for set in &mut self.info_sets[j] {
                for list in set.succ.values_mut() {
                    list.sort_unstable();
                }
            }
        }
        Ok(())
    }

    fn check_coherence(&self) -> Result<(), GameError> {
        for j in 0..self.players.len() {
            let mut seen: HashMap<(usize, &str), Rational> = HashMap::new();
            for t in &self.terminals {
                let theta = self.nodes[t.node].theta;
                let key = (theta, t.outcomes[j].as_str());
                match seen.get(&key) {
                    Some(&u) if u != t.payoffs[j] => {
                        return Err(GameError::IncoherentPayoffs {
                            player: self.players[j].clone(),
                            theta: self.nature[theta].clone(),
                            outcome: t.outcomes[j].clone(),
                            first: u,
                            second: t.payoffs[j],
                        })
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, t.payoffs[j]);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }

    pub fn nature(&self) -> &[String] {
        &self.nature
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn with_caps(mut self, caps: Caps) -> Game {
        self.caps = caps;
        self
    }

    pub fn actions(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn action_label(&self, player: usize, action: ActionId) -> &str {
        &self.actions[player][action]
    }

    pub fn action_id(&self, player: usize, label: &str) -> Option<ActionId> {
        self.actions[player].iter().position(|a| a == label)
    }

    pub fn info_sets(&self, player: usize) -> &[InfoSet] {
        &self.info_sets[player]
    }

    pub fn info(&self, player: usize, index: usize) -> &InfoSet {
        &self.info_sets[player][index]
    }

    pub fn info_ref(&self, player: usize, index: usize) -> InfoSetRef {
        InfoSetRef {
            player,
            index,
            stage: self.info_sets[player][index].stage,
        }
    }

    pub fn find_info(&self, player: usize, label: &str) -> Result<usize, GameError> {
        self.info_sets[player]
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| GameError::UnknownInfoSet(label.to_string()))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self, theta: usize) -> NodeId {
        self.roots[theta]
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        self.nodes[id].terminal.is_some()
    }

    /// The child of `node` reached by `profile`.
    pub fn child(&self, node: NodeId, profile: &[ActionId]) -> Option<NodeId> {
        let x = &self.nodes[node];
        if x.terminal.is_some() {
            return None;
        }
        let mut idx = 0;
        for (j, &a) in profile.iter().enumerate() {
            let acts = &self.info_sets[j][x.info[j]].actions;
            let pos = acts.binary_search(&a).ok()?;
            idx = idx * acts.len() + pos;
        }
        x.children.get(idx).copied()
    }

    /// Nodes from the root to `node`, inclusive.
    pub fn path(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    pub fn history(&self, node: NodeId) -> History {
        let path = self.path(node);
        History {
            theta: self.nodes[node].theta,
            actions: path[1..]
                .iter()
                .map(|&v| self.nodes[v].profile.clone())
                .collect(),
        }
    }

    pub fn node_of(&self, history: &History) -> Option<NodeId> {
        let mut cur = *self.roots.get(history.theta)?;
        for profile in &history.actions {
            cur = self.child(cur, profile)?;
        }
        Some(cur)
    }

    pub fn describe(&self, node: NodeId) -> String {
        let h = self.history(node);
        render_path(
            self.players.len(),
            &self.actions,
            &self.nature,
            h.theta,
            &h.actions,
        )
    }

    pub fn describe_history(&self, history: &History) -> String {
        render_path(
            self.players.len(),
            &self.actions,
            &self.nature,
            history.theta,
            &history.actions,
        )
    }

    pub fn payoff(&self, terminal_node: NodeId, player: usize) -> Rational {
        let t = self.nodes[terminal_node].terminal.expect("terminal node");
        self.terminals[t].payoffs[player]
    }

    pub fn outcome(&self, terminal_node: NodeId, player: usize) -> &str {
        let t = self.nodes[terminal_node].terminal.expect("terminal node");
        &self.terminals[t].outcomes[player]
    }

    /// `(g_i(z), u_i(z))`.
    pub fn evaluate(&self, player: usize, z: &History) -> Result<(String, Rational), GameError> {
        let node = self
            .node_of(z)
            .ok_or_else(|| GameError::NotTerminal(self.describe_history(z)))?;
        match self.nodes[node].terminal {
            Some(t) => Ok((
                self.terminals[t].outcomes[player].clone(),
                self.terminals[t].payoffs[player],
            )),
            None => Err(GameError::NotTerminal(self.describe_history(z))),
        }
    }

    /// `τ(h)`.
    pub fn stage_of(&self, h: InfoSetRef) -> usize {
        self.info_sets[h.player][h.index].stage
    }

    pub fn is_active(&self, player: usize, info: usize) -> bool {
        self.info_sets[player][info].is_active()
    }

    /// Active info sets of a player, `H_i*`.
    pub fn active_info_sets(&self, player: usize) -> Vec<usize> {
        (0..self.info_sets[player].len())
            .filter(|&k| self.info_sets[player][k].is_active())
            .collect()
    }

    /// Own `(info set, action)` pairs leading to `info`, ordered by stage.
    pub fn recalled(&self, player: usize, info: usize) -> Vec<(usize, ActionId)> {
        let mut out = Vec::new();
        let mut cur = info;
        while let Some((p, a)) = self.info_sets[player][cur].pred {
            out.push((p, a));
            cur = p;
        }
        out.reverse();
        out
    }

    /// Walks from `start` to a terminal; `choose(player, info)` gives each move.
    pub fn play_from<F>(&self, start: NodeId, mut choose: F) -> NodeId
    where
        F: FnMut(usize, usize) -> ActionId,
    {
        let n = self.players.len();
        let mut cur = start;
        let mut profile = vec![0; n];
        while self.nodes[cur].terminal.is_none() {
            for (j, slot) in profile.iter_mut().enumerate() {
                *slot = choose(j, self.nodes[cur].info[j]);
            }
            cur = match self.child(cur, &profile) {
                Some(c) => c,
                None => panic!("infeasible profile {:?} at {}", profile, self.describe(cur)),
            };
        }
        cur
    }

    /// Histories along the path to `node` where `player` is active, as `(node, info)`.
    pub fn active_along(&self, player: usize, node: NodeId) -> Vec<(NodeId, usize)> {
        self.path(node)
            .into_iter()
            .filter(|&v| self.nodes[v].terminal.is_none())
            .map(|v| (v, self.nodes[v].info[player]))
            .filter(|&(_, k)| self.info_sets[player][k].is_active())
            .collect()
    }

    /// Reconstructs a raw description; `build_game(&g.to_def())` rebuilds `g`.
    pub fn to_def(&self) -> GameDef {
        let n = self.players.len();
        let mut histories = Vec::new();
        let mut terminals = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            let path = self.history(id).actions;
            match node.terminal {
                None => histories.push(HistoryDef {
                    theta: node.theta,
                    path,
                    info: node.info.clone(),
                    stage: node.stage.clone(),
                }),
                Some(t) => terminals.push(TerminalDef {
                    theta: node.theta,
                    path,
                    outcomes: self.terminals[t].outcomes.clone(),
                    payoffs: self.terminals[t].payoffs.clone(),
                    stage: node.stage.clone(),
                }),
            }
        }
        GameDef {
            players: self.players.clone(),
            nature: self.nature.clone(),
            horizon: self.horizon,
            actions: self.actions.clone(),
            info_sets: (0..n)
                .map(|j| {
                    self.info_sets[j]
                        .iter()
                        .map(|s| InfoSetDef {
                            label: s.label.clone(),
                            stage: s.stage,
                            actions: s.actions.clone(),
                        })
                        .collect()
                })
                .collect(),
            histories,
            terminals,
        }
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "θ#{}", self.theta)?;
        for p in &self.actions {
            write!(f, "|{:?}", p)?;
        }
        Ok(())
    }
}

/// Static frame of a game produced by a [`StageModel`].
#[derive(Clone, Debug)]
pub struct Frame {
    pub players: Vec<String>,
    pub nature: Vec<String>,
    pub horizon: usize,
    pub actions: Vec<Vec<String>>,
}

/// Stage-by-stage rules from which a game tree is expanded.
pub trait StageModel {
    type State: Clone;

    fn root(&self, theta: usize) -> Self::State;

    /// Info set label and available actions of `player` at `state`.
    fn info(&self, state: &Self::State, player: usize) -> (String, Vec<ActionId>);

    fn advance(&self, state: &Self::State, profile: &[ActionId]) -> Self::State;

    /// Outcome label and payoff at a terminal state.
    fn outcome(&self, state: &Self::State, player: usize) -> (String, Rational);

    /// Stage outcomes produced by `profile` at `state`; empty for plain games.
    fn stage_outcome(
        &self,
        _state: &Self::State,
        _profile: &[ActionId],
        _player: usize,
    ) -> Vec<Slot> {
        Vec::new()
    }
}

/// Expands a model into a raw description in canonical order.
pub fn expand_model<M: StageModel>(
    frame: &Frame,
    model: &M,
    caps: Caps,
) -> Result<GameDef, GameError> {
    let n = frame.players.len();
    let mut labels: Vec<HashMap<String, usize>> = vec![HashMap::new(); n];
    let mut info_sets: Vec<Vec<InfoSetDef>> = vec![Vec::new(); n];
    let mut histories = Vec::new();
    let mut terminals = Vec::new();

    struct Item<S> {
        theta: usize,
        path: Vec<Vec<ActionId>>,
        state: S,
        stage: Vec<Vec<Slot>>,
    }
    for theta in 0..frame.nature.len() {
        let mut stack = vec![Item {
            theta,
            path: Vec::new(),
            state: model.root(theta),
            stage: Vec::new(),
        }];
        while let Some(item) = stack.pop() {
            if histories.len() + terminals.len() >= caps.histories {
                return Err(GameError::SpaceCap {
                    what: "histories".into(),
                    cap: caps.histories,
                    count: histories.len() + terminals.len() + 1,
                });
            }
            let depth = item.path.len();
            if depth == frame.horizon {
                let mut outcomes = Vec::with_capacity(n);
                let mut payoffs = Vec::with_capacity(n);
                for j in 0..n {
                    let (o, u) = model.outcome(&item.state, j);
                    outcomes.push(o);
                    payoffs.push(u);
                }
                terminals.push(TerminalDef {
                    theta: item.theta,
                    path: item.path,
                    outcomes,
                    payoffs,
                    stage: item.stage,
                });
                continue;
            }
            let mut info = Vec::with_capacity(n);
            let mut avail = Vec::with_capacity(n);
            for j in 0..n {
                let (label, mut acts) = model.info(&item.state, j);
                acts.sort_unstable();
                acts.dedup();
                let k = match labels[j].get(&label) {
                    Some(&k) => {
                        let set = &info_sets[j][k];
                        if set.stage != depth + 1 || set.actions != acts {
                            return Err(GameError::AvailabilityMismatch {
                                history: render_path(n, &frame.actions, &frame.nature, item.theta, &item.path),
                                detail: format!(
                                    "info set `{label}` of {} offers different actions or stages across its histories",
                                    frame.players[j]
                                ),
                            });
                        }
                        k
                    }
                    None => {
                        let k = info_sets[j].len();
                        labels[j].insert(label.clone(), k);
                        info_sets[j].push(InfoSetDef {
                            label,
                            stage: depth + 1,
                            actions: acts.clone(),
                        });
                        k
                    }
                };
                info.push(k);
                avail.push(acts);
            }
            histories.push(HistoryDef {
                theta: item.theta,
                path: item.path.clone(),
                info,
                stage: item.stage,
            });
            for profile in product(&avail).into_iter().rev() {
                let stage: Vec<Vec<Slot>> = (0..n)
                    .map(|j| model.stage_outcome(&item.state, &profile, j))
                    .collect();
                let stage = if stage.iter().all(Vec::is_empty) {
                    Vec::new()
                } else {
                    stage
                };
                let state = model.advance(&item.state, &profile);
                let mut path = item.path.clone();
                path.push(profile);
                stack.push(Item {
                    theta: item.theta,
                    path,
                    state,
                    stage,
                });
            }
        }
    }
    Ok(GameDef {
        players: frame.players.clone(),
        nature: frame.nature.clone(),
        horizon: frame.horizon,
        actions: frame.actions.clone(),
        info_sets,
        histories,
        terminals,
    })
}

/// Parses `p`, `p/q`, or a decimal such as `2.5` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().ok()?;
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let w: i64 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.parse().ok()?
        };
        let scale = 10i64.checked_pow(frac.len() as u32)?;
        let f: i64 = frac.parse().ok()?;
        let num = w.checked_abs()?.checked_mul(scale)?.checked_add(f)?;
        return Some(Rational::new(if negative { -num } else { num }, scale));
    }
    text.parse::<i64>().ok().map(Rational::from_integer)
}

/// Canonical text for a rational: `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn format_slot(s: &Slot) -> String {
    match s {
        None => "d".to_string(),
        Some(r) => format_rational(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_shot() -> GameDef {
        GameDef {
            players: vec!["P".into()],
            nature: vec!["θ".into()],
            horizon: 1,
            actions: vec![vec!["x".into()]],
            info_sets: vec![vec![InfoSetDef {
                label: "h".into(),
                stage: 1,
                actions: vec![0],
            }]],
            histories: vec![HistoryDef {
                theta: 0,
                path: vec![],
                info: vec![0],
                stage: vec![],
            }],
            terminals: vec![TerminalDef {
                theta: 0,
                path: vec![vec![0]],
                outcomes: vec!["o".into()],
                payoffs: vec![Rational::from_integer(1)],
                stage: vec![],
            }],
        }
    }

    #[test]
    fn degenerate_game_has_one_terminal() {
        let g = build_game(&one_shot()).unwrap();
        assert_eq!(g.terminals().len(), 1);
        assert!(!g.is_active(0, 0));
        let z = g.play_from(g.root(0), |_, _| 0);
        assert_eq!(g.payoff(z, 0), Rational::from_integer(1));
    }

    #[test]
    fn missing_continuation_is_reported() {
        let mut def = one_shot();
        def.actions[0].push("y".into());
        def.info_sets[0][0].actions = vec![0, 1];
        assert!(matches!(
            build_game(&def),
            Err(GameError::AvailabilityMismatch { .. })
        ));
        def.terminals.clear();
        assert!(matches!(
            build_game(&def),
            Err(GameError::DanglingHistory(_))
        ));
    }

    #[test]
    fn incoherent_payoffs_rejected() {
        let mut def = one_shot();
        def.actions[0].push("y".into());
        def.info_sets[0][0].actions = vec![0, 1];
        let mut z = def.terminals[0].clone();
        z.path = vec![vec![1]];
        z.payoffs = vec![Rational::from_integer(2)];
        def.terminals.push(z);
        assert!(matches!(
            build_game(&def),
            Err(GameError::IncoherentPayoffs { .. })
        ));
    }

    #[test]
    fn perfect_recall_witness() {
        // Player forgets her own first move.
        let def = GameDef {
            players: vec!["P".into()],
            nature: vec!["θ".into()],
            horizon: 2,
            actions: vec![vec!["l".into(), "r".into()]],
            info_sets: vec![vec![
                InfoSetDef {
                    label: "h1".into(),
                    stage: 1,
                    actions: vec![0, 1],
                },
                InfoSetDef {
                    label: "h2".into(),
                    stage: 2,
                    actions: vec![0],
                },
            ]],
            histories: vec![
                HistoryDef {
                    theta: 0,
                    path: vec![],
                    info: vec![0],
                    stage: vec![],
                },
                HistoryDef {
                    theta: 0,
                    path: vec![vec![0]],
                    info: vec![1],
                    stage: vec![],
                },
                HistoryDef {
                    theta: 0,
                    path: vec![vec![1]],
                    info: vec![1],
                    stage: vec![],
                },
            ],
            terminals: vec![
                TerminalDef {
                    theta: 0,
                    path: vec![vec![0], vec![0]],
                    outcomes: vec!["a".into()],
                    payoffs: vec![Rational::from_integer(0)],
                    stage: vec![],
                },
                TerminalDef {
                    theta: 0,
                    path: vec![vec![1], vec![0]],
                    outcomes: vec!["b".into()],
                    payoffs: vec![Rational::from_integer(1)],
                    stage: vec![],
                },
            ],
        };
        match build_game(&def) {
            Err(GameError::PerfectRecallViolation { first, second, .. }) => {
                assert_ne!(first, second);
            }
            other => panic!("expected recall violation, got {other:?}"),
        }
    }

    #[test]
    fn caps_parse() {
        let caps = Caps::parse("strategies=10, external=20").unwrap();
        assert_eq!(caps.strategies, 10);
        assert_eq!(caps.external, 20);
        assert_eq!(caps.histories, Caps::default().histories);
        assert!(Caps::parse("bogus=1").is_err());
    }

    #[test]
    fn rationals_round_trip() {
        assert_eq!(parse_rational("2/4"), Some(Rational::new(1, 2)));
        assert_eq!(parse_rational("2.5"), Some(Rational::new(5, 2)));
        assert_eq!(parse_rational("-3"), Some(Rational::from_integer(-3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&Rational::new(2, 4)), "1/2");
        assert_eq!(format_rational(&Rational::from_integer(7)), "7");
    }
}
