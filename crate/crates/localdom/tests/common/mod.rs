//! Brute-force oracles shared by the integration tests. Everything here works
//! from full plays from the root and never looks at branches or plans.

#![allow(dead_code)]

use std::collections::HashMap;

use localdom::harness::random::{random_game_with_caps, RandomGameSpec};
use localdom::interface::registry::{default_params, generate, MECHANISMS};
use localdom::strategy_space::{play, PlayerView, Strategy};
use localdom::{Caps, Game, Rational};

pub fn small_caps() -> Caps {
    Caps {
        strategies: 200,
        external: 200,
        ..Caps::default()
    }
}

/// Random games small enough for exhaustive checks, plus the base mechanisms
/// that fit the same caps.
pub fn small_corpus(seeds: std::ops::Range<u64>) -> Vec<(String, Game)> {
    let mut out = Vec::new();
    for (name, _, _) in MECHANISMS {
        if let Ok(b) = generate(name, &default_params(name)) {
            out.push((name.to_string(), b.game().clone().with_caps(small_caps())));
        }
    }
    for seed in seeds {
        let spec = RandomGameSpec::from_seed(seed);
        if let Ok(g) = random_game_with_caps(&spec, small_caps()) {
            out.push((spec.describe(), g));
        }
    }
    out
}

/// Every play of one player's strategies against the view's external states.
pub struct Plays<'v, 'g> {
    pub view: &'v PlayerView<'g>,
    pub strategies: Vec<Strategy>,
    index: HashMap<Strategy, usize>,
    /// `[s][e]`.
    pub payoff: Vec<Vec<Rational>>,
    /// `[s][e]`: own info set to the node where the play passes it.
    pub visits: Vec<Vec<HashMap<usize, usize>>>,
    /// `S_{-i}(h)` per own info set.
    reached: Vec<Vec<usize>>,
    /// `[s][h]`: whether the play against each external state passes `h`.
    hits: Vec<Vec<Vec<bool>>>,
}

impl<'v, 'g> Plays<'v, 'g> {
    pub fn new(view: &'v PlayerView<'g>) -> Option<Plays<'v, 'g>> {
        let g = view.game;
        let i = view.player;
        let strategies = view.strategies().ok()?.to_vec();
        let mut payoff = Vec::with_capacity(strategies.len());
        let mut visits = Vec::with_capacity(strategies.len());
        for s in &strategies {
            let mut row = Vec::with_capacity(view.external.len());
            let mut seen = Vec::with_capacity(view.external.len());
            for ext in &view.external {
                let z = play(g, i, s, ext);
                row.push(g.payoff(z, i));
                let path = g.path(z);
                seen.push(
                    path[..path.len() - 1]
                        .iter()
                        .map(|&x| (g.node(x).info[i], x))
                        .collect(),
                );
            }
            payoff.push(row);
            visits.push(seen);
        }
        let index = strategies
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, s)| (s, k))
            .collect();
        let reached = (0..g.info_sets(i).len())
            .map(|h| {
                (0..view.external.len())
                    .filter(|&e| {
                        visits
                            .iter()
                            .any(|row: &Vec<HashMap<usize, usize>>| row[e].contains_key(&h))
                    })
                    .collect()
            })
            .collect();
        let hits = visits
            .iter()
            .map(|row| {
                (0..g.info_sets(i).len())
                    .map(|h| row.iter().map(|v| v.contains_key(&h)).collect())
                    .collect()
            })
            .collect();
        Some(Plays {
            view,
            strategies,
            index,
            payoff,
            visits,
            reached,
            hits,
        })
    }

    pub fn of(&self, s: &Strategy) -> usize {
        self.index[s]
    }

    pub fn u(&self, s: &Strategy, e: usize) -> Rational {
        self.payoff[self.of(s)][e]
    }

    /// The node of info set `h` on the play of `(s, e)`, if the play passes it.
    pub fn passes(&self, s: &Strategy, e: usize, h: usize) -> Option<usize> {
        self.visits[self.of(s)][e].get(&h).copied()
    }

    /// `S_{-i}(h)`: external states against which some own strategy reaches `h`.
    pub fn scenarios(&self, h: usize) -> Vec<usize> {
        self.reached[h].clone()
    }

    /// Strategies that reach `h` and choose `a` there.
    pub fn through(&self, h: usize, a: usize) -> Vec<Strategy> {
        let recalled = self.view.game.recalled(self.view.player, h);
        self.strategies
            .iter()
            .filter(|s| {
                s.action(h) == Some(a) && recalled.iter().all(|&(k, b)| s.action(k) == Some(b))
            })
            .cloned()
            .collect()
    }

    /// Local dominance by its quantifiers over whole strategies: every
    /// strategy through `a` is beaten cell by cell, worst case against best
    /// case, by one strategy through `ā`. Cells index into `scen`.
    pub fn local(
        &self,
        h: usize,
        abar: usize,
        a: usize,
        scen: &[usize],
        cells: &[Vec<usize>],
    ) -> bool {
        let good = self.through(h, abar);
        let bad = self.through(h, a);
        bad.iter().all(|s| {
            good.iter().any(|sbar| {
                cells.iter().all(|cell| {
                    let lo = cell
                        .iter()
                        .map(|&m| self.u(sbar, scen[m]))
                        .min()
                        .expect("nonempty");
                    let hi = cell
                        .iter()
                        .map(|&m| self.u(s, scen[m]))
                        .max()
                        .expect("nonempty");
                    lo >= hi
                })
            })
        })
    }

    pub fn weak(&self, sbar: &Strategy, s: &Strategy) -> bool {
        let (x, y) = (self.of(sbar), self.of(s));
        (0..self.view.external.len()).all(|e| self.payoff[x][e] >= self.payoff[y][e])
    }

    /// Obvious dominance from scratch: at every active info set both
    /// strategies reach and split at, the worst case of `s̄` beats the best
    /// case of `s`.
    pub fn obvious(&self, sbar: &Strategy, s: &Strategy) -> bool {
        let g = self.view.game;
        let i = self.view.player;
        let (x, y) = (self.of(sbar), self.of(s));
        (0..g.info_sets(i).len())
            .filter(|&h| g.is_active(i, h))
            .all(|h| {
                if sbar.action(h) == s.action(h) {
                    return true;
                }
                let both = self.hits[x][h]
                    .iter()
                    .zip(&self.hits[y][h])
                    .any(|(p, q)| *p && *q);
                if !both {
                    return true;
                }
                let scen = &self.reached[h];
                let lo = scen.iter().map(|&e| self.payoff[x][e]).min();
                let hi = scen.iter().map(|&e| self.payoff[y][e]).max();
                lo >= hi
            })
    }
}
