//! Top trading cycles: the classic algorithm, the direct mechanism, and the
//! dynamic "you name it, you get it" game. Player `k` owns item `k`.

use std::collections::BTreeSet;

use crate::game_core::{
    build_game, expand_model, ActionId, Caps, Frame, Game, Rational, StageModel,
};
use crate::mechanisms::{letter, MechanismError};

/// A strict ranking of items, best first.
pub type Ranking = Vec<usize>;

/// Classic TTC: everyone points at the owner of their favourite remaining
/// item, cycles trade and leave, repeat.
pub fn ttc_reference_allocation(preferences: &[Ranking], ownership: &[usize]) -> Vec<usize> {
    let n = preferences.len();
    let owner_of = |item: usize| {
        ownership
            .iter()
            .position(|&o| o == item)
            .expect("every item is owned")
    };
    let mut alloc = vec![usize::MAX; n];
    let mut remaining: Vec<bool> = vec![true; n];
    while remaining.iter().any(|&r| r) {
        let point: Vec<usize> = (0..n)
            .map(|k| {
                if !remaining[k] {
                    return usize::MAX;
                }
                let item = *preferences[k]
                    .iter()
                    .find(|&&it| remaining[owner_of(it)])
                    .expect("some item remains");
                owner_of(item)
            })
            .collect();
        let cyc = cycles(&point, &remaining);
        for k in cyc {
            alloc[k] = ownership[point[k]];
            remaining[k] = false;
        }
    }
    alloc
}

/// Players on a cycle of the pointer map restricted to `alive`.
fn cycles(point: &[usize], alive: &[bool]) -> Vec<usize> {
    let n = point.len();
    let mut out = Vec::new();
    for k in (0..n).filter(|&k| alive[k]) {
        let mut cur = k;
        for _ in 0..n {
            cur = point[cur];
            if cur == usize::MAX || !alive[cur] {
                break;
            }
            if cur == k {
                out.push(k);
                break;
            }
        }
    }
    out
}

/// All rankings of `n` items in lexicographic order.
pub fn all_rankings(n: usize) -> Vec<Ranking> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Ranking>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn ranking_label(r: &Ranking) -> String {
    r.iter().map(|&k| letter(k)).collect()
}

pub fn parse_ranking(text: &str, n: usize) -> Option<Ranking> {
    let r: Vec<usize> = text
        .chars()
        .map(|c| (c as u8).wrapping_sub(b'a') as usize)
        .collect();
    let mut seen = r.clone();
    seen.sort_unstable();
    (seen == (0..n).collect::<Vec<_>>()).then_some(r)
}

fn utility(n: usize, ranking: &Ranking, item: usize) -> Rational {
    let pos = ranking
        .iter()
        .position(|&k| k == item)
        .expect("ranked item");
    Rational::from_integer((n - pos) as i64)
}

struct Direct {
    n: usize,
    truth: Vec<Ranking>,
    rankings: Vec<Ranking>,
}

impl StageModel for Direct {
    type State = Option<Vec<ActionId>>;

    fn root(&self, _theta: usize) -> Self::State {
        None
    }

    fn info(&self, _s: &Self::State, _player: usize) -> (String, Vec<ActionId>) {
        ("report".to_string(), (0..self.rankings.len()).collect())
    }

    fn advance(&self, _s: &Self::State, profile: &[ActionId]) -> Self::State {
        Some(profile.to_vec())
    }

    fn outcome(&self, s: &Self::State, player: usize) -> (String, Rational) {
        let reports: Vec<Ranking> = s
            .as_ref()
            .expect("played")
            .iter()
            .map(|&a| self.rankings[a].clone())
            .collect();
        let alloc = ttc_reference_allocation(&reports, &(0..self.n).collect::<Vec<_>>());
        (
            letter(alloc[player]),
            utility(self.n, &self.truth[player], alloc[player]),
        )
    }
}

/// Static direct mechanism: every player reports a full ranking.
pub fn gen_ttc_direct(n: usize, truth: &[Ranking]) -> Result<Game, MechanismError> {
    if n < 2 || truth.len() != n {
        return Err(MechanismError::BadParams(
            "need n ≥ 2 and one ranking per player".into(),
        ));
    }
    let rankings = all_rankings(n);
    let labels: Vec<String> = rankings.iter().map(ranking_label).collect();
    let frame = Frame {
        players: (0..n).map(|k| format!("owner-{}", letter(k))).collect(),
        nature: vec![truth
            .iter()
            .map(ranking_label)
            .collect::<Vec<_>>()
            .join("/")],
        horizon: 1,
        actions: vec![labels; n],
    };
    let model = Direct {
        n,
        truth: truth.to_vec(),
        rankings,
    };
    let def = expand_model(&frame, &model, Caps::from_env().unwrap_or_default())?;
    Ok(build_game(&def)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtcDynamicParams {
    pub n: usize,
    /// Preference profiles nature may draw.
    pub thetas: Vec<Vec<Ranking>>,
}

impl TtcDynamicParams {
    /// Six profiles for three players, covering self-pointing, 2-cycles and a 3-cycle.
    pub fn desk() -> TtcDynamicParams {
        let r = |s: &str| parse_ranking(s, 3).expect("ranking");
        TtcDynamicParams {
            n: 3,
            thetas: vec![
                vec![r("abc"), r("bac"), r("cab")],
                vec![r("bca"), r("cab"), r("abc")],
                vec![r("bca"), r("abc"), r("bac")],
                vec![r("cba"), r("cab"), r("bca")],
                vec![r("bac"), r("acb"), r("acb")],
                vec![r("cab"), r("bca"), r("bac")],
            ],
        }
    }
}

/// State of the dynamic game after some rounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtcState {
    pub theta: usize,
    pub round: usize,
    pub available: Vec<bool>,
    pub in_game: Vec<bool>,
    pub named: Vec<Option<usize>>,
    pub rename: Vec<bool>,
    pub got: Vec<Option<usize>>,
    pub history: Vec<String>,
    pub acts: Vec<Vec<usize>>,
}

impl TtcState {
    /// Items a player would get by naming them now: her own item and the
    /// items of everyone whose pointers lead to her.
    pub fn repository(&self, player: usize) -> BTreeSet<usize> {
        let n = self.available.len();
        let mut out = BTreeSet::new();
        out.insert(player);
        for k in (0..n).filter(|&k| self.in_game[k] && k != player) {
            let mut cur = k;
            for _ in 0..n {
                match self.named[cur] {
                    Some(item)
                        if self.available[item] && self.in_game[item] && !self.rename[cur] =>
                    {
                        cur = item
                    }
                    _ => break,
                }
                if cur == player {
                    out.insert(k);
                    break;
                }
                if cur == k {
                    break;
                }
            }
        }
        out
    }
}

pub struct DynamicTtc {
    pub params: TtcDynamicParams,
}

impl DynamicTtc {
    fn avail_label(available: &[bool]) -> String {
        let s: String = (0..available.len())
            .filter(|&k| available[k])
            .map(letter)
            .collect();
        if s.is_empty() {
            "-".into()
        } else {
            s
        }
    }
}

impl StageModel for DynamicTtc {
    type State = TtcState;

    fn root(&self, theta: usize) -> TtcState {
        let n = self.params.n;
        TtcState {
            theta,
            round: 0,
            available: vec![true; n],
            in_game: vec![true; n],
            named: vec![None; n],
            rename: vec![true; n],
            got: vec![None; n],
            history: vec![Self::avail_label(&vec![true; n])],
            acts: vec![Vec::new(); n],
        }
    }

    fn info(&self, s: &TtcState, player: usize) -> (String, Vec<ActionId>) {
        let ranking = ranking_label(&self.params.thetas[s.theta][player]);
        let acts: String = s.acts[player].iter().map(|&k| letter(k)).collect();
        let label = format!(
            "r={ranking};avail={};named={}",
            s.history.join(","),
            if acts.is_empty() { "-" } else { &acts }
        );
        let actions = if let Some(item) = s.got[player] {
            vec![item]
        } else if s.rename[player] {
            (0..self.params.n).filter(|&k| s.available[k]).collect()
        } else {
            vec![s.named[player].expect("named before")]
        };
        (label, actions)
    }

    fn advance(&self, s: &TtcState, profile: &[ActionId]) -> TtcState {
        let n = self.params.n;
        let mut next = s.clone();
        next.round += 1;
        for (k, &item) in profile.iter().enumerate() {
            next.acts[k].push(item);
            if s.in_game[k] {
                next.named[k] = Some(item);
            }
        }
        let point: Vec<usize> = (0..n)
            .map(|k| {
                if s.in_game[k] {
                    next.named[k].expect("named")
                } else {
                    usize::MAX
                }
            })
            .collect();
        for k in cycles(&point, &s.in_game) {
            next.got[k] = next.named[k];
            next.in_game[k] = false;
        }
        for k in 0..n {
            if !next.in_game[k] {
                next.available[k] = false;
            }
        }
        for k in 0..n {
            next.rename[k] = next.in_game[k] && !next.available[next.named[k].expect("named")];
        }
        next.history.push(Self::avail_label(&next.available));
        next
    }

    fn outcome(&self, s: &TtcState, player: usize) -> (String, Rational) {
        let item = s.got[player].expect("everyone leaves by the last round");
        (
            letter(item),
            utility(self.params.n, &self.params.thetas[s.theta][player], item),
        )
    }
}

impl DynamicTtc {
    /// States along the play of the given profiles, starting at the root.
    pub fn replay(&self, theta: usize, profiles: &[Vec<ActionId>]) -> Vec<TtcState> {
        let mut states = vec![self.root(theta)];
        for p in profiles {
            let next = self.advance(states.last().expect("nonempty"), p);
            states.push(next);
        }
        states
    }
}

pub fn gen_ttc_dynamic(params: &TtcDynamicParams) -> Result<Game, MechanismError> {
    let n = params.n;
    if n < 2 {
        return Err(MechanismError::BadParams(
            "need at least two players".into(),
        ));
    }
    if params.thetas.is_empty() {
        return Err(MechanismError::BadParams(
            "need at least one preference profile".into(),
        ));
    }
    for theta in &params.thetas {
        if theta.len() != n
            || theta
                .iter()
                .any(|r| parse_ranking(&ranking_label(r), n).is_none())
        {
            return Err(MechanismError::BadParams(
                "each profile needs one strict ranking per player".into(),
            ));
        }
    }
    let frame = Frame {
        players: (0..n).map(|k| format!("owner-{}", letter(k))).collect(),
        nature: params
            .thetas
            .iter()
            .map(|t| t.iter().map(ranking_label).collect::<Vec<_>>().join("/"))
            .collect(),
        horizon: n,
        actions: vec![(0..n).map(letter).collect(); n],
    };
    let model = DynamicTtc {
        params: params.clone(),
    };
    let def = expand_model(&frame, &model, Caps::from_env().unwrap_or_default())?;
    Ok(build_game(&def)?)
}
