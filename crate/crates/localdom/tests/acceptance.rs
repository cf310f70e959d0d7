//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines always show up in `cargo test`
//! output. A criterion listed in `KNOWN_FAILURES` must fail with the recorded
//! diagnosis; the process exits non-zero on any other failure, and also if a
//! known failure unexpectedly passes.

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use localdom::dominance::{
    find_dominant, locally_weakly_dominates, obviously_dominates, weakly_dominates, GlobalKind,
};
use localdom::ending_analysis::{ending_partition, is_irrelevant, locally_e_dominates};
use localdom::flow_games::{locally_s_dominates, Decomposition, FlowGame};
use localdom::game_core::{parse_rational, Caps};
use localdom::harness::claims::{
    direct_ttc_cases, verify_direct_ttc_bipartition, verify_random, Claim,
};
use localdom::interface::json::Strictness;
use localdom::interface::registry::{default_params, MECHANISMS};
use localdom::interface::{generate, isomorphic, parse, serialize_built};
use localdom::mechanisms::ausubel::Ausubel;
use localdom::mechanisms::japanese::{BID, LEAVE};
use localdom::mechanisms::ttc::{ranking_label, DynamicTtc};
use localdom::mechanisms::{
    gen_ausubel, gen_centipede, gen_grab_or_nab, gen_grab_or_nab_stage, gen_japanese,
    gen_ttc_dynamic,
};
use localdom::mechanisms::{
    ttc_reference_allocation, AusubelParams, JapaneseParams, TtcDynamicParams,
};
use localdom::strategy_space::{find_strategy, PlayerView};
use localdom::{Game, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Criteria expected to fail, with a fragment the failure detail must contain.
const KNOWN_FAILURES: &[(u32, &str)] = &[(4, "stranded with the own item")];

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(limit: Duration, took: Duration) -> Result<(), String> {
    check(took <= limit, format!("took {took:.2?}, limit {limit:?}"))
}

// ---------------------------------------------------------------- 1

fn centipede() -> Outcome {
    let g = gen_centipede();
    let ann = PlayerView::new(&g, 0).map_err(|e| e.to_string())?;
    let down = find_strategy(&g, 0, "down").map_err(|e| e.to_string())?;
    let ad = find_strategy(&g, 0, "across.down").map_err(|e| e.to_string())?;
    let v = weakly_dominates(&ann, &down, &ad);
    check(
        v.holds && v.strict_somewhere,
        "down does not weakly dominate across.down",
    )?;
    for i in 0..2 {
        let view = PlayerView::new(&g, i).map_err(|e| e.to_string())?;
        let search = find_dominant(&view, GlobalKind::Weak).map_err(|e| e.to_string())?;
        check(
            search.found.is_none(),
            format!("{} has a weakly dominant strategy", g.players()[i]),
        )?;
    }
    let across = g.action_id(0, "across").expect("action");
    let dn = g.action_id(0, "down").expect("action");
    let root = ann.local(g.find_info(0, "root").map_err(|e| e.to_string())?);
    let v = locally_weakly_dominates(&root, dn, across).map_err(|e| e.to_string())?;
    check(!v.holds, "across is locally weakly dominated at the root")?;
    let late = ann.local(g.find_info(0, "across.across").map_err(|e| e.to_string())?);
    let v = locally_weakly_dominates(&late, across, dn).map_err(|e| e.to_string())?;
    check(
        !v.holds,
        "down is locally weakly dominated at (across, across)",
    )?;
    Ok("down ≻ across.down; no weakly dominant strategy; across@root and down@(across,across) undominated".into())
}

// ---------------------------------------------------------------- 2

fn grab_or_nab() -> Outcome {
    let stage = gen_grab_or_nab_stage();
    for i in 0..2 {
        let view = PlayerView::new(&stage.game, i).map_err(|e| e.to_string())?;
        let g = find_strategy(&stage.game, i, "G").map_err(|e| e.to_string())?;
        let n = find_strategy(&stage.game, i, "N").map_err(|e| e.to_string())?;
        check(
            obviously_dominates(&view, &g, &n).holds,
            "stage game: G does not obviously dominate N",
        )?;
    }
    let fg = gen_grab_or_nab();
    let game = &fg.game;
    let view = PlayerView::new(game, 0).map_err(|e| e.to_string())?;
    let gg = find_strategy(game, 0, "G.G").map_err(|e| e.to_string())?;
    let ng = find_strategy(game, 0, "N.G").map_err(|e| e.to_string())?;
    let v = obviously_dominates(&view, &gg, &ng);
    let f = &v
        .counterexample
        .as_ref()
        .ok_or("G.G obviously dominates N.G")?
        .failures[0];
    let (lo, hi) = (view.payoff(&gg, f.low), view.payoff(&ng, f.high));
    check(
        (lo, hi) == (Rational::from_integer(6), Rational::from_integer(7)),
        format!("min/max are {lo}/{hi}, expected 6/7"),
    )?;
    let search = find_dominant(&view, GlobalKind::Obvious).map_err(|e| e.to_string())?;
    check(
        search.found.is_none(),
        "some strategy is obviously dominant in the repeated game",
    )?;
    let (grab, nab) = (0, 1);
    for i in 0..2 {
        let view = PlayerView::new(game, i).map_err(|e| e.to_string())?;
        for k in game.active_info_sets(i) {
            let local = view.local(k);
            let label = &game.info(i, k).label;
            let e = locally_e_dominates(&local, grab, nab).map_err(|e| e.to_string())?;
            check(!e.holds, format!("G locally e-dominates N at {label}"))?;
            let s = locally_s_dominates(&fg, &local, grab, nab).map_err(|e| e.to_string())?;
            check(
                s.holds,
                format!("G does not locally s-dominate N at {label}"),
            )?;
        }
    }
    Ok("G obviously dominant in the stage game; min(G,G)=6 < max(N,G)=7; G not e- but s-dominant at every stage".into())
}

// ---------------------------------------------------------------- 3

fn own_value(label: &str) -> Rational {
    let v = label
        .split(';')
        .next()
        .and_then(|s| s.strip_prefix("v="))
        .expect("value in label");
    parse_rational(v).expect("rational value")
}

/// Checks bid ≻ leave wherever the price is at most v − 1. Returns
/// `(checked info sets, reentry neitherEnds cells checked, nonempty ones)`.
fn japanese_variant(p: &JapaneseParams) -> Result<(usize, usize, usize), String> {
    let g = gen_japanese(p).map_err(|e| e.to_string())?;
    let (mut checked, mut cells, mut nonempty) = (0, 0, 0);
    for i in 0..p.bidders {
        let view = PlayerView::new(&g, i).map_err(|e| e.to_string())?;
        for k in g.active_info_sets(i) {
            let set = g.info(i, k);
            let price = p.prices[set.stage - 1];
            if price > own_value(&set.label) - Rational::from_integer(1) {
                continue;
            }
            let local = view.local(k);
            let v = locally_e_dominates(&local, BID, LEAVE).map_err(|e| e.to_string())?;
            check(
                v.holds,
                format!(
                    "bid does not locally e-dominate leave at `{}` (reentry {})",
                    set.label, p.reentry
                ),
            )?;
            checked += 1;
            if p.reentry {
                let ep = ending_partition(&local, BID, LEAVE).map_err(|e| e.to_string())?;
                let irr = is_irrelevant(&local, BID, LEAVE, &ep.neither_ends)
                    .map_err(|e| e.to_string())?;
                check(irr, format!("neitherEnds is relevant at `{}`", set.label))?;
                cells += 1;
                nonempty += usize::from(!ep.neither_ends.is_empty());
            }
        }
    }
    Ok((checked, cells, nonempty))
}

fn japanese() -> Outcome {
    let mut notes = Vec::new();
    for reentry in [false, true] {
        let p = JapaneseParams {
            reentry,
            ..JapaneseParams::desk()
        };
        let (checked, cells, nonempty) = japanese_variant(&p)?;
        check(checked > 0, "no info set with p ≤ v − 1")?;
        notes.push(if reentry {
            format!("re-entry: {checked} info sets, neitherEnds irrelevant at {cells} ({nonempty} nonempty)")
        } else {
            format!("no re-entry: {checked} info sets")
        });
    }
    // With two bidders an open round means both bid, so neitherEnds is empty.
    // Three bidders give nonempty cells.
    let three = JapaneseParams {
        bidders: 3,
        prices: (1..=2).map(Rational::from_integer).collect(),
        values: (0..=3).map(Rational::from_integer).collect(),
        reentry: true,
    };
    let (checked, cells, nonempty) = japanese_variant(&three)?;
    check(
        nonempty > 0,
        "three bidders: every neitherEnds cell is empty",
    )?;
    notes.push(format!("3 bidders re-entry: {checked} info sets, {nonempty}/{cells} nonempty neitherEnds irrelevant"));
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 4

/// Independent TTC: repeatedly follow pointers from the lowest remaining
/// player until a player repeats, then clear that cycle.
fn ttc_oracle(prefs: &[Vec<usize>]) -> Vec<usize> {
    let n = prefs.len();
    let mut left: BTreeSet<usize> = (0..n).collect();
    let mut alloc = vec![usize::MAX; n];
    while let Some(&start) = left.iter().next() {
        let top = |k: usize| {
            *prefs[k]
                .iter()
                .find(|x| left.contains(x))
                .expect("own item remains")
        };
        let mut seen = vec![start];
        let mut cur = top(start);
        while !seen.contains(&cur) {
            seen.push(cur);
            cur = top(cur);
        }
        let from = seen.iter().position(|&k| k == cur).expect("on the walk");
        for &k in &seen[from..] {
            alloc[k] = top(k);
        }
        for &k in &seen[from..] {
            left.remove(&k);
        }
    }
    alloc
}

fn favourite(game: &Game, params: &TtcDynamicParams, player: usize, info: usize) -> usize {
    let set = game.info(player, info);
    let theta = set.thetas[0];
    *params.thetas[theta][player]
        .iter()
        .find(|x| set.actions.contains(x))
        .expect("some item available")
}

fn ttc_dynamic() -> Outcome {
    let params = TtcDynamicParams::desk();
    let g = gen_ttc_dynamic(&params).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let mut problems = Vec::new();

    // Truthful play against the oracles.
    for (theta, prefs) in params.thetas.iter().enumerate() {
        let z = g.play_from(g.root(theta), |j, k| favourite(&g, &params, j, k));
        let got: Vec<String> = (0..params.n).map(|j| g.outcome(z, j).to_string()).collect();
        let ours = ttc_oracle(prefs);
        let reference = ttc_reference_allocation(prefs, &(0..params.n).collect::<Vec<_>>());
        let want: Vec<String> = ours
            .iter()
            .map(|&k| ((b'a' + k as u8) as char).to_string())
            .collect();
        if got != want || ours != reference {
            problems.push(format!(
                "θ={}: game {:?}, oracle {:?}, reference {:?}",
                prefs
                    .iter()
                    .map(ranking_label)
                    .collect::<Vec<_>>()
                    .join("/"),
                got,
                ours,
                reference
            ));
        }
    }
    notes.push(format!(
        "allocations match the oracle on {} profiles",
        params.thetas.len()
    ));

    // Repository monotonicity on every play.
    let model = DynamicTtc {
        params: params.clone(),
    };
    let mut steps = 0;
    for t in g.terminals() {
        let h = g.history(t.node);
        let states = model.replay(h.theta, &h.actions);
        for w in states.windows(2) {
            for j in 0..params.n {
                if w[0].in_game[j] && w[1].in_game[j] {
                    steps += 1;
                    if !w[0].repository(j).is_subset(&w[1].repository(j)) {
                        problems.push(format!(
                            "repository of {} shrinks along {}",
                            g.players()[j],
                            g.describe(t.node)
                        ));
                    }
                }
            }
        }
    }
    notes.push(format!(
        "repositories monotone on {} plays ({steps} steps)",
        g.terminals().len()
    ));

    // Naming the favourite against every alternative, every player.
    let mut failing = Vec::new();
    let mut stranded = 0;
    let mut total = 0;
    for i in 0..params.n {
        let view = PlayerView::new(&g, i).map_err(|e| e.to_string())?;
        for k in g.active_info_sets(i) {
            let local = view.local(k);
            let fav = favourite(&g, &params, i, k);
            for &alt in local.actions().iter().filter(|&&a| a != fav) {
                total += 1;
                let v = locally_e_dominates(&local, fav, alt).map_err(|e| e.to_string())?;
                if v.holds {
                    continue;
                }
                let cx = v.counterexample.expect("failure has a counterexample");
                let f = &cx.failures[0];
                let own = ((b'a' + i as u8) as char).to_string();
                let z = view.play(&f.candidate, f.low);
                if g.outcome(z, i) == own && g.outcome(view.play(&cx.dominated, f.high), i) != own {
                    stranded += 1;
                }
                failing.push(format!(
                    "{}@{} ({} vs {})",
                    g.players()[i],
                    g.info(i, k).label,
                    g.action_label(i, fav),
                    g.action_label(i, alt)
                ));
            }
        }
    }
    if !problems.is_empty() {
        return Err(problems.join("; "));
    }
    if failing.is_empty() {
        notes.push(format!(
            "favourite locally e-dominant in all {total} comparisons"
        ));
        return Ok(notes.join("; "));
    }
    let diagnosis = if stranded == failing.len() {
        "each failure pools a scenario where the opponents trade among themselves, leaving the player stranded with the own item after naming the favourite, with one where the alternative is obtained"
    } else {
        "unexplained failures"
    };
    Err(format!(
        "{}; favourite not locally e-dominant in {}/{} comparisons: {}; {diagnosis}",
        notes.join("; "),
        failing.len(),
        total,
        failing.join(", ")
    ))
}

// ---------------------------------------------------------------- 5

fn direct_ttc() -> Outcome {
    let report = verify_direct_ttc_bipartition();
    let (_, cases) = direct_ttc_cases();
    check(cases.len() == 16, format!("{} cases", cases.len()))?;
    check(cases.iter().all(|c| c.fails()), "some bipartition works")?;
    check(
        cases.iter().all(|c| c.expected_reason()),
        "a case fails for the wrong reason",
    )?;
    check(report.confirmed(), report.verdict.to_string())?;
    let irr = cases.iter().filter(|c| !c.irrelevance_holds).count();
    Ok(format!(
        "16/16 bipartitions fail ({irr} on irrelevance, {} on the complement)",
        16 - irr
    ))
}

// ---------------------------------------------------------------- 6

fn ausubel_instances(decomposition: Decomposition) -> Vec<(String, AusubelParams)> {
    let r = |p: i64, q: i64| Rational::new(p, q);
    let multi = AusubelParams {
        values: vec![
            vec![vec![r(5, 2), r(3, 2)], vec![r(5, 2), r(3, 2)]],
            vec![vec![r(3, 1), r(1, 2)], vec![r(9, 4), r(7, 4)]],
            vec![vec![r(7, 4), r(5, 4)], vec![r(3, 1), r(5, 2)]],
        ],
        ..AusubelParams::desk(decomposition)
    };
    vec![
        ("desk".into(), AusubelParams::desk(decomposition)),
        ("three profiles".into(), multi),
    ]
}

/// Bids below next round's demand against that demand, at open rounds before the last.
fn underbids_dominated(fg: &FlowGame, p: &AusubelParams) -> Result<(usize, Vec<String>), String> {
    let g = &fg.game;
    let mut checked = 0;
    let mut failing = Vec::new();
    for i in 0..p.bidders {
        let view = PlayerView::new(g, i).map_err(|e| e.to_string())?;
        for k in g.active_info_sets(i) {
            let set = g.info(i, k);
            if set.stage >= p.prices.len() || !set.label.ends_with("open") {
                continue;
            }
            let demand = p.demand(set.thetas[0], i, p.prices[set.stage]) as usize;
            if !set.actions.contains(&demand) {
                continue;
            }
            let local = view.local(k);
            for b in (0..demand).filter(|b| set.actions.contains(b)) {
                checked += 1;
                let v = locally_s_dominates(fg, &local, demand, b).map_err(|e| e.to_string())?;
                if !v.holds {
                    failing.push(format!("{}@{}: {demand} vs {b}", g.players()[i], set.label));
                }
            }
        }
    }
    Ok((checked, failing))
}

fn ausubel() -> Outcome {
    let mut notes = Vec::new();
    for (name, p) in ausubel_instances(Decomposition::ExcessWithBounds) {
        let fg = gen_ausubel(&p).map_err(|e| e.to_string())?;
        let (checked, failing) = underbids_dominated(&fg, &p)?;
        check(checked > 0, format!("{name}: no underbid to check"))?;
        check(
            failing.is_empty(),
            format!("{name}: not s-dominated: {}", failing.join(", ")),
        )?;
        notes.push(format!("{name}: {checked} underbids s-dominated"));

        // Bounds sandwich on every rationing event of every play.
        let model = Ausubel { params: &p };
        let m = p.supply;
        let mut events = 0;
        for t in fg.game.terminals() {
            let h = fg.game.history(t.node);
            let rounds = model.trace(h.theta, &h.actions);
            let bids: Vec<Vec<i64>> = h
                .actions
                .iter()
                .map(|prof| prof.iter().map(|&a| a as i64).collect())
                .collect();
            for (r, recs) in rounds.iter().enumerate() {
                if bids[r].iter().sum::<i64>() > m {
                    continue;
                }
                for (i, rec) in recs.iter().enumerate() {
                    let others = |bs: &[i64]| {
                        bs.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, b)| b)
                            .sum::<i64>()
                    };
                    let q_now = (m - others(&bids[r])).max(0);
                    let q_before = if r == 0 {
                        0
                    } else {
                        (m - others(&bids[r - 1])).max(0)
                    };
                    let prev = |j: usize| if r == 0 { m } else { bids[r - 1][j] };
                    let raw = m
                        - (0..i).map(prev).sum::<i64>()
                        - (i + 1..p.bidders).map(|j| bids[r][j]).sum::<i64>();
                    let cap = raw.clamp(0, m);
                    events += 1;
                    check(
                        rec.cap == cap,
                        format!(
                            "{name}: q̂ is {} but the rule gives {cap} on {}",
                            rec.cap,
                            fg.game.describe(t.node)
                        ),
                    )?;
                    check(
                        q_before <= cap && cap <= q_now,
                        format!(
                            "{name}: {q_before} ≤ {cap} ≤ {q_now} fails on {}",
                            fg.game.describe(t.node)
                        ),
                    )?;
                }
            }
        }
        check(events > 0, format!("{name}: no rationing event"))?;
        notes.push(format!("{name}: sandwich on {events} rationing events"));
    }
    for (name, p) in ausubel_instances(Decomposition::FinalOnly) {
        let fg = gen_ausubel(&p).map_err(|e| e.to_string())?;
        let (checked, failing) = underbids_dominated(&fg, &p)?;
        let verdict = if failing.is_empty() {
            "holds".to_string()
        } else {
            format!("fails at {}", failing.join(", "))
        };
        notes.push(format!(
            "finalOnly {name}: {checked} underbids, verdict {verdict}"
        ));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 7

fn properties() -> Outcome {
    let claims = [
        Claim::Prop1,
        Claim::Theorem1,
        Claim::Theorem2,
        Claim::StaticEquivalence,
        Claim::Refinement,
        Claim::Remark8,
        Claim::ReducedExternal,
    ];
    let mut notes = Vec::new();
    for claim in claims {
        // Extend the seed range until 100 games have actually been checked.
        let mut hi = 100;
        let report = loop {
            let r = verify_random(claim, 0..hi);
            if r.instances >= 100 || hi >= 400 {
                break r;
            }
            hi += 50;
        };
        check(
            report.confirmed(),
            format!("{}: {}", claim.id(), report.verdict),
        )?;
        check(
            report.instances >= 100,
            format!("{}: only {} games checked", claim.id(), report.instances),
        )?;
        notes.push(format!(
            "{} {}/{} games {} checks",
            claim.id(),
            report.instances,
            hi,
            report.checked
        ));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 8

fn round_trips() -> Result<usize, String> {
    let mut n = 0;
    for (name, _, _) in MECHANISMS {
        let built = generate(name, &default_params(name)).map_err(|e| e.to_string())?;
        let text = serialize_built(&built);
        let (doc, _) = parse(&text, Strictness::Strict).map_err(|e| format!("{name}: {e}"))?;
        let again = doc
            .build(Caps::default())
            .map_err(|e| format!("{name}: {e}"))?;
        isomorphic(&built, &again).map_err(|e| format!("{name}: {e}"))?;
        check(
            serialize_built(&again) == text,
            format!("{name}: re-serialization differs"),
        )?;
        n += 1;
    }
    Ok(n)
}

fn mutate(rng: &mut ChaCha8Rng, text: &[char]) -> String {
    const PIECES: &[&str] = &[
        "{",
        "}",
        "[",
        "]",
        ",",
        ":",
        "\"",
        "\\",
        "0",
        "-1",
        "1e9",
        "null",
        "true",
        "\"x\"",
        "\u{0}",
        "é",
        "99999999999999999999",
    ];
    let mut out = text.to_vec();
    for _ in 0..rng.gen_range(1..=3) {
        if out.is_empty() {
            break;
        }
        let at = rng.gen_range(0..out.len());
        match rng.gen_range(0..5) {
            0 => {
                out.remove(at);
            }
            1 => {
                let piece = PIECES[rng.gen_range(0..PIECES.len())];
                for (k, c) in piece.chars().enumerate() {
                    out.insert(at + k, c);
                }
            }
            2 => {
                out[at] = PIECES[rng.gen_range(0..PIECES.len())]
                    .chars()
                    .next()
                    .unwrap_or('x')
            }
            3 => out.truncate(at),
            _ => {
                let end = (at + rng.gen_range(1..40)).min(out.len());
                let span: Vec<char> = out[at..end].to_vec();
                let to = rng.gen_range(0..=out.len());
                for (k, c) in span.into_iter().enumerate() {
                    out.insert(to + k, c);
                }
            }
        }
    }
    out.into_iter().collect()
}

fn fuzz(mutations: usize) -> Result<(usize, usize), String> {
    let sources: Vec<String> = ["centipede", "grab_or_nab_stage", "grab_or_nab", "ausubel"]
        .iter()
        .map(|name| serialize_built(&generate(name, &[]).expect("fixture")))
        .chain(std::iter::once("{\"format\":\"localdom\",\"version\":1,\"kind\":\"base\",\"generator\":{\"mechanism\":\"centipede\",\"params\":{}}}".to_string()))
        .collect();
    let texts: Vec<Vec<char>> = sources.iter().map(|s| s.chars().collect()).collect();
    let caps = Caps {
        histories: 5_000,
        strategies: 500,
        external: 5_000,
        completions: 5_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut accepted, mut rejected) = (0, 0);
    for k in 0..mutations {
        let text = mutate(&mut rng, &texts[k % texts.len()]);
        let run = catch_unwind(AssertUnwindSafe(|| {
            match parse(&text, Strictness::Lenient) {
                Ok((doc, _)) => doc.build(caps).is_ok(),
                Err(e) => {
                    assert!(!e.diagnostics.is_empty(), "error without diagnostics");
                    false
                }
            }
        }));
        match run {
            Ok(true) => accepted += 1,
            Ok(false) => rejected += 1,
            Err(_) => {
                return Err(format!(
                    "mutation {k} panicked on input of {} chars",
                    text.len()
                ))
            }
        }
    }
    Ok((accepted, rejected))
}

/// One scripted invocation: arguments, stdin, expected exit code.
struct Step {
    args: Vec<String>,
    stdin: Option<String>,
    env: Option<(&'static str, &'static str)>,
    code: i32,
}

fn step(args: &str, code: i32) -> Step {
    Step {
        args: args.split_whitespace().map(String::from).collect(),
        stdin: None,
        env: None,
        code,
    }
}

fn run_step(s: &Step) -> Result<(i32, String), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_localdom"));
    cmd.args(&s.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some((k, v)) = s.env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().map_err(|e| e.to_string())?;
    {
        let mut stdin = child.stdin.take().expect("piped");
        if let Some(input) = &s.stdin {
            stdin
                .write_all(input.as_bytes())
                .map_err(|e| e.to_string())?;
        }
    }
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    Ok((
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    ))
}

fn cli_session() -> Result<usize, String> {
    let dir = std::env::temp_dir().join(format!("localdom-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = dir.join("centipede.json");
    let broken = dir.join("broken.json");
    let grab = serialize_built(&generate("grab_or_nab", &[]).map_err(|e| e.to_string())?);
    let f = file.display().to_string();
    let mut steps = vec![
        step(&format!("gen centipede -o {f}"), 0),
        step(&format!("validate {f}"), 0),
        step(&format!("enumerate {f} --player Ann"), 0),
        step(
            &format!("check {f} --notion local-weak --at root --pair across,down"),
            1,
        ),
        step("check centipede --notion weak", 1),
        step(
            "check japanese --notion e --at v=3;-;open --pair bid,leave",
            0,
        ),
        step("verify prop4-direct-ttc", 0),
        step("verify theorem1 random --seeds 0..10", 0),
        step("report --seeds 0..5", 0),
        step("report --format json --seeds 0..5", 0),
        step(&format!("validate {}", broken.display()), 2),
        step("check centipede --notion nonsense", 2),
        step("frobnicate", 2),
        step("gen no_such_mechanism", 2),
        step("gen japanese bidders=lots", 2),
        Step {
            env: Some(("LOCALDOM_CAPS", "strategies=2")),
            ..step("check centipede --notion weak", 3)
        },
    ];
    steps.push(Step {
        stdin: Some(grab),
        ..step("check - --notion s --at stage1 --pair G,N", 0)
    });
    let text = serialize_built(&generate("centipede", &[]).map_err(|e| e.to_string())?);
    std::fs::write(&file, &text).map_err(|e| e.to_string())?;
    std::fs::write(&broken, &text[..text.len() / 2]).map_err(|e| e.to_string())?;
    for s in &steps {
        let (code, _) = run_step(s)?;
        check(
            code == s.code,
            format!(
                "`localdom {}` exited {code}, expected {}",
                s.args.join(" "),
                s.code
            ),
        )?;
    }
    // Same input, same bytes.
    let repeat = step("report --seeds 0..5", 0);
    let (_, a) = run_step(&repeat)?;
    let (_, b) = run_step(&repeat)?;
    check(a == b, "report output differs between runs")?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(steps.len())
}

fn interface() -> Outcome {
    let fixtures = round_trips()?;
    let (accepted, rejected) = fuzz(10_000)?;
    let steps = cli_session()?;
    Ok(format!(
        "{fixtures} fixtures round-trip; 10000 mutations without a crash ({accepted} accepted, {rejected} rejected); {steps} CLI steps honor the exit codes"
    ))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 8] = [
        (1, "centipede", Duration::from_secs(1), centipede),
        (2, "grab-or-nab", Duration::from_secs(1), grab_or_nab),
        (3, "japanese auction", Duration::from_secs(30), japanese),
        (4, "dynamic TTC", Duration::from_secs(300), ttc_dynamic),
        (
            5,
            "direct TTC bipartitions",
            Duration::from_secs(1),
            direct_ttc,
        ),
        (6, "ausubel auction", Duration::from_secs(30), ausubel),
        (7, "property suites", Duration::from_secs(600), properties),
        (8, "interface", Duration::from_secs(600), interface),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, limit, run) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = result.and_then(|detail| within(limit, took).map(|_| detail));
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        match (&result, known) {
            (Ok(detail), None) => println!("criterion {id} ({name}): PASS [{took:.2?}] {detail}"),
            (Ok(detail), Some(_)) => {
                println!("criterion {id} ({name}): PASS [{took:.2?}] {detail} (listed as a known failure)");
                unexpected.push(id);
            }
            (Err(detail), Some((_, why))) if detail.contains(why) => {
                println!("criterion {id} ({name}): FAIL [{took:.2?}] known failure: {detail}")
            }
            (Err(detail), _) => {
                println!("criterion {id} ({name}): FAIL [{took:.2?}] {detail}");
                unexpected.push(id);
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
