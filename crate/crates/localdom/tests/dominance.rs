//! Dominance verdicts against exhaustive oracles.

mod common;

use common::{small_corpus, Plays};
use localdom::dominance::{
    find_dominant, locally_dominates, obviously_dominates, weakly_dominates, GlobalKind,
    LocalNotion, Partition, PartitionFamily,
};
use localdom::harness::claims::random_partition;
use localdom::mechanisms::gen_centipede;
use localdom::strategy_space::{find_strategy, PlayerView};
use localdom::Rational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn global_verdicts_match_brute_force() {
    let mut pairs = 0;
    for (name, g) in small_corpus(0..80) {
        for i in 0..g.n_players() {
            let Ok(view) = PlayerView::new(&g, i) else {
                continue;
            };
            let Some(oracle) = Plays::new(&view) else {
                continue;
            };
            let all = &oracle.strategies;
            for sbar in all {
                for s in all {
                    let w = weakly_dominates(&view, sbar, s);
                    assert_eq!(w.holds, oracle.weak(sbar, s), "{name}");
                    if w.holds {
                        let strict =
                            (0..view.external.len()).any(|e| oracle.u(sbar, e) > oracle.u(s, e));
                        assert_eq!(w.strict_somewhere, strict, "{name}");
                    } else {
                        let f = &w.counterexample.as_ref().unwrap().failures[0];
                        assert!(oracle.u(sbar, f.low) < oracle.u(s, f.high));
                    }
                    assert_eq!(
                        obviously_dominates(&view, sbar, s).holds,
                        oracle.obvious(sbar, s),
                        "{name}"
                    );
                    pairs += 1;
                }
            }
            for kind in [GlobalKind::Weak, GlobalKind::Obvious] {
                let dominates = |x, y| match kind {
                    GlobalKind::Weak => oracle.weak(x, y),
                    GlobalKind::Obvious => oracle.obvious(x, y),
                };
                let want = all.iter().find(|&x| all.iter().all(|y| dominates(x, y)));
                let got = find_dominant(&view, kind).unwrap();
                assert_eq!(got.found.as_ref(), want, "{name}: {kind:?}");
            }
        }
    }
    assert!(pairs > 5000, "only {pairs} pairs");
}

#[test]
fn local_verdicts_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for (name, g) in small_corpus(0..80) {
        for i in 0..g.n_players() {
            let Ok(view) = PlayerView::new(&g, i) else {
                continue;
            };
            let Some(oracle) = Plays::new(&view) else {
                continue;
            };
            for h in g.active_info_sets(i) {
                let local = view.local(h);
                let n = local.members.len();
                if n == 0 {
                    continue;
                }
                let acts = local.actions().to_vec();
                for &abar in &acts {
                    for &a in acts.iter().filter(|&&a| a != abar) {
                        let mut parts = vec![
                            Partition::singleton(n),
                            Partition::trivial(n),
                            random_partition(&mut rng, n),
                        ];
                        for fam in [PartitionFamily::Ending, PartitionFamily::NextActive] {
                            if let Ok(p) = fam.partition(&local, abar, a) {
                                parts.push(p);
                            }
                        }
                        for p in parts {
                            let Ok(v) = locally_dominates(&local, abar, a, &p) else {
                                continue;
                            };
                            assert_eq!(
                                v.holds,
                                oracle.local(h, abar, a, &local.members, &p.cells),
                                "{name}: `{}` {abar} vs {a} under {:?}",
                                g.info(i, h).label,
                                p.cells
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} checks");
}

/// Centipede values, each decided by the exhaustive oracle as well.
#[test]
fn centipede_verdicts() {
    let g = gen_centipede();
    let ann = PlayerView::new(&g, 0).unwrap();
    let oracle = Plays::new(&ann).unwrap();
    let s = |l: &str| find_strategy(&g, 0, l).unwrap();
    let v = weakly_dominates(&ann, &s("down"), &s("across.down"));
    assert!(v.holds && v.strict_somewhere);
    assert!(oracle.weak(&s("down"), &s("across.down")));
    assert!(!weakly_dominates(&ann, &s("down"), &s("across.across")).holds);
    assert!(!weakly_dominates(&ann, &s("across.across"), &s("down")).holds);
    for i in 0..2 {
        let view = PlayerView::new(&g, i).unwrap();
        assert!(find_dominant(&view, GlobalKind::Weak)
            .unwrap()
            .found
            .is_none());
        assert!(find_dominant(&view, GlobalKind::Obvious)
            .unwrap()
            .found
            .is_none());
    }
    // Against Bob's across.down, across reaches at most 1 and down gets 2.
    let root = g.find_info(0, "root").unwrap();
    let local = ann.local(root);
    let (across, down) = (0, 1);
    for notion in [
        LocalNotion::Weak,
        LocalNotion::Obvious,
        LocalNotion::Wishful,
        LocalNotion::End,
    ] {
        let fwd = notion.check(&local, across, down).unwrap();
        let back = notion.check(&local, down, across).unwrap();
        assert!(!fwd.holds, "{notion:?}");
        assert!(!back.holds, "{notion:?}");
    }
    let later = g.find_info(0, "across.across").unwrap();
    let local = ann.local(later);
    assert!(!LocalNotion::Weak.check(&local, across, down).unwrap().holds);
    assert!(
        LocalNotion::Weak.check(&local, down, across).unwrap().holds
            == oracle.local(
                later,
                down,
                across,
                &local.members,
                &Partition::singleton(local.members.len()).cells
            )
    );
    let worst = local
        .members
        .iter()
        .map(|&e| oracle.u(&s("across.across"), e))
        .min()
        .unwrap();
    assert_eq!(worst, Rational::from_integer(0));
}
