//! Strategy spaces and local views against exhaustive play.

mod common;

use std::collections::BTreeSet;

use common::{small_corpus, Plays};
use localdom::mechanisms::gen_centipede;
use localdom::strategy_space::{
    enumerate_external, find_strategy, play, reduced_count, reduced_external, strategy_labels,
    PlayerView,
};

#[test]
fn centipede_spaces() {
    let g = gen_centipede();
    for i in 0..2 {
        let view = PlayerView::new(&g, i).unwrap();
        let labels = strategy_labels(&g, i, view.strategies().unwrap());
        assert_eq!(labels, ["across.across", "across.down", "down"]);
        assert_eq!(reduced_count(&g, i), 3);
        assert_eq!(view.external.len(), 3);
    }
}

#[test]
fn labels_find_their_strategies() {
    for (name, g) in small_corpus(0..40) {
        for i in 0..g.n_players() {
            let Ok(view) = PlayerView::new(&g, i) else {
                continue;
            };
            let Ok(all) = view.strategies() else { continue };
            let labels = strategy_labels(&g, i, all);
            assert_eq!(
                labels.iter().collect::<BTreeSet<_>>().len(),
                labels.len(),
                "{name}: labels are unique"
            );
            for (s, l) in all.iter().zip(&labels) {
                assert_eq!(&find_strategy(&g, i, l).unwrap(), s, "{name}: {l}");
            }
        }
    }
}

/// The reduced external space induces exactly the plays of the literal product.
#[test]
fn reduced_external_space_loses_no_play() {
    for (name, g) in small_corpus(0..40) {
        for i in 0..g.n_players() {
            let (Ok(lit), Ok(red)) = (enumerate_external(&g, i), reduced_external(&g, i)) else {
                continue;
            };
            let Ok(view) = PlayerView::new(&g, i) else {
                continue;
            };
            let Ok(all) = view.strategies() else { continue };
            assert!(red.len() <= lit.len());
            for s in all {
                let a: BTreeSet<usize> = lit.iter().map(|e| play(&g, i, s, e)).collect();
                let b: BTreeSet<usize> = red.iter().map(|e| play(&g, i, s, e)).collect();
                assert_eq!(a, b, "{name}: player {i}");
            }
        }
    }
}

#[test]
fn local_views_match_exhaustive_play() {
    let mut checked = 0;
    for (name, g) in small_corpus(0..60) {
        for i in 0..g.n_players() {
            let Ok(view) = PlayerView::new(&g, i) else {
                continue;
            };
            let Some(oracle) = Plays::new(&view) else {
                continue;
            };
            for h in 0..g.info_sets(i).len() {
                let local = view.local(h);
                assert_eq!(
                    local.members,
                    oracle.scenarios(h),
                    "{name}: `{}`",
                    g.info(i, h).label
                );
                for &a in local.actions() {
                    let full = oracle.through(h, a);
                    assert_eq!(local.full_strategies_through(a).unwrap(), full);
                    let Ok(branch) = local.branch(a) else {
                        continue;
                    };
                    for (m, &e) in local.members.iter().enumerate() {
                        let entry = full
                            .iter()
                            .find_map(|s| oracle.passes(s, e, h))
                            .expect("reached");
                        assert_eq!(local.entries[m], entry, "{name}");
                        // Terminals reachable through (h, a) against e.
                        let want: BTreeSet<usize> = full.iter().map(|s| view.play(s, e)).collect();
                        let got: BTreeSet<usize> =
                            branch.outcomes.iter().map(|row| row[m]).collect();
                        assert_eq!(got, want, "{name}: `{}` action {a}", g.info(i, h).label);
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} checks");
}
