//! Game files: golden fixtures, round trips and diagnostics.
//!
//! Golden files live in `tests/fixtures/`. Set `LOCALDOM_BLESS=1` to rewrite
//! them after an intended format change.

use std::path::PathBuf;

use localdom::harness::random::{random_game, RandomGameSpec};
use localdom::interface::document::{GameKind, Source};
use localdom::interface::json::{Severity, Strictness};
use localdom::interface::registry::{default_params, MECHANISMS};
use localdom::interface::{
    generate, isomorphic, parse, serialize, serialize_built, Built, DocErrorKind,
};
use localdom::Caps;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).expect("fixture present")
}

/// Line and column just past the end of `text`.
fn end_position(text: &str) -> (usize, usize) {
    let line = text.matches('\n').count() + 1;
    let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[test]
fn golden_fixtures_match_committed_bytes() {
    let bless = std::env::var("LOCALDOM_BLESS").is_ok_and(|v| v == "1");
    let mut missing = Vec::new();
    for (name, _, _) in MECHANISMS {
        let built = generate(name, &default_params(name)).expect("defaults generate");
        let text = serialize_built(&built);
        let path = fixtures().join(format!("{name}.json"));
        if bless {
            std::fs::write(&path, &text).expect("write fixture");
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(golden) => assert!(
                golden == text,
                "{name}: serialization differs from {}",
                path.display()
            ),
            Err(_) => missing.push(name),
        }
    }
    assert!(
        missing.is_empty(),
        "missing golden files for {missing:?}; rerun with LOCALDOM_BLESS=1"
    );
}

#[test]
fn golden_fixtures_round_trip() {
    for (name, _, _) in MECHANISMS {
        let text = read(&format!("{name}.json"));
        let (doc, warnings) =
            parse(&text, Strictness::Strict).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(warnings.is_empty(), "{name}: {warnings:?}");
        let built = doc
            .build(Caps::default())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let fresh = generate(name, &[]).expect("generates");
        isomorphic(&built, &fresh).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(serialize_built(&built), text, "{name}: not a fixed point");
    }
}

#[test]
fn serialization_is_stable_across_calls() {
    let a = serialize_built(&generate("centipede", &[]).unwrap());
    let b = serialize_built(&generate("centipede", &[]).unwrap());
    assert_eq!(a, b);
}

#[test]
fn random_games_round_trip() {
    let mut done = 0;
    for seed in 0..100 {
        let spec = RandomGameSpec::from_seed(seed);
        let game = random_game(&spec).expect("random games build");
        let built = Built::Base(game);
        let text = serialize_built(&built);
        let (doc, _) =
            parse(&text, Strictness::Strict).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let again = doc
            .build(Caps::default())
            .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        isomorphic(&built, &again).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert_eq!(serialize_built(&again), text, "seed {seed}");
        done += 1;
    }
    assert_eq!(done, 100);
}

#[test]
fn generator_references_round_trip() {
    let text = "{\"format\": \"localdom\", \"version\": 1, \"kind\": \"base\", \"generator\": {\"mechanism\": \"japanese\", \"params\": {\"reentry\": \"true\"}}}";
    let (doc, _) = parse(text, Strictness::Strict).expect("parses");
    match &doc.source {
        Source::Generator { mechanism, params } => {
            assert_eq!(mechanism, "japanese");
            assert_eq!(params, &vec![("reentry".to_string(), "true".to_string())]);
        }
        other => panic!("expected a generator reference, got {other:?}"),
    }
    let (again, _) = parse(&serialize(&doc), Strictness::Strict).expect("reparses");
    assert_eq!(again, doc);
    let built = doc.build(Caps::default()).expect("builds");
    let direct = generate("japanese", &[("reentry".into(), "true".into())]).unwrap();
    isomorphic(&built, &direct).unwrap();
}

#[test]
fn unavailable_action_is_a_reference_error_naming_the_info_set() {
    let err = parse(&read("invalid/unavailable_action.json"), Strictness::Strict).unwrap_err();
    assert_eq!(err.kind, DocErrorKind::Reference);
    let d = &err.diagnostics[0];
    assert_eq!(d.code, "E0409");
    assert!(d.message.contains("`h`"), "{}", d.message);
    assert!(!d.hint.is_empty());
    assert_eq!(d.pos.line, 13, "{d}");
}

#[test]
fn truncated_file_is_a_syntax_error_at_the_cut() {
    let full = read("centipede.json");
    for cut in [1, 57, full.len() / 3, full.len() / 2, full.len() - 2] {
        let cut = (0..=cut).rev().find(|&k| full.is_char_boundary(k)).unwrap();
        let text = &full[..cut];
        let err = parse(text, Strictness::Strict).unwrap_err();
        assert_eq!(err.kind, DocErrorKind::Syntax, "cut at {cut}");
        let d = &err.diagnostics[0];
        assert_eq!(d.code, "E0101", "cut at {cut}: {d}");
        assert_eq!(
            (d.pos.line, d.pos.column),
            end_position(text),
            "cut at {cut}: {d}"
        );
    }
}

#[test]
fn duplicate_keys_are_errors_or_warnings() {
    let text = read("invalid/duplicate_key.json");
    let err = parse(&text, Strictness::Strict).unwrap_err();
    assert_eq!(err.kind, DocErrorKind::Syntax);
    assert_eq!(err.diagnostics[0].code, "E0109");
    assert_eq!(err.diagnostics[0].pos.line, 6);
    let (doc, warnings) = parse(&text, Strictness::Lenient).expect("lenient accepts");
    assert_eq!(doc.kind, GameKind::Base);
    assert!(warnings
        .iter()
        .any(|w| w.code == "W0109" && w.severity == Severity::Warning));
}

#[test]
fn every_diagnostic_has_a_position() {
    let bad = [
        "",
        "{",
        "{\"format\": \"localdom\"}",
        "{\"format\": \"localdom\", \"version\": 2, \"kind\": \"base\"}",
        "[1, 2,]",
        "{\"a\": tru}",
        "{\"format\": \"localdom\", \"version\": 1, \"kind\": \"base\", \"generator\": {\"mechanism\": \"nope\", \"params\": {}}}",
    ];
    for text in bad {
        let err = parse(text, Strictness::Strict).unwrap_err();
        assert!(!err.diagnostics.is_empty(), "{text:?}");
        for d in &err.diagnostics {
            assert!(d.pos.line >= 1 && d.pos.column >= 1, "{text:?}: {d}");
        }
    }
}

#[test]
fn version_mismatch_has_its_own_kind() {
    let text = read("centipede.json").replacen("\"version\": 1", "\"version\": 7", 1);
    let err = parse(&text, Strictness::Strict).unwrap_err();
    assert_eq!(err.kind, DocErrorKind::VersionMismatch);
    assert_eq!(err.diagnostics[0].code, "E0301");
}
