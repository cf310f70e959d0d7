//! Game description documents: schema decoding, canonical serialization and
//! structural comparison.
//!
//! A document is a JSON object whose first members are `format`, `version`
//! and `kind`. The body is either explicit (players, nature, horizon,
//! actions, info sets, histories, terminals and, for flow games, the slot
//! declaration) or a `generator` reference with parameters. All cross
//! references are by label. See `docs/format.md` for the grammar.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::flow_games::{AusubelUtility, Decomposition, FlowError, FlowGame, Utility};
use crate::game_core::{
    build_game_with_caps, format_rational, format_slot, parse_rational, ActionId, Caps, Game,
    GameDef, GameError, HistoryDef, InfoSetDef, Rational, Slot, TerminalDef,
};
use crate::interface::json::{self, Diagnostic, Kind, Pos, Strictness, Value};
use crate::interface::registry::{self, Built, RegistryError};

pub const FORMAT: &str = "localdom";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameKind {
    Base,
    Flow,
}

impl GameKind {
    pub fn name(self) -> &'static str {
        match self {
            GameKind::Base => "base",
            GameKind::Flow => "flow",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSpec {
    pub slots: Vec<usize>,
    /// `[player][t - 1][r]`.
    pub spaces: Vec<Vec<Vec<Vec<Slot>>>>,
    pub utility: Utility,
}

// One per document, so the size gap does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Explicit {
        def: GameDef,
        flow: Option<FlowSpec>,
    },
    Generator {
        mechanism: String,
        params: Vec<(String, String)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameDocument {
    pub version: u32,
    pub kind: GameKind,
    pub source: Source,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocErrorKind {
    /// Not well-formed JSON.
    Syntax,
    /// Well-formed, but the wrong shape.
    Schema,
    /// A label that does not resolve, or an action outside its info set.
    Reference,
    VersionMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocError {
    pub kind: DocErrorKind,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            DocErrorKind::Syntax => "syntax error",
            DocErrorKind::Schema => "schema error",
            DocErrorKind::Reference => "reference error",
            DocErrorKind::VersionMismatch => "version mismatch",
        };
        write!(f, "{name}")?;
        for d in &self.diagnostics {
            write!(f, "\n{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for DocError {}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("document declares kind `{declared}` but the generator produces a `{actual}` game")]
    KindMismatch {
        declared: &'static str,
        actual: &'static str,
    },
}

impl BuildError {
    pub fn is_space_cap(&self) -> bool {
        matches!(
            self,
            BuildError::Game(GameError::SpaceCap { .. })
                | BuildError::Flow(FlowError::Game(GameError::SpaceCap { .. }))
                | BuildError::Registry(RegistryError::Mechanism(
                    crate::mechanisms::MechanismError::Game(GameError::SpaceCap { .. })
                ))
                | BuildError::Registry(RegistryError::Mechanism(
                    crate::mechanisms::MechanismError::Flow(FlowError::Game(
                        GameError::SpaceCap { .. }
                    ))
                ))
        )
    }
}

impl GameDocument {
    pub fn from_built(built: &Built) -> GameDocument {
        match built {
            Built::Base(g) => GameDocument {
                version: VERSION,
                kind: GameKind::Base,
                source: Source::Explicit {
                    def: g.to_def(),
                    flow: None,
                },
            },
            Built::Flow(f) => GameDocument {
                version: VERSION,
                kind: GameKind::Flow,
                source: Source::Explicit {
                    def: f.game.to_def(),
                    flow: Some(FlowSpec {
                        slots: f.slots.clone(),
                        spaces: f.spaces.clone(),
                        utility: f.utility.clone(),
                    }),
                },
            },
        }
    }

    pub fn build(&self, caps: Caps) -> Result<Built, BuildError> {
        let built = match &self.source {
            Source::Explicit { def, flow: None } => Built::Base(build_game_with_caps(def, caps)?),
            Source::Explicit {
                def,
                flow: Some(spec),
            } => Built::Flow(FlowGame::build(
                def.clone(),
                spec.slots.clone(),
                spec.spaces.clone(),
                spec.utility.clone(),
                caps,
            )?),
            Source::Generator { mechanism, params } => registry::generate(mechanism, params)?,
        };
        if built.kind() != self.kind.name() {
            return Err(BuildError::KindMismatch {
                declared: self.kind.name(),
                actual: built.kind(),
            });
        }
        Ok(built)
    }
}

// ---------------------------------------------------------------- serialization

fn strings<'a>(xs: impl IntoIterator<Item = &'a String>) -> Value {
    Value::array(xs.into_iter().map(|s| Value::string(s.as_str())))
}

fn slot_row(ys: &[Slot]) -> Value {
    Value::array(ys.iter().map(|y| Value::string(format_slot(y))))
}

fn path_value(def: &GameDef, path: &[Vec<ActionId>]) -> Value {
    Value::array(path.iter().map(|p| {
        Value::array(
            p.iter()
                .enumerate()
                .map(|(j, &a)| Value::string(def.actions[j][a].as_str())),
        )
    }))
}

fn rationals_value(xs: &[Rational]) -> Value {
    Value::array(xs.iter().map(|r| Value::string(format_rational(r))))
}

fn utility_value(u: &Utility) -> Value {
    match u {
        Utility::Additive => Value::object([("kind", Value::string("additive"))]),
        Utility::Ausubel(a) => Value::object([
            ("kind", Value::string("ausubel")),
            ("supply", Value::number(a.supply)),
            ("prices", rationals_value(&a.prices)),
            (
                "values",
                Value::array(
                    a.values
                        .iter()
                        .map(|t| Value::array(t.iter().map(|v| rationals_value(v)))),
                ),
            ),
            (
                "decomposition",
                Value::string(match a.decomposition {
                    Decomposition::ExcessWithBounds => "excessWithBounds",
                    Decomposition::FinalOnly => "finalOnly",
                }),
            ),
        ]),
    }
}

fn explicit_members(def: &GameDef, flow: Option<&FlowSpec>) -> Vec<(&'static str, Value)> {
    let n = def.players.len();
    let info_label = |j: usize, k: usize| Value::string(def.info_sets[j][k].label.as_str());
    let mut members = vec![
        ("players", strings(&def.players)),
        ("nature", strings(&def.nature)),
        ("horizon", Value::number(def.horizon)),
        ("actions", Value::array(def.actions.iter().map(strings))),
        (
            "infoSets",
            Value::array(def.info_sets.iter().enumerate().map(|(j, sets)| {
                Value::array(sets.iter().map(|s| {
                    Value::object([
                        ("label", Value::string(s.label.as_str())),
                        ("stage", Value::number(s.stage)),
                        (
                            "actions",
                            Value::array(
                                s.actions
                                    .iter()
                                    .map(|&a| Value::string(def.actions[j][a].as_str())),
                            ),
                        ),
                    ])
                }))
            })),
        ),
        (
            "histories",
            Value::array(def.histories.iter().map(|h| {
                let mut m = vec![
                    ("theta", Value::string(def.nature[h.theta].as_str())),
                    ("path", path_value(def, &h.path)),
                    (
                        "info",
                        Value::array((0..n).map(|j| info_label(j, h.info[j]))),
                    ),
                ];
                if flow.is_some() && !h.path.is_empty() {
                    m.push(("stage", Value::array(h.stage.iter().map(|ys| slot_row(ys)))));
                }
                Value::object(m)
            })),
        ),
        (
            "terminals",
            Value::array(def.terminals.iter().map(|z| {
                let mut m = vec![
                    ("theta", Value::string(def.nature[z.theta].as_str())),
                    ("path", path_value(def, &z.path)),
                ];
                if flow.is_some() {
                    m.push(("stage", Value::array(z.stage.iter().map(|ys| slot_row(ys)))));
                } else {
                    m.push(("outcomes", strings(&z.outcomes)));
                    m.push(("payoffs", rationals_value(&z.payoffs)));
                }
                Value::object(m)
            })),
        ),
    ];
    if let Some(spec) = flow {
        members.push((
            "flow",
            Value::object([
                (
                    "slots",
                    Value::array(spec.slots.iter().map(|&k| Value::number(k))),
                ),
                (
                    "spaces",
                    Value::array(spec.spaces.iter().map(|p| {
                        Value::array(
                            p.iter()
                                .map(|t| Value::array(t.iter().map(|r| slot_row(r)))),
                        )
                    })),
                ),
                ("utility", utility_value(&spec.utility)),
            ]),
        ));
    }
    members
}

pub fn to_value(doc: &GameDocument) -> Value {
    let mut members = vec![
        ("format", Value::string(FORMAT)),
        ("version", Value::number(doc.version)),
        ("kind", Value::string(doc.kind.name())),
    ];
    match &doc.source {
        Source::Explicit { def, flow } => members.extend(explicit_members(def, flow.as_ref())),
        Source::Generator { mechanism, params } => members.push((
            "generator",
            Value::object([
                ("mechanism", Value::string(mechanism.as_str())),
                (
                    "params",
                    Value::object(
                        registry::canonical_params(mechanism, params)
                            .into_iter()
                            .map(|(k, v)| (k, Value::string(v))),
                    ),
                ),
            ]),
        )),
    }
    Value::object(members)
}

/// Canonical text: fixed key order, rationals as `p/q` in lowest terms.
pub fn serialize(doc: &GameDocument) -> String {
    json::pretty(&to_value(doc))
}

pub fn serialize_game(game: &Game) -> String {
    serialize(&GameDocument {
        version: VERSION,
        kind: GameKind::Base,
        source: Source::Explicit {
            def: game.to_def(),
            flow: None,
        },
    })
}

pub fn serialize_built(built: &Built) -> String {
    serialize(&GameDocument::from_built(built))
}

// ---------------------------------------------------------------- decoding

struct Decoder {
    strictness: Strictness,
    errors: Vec<(DocErrorKind, Diagnostic)>,
    warnings: Vec<Diagnostic>,
}

impl Decoder {
    fn schema(&mut self, pos: Pos, message: impl Into<String>, hint: impl Into<String>) {
        self.errors.push((
            DocErrorKind::Schema,
            Diagnostic::error("E0201", pos, message, hint),
        ));
    }

    fn reference(
        &mut self,
        code: &'static str,
        pos: Pos,
        message: impl Into<String>,
        hint: impl Into<String>,
    ) {
        self.errors.push((
            DocErrorKind::Reference,
            Diagnostic::error(code, pos, message, hint),
        ));
    }

    fn keys(&mut self, obj: &Value, allowed: &[&str], context: &str) {
        for m in obj.as_object().unwrap_or(&[]) {
            if !allowed.contains(&m.key.as_str()) {
                let msg = format!("unknown field `{}` in {context}", m.key);
                let hint = format!("allowed fields: {}", allowed.join(", "));
                match self.strictness {
                    Strictness::Strict => self.errors.push((
                        DocErrorKind::Schema,
                        Diagnostic::error("E0202", m.key_pos, msg, hint),
                    )),
                    Strictness::Lenient => self.warnings.push(Diagnostic::warning(
                        "W0202",
                        m.key_pos,
                        msg + " (ignored)",
                        hint,
                    )),
                }
            }
        }
    }

    fn field<'v>(&mut self, obj: &'v Value, key: &str, context: &str) -> Option<&'v Value> {
        let v = obj.get(key);
        if v.is_none() {
            self.schema(
                obj.pos,
                format!("{context} is missing `{key}`"),
                format!("add a `{key}` member"),
            );
        }
        v
    }

    fn object<'v>(&mut self, v: &'v Value, what: &str) -> Option<&'v Value> {
        if v.as_object().is_some() {
            Some(v)
        } else {
            self.schema(
                v.pos,
                format!("{what} must be an object, found {}", v.type_name()),
                "wrap the members in { }",
            );
            None
        }
    }

    fn array<'v>(&mut self, v: &'v Value, what: &str) -> Option<&'v [Value]> {
        let out = v.as_array();
        if out.is_none() {
            self.schema(
                v.pos,
                format!("{what} must be an array, found {}", v.type_name()),
                "use [ ... ]",
            );
        }
        out
    }

    fn string<'v>(&mut self, v: &'v Value, what: &str) -> Option<&'v str> {
        let out = v.as_str();
        if out.is_none() {
            self.schema(
                v.pos,
                format!("{what} must be a string, found {}", v.type_name()),
                "quote the value",
            );
        }
        out
    }

    fn strings(&mut self, v: &Value, what: &str) -> Option<Vec<String>> {
        let items = self.array(v, what)?;
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            out.push(
                self.string(item, &format!("each entry of {what}"))?
                    .to_string(),
            );
        }
        Some(out)
    }

    fn count(&mut self, v: &Value, what: &str, max: usize) -> Option<usize> {
        let parsed = match &v.kind {
            Kind::Number(n) => n.parse::<usize>().ok(),
            _ => None,
        };
        match parsed {
            Some(k) if k <= max => Some(k),
            _ => {
                self.schema(
                    v.pos,
                    format!("{what} must be an integer in 0..={max}"),
                    "write a plain non-negative integer",
                );
                None
            }
        }
    }

    fn rational(&mut self, v: &Value, what: &str) -> Option<Rational> {
        let text = match &v.kind {
            Kind::String(s) => s.as_str(),
            Kind::Number(n) => n.as_str(),
            _ => "",
        };
        let digits = text.chars().filter(char::is_ascii_digit).count();
        let parsed = if digits > 15 || text.contains(['e', 'E']) {
            None
        } else {
            parse_rational(text)
        };
        if parsed.is_none() {
            self.schema(
                v.pos,
                format!("{what} must be a rational such as \"3\" or \"5/2\" (at most 15 digits)"),
                "write p or p/q with q ≠ 0",
            );
        }
        parsed
    }

    fn slot(&mut self, v: &Value, what: &str) -> Option<Slot> {
        if v.as_str() == Some("d") {
            return Some(None);
        }
        self.rational(v, what).map(Some)
    }

    fn slot_rows(&mut self, v: &Value, n: usize, what: &str) -> Option<Vec<Vec<Slot>>> {
        let rows = self.array(v, what)?;
        if rows.len() != n {
            self.schema(
                v.pos,
                format!(
                    "{what} needs one row per player ({n}), found {}",
                    rows.len()
                ),
                "list the slots of every player",
            );
            return None;
        }
        let mut out = Vec::with_capacity(n);
        for row in rows {
            let items = self.array(row, what)?;
            let mut ys = Vec::with_capacity(items.len());
            for y in items {
                ys.push(self.slot(y, "a slot")?);
            }
            out.push(ys);
        }
        Some(out)
    }
}

/// Resolution tables built from the header part of an explicit document.
struct Labels {
    players: Vec<String>,
    nature: HashMap<String, usize>,
    actions: Vec<HashMap<String, ActionId>>,
    info: Vec<HashMap<String, usize>>,
}

/// Parses a document. Warnings (lenient mode) are returned alongside it.
pub fn parse(
    text: &str,
    strictness: Strictness,
) -> Result<(GameDocument, Vec<Diagnostic>), DocError> {
    let mut notes = Vec::new();
    let root = json::parse(text, strictness, &mut notes).map_err(|d| DocError {
        kind: DocErrorKind::Syntax,
        diagnostics: vec![d],
    })?;
    let mut dec = Decoder {
        strictness,
        errors: Vec::new(),
        warnings: notes,
    };
    let doc = decode(&mut dec, &root);
    match (doc, dec.errors.is_empty()) {
        (Some(doc), true) => Ok((doc, dec.warnings)),
        _ => {
            let kind = [
                DocErrorKind::VersionMismatch,
                DocErrorKind::Schema,
                DocErrorKind::Reference,
            ]
            .into_iter()
            .find(|k| dec.errors.iter().any(|(e, _)| e == k))
            .unwrap_or(DocErrorKind::Schema);
            let mut diagnostics: Vec<Diagnostic> = dec.errors.into_iter().map(|(_, d)| d).collect();
            if diagnostics.is_empty() {
                diagnostics.push(Diagnostic::error(
                    "E0201",
                    root.pos,
                    "document could not be decoded",
                    "compare against a generated document",
                ));
            }
            Err(DocError { kind, diagnostics })
        }
    }
}

fn decode(dec: &mut Decoder, root: &Value) -> Option<GameDocument> {
    dec.object(root, "the document")?;
    let format = dec.field(root, "format", "the document")?;
    if dec.string(format, "`format`")? != FORMAT {
        dec.schema(
            format.pos,
            format!("`format` must be \"{FORMAT}\""),
            "this file is not a game document",
        );
        return None;
    }
    let version = dec.field(root, "version", "the document")?;
    let v = dec.count(version, "`version`", u32::MAX as usize)? as u32;
    if v != VERSION {
        dec.errors.push((
            DocErrorKind::VersionMismatch,
            Diagnostic::error(
                "E0301",
                version.pos,
                format!(
                    "document version {v} is not supported (this build reads version {VERSION})"
                ),
                "regenerate the file with this build",
            ),
        ));
        return None;
    }
    let kind_v = dec.field(root, "kind", "the document")?;
    let kind = match dec.string(kind_v, "`kind`")? {
        "base" => GameKind::Base,
        "flow" => GameKind::Flow,
        other => {
            dec.schema(
                kind_v.pos,
                format!("unknown kind `{other}`"),
                "use \"base\" or \"flow\"",
            );
            return None;
        }
    };
    if let Some(generator) = root.get("generator") {
        dec.keys(
            root,
            &["format", "version", "kind", "generator"],
            "a generator document",
        );
        dec.object(generator, "`generator`")?;
        dec.keys(generator, &["mechanism", "params"], "`generator`");
        let mechanism = dec.field(generator, "mechanism", "`generator`")?;
        let name = dec.string(mechanism, "`mechanism`")?.to_string();
        if !registry::MECHANISMS.iter().any(|m| m.0 == name) {
            dec.reference(
                "E0406",
                mechanism.pos,
                format!("unknown mechanism `{name}`"),
                format!(
                    "known: {}",
                    registry::MECHANISMS
                        .iter()
                        .map(|m| m.0)
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            );
            return None;
        }
        let mut params = Vec::new();
        if let Some(p) = generator.get("params") {
            dec.object(p, "`params`")?;
            for m in p.as_object().unwrap_or(&[]) {
                let text = match &m.value.kind {
                    Kind::String(s) => s.clone(),
                    Kind::Number(n) => n.clone(),
                    Kind::Bool(b) => b.to_string(),
                    _ => {
                        dec.schema(
                            m.value.pos,
                            format!("parameter `{}` must be a string, number or boolean", m.key),
                            "write parameters as in `gen`, e.g. \"1,2,3\"",
                        );
                        return None;
                    }
                };
                params.push((m.key.clone(), text));
            }
        }
        return Some(GameDocument {
            version: v,
            kind,
            source: Source::Generator {
                mechanism: name,
                params,
            },
        });
    }
    let allowed: &[&str] = match kind {
        GameKind::Base => &[
            "format",
            "version",
            "kind",
            "players",
            "nature",
            "horizon",
            "actions",
            "infoSets",
            "histories",
            "terminals",
        ],
        GameKind::Flow => &[
            "format",
            "version",
            "kind",
            "players",
            "nature",
            "horizon",
            "actions",
            "infoSets",
            "histories",
            "terminals",
            "flow",
        ],
    };
    dec.keys(root, allowed, "the document");
    let (def, labels) = decode_header(dec, root)?;
    decode_body(dec, root, kind, def, labels)
}

fn distinct(dec: &mut Decoder, v: &Value, xs: &[String], what: &str) -> bool {
    let mut seen = HashMap::new();
    for (k, x) in xs.iter().enumerate() {
        if let Some(first) = seen.insert(x.as_str(), k) {
            let pos = v.as_array().and_then(|a| a.get(k)).map_or(v.pos, |e| e.pos);
            dec.reference(
                "E0401",
                pos,
                format!("duplicate {what} `{x}` (also entry {first})"),
                format!("{what} labels must be unique"),
            );
            return false;
        }
    }
    true
}

type Header = (GameDef, Labels);

fn decode_header(dec: &mut Decoder, root: &Value) -> Option<Header> {
    let players_v = dec.field(root, "players", "the document")?;
    let players = dec.strings(players_v, "`players`")?;
    let nature_v = dec.field(root, "nature", "the document")?;
    let nature = dec.strings(nature_v, "`nature`")?;
    let horizon_v = dec.field(root, "horizon", "the document")?;
    let horizon = dec.count(horizon_v, "`horizon`", 64)?;
    if !distinct(dec, players_v, &players, "player")
        || !distinct(dec, nature_v, &nature, "nature state")
    {
        return None;
    }
    let n = players.len();
    let actions_v = dec.field(root, "actions", "the document")?;
    let action_rows = dec.array(actions_v, "`actions`")?;
    if action_rows.len() != n {
        dec.schema(
            actions_v.pos,
            format!(
                "`actions` needs one list per player ({n}), found {}",
                action_rows.len()
            ),
            "list every player's actions in player order",
        );
        return None;
    }
    let mut actions = Vec::with_capacity(n);
    for row in action_rows {
        let list = dec.strings(row, "an action list")?;
        if !distinct(dec, row, &list, "action") {
            return None;
        }
        actions.push(list);
    }
    let action_ids: Vec<HashMap<String, ActionId>> = actions
        .iter()
        .map(|l| l.iter().enumerate().map(|(k, a)| (a.clone(), k)).collect())
        .collect();

    let infos_v = dec.field(root, "infoSets", "the document")?;
    let info_rows = dec.array(infos_v, "`infoSets`")?;
    if info_rows.len() != n {
        dec.schema(
            infos_v.pos,
            format!(
                "`infoSets` needs one list per player ({n}), found {}",
                info_rows.len()
            ),
            "list every player's info sets in player order",
        );
        return None;
    }
    let mut info_sets = Vec::with_capacity(n);
    let mut info_ids = Vec::with_capacity(n);
    for (j, row) in info_rows.iter().enumerate() {
        let mut sets = Vec::new();
        let mut ids = HashMap::new();
        for entry in dec.array(row, "an info set list")? {
            dec.object(entry, "an info set")?;
            dec.keys(entry, &["label", "stage", "actions"], "an info set");
            let label_v = dec.field(entry, "label", "an info set")?;
            let label = dec.string(label_v, "`label`")?.to_string();
            let stage_v = dec.field(entry, "stage", "an info set")?;
            let stage = dec.count(stage_v, "`stage`", 64)?;
            let acts_v = dec.field(entry, "actions", "an info set")?;
            let mut acts = Vec::new();
            for a in dec.array(acts_v, "`actions`")? {
                let name = dec.string(a, "an action")?;
                match action_ids[j].get(name) {
                    Some(&id) => acts.push(id),
                    None => {
                        dec.reference(
                            "E0402",
                            a.pos,
                            format!("info set `{label}` of {} offers `{name}`, which is not one of the player's actions", players[j]),
                            format!("declare `{name}` in the player's action list or remove it"),
                        );
                        return None;
                    }
                }
            }
            if ids.insert(label.clone(), sets.len()).is_some() {
                dec.reference(
                    "E0401",
                    label_v.pos,
                    format!("{} has two info sets labelled `{label}`", players[j]),
                    "info set labels are unique per player",
                );
                return None;
            }
            sets.push(InfoSetDef {
                label,
                stage,
                actions: acts,
            });
        }
        info_sets.push(sets);
        info_ids.push(ids);
    }
    let labels = Labels {
        players: players.clone(),
        nature: nature
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect(),
        actions: action_ids,
        info: info_ids,
    };
    Some((
        GameDef {
            players,
            nature,
            horizon,
            actions,
            info_sets,
            histories: Vec::new(),
            terminals: Vec::new(),
        },
        labels,
    ))
}

fn decode_path(
    dec: &mut Decoder,
    v: &Value,
    labels: &Labels,
) -> Option<(Vec<Vec<ActionId>>, Vec<Pos>)> {
    let n = labels.players.len();
    let mut path = Vec::new();
    let mut positions = Vec::new();
    for profile in dec.array(v, "`path`")? {
        let items = dec.array(profile, "a path profile")?;
        if items.len() != n {
            dec.schema(
                profile.pos,
                format!(
                    "a path profile needs one action per player ({n}), found {}",
                    items.len()
                ),
                "list the action of every player, forced ones included",
            );
            return None;
        }
        let mut p = Vec::with_capacity(n);
        for (j, a) in items.iter().enumerate() {
            let name = dec.string(a, "an action")?;
            match labels.actions[j].get(name) {
                Some(&id) => p.push(id),
                None => {
                    dec.reference(
                        "E0403",
                        a.pos,
                        format!("`{name}` is not an action of {}", labels.players[j]),
                        "use a label from the player's action list",
                    );
                    return None;
                }
            }
            positions.push(a.pos);
        }
        path.push(p);
    }
    Some((path, positions))
}

fn decode_theta(dec: &mut Decoder, entry: &Value, labels: &Labels, what: &str) -> Option<usize> {
    let v = dec.field(entry, "theta", what)?;
    let name = dec.string(v, "`theta`")?;
    match labels.nature.get(name) {
        Some(&t) => Some(t),
        None => {
            dec.reference(
                "E0404",
                v.pos,
                format!("`{name}` is not a nature state"),
                "use a label from `nature`",
            );
            None
        }
    }
}

fn decode_body(
    dec: &mut Decoder,
    root: &Value,
    kind: GameKind,
    mut def: GameDef,
    labels: Labels,
) -> Option<GameDocument> {
    let n = def.players.len();
    let flow = kind == GameKind::Flow;
    let histories_v = dec.field(root, "histories", "the document")?;
    // (θ, path) → info set per player
    let mut declared: HashMap<(usize, Vec<Vec<ActionId>>), Vec<usize>> = HashMap::new();
    let mut pending: Vec<(usize, Vec<Vec<ActionId>>, Vec<Pos>)> = Vec::new();
    for entry in dec.array(histories_v, "`histories`")? {
        dec.object(entry, "a history")?;
        dec.keys(
            entry,
            if flow {
                &["theta", "path", "info", "stage"]
            } else {
                &["theta", "path", "info"]
            },
            "a history",
        );
        let theta = decode_theta(dec, entry, &labels, "a history")?;
        let path_v = dec.field(entry, "path", "a history")?;
        let (path, positions) = decode_path(dec, path_v, &labels)?;
        let info_v = dec.field(entry, "info", "a history")?;
        let names = dec.strings(info_v, "`info`")?;
        if names.len() != n {
            dec.schema(
                info_v.pos,
                format!(
                    "`info` needs one info set per player ({n}), found {}",
                    names.len()
                ),
                "name the info set of every player",
            );
            return None;
        }
        let mut info = Vec::with_capacity(n);
        for (j, name) in names.iter().enumerate() {
            match labels.info[j].get(name) {
                Some(&k) => info.push(k),
                None => {
                    let pos = info_v.as_array().map_or(info_v.pos, |a| a[j].pos);
                    dec.reference(
                        "E0405",
                        pos,
                        format!("`{name}` is not an info set of {}", labels.players[j]),
                        "declare it under `infoSets`",
                    );
                    return None;
                }
            }
        }
        let stage = match (flow, path.is_empty(), entry.get("stage")) {
            (true, false, Some(s)) => dec.slot_rows(s, n, "`stage`")?,
            (true, false, None) => {
                dec.schema(
                    entry.pos,
                    "a non-root history of a flow game is missing `stage`",
                    "add the stage slots of every player",
                );
                return None;
            }
            _ => Vec::new(),
        };
        if declared
            .insert((theta, path.clone()), info.clone())
            .is_some()
        {
            dec.reference(
                "E0407",
                entry.pos,
                "history declared twice",
                "remove the duplicate",
            );
            return None;
        }
        pending.push((theta, path.clone(), positions));
        def.histories.push(HistoryDef {
            theta,
            path,
            info,
            stage,
        });
    }

    let terminals_v = dec.field(root, "terminals", "the document")?;
    for entry in dec.array(terminals_v, "`terminals`")? {
        dec.object(entry, "a terminal")?;
        dec.keys(
            entry,
            if flow {
                &["theta", "path", "stage"]
            } else {
                &["theta", "path", "outcomes", "payoffs"]
            },
            "a terminal",
        );
        let theta = decode_theta(dec, entry, &labels, "a terminal")?;
        let path_v = dec.field(entry, "path", "a terminal")?;
        let (path, positions) = decode_path(dec, path_v, &labels)?;
        let (outcomes, payoffs, stage) = if flow {
            let s = dec.field(entry, "stage", "a terminal")?;
            (Vec::new(), Vec::new(), dec.slot_rows(s, n, "`stage`")?)
        } else {
            let o = dec.field(entry, "outcomes", "a terminal")?;
            let outcomes = dec.strings(o, "`outcomes`")?;
            let p = dec.field(entry, "payoffs", "a terminal")?;
            let mut payoffs = Vec::new();
            for x in dec.array(p, "`payoffs`")? {
                payoffs.push(dec.rational(x, "a payoff")?);
            }
            if outcomes.len() != n || payoffs.len() != n {
                dec.schema(
                    entry.pos,
                    format!("a terminal needs one outcome and one payoff per player ({n})"),
                    "list every player's outcome and payoff",
                );
                return None;
            }
            (outcomes, payoffs, Vec::new())
        };
        pending.push((theta, path.clone(), positions));
        def.terminals.push(TerminalDef {
            theta,
            path,
            outcomes,
            payoffs,
            stage,
        });
    }

    // Every move must be available at the mover's info set one step earlier.
    for (theta, path, positions) in &pending {
        for t in 0..path.len() {
            let Some(info) = declared.get(&(*theta, path[..t].to_vec())) else {
                dec.reference(
                    "E0408",
                    positions[t * n],
                    format!("the prefix of length {t} of this path is not a declared history"),
                    "declare every prefix under `histories`",
                );
                return None;
            };
            for j in 0..n {
                let set = &def.info_sets[j][info[j]];
                let a = path[t][j];
                if !set.actions.contains(&a) {
                    dec.reference(
                        "E0409",
                        positions[t * n + j],
                        format!(
                            "{} plays `{}` at info set `{}`, where it is not available",
                            labels.players[j], def.actions[j][a], set.label
                        ),
                        format!(
                            "choose one of: {}",
                            set.actions
                                .iter()
                                .map(|&b| def.actions[j][b].as_str())
                                .collect::<Vec<_>>()
                                .join(", ")
                        ),
                    );
                    return None;
                }
            }
        }
    }

    let spec = if flow {
        let f = dec.field(root, "flow", "a flow document")?;
        Some(decode_flow(dec, f, &def)?)
    } else {
        None
    };
    Some(GameDocument {
        version: VERSION,
        kind,
        source: Source::Explicit { def, flow: spec },
    })
}

fn decode_flow(dec: &mut Decoder, f: &Value, def: &GameDef) -> Option<FlowSpec> {
    let n = def.players.len();
    let horizon = def.horizon;
    dec.object(f, "`flow`")?;
    dec.keys(f, &["slots", "spaces", "utility"], "`flow`");
    let slots_v = dec.field(f, "slots", "`flow`")?;
    let mut slots = Vec::new();
    for k in dec.array(slots_v, "`slots`")? {
        slots.push(dec.count(k, "a slot count", 64)?);
    }
    if slots.len() != horizon {
        dec.schema(
            slots_v.pos,
            format!(
                "`slots` needs one count per stage ({horizon}), found {}",
                slots.len()
            ),
            "give k(t) for every stage",
        );
        return None;
    }
    let spaces_v = dec.field(f, "spaces", "`flow`")?;
    let players = dec.array(spaces_v, "`spaces`")?;
    if players.len() != n {
        dec.schema(
            spaces_v.pos,
            format!("`spaces` needs one entry per player ({n})"),
            "declare slot spaces for every player",
        );
        return None;
    }
    let mut spaces = Vec::with_capacity(n);
    for p in players {
        let stages = dec.array(p, "a player's spaces")?;
        if stages.len() != horizon {
            dec.schema(
                p.pos,
                format!("a player's spaces need one entry per stage ({horizon})"),
                "declare every stage",
            );
            return None;
        }
        let mut per_stage = Vec::with_capacity(horizon);
        for (t, s) in stages.iter().enumerate() {
            let rows = dec.array(s, "a stage's spaces")?;
            if rows.len() != slots[t] {
                dec.schema(
                    s.pos,
                    format!(
                        "stage {} declares {} slot spaces, but `slots` says {}",
                        t + 1,
                        rows.len(),
                        slots[t]
                    ),
                    "one space per slot",
                );
                return None;
            }
            let mut out = Vec::with_capacity(rows.len());
            for r in rows {
                let mut space = Vec::new();
                for y in dec.array(r, "a slot space")? {
                    space.push(dec.slot(y, "a slot value")?);
                }
                if !space.contains(&None) {
                    dec.schema(
                        r.pos,
                        "every slot space must contain the dummy \"d\"",
                        "add \"d\"",
                    );
                    return None;
                }
                out.push(space);
            }
            per_stage.push(out);
        }
        spaces.push(per_stage);
    }
    let u = dec.field(f, "utility", "`flow`")?;
    dec.object(u, "`utility`")?;
    let kind_v = dec.field(u, "kind", "`utility`")?;
    let utility = match dec.string(kind_v, "`kind`")? {
        "additive" => {
            dec.keys(u, &["kind"], "`utility`");
            Utility::Additive
        }
        "ausubel" => {
            dec.keys(
                u,
                &["kind", "supply", "prices", "values", "decomposition"],
                "`utility`",
            );
            let supply_v = dec.field(u, "supply", "`utility`")?;
            let supply = dec.count(supply_v, "`supply`", 64)? as i64;
            let prices_v = dec.field(u, "prices", "`utility`")?;
            let mut prices = Vec::new();
            for p in dec.array(prices_v, "`prices`")? {
                prices.push(dec.rational(p, "a price")?);
            }
            let values_v = dec.field(u, "values", "`utility`")?;
            let thetas = dec.array(values_v, "`values`")?;
            if thetas.len() != def.nature.len() {
                dec.schema(
                    values_v.pos,
                    "`values` needs one entry per nature state",
                    "list marginal values per nature state, bidder and unit",
                );
                return None;
            }
            let mut values = Vec::new();
            for t in thetas {
                let bidders = dec.array(t, "a value profile")?;
                if bidders.len() != n {
                    dec.schema(
                        t.pos,
                        "a value profile needs one list per player",
                        "list every bidder",
                    );
                    return None;
                }
                let mut per = Vec::new();
                for b in bidders {
                    let mut units = Vec::new();
                    for x in dec.array(b, "marginal values")? {
                        units.push(dec.rational(x, "a marginal value")?);
                    }
                    if units.len() != supply as usize {
                        dec.schema(
                            b.pos,
                            format!("need one marginal value per unit ({supply})"),
                            "list a value for every unit",
                        );
                        return None;
                    }
                    per.push(units);
                }
                values.push(per);
            }
            let d_v = dec.field(u, "decomposition", "`utility`")?;
            let decomposition = match dec.string(d_v, "`decomposition`")? {
                "excessWithBounds" => Decomposition::ExcessWithBounds,
                "finalOnly" => Decomposition::FinalOnly,
                other => {
                    dec.schema(
                        d_v.pos,
                        format!("unknown decomposition `{other}`"),
                        "use \"excessWithBounds\" or \"finalOnly\"",
                    );
                    return None;
                }
            };
            let expected = match decomposition {
                Decomposition::ExcessWithBounds => 3,
                Decomposition::FinalOnly => 2,
            };
            if slots.iter().any(|&k| k != expected) {
                dec.schema(
                    slots_v.pos,
                    format!("this decomposition reads {expected} slots per stage"),
                    "match `slots` to the decomposition",
                );
                return None;
            }
            Utility::Ausubel(AusubelUtility {
                supply,
                prices,
                values,
                decomposition,
            })
        }
        other => {
            dec.schema(
                kind_v.pos,
                format!("unknown utility `{other}`"),
                "use \"additive\" or \"ausubel\"",
            );
            return None;
        }
    };
    Some(FlowSpec {
        slots,
        spaces,
        utility,
    })
}

// ---------------------------------------------------------------- comparison

type NodeKey = (String, Vec<Vec<String>>);

#[derive(PartialEq, Debug)]
struct NodeFacts {
    info: Vec<String>,
    outcomes: Vec<String>,
    payoffs: Vec<Rational>,
    stage: Vec<Vec<Slot>>,
}

fn label_facts(
    game: &Game,
) -> (
    Vec<BTreeMap<String, (usize, Vec<String>)>>,
    BTreeMap<NodeKey, NodeFacts>,
) {
    let n = game.n_players();
    let infos = (0..n)
        .map(|j| {
            game.info_sets(j)
                .iter()
                .map(|h| {
                    let mut acts: Vec<String> = h
                        .actions
                        .iter()
                        .map(|&a| game.action_label(j, a).to_string())
                        .collect();
                    acts.sort();
                    (h.label.clone(), (h.stage, acts))
                })
                .collect()
        })
        .collect();
    let mut nodes = BTreeMap::new();
    for (id, node) in game.nodes().iter().enumerate() {
        let h = game.history(id);
        let path = h
            .actions
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(j, &a)| game.action_label(j, a).to_string())
                    .collect()
            })
            .collect();
        let (outcomes, payoffs) = match node.terminal {
            Some(t) => (
                game.terminals()[t].outcomes.clone(),
                game.terminals()[t].payoffs.clone(),
            ),
            None => (Vec::new(), Vec::new()),
        };
        let info = node
            .info
            .iter()
            .enumerate()
            .map(|(j, &k)| game.info(j, k).label.clone())
            .collect();
        nodes.insert(
            (game.nature()[node.theta].clone(), path),
            NodeFacts {
                info,
                outcomes,
                payoffs,
                stage: node.stage.clone(),
            },
        );
    }
    (infos, nodes)
}

/// Structural equality up to the internal numbering of info sets, actions
/// and nodes. On mismatch, describes the first difference.
pub fn isomorphic(a: &Built, b: &Built) -> Result<(), String> {
    let (ga, gb) = (a.game(), b.game());
    if ga.players() != gb.players() {
        return Err(format!(
            "players differ: {:?} vs {:?}",
            ga.players(),
            gb.players()
        ));
    }
    let mut na = ga.nature().to_vec();
    let mut nb = gb.nature().to_vec();
    na.sort();
    nb.sort();
    if na != nb {
        return Err("nature states differ".into());
    }
    if ga.horizon() != gb.horizon() {
        return Err(format!(
            "horizons differ: {} vs {}",
            ga.horizon(),
            gb.horizon()
        ));
    }
    let (ia, nodes_a) = label_facts(ga);
    let (ib, nodes_b) = label_facts(gb);
    for j in 0..ga.n_players() {
        if ia[j] != ib[j] {
            let diff = ia[j]
                .iter()
                .find(|(k, v)| ib[j].get(*k) != Some(v))
                .map(|(k, _)| k.clone())
                .or_else(|| ib[j].keys().find(|k| !ia[j].contains_key(*k)).cloned());
            return Err(format!(
                "info sets of {} differ at `{}`",
                ga.players()[j],
                diff.unwrap_or_default()
            ));
        }
    }
    if nodes_a.len() != nodes_b.len() {
        return Err(format!("{} vs {} histories", nodes_a.len(), nodes_b.len()));
    }
    for (k, fa) in &nodes_a {
        match nodes_b.get(k) {
            None => return Err(format!("history {k:?} missing on the right")),
            Some(fb) if fa != fb => return Err(format!("history {k:?} differs: {fa:?} vs {fb:?}")),
            _ => {}
        }
    }
    match (a.flow(), b.flow()) {
        (None, None) => Ok(()),
        (Some(fa), Some(fb)) => {
            if fa.slots != fb.slots {
                Err("slot counts differ".into())
            } else if fa.spaces != fb.spaces {
                Err("slot spaces differ".into())
            } else if fa.utility != fb.utility {
                Err("utilities differ".into())
            } else {
                Ok(())
            }
        }
        _ => Err("one game is a flow game and the other is not".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanisms::gen_centipede;

    fn centipede_text() -> String {
        serialize_game(&gen_centipede())
    }

    #[test]
    fn centipede_round_trips() {
        let text = centipede_text();
        let (doc, warnings) = parse(&text, Strictness::Strict).unwrap();
        assert!(warnings.is_empty());
        let built = doc.build(Caps::default()).unwrap();
        isomorphic(&built, &Built::Base(gen_centipede())).unwrap();
        assert_eq!(serialize_built(&built), text);
    }

    #[test]
    fn rationals_are_normalized() {
        let text = centipede_text().replacen(
            "\"payoffs\": [\"2\", \"0\"]",
            "\"payoffs\": [\"4/2\", \"0/7\"]",
            1,
        );
        assert!(text.contains("4/2"));
        let (doc, _) = parse(&text, Strictness::Strict).unwrap();
        let built = doc.build(Caps::default()).unwrap();
        assert_eq!(serialize_built(&built), centipede_text());
    }

    #[test]
    fn unknown_fields_depend_on_strictness() {
        let text =
            centipede_text().replacen("\"horizon\"", "\"colour\": \"red\",\n  \"horizon\"", 1);
        let err = parse(&text, Strictness::Strict).unwrap_err();
        assert_eq!(err.kind, DocErrorKind::Schema);
        assert_eq!(err.diagnostics[0].code, "E0202");
        let (_, warnings) = parse(&text, Strictness::Lenient).unwrap();
        assert_eq!(warnings[0].code, "W0202");
    }

    #[test]
    fn version_mismatch_is_its_own_error() {
        let text = centipede_text().replacen("\"version\": 1", "\"version\": 2", 1);
        let err = parse(&text, Strictness::Strict).unwrap_err();
        assert_eq!(err.kind, DocErrorKind::VersionMismatch);
        assert_eq!(err.diagnostics[0].pos.line, 3);
    }
}
