//! Named mechanism generators with `key=value` parameters.

use thiserror::Error;

use crate::flow_games::{Decomposition, FlowGame};
use crate::game_core::{parse_rational, Game, Rational};
use crate::mechanisms::ttc::{parse_ranking, ranking_label, Ranking};
use crate::mechanisms::{
    gen_ausubel, gen_centipede, gen_grab_or_nab, gen_grab_or_nab_stage, gen_herding, gen_japanese,
    gen_ttc_direct, gen_ttc_dynamic, AusubelParams, HerdingParams, JapaneseParams, MechanismError,
    TtcDynamicParams,
};

/// A generated or parsed game, plain or with flow outcomes.
#[derive(Debug)]
pub enum Built {
    Base(Game),
    Flow(FlowGame),
}

impl Built {
    pub fn game(&self) -> &Game {
        match self {
            Built::Base(g) => g,
            Built::Flow(f) => &f.game,
        }
    }

    pub fn flow(&self) -> Option<&FlowGame> {
        match self {
            Built::Base(_) => None,
            Built::Flow(f) => Some(f),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Built::Base(_) => "base",
            Built::Flow(_) => "flow",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown mechanism `{0}`; known: {known}", known = MECHANISMS.iter().map(|m| m.0).collect::<Vec<_>>().join(", "))]
    Unknown(String),
    #[error("mechanism `{mechanism}` takes no parameter `{key}`; it accepts: {accepted}")]
    UnknownParam {
        mechanism: String,
        key: String,
        accepted: String,
    },
    #[error("parameter `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Name, accepted parameters, one-line description.
pub const MECHANISMS: [(&str, &[&str], &str); 8] = [
    ("centipede", &[], "four-stage centipede between Ann and Bob"),
    (
        "grab_or_nab",
        &[],
        "Grab or Nab played twice, one payoff slot per stage",
    ),
    ("grab_or_nab_stage", &[], "the Grab or Nab stage game alone"),
    (
        "japanese",
        &["bidders", "prices", "values", "reentry"],
        "ascending clock auction for one object",
    ),
    (
        "ttc_dynamic",
        &["profiles"],
        "dynamic top trading cycles; profiles like abc/bac/cab;bca/cab/abc",
    ),
    (
        "ttc_direct",
        &["truth"],
        "direct top trading cycles; truth like abc/bac/cab",
    ),
    ("herding", &["sheep", "grid", "stops"], "the herding game"),
    (
        "ausubel",
        &["supply", "bidders", "prices", "values", "decomposition"],
        "Ausubel clinching auction; values like 5/2,3/2|5/2,3/2",
    ),
];

fn bad(key: &str, reason: impl Into<String>) -> RegistryError {
    RegistryError::BadValue {
        key: key.into(),
        reason: reason.into(),
    }
}

fn rational(key: &str, text: &str) -> Result<Rational, RegistryError> {
    let text = text.trim();
    if text.chars().filter(char::is_ascii_digit).count() > 15 {
        return Err(bad(key, format!("`{text}` is too large")));
    }
    parse_rational(text).ok_or_else(|| bad(key, format!("`{text}` is not a rational")))
}

/// `1,2,3` or an integer range `1..3`.
fn rationals(key: &str, text: &str) -> Result<Vec<Rational>, RegistryError> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| bad(key, "range bounds must be integers"))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| bad(key, "range bounds must be integers"))?;
        if hi < lo || hi - lo > 1000 {
            return Err(bad(key, "empty or oversized range"));
        }
        return Ok((lo..=hi).map(Rational::from_integer).collect());
    }
    text.split(',').map(|t| rational(key, t)).collect()
}

fn integers(key: &str, text: &str) -> Result<Vec<i64>, RegistryError> {
    rationals(key, text)?
        .into_iter()
        .map(|r| {
            if r.is_integer() {
                Ok(r.to_integer())
            } else {
                Err(bad(key, "expected integers"))
            }
        })
        .collect()
}

fn count(key: &str, text: &str, max: usize) -> Result<usize, RegistryError> {
    match text.trim().parse::<usize>() {
        Ok(n) if n <= max => Ok(n),
        _ => Err(bad(key, format!("expected an integer between 0 and {max}"))),
    }
}

fn flag(key: &str, text: &str) -> Result<bool, RegistryError> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, "expected true or false")),
    }
}

fn profile(key: &str, text: &str) -> Result<Vec<Ranking>, RegistryError> {
    let parts: Vec<&str> = text.split('/').map(str::trim).collect();
    let n = parts.len();
    parts
        .iter()
        .map(|p| {
            parse_ranking(p, n).ok_or_else(|| {
                bad(
                    key,
                    format!("`{p}` is not a ranking of the first {n} letters"),
                )
            })
        })
        .collect()
}

/// Parameters rendered back to `key=value` form in the accepted order.
pub fn canonical_params(name: &str, params: &[(String, String)]) -> Vec<(String, String)> {
    let accepted = MECHANISMS
        .iter()
        .find(|m| m.0 == name)
        .map(|m| m.1)
        .unwrap_or(&[]);
    let mut out: Vec<(String, String)> = Vec::new();
    for key in accepted {
        if let Some((_, v)) = params.iter().rev().find(|(k, _)| k == key) {
            out.push((key.to_string(), v.clone()));
        }
    }
    out
}

/// Generates `name` with `params`; unspecified parameters take the desk defaults.
pub fn generate(name: &str, params: &[(String, String)]) -> Result<Built, RegistryError> {
    let (_, accepted, _) = MECHANISMS
        .iter()
        .find(|m| m.0 == name)
        .ok_or_else(|| RegistryError::Unknown(name.into()))?;
    for (k, _) in params {
        if !accepted.contains(&k.as_str()) {
            return Err(RegistryError::UnknownParam {
                mechanism: name.into(),
                key: k.clone(),
                accepted: if accepted.is_empty() {
                    "nothing".into()
                } else {
                    accepted.join(", ")
                },
            });
        }
    }
    let get = |key: &str| {
        params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    Ok(match name {
        "centipede" => Built::Base(gen_centipede()),
        "grab_or_nab" => Built::Flow(gen_grab_or_nab()),
        "grab_or_nab_stage" => Built::Flow(gen_grab_or_nab_stage()),
        "japanese" => {
            let mut p = JapaneseParams::desk();
            if let Some(v) = get("bidders") {
                p.bidders = count("bidders", v, 6)?;
            }
            if let Some(v) = get("prices") {
                p.prices = rationals("prices", v)?;
            }
            if let Some(v) = get("values") {
                p.values = rationals("values", v)?;
            }
            if let Some(v) = get("reentry") {
                p.reentry = flag("reentry", v)?;
            }
            Built::Base(gen_japanese(&p)?)
        }
        "ttc_dynamic" => {
            let mut p = TtcDynamicParams::desk();
            if let Some(v) = get("profiles") {
                p.thetas = v
                    .split(';')
                    .map(|t| profile("profiles", t))
                    .collect::<Result<_, _>>()?;
                p.n = p.thetas.first().map_or(0, Vec::len);
                if p.thetas.iter().any(|t| t.len() != p.n) {
                    return Err(bad(
                        "profiles",
                        "every profile needs the same number of players",
                    ));
                }
            }
            Built::Base(gen_ttc_dynamic(&p)?)
        }
        "ttc_direct" => {
            let truth = profile("truth", get("truth").unwrap_or("abc/bac/cab"))?;
            if truth.len() > 4 {
                return Err(bad("truth", "at most four players"));
            }
            Built::Base(gen_ttc_direct(truth.len(), &truth)?)
        }
        "herding" => {
            let mut p = HerdingParams::desk();
            if let Some(v) = get("sheep") {
                p.sheep = count("sheep", v, 4)?;
            }
            if let Some(v) = get("grid") {
                p.grid = integers("grid", v)?;
            }
            if let Some(v) = get("stops") {
                p.stops = integers("stops", v)?;
            }
            Built::Base(gen_herding(&p)?)
        }
        "ausubel" => {
            let decomposition = match get("decomposition").unwrap_or("excess") {
                "excess" | "excessWithBounds" => Decomposition::ExcessWithBounds,
                "final" | "finalOnly" => Decomposition::FinalOnly,
                other => {
                    return Err(bad(
                        "decomposition",
                        format!("`{other}` is neither excess nor final"),
                    ))
                }
            };
            let mut p = AusubelParams::desk(decomposition);
            if let Some(v) = get("supply") {
                p.supply = count("supply", v, 6)? as i64;
            }
            if let Some(v) = get("bidders") {
                p.bidders = count("bidders", v, 4)?;
            }
            if let Some(v) = get("prices") {
                p.prices = rationals("prices", v)?;
            }
            if let Some(v) = get("values") {
                p.values = v
                    .split(';')
                    .map(|theta| {
                        theta
                            .split('|')
                            .map(|b| rationals("values", b))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?;
            } else if get("supply").is_some() || get("bidders").is_some() {
                return Err(bad("values", "required when supply or bidders change"));
            }
            Built::Flow(gen_ausubel(&p)?)
        }
        other => return Err(RegistryError::Unknown(other.into())),
    })
}

/// The desk parameters of `name`, spelled out.
pub fn default_params(name: &str) -> Vec<(String, String)> {
    let s = |k: &str, v: String| (k.to_string(), v);
    let list = |xs: &[Rational]| {
        xs.iter()
            .map(crate::game_core::format_rational)
            .collect::<Vec<_>>()
            .join(",")
    };
    match name {
        "japanese" => {
            let p = JapaneseParams::desk();
            vec![
                s("bidders", p.bidders.to_string()),
                s("prices", list(&p.prices)),
                s("values", list(&p.values)),
                s("reentry", p.reentry.to_string()),
            ]
        }
        "ttc_dynamic" => vec![s(
            "profiles",
            TtcDynamicParams::desk()
                .thetas
                .iter()
                .map(|t| t.iter().map(ranking_label).collect::<Vec<_>>().join("/"))
                .collect::<Vec<_>>()
                .join(";"),
        )],
        "ttc_direct" => vec![s("truth", "abc/bac/cab".into())],
        "herding" => {
            let p = HerdingParams::desk();
            let ints = |xs: &[i64]| xs.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            vec![
                s("sheep", p.sheep.to_string()),
                s("grid", ints(&p.grid)),
                s("stops", ints(&p.stops)),
            ]
        }
        "ausubel" => {
            let p = AusubelParams::desk(Decomposition::ExcessWithBounds);
            let values = p
                .values
                .iter()
                .map(|t| t.iter().map(|b| list(b)).collect::<Vec<_>>().join("|"))
                .collect::<Vec<_>>()
                .join(";");
            vec![
                s("supply", p.supply.to_string()),
                s("bidders", p.bidders.to_string()),
                s("prices", list(&p.prices)),
                s("values", values),
                s("decomposition", "excess".into()),
            ]
        }
        _ => Vec::new(),
    }
}
