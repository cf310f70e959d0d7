//! The `localdom` command line.
//!
//! Exit codes: 0 success or the checked claim holds, 1 the claim fails (the
//! counterexample goes to stdout), 2 usage or parse error, 3 a space cap was
//! hit. Stdout is a function of argv and input files only; timings go to
//! stderr.

use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dominance::{
    find_dominant, locally_c_dominates, locally_obviously_dominates, locally_weakly_dominates,
    obviously_dominates, weakly_dominates, wishfully_dominates, DominanceError, DominanceVerdict,
    GlobalKind, Partition, PartitionFamily,
};
use crate::ending_analysis::locally_e_dominates;
use crate::flow_games::locally_s_dominates;
use crate::game_core::{format_rational, ActionId, Caps, Game, GameError};
use crate::harness::claims::{verify_on_game, verify_random, Claim, TheoremReport, Verdict};
use crate::interface::document::{self, GameDocument, Source};
use crate::interface::json::{self, Strictness, Value};
use crate::interface::registry::{self, Built, RegistryError, MECHANISMS};
use crate::strategy_space::{find_strategy, ExternalState, LocalView, PlayerView, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "localdom",
    version,
    about = "Exact local-dominance analysis of finite multistage games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and build a game file, reporting diagnostics.
    Validate {
        file: String,
        /// Downgrade unknown fields and duplicate keys to warnings.
        #[arg(long)]
        lenient: bool,
    },
    /// List a player's reduced strategies and external states.
    Enumerate {
        /// Game file, `-` for stdin, or a mechanism name.
        source: String,
        #[arg(long)]
        player: Option<String>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        lenient: bool,
    },
    /// Decide one dominance relation.
    Check {
        /// Game file, `-` for stdin (the default), or a mechanism name.
        source: Option<String>,
        #[arg(long, value_enum)]
        notion: Notion,
        /// Info set label.
        #[arg(long)]
        at: Option<String>,
        /// `dominating,dominated` action labels.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        player: Option<String>,
        /// singleton | trivial | ending | next-active | cells such as `0,1;2`
        #[arg(long)]
        partition: Option<String>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        lenient: bool,
    },
    /// Write a generated mechanism as a game file.
    Gen {
        mechanism: String,
        /// `key=value` parameters.
        params: Vec<String>,
        #[arg(short, long)]
        output: Option<String>,
        /// Write a generator reference instead of the explicit tree.
        #[arg(long)]
        reference: bool,
    },
    /// Re-verify a characterization claim.
    Verify {
        claim: String,
        /// `random` (default), a mechanism name, or a game file.
        instance: Option<String>,
        /// Seed range for random instances, e.g. `0..100`.
        #[arg(long, default_value = "0..100")]
        seeds: String,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Run every claim on seeded random games.
    Report {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value = "0..100")]
        seeds: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Notion {
    Weak,
    Obvious,
    LocalWeak,
    LocalObvious,
    LocalC,
    Wishful,
    E,
    S,
}

impl Notion {
    fn describe(self) -> &'static str {
        match self {
            Notion::Weak => "weakly dominates",
            Notion::Obvious => "obviously dominates",
            Notion::LocalWeak => "locally weakly dominates",
            Notion::LocalObvious => "locally obviously dominates",
            Notion::LocalC => "locally c-dominates",
            Notion::Wishful => "wishfully dominates",
            Notion::E => "locally e-dominates",
            Notion::S => "locally s-dominates",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Cap(String),
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Failure {
        match e {
            GameError::SpaceCap { .. } => Failure::Cap(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<DominanceError> for Failure {
    fn from(e: DominanceError) -> Failure {
        match e {
            DominanceError::Game(g) => g.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<RegistryError> for Failure {
    fn from(e: RegistryError) -> Failure {
        use crate::flow_games::FlowError;
        use crate::mechanisms::MechanismError;
        match e {
            RegistryError::Mechanism(MechanismError::Game(g))
            | RegistryError::Mechanism(MechanismError::Flow(FlowError::Game(g))) => g.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) with process stdin.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    run_cli_with_input(args, &mut std::io::stdin(), out, err)
}

pub fn run_cli_with_input(
    args: &[String],
    input: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let caps = match Caps::from_env() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: LOCALDOM_CAPS: {e}");
            return EXIT_USAGE;
        }
    };
    let mut ctx = Ctx {
        input,
        out,
        err,
        caps,
    };
    let result = match cli.command {
        Command::Validate { file, lenient } => ctx.validate(&file, lenient),
        Command::Enumerate {
            source,
            player,
            params,
            lenient,
        } => ctx.enumerate(&source, player.as_deref(), &params, lenient),
        Command::Check {
            source,
            notion,
            at,
            pair,
            player,
            partition,
            params,
            lenient,
        } => ctx.check(CheckArgs {
            source: source.as_deref().unwrap_or("-"),
            notion,
            at: at.as_deref(),
            pair: pair.as_deref(),
            player: player.as_deref(),
            partition: partition.as_deref(),
            params: &params,
            lenient,
        }),
        Command::Gen {
            mechanism,
            params,
            output,
            reference,
        } => ctx.gen(&mechanism, &params, output.as_deref(), reference),
        Command::Verify {
            claim,
            instance,
            seeds,
            params,
        } => ctx.verify(&claim, instance.as_deref(), &seeds, &params),
        Command::Report { format, seeds } => ctx.report(format, &seeds),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Cap(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            let _ = writeln!(
                ctx.err,
                "hint: raise the limit with LOCALDOM_CAPS, e.g. LOCALDOM_CAPS=strategies=1000000"
            );
            EXIT_CAP
        }
    }
}

struct Ctx<'a> {
    input: &'a mut dyn Read,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    caps: Caps,
}

struct CheckArgs<'a> {
    source: &'a str,
    notion: Notion,
    at: Option<&'a str>,
    pair: Option<&'a str>,
    player: Option<&'a str>,
    partition: Option<&'a str>,
    params: &'a [String],
    lenient: bool,
}

fn key_values(params: &[String]) -> Result<Vec<(String, String)>, Failure> {
    params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    Failure::Usage(format!("parameter `{p}` is not of the form key=value"))
                })
        })
        .collect()
}

fn parse_seeds(text: &str) -> Result<std::ops::Range<u64>, Failure> {
    let bad = || Failure::Usage(format!("seed range `{text}` is not of the form A..B"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a >= b {
        return Err(bad());
    }
    Ok(a..b)
}

fn resolve_player(game: &Game, name: &str) -> Result<usize, Failure> {
    if let Some(i) = game.player_index(name) {
        return Ok(i);
    }
    match name.parse::<usize>() {
        Ok(k) if (1..=game.n_players()).contains(&k) => Ok(k - 1),
        _ => Err(Failure::Usage(format!(
            "unknown player `{name}`; players are {}",
            game.players().join(", ")
        ))),
    }
}

fn describe_external(game: &Game, player: usize, e: &ExternalState) -> String {
    let mut parts = vec![format!("θ={}", game.nature()[e.theta])];
    for (j, s) in e.profile.iter().enumerate() {
        if j != player {
            parts.push(format!(
                "{}: {}",
                game.players()[j],
                crate::strategy_space::strategy_label(game, j, s)
            ));
        }
    }
    parts.join("; ")
}

impl Ctx<'_> {
    fn load(&mut self, source: &str, params: &[String], lenient: bool) -> Result<Built, Failure> {
        let is_file = source != "-" && Path::new(source).exists();
        if !is_file && source != "-" {
            if MECHANISMS.iter().any(|m| m.0 == source) {
                return Ok(registry::generate(source, &key_values(params)?)?);
            }
            return Err(Failure::Usage(format!(
                "`{source}` is neither a readable file nor a mechanism ({})",
                MECHANISMS
                    .iter()
                    .map(|m| m.0)
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        if !params.is_empty() {
            return Err(Failure::Usage(
                "--param applies to mechanism names only".into(),
            ));
        }
        let (name, text) = if source == "-" {
            let mut buf = Vec::new();
            self.input
                .read_to_end(&mut buf)
                .map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
            ("<stdin>".to_string(), buf)
        } else {
            (
                source.to_string(),
                std::fs::read(source)
                    .map_err(|e| Failure::Usage(format!("cannot read {source}: {e}")))?,
            )
        };
        let text = String::from_utf8(text).map_err(|e| {
            Failure::Usage(format!(
                "{name}: not UTF-8 (byte {})",
                e.utf8_error().valid_up_to()
            ))
        })?;
        let strictness = if lenient {
            Strictness::Lenient
        } else {
            Strictness::Strict
        };
        let (doc, warnings) = document::parse(&text, strictness).map_err(|e| {
            let lines: Vec<String> = e
                .diagnostics
                .iter()
                .map(|d| format!("{name}:{d}"))
                .collect();
            Failure::Usage(format!(
                "{}\n{}",
                e.to_string().lines().next().unwrap_or("invalid document"),
                lines.join("\n")
            ))
        })?;
        for w in warnings {
            let _ = writeln!(self.err, "{name}:{w}");
        }
        doc.build(self.caps).map_err(|e| {
            if e.is_space_cap() {
                Failure::Cap(e.to_string())
            } else {
                Failure::Usage(format!("{name}: invalid game: {e}"))
            }
        })
    }

    fn validate(&mut self, file: &str, lenient: bool) -> Outcome {
        let built = self.load(file, &[], lenient)?;
        let g = built.game();
        let infos: usize = (0..g.n_players()).map(|j| g.info_sets(j).len()).sum();
        let _ = writeln!(
            self.out,
            "ok: {} game, {} players, {} nature states, horizon {}, {} histories ({} terminal), {} info sets",
            built.kind(),
            g.n_players(),
            g.nature().len(),
            g.horizon(),
            g.nodes().len(),
            g.terminals().len(),
            infos
        );
        Ok(EXIT_OK)
    }

    fn enumerate(
        &mut self,
        source: &str,
        player: Option<&str>,
        params: &[String],
        lenient: bool,
    ) -> Outcome {
        let built = self.load(source, params, lenient)?;
        let game = built.game();
        let players = match player {
            Some(p) => vec![resolve_player(game, p)?],
            None => (0..game.n_players()).collect(),
        };
        for i in players {
            let view = PlayerView::new(game, i)?;
            let strategies = view.strategies()?;
            let _ = writeln!(
                self.out,
                "{}: {} reduced strategies",
                game.players()[i],
                strategies.len()
            );
            for (k, s) in strategies.iter().enumerate() {
                let _ = writeln!(self.out, "  s{k}  {}", view.label(s));
            }
            let _ = writeln!(
                self.out,
                "{}: {} external states",
                game.players()[i],
                view.external.len()
            );
            for (k, e) in view.external.iter().enumerate() {
                let _ = writeln!(self.out, "  e{k}  {}", describe_external(game, i, e));
            }
        }
        Ok(EXIT_OK)
    }

    fn gen(
        &mut self,
        mechanism: &str,
        params: &[String],
        output: Option<&str>,
        reference: bool,
    ) -> Outcome {
        let kv = key_values(params)?;
        let built = registry::generate(mechanism, &kv)?;
        let text = if reference {
            let kind = if built.flow().is_some() {
                document::GameKind::Flow
            } else {
                document::GameKind::Base
            };
            document::serialize(&GameDocument {
                version: document::VERSION,
                kind,
                source: Source::Generator {
                    mechanism: mechanism.into(),
                    params: kv,
                },
            })
        } else {
            document::serialize_built(&built)
        };
        match output {
            Some(path) => {
                std::fs::write(path, text)
                    .map_err(|e| Failure::Usage(format!("cannot write {path}: {e}")))?;
                let _ = writeln!(self.err, "wrote {path}");
            }
            None => {
                let _ = self.out.write_all(text.as_bytes());
            }
        }
        Ok(EXIT_OK)
    }

    fn check(&mut self, args: CheckArgs) -> Outcome {
        let built = self.load(args.source, args.params, args.lenient)?;
        let game = built.game();
        if args.partition.is_some() && args.notion != Notion::LocalC {
            return Err(Failure::Usage(
                "--partition applies to --notion local-c only".into(),
            ));
        }
        if args.notion == Notion::S && built.flow().is_none() {
            return Err(Failure::Usage("--notion s needs a flow game".into()));
        }
        let global = matches!(args.notion, Notion::Weak | Notion::Obvious);
        if global && args.at.is_none() {
            return match args.pair {
                None => self.check_dominant_strategy(game, args.notion, args.player),
                Some(pair) => self.check_strategy_pair(game, args.notion, args.player, pair),
            };
        }
        let (Some(at), Some(pair)) = (args.at, args.pair) else {
            return Err(Failure::Usage(
                "this notion needs --at <info set> and --pair <dominating,dominated>".into(),
            ));
        };
        let players: Vec<usize> = match args.player {
            Some(p) => vec![resolve_player(game, p)?],
            None => (0..game.n_players())
                .filter(|&j| game.find_info(j, at).is_ok())
                .collect(),
        };
        if players.is_empty() {
            return Err(Failure::Usage(format!(
                "no player has an info set labelled `{at}`"
            )));
        }
        let (abar_name, a_name) = pair
            .split_once(',')
            .map(|(x, y)| (x.trim(), y.trim()))
            .ok_or_else(|| Failure::Usage(format!("--pair `{pair}` is not of the form a,b")))?;
        let mut all_hold = true;
        for i in players {
            let h = game.find_info(i, at).map_err(|_| {
                Failure::Usage(format!(
                    "{} has no info set labelled `{at}`",
                    game.players()[i]
                ))
            })?;
            let set = game.info(i, h);
            let offered = || {
                set.actions
                    .iter()
                    .map(|&b| game.action_label(i, b))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let resolve = |name: &str| -> Result<ActionId, Failure> {
                game.action_id(i, name)
                    .filter(|b| set.actions.contains(b))
                    .ok_or_else(|| {
                        Failure::Usage(format!(
                            "`{name}` is not available to {} at `{at}`; available: {}",
                            game.players()[i],
                            offered()
                        ))
                    })
            };
            let (abar, a) = (resolve(abar_name)?, resolve(a_name)?);
            if abar == a {
                return Err(Failure::Usage("--pair needs two different actions".into()));
            }
            let view = PlayerView::new(game, i)?;
            let local = view.local(h);
            let subject = format!("{} at `{at}`: {abar_name}", game.players()[i]);
            let holds = if global {
                self.check_through(&view, &local, args.notion, abar, a, &subject, a_name)?
            } else {
                let verdict = match args.notion {
                    Notion::LocalWeak => locally_weakly_dominates(&local, abar, a)?,
                    Notion::LocalObvious => locally_obviously_dominates(&local, abar, a)?,
                    Notion::LocalC => {
                        let p =
                            partition_spec(args.partition.unwrap_or("singleton"), &local, abar, a)?;
                        locally_c_dominates(&local, abar, a, &p)?
                    }
                    Notion::Wishful => wishfully_dominates(&local, abar, a)?,
                    Notion::E => locally_e_dominates(&local, abar, a)?,
                    Notion::S => {
                        locally_s_dominates(built.flow().expect("checked above"), &local, abar, a)?
                    }
                    Notion::Weak | Notion::Obvious => unreachable!("global notions handled above"),
                };
                self.print_verdict(
                    &view,
                    &verdict,
                    &format!(
                        "{subject} {} {a_name}",
                        if verdict.holds {
                            args.notion.describe().to_string()
                        } else {
                            format!(
                                "does not {}",
                                args.notion.describe().replace("dominates", "dominate")
                            )
                        }
                    ),
                );
                verdict.holds
            };
            all_hold &= holds;
        }
        Ok(if all_hold { EXIT_OK } else { EXIT_FAILS })
    }

    /// Strategy level: every strategy through `a` at `h` is dominated by one through `abar`.
    #[allow(clippy::too_many_arguments)]
    fn check_through(
        &mut self,
        view: &PlayerView,
        local: &LocalView,
        notion: Notion,
        abar: ActionId,
        a: ActionId,
        subject: &str,
        a_name: &str,
    ) -> Result<bool, Failure> {
        let good = local.full_strategies_through(abar)?;
        let bad = local.full_strategies_through(a)?;
        let relation = |sb: &Strategy, s: &Strategy| {
            if notion == Notion::Weak {
                weakly_dominates(view, sb, s)
            } else {
                obviously_dominates(view, sb, s)
            }
        };
        let word = if notion == Notion::Weak {
            "weakly"
        } else {
            "obviously"
        };
        for s in &bad {
            if !good.iter().any(|sb| relation(sb, s).holds) {
                let _ = writeln!(
                    self.out,
                    "fails: {subject} does not {word} dominate {a_name} strategy by strategy"
                );
                let _ = writeln!(self.out, "  undominated strategy: {}", view.label(s));
                if let Some(sb) = good.first() {
                    let v = relation(sb, s);
                    let _ = writeln!(self.out, "  for instance against {}:", view.label(sb));
                    self.print_failures(view, &v);
                }
                return Ok(false);
            }
        }
        let _ = writeln!(self.out, "holds: every {a_name} strategy of {subject} is {word} dominated by one playing it ({} vs {} strategies)", bad.len(), good.len());
        Ok(true)
    }

    /// Two whole strategies, named by their labels, for each player that has both.
    fn check_strategy_pair(
        &mut self,
        game: &Game,
        notion: Notion,
        player: Option<&str>,
        pair: &str,
    ) -> Outcome {
        let (sbar_name, s_name) = pair
            .split_once(',')
            .map(|(x, y)| (x.trim(), y.trim()))
            .ok_or_else(|| Failure::Usage(format!("--pair `{pair}` is not of the form s,t")))?;
        let candidates = match player {
            Some(p) => vec![resolve_player(game, p)?],
            None => (0..game.n_players()).collect(),
        };
        let word = if notion == Notion::Weak {
            "weakly"
        } else {
            "obviously"
        };
        let mut all = true;
        let mut any = false;
        for i in candidates {
            let (Ok(sbar), Ok(s)) = (
                find_strategy(game, i, sbar_name),
                find_strategy(game, i, s_name),
            ) else {
                if player.is_some() {
                    return Err(Failure::Usage(format!(
                        "{} has no strategies labelled `{sbar_name}` and `{s_name}`",
                        game.players()[i]
                    )));
                }
                continue;
            };
            any = true;
            let view = PlayerView::new(game, i)?;
            let v = if notion == Notion::Weak {
                weakly_dominates(&view, &sbar, &s)
            } else {
                obviously_dominates(&view, &sbar, &s)
            };
            let verb = if v.holds {
                format!("{word} dominates")
            } else {
                format!("does not {word} dominate")
            };
            self.print_verdict(
                &view,
                &v,
                &format!("{}: {sbar_name} {verb} {s_name}", game.players()[i]),
            );
            all &= v.holds;
        }
        if !any {
            return Err(Failure::Usage(format!(
                "no player has strategies labelled `{sbar_name}` and `{s_name}`"
            )));
        }
        Ok(if all { EXIT_OK } else { EXIT_FAILS })
    }

    fn check_dominant_strategy(
        &mut self,
        game: &Game,
        notion: Notion,
        player: Option<&str>,
    ) -> Outcome {
        let kind = if notion == Notion::Weak {
            GlobalKind::Weak
        } else {
            GlobalKind::Obvious
        };
        let word = if notion == Notion::Weak {
            "weakly"
        } else {
            "obviously"
        };
        let players = match player {
            Some(p) => vec![resolve_player(game, p)?],
            None => (0..game.n_players()).collect(),
        };
        let mut all = true;
        for i in players {
            let view = PlayerView::new(game, i)?;
            let search = find_dominant(&view, kind)?;
            match &search.found {
                Some(s) => {
                    let _ = writeln!(
                        self.out,
                        "holds: {} has the {word} dominant strategy {}",
                        game.players()[i],
                        view.label(s)
                    );
                }
                None => {
                    all = false;
                    let _ = writeln!(
                        self.out,
                        "fails: {} has no {word} dominant strategy",
                        game.players()[i]
                    );
                    for (cand, beaten_by, _) in search.absence.iter().take(8) {
                        let _ = writeln!(
                            self.out,
                            "  {} is not {word} dominant: it fails against {}",
                            view.label(cand),
                            view.label(beaten_by)
                        );
                    }
                }
            }
        }
        Ok(if all { EXIT_OK } else { EXIT_FAILS })
    }

    fn print_verdict(&mut self, view: &PlayerView, v: &DominanceVerdict, headline: &str) {
        let _ = writeln!(
            self.out,
            "{}: {headline}",
            if v.holds { "holds" } else { "fails" }
        );
        if v.holds {
            let _ = writeln!(
                self.out,
                "  {} dominated plans matched{}",
                v.witnesses.len(),
                if v.strict_somewhere {
                    ", strictly somewhere"
                } else {
                    ""
                }
            );
        } else {
            self.print_failures(view, v);
        }
    }

    fn print_failures(&mut self, view: &PlayerView, v: &DominanceVerdict) {
        let Some(cx) = &v.counterexample else { return };
        let game = view.game;
        let i = view.player;
        let _ = writeln!(self.out, "  dominated plan: {}", view.label(&cx.dominated));
        if let Some(note) = &cx.note {
            let _ = writeln!(self.out, "  note: {note}");
        }
        for f in cx.failures.iter().take(8) {
            let lo = view.payoff(&f.candidate, f.low);
            let hi = view.payoff(&cx.dominated, f.high);
            let cell = f.cell.map(|c| format!(" in cell {c}")).unwrap_or_default();
            let at = f
                .info
                .map(|k| format!(" after departing at `{}`", game.info(i, k).label))
                .unwrap_or_default();
            let _ = writeln!(
                self.out,
                "  candidate {}{cell}{at}: gets {} against e{} [{}], the dominated plan gets {} against e{} [{}]",
                view.label(&f.candidate),
                format_rational(&lo),
                f.low,
                describe_external(game, i, &view.external[f.low]),
                format_rational(&hi),
                f.high,
                describe_external(game, i, &view.external[f.high])
            );
        }
        if cx.failures.len() > 8 {
            let _ = writeln!(
                self.out,
                "  ... {} more candidates fail",
                cx.failures.len() - 8
            );
        }
    }

    fn verify(
        &mut self,
        claim_id: &str,
        instance: Option<&str>,
        seeds: &str,
        params: &[String],
    ) -> Outcome {
        let claim = Claim::parse(claim_id).ok_or_else(|| {
            Failure::Usage(format!(
                "unknown claim `{claim_id}`; claims: {}",
                Claim::ALL
                    .iter()
                    .map(|c| c.id())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })?;
        let start = Instant::now();
        let report = match instance {
            _ if claim == Claim::DirectTtc => {
                crate::harness::claims::verify_direct_ttc_bipartition()
            }
            None | Some("random") => verify_random(claim, parse_seeds(seeds)?),
            Some(source) => {
                let built = self.load(source, params, false)?;
                let game = built.game();
                verify_on_game(claim, game, source, game.caps().strategies, 0)
            }
        };
        let _ = writeln!(self.err, "verified in {:.2?}", start.elapsed());
        let _ = self.out.write_all(report.render().as_bytes());
        if !report.skipped.is_empty() {
            let _ = writeln!(self.out, "  skipped: {}", report.skipped.len());
            for s in report.skipped.iter().take(5) {
                let _ = writeln!(self.out, "    {s}");
            }
        }
        Ok(match report.verdict {
            Verdict::Confirmed => EXIT_OK,
            Verdict::Counterexample(_) => EXIT_FAILS,
            Verdict::Skipped(_) => EXIT_CAP,
        })
    }

    fn report(&mut self, format: Format, seeds: &str) -> Outcome {
        let range = parse_seeds(seeds)?;
        let start = Instant::now();
        let reports: Vec<(Claim, TheoremReport)> = Claim::ALL
            .iter()
            .map(|&c| (c, verify_random(c, range.clone())))
            .collect();
        let _ = writeln!(self.err, "report computed in {:.2?}", start.elapsed());
        let all = reports.iter().all(|(_, r)| r.confirmed());
        match format {
            Format::Text => {
                let _ = writeln!(self.out, "claims on seeds {}..{}", range.start, range.end);
                for (c, r) in &reports {
                    let _ = writeln!(
                        self.out,
                        "{:<20} {:<12} {:>7} checks {:>4} skipped  {}",
                        c.id(),
                        verdict_name(&r.verdict),
                        r.checked,
                        r.skipped.len(),
                        c.summary()
                    );
                    if let Verdict::Counterexample(w) = &r.verdict {
                        let _ = writeln!(self.out, "  {w}");
                    }
                }
                let _ = writeln!(
                    self.out,
                    "{}",
                    if all {
                        "all claims confirmed"
                    } else {
                        "some claims failed"
                    }
                );
            }
            Format::Json => {
                let v = Value::object([
                    ("format", Value::string("localdom-report")),
                    ("version", Value::number(1)),
                    (
                        "seeds",
                        Value::object([
                            ("from", Value::number(range.start)),
                            ("to", Value::number(range.end)),
                        ]),
                    ),
                    (
                        "claims",
                        Value::array(reports.iter().map(|(c, r)| report_value(*c, r))),
                    ),
                    ("allConfirmed", Value::bool(all)),
                ]);
                let _ = self.out.write_all(json::pretty(&v).as_bytes());
            }
        }
        Ok(if all { EXIT_OK } else { EXIT_FAILS })
    }
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Confirmed => "confirmed",
        Verdict::Counterexample(_) => "counterexample",
        Verdict::Skipped(_) => "skipped",
    }
}

fn report_value(c: Claim, r: &TheoremReport) -> Value {
    let detail = match &r.verdict {
        Verdict::Confirmed => Value::new(json::Kind::Null),
        Verdict::Counterexample(s) | Verdict::Skipped(s) => Value::string(s.as_str()),
    };
    Value::object([
        ("id", Value::string(c.id())),
        ("summary", Value::string(c.summary())),
        ("instance", Value::string(r.instance.as_str())),
        ("verdict", Value::string(verdict_name(&r.verdict))),
        ("detail", detail),
        ("checked", Value::number(r.checked)),
        ("instances", Value::number(r.instances)),
        (
            "skipped",
            Value::array(r.skipped.iter().map(|s| Value::string(s.as_str()))),
        ),
        (
            "witnesses",
            Value::array(r.witnesses.iter().map(|s| Value::string(s.as_str()))),
        ),
    ])
}

/// Named preset or explicit cells of external-state indices (`0,3;1,2`).
fn partition_spec(
    spec: &str,
    local: &LocalView,
    abar: ActionId,
    a: ActionId,
) -> Result<Partition, Failure> {
    let family = match spec {
        "singleton" => PartitionFamily::Singleton,
        "trivial" => PartitionFamily::Trivial,
        "ending" => PartitionFamily::Ending,
        "next-active" => PartitionFamily::NextActive,
        cells => {
            let cells = cells.strip_prefix("explicit:").unwrap_or(cells);
            let mut out = Vec::new();
            for cell in cells.split(';') {
                let mut members = Vec::new();
                for tok in cell.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    let e: usize = tok.trim_start_matches('e').parse().map_err(|_| {
                        Failure::Usage(format!(
                            "partition entry `{tok}` is not an external-state index"
                        ))
                    })?;
                    let m = local.members.iter().position(|&x| x == e).ok_or_else(|| {
                        Failure::Usage(format!(
                            "external state e{e} does not reach this info set; reachable: {:?}",
                            local.members
                        ))
                    })?;
                    members.push(m);
                }
                out.push(members);
            }
            PartitionFamily::Explicit(Partition::new(out, local.members.len())?)
        }
    };
    Ok(family.partition(local, abar, a)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str], input: &str) -> (i32, String, String) {
        let args: Vec<String> = std::iter::once("localdom")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli_with_input(&args, &mut input.as_bytes(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn centipede_root_is_not_locally_weakly_dominated() {
        let (code, out, _) = run(
            &[
                "check",
                "centipede",
                "--notion",
                "local-weak",
                "--at",
                "root",
                "--pair",
                "across,down",
            ],
            "",
        );
        assert_eq!(code, EXIT_FAILS, "{out}");
        assert!(out.contains("candidate"), "{out}");
    }

    #[test]
    fn grab_dominates_nab_stage_by_stage_from_stdin() {
        let (code, text, _) = run(&["gen", "grab_or_nab"], "");
        assert_eq!(code, EXIT_OK);
        let (code, out, err) = run(
            &["check", "--notion", "s", "--at", "stage1", "--pair", "G,N"],
            &text,
        );
        assert_eq!(code, EXIT_OK, "{out}{err}");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(&["frobnicate"], "").0, EXIT_USAGE);
        assert_eq!(
            run(&["check", "centipede", "--notion", "e"], "").0,
            EXIT_USAGE
        );
        assert_eq!(
            run(
                &["check", "-", "--notion", "e", "--at", "x", "--pair", "a,b"],
                "{"
            )
            .0,
            EXIT_USAGE
        );
        assert_eq!(run(&["verify", "no-such-claim"], "").0, EXIT_USAGE);
        assert_eq!(run(&["--help"], "").0, EXIT_OK);
    }
}
