//! Command-line driver. [`run`] parses arguments, executes one subcommand
//! and returns the exit code together with what would be written to stdout
//! and stderr, so it can be exercised without spawning a process.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 size cap
//! exceeded.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::abelian::{self, GroupSpec};
use crate::dihedral::DihedralSpec;
use crate::elimination::{
    self, class_observable, dihedral_impossibility, efficiency_report, generic_construction, optimality_check,
    GenericConstructionJson, DEFAULT_C_MIN,
};
use crate::game::{self, DeclarationRule, GameConfig, DEFAULT_DELTA, DEFAULT_MAX_ROUNDS};
use crate::linalg::{identity, validate_povm, Povm, Subspace, Tolerances};
use crate::report::{self, Header, Report};
use crate::states::{self, fourier_observable, HiddenSubgroupState, StateJson};
use crate::verify::{self, WITNESS_SAMPLES};
use crate::{exec::Exec, Error, DEFAULT_DIMENSION_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hsp-elim", version, about = "Elimination observables for hidden subgroup states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Uniform numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Largest Hilbert-space dimension / group order accepted.
    #[arg(long, global = true, default_value_t = DEFAULT_DIMENSION_CAP)]
    pub cap: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// One compact JSON object per line.
    Jsonl,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    /// `A(G)`, one projector per character class.
    Class,
    /// `F(G)`, one projector per character.
    Fourier,
    /// `{I}`.
    Trivial,
    /// Dihedral only: `{P_v, I - P_v}`.
    VSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    SoleSurvivor,
    MaxLikelihood,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subgroup lattice with orders, generators and annihilator orders.
    Subgroups { group: String },
    /// Hidden subgroup states as density matrices.
    State(StateArgs),
    /// POVM metadata, validation, efficiency and optimality.
    Observable(ObservableArgs),
    /// Full check suite for one group (exit 1 on any failure).
    Verify(VerifyArgs),
    /// Tournament of the identification game.
    Game(GameArgs),
    /// Dihedral impossibility report and generic kernel-intersection search.
    Dihedral(DihedralArgs),
}

#[derive(Debug, Args)]
pub struct StateArgs {
    pub group: String,
    /// Subgroup label as printed by `subgroups` (Abelian groups); all if omitted.
    #[arg(long)]
    pub subgroup: Option<String>,
    /// Hidden reflection `(k,1)` (dihedral groups); all if omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct ObservableArgs {
    pub group: String,
    #[arg(long, value_enum, default_value_t = ObservableKind::Class)]
    pub kind: ObservableKind,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub group: String,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Treat the group as dihedral (`5` means `D5`).
    #[arg(long)]
    pub dihedral: bool,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    pub group: String,
    /// Play only this secret and emit its transcripts.
    #[arg(long)]
    pub secret: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::MaxLikelihood)]
    pub rule: RuleArg,
    #[arg(long, value_enum)]
    pub kind: Option<ObservableKind>,
}

#[derive(Debug, Args)]
pub struct DihedralArgs {
    /// `D<n>` or just `n`.
    pub group: String,
    /// Largest candidate subset intersected in the generic construction.
    #[arg(long, default_value_t = 3)]
    pub max_subset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Group {
    Abelian(GroupSpec),
    Dihedral(DihedralSpec),
}

impl Group {
    fn parse(s: &str, cap: usize) -> crate::Result<Self> {
        if s.starts_with(['D', 'd']) {
            DihedralSpec::parse_with_cap(s, cap).map(Group::Dihedral)
        } else {
            GroupSpec::parse_with_cap(s, cap).map(Group::Abelian)
        }
    }

    fn name(&self) -> String {
        match self {
            Group::Abelian(g) => g.to_string(),
            Group::Dihedral(d) => d.to_string(),
        }
    }
}

/// What a command produced: the report body and whether its checks passed.
struct Output {
    header: Header,
    body: Value,
    lines: Vec<Value>,
    passed: bool,
}

fn value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Size { .. } => EXIT_CAP,
        Error::Parse(_) | Error::Domain(_) => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let (stdout, stderr) = if e.use_stderr() { (String::new(), text) } else { (text, String::new()) };
            return CliOutcome { code, stdout, stderr };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> CliOutcome {
    let fail = |code, msg: String| CliOutcome {
        code,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    };
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return fail(EXIT_USAGE, format!("--tol must be positive, got {}", cli.tol));
    }
    let tol = Tolerances::uniform(cli.tol);
    let out = match dispatch(cli, &tol) {
        Ok(o) => o,
        Err(e) => return fail(code_of(&e), e.to_string()),
    };
    let text = render(cli.format, &out);
    let code = if out.passed { EXIT_OK } else { EXIT_CHECK_FAILED };
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => CliOutcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => fail(EXIT_USAGE, format!("cannot write {}: {e}", path.display())),
        },
        None => CliOutcome {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

fn render(format: Format, out: &Output) -> String {
    let full = value(&Report {
        header: out.header.clone(),
        result: out.body.clone(),
    });
    match format {
        Format::Json => report::to_json(&full),
        Format::Text => report::render_text(&full),
        Format::Jsonl => {
            let mut s = String::new();
            let mut push = |v: &Value| {
                s.push_str(&serde_json::to_string(v).expect("reports serialize"));
                s.push('\n');
            };
            if out.lines.is_empty() {
                push(&full);
            } else {
                push(&value(&out.header));
                out.lines.iter().for_each(&mut push);
                push(&out.body);
            }
            s
        }
    }
}

fn dispatch(cli: &Cli, tol: &Tolerances) -> crate::Result<Output> {
    let header = |cmd: &str, g: &Group| Header::new(cmd, g.name(), *tol, cli.cap);
    let done = |header, body: Value, passed| Output {
        header,
        body,
        lines: Vec::new(),
        passed,
    };
    match &cli.command {
        Command::Subgroups { group } => {
            let g = Group::parse(group, cli.cap)?;
            Ok(done(header("subgroups", &g), subgroups_body(&g)?, true))
        }
        Command::State(a) => {
            let g = Group::parse(&a.group, cli.cap)?;
            let mut h = header("state", &g);
            h.m = Some(a.m);
            Ok(done(h, state_body(&g, a)?, true))
        }
        Command::Observable(a) => {
            let g = Group::parse(&a.group, cli.cap)?;
            Ok(done(header("observable", &g), observable_body(&g, a.kind, tol)?, true))
        }
        Command::Verify(a) => {
            let spec = if a.dihedral && !a.group.starts_with(['D', 'd']) {
                format!("D{}", a.group)
            } else {
                a.group.clone()
            };
            let g = Group::parse(&spec, cli.cap)?;
            match &g {
                Group::Abelian(ga) => {
                    if a.dihedral {
                        return Err(Error::Parse(format!("{} is not dihedral", a.group)));
                    }
                    let r = verify::verify_group(ga, a.m, tol)?;
                    let mut h = header("verify", &g);
                    h.m = Some(a.m);
                    Ok(done(h, value(&r), r.passed))
                }
                Group::Dihedral(d) => {
                    let r = dihedral_impossibility(d, tol)?;
                    Ok(done(header("verify", &g), value(&r), r.passed.unwrap_or(true)))
                }
            }
        }
        Command::Game(a) => game_output(&Group::parse(&a.group, cli.cap)?, a, tol, header),
        Command::Dihedral(a) => {
            let spec = if a.group.starts_with(['D', 'd']) {
                a.group.clone()
            } else {
                format!("D{}", a.group)
            };
            let g = Group::parse(&spec, cli.cap)?;
            let Group::Dihedral(d) = &g else { unreachable!() };
            let r = dihedral_impossibility(d, tol)?;
            let cands = states::dihedral_candidate_set(d)?;
            let dens: Vec<_> = cands.iter().map(|s| s.density.clone()).collect();
            let gc = generic_construction(&dens, a.max_subset, tol)?;
            let body = serde_json::json!({
                "impossibility": value(&r),
                "generic_construction": value(&GenericConstructionJson::from(&gc)),
                "candidates": cands.iter().map(HiddenSubgroupState::name).collect::<Vec<_>>(),
            });
            Ok(done(header("dihedral", &g), body, r.passed.unwrap_or(true)))
        }
    }
}

#[derive(Serialize)]
struct SubgroupRow {
    #[serde(flatten)]
    subgroup: Value,
    index: usize,
    annihilator_order: usize,
}

fn subgroups_body(g: &Group) -> crate::Result<Value> {
    match g {
        Group::Abelian(g) => {
            let subs = abelian::enumerate_subgroups(g)?;
            let rows = subs
                .iter()
                .map(|h| {
                    Ok(SubgroupRow {
                        subgroup: value(h),
                        index: h.index(),
                        annihilator_order: abelian::annihilator(g, h)?.order(),
                    })
                })
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(serde_json::json!({ "order": g.order(), "count": rows.len(), "subgroups": value(&rows) }))
        }
        Group::Dihedral(d) => {
            let refl: Vec<Value> = d
                .reflections()
                .iter()
                .map(|h| serde_json::json!({ "label": h.label(), "order": 2, "elements": value(&h.elements()) }))
                .collect();
            Ok(serde_json::json!({ "order": d.order(), "count": refl.len(), "hidden_reflections": refl }))
        }
    }
}

fn state_body(g: &Group, a: &StateArgs) -> crate::Result<Value> {
    let states = match g {
        Group::Abelian(g) => {
            if a.k.is_some() {
                return Err(Error::Parse("--k applies to dihedral groups".into()));
            }
            let subs = abelian::enumerate_subgroups(g)?;
            let picked: Vec<_> = match &a.subgroup {
                Some(l) => vec![subs
                    .iter()
                    .find(|h| &h.label() == l)
                    .ok_or_else(|| Error::domain(format!("no subgroup labelled {l:?} in {g}")))?],
                None => subs.iter().collect(),
            };
            picked
                .into_iter()
                .map(|h| states::rho(g, h, a.m))
                .collect::<crate::Result<Vec<_>>>()?
        }
        Group::Dihedral(d) => {
            if a.subgroup.is_some() || a.m != 1 {
                return Err(Error::Parse("dihedral states take --k only, with m = 1".into()));
            }
            match a.k {
                Some(k) => vec![states::dihedral_rho(d, &d.reflection(k)?)?],
                None => states::dihedral_candidate_set(d)?,
            }
        }
    };
    let name = g.name();
    Ok(value(&states.iter().map(|s| StateJson::new(&name, s)).collect::<Vec<_>>()))
}

fn dihedral_povm(d: &DihedralSpec, kind: ObservableKind, tol: &Tolerances) -> crate::Result<Povm> {
    match kind {
        ObservableKind::Trivial => Ok(Povm::trivial(d.order())),
        ObservableKind::VSplit => {
            let pv = Subspace::span(d.order(), &[elimination::dihedral_v(d)], tol)?.projector();
            Povm::new(vec![pv.clone(), identity(d.order()) - pv])
        }
        _ => Err(Error::Parse("dihedral groups support --kind trivial or v-split".into())),
    }
}

fn abelian_povm(g: &GroupSpec, kind: ObservableKind) -> crate::Result<Povm> {
    match kind {
        ObservableKind::Class => Ok(class_observable(g).povm),
        ObservableKind::Fourier => Ok(fourier_observable(g).povm),
        ObservableKind::Trivial => Ok(Povm::trivial(g.order())),
        ObservableKind::VSplit => Err(Error::Parse("--kind v-split applies to dihedral groups".into())),
    }
}

fn candidates_and_povm(g: &Group, kind: ObservableKind, tol: &Tolerances) -> crate::Result<(Vec<HiddenSubgroupState>, Povm)> {
    match g {
        Group::Abelian(g) => Ok((states::candidate_set(g, 1)?, abelian_povm(g, kind)?)),
        Group::Dihedral(d) => Ok((states::dihedral_candidate_set(d)?, dihedral_povm(d, kind, tol)?)),
    }
}

fn observable_body(g: &Group, kind: ObservableKind, tol: &Tolerances) -> crate::Result<Value> {
    let (cands, povm) = candidates_and_povm(g, kind, tol)?;
    let dens: Vec<_> = cands.iter().map(|s| s.density.clone()).collect();
    let labels: Vec<String> = cands.iter().map(HiddenSubgroupState::name).collect();
    let classes = match (g, kind) {
        (Group::Abelian(g), ObservableKind::Class) => Some(value(&abelian::character_classes(g))),
        _ => None,
    };
    Ok(serde_json::json!({
        "kind": value(&kind),
        "classes": classes,
        "validation": value(&validate_povm(&povm, tol)),
        "efficiency": value(&efficiency_report(&dens, &labels, &povm, DEFAULT_C_MIN, tol)?),
        "optimality": value(&optimality_check(&dens, &labels, &povm, WITNESS_SAMPLES, tol)?),
    }))
}

fn game_output(
    g: &Group,
    a: &GameArgs,
    tol: &Tolerances,
    header: impl Fn(&str, &Group) -> Header,
) -> crate::Result<Output> {
    let kind = a.kind.unwrap_or(match g {
        Group::Abelian(_) => ObservableKind::Class,
        Group::Dihedral(_) => ObservableKind::VSplit,
    });
    let (cands, povm) = candidates_and_povm(g, kind, tol)?;
    let mut config = GameConfig::from_states(&cands, povm, a.seed);
    config.delta = a.delta;
    config.max_rounds = a.max_rounds;
    config.tolerances = *tol;
    config.eps_zero = tol.zero;
    config.rule = match a.rule {
        RuleArg::SoleSurvivor => DeclarationRule::SoleSurvivor,
        RuleArg::MaxLikelihood => DeclarationRule::MaxLikelihoodAtBudget,
    };
    config.validate()?;
    let mut h = header("game", g);
    h.seed = Some(a.seed);
    let secrets: Vec<usize> = match &a.secret {
        Some(l) => vec![config.secret_index(l)?],
        None => (0..config.candidates.len()).collect(),
    };
    let stats = game::tournament_for(&config, &secrets, a.trials, Exec::default())?;
    let mut lines = Vec::new();
    if a.secret.is_some() {
        let transcripts: Vec<crate::Result<game::GameTranscript>> =
            Exec::default().map_range(a.trials, |t| game::play_trial(&config, secrets[0], t));
        for tr in transcripts {
            lines.push(value(&tr?));
        }
    }
    let body = if lines.is_empty() {
        serde_json::json!({ "observable": value(&kind), "stats": value(&stats) })
    } else {
        serde_json::json!({ "observable": value(&kind), "stats": value(&stats), "transcripts": lines.clone() })
    };
    Ok(Output {
        header: h,
        body,
        lines,
        passed: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> Value {
        let mut full = vec!["hsp-elim"];
        full.extend_from_slice(args);
        let out = run(full);
        assert_eq!(out.code, 0, "{}", out.stderr);
        serde_json::from_str(&out.stdout).unwrap()
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(run_ok(&["subgroups", "Z4"])["result"]["count"], 3);
        assert_eq!(run_ok(&["subgroups", "Z2"])["result"]["count"], 2);
        assert_eq!(run(["hsp-elim", "subgroups", "Z0"]).code, EXIT_USAGE);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["hsp-elim", "verify", "Z64", "--cap", "32"]).code, EXIT_CAP);
        assert_eq!(run(["hsp-elim", "game", "Z2", "--secret", "nope"]).code, EXIT_USAGE);
        assert_eq!(run(["hsp-elim", "frobnicate"]).code, EXIT_USAGE);
        assert_eq!(run(["hsp-elim", "subgroups", "Z2", "--bogus"]).code, EXIT_USAGE);
        assert_eq!(run(["hsp-elim", "verify", "Z4", "--tol", "-1"]).code, EXIT_USAGE);
    }

    #[test]
    fn verify_reports() {
        let v = run_ok(&["verify", "Z8"]);
        assert_eq!(v["result"]["passed"], true);
        assert!((v["result"]["bounds"]["c_star"].as_f64().unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(v["header"]["m"], 1);
        let d = run_ok(&["verify", "D5", "--dihedral"]);
        assert_eq!(d["result"]["passed"], true);
        assert!(d["result"]["pairwise"].as_array().unwrap().iter().all(|p| p["dim"] == 1));
        assert_eq!(run_ok(&["verify", "5", "--dihedral"])["result"], d["result"]);
    }

    #[test]
    fn game_variants() {
        let v = run_ok(&["game", "Z2", "--secret", "full", "--trials", "1"]);
        let tr = &v["result"]["transcripts"][0];
        assert_eq!(tr["rounds_used"], 20);
        assert_eq!(tr["statuses"][0]["status"], "soft_rejected");
        let e = run_ok(&["game", "Z2", "--trials", "0"]);
        assert_eq!(e["result"]["stats"]["total_trials"], 0);
        assert_eq!(e["result"]["stats"]["overall_accuracy"], Value::Null);
        let d = run_ok(&["game", "D3", "--trials", "3", "--max-rounds", "5"]);
        assert_eq!(d["result"]["observable"], "v-split");
    }

    #[test]
    fn jsonl_and_text() {
        let out = run(["hsp-elim", "game", "Z2", "--secret", "trivial", "--trials", "2", "--format", "jsonl"]);
        assert_eq!(out.code, 0);
        let lines: Vec<&str> = out.stdout.lines().collect();
        assert_eq!(lines.len(), 4);
        for l in &lines {
            serde_json::from_str::<Value>(l).unwrap();
        }
        let t = run(["hsp-elim", "subgroups", "Z2", "--format", "text"]);
        assert!(t.stdout.contains("count: 2"));
    }

    #[test]
    fn states_and_observables() {
        let s = run_ok(&["state", "Z4", "--subgroup", "<2>"]);
        assert_eq!(s["result"][0]["dim"], 4);
        assert_eq!(run_ok(&["state", "D3", "--k", "1"])["result"][0]["subgroup"], "(1,1)");
        assert_eq!(run_ok(&["state", "Z2", "--m", "2"])["result"].as_array().unwrap().len(), 2);
        let o = run_ok(&["observable", "Z4"]);
        assert_eq!(o["result"]["optimality"]["optimal"], true);
        let t = run_ok(&["observable", "Z2", "--kind", "trivial"]);
        assert_eq!(t["result"]["efficiency"]["c_star"], 0.0);
        assert_eq!(run(["hsp-elim", "observable", "D3", "--kind", "class"]).code, EXIT_USAGE);
    }

    #[test]
    fn dihedral_command() {
        let d = run_ok(&["dihedral", "D3"]);
        assert_eq!(d["result"]["generic_construction"]["multi_span_rank"], 1);
    }
}
