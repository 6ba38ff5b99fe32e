//! Command-line front end. Every command produces a [`RunReport`] written
//! as pretty JSON to stdout or to the `--json` path.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::action::{
    check_admissible, check_g_strict, orbits, quotient_complex, validate_action, ComplexAction, GroupAction,
};
use crate::complex::{build_dual_complex, DeltaComplex};
use crate::covering::{covering_stats, total_space, validate_cocycle, CoveringDatum};
use crate::error::{Error, Result};
use crate::homology::{chain_complex, weight_complex_of, Coefficients, HomologyResult};
use crate::incidence::IncidenceStructure;
use crate::mckay::{self, McKayInput};
use crate::pi1::fundamental_group;

/// Environment variable redirecting relative `--json` paths.
pub const OUT_DIR_VAR: &str = "DUALCX_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dualcx",
    version,
    about = "Dual complexes, their homology, fundamental groups, quotients and coverings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Comma-separated coefficient rings: z, q, zN (e.g. z2), tq.
    #[arg(long, global = true, value_name = "LIST")]
    pub coefficients: Option<String>,

    /// Work with the quotient by the group action in the input.
    #[arg(long, global = true)]
    pub quotient: bool,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true, value_name = "OUT")]
    pub json: Option<PathBuf>,

    /// Exponential characteristic; Z/n coefficients must be prime to it.
    #[arg(long = "char", global = true, value_name = "P")]
    pub characteristic: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an incidence structure and its action, a covering datum over a
    /// base, or a comparison input.
    Validate {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Homology tables of the dual complex or of its quotient.
    Homology { file: PathBuf },
    /// Edge-path presentation of the fundamental group.
    Pi1 { file: PathBuf },
    /// The quotient Δ-complex by the group action.
    Quotient { file: PathBuf },
    /// Total space and monodromy of a covering, from a bundle file or from a
    /// base file and a datum file.
    Covering {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
    },
    /// Compare an equivariant configuration modulo its group with another.
    Mckay { file: PathBuf },
    /// Simplex counts and Euler characteristic.
    Euler { file: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Validate { .. } => "validate",
            Self::Homology { .. } => "homology",
            Self::Pi1 { .. } => "pi1",
            Self::Quotient { .. } => "quotient",
            Self::Covering { .. } => "covering",
            Self::Mckay { .. } => "mckay",
            Self::Euler { .. } => "euler",
        }
    }

    fn files(&self) -> Vec<&Path> {
        match self {
            Self::Validate { files } | Self::Covering { files } => files.iter().map(PathBuf::as_path).collect(),
            Self::Homology { file }
            | Self::Pi1 { file }
            | Self::Quotient { file }
            | Self::Mckay { file }
            | Self::Euler { file } => vec![file.as_path()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub results: Value,
    pub diagnostics: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }
}

/// Result of one invocation before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    /// Absent when the input could not be read or parsed.
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_input_error() || matches!(e, Error::InvalidCoefficients(_)) {
        EXIT_INPUT
    } else {
        EXIT_DOMAIN
    }
}

/// The parsed contents of an input file.
enum Document {
    Incidence { structure: IncidenceStructure, group: Option<GroupAction> },
    Covering { base: IncidenceStructure, datum: CoveringDatum },
    Comparison(Box<McKayInput>),
}

fn classify(value: &Value) -> Result<Document> {
    let obj = value.as_object().ok_or_else(|| Error::Malformed("top level must be a JSON object".into()))?;
    if obj.contains_key("equivariant") {
        return Ok(Document::Comparison(Box::new(McKayInput::from_value(value)?)));
    }
    if let Some(base) = obj.get("base") {
        let datum = obj.get("datum").ok_or_else(|| Error::Malformed("covering bundle needs `datum`".into()))?;
        return Ok(Document::Covering {
            base: IncidenceStructure::from_value(base)?,
            datum: CoveringDatum::from_value(datum)?,
        });
    }
    let structure = IncidenceStructure::from_value(value)?;
    let group = GroupAction::from_document(value, &structure)?;
    Ok(Document::Incidence { structure, group })
}

struct Context<'a> {
    cli: &'a Cli,
    values: Vec<Value>,
    diagnostics: Vec<String>,
}

impl Context<'_> {
    fn warn(&mut self, message: impl std::fmt::Display) {
        self.diagnostics.push(format!("warning: {message}"));
    }

    fn coefficients(&self, default: &str) -> Result<Vec<Coefficients>> {
        let p = self.cli.characteristic.unwrap_or(1);
        self.cli
            .coefficients
            .as_deref()
            .unwrap_or(default)
            .split(',')
            .map(|t| Coefficients::parse(t.trim(), p))
            .collect()
    }

    fn incidence(&self, i: usize) -> Result<(IncidenceStructure, Option<GroupAction>)> {
        match classify(&self.values[i])? {
            Document::Incidence { structure, group } => Ok((structure, group)),
            _ => Err(Error::Malformed("expected an incidence structure".into())),
        }
    }

    /// The action of the input, with strictness problems reported as
    /// warnings.
    fn action(&mut self, s: &IncidenceStructure, group: Option<GroupAction>) -> Result<ComplexAction> {
        let group = group.ok_or_else(|| Error::InvalidAction("input has no group action".into()))?;
        let action = ComplexAction::new(s, &group)?;
        for v in check_g_strict(s, &action) {
            self.warn(format!("action is not strict: {v}"));
        }
        Ok(action)
    }
}

fn check_characteristic(p: u64) -> Result<()> {
    let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
    if p == 1 || prime {
        Ok(())
    } else {
        Err(Error::InvalidCoefficients(format!("exponential characteristic {p} must be 1 or a prime")))
    }
}

fn homology_table(results: &[HomologyResult]) -> Value {
    Value::Array(
        results
            .iter()
            .map(|r| {
                let mut v = serde_json::to_value(r).expect("plain data serializes");
                v["summary"] = json!(r.describe());
                v
            })
            .collect(),
    )
}

fn validate_incidence(ctx: &mut Context, s: &IncidenceStructure, group: Option<GroupAction>) -> (Value, bool) {
    let report = s.validate();
    let mut clean = report.is_clean();
    let mut out = json!({ "incidence": report });
    if let Some(g) = group {
        let action_report = validate_action(s, &g);
        clean &= action_report.is_clean();
        out["action"] = serde_json::to_value(&action_report).expect("plain data serializes");
        if clean {
            match ComplexAction::new(s, &g) {
                Ok(action) => {
                    let strict = check_g_strict(s, &action);
                    let admissible = check_admissible(&action);
                    for v in &strict {
                        ctx.warn(format!("action is not strict: {v}"));
                    }
                    for v in &admissible {
                        ctx.warn(format!("quotient is not a Δ-complex: {v}"));
                    }
                    out["group_order"] = json!(action.order());
                    out["strict"] = json!(strict.is_empty());
                    out["admissible"] = json!(admissible.is_empty());
                }
                Err(e) => {
                    clean = false;
                    out["error"] = json!(e.to_string());
                }
            }
        }
    }
    out["clean"] = json!(clean);
    (out, clean)
}

fn cmd_validate(ctx: &mut Context) -> Result<(Value, bool)> {
    if ctx.values.len() == 2 {
        let (base, _) = ctx.incidence(0)?;
        let datum = CoveringDatum::from_value(&ctx.values[1])?;
        return validate_covering(ctx, &base, &datum);
    }
    match classify(&ctx.values[0])? {
        Document::Incidence { structure, group } => {
            let (mut out, clean) = validate_incidence(ctx, &structure, group);
            out["kind"] = json!("incidence");
            Ok((out, clean))
        }
        Document::Covering { base, datum } => validate_covering(ctx, &base, &datum),
        Document::Comparison(input) => {
            let (eq, eq_clean) = validate_incidence(ctx, &input.equivariant, Some(input.group.clone()));
            let (q, q_clean) = validate_incidence(ctx, &input.quotient, None);
            let clean = eq_clean && q_clean;
            Ok((json!({"kind": "comparison", "equivariant": eq, "quotient": q, "clean": clean}), clean))
        }
    }
}

fn validate_covering(ctx: &mut Context, base: &IncidenceStructure, datum: &CoveringDatum) -> Result<(Value, bool)> {
    let (mut out, clean) = validate_incidence(ctx, base, None);
    let mut result = json!({"kind": "covering", "base": out.take()});
    if !clean {
        result["clean"] = json!(false);
        return Ok((result, false));
    }
    let c = build_dual_complex(base)?;
    let report = validate_cocycle(&c, datum)?;
    let clean = report.is_clean();
    result["cocycle"] = serde_json::to_value(&report).expect("plain data serializes");
    result["clean"] = json!(clean);
    Ok((result, clean))
}

fn cmd_homology(ctx: &mut Context) -> Result<Value> {
    let coefficients = ctx.coefficients("z")?;
    let (s, group) = ctx.incidence(0)?;
    if ctx.cli.quotient {
        let action = ctx.action(&s, group)?;
        let counts = orbits(&action).counts();
        let results =
            coefficients.iter().map(|&m| weight_complex_of(&action, m)?.homology()).collect::<Result<Vec<_>>>()?;
        Ok(json!({
            "complex": "orbit",
            "group_order": action.order(),
            "counts": counts,
            "euler_characteristic": alternating_sum(&counts),
            "homology": homology_table(&results),
        }))
    } else {
        let c = build_dual_complex(&s)?;
        let cc = chain_complex(&c);
        let results =
            coefficients.iter().map(|&m| cc.clone().with_coefficients(m).homology()).collect::<Result<Vec<_>>>()?;
        Ok(json!({
            "complex": "dual",
            "counts": c.counts(),
            "euler_characteristic": c.euler_characteristic(),
            "homology": homology_table(&results),
        }))
    }
}

fn alternating_sum(counts: &[usize]) -> i64 {
    counts.iter().enumerate().map(|(a, &n)| if a % 2 == 0 { n as i64 } else { -(n as i64) }).sum()
}

/// The dual complex, or its quotient with `--quotient`.
fn working_complex(ctx: &mut Context) -> Result<DeltaComplex> {
    let (s, group) = ctx.incidence(0)?;
    if ctx.cli.quotient {
        let action = ctx.action(&s, group)?;
        Ok(quotient_complex(&action)?.complex)
    } else {
        build_dual_complex(&s)
    }
}

fn cmd_pi1(ctx: &mut Context) -> Result<Value> {
    let c = working_complex(ctx)?;
    let g = fundamental_group(&c, 0)?;
    let mut out = serde_json::to_value(&g).expect("plain data serializes");
    out["abelianization_summary"] = json!(g.abelianization.describe(Coefficients::Integers));
    out["presentation_text"] = json!(g.presentation.to_string());
    out["simplified_text"] = json!(g.simplified.to_string());
    Ok(out)
}

fn cells_by_dimension(c: &DeltaComplex) -> Vec<Vec<String>> {
    c.counts().iter().enumerate().map(|(a, &n)| (0..n).map(|i| c.key(a, i)).collect()).collect()
}

fn cmd_quotient(ctx: &mut Context) -> Result<Value> {
    let (s, group) = ctx.incidence(0)?;
    let action = ctx.action(&s, group)?;
    let q = quotient_complex(&action)?;
    Ok(json!({
        "group_order": action.order(),
        "source_counts": action.complex().counts(),
        "counts": q.complex.counts(),
        "euler_characteristic": q.complex.euler_characteristic(),
        "cells": cells_by_dimension(&q.complex),
        "simplicial_identities_hold": q.complex.check_simplicial_identities().is_empty(),
    }))
}

fn cmd_covering(ctx: &mut Context) -> Result<Value> {
    let (base, datum) = if ctx.values.len() == 2 {
        (ctx.incidence(0)?.0, CoveringDatum::from_value(&ctx.values[1])?)
    } else {
        match classify(&ctx.values[0])? {
            Document::Covering { base, datum } => (base, datum),
            _ => return Err(Error::Malformed("expected a covering bundle with `base` and `datum`".into())),
        }
    };
    let c = build_dual_complex(&base)?;
    let cover = total_space(&c, &datum)?;
    let stats = covering_stats(&cover, &c);
    if !stats.constant_fiber {
        ctx.warn("fibers have different sizes over different components of the base");
    }
    let mut out = serde_json::to_value(&stats).expect("plain data serializes");
    out["base_counts"] = json!(c.counts());
    out["cover_counts"] = json!(cover.complex.counts());
    out["cover_cells"] = json!(cells_by_dimension(&cover.complex));
    Ok(out)
}

fn cmd_mckay(ctx: &mut Context) -> Result<Value> {
    let mut input = match classify(&ctx.values[0])? {
        Document::Comparison(input) => *input,
        _ => return Err(Error::Malformed("expected `equivariant` and `quotient` sections".into())),
    };
    if let Some(p) = ctx.cli.characteristic {
        input.characteristic = p;
    }
    if ctx.cli.coefficients.is_some() {
        input.coefficients = ctx.coefficients("z")?;
    } else {
        for m in &input.coefficients {
            Coefficients::parse(&m.token(), input.characteristic)?;
        }
    }
    let report = mckay::run(&input)?;
    for v in &report.strictness_violations {
        ctx.warn(format!("action is not strict: {v}"));
    }
    Ok(serde_json::to_value(&report).expect("plain data serializes"))
}

fn cmd_euler(ctx: &mut Context) -> Result<Value> {
    let (s, group) = ctx.incidence(0)?;
    let counts = if ctx.cli.quotient {
        let action = ctx.action(&s, group)?;
        orbits(&action).counts()
    } else {
        build_dual_complex(&s)?.counts()
    };
    Ok(json!({"counts": counts, "euler_characteristic": alternating_sum(&counts)}))
}

fn read_inputs(paths: &[&Path]) -> Result<(Vec<InputDigest>, Vec<Value>)> {
    let mut digests = Vec::with_capacity(paths.len());
    let mut values = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        digests.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        let text =
            String::from_utf8(bytes).map_err(|_| Error::Malformed(format!("{} is not UTF-8", path.display())))?;
        values.push(serde_json::from_str(&text)?);
    }
    Ok((digests, values))
}

/// Runs a parsed command line without touching stdout or the report file.
pub fn execute(cli: &Cli) -> Outcome {
    let command = cli.command.name();
    let fail = |e: Error| Outcome { exit_code: exit_code_for(&e), report: None, error: Some(e.to_string()) };
    if let Some(p) = cli.characteristic {
        if let Err(e) = check_characteristic(p) {
            return fail(e);
        }
    }
    let (inputs, values) = match read_inputs(&cli.command.files()) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let mut ctx = Context { cli, values, diagnostics: Vec::new() };
    let result = match &cli.command {
        Command::Validate { .. } => {
            cmd_validate(&mut ctx).map(|(v, clean)| (v, if clean { EXIT_OK } else { EXIT_DOMAIN }))
        }
        Command::Homology { .. } => cmd_homology(&mut ctx).map(|v| (v, EXIT_OK)),
        Command::Pi1 { .. } => cmd_pi1(&mut ctx).map(|v| (v, EXIT_OK)),
        Command::Quotient { .. } => cmd_quotient(&mut ctx).map(|v| (v, EXIT_OK)),
        Command::Covering { .. } => cmd_covering(&mut ctx).map(|v| (v, EXIT_OK)),
        Command::Mckay { .. } => cmd_mckay(&mut ctx).map(|v| (v, EXIT_OK)),
        Command::Euler { .. } => cmd_euler(&mut ctx).map(|v| (v, EXIT_OK)),
    };
    let mut diagnostics = ctx.diagnostics;
    match result {
        Ok((results, exit_code)) => Outcome {
            exit_code,
            report: Some(RunReport { command: command.into(), inputs, results, diagnostics }),
            error: None,
        },
        Err(e) if exit_code_for(&e) == EXIT_INPUT => fail(e),
        Err(e) => {
            diagnostics.push(format!("error: {e}"));
            let report =
                RunReport { command: command.into(), inputs, results: json!({"error": e.to_string()}), diagnostics };
            Outcome { exit_code: EXIT_DOMAIN, report: Some(report), error: Some(e.to_string()) }
        }
    }
}

fn output_path(json: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if json.is_relative() => Path::new(&dir).join(json),
        _ => json.to_path_buf(),
    }
}

/// Parses arguments, runs the command and writes its report. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = execute(&cli);
    if let Some(msg) = &outcome.error {
        eprintln!("error: {msg}");
    }
    if let Some(report) = &outcome.report {
        let text = report.to_json();
        match &cli.json {
            Some(path) => {
                let path = output_path(path);
                let written = path
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .map_or(Ok(()), std::fs::create_dir_all)
                    .and_then(|()| std::fs::write(&path, text));
                if let Err(e) = written {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            }
            None => print!("{text}"),
        }
    }
    outcome.exit_code
}
