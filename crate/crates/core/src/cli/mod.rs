//! Command-line front end: argument handling, stage orchestration with an
//! on-disk artifact cache, and report emission.

pub mod cache;
pub mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::blowup::{search_blowups, BlowupSpec};
use crate::analysis::count::{second_order_policy, Cell};
use crate::analysis::hsolve::SolveOptions;
use crate::analysis::{first_order_count, second_order_count, Ladder, PivotPolicy, SecondOrderCount, SummaryTable};
use crate::centercheck::is_piecewise_center;
use crate::error::{Error, Result};
use crate::expansion::symbolic_tau::difference_symbolic_tau;
use crate::expansion::{difference_jet, DifferenceJet, Route};
use crate::numeric::{
    center_closure, designed_zero_check, displacement, eval_jet, grid, locate_cycles, pseudo_hopf_demo,
    NumericParams, ParamsFile, Precision,
};
use crate::systems::{make_piecewise, parse_tau, CaseName, LoudSystem};
use crate::trigcalc::coeff::format_scientific;
use crate::trigcalc::serial::JsonCoeff;
use crate::trigcalc::{format_rational, parse_rational, rat};
use cache::Cache;

/// Largest truncation order accepted from the command line.
pub const N_MAX: usize = 40;

#[derive(Parser, Debug)]
#[command(name = "pqcycles", version, about = "Limit-cycle lower bounds for piecewise quadratic perturbations of planar centers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expand the difference function of a case into an exact jet.
    Expand(ExpandArgs),
    /// Build the first-order independence ladder of a jet.
    Ladder(LadderArgs),
    /// Solve and certify the second-order blow-up of a case.
    Blowup(BlowupArgs),
    /// Lower bound on the number of limit cycles.
    Count(CountArgs),
    /// Compare a jet against the integrated flow.
    VerifyNumeric(VerifyArgs),
    /// Decide whether two systems glue into a piecewise center.
    CenterCheck(CenterArgs),
    /// Show the extra cycle born from the sliding segment.
    PseudoHopf(PseudoHopfArgs),
    /// First- and second-order summary table with a diff against the expected counts.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    /// Case name: s1..s4 or s1s2.
    #[arg(long, alias = "case")]
    pub system: String,
    /// Line parameter as an exact fraction `p/q`, or `symbolic` (order 1 only).
    #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    /// Truncation order in `r`.
    #[arg(long = "N", default_value_t = 15)]
    pub n: usize,
    /// modular or exact.
    #[arg(long, default_value = "modular")]
    pub route: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LadderArgs {
    /// Jet document written by `expand`.
    #[arg(long, conflicts_with_all = ["case", "tau"])]
    pub jet: Option<PathBuf>,
    /// Compute the order-1 jet of this case instead of reading one.
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
    #[arg(long = "N", default_value_t = 15)]
    pub n: usize,
    /// canonical or paper.
    #[arg(long, default_value = "canonical")]
    pub policy: String,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BlowupArgs {
    #[arg(long)]
    pub case: String,
    /// Order-2 jet at τ = 1/2; computed when absent.
    #[arg(long)]
    pub jet: Option<PathBuf>,
    #[arg(long = "N", default_value_t = 15)]
    pub n: usize,
    /// Working precision of the certified solve, in decimal digits.
    #[arg(long, default_value_t = 50)]
    pub digits: u32,
    /// Seed of the multistart search.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub starts: usize,
    /// Instead of the built-in blow-up, try other choices of the blown-up
    /// free coefficients and stop after this many certified ones.
    #[arg(long)]
    pub search: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub case: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: u8,
    #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long = "N", default_value_t = 15)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub digits: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub jet: PathBuf,
    /// Parameter file (JSON: tau, eps, b, precision, values).
    #[arg(long, required_unless_present = "designed")]
    pub params: Option<PathBuf>,
    /// Overrides the `eps` of the parameter file.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Radii `lo:hi:n`.
    #[arg(long, default_value = "0.02:0.3:40")]
    pub grid: String,
    /// Space the grid geometrically.
    #[arg(long)]
    pub log: bool,
    /// double or extended; overrides the parameter file.
    #[arg(long)]
    pub precision: Option<String>,
    /// Place first-order zeros at `r0 · q^k` (as `r0:q`) and look for them
    /// at extended precision instead of sampling a parameter file.
    #[arg(long)]
    pub designed: Option<String>,
    /// Also write a whitespace-separated table for plotting.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CenterArgs {
    #[arg(long)]
    pub plus: String,
    #[arg(long)]
    pub minus: String,
    #[arg(long, default_value = "1/2", allow_hyphen_values = true)]
    pub tau: String,
    /// Series order of the landing-map comparison.
    #[arg(long, default_value_t = 12)]
    pub order: usize,
    /// Radii for the numeric closure check, comma separated.
    #[arg(long, default_value = "0.02,0.05,0.1")]
    pub closure: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Origin {
    Stable,
    Unstable,
}

#[derive(Args, Debug)]
pub struct PseudoHopfArgs {
    #[arg(long)]
    pub case: String,
    /// Constant added to the second component of the minus side.
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Parameter file at τ = 0. By default a+10 = a-10 = -1 for a stable
    /// origin and +1 for an unstable one, everything else zero.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "stable")]
    pub origin: Origin,
    /// Logarithmic radii `lo:hi:n`.
    #[arg(long, default_value = "1e-7:1e-2:60")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long = "N", default_value_t = 15)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub digits: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Restrict to these cases (comma separated); the others show as missing.
    #[arg(long)]
    pub cases: Option<String>,
    /// Replace a computed cell, as `case=first/second`, to exercise the diff.
    #[arg(long)]
    pub inject: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the command line and returns the process exit status.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let cmd = Cli::command().args_override_self(true).mut_subcommands(|s| s.args_override_self(true));
    let cli = match cmd.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let cache = Cache::from_env();
    match dispatch(cli.command, &cache, stdout) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, cache: &Cache, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Expand(a) => expand(a, cache, stdout),
        Command::Ladder(a) => ladder(a, cache, stdout),
        Command::Blowup(a) => blowup(a, cache, stdout),
        Command::Count(a) => count(a, cache, stdout),
        Command::VerifyNumeric(a) => verify_numeric(a, stdout),
        Command::CenterCheck(a) => center_check(a, stdout),
        Command::PseudoHopf(a) => pseudo_hopf(a, stdout),
        Command::Table(a) => table(a, cache, stdout),
    }
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Stage { .. } => e,
        other => Error::Stage { stage: name.to_string(), source: Box::new(other) },
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &Value, stdout: &mut dyn Write) -> Result<()> {
    emit(out, &serde_json::to_string_pretty(v)?, stdout)
}

fn validate_n(n: usize) -> Result<usize> {
    if (1..=N_MAX).contains(&n) {
        Ok(n)
    } else {
        Err(Error::Invalid(format!("N must lie in 1..={N_MAX}, got {n}")))
    }
}

fn validate_digits(d: u32) -> Result<u32> {
    if (20..=400).contains(&d) {
        Ok(d)
    } else {
        Err(Error::Invalid(format!("digits must lie in 20..=400, got {d}")))
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Order-`order` jet of a case, through the cache.
pub fn cached_jet(cache: &Cache, name: CaseName, tau: &BigRational, order: usize, n: usize) -> Result<DifferenceJet> {
    let inputs = json!({ "system": name.key(), "tau": format_rational(tau), "order": order, "N": n });
    let v = cache.get_or_compute("jet", &inputs, || {
        let pc = make_piecewise(name, tau)?;
        Ok(difference_jet(&pc, order, n, Route::Modular)?.to_json())
    })?;
    DifferenceJet::from_json(&v)
}

fn expand(a: ExpandArgs, cache: &Cache, stdout: &mut dyn Write) -> Result<i32> {
    let name: CaseName = a.system.parse()?;
    let n = validate_n(a.n)?;
    let route: Route = a.route.parse()?;
    if a.tau == "symbolic" {
        if a.order != 1 {
            return Err(Error::Invalid("symbolic τ is available at order 1 only".into()));
        }
        let tj = stage("expand", difference_symbolic_tau(name, n))?;
        let psi1: Vec<Value> = tj
            .psi1
            .iter()
            .map(|t| json!({ "num": t.num.to_json(), "den": format!("(1+tau^2)^{}", t.den_pow), "den_pow": t.den_pow }))
            .collect();
        let doc = json!({ "schema": "pqcycles.tau-jet/1", "system": name.key(), "order": 1, "N": n, "psi1": psi1 });
        emit_json(a.out.as_deref(), &doc, stdout)?;
        return Ok(0);
    }
    let tau = parse_tau(&a.tau)?;
    let jet = if route == Route::Modular {
        stage("expand", cached_jet(cache, name, &tau, a.order as usize, n))?
    } else {
        let pc = stage("expand", make_piecewise(name, &tau))?;
        stage("expand", difference_jet(&pc, a.order as usize, n, route))?
    };
    emit_json(a.out.as_deref(), &jet.to_json(), stdout)?;
    Ok(0)
}

/// Machine-readable ladder report.
pub fn ladder_json(l: &Ladder, policy: PivotPolicy) -> Result<Value> {
    let count = first_order_count(l)?;
    let dependent: BTreeMap<String, String> =
        l.dependent_rows().into_iter().filter_map(|j| Some((j.to_string(), l.render_row(j)?))).collect();
    Ok(json!({
        "schema": "pqcycles.ladder/1",
        "system": l.name.key(),
        "tau": format_rational(&l.tau),
        "N": l.n,
        "policy": policy,
        "rows": l.rows,
        "pivots": l.pivots().iter().map(|p| crate::trigcalc::Symbol::Pert(*p).to_string()).collect::<Vec<_>>(),
        "free_parameters": l.free_parameters().iter().map(|p| crate::trigcalc::Symbol::Pert(*p).to_string()).collect::<Vec<_>>(),
        "free_count": l.free_count,
        "dependent": dependent,
        "count": count,
    }))
}

fn ladder(a: LadderArgs, cache: &Cache, stdout: &mut dyn Write) -> Result<i32> {
    let policy: PivotPolicy = a.policy.parse()?;
    let jet = match (&a.jet, &a.case) {
        (Some(p), None) => stage("ladder", DifferenceJet::from_json(&read_json(p)?))?,
        (None, Some(c)) => {
            let tau = parse_tau(a.tau.as_deref().unwrap_or("1/2"))?;
            stage("expand", cached_jet(cache, c.parse()?, &tau, 1, validate_n(a.n)?))?
        }
        _ => return Err(Error::Invalid("give either --jet or --case".into())),
    };
    let l = stage("ladder", Ladder::build(&jet, policy))?;
    let doc = stage("ladder", ladder_json(&l, policy))?;
    match a.format {
        Format::Json => emit_json(a.out.as_deref(), &doc, stdout)?,
        Format::Text => {
            let mut s = format!("{} at tau = {}, N = {}, {} policy\n", l.name, format_rational(&l.tau), l.n, a.policy);
            for r in &l.rows {
                s.push_str(&l.render_row(r.j).unwrap_or_default());
                s.push('\n');
            }
            s.push_str(&format!("free coefficients: {}\n", l.free_count));
            emit(a.out.as_deref(), &s, stdout)?;
        }
    }
    Ok(0)
}

fn solve_options(digits: u32, seed: u64, starts: usize) -> Result<SolveOptions> {
    Ok(SolveOptions { digits: validate_digits(digits)?, seed, starts, ..Default::default() })
}

fn order2_jet(cache: &Cache, name: CaseName, path: Option<&Path>, n: usize) -> Result<DifferenceJet> {
    let jet = match path {
        Some(p) => DifferenceJet::from_json(&read_json(p)?)?,
        None => cached_jet(cache, name, &rat(1, 2), 2, validate_n(n)?)?,
    };
    if jet.name != name || jet.order < 2 || jet.tau != rat(1, 2) {
        return Err(Error::Invalid(format!("blow-up needs an order-2 jet of {name} at tau = 1/2")));
    }
    Ok(jet)
}

fn blowup(a: BlowupArgs, cache: &Cache, stdout: &mut dyn Write) -> Result<i32> {
    let name: CaseName = a.case.parse()?;
    let opt = solve_options(a.digits, a.seed, a.starts)?;
    let jet = stage("expand", order2_jet(cache, name, a.jet.as_deref(), a.n))?;
    let ladder = stage("ladder", Ladder::build(&jet, second_order_policy(name)))?;
    let spec = stage("blowup", BlowupSpec::for_case(name))?;
    if let Some(k) = a.search {
        let found = stage("blowup", search_blowups(&jet, &ladder, &spec, &opt, k))?;
        let doc = json!({ "schema": "pqcycles.blowup-search/1", "system": name.key(), "limit": k, "certified": found });
        emit_json(a.out.as_deref(), &doc, stdout)?;
        return Ok(0);
    }
    let inputs = json!({ "system": name.key(), "N": jet.n, "spec": spec, "digits": opt.digits, "seed": opt.seed, "starts": opt.starts });
    let sol = cache.get_or_compute("hsolve", &inputs, || {
        let h = crate::analysis::blowup::h_system(&jet, &ladder, &spec)?;
        Ok(serde_json::to_value(crate::analysis::hsolve::solve_h_system(&h, &opt)?)?)
    });
    let sol: crate::analysis::hsolve::HSolution = serde_json::from_value(stage("blowup", sol)?)?;
    let certified = sol.certified();
    match a.format {
        Format::Json => {
            let doc = json!({ "schema": "pqcycles.blowup/1", "system": name.key(), "spec": spec, "solution": sol, "certified": certified });
            emit_json(a.out.as_deref(), &doc, stdout)?;
        }
        Format::Text => emit(a.out.as_deref(), &render_solution(&sol), stdout)?,
    }
    if !certified {
        return Err(Error::Stage {
            stage: "blowup".into(),
            source: Box::new(Error::Certificate(format!(
                "{name}: residual {:.3e} (bound {:.1e}), scaled determinant {:.3e}, h_{{{},0}} = {:.3e}",
                sol.residual, sol.residual_bound, sol.scaled_det, sol.extra_row, sol.extra_value
            ))),
        });
    }
    Ok(0)
}

fn render_solution(sol: &crate::analysis::hsolve::HSolution) -> String {
    let mut s = format!("{}: h-system solution at {} digits\n", sol.case, sol.digits);
    for (u, v) in sol.unknowns.iter().zip(&sol.values_f64) {
        s.push_str(&format!("  {u:<8} {v:.9e}\n"));
    }
    s.push_str(&format!(
        "  residual {:.3e} (bound {:.1e}), scaled det {:.9e}, h_{},0 = {:.9e}\n",
        sol.residual, sol.residual_bound, sol.scaled_det, sol.extra_row, sol.extra_value
    ));
    s
}

/// Second-order count of a case through the cache; certificate failures
/// are cached as well, so reruns report them without re-solving.
pub fn cached_second_order(cache: &Cache, name: CaseName, n: usize, opt: &SolveOptions) -> Result<SecondOrderCount> {
    let inputs = json!({ "system": name.key(), "N": n, "digits": opt.digits, "seed": opt.seed, "starts": opt.starts });
    let v = cache.get_or_compute("count2", &inputs, || {
        let jet = cached_jet(cache, name, &rat(1, 2), 2, n)?;
        Ok(match second_order_count(&jet, opt) {
            Ok(c) => json!({ "ok": c }),
            Err(Error::Certificate(m)) => json!({ "certificate_missing": m }),
            Err(e) => return Err(e),
        })
    })?;
    match v.get("ok") {
        Some(ok) => Ok(serde_json::from_value(ok.clone())?),
        None => Err(Error::Certificate(v["certificate_missing"].as_str().unwrap_or("").to_string())),
    }
}

fn count(a: CountArgs, cache: &Cache, stdout: &mut dyn Write) -> Result<i32> {
    let name: CaseName = a.case.parse()?;
    let tau = parse_tau(&a.tau)?;
    let n = validate_n(a.n)?;
    let doc = if a.order == 1 {
        let jet = stage("expand", cached_jet(cache, name, &tau, 1, n))?;
        let l = stage("ladder", Ladder::build(&jet, PivotPolicy::Canonical))?;
        let report = stage("count", first_order_count(&l))?;
        json!({ "schema": "pqcycles.count/1", "report": report })
    } else {
        if tau != rat(1, 2) {
            return Err(Error::Invalid("second-order counts are defined at tau = 1/2".into()));
        }
        let opt = solve_options(a.digits, a.seed, 400)?;
        let c = stage("count", cached_second_order(cache, name, n, &opt))?;
        json!({ "schema": "pqcycles.count/1", "report": c.report, "blowup": c.blowup })
    };
    match a.format {
        Format::Json => emit_json(a.out.as_deref(), &doc, stdout)?,
        Format::Text => {
            let r = &doc["report"];
            let mut s = format!(
                "{:<8} {:>6} {:>6} {:>6} {:>6} {:>12} {:>6}\n",
                "system", "tau", "order", "free", "zeros", "pseudo-Hopf", "total"
            );
            s.push_str(&format!(
                "{:<8} {:>6} {:>6} {:>6} {:>6} {:>12} {:>6}\n",
                r["system"].as_str().unwrap_or(""),
                r["tau"].as_str().unwrap_or(""),
                r["order"].to_string(),
                r["free_count"].to_string(),
                r["simple_zeros"].to_string(),
                r["pseudo_hopf"].to_string(),
                r["total"].to_string()
            ));
            if let Ok(sol) = serde_json::from_value::<crate::analysis::hsolve::HSolution>(doc["blowup"]["solution"].clone()) {
                s.push_str(&render_solution(&sol));
            }
            emit(a.out.as_deref(), &s, stdout)?;
        }
    }
    Ok(0)
}

/// Parses `lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Parse(format!("grid `{s}` is not lo:hi:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Error::Invalid(format!("grid `{s}` needs 0 < lo < hi and n ≥ 2")));
    }
    Ok((lo, hi, n))
}

fn sig10(v: f64) -> String {
    format!("{v:.9e}")
}

#[derive(Serialize, Deserialize)]
struct VerifySample {
    r: f64,
    delta: Option<f64>,
    predicted: f64,
    psi1: f64,
    psi2: f64,
    error: Option<String>,
}

fn verify_numeric(a: VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let jet = stage("verify-numeric", DifferenceJet::from_json(&read_json(&a.jet)?))?;
    if let Some(d) = &a.designed {
        let (r0, q) = d.split_once(':').ok_or_else(|| Error::Parse(format!("--designed `{d}` is not r0:q")))?;
        let (r0, q) = (parse_rational(r0.trim())?, parse_rational(q.trim())?);
        let l = stage("ladder", Ladder::build(&jet, PivotPolicy::Canonical))?;
        let check = stage("verify-numeric", designed_zero_check(&l, &r0, &q, a.eps.unwrap_or(1e-20), 120))?;
        let doc = json!({ "schema": "pqcycles.designed-zeros/1", "check": check });
        emit_json(a.out.as_deref(), &doc, stdout)?;
        return Ok(0);
    }
    let path = a.params.as_ref().expect("clap enforces --params");
    let file: ParamsFile = serde_json::from_value(read_json(path)?)?;
    let mut p = stage("verify-numeric", file.into_params())?;
    if p.tau != jet.tau {
        return Err(Error::Invalid(format!(
            "parameter file has tau = {}, the jet tau = {}",
            format_rational(&p.tau),
            format_rational(&jet.tau)
        )));
    }
    if let Some(e) = a.eps {
        p.eps = e;
    }
    match a.precision.as_deref() {
        None => {}
        Some("double") => p.precision = Precision::Double,
        Some("extended") => p = p.extended(),
        Some(o) => return Err(Error::Parse(format!("unknown precision `{o}` (double|extended)"))),
    }
    let (lo, hi, n) = parse_grid(&a.grid)?;
    let radii = grid(lo, hi, n, a.log);
    let samples: Vec<VerifySample> = radii
        .par_iter()
        .map(|&r| {
            let (psi1, psi2) = eval_jet(&jet, &p.values, r);
            let predicted = p.eps * psi1 + 0.5 * p.eps * p.eps * psi2;
            let (delta, error) = match displacement(jet.name, &p, r) {
                Ok(d) => (Some(d.delta), None),
                Err(e) => (None, Some(e.to_string())),
            };
            VerifySample { r, delta, predicted, psi1, psi2, error }
        })
        .collect();
    let (cycles, skipped) = stage("verify-numeric", locate_cycles(jet.name, &p, &radii))?;
    if let Some(t) = &a.table {
        let mut s = String::from("# r delta predicted psi1 psi2\n");
        for x in &samples {
            let d = x.delta.map_or("nan".to_string(), sig10);
            s.push_str(&format!("{} {} {} {} {}\n", sig10(x.r), d, sig10(x.predicted), sig10(x.psi1), sig10(x.psi2)));
        }
        std::fs::write(t, s)?;
    }
    let doc = json!({
        "schema": "pqcycles.verify/1",
        "system": jet.name.key(),
        "tau": format_rational(&p.tau),
        "eps": p.eps,
        "precision": p.precision,
        "samples": samples,
        "cycles": cycles,
        "skipped": skipped,
    });
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(0)
}

fn center_check(a: CenterArgs, stdout: &mut dyn Write) -> Result<i32> {
    let plus: LoudSystem = a.plus.parse()?;
    let minus: LoudSystem = a.minus.parse()?;
    let tau = parse_tau(&a.tau)?;
    if !(2..=60).contains(&a.order) {
        return Err(Error::Invalid(format!("order must lie in 2..=60, got {}", a.order)));
    }
    let verdict = stage("center-check", is_piecewise_center(plus, minus, &tau, a.order))?;
    let mut closure = Vec::new();
    if verdict.is_center() {
        for r in a.closure.split(',').filter(|s| !s.trim().is_empty()) {
            let r: f64 = r.trim().parse().map_err(|_| Error::Parse(format!("bad radius `{r}`")))?;
            let name = CaseName { plus, minus };
            let v = match center_closure(name, &tau, r) {
                Ok(d) => json!({ "r": r, "closure": d }),
                Err(e) => json!({ "r": r, "error": e.to_string() }),
            };
            closure.push(v);
        }
    }
    let doc = json!({
        "schema": "pqcycles.center/1",
        "plus": plus.to_string(),
        "minus": minus.to_string(),
        "tau": format_rational(&tau),
        "verdict": verdict,
        "closure": closure,
    });
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(0)
}

/// Parameters with damped (`Stable`) or anti-damped linear parts at `τ = 0`.
pub fn damped_origin(eps: f64, origin: Origin) -> NumericParams {
    let mut p = NumericParams::new(rat(0, 1), eps);
    let v = if origin == Origin::Stable { rat(-1, 1) } else { rat(1, 1) };
    for s in ["a+10", "a-10"] {
        p.set(s, v.clone()).expect("known coefficient");
    }
    p
}

fn pseudo_hopf(a: PseudoHopfArgs, stdout: &mut dyn Write) -> Result<i32> {
    let name: CaseName = a.case.parse()?;
    let p = match &a.params {
        Some(path) => serde_json::from_value::<ParamsFile>(read_json(path)?)?.into_params()?,
        None => damped_origin(a.eps, a.origin),
    };
    if p.tau != rat(0, 1) {
        return Err(Error::Invalid("the pseudo-Hopf construction uses the line y = 0 (tau = 0)".into()));
    }
    let (lo, hi, n) = parse_grid(&a.grid)?;
    let report = stage("pseudo-hopf", pseudo_hopf_demo(name, &p, a.b, &grid(lo, hi, n, true)))?;
    let doc = json!({ "schema": "pqcycles.pseudo-hopf/1", "report": report });
    emit_json(a.out.as_deref(), &doc, stdout)?;
    Ok(0)
}

fn parse_injection(s: &str) -> Result<(CaseName, usize, usize)> {
    let bad = || Error::Parse(format!("--inject `{s}` is not case=first/second"));
    let (c, v) = s.split_once('=').ok_or_else(bad)?;
    let (f, g) = v.split_once('/').ok_or_else(bad)?;
    Ok((c.trim().parse()?, f.trim().parse().map_err(|_| bad())?, g.trim().parse().map_err(|_| bad())?))
}

/// Computes the summary table cells for the given cases at `τ = 1/2`.
pub fn table_cells(cache: &Cache, cases: &[CaseName], n: usize, opt: &SolveOptions) -> Vec<(CaseName, Cell, Cell)> {
    cases
        .par_iter()
        .map(|&name| {
            let missing = |e: Error| Cell::Missing { reason: e.to_string() };
            let first = cached_jet(cache, name, &rat(1, 2), 1, n)
                .and_then(|j| Ladder::build(&j, PivotPolicy::Canonical))
                .and_then(|l| first_order_count(&l))
                .map_or_else(missing, |r| Cell::Value { total: r.total });
            let second = cached_second_order(cache, name, n, opt)
                .map_or_else(missing, |c| Cell::Value { total: c.report.total });
            (name, first, second)
        })
        .collect()
}

fn table(a: TableArgs, cache: &Cache, stdout: &mut dyn Write) -> Result<i32> {
    let n = validate_n(a.n)?;
    let opt = solve_options(a.digits, a.seed, 400)?;
    let cases: Vec<CaseName> = match &a.cases {
        Some(list) => list.split(',').map(|c| c.trim().parse()).collect::<Result<_>>()?,
        None => CaseName::table_cases().to_vec(),
    };
    let injections: Vec<(CaseName, usize, usize)> = a.inject.iter().map(|s| parse_injection(s)).collect::<Result<_>>()?;
    let mut cells = table_cells(cache, &cases, n, &opt);
    for (name, f, s) in injections {
        match cells.iter_mut().find(|c| c.0 == name) {
            Some(c) => {
                c.1 = Cell::Value { total: f };
                c.2 = Cell::Value { total: s };
            }
            None => cells.push((name, Cell::Value { total: f }, Cell::Value { total: s })),
        }
    }
    let t = SummaryTable::from_cells(cells);
    match a.format {
        Format::Text => {
            let mut s = t.render();
            for r in &t.rows {
                for (label, c) in [("1st", &r.first), ("2nd", &r.second)] {
                    if let Cell::Missing { reason } = c {
                        s.push_str(&format!("{} {label} order missing: {reason}\n", r.system));
                    }
                }
            }
            emit(a.out.as_deref(), &s, stdout)?;
        }
        Format::Json => {
            let doc = json!({ "schema": "pqcycles.table/1", "tau": "1/2", "N": n, "rows": t.rows, "matches": t.matches() });
            emit_json(a.out.as_deref(), &doc, stdout)?;
        }
    }
    Ok(if t.matches() { 0 } else { 1 })
}

/// Scientific rendering used by the human-readable reports.
pub fn sci(q: &BigRational, digits: usize) -> String {
    format_scientific(q, digits as u32)
}
