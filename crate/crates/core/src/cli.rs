//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::capacity::{capacity, is_polar};
use crate::decomposition::{active_main_part, is_killing_free, killing_measure, killing_part};
use crate::domination::{compare_kernels, dominates, spectrum, Spectral, EQUIVALENCE_TIMES};
use crate::error::FormError;
use crate::form::QuadForm;
use crate::nodeset::NodeSet;
use crate::problem::{build_form, FormSpec, KindSpec, Problem, ProblemError, SideSpec};
use crate::report::{num, Header, Report};
use crate::sandwich::{
    boundary_mode_check, enumerate_sandwiched, killing_mode_check, recover_pair, sandwich_check,
    two_sided_domination, SandwichVerdict,
};
use crate::tol;

/// Exit codes.
pub mod exit {
    /// Success; for `dominate` and `sandwich`: the relation holds.
    pub const OK: i32 = 0;
    /// Both criteria agree that the relation fails.
    pub const FAILS: i32 = 1;
    /// The structural and semigroup criteria disagree.
    pub const DISAGREE: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const NO_INPUT: i32 = 66;
    pub const INTERNAL: i32 = 70;
    pub const CANT_CREATE: i32 = 73;
    pub const IO: i32 = 74;
}

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SANDWICH_FORMS_THREADS";

const AFTER_HELP: &str = "\
Exit codes:
  0   success; for dominate and sandwich, the relation holds
  1   dominate/sandwich: both criteria agree that the relation fails
  2   dominate/sandwich: structural and semigroup criteria disagree
  64  usage error (bad flags, empty --times, missing --betas)
  65  problem file could not be parsed or describes invalid data
  66  problem file could not be read
  70  internal error
  73  output file could not be created
  74  output could not be written

Environment:
  SANDWICH_FORMS_THREADS  maximum number of worker threads";

#[derive(Debug, Parser)]
#[command(name = "sandwich-forms", version, about = "Finite Dirichlet forms: decomposition, domination and sandwiched forms", after_help = AFTER_HELP)]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Boundary,
    Killing,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Active main part, killing part and killing measure of [form].
    Decompose { problem: PathBuf },
    /// Domination of [form] by [form2], by kernels and by coefficients.
    Dominate {
        problem: PathBuf,
        /// Comma-separated times.
        #[arg(long)]
        times: Option<String>,
        /// Entrywise kernel tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Whether the candidate ([form2] or [pair]) is sandwiched between
    /// [form] and its active main part; recovers the pair.
    Sandwich {
        problem: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Also list all sandwiched forms with measures on the grid.
        #[arg(long)]
        enumerate: bool,
        /// Comma-separated measure levels for --enumerate.
        #[arg(long)]
        mu_grid: Option<String>,
    },
    /// Eigenvalues of [form] (and [form2]).
    Spectrum { problem: PathBuf },
    /// Capacities of node sets.
    Capacity {
        problem: PathBuf,
        /// Comma-separated node names; repeatable.
        #[arg(long = "set")]
        sets: Vec<String>,
    },
    /// Robin coefficient sweep for interval and square models.
    Sweep {
        problem: PathBuf,
        /// Comma-separated Robin coefficients.
        #[arg(long)]
        betas: Option<String>,
        #[arg(long)]
        times: Option<String>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: msg.into(),
        }
    }

    fn data(msg: impl Into<String>) -> Self {
        Self {
            code: exit::DATA,
            message: msg.into(),
        }
    }
}

impl From<FormError> for CliError {
    fn from(e: FormError) -> Self {
        let code = match e {
            FormError::InternalInvariantViolation(_) | FormError::Numerical(_) => exit::INTERNAL,
            _ => exit::DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Form(f) => f.into(),
            ProblemError::Parse(_) => CliError::data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::usage(format!("{what} must not be empty")));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad number {s:?} in {what}")))
        })
        .collect()
}

fn load(path: &PathBuf) -> CliResult<(Vec<u8>, Problem)> {
    let bytes = fs::read(path).map_err(|e| CliError {
        code: exit::NO_INPUT,
        message: format!("{}: {e}", path.display()),
    })?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| CliError::data(format!("{}: not UTF-8", path.display())))?;
    let problem = Problem::parse(text)?;
    Ok((bytes, problem))
}

fn times_for(problem: &Problem, flag: &Option<String>) -> CliResult<Vec<f64>> {
    let times = match flag {
        Some(t) => parse_list(t, "--times")?,
        None => problem
            .spec
            .run
            .times
            .clone()
            .unwrap_or_else(|| EQUIVALENCE_TIMES.to_vec()),
    };
    if times.is_empty() {
        return Err(CliError::usage("times must not be empty"));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::usage(format!(
            "time {t} must be finite and nonnegative"
        )));
    }
    Ok(times)
}

fn name(p: &Problem, x: usize) -> &str {
    p.space.name(x)
}

/// Output of one command: the report and the exit code it implies.
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

fn decompose(bytes: &[u8], p: &Problem) -> CliResult<Outcome> {
    let q = &p.form;
    let main = active_main_part(q)?;
    let killing = killing_part(q)?;
    let c = killing_measure(q)?;
    let mut h = Header::new("decompose", bytes, p.spec.run.seed);
    h.note("killing-part-zero", is_killing_free(q)?);
    let mut r = Report::new(h, &["part", "x", "y", "value"]);
    for x in main.support().iter() {
        for y in main.support().iter() {
            r.row(["main", name(p, x), name(p, y), &num(main.coeff()[(x, y)])]);
        }
    }
    for x in killing.support().iter() {
        for y in killing.support().iter() {
            r.row([
                "killing",
                name(p, x),
                name(p, y),
                &num(killing.coeff()[(x, y)]),
            ]);
        }
    }
    for x in q.support().iter() {
        r.row(["measure", name(p, x), "", &num(c[x])]);
    }
    Ok(Outcome {
        report: r,
        code: exit::OK,
    })
}

fn need_form2(p: &Problem) -> CliResult<&QuadForm> {
    p.form2
        .as_ref()
        .ok_or_else(|| CliError::data("this command needs a [form2] section"))
}

fn dominate(
    bytes: &[u8],
    p: &Problem,
    times: &Option<String>,
    tol_flag: Option<f64>,
) -> CliResult<Outcome> {
    let times = times_for(p, times)?;
    let tol = tol_flag.or(p.spec.run.tol).unwrap_or(tol::SEMIGROUP);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::usage("--tol must be finite and nonnegative"));
    }
    let q2 = need_form2(p)?;
    let rep = dominates(&p.form, q2, &times, tol)?;
    let mut h = Header::new("dominate", bytes, p.spec.run.seed);
    h.note(
        "times",
        times.iter().map(|t| num(*t)).collect::<Vec<_>>().join(";"),
    );
    h.note("tol", num(tol));
    h.note("ties", rep.semigroup.ties);
    let mut r = Report::new(h, &["check", "verdict", "t", "x", "y", "max_violation"]);
    let (t, x, y) = match rep.semigroup.witness {
        Some((t, x, y)) => (num(t), name(p, x).to_string(), name(p, y).to_string()),
        None => Default::default(),
    };
    r.row([
        "semigroup".to_string(),
        rep.semigroup_verdict().to_string(),
        t,
        x,
        y,
        num(rep.semigroup.max_violation),
    ]);
    let (x, y) = match rep.form.witness {
        Some((x, y)) => (name(p, x).to_string(), name(p, y).to_string()),
        None => Default::default(),
    };
    r.row([
        "form".to_string(),
        rep.form_verdict().to_string(),
        String::new(),
        x,
        y,
        num(rep.form.max_violation),
    ]);
    r.row([
        "order_ideal",
        &rep.form.order_ideal_ok.to_string(),
        "",
        "",
        "",
        "",
    ]);
    r.row([
        "positivity",
        &rep.form.positivity_ok.to_string(),
        "",
        "",
        "",
        "",
    ]);
    let code = match (rep.semigroup_verdict(), rep.form_verdict()) {
        (true, true) => exit::OK,
        (false, false) => exit::FAILS,
        _ => exit::DISAGREE,
    };
    Ok(Outcome { report: r, code })
}

fn verdict_rows(r: &mut Report, p: &Problem, v: &SandwichVerdict) {
    r.row([
        "verdict",
        "mode",
        "",
        &format!("{:?}", v.mode).to_lowercase(),
    ]);
    r.row(["verdict", "is_sandwiched", "", &v.is_sandwiched.to_string()]);
    r.row([
        "clause",
        "(a) order ideal",
        "",
        &v.order_ideal_ok.to_string(),
    ]);
    r.row(["clause", "(b) positive", "", &v.positive_ok.to_string()]);
    r.row(["clause", "(b) local", "", &v.local_ok.to_string()]);
    let ext = match v.mode {
        crate::sandwich::SandwichMode::Boundary => "(c) extension",
        crate::sandwich::SandwichMode::Killing => "(c) killing band",
    };
    r.row(["clause", ext, "", &v.extension_ok.to_string()]);
    if let Some(w) = v.witness {
        r.row([
            "witness",
            w.clause.label(),
            &format!("{}:{}", name(p, w.x), name(p, w.y)),
            &num(w.value),
        ]);
    }
}

fn sandwich(
    bytes: &[u8],
    p: &Problem,
    mode: Option<ModeArg>,
    enumerate: bool,
    mu_grid: &Option<String>,
) -> CliResult<Outcome> {
    let candidate = p.candidate()?;
    if candidate.is_none() && !enumerate {
        return Err(CliError::data(
            "sandwich needs [form2], [pair], or --enumerate",
        ));
    }
    let mut h = Header::new("sandwich", bytes, p.spec.run.seed);
    let times = times_for(p, &None)?;
    h.note(
        "times",
        times.iter().map(|t| num(*t)).collect::<Vec<_>>().join(";"),
    );
    let mut rows = Vec::new();
    let mut code = exit::OK;
    if let Some(qp) = &candidate {
        let v = match mode {
            None => sandwich_check(&p.form, qp)?,
            Some(ModeArg::Boundary) => boundary_mode_check(&p.form, qp)?,
            Some(ModeArg::Killing) => killing_mode_check(&p.form, qp)?,
        };
        let (lo, hi) = two_sided_domination(&p.form, qp, &times, tol::SEMIGROUP)?;
        let semigroup = lo.holds && hi.holds;
        code = match (v.is_sandwiched, semigroup) {
            (true, true) => exit::OK,
            (false, false) => exit::FAILS,
            _ => exit::DISAGREE,
        };
        let mut r = Report::new(h.clone(), &[]);
        verdict_rows(&mut r, p, &v);
        r.row(["semigroup", "lower", "", &lo.holds.to_string()]);
        r.row(["semigroup", "upper", "", &hi.holds.to_string()]);
        if v.is_sandwiched {
            let pair = recover_pair(&p.form, qp).or_else(|_| {
                // explicit killing mode on a form the automatic check treats
                // differently: report the measure of the verdict itself
                crate::sandwich::AdmissiblePair::new(
                    qp.support().clone(),
                    v.measure.clone().unwrap_or_default(),
                )
            })?;
            for x in pair.o.iter() {
                r.row(["pair", "mu", name(p, x), &num(pair.mu[x])]);
            }
        }
        rows.extend(r.rows);
    }
    if enumerate {
        let grid = match mu_grid {
            Some(g) => parse_list(g, "--mu-grid")?,
            None => p
                .spec
                .run
                .mu_grid
                .clone()
                .unwrap_or_else(|| vec![0.0, 1.0, 2.0]),
        };
        let list = enumerate_sandwiched(&p.form, &grid)?;
        h.note("enumerated", list.len());
        for (i, (pair, _)) in list.iter().enumerate() {
            for x in pair.o.iter() {
                rows.push(vec![
                    "enumerated".into(),
                    i.to_string(),
                    name(p, x).into(),
                    num(pair.mu[x]),
                ]);
            }
        }
    }
    let mut r = Report::new(h, &["section", "item", "node", "value"]);
    r.rows = rows;
    Ok(Outcome { report: r, code })
}

fn spectrum_cmd(bytes: &[u8], p: &Problem) -> CliResult<Outcome> {
    let mut r = Report::new(
        Header::new("spectrum", bytes, p.spec.run.seed),
        &["form", "k", "eigenvalue"],
    );
    let mut forms = vec![("form", &p.form)];
    if let Some(q2) = &p.form2 {
        forms.push(("form2", q2));
    }
    for (label, q) in forms {
        for (k, lam) in spectrum(q).iter().enumerate() {
            r.row([label.to_string(), (k + 1).to_string(), num(*lam)]);
        }
    }
    Ok(Outcome {
        report: r,
        code: exit::OK,
    })
}

fn capacity_cmd(bytes: &[u8], p: &Problem, flags: &[String]) -> CliResult<Outcome> {
    let sets: Vec<NodeSet> = if !flags.is_empty() {
        flags
            .iter()
            .map(|s| {
                let names: Vec<String> = s
                    .split(',')
                    .map(|n| n.trim().to_string())
                    .filter(|n| !n.is_empty())
                    .collect();
                p.node_set(&names).map_err(CliError::from)
            })
            .collect::<CliResult<_>>()?
    } else if !p.spec.run.sets.is_empty() {
        p.spec
            .run
            .sets
            .iter()
            .map(|s| p.node_set(s).map_err(CliError::from))
            .collect::<CliResult<_>>()?
    } else {
        (0..p.space.len()).map(NodeSet::singleton).collect()
    };
    let mut r = Report::new(
        Header::new("capacity", bytes, p.spec.run.seed),
        &["set", "capacity", "polar"],
    );
    for s in &sets {
        let label = s.iter().map(|x| name(p, x)).collect::<Vec<_>>().join(";");
        r.row([
            label,
            num(capacity(&p.form, s)?),
            is_polar(&p.form, s)?.to_string(),
        ]);
    }
    Ok(Outcome {
        report: r,
        code: exit::OK,
    })
}

/// The model of `[form]` with its boundary data replaced.
fn with_boundary(spec: &FormSpec, data: Boundary) -> CliResult<FormSpec> {
    match spec {
        FormSpec::Interval {
            n,
            scaling,
            potential,
            boundary_mass,
            ..
        } => {
            let (kind, beta) = match data {
                Boundary::Dirichlet => (KindSpec::Dirichlet, 0.0),
                Boundary::Neumann => (KindSpec::Neumann, 0.0),
                Boundary::Robin(b) => (KindSpec::Robin, b),
            };
            Ok(FormSpec::Interval {
                n: *n,
                kind,
                beta_left: beta,
                beta_right: beta,
                scaling: *scaling,
                potential: potential.clone(),
                boundary_mass: *boundary_mass,
            })
        }
        FormSpec::Grid2d {
            nx, ny, scaling, ..
        } => {
            let side = match data {
                Boundary::Dirichlet => SideSpec::Named("dirichlet".into()),
                Boundary::Neumann => SideSpec::Named("neumann".into()),
                Boundary::Robin(b) => SideSpec::Robin(b),
            };
            let sides = ["left", "right", "bottom", "top"]
                .iter()
                .map(|s| (s.to_string(), side.clone()))
                .collect();
            Ok(FormSpec::Grid2d {
                nx: *nx,
                ny: *ny,
                sides,
                scaling: *scaling,
            })
        }
        _ => Err(CliError::data("sweep needs an interval or grid2d [form]")),
    }
}

#[derive(Debug, Clone, Copy)]
enum Boundary {
    Dirichlet,
    Neumann,
    Robin(f64),
}

fn sweep(
    bytes: &[u8],
    p: &Problem,
    betas: &Option<String>,
    times: &Option<String>,
) -> CliResult<Outcome> {
    let betas = match betas {
        Some(b) => parse_list(b, "--betas")?,
        None if !p.spec.run.betas.is_empty() => p.spec.run.betas.clone(),
        None => return Err(CliError::usage("sweep needs --betas or run.betas")),
    };
    let times = times_for(p, times)?;
    let build = |b: Boundary| -> CliResult<QuadForm> {
        Ok(build_form(&with_boundary(&p.spec.form, b)?, None)?)
    };
    let kernels = |q: &QuadForm| -> CliResult<Vec<_>> {
        let s = Spectral::new(q);
        times
            .iter()
            .map(|&t| s.semigroup(t).map_err(CliError::from))
            .collect()
    };
    let neumann = kernels(&build(Boundary::Neumann)?)?;
    let dirichlet = kernels(&build(Boundary::Dirichlet)?)?;
    let rows: Vec<CliResult<Vec<String>>> = betas
        .par_iter()
        .map(|&beta| {
            let q = build(Boundary::Robin(beta))?;
            let k = kernels(&q)?;
            // e^{-tL_β} ≤ e^{-tL_N} and e^{-tL_D} ≤ e^{-tL_β}
            let upper = compare_kernels(&times, &k, &neumann, tol::SEMIGROUP);
            let lower = compare_kernels(&times, &dirichlet, &k, tol::SEMIGROUP);
            let mut row = vec![
                num(beta),
                num(upper.max_violation),
                num(lower.max_violation),
            ];
            row.extend(spectrum(&q).iter().map(|l| num(*l)));
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<CliResult<Vec<_>>>()?;
    let modes = rows.first().map_or(0, |r| r.len() - 3);
    let mut columns = vec![
        "beta".to_string(),
        "violation_neumann".into(),
        "violation_dirichlet".into(),
    ];
    columns.extend((1..=modes).map(|k| format!("lambda_{k}")));
    let mut h = Header::new("sweep", bytes, p.spec.run.seed);
    h.note(
        "times",
        times.iter().map(|t| num(*t)).collect::<Vec<_>>().join(";"),
    );
    let mut r = Report::new(h, &[]);
    r.columns = columns;
    r.rows = rows;
    Ok(Outcome {
        report: r,
        code: exit::OK,
    })
}

/// Runs a parsed command and returns its report.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Decompose { problem } => {
            let (b, p) = load(problem)?;
            decompose(&b, &p)
        }
        Command::Dominate {
            problem,
            times,
            tol,
        } => {
            if matches!(times, Some(t) if t.trim().is_empty()) {
                return Err(CliError::usage("--times must not be empty"));
            }
            let (b, p) = load(problem)?;
            dominate(&b, &p, times, *tol)
        }
        Command::Sandwich {
            problem,
            mode,
            enumerate,
            mu_grid,
        } => {
            let (b, p) = load(problem)?;
            sandwich(&b, &p, *mode, *enumerate, mu_grid)
        }
        Command::Spectrum { problem } => {
            let (b, p) = load(problem)?;
            spectrum_cmd(&b, &p)
        }
        Command::Capacity { problem, sets } => {
            let (b, p) = load(problem)?;
            capacity_cmd(&b, &p, sets)
        }
        Command::Sweep {
            problem,
            betas,
            times,
        } => {
            let (b, p) = load(problem)?;
            sweep(&b, &p, betas, times)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            CliError::usage(format!(
                "{THREADS_ENV} must be a positive integer, got {value:?}"
            ))
        })?;
    // a pool may already exist when running in-process more than once
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Entry point: parses `args`, runs the command, writes the report and
/// returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    exit::OK
                }
                _ => exit::USAGE,
            };
        }
    };
    let result = configure_threads().and_then(|_| execute(&cli));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            return e.code;
        }
    };
    let written = match &cli.output {
        Some(path) => match fs::File::create(path) {
            Ok(f) => outcome.report.write(io::BufWriter::new(f)),
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return exit::CANT_CREATE;
            }
        },
        None => outcome.report.write(&mut *stdout),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: writing report: {e}");
        return exit::IO;
    }
    outcome.code
}
