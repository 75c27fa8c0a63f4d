//! Command-line surface of the normalcone engine: membership checks, cone
//! computations, set operations, raw quantifier elimination, and a runnable
//! fixture corpus. Exit codes: 0 success, 1 property violated, 2 usage
//! error, 3 timeout or incomplete result.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use normalcone::cad::{decompose, CadError};
use normalcone::cone::{
    check_membership, coderivative, normal_cone_cad, normal_cone_cad_smt, normal_cone_direct,
    polar, project_set, sets_equal, tangent_cone, BasePoint, ConeConfig, ConeError, ConeResult,
};
use normalcone::formula::{parse, parse_set};
use normalcone::qe::{eliminate, equivalent, QeConfig, QeError};
use normalcone::{Formula, Poly, Rat, SemialgebraicSet, Var};

const EXIT_OK: i32 = 0;
const EXIT_VIOLATED: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_TIMEOUT: i32 = 3;

#[derive(Parser)]
#[command(name = "normalcone", version, about = "Cones of semialgebraic sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algo {
    Direct,
    DirectConjoined,
    Cad,
    CadSmt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Flags shared by every subcommand that reads a set.
#[derive(clap::Args)]
struct SetArgs {
    /// Defining formula, e.g. "x >= 0 && x*y == 0" (with --vars), or the
    /// full form "set(x, y; ...)"
    #[arg(long)]
    set: Option<String>,
    /// File holding the set in the same grammar
    #[arg(long, conflicts_with = "set")]
    input: Option<PathBuf>,
    /// Ambient variables in CAD order, e.g. "x,y"
    #[arg(long)]
    vars: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Is a vector in the regular normal cone at a point of the set?
    Check {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        point: String,
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 120.0)]
        time_limit: f64,
    },
    /// Regular normal cone at a fixed point
    Cone {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        point: String,
        #[arg(long, value_enum, default_value_t = Algo::Cad)]
        algo: Algo,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        /// Per-cell budget in seconds (cad-smt only; default 1)
        #[arg(long)]
        per_cell_limit: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Regular normal cone as a formula in a symbolic base point
    ConeMap {
        #[command(flatten)]
        set: SetArgs,
        /// Conjoin base membership before elimination instead of after
        #[arg(long)]
        conjoined: bool,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tangent cone at a fixed point
    Tangent {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Polar of the set
    Polar {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Regular co-derivative of the map whose graph is the set
    Coderiv {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        point: String,
        /// Number of input-space coordinates (the rest are outputs)
        #[arg(long)]
        split: usize,
        /// Fixed v*; omitted means symbolic vs1..vsm
        #[arg(long)]
        vstar: Option<String>,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long)]
        per_cell_limit: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Cylindrical algebraic decomposition of semicolon-separated polynomials
    Decompose {
        /// Polynomials, e.g. "x^2 + y^2 - 1; x - y"
        #[arg(long)]
        polys: String,
        #[arg(long)]
        vars: String,
        #[arg(long, default_value_t = 120.0)]
        time_limit: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Coordinate projection of the set
    Project {
        #[command(flatten)]
        set: SetArgs,
        /// Variables to keep, e.g. "x"
        #[arg(long)]
        keep: String,
        #[arg(long, default_value_t = 120.0)]
        time_limit: f64,
    },
    /// Are two sets equal (semantically, via quantifier elimination)?
    Equal {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        vars: String,
        #[arg(long, default_value_t = 120.0)]
        time_limit: f64,
    },
    /// Raw quantifier elimination of a formula
    Qe {
        #[arg(long)]
        formula: String,
        /// Free variables in CAD order, e.g. "x,y"
        #[arg(long)]
        free: String,
        #[arg(long, default_value_t = 120.0)]
        time_limit: f64,
    },
    /// Run the fixture corpus and compare against goldens semantically
    Fixtures {
        /// Directory of .fixture files (defaults to the shipped corpus)
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Only run fixtures whose file name contains this substring
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
    },
}

/// Error carrying the process exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<ConeError> for Failure {
    fn from(e: ConeError) -> Failure {
        let code = match &e {
            ConeError::Qe(QeError::Cad(CadError::Timeout)) => EXIT_TIMEOUT,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<QeError> for Failure {
    fn from(e: QeError) -> Failure {
        let code = match &e {
            QeError::Cad(CadError::Timeout) => EXIT_TIMEOUT,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<CadError> for Failure {
    fn from(e: CadError) -> Failure {
        let code = if matches!(e, CadError::Timeout) { EXIT_TIMEOUT } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn seconds(s: f64) -> Duration {
    Duration::from_secs_f64(s.max(0.001))
}

fn qe_cfg(limit: f64) -> QeConfig {
    QeConfig::with_time_limit(seconds(limit))
}

fn cone_cfg(limit: f64, per_cell: Option<f64>, smt: bool) -> ConeConfig {
    let per_cell_limit = match (per_cell, smt) {
        (Some(s), _) => Some(seconds(s)),
        (None, true) => Some(Duration::from_secs(1)),
        (None, false) => None,
    };
    ConeConfig { qe: qe_cfg(limit), per_cell_limit }
}

fn parse_vars(s: &str) -> Result<Vec<Var>, Failure> {
    let vars: Vec<Var> =
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(Var::new).collect();
    if vars.is_empty() {
        return Err(Failure::usage("empty variable list"));
    }
    Ok(vars)
}

fn parse_point(s: &str) -> Result<Vec<Rat>, Failure> {
    s.split(',')
        .map(str::trim)
        .map(|t| Rat::from_str(t).map_err(|e| Failure::usage(format!("bad coordinate {t:?}: {e}"))))
        .collect()
}

fn load_set(args: &SetArgs) -> Result<SemialgebraicSet, Failure> {
    let text = match (&args.set, &args.input) {
        (Some(t), None) => t.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?,
        _ => return Err(Failure::usage("provide exactly one of --set and --input")),
    };
    set_from_text(&text, args.vars.as_deref())
}

fn set_from_text(text: &str, vars: Option<&str>) -> Result<SemialgebraicSet, Failure> {
    let text = text.trim();
    let full = if text.starts_with("set(") {
        text.to_string()
    } else {
        let vars = vars.ok_or_else(|| Failure::usage("--vars is required with a bare formula"))?;
        format!("set({vars}; {text})")
    };
    parse_set(&full).map_err(|e| Failure::usage(format!("bad set: {e}")))
}

/// Prints a cone result; non-final results exit with the timeout code.
fn emit(result: &ConeResult, point: Option<&[Rat]>, format: Format) -> i32 {
    match format {
        Format::Text => {
            println!("{}", result.formula);
            if !result.final_result {
                eprintln!("upper estimate only (not final)");
            }
        }
        Format::Json => {
            let mut json = result.to_json();
            if let Some(p) = point {
                json["base_point"] =
                    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().into();
            }
            println!("{}", serde_json::to_string_pretty(&json).expect("serializable"));
        }
    }
    if result.final_result {
        EXIT_OK
    } else {
        EXIT_TIMEOUT
    }
}

fn symbolic_base(set: &SemialgebraicSet) -> BasePoint {
    let taken: Vec<String> = set.ambient_vars.iter().map(|v| v.name().to_string()).collect();
    let vars = set
        .ambient_vars
        .iter()
        .map(|v| {
            let mut name = format!("{}b", v.name());
            while taken.contains(&name) {
                name.push('_');
            }
            Var::new(&name)
        })
        .collect();
    BasePoint::Symbolic(vars)
}

fn run(cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Check { set, point, vector, time_limit } => {
            let set = load_set(&set)?;
            let point = parse_point(&point)?;
            let vector = parse_point(&vector)?;
            let inside = check_membership(&set, &point, &vector, &qe_cfg(time_limit))?;
            println!("{inside}");
            Ok(if inside { EXIT_OK } else { EXIT_VIOLATED })
        }
        Command::Cone { set, point, algo, time_limit, per_cell_limit, format } => {
            let set = load_set(&set)?;
            let point = parse_point(&point)?;
            let result = match algo {
                Algo::Direct => normal_cone_direct(
                    &set,
                    BasePoint::Fixed(point.clone()),
                    false,
                    &qe_cfg(time_limit),
                )?,
                Algo::DirectConjoined => normal_cone_direct(
                    &set,
                    BasePoint::Fixed(point.clone()),
                    true,
                    &qe_cfg(time_limit),
                )?,
                Algo::Cad => {
                    normal_cone_cad(&set, &point, &cone_cfg(time_limit, per_cell_limit, false))?
                }
                Algo::CadSmt => {
                    normal_cone_cad_smt(&set, &point, &cone_cfg(time_limit, per_cell_limit, true))?
                }
            };
            Ok(emit(&result, Some(&point), format))
        }
        Command::ConeMap { set, conjoined, time_limit, format } => {
            let set = load_set(&set)?;
            let base = symbolic_base(&set);
            let result = normal_cone_direct(&set, base, conjoined, &qe_cfg(time_limit))?;
            Ok(emit(&result, None, format))
        }
        Command::Tangent { set, point, time_limit, format } => {
            let set = load_set(&set)?;
            let point = parse_point(&point)?;
            let result = tangent_cone(&set, &point, &qe_cfg(time_limit))?;
            Ok(emit(&result, Some(&point), format))
        }
        Command::Polar { set, time_limit, format } => {
            let set = load_set(&set)?;
            let result = polar(&set, &qe_cfg(time_limit))?;
            Ok(emit(&result, None, format))
        }
        Command::Coderiv { set, point, split, vstar, time_limit, per_cell_limit, format } => {
            let set = load_set(&set)?;
            let point = parse_point(&point)?;
            let vstar = vstar.as_deref().map(parse_point).transpose()?;
            let result = coderivative(
                &set,
                &point,
                split,
                vstar.as_deref(),
                &cone_cfg(time_limit, per_cell_limit, true),
            )?;
            Ok(emit(&result, Some(&point), format))
        }
        Command::Decompose { polys, vars, time_limit, format } => {
            let order = parse_vars(&vars)?;
            let polys = parse_polys(&polys)?;
            let cfg = qe_cfg(time_limit);
            let tree = decompose(&polys, &order, &cad_cfg(&cfg))?;
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&tree.to_json()).unwrap())
                }
                Format::Text => {
                    for cell in &tree.leaves {
                        let sample: Vec<String> = cell
                            .sample
                            .coords
                            .iter()
                            .map(|(v, a)| format!("{} = {}", v.name(), a.approx(12)))
                            .collect();
                        println!(
                            "cell {:?} dim {}: {}",
                            cell.index_path,
                            cell.dimension,
                            sample.join(", ")
                        );
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Project { set, keep, time_limit } => {
            let set = load_set(&set)?;
            let keep = parse_vars(&keep)?;
            let shadow = project_set(&set, &keep, &qe_cfg(time_limit))?;
            let names: Vec<&str> = shadow.ambient_vars.iter().map(|v| v.name()).collect();
            println!("set({}; {})", names.join(", "), shadow.defining);
            Ok(EXIT_OK)
        }
        Command::Equal { a, b, vars, time_limit } => {
            let a = set_from_text(&a, Some(&vars))?;
            let b = set_from_text(&b, Some(&vars))?;
            let equal = sets_equal(&a, &b, &qe_cfg(time_limit))?;
            println!("{equal}");
            Ok(if equal { EXIT_OK } else { EXIT_VIOLATED })
        }
        Command::Qe { formula, free, time_limit } => {
            let f = parse(&formula).map_err(|e| Failure::usage(format!("bad formula: {e}")))?;
            let free = parse_vars(&free)?;
            let out = eliminate(&f, &free, &qe_cfg(time_limit))?;
            println!("{out}");
            Ok(EXIT_OK)
        }
        Command::Fixtures { dir, filter, time_limit } => {
            let dir = dir.unwrap_or_else(|| {
                PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
            });
            run_fixtures(&dir, filter.as_deref(), time_limit)
        }
    }
}

fn cad_cfg(cfg: &QeConfig) -> normalcone::cad::CadConfig {
    normalcone::cad::CadConfig {
        deadline: cfg.time_limit.map(|l| std::time::Instant::now() + l),
        projection: cfg.projection,
    }
}

/// Parses "p1; p2; ..." by reading each piece as the equation "(pi) = 0".
fn parse_polys(s: &str) -> Result<Vec<Poly>, Failure> {
    let mut out = Vec::new();
    for piece in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let f = parse(&format!("({piece}) = 0"))
            .map_err(|e| Failure::usage(format!("bad polynomial {piece:?}: {e}")))?;
        collect_polys(&f, &mut out);
    }
    if out.is_empty() {
        return Err(Failure::usage("no polynomials given"));
    }
    Ok(out)
}

fn collect_polys(f: &Formula, out: &mut Vec<Poly>) {
    match f {
        Formula::Atom(p, _) => out.push(p.clone()),
        Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| collect_polys(c, out)),
        Formula::Not(g) => collect_polys(g, out),
        Formula::Quant(_, _, g) => collect_polys(g, out),
        Formula::True | Formula::False => {}
    }
}

/// One fixture: a cone-style operation with a golden formula, compared
/// semantically so backend-dependent formula shapes never matter.
struct Fixture {
    name: String,
    op: String,
    set: SemialgebraicSet,
    point: Option<Vec<Rat>>,
    algo: Algo,
    expect: Formula,
}

fn parse_fixture(name: &str, text: &str) -> Result<Fixture, Failure> {
    let mut fields = std::collections::BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| Failure::usage(format!("{name}: bad line {line:?}")))?;
        fields.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |k: &str| {
        fields
            .get(k)
            .cloned()
            .ok_or_else(|| Failure::usage(format!("{name}: missing field {k:?}")))
    };
    let set = set_from_text(&get("set")?, None)?;
    let op = fields.get("op").cloned().unwrap_or_else(|| "cone".to_string());
    let point = fields.get("point").map(|p| parse_point(p)).transpose()?;
    let algo = match fields.get("algo").map(String::as_str) {
        None | Some("direct") => Algo::Direct,
        Some("direct-conjoined") => Algo::DirectConjoined,
        Some("cad") => Algo::Cad,
        Some("cad-smt") => Algo::CadSmt,
        Some(other) => return Err(Failure::usage(format!("{name}: unknown algo {other:?}"))),
    };
    let expect = parse(&get("expect")?)
        .map_err(|e| Failure::usage(format!("{name}: bad expect formula: {e}")))?;
    Ok(Fixture { name: name.to_string(), op, set, point, algo, expect })
}

fn run_fixture(fx: &Fixture, time_limit: f64) -> Result<bool, Failure> {
    let cfg = qe_cfg(time_limit);
    let need_point = || {
        fx.point
            .clone()
            .ok_or_else(|| Failure::usage(format!("{}: missing field \"point\"", fx.name)))
    };
    let result = match fx.op.as_str() {
        "cone" => {
            let point = need_point()?;
            match fx.algo {
                Algo::Direct => {
                    normal_cone_direct(&fx.set, BasePoint::Fixed(point), false, &cfg)?
                }
                Algo::DirectConjoined => {
                    normal_cone_direct(&fx.set, BasePoint::Fixed(point), true, &cfg)?
                }
                Algo::Cad => normal_cone_cad(
                    &fx.set,
                    &point,
                    &ConeConfig { qe: cfg.clone(), per_cell_limit: None },
                )?,
                Algo::CadSmt => normal_cone_cad_smt(
                    &fx.set,
                    &point,
                    &ConeConfig { qe: cfg.clone(), per_cell_limit: Some(Duration::from_secs(1)) },
                )?,
            }
        }
        "tangent" => tangent_cone(&fx.set, &need_point()?, &cfg)?,
        "polar" => polar(&fx.set, &cfg)?,
        other => return Err(Failure::usage(format!("{}: unknown op {other:?}", fx.name))),
    };
    if !result.final_result {
        return Ok(false);
    }
    Ok(equivalent(&result.formula, &fx.expect, &cfg)?)
}

fn run_fixtures(dir: &std::path::Path, filter: Option<&str>, time_limit: f64) -> Result<i32, Failure> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "fixture"))
        .collect();
    entries.sort();
    let mut failures = 0;
    let mut ran = 0;
    for path in entries {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        if let Some(f) = filter {
            if !name.contains(f) {
                continue;
            }
        }
        ran += 1;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        let fx = parse_fixture(&name, &text)?;
        match run_fixture(&fx, time_limit) {
            Ok(true) => println!("PASS {name}"),
            Ok(false) => {
                println!("FAIL {name}");
                failures += 1;
            }
            Err(f) => {
                println!("FAIL {name} ({})", f.message);
                failures += 1;
            }
        }
    }
    if ran == 0 {
        return Err(Failure::usage("no fixtures matched"));
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_VIOLATED })
}
