//! JSON-in, JSON-out command line for the p-adic/tropical toolkit.
//!
//! Every subcommand reads one JSON document (stdin or `--in`), validates
//! it, runs the corresponding library operation, and prints one JSON
//! result line. Exit codes: 0 success, 2 invalid input or resource
//! bound, 3 mathematically valid but certificate-free outcome
//! (an inconclusive Mumford count). Rationals travel as strings to stay
//! exact; `"inf"` denotes the point at infinity. Output is byte-stable
//! for a fixed input, seed, and version; `--threads` is accepted for
//! interface stability but never affects results.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num::{BigInt, BigRational, ToPrimitive};
use serde_json::{json, Map, Value};

use mumford::amplitude::{amplitude_n_mc, veneziano4, Kinematics, Mode, Window};
use mumford::btree::{build_dendrogram, MarkedTree};
use mumford::clmeasure::{cl_chain_measure, moduli_cell_measure, weak_convergence_error};
use mumford::counting::{
    count_lattice_paths, count_through, default_config_pool, kontsevich_n, mumford_count,
    Certificate, CountError, MumfordOutcome,
};
use mumford::padic::{ExtVal, ProjPoint1, ProjPoint2};
use mumford::render::{dot_marked_tree, svg_marked_tree, svg_measure_bars, svg_tropical_curve};
use mumford::tropical::{tropicalize, LineConfig, Mat3, TropPoint2};
use mumford::FieldParams;

#[derive(Parser)]
#[command(
    name = "mumford",
    version,
    about = "p-adic dendrograms, tropical curve counts, and string amplitudes",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Read the input JSON document from this file instead of stdin
    #[arg(long, global = true, value_name = "FILE")]
    r#in: Option<PathBuf>,
    /// Also write the result JSON to this file (atomically)
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write an SVG figure here (dendrogram, direct count, measure)
    #[arg(long, global = true, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Write a Graphviz DOT file here (dendrogram only)
    #[arg(long, global = true, value_name = "FILE")]
    dot: Option<PathBuf>,
    /// Seed for stochastic subcommands (JSON seed fields take precedence)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; accepted for compatibility, results never depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dendrogram of points on the p-adic projective line
    Dendrogram,
    /// Valuation images of projective plane points
    Tropicalize,
    /// Plane curve counts: lattice paths, recursion, or direct search
    Count,
    /// Certified curve counts through p-adic points
    Mumford,
    /// Four-point closed forms and n-point Monte-Carlo amplitudes
    Amplitude,
    /// Cell structure of the genus-zero tropical moduli space
    Cells,
    /// Discrete measures on reduction chains
    Measure,
}

struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            kind: "invalid_input",
            message: message.into(),
        }
    }

    fn resource(message: impl Into<String>) -> CliError {
        CliError {
            kind: "resource_bound",
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> CliError {
        CliError {
            kind: "io",
            message: message.into(),
        }
    }
}

fn count_err(e: CountError) -> CliError {
    match e {
        CountError::DirectBound { .. } => CliError::resource(e.to_string()),
        _ => CliError::input(e.to_string()),
    }
}

struct Outcome {
    body: Value,
    exit: u8,
    svg: Option<String>,
    dot: Option<String>,
}

impl Outcome {
    fn ok(body: Value) -> Outcome {
        Outcome {
            body,
            exit: 0,
            svg: None,
            dot: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            return fail(&cli, CliError::input("--threads must be at least 1"));
        }
    }
    let doc = match read_input(&cli) {
        Ok(d) => d,
        Err(e) => return fail(&cli, e),
    };
    match run(&cli, &doc) {
        Ok(out) => {
            if let Err(e) = write_figures(&cli, &out) {
                return fail(&cli, e);
            }
            let text = out.body.to_string();
            if let Some(path) = &cli.out {
                if let Err(e) = atomic_write(path, text.as_bytes()) {
                    return fail(&cli, e);
                }
            }
            println!("{}", text);
            ExitCode::from(out.exit)
        }
        Err(e) => fail(&cli, e),
    }
}

fn fail(cli: &Cli, e: CliError) -> ExitCode {
    let body = json!({"error": {"kind": e.kind, "message": e.message}});
    let text = body.to_string();
    if let Some(path) = &cli.out {
        let _ = atomic_write(path, text.as_bytes());
    }
    println!("{}", text);
    eprintln!("error: {}", e.message);
    ExitCode::from(2)
}

fn read_input(cli: &Cli) -> Result<String, CliError> {
    match &cli.r#in {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {}", path.display(), e))),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::io(format!("cannot read stdin: {}", e)))?;
            Ok(buf)
        }
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| CliError::io(format!("cannot write {}: {}", path.display(), e)))
}

fn write_figures(cli: &Cli, out: &Outcome) -> Result<(), CliError> {
    if let Some(path) = &cli.svg {
        match &out.svg {
            Some(svg) => atomic_write(path, svg.as_bytes())?,
            None => {
                return Err(CliError::input(
                    "this subcommand produces no SVG figure for the given input",
                ))
            }
        }
    }
    if let Some(path) = &cli.dot {
        match &out.dot {
            Some(dot) => atomic_write(path, dot.as_bytes())?,
            None => {
                return Err(CliError::input(
                    "this subcommand produces no DOT figure for the given input",
                ))
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli, doc: &str) -> Result<Outcome, CliError> {
    let value: Value = serde_json::from_str(doc)
        .map_err(|e| CliError::input(format!("malformed JSON: {}", e)))?;
    let map = value
        .as_object()
        .ok_or_else(|| CliError::input("input document must be a JSON object"))?;
    match cli.cmd {
        Cmd::Dendrogram => run_dendrogram(map),
        Cmd::Tropicalize => run_tropicalize(map),
        Cmd::Count => run_count(map),
        Cmd::Mumford => run_mumford(map, cli.seed),
        Cmd::Amplitude => run_amplitude(map, cli.seed),
        Cmd::Cells => run_cells(map),
        Cmd::Measure => run_measure(map),
    }
}

// ------------------------------------------------------------------
// field plumbing
// ------------------------------------------------------------------

fn warn_unknown(map: &Map<String, Value>, allowed: &[&str]) {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            eprintln!("warning: ignoring unknown field {:?}", key);
        }
    }
}

fn need<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value, CliError> {
    map.get(key)
        .ok_or_else(|| CliError::input(format!("missing required field \"{}\"", key)))
}

fn need_u64(map: &Map<String, Value>, key: &str) -> Result<u64, CliError> {
    need(map, key)?
        .as_u64()
        .ok_or_else(|| CliError::input(format!("field \"{}\" must be a non-negative integer", key)))
}

fn opt_u64(map: &Map<String, Value>, key: &str) -> Result<Option<u64>, CliError> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => v.as_u64().map(Some).ok_or_else(|| {
            CliError::input(format!("field \"{}\" must be a non-negative integer", key))
        }),
    }
}

fn need_f64(v: &Value, what: &str) -> Result<f64, CliError> {
    v.as_f64()
        .ok_or_else(|| CliError::input(format!("{} must be a number", what)))
}

fn parse_rational(s: &str, what: &str) -> Result<BigRational, CliError> {
    BigRational::from_str(s.trim())
        .map_err(|_| CliError::input(format!("{}: \"{}\" is not a rational (use \"a/b\")", what, s)))
}

fn rational_field(v: &Value, what: &str) -> Result<BigRational, CliError> {
    match v {
        Value::String(s) => parse_rational(s, what),
        _ => Err(CliError::input(format!(
            "{} must be a rational encoded as a string",
            what
        ))),
    }
}

fn bigint_value(n: &BigInt) -> Value {
    match n.to_u64() {
        Some(v) => Value::from(v),
        None => Value::from(n.to_string()),
    }
}

fn ext_val_value(v: &ExtVal) -> Value {
    match v {
        ExtVal::Finite(r) => Value::from(r.to_string()),
        ExtVal::Infinity => Value::from("inf"),
    }
}

fn tree_body(tree: &MarkedTree) -> Value {
    let t = tree.comb_type();
    let depths: Vec<Value> = (0..tree.num_vertices())
        .map(|v| match tree.depth(v) {
            Some(d) => Value::from(d.to_string()),
            None => Value::Null,
        })
        .collect();
    let edges: Vec<Value> = tree
        .edges()
        .iter()
        .map(|(a, b, len)| json!([a, b, len.to_string()]))
        .collect();
    json!({
        "n": tree.num_ends(),
        "type": {
            "splits": t.splits(),
            "dimension": t.dimension(),
            "binary": t.is_binary(),
        },
        "depths": depths,
        "edges": edges,
        "ends": tree.ends(),
    })
}

// ------------------------------------------------------------------
// subcommands
// ------------------------------------------------------------------

fn run_dendrogram(map: &Map<String, Value>) -> Result<Outcome, CliError> {
    warn_unknown(map, &["p", "points"]);
    let p = need_u64(map, "p")?;
    let params = FieldParams::new(p, 1).map_err(|e| CliError::input(e.to_string()))?;
    let raw = need(map, "points")?
        .as_array()
        .ok_or_else(|| CliError::input("field \"points\" must be an array"))?;
    let mut points = Vec::with_capacity(raw.len());
    let mut labels = Vec::with_capacity(raw.len());
    for (i, v) in raw.iter().enumerate() {
        let s = v
            .as_str()
            .ok_or_else(|| CliError::input(format!("points[{}] must be a string", i)))?;
        labels.push(s.to_string());
        if s.trim() == "inf" {
            points.push(ProjPoint1::infinity());
        } else {
            points.push(ProjPoint1::from_affine(parse_rational(
                s,
                &format!("points[{}]", i),
            )?));
        }
    }
    let tree = build_dendrogram(&points, &params).map_err(|e| CliError::input(e.to_string()))?;
    let svg = svg_marked_tree(&tree, &labels).map_err(|e| CliError::input(e.to_string()))?;
    let dot = dot_marked_tree(&tree, &labels).map_err(|e| CliError::input(e.to_string()))?;
    Ok(Outcome {
        body: tree_body(&tree),
        exit: 0,
        svg: Some(svg),
        dot: Some(dot),
    })
}

fn parse_config(map: &Map<String, Value>) -> Result<LineConfig, CliError> {
    let raw = match map.get("config") {
        None | Some(Value::Null) => return Ok(LineConfig::standard()),
        Some(v) => v,
    };
    let rows = raw
        .as_array()
        .filter(|r| r.len() == 3)
        .ok_or_else(|| CliError::input("field \"config\" must be a 3×3 array of rationals"))?;
    let mut m: Mat3 = mumford::tropical::mat3_zero();
    for (i, row) in rows.iter().enumerate() {
        let cols = row
            .as_array()
            .filter(|c| c.len() == 3)
            .ok_or_else(|| CliError::input("field \"config\" must be a 3×3 array of rationals"))?;
        for (j, cell) in cols.iter().enumerate() {
            m[i][j] = rational_field(cell, &format!("config[{}][{}]", i, j))?;
        }
    }
    LineConfig::new(m).map_err(|e| CliError::input(e.to_string()))
}

fn proj2_points(map: &Map<String, Value>) -> Result<Vec<ProjPoint2>, CliError> {
    let raw = need(map, "points")?
        .as_array()
        .ok_or_else(|| CliError::input("field \"points\" must be an array"))?;
    let mut points = Vec::with_capacity(raw.len());
    for (i, v) in raw.iter().enumerate() {
        let coords = v
            .as_array()
            .filter(|c| c.len() == 3)
            .ok_or_else(|| CliError::input(format!("points[{}] must be [z0, z1, z2]", i)))?;
        let z0 = rational_field(&coords[0], &format!("points[{}][0]", i))?;
        let z1 = rational_field(&coords[1], &format!("points[{}][1]", i))?;
        let z2 = rational_field(&coords[2], &format!("points[{}][2]", i))?;
        points.push(ProjPoint2::new(z0, z1, z2).map_err(|e| CliError::input(e.to_string()))?);
    }
    Ok(points)
}

fn run_tropicalize(map: &Map<String, Value>) -> Result<Outcome, CliError> {
    warn_unknown(map, &["p", "e", "config", "points"]);
    let p = need_u64(map, "p")?;
    let e = opt_u64(map, "e")?.unwrap_or(1);
    let e = u32::try_from(e).map_err(|_| CliError::input("field \"e\" is too large"))?;
    let params = FieldParams::new(p, e).map_err(|err| CliError::input(err.to_string()))?;
    let config = parse_config(map)?;
    let points = proj2_points(map)?;
    let mut out = Vec::with_capacity(points.len());
    for (i, pt) in points.iter().enumerate() {
        let t = tropicalize(pt, &config, &params)
            .map_err(|err| CliError::input(format!("points[{}]: {}", i, err)))?;
        out.push(json!({"x": ext_val_value(&t.x), "y": ext_val_value(&t.y)}));
    }
    Ok(Outcome::ok(json!({"points": out})))
}

fn trop_points(map: &Map<String, Value>) -> Result<Vec<TropPoint2>, CliError> {
    let raw = need(map, "points")?
        .as_array()
        .ok_or_else(|| CliError::input("field \"points\" must be an array"))?;
    let mut points = Vec::with_capacity(raw.len());
    for (i, v) in raw.iter().enumerate() {
        let coords = v
            .as_array()
            .filter(|c| c.len() == 2)
            .ok_or_else(|| CliError::input(format!("points[{}] must be [x, y]", i)))?;
        let x = rational_field(&coords[0], &format!("points[{}][0]", i))?;
        let y = rational_field(&coords[1], &format!("points[{}][1]", i))?;
        points.push(TropPoint2::finite(x, y));
    }
    Ok(points)
}

fn run_count(map: &Map<String, Value>) -> Result<Outcome, CliError> {
    warn_unknown(map, &["d", "g", "method", "points"]);
    let d = need_u64(map, "d")? as u32;
    let g = need_u64(map, "g")? as u32;
    let method = match map.get("method") {
        None => "lattice",
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return Err(CliError::input("field \"method\" must be a string")),
    };
    match method {
        "lattice" => {
            let n = count_lattice_paths(d, g).map_err(count_err)?;
            Ok(Outcome::ok(json!({"N": bigint_value(&n), "method": "lattice"})))
        }
        "recursion" => {
            if g != 0 {
                return Err(CliError::input(
                    "method \"recursion\" computes genus-0 counts; set g to 0",
                ));
            }
            let n = kontsevich_n(d).map_err(count_err)?;
            Ok(Outcome::ok(json!({"N": bigint_value(&n), "method": "recursion"})))
        }
        "direct" => {
            let points = trop_points(map)?;
            let result = count_through(d, g, &points).map_err(count_err)?;
            let certificate = match &result.certificate {
                Certificate::General => "general".to_string(),
                Certificate::Degenerate(why) => format!("degenerate: {}", why),
                Certificate::Inconclusive => "inconclusive".to_string(),
            };
            let svg = result
                .curves
                .first()
                .map(|(c, _)| svg_tropical_curve(c).map_err(|e| CliError::input(e.to_string())))
                .transpose()?;
            let body = json!({
                "N": bigint_value(&result.n),
                "method": "direct",
                "certificate": certificate,
                "curves": result.curves.len(),
            });
            Ok(Outcome {
                body,
                exit: 0,
                svg,
                dot: None,
            })
        }
        other => Err(CliError::input(format!(
            "unknown method \"{}\" (expected \"lattice\", \"recursion\", or \"direct\")",
            other
        ))),
    }
}

fn run_mumford(map: &Map<String, Value>, flag_seed: Option<u64>) -> Result<Outcome, CliError> {
    warn_unknown(map, &["p", "d", "g", "points", "config_pool_seed"]);
    let p = need_u64(map, "p")?;
    let d = need_u64(map, "d")? as u32;
    let g = need_u64(map, "g")? as u32;
    let seed = opt_u64(map, "config_pool_seed")?
        .or(flag_seed)
        .ok_or_else(|| {
            CliError::input("seed required: set \"config_pool_seed\" or pass --seed")
        })?;
    let params = FieldParams::new(p, 1).map_err(|e| CliError::input(e.to_string()))?;
    let points = proj2_points(map)?;
    let pool = default_config_pool(&params, seed, 3);
    match mumford_count(&points, d, g, &pool, &params).map_err(count_err)? {
        MumfordOutcome::Certified(n) => Ok(Outcome::ok(json!({
            "outcome": "certified",
            "N": bigint_value(&n),
        }))),
        MumfordOutcome::Inconclusive => Ok(Outcome {
            body: json!({
                "outcome": "inconclusive",
                "detail": "no tried configuration yielded a general-position certificate \
                           with the reference count; the configuration may be degenerate",
            }),
            exit: 3,
            svg: None,
            dot: None,
        }),
    }
}

fn parse_window(map: &Map<String, Value>) -> Result<Window, CliError> {
    match map.get("window") {
        None | Some(Value::Null) => Ok(Window::new(-60, 60).expect("static window")),
        Some(Value::String(s)) if s == "units" => Ok(Window::units()),
        Some(Value::Array(arr)) if arr.len() == 2 => {
            let lo = arr[0]
                .as_i64()
                .ok_or_else(|| CliError::input("window bounds must be integers"))?;
            let hi = arr[1]
                .as_i64()
                .ok_or_else(|| CliError::input("window bounds must be integers"))?;
            Window::new(lo, hi).map_err(|e| CliError::input(e.to_string()))
        }
        Some(_) => Err(CliError::input(
            "field \"window\" must be [v_min, v_max] or \"units\"",
        )),
    }
}

fn run_amplitude(map: &Map<String, Value>, flag_seed: Option<u64>) -> Result<Outcome, CliError> {
    warn_unknown(
        map,
        &["p", "exponents", "momenta", "mode", "samples", "seed", "window"],
    );
    let p = need_u64(map, "p")?;
    match (map.get("exponents"), map.get("momenta")) {
        (Some(_), Some(_)) => Err(CliError::input(
            "give either \"exponents\" (closed form) or \"momenta\" (Monte Carlo), not both",
        )),
        (Some(exp), None) => {
            let pair = exp
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| CliError::input("field \"exponents\" must be [a, b]"))?;
            let a = need_f64(&pair[0], "exponents[0]")?;
            let b = need_f64(&pair[1], "exponents[1]")?;
            let mode = match map.get("mode") {
                None => Mode::StrictConvergent,
                Some(Value::String(s)) if s == "strict" => Mode::StrictConvergent,
                Some(Value::String(s)) if s == "continued" => Mode::AnalyticContinuation,
                Some(_) => {
                    return Err(CliError::input(
                        "field \"mode\" must be \"strict\" or \"continued\"",
                    ))
                }
            };
            let v = veneziano4(p, a, b, mode).map_err(|e| CliError::input(e.to_string()))?;
            let regions: Vec<Value> = v
                .regions
                .iter()
                .map(|r| {
                    json!({
                        "region": r.region.to_string(),
                        "exponent": r.exponent,
                        "value": r.value,
                        "convergent": r.convergent,
                    })
                })
                .collect();
            Ok(Outcome::ok(json!({"total": v.total, "regions": regions})))
        }
        (None, Some(mom)) => {
            let rows = mom
                .as_array()
                .ok_or_else(|| CliError::input("field \"momenta\" must be an array of vectors"))?;
            let mut momenta = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let coords = row
                    .as_array()
                    .ok_or_else(|| CliError::input(format!("momenta[{}] must be an array", i)))?;
                let mut k = Vec::with_capacity(coords.len());
                for (j, c) in coords.iter().enumerate() {
                    k.push(need_f64(c, &format!("momenta[{}][{}]", i, j))?);
                }
                momenta.push(k);
            }
            let kin = Kinematics::new(momenta).map_err(|e| CliError::input(e.to_string()))?;
            let samples = opt_u64(map, "samples")?.unwrap_or(100_000);
            let seed = opt_u64(map, "seed")?.or(flag_seed).ok_or_else(|| {
                CliError::input("seed required: set \"seed\" or pass --seed")
            })?;
            let window = parse_window(map)?;
            let r = amplitude_n_mc(p, &kin, samples, seed, &window)
                .map_err(|e| CliError::input(e.to_string()))?;
            Ok(Outcome::ok(json!({
                "estimate": r.estimate,
                "stderr": r.stderr,
                "warning": r.warning,
                "samples": r.samples,
                "window": {
                    "v_min": r.window.v_min(),
                    "v_max": r.window.v_max(),
                    "units_only": r.window.units_only(),
                },
            })))
        }
        (None, None) => Err(CliError::input(
            "field \"exponents\" or \"momenta\" required",
        )),
    }
}

fn run_cells(map: &Map<String, Value>) -> Result<Outcome, CliError> {
    warn_unknown(map, &["n", "lambda"]);
    let n = need_u64(map, "n")? as usize;
    let lambda = match map.get("lambda") {
        None | Some(Value::Null) => 1.0,
        Some(v) => need_f64(v, "field \"lambda\"")?,
    };
    let measure = moduli_cell_measure(n, lambda).map_err(|e| CliError::input(e.to_string()))?;
    let maximal = measure
        .cells()
        .iter()
        .filter(|(t, _)| t.is_binary())
        .count();
    let weight = measure
        .cells()
        .iter()
        .find(|(t, _)| t.is_binary())
        .map(|(_, w)| w.to_string())
        .unwrap_or_else(|| "0".to_string());
    Ok(Outcome::ok(json!({
        "n": n,
        "types": measure.cells().len(),
        "maximal": maximal,
        "weight": weight,
        "lambda": measure.lambda(),
    })))
}

fn run_measure(map: &Map<String, Value>) -> Result<Outcome, CliError> {
    warn_unknown(map, &["chain_N"]);
    let n = need_u64(map, "chain_N")? as usize;
    let m = cl_chain_measure(n).map_err(|e| CliError::input(e.to_string()))?;
    let err = weak_convergence_error(n).map_err(|e| CliError::input(e.to_string()))?;
    let atoms: Vec<Value> = m
        .atoms
        .iter()
        .map(|(x, mass)| json!([x.to_string(), mass.to_string()]))
        .collect();
    let svg = svg_measure_bars(&m).map_err(|e| CliError::input(e.to_string()))?;
    Ok(Outcome {
        body: json!({
            "chain_N": n,
            "atoms": atoms,
            "weak_convergence_error": err.to_string(),
        }),
        exit: 0,
        svg: Some(svg),
        dot: None,
    })
}
