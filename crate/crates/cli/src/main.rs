//! `khuniv`: universal Khovanov complexes from the command line.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use khuniv::complex::{build_universal, BuildOptions, UniversalComplex};
use khuniv::decomp::{classify_patterns, decompose, width, Block};
use khuniv::diagram::PlanarDiagram;
use khuniv::homology::{homology, lee_ss_field, lee_ss_z, s_invariant, SSReport};
use khuniv::promote::{promote, PromotionSpec};
use khuniv::ring::CoeffRing;
use khuniv::{jones, knots, Error, Result};

const SCHEMA: &str = "khuniv.run/1";
const BATCH_HEADER: &str = "knot,s,width,Q,Z2,Z3,Z,error";
/// Largest block handed to the brute-force filtered computation over Z.
const BLOCK_BOUND: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "khuniv", version, about = "Universal Khovanov complexes over Z[H]")]
#[command(group(ArgGroup::new("input").args(["pd", "braid", "knot", "from_json", "batch"]).required(true)))]
struct Cli {
    /// Planar diagram code, `PD[X[..],..]`.
    #[arg(long)]
    pd: Option<String>,
    /// Braid word, `BR[n,{..}]`.
    #[arg(long)]
    braid: Option<String>,
    /// Built-in knot name or `T(p,q)`.
    #[arg(long)]
    knot: Option<String>,
    /// Universal complex JSON as written by `--complex --format json`.
    #[arg(long, value_name = "FILE")]
    from_json: Option<PathBuf>,
    /// Comma separated knot names, or `all` for the built-in table.
    #[arg(long, value_name = "LIST")]
    batch: Option<String>,
    /// Directory for per-knot JSON artifacts in batch mode.
    #[arg(long, value_name = "DIR", requires = "batch")]
    out: Option<PathBuf>,
    /// Edge at which the diagram is cut open.
    #[arg(long)]
    mark: Option<u32>,
    /// Promotion name or `@file.json`; repeatable.
    #[arg(long)]
    promotion: Vec<String>,
    /// Coefficient ring `Q`, `Z` or `Zp:<p>`; repeatable.
    #[arg(long)]
    ring: Vec<String>,
    #[arg(long)]
    complex: bool,
    /// `PROMOTION:RING`; bare flag uses every promotion and ring given.
    #[arg(long, num_args = 0..=1, default_missing_value = "", value_name = "SPEC")]
    homology: Vec<String>,
    #[arg(long)]
    s: bool,
    #[arg(long)]
    ss: bool,
    #[arg(long)]
    decomp: bool,
    #[arg(long)]
    jones: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Maximum number of objects per homological degree.
    #[arg(long)]
    limit: Option<usize>,
    /// Check d∘d = 0 after every crossing and on every promotion.
    #[arg(long)]
    verify: bool,
}

enum Input {
    Diagram(String, PlanarDiagram),
    Complex(String, UniversalComplex),
}

impl Input {
    fn name(&self) -> &str {
        match self {
            Input::Diagram(n, _) | Input::Complex(n, _) => n,
        }
    }
}

struct Config {
    rings: Vec<CoeffRing>,
    tables: Vec<(PromotionSpec, CoeffRing)>,
    complex: bool,
    s: bool,
    ss: bool,
    decomp: bool,
    jones: bool,
    format: Format,
    build: BuildOptions,
    verify: bool,
}

fn exit_status(e: &Error) -> u8 {
    match e {
        Error::SizeLimit(_) => 3,
        Error::Assertion(_) => 4,
        _ => 2,
    }
}

fn read(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn promotion(arg: &str) -> Result<PromotionSpec> {
    match arg.strip_prefix('@') {
        Some(path) => PromotionSpec::from_json(&parse_json(&read(path.as_ref())?)?),
        None => PromotionSpec::named(arg),
    }
}

fn config(cli: &Cli) -> Result<Config> {
    let mut promotions = cli.promotion.iter().map(|p| promotion(p)).collect::<Result<Vec<_>>>()?;
    let mut rings = cli.ring.iter().map(|r| r.parse()).collect::<Result<Vec<CoeffRing>>>()?;
    let bare = cli.homology.iter().any(String::is_empty);
    if promotions.is_empty() {
        promotions.push(PromotionSpec::named("standard")?);
    }
    let explicit_rings = !rings.is_empty();
    if !explicit_rings {
        rings.push(CoeffRing::Q);
    }
    let mut tables = Vec::new();
    if bare {
        for p in &promotions {
            for r in &rings {
                tables.push((p.clone(), *r));
            }
        }
    }
    for spec in cli.homology.iter().filter(|h| !h.is_empty()) {
        let (p, r) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected PROMOTION:RING, got '{spec}'")))?;
        tables.push((promotion(p)?, r.parse()?));
    }
    if !explicit_rings {
        rings = vec![CoeffRing::Q, CoeffRing::Zp(2), CoeffRing::Zp(3), CoeffRing::Z];
    }
    let c = Config {
        rings,
        tables,
        complex: cli.complex,
        s: cli.s,
        ss: cli.ss,
        decomp: cli.decomp,
        jones: cli.jones,
        format: cli.format,
        build: BuildOptions {
            size_limit: cli.limit.unwrap_or(BuildOptions::default().size_limit),
            verify_steps: cli.verify,
            ..Default::default()
        },
        verify: cli.verify,
    };
    if cli.batch.is_none() && !(c.complex || !c.tables.is_empty() || c.s || c.ss || c.decomp || c.jones) {
        return Err(Error::Argument(
            "select at least one of --complex, --homology, --s, --ss, --decomp, --jones".into(),
        ));
    }
    Ok(c)
}

fn input(cli: &Cli) -> Result<Input> {
    let d = if let Some(pd) = &cli.pd {
        ("pd".to_string(), knots::parse_diagram(pd)?)
    } else if let Some(b) = &cli.braid {
        ("braid".to_string(), knots::parse_diagram(b)?)
    } else if let Some(k) = &cli.knot {
        (k.clone(), knots::builtin(k)?)
    } else if let Some(path) = &cli.from_json {
        let u = UniversalComplex::from_json(&parse_json(&read(path)?)?)?;
        return Ok(Input::Complex(path.display().to_string(), u));
    } else {
        return Err(Error::Argument("no input given".into()));
    };
    let (name, mut d) = d;
    if let Some(m) = cli.mark {
        d = d.with_mark(m);
    }
    Ok(Input::Diagram(name, d))
}

fn ss_report(u: &UniversalComplex, ring: CoeffRing) -> Result<SSReport> {
    match ring {
        CoeffRing::Z => lee_ss_z(u, BLOCK_BOUND),
        CoeffRing::Q => lee_ss_field(u, 0),
        CoeffRing::Zp(p) => lee_ss_field(u, p),
        r => Err(Error::Unsupported(format!("Lee spectral sequence over {r}"))),
    }
}

fn ss_word(r: &SSReport) -> &'static str {
    match (r.conclusive, r.fast) {
        (false, _) => "unknown",
        (true, true) => "fast",
        (true, false) => "slow",
    }
}

fn standard_table(u: &UniversalComplex, ring: CoeffRing) -> Result<khuniv::homology::HomologyTable> {
    homology(&promote(u, &PromotionSpec::named("standard")?)?, ring)
}

fn block_text(b: &Block) -> String {
    let pos: Vec<String> = b.positions().iter().map(|(i, q)| format!("({i},{q})")).collect();
    let kind = match b.kind.order() {
        Some(n) => format!("{} order {n}", b.kind.name()),
        None => b.kind.name().to_string(),
    };
    format!("{kind} at {}", pos.join(" "))
}

/// Runs the pipeline on one input; text and JSON are both built so that the
/// output for a knot is emitted in one piece.
fn run(inp: &Input, cfg: &Config) -> Result<(String, Value)> {
    let u = match inp {
        Input::Diagram(_, d) => build_universal(d, &cfg.build)?,
        Input::Complex(_, u) => u.clone(),
    };
    if cfg.verify {
        u.verify()?;
    }
    let mut text = String::new();
    let mut out = json!({"schema": SCHEMA, "input": inp.name()});
    if cfg.complex {
        let _ = write!(text, "{u}");
        out["complex"] = u.canonical().to_json();
    }
    if !cfg.tables.is_empty() {
        let mut all = Vec::new();
        for (p, r) in &cfg.tables {
            let a = promote(&u, p)?;
            if cfg.verify {
                a.verify()?;
            }
            let t = homology(&a, *r)?;
            let _ = writeln!(text, "homology {} over {r}\n{t}", p.name);
            all.push(json!({"promotion": p.name, "ring": r.to_string(), "table": t.to_json()}));
        }
        out["homology"] = Value::Array(all);
    }
    if cfg.s {
        if let Input::Diagram(_, d) = inp {
            if !d.is_knot() {
                return Err(Error::Argument("the s-invariant is defined for knots only".into()));
            }
        }
        let s = s_invariant(&u)?;
        let _ = writeln!(text, "s = {s}");
        out["s"] = json!(s);
    }
    if cfg.ss {
        let mut all = Vec::new();
        for r in &cfg.rings {
            let rep = ss_report(&u, *r)?;
            let _ = writeln!(text, "Lee over {r}: converges on page {} ({})", rep.convergence_page, ss_word(&rep));
            all.push(rep.to_json());
        }
        out["ss"] = Value::Array(all);
    }
    if cfg.decomp {
        let blocks = decompose(&u);
        let rational = standard_table(&u, CoeffRing::Q)?;
        let integral = standard_table(&u, CoeffRing::Z)?;
        let rep = classify_patterns(&blocks, &rational, &integral)?;
        for b in &blocks {
            let _ = writeln!(text, "{}", block_text(b));
        }
        let _ = writeln!(text, "width {}", rep.width);
        for p in &rep.pieces {
            let _ = writeln!(text, "{} at ({},{})", p.pattern, p.degree, p.q);
        }
        let flags = [("thin", rep.thin), ("torsion-thin", rep.torsion_thin), ("torsion-rich", rep.torsion_rich)];
        let set: Vec<&str> = flags.iter().filter(|f| f.1).map(|f| f.0).collect();
        if !set.is_empty() {
            let _ = writeln!(text, "{}", set.join(", "));
        }
        out["decomp"] = json!({
            "blocks": blocks.iter().map(Block::to_json).collect::<Vec<_>>(),
            "report": rep.to_json(),
        });
    }
    if cfg.jones {
        let Input::Diagram(_, d) = inp else {
            return Err(Error::Argument("--jones needs a diagram".into()));
        };
        let j = jones::jones(d)?;
        let _ = writeln!(text, "{j}");
        out["jones"] = json!(j.to_string());
    }
    Ok((text, out))
}

/// Writes to stdout, ignoring a closed pipe.
fn put(s: &str) {
    let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), s.as_bytes());
}

fn emit(text: &str, v: &Value, format: Format) {
    match format {
        Format::Text => put(text),
        Format::Json => put(&format!("{}\n", serde_json::to_string_pretty(v).expect("serializable"))),
    }
}

struct Row {
    name: String,
    result: Result<(i32, usize, Vec<String>, Value)>,
}

fn batch_one(name: &str, cfg: &Config) -> Row {
    let result = (|| {
        let d = knots::builtin(name)?;
        let u = build_universal(&d, &cfg.build)?;
        if cfg.verify {
            u.verify()?;
        }
        let s = s_invariant(&u)?;
        let rational = standard_table(&u, CoeffRing::Q)?;
        let w = width(&rational)?;
        let rings = [CoeffRing::Q, CoeffRing::Zp(2), CoeffRing::Zp(3), CoeffRing::Z];
        let reports = rings.iter().map(|r| ss_report(&u, *r)).collect::<Result<Vec<_>>>()?;
        let words = reports.iter().map(|r| ss_word(r).to_string()).collect();
        let v = json!({
            "schema": SCHEMA,
            "input": name,
            "complex": u.canonical().to_json(),
            "s": s,
            "width": w,
            "homology": [{"promotion": "standard", "ring": "Q", "table": rational.to_json()}],
            "ss": reports.iter().map(SSReport::to_json).collect::<Vec<_>>(),
        });
        Ok((s, w, words, v))
    })();
    Row { name: name.to_string(), result }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn batch(list: &str, out: Option<&PathBuf>, cfg: &Config) -> Result<bool> {
    let names: Vec<String> = if list.trim() == "all" {
        knots::names().into_iter().map(String::from).collect()
    } else {
        list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
    };
    let threads = std::env::var("KHUNIV_THREADS").ok().and_then(|t| t.parse::<usize>().ok()).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Argument(e.to_string()))?;
    let rows: Vec<Row> = pool.install(|| names.par_iter().map(|n| batch_one(n, cfg)).collect());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Argument(format!("{}: {e}", dir.display())))?;
    }
    let mut csv = format!("{BATCH_HEADER}\n");
    let mut ok = true;
    for r in &rows {
        match &r.result {
            Ok((s, w, words, v)) => {
                let _ = writeln!(csv, "{},{s},{w},{},", csv_field(&r.name), words.join(","));
                if let Some(dir) = out {
                    let path = dir.join(format!("{}.json", r.name));
                    let body = serde_json::to_string_pretty(v).expect("serializable");
                    std::fs::write(&path, body).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
                }
            }
            Err(e) => {
                ok = false;
                eprintln!("{}: {e}", r.name);
                let _ = writeln!(csv, "{},,,,,,,{}", csv_field(&r.name), csv_field(&e.to_string()));
            }
        }
    }
    match out {
        Some(dir) => {
            let path = dir.join("summary.csv");
            std::fs::write(&path, &csv).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
        }
        None => put(&csv),
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|cfg| match &cli.batch {
        Some(list) => batch(list, cli.out.as_ref(), &cfg),
        None => {
            let inp = input(&cli)?;
            let (text, v) = run(&inp, &cfg)?;
            emit(&text, &v, cfg.format);
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("khuniv: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}
