//! Command-line front end: exact computation, verification runs, sampling
//! and the large-n limits.

mod inputs;

use std::fmt::Display;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use assign_lab::asymptotics::{self, RegionSpec};
use assign_lab::conjecture;
use assign_lab::engine::{CaseMatrix, Engine, EngineConfig, EngineError, Strategy};
use assign_lab::exact::{self, Rat, RatFunc};
use assign_lab::golden;
use assign_lab::montecarlo::{self, SampleConfig};
use assign_lab::pattern;

use inputs::{resolve_case, resolve_pattern};

#[derive(Parser)]
#[command(name = "assign-lab", version, about = "Expected optimal k-assignment costs in exponential matrices with prescribed zeros")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute F for a pattern and print its b-triangle
    Compute(ComputeArgs),
    /// Check exact identities and the tabulated cases
    Verify {
        #[command(subcommand)]
        target: VerifyTarget,
    },
    /// Estimate F or a usage probability by sampling
    Simulate(SimulateArgs),
    /// Limit integral and closed form for the large-n limit
    Asymptotics(AsymptoticsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Recurse,
    Alt,
}

#[derive(Args)]
struct ComputeArgs {
    /// Assignment size; defaults to the k stored in a case file
    #[arg(long)]
    k: Option<usize>,
    /// Named pattern, text pattern file, or JSON case file
    #[arg(long)]
    pattern: String,
    #[arg(long, value_enum, default_value = "recurse")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 64)]
    depth_limit: usize,
    /// Evaluate the covering-probability formula instead of recursing
    #[arg(long)]
    formula: bool,
    /// Skip the closed form for patterns holding a (k-1)-assignment
    #[arg(long)]
    no_fast_path: bool,
    /// Write the recursion tree as JSON to this file
    #[arg(long)]
    trace: Option<std::path::PathBuf>,
    /// Admit k = 6 on the empty pattern
    #[arg(long)]
    allow_long: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum VerifyTarget {
    /// Recursion on the empty pattern against the Coppersmith-Sorkin sum
    Cs {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        allow_long: bool,
    },
    /// F_n(n, n) against the Parisi sum
    Parisi {
        #[arg(long)]
        n: usize,
    },
    /// Recursion against the tabulated cases
    Appendix {
        /// Comma-separated case numbers, ranges like 20-30, or `all`
        #[arg(long, default_value = "all")]
        cases: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// The diagonal-pattern closed form and its specializations
    Diagonal {
        #[arg(long)]
        k: usize,
    },
    /// Möbius form against the covering-probability form at fixed sizes
    Mobius {
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        k: usize,
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        dims: Vec<usize>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "empty")]
    pattern: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// One-based cell whose usage probability is estimated
    #[arg(long, num_args = 2, value_names = ["R", "C"])]
    cell: Option<Vec<usize>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionArg {
    Quarter,
    Pnorm,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[arg(long, value_enum)]
    region: RegionArg,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Comma-separated sizes for a convergence table
    #[arg(long)]
    table: Option<String>,
    #[arg(long, default_value_t = 2000)]
    subset_samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(String),
    Engine(String),
    Verify,
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Hazard(_)
        | EngineError::Cycle(_)
        | EngineError::DepthLimit(_)
        | EngineError::AltInapplicable(_)
        | EngineError::ProbabilityMismatch(_) => Failure::Engine(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn workers(flag: usize) -> usize {
    std::env::var("ASSIGN_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(flag)
        .max(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Verify { target } => verify(target),
        Command::Simulate(a) => simulate(a),
        Command::Asymptotics(a) => asymptotics_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Engine(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verify) => ExitCode::from(3),
    }
}

fn rat_json(r: &Rat) -> Value {
    if r.is_integer() {
        if let Ok(v) = r.to_integer().to_string().parse::<i64>() {
            return json!(v);
        }
    }
    json!(r.to_string())
}

fn compute(a: ComputeArgs) -> Result<(), Failure> {
    let case = resolve_case(&a.pattern, a.k)?;
    let k = case.k;
    let engine = Engine::new(EngineConfig {
        depth_limit: a.depth_limit,
        fast_path: !a.no_fast_path,
        trace: a.trace.is_some(),
        long_running: a.allow_long,
        ..EngineConfig::default()
    });
    let (f, provenance) = if a.formula {
        if !case.specials.is_empty() {
            return Err(usage("the formula applies to patterns without special entries"));
        }
        let f = conjecture::main_conjecture_f(&case.pattern, k).map_err(usage)?;
        (f, conjecture::provenance(&case.pattern, k))
    } else {
        if case.specials.is_empty() && case.pattern.is_empty() {
            engine.f_empty(k).map_err(engine_failure)?;
        }
        let strategy = match a.strategy {
            StrategyArg::Recurse => Strategy::Recurse,
            StrategyArg::Alt => Strategy::Alt,
        };
        let f = engine.evaluate(&case, strategy).map_err(engine_failure)?;
        (f, conjecture::Provenance::Exact)
    };
    if let Some(path) = &a.trace {
        let trace = serde_json::to_string_pretty(&engine.take_trace()).map_err(usage)?;
        std::fs::write(path, trace).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let t = exact::to_btriangle(&f, k).map_err(usage)?;
    let prov = serde_json::to_value(provenance).map_err(usage)?;
    if a.json {
        let residual: Vec<String> = if t.residual.is_zero() {
            Vec::new()
        } else {
            vec![t.residual.to_string()]
        };
        let b: Vec<Vec<Value>> = t.rows().iter().map(|r| r.iter().map(rat_json).collect()).collect();
        let report = json!({
            "pattern": case.describe(),
            "k": k,
            "F": f.to_string(),
            "b": b,
            "residual": residual,
            "provenance": prov,
        });
        println!("{}", serde_json::to_string_pretty(&report).map_err(usage)?);
    } else {
        println!("F = {f}");
        println!("b-triangle (k = {k}):");
        for row in t.rows() {
            let cells: Vec<String> = row.iter().map(|b| format!("{b:>3}")).collect();
            println!("  {}", cells.join(" "));
        }
        if !t.residual.is_zero() {
            println!("residual: {}", t.residual);
        }
        println!("provenance: {}", prov.as_str().unwrap_or("exact"));
    }
    Ok(())
}

struct Tally {
    failed: usize,
    engine_errors: usize,
}

impl Tally {
    fn new() -> Self {
        Tally {
            failed: 0,
            engine_errors: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl Display) {
        println!("{} {what}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }

    fn finish(self) -> Result<(), Failure> {
        if self.engine_errors > 0 {
            Err(Failure::Engine(format!("{} engine error(s)", self.engine_errors)))
        } else if self.failed > 0 {
            Err(Failure::Verify)
        } else {
            Ok(())
        }
    }
}

fn parse_case_list(spec: &str, max: usize) -> Result<Vec<usize>, Failure> {
    if spec.trim() == "all" {
        return Ok((1..=max).collect());
    }
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim().parse::<usize>(), b.trim().parse::<usize>()),
            None => (part.parse(), part.parse()),
        };
        let (lo, hi) = (lo.map_err(|_| usage(format!("bad case '{part}'")))?, hi.map_err(|_| usage(format!("bad case '{part}'")))?);
        if lo == 0 || hi > max || lo > hi {
            return Err(usage(format!("case range '{part}' outside 1..={max}")));
        }
        out.extend(lo..=hi);
    }
    if out.is_empty() {
        return Err(usage("no cases selected"));
    }
    Ok(out)
}

fn verify(target: VerifyTarget) -> Result<(), Failure> {
    let mut tally = Tally::new();
    match target {
        VerifyTarget::Cs { k, allow_long } => {
            let e = Engine::new(EngineConfig {
                long_running: allow_long,
                ..EngineConfig::default()
            });
            let f = e.f_empty(k).map_err(engine_failure)?;
            tally.check(f == conjecture::cs_formula(k), format!("empty pattern k={k} equals the Coppersmith-Sorkin sum"));
        }
        VerifyTarget::Parisi { n } => {
            if !(1..=5).contains(&n) {
                return Err(usage("parisi supports 1 <= n <= 5"));
            }
            let target = conjecture::parisi_value(n);
            let e = Engine::default();
            let f = e.f_empty(n).map_err(engine_failure)?;
            let v = f.eval_int(n as i64, n as i64).map_err(usage)?;
            tally.check(v == target, format!("F_{n}({n},{n}) = {v} (Parisi sum {target})"));
            if (2..=4).contains(&n) {
                let s = e.square_reduce(n).map_err(engine_failure)?;
                tally.check(s == target, format!("square reduction n={n} gives {s}"));
            }
        }
        VerifyTarget::Appendix { cases, workers: w } => {
            let all = golden::appendix_cases();
            let picked = parse_case_list(&cases, all.len())?;
            let engine = Engine::default();
            let results: Mutex<Vec<Option<Result<(bool, f64), String>>>> = Mutex::new(vec![None; picked.len()]);
            let next = AtomicUsize::new(0);
            let start = Instant::now();
            std::thread::scope(|s| {
                for _ in 0..workers(w) {
                    s.spawn(|| loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        if i >= picked.len() {
                            break;
                        }
                        let c = &all[picked[i] - 1];
                        let t = Instant::now();
                        let r = engine
                            .recurse(&c.to_case())
                            .map(|v| (v == c.value(), t.elapsed().as_secs_f64()))
                            .map_err(|e| e.to_string());
                        results.lock().unwrap()[i] = Some(r);
                    });
                }
            });
            for (i, r) in results.into_inner().unwrap().into_iter().enumerate() {
                match r.expect("every case evaluated") {
                    Ok((ok, secs)) => tally.check(ok, format!("case {} ({secs:.2}s)", picked[i])),
                    Err(msg) => {
                        println!("FAIL case {}: {}", picked[i], msg.lines().next().unwrap_or(""));
                        tally.failed += 1;
                        tally.engine_errors += 1;
                    }
                }
            }
            let stats = engine.stats();
            println!(
                "{} case(s) in {:.1}s; {} race nodes with probability sums checked, {} hazard retries",
                picked.len(),
                start.elapsed().as_secs_f64(),
                stats.probability_checks,
                stats.hazard_retries
            );
        }
        VerifyTarget::Diagonal { k } => {
            if !(1..=8).contains(&k) {
                return Err(usage("diagonal supports 1 <= k <= 8"));
            }
            let f = conjecture::diagonal_f(k);
            let kk = k as i64;
            let h: Rat = (1..=kk).map(|i| exact::ratio(1, i)).sum::<Rat>() / exact::rat(kk);
            let v = f.eval_int(kk, kk).map_err(usage)?;
            tally.check(v == h, format!("diagonal k={k} at ({k},{k}) equals H_{k}/{k} = {h}"));
            let at_k = f.at_m(&exact::rat(kk)).map_err(usage)?;
            let expect: RatFunc = (0..kk)
                .map(|j| (&RatFunc::n() - &RatFunc::from_int(j)).recip().expect("nonzero"))
                .sum::<RatFunc>()
                .scale(&exact::ratio(1, kk));
            tally.check(at_k == expect, format!("diagonal k={k} at m={k} equals (1/{k}) sum 1/(n-j)"));
            if k <= 6 {
                let t = conjecture::main_theorem_f(&conjecture::diag(k - 1), k).map_err(usage)?;
                tally.check(t == f, format!("diagonal k={k} equals the near-assignment formula"));
            }
        }
        VerifyTarget::Mobius { pattern: p, k, dims } => {
            let z = resolve_pattern(&p)?;
            let (m0, n0) = (dims[0], dims[1]);
            let mu = conjecture::mobius_f(&z, k, m0, n0).map_err(usage)?;
            let f = conjecture::main_conjecture_f(&z, k).map_err(usage)?;
            let v = f.eval_int(m0 as i64, n0 as i64).map_err(usage)?;
            tally.check(mu == v, format!("Möbius form {mu} equals covering form {v} at ({m0},{n0})"));
        }
    }
    tally.finish()
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let z = resolve_pattern(&a.pattern)?;
    let cfg = SampleConfig {
        m0: a.m,
        n0: a.n,
        k: a.k,
        zeros: z.clone(),
        samples: a.samples,
        seed: a.seed,
        workers: workers(a.workers),
    };
    cfg.validate().map_err(usage)?;
    let exact_at = |zz: &pattern::ZeroPattern| -> Option<Rat> {
        if a.k > 5 {
            return None;
        }
        let case = CaseMatrix::new(a.k, zz.clone()).concrete(a.m as i64, a.n as i64);
        Engine::default().recurse(&case).ok()?.as_constant()
    };
    let mut caveat = Value::Null;
    let (est, target) = match &a.cell {
        None => (montecarlo::estimate_f(&cfg).map_err(usage)?, exact_at(&z)),
        Some(c) => {
            if c[0] == 0 || c[1] == 0 || c[0] > a.m || c[1] > a.n {
                return Err(usage("cell outside the matrix"));
            }
            let cell = (c[0] - 1, c[1] - 1);
            let est = montecarlo::estimate_use_probability(&cfg, cell).map_err(usage)?;
            let target = if z.is_zero(cell.0, cell.1) {
                if z.len() == 1 {
                    let mut rest = Some(Rat::from_integer(1.into()));
                    for j in (0..a.n).filter(|&j| j != cell.1) {
                        let mut w = z.clone();
                        w.insert(cell.0, j);
                        rest = match (rest, exact_at(&z), exact_at(&w)) {
                            (Some(acc), Some(x), Some(y)) => Some(acc - (x - y)),
                            _ => None,
                        };
                    }
                    rest
                } else {
                    caveat = json!("the cell is one of several zeros; no exact target is derived");
                    None
                }
            } else {
                let mut w = z.clone();
                w.insert(cell.0, cell.1);
                match (exact_at(&z), exact_at(&w)) {
                    (Some(x), Some(y)) => Some(x - y),
                    _ => None,
                }
            };
            (est, target)
        }
    };
    let (t, zscore) = match &target {
        Some(t) => {
            let tf = t.to_string();
            let tv = exact::to_f64(t);
            (json!(tf), json!(est.z_score(tv)))
        }
        None => (Value::Null, Value::Null),
    };
    let report = json!({
        "mean": est.mean,
        "stderr": est.stderr,
        "samples": est.samples,
        "target": t,
        "z": zscore,
        "caveat": caveat,
    });
    println!("{}", serde_json::to_string_pretty(&report).map_err(usage)?);
    Ok(())
}

fn asymptotics_cmd(a: AsymptoticsArgs) -> Result<(), Failure> {
    let region = match a.region {
        RegionArg::Quarter => RegionSpec::quarter_circle(),
        RegionArg::Pnorm => RegionSpec::pnorm(a.p).map_err(usage)?,
    };
    let integral = asymptotics::limit_integral(&region, a.tol).map_err(usage)?;
    let closed = asymptotics::closed_form_limit(region.exponent()).map_err(usage)?;
    let table = match &a.table {
        None => None,
        Some(list) => {
            let ns = list
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| usage(format!("bad size list '{list}'")))?;
            if ns.iter().any(|&n| n == 0) {
                return Err(usage("table sizes must be positive"));
            }
            Some(asymptotics::convergence_table(&region, &ns, a.subset_samples, a.seed).map_err(usage)?)
        }
    };
    if a.json {
        let report = json!({
            "p": region.exponent(),
            "integral": integral,
            "closed_form": closed,
            "difference": (integral - closed).abs(),
            "table": table,
        });
        println!("{}", serde_json::to_string_pretty(&report).map_err(usage)?);
    } else {
        println!("integral: {integral:.10}");
        println!("closed form: {closed:.10}");
        println!("difference: {:.3e}", (integral - closed).abs());
        if let Some(rows) = &table {
            print!("{}", asymptotics::table_csv(rows));
        }
    }
    Ok(())
}
