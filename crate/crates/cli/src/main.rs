use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cyclofree::kfree::{
    density_estimate, extract_patches_with, sieve_box_with, AdmissibilityChecker, NormBound, PatchJson, PatchShape,
    SieveOptions, DEFAULT_MAX_POINTS,
};
use cyclofree::symmetries::{aq_search, generator_elements, verify_lemma_factors, verify_on_box};
use cyclofree::zeta::{dedekind_zeta_with, Interval};
use cyclofree::{Error, Execution};

const MAX_POINTS_ENV: &str = "CYCLOFREE_MAX_POINTS";

#[derive(Parser)]
#[command(name = "cyclofree", version, about = "k-free integers of cyclotomic fields")]
struct Cli {
    /// Worker threads (0 = one per core). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomised sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve the k-free points of a centred box and write them to a file.
    Sieve(SieveArgs),
    /// Enclosure of the Dedekind zeta value ζ_K(k).
    Zeta(ZetaArgs),
    /// Empirical density of a box against 1/ζ_K(k).
    Density(DensityArgs),
    /// Enclosure of the entropy constant log(2)/ζ_K(k).
    Entropy(ZetaArgs),
    /// Admissibility of a patch read from JSON {n, k, shape, fill}.
    Admissible(AdmissibleArgs),
    /// Check every generator symmetry on sampled k-free points.
    Symcheck(SymcheckArgs),
    /// Least a_q satisfying (H1)-(H3).
    Aq(AqArgs),
    /// Patch occurrence counts over a sieved box.
    Patches(PatchesArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BoundKind {
    Crude,
    Embedding,
}

impl From<BoundKind> for NormBound {
    fn from(b: BoundKind) -> Self {
        match b {
            BoundKind::Crude => NormBound::Crude,
            BoundKind::Embedding => NormBound::Embedding,
        }
    }
}

#[derive(Args, Serialize)]
struct BoxArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    radius: u64,
    #[arg(long, value_enum, default_value_t = BoundKind::Crude)]
    norm_bound: BoundKind,
}

#[derive(Args, Serialize)]
struct SieveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    grid: BoxArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Prime bound for the reference density in the side report.
    #[arg(long, default_value_t = 1_000_000)]
    prime_bound: u64,
}

#[derive(Args, Serialize)]
struct ZetaArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1_000_000)]
    prime_bound: u64,
}

#[derive(Args, Serialize)]
struct DensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    grid: BoxArgs,
    #[arg(long, default_value_t = 1_000_000)]
    prime_bound: u64,
}

#[derive(Args, Serialize)]
struct AdmissibleArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args, Serialize)]
struct SymcheckArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    radius: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args, Serialize)]
struct AqArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    ell_bound: u64,
    #[arg(long)]
    a_bound: u64,
    /// Also verify the factor lemma at `m,j` (repeatable).
    #[arg(long = "lemma", value_name = "M,J")]
    lemma: Vec<String>,
}

#[derive(Args, Serialize)]
struct PatchesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    grid: BoxArgs,
    /// Offsets as `x1,..,xd;x1,..,xd;...`. Defaults to the 2-block {0,1}^d.
    #[arg(long)]
    shape: Option<String>,
}

/// Failure carrying an exit code and, for verification failures, a payload.
struct Failure {
    code: u8,
    message: String,
    payload: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceCap { .. } => 3,
            Error::NotFound { .. } => 4,
            Error::FactoringCapacity(_) | Error::Overflow(_) | Error::RankDeficient => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
            payload: None,
        }
    }
}

impl Failure {
    fn io(e: std::io::Error, what: &str) -> Self {
        Failure {
            code: 1,
            message: format!("{what}: {e}"),
            payload: None,
        }
    }

    fn invalid(message: String) -> Self {
        Failure {
            code: 2,
            message,
            payload: None,
        }
    }
}

struct Outcome {
    parameters: Value,
    payload: Value,
    extra_bytes: Vec<u8>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serialisable")
}

fn max_points() -> Result<u64, Failure> {
    match std::env::var(MAX_POINTS_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::invalid(format!("{MAX_POINTS_ENV} must be an integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_MAX_POINTS),
    }
}

fn exec() -> Execution {
    Execution::Parallel
}

fn sieve_options(b: &BoxArgs) -> Result<SieveOptions, Failure> {
    Ok(SieveOptions {
        norm_bound: b.norm_bound.into(),
        max_points: max_points()?,
        norm_limit: None,
        exec: exec(),
    })
}

fn run_sieve(a: &SieveArgs) -> Result<Outcome, Failure> {
    let g = &a.grid;
    let b = sieve_box_with(g.n, g.k, g.radius, &sieve_options(g)?)?;
    let mut bytes = Vec::new();
    match a.format {
        Format::Csv => b.write_csv(&mut bytes).map_err(|e| Failure::io(e, "csv"))?,
        Format::Json => {
            let doc = json!({
                "n": b.n(),
                "k": b.k(),
                "radius": b.radius(),
                "d": b.dim(),
                "order": "lexicographic, x1 most significant",
                "count": b.count(),
                "flags": b.bitstring(),
            });
            bytes = serde_json::to_vec(&doc).expect("json");
            bytes.push(b'\n');
        }
    }
    fs::write(&a.out, &bytes).map_err(|e| Failure::io(e, &a.out.display().to_string()))?;
    let report = density_estimate(&b, a.prime_bound)?;
    let mut side = a.out.clone().into_os_string();
    side.push(".density.json");
    let side = PathBuf::from(side);
    let mut report_bytes = serde_json::to_vec_pretty(&report).expect("json");
    report_bytes.push(b'\n');
    fs::write(&side, &report_bytes).map_err(|e| Failure::io(e, &side.display().to_string()))?;
    let mut extra = bytes;
    extra.extend_from_slice(&report_bytes);
    Ok(Outcome {
        parameters: to_value(a),
        payload: json!({
            "points_file": a.out.display().to_string(),
            "density_file": side.display().to_string(),
            "box_volume": b.volume(),
            "point_count": b.count(),
            "prime_ideals_used": b.prime_ideals_used().len(),
            "norm_bound": b.norm_bound().to_string(),
            "density": report,
        }),
        extra_bytes: extra,
    })
}

fn run_zeta(a: &ZetaArgs) -> Result<Outcome, Failure> {
    let z = dedekind_zeta_with(a.n, a.k, a.prime_bound, exec())?;
    Ok(Outcome {
        parameters: to_value(a),
        payload: to_value(&z.report()),
        extra_bytes: Vec::new(),
    })
}

fn interval_json(i: &Interval) -> Value {
    json!({ "lower": i.lo.to_string(), "upper": i.hi.to_string() })
}

fn run_entropy(a: &ZetaArgs) -> Result<Outcome, Failure> {
    let z = dedekind_zeta_with(a.n, a.k, a.prime_bound, exec())?;
    let entropy = z.density.mul_pos(Interval::ln2());
    Ok(Outcome {
        parameters: to_value(a),
        payload: json!({
            "n": a.n,
            "k": a.k,
            "prime_bound": a.prime_bound,
            "entropy": interval_json(&entropy),
            "density": interval_json(&z.density),
            "log2": std::f64::consts::LN_2.to_string(),
        }),
        extra_bytes: Vec::new(),
    })
}

fn run_density(a: &DensityArgs) -> Result<Outcome, Failure> {
    let g = &a.grid;
    let b = sieve_box_with(g.n, g.k, g.radius, &sieve_options(g)?)?;
    Ok(Outcome {
        parameters: to_value(a),
        payload: to_value(&density_estimate(&b, a.prime_bound)?),
        extra_bytes: Vec::new(),
    })
}

fn run_admissible(a: &AdmissibleArgs) -> Result<Outcome, Failure> {
    let text = fs::read_to_string(&a.input).map_err(|e| Failure::io(e, &a.input.display().to_string()))?;
    let patch: PatchJson =
        serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{}: {e}", a.input.display())))?;
    let points = patch.occupied_points()?;
    let checker = AdmissibilityChecker::new(patch.n, patch.k, points.len())?;
    let report = checker.check(&points)?;
    Ok(Outcome {
        parameters: json!({ "in": a.input.display().to_string(), "n": patch.n, "k": patch.k }),
        payload: to_value(&report),
        extra_bytes: Vec::new(),
    })
}

fn run_symcheck(a: &SymcheckArgs, seed: u64) -> Result<Outcome, Failure> {
    let opts = SieveOptions {
        max_points: max_points()?,
        exec: exec(),
        ..SieveOptions::default()
    };
    let b = sieve_box_with(a.n, a.k, a.radius, &opts)?;
    let mut reports = Vec::new();
    let mut failures = 0;
    for s in generator_elements(a.n)? {
        let rep = verify_on_box(&s, &b, a.samples, seed, exec())?;
        failures += rep.failures.len();
        reports.push(rep);
    }
    let payload = json!({
        "n": a.n,
        "k": a.k,
        "radius": a.radius,
        "samples": a.samples,
        "unit_group_note": "generators span a finite-index subgroup of the unit group; the index is not computed",
        "total_failures": failures,
        "elements": reports,
    });
    if failures > 0 {
        return Err(Failure {
            code: 4,
            message: format!("{failures} stabiliser failures"),
            payload: Some(payload),
        });
    }
    Ok(Outcome {
        parameters: to_value(a),
        payload,
        extra_bytes: Vec::new(),
    })
}

fn parse_pair(s: &str) -> Result<(u64, u64), Failure> {
    let bad = || Failure::invalid(format!("expected M,J, got {s:?}"));
    let (m, j) = s.split_once(',').ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

fn run_aq(a: &AqArgs) -> Result<Outcome, Failure> {
    let pairs = a.lemma.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>, _>>()?;
    let c = match aq_search(a.n, a.q, a.ell_bound, a.a_bound, exec()) {
        Ok(c) => c,
        Err(e @ Error::NotFound { .. }) => {
            return Err(Failure {
                code: 4,
                message: e.to_string(),
                payload: Some(json!({ "found": false, "scanned": [0, a.a_bound] })),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let lemmas = pairs
        .iter()
        .map(|&(m, j)| verify_lemma_factors(&c, m, j))
        .collect::<Result<Vec<_>, _>>()?;
    let failed = lemmas.iter().filter(|r| !r.passed()).count();
    let payload = json!({ "found": true, "candidate": c, "lemmas": lemmas });
    if failed > 0 {
        return Err(Failure {
            code: 4,
            message: format!("{failed} lemma checks failed"),
            payload: Some(payload),
        });
    }
    Ok(Outcome {
        parameters: to_value(a),
        payload,
        extra_bytes: Vec::new(),
    })
}

fn parse_shape(s: &str) -> Result<Vec<Vec<i64>>, Failure> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.split(',')
                .map(|c| {
                    c.trim()
                        .parse()
                        .map_err(|_| Failure::invalid(format!("bad offset {t:?} in shape")))
                })
                .collect()
        })
        .collect()
}

fn run_patches(a: &PatchesArgs) -> Result<Outcome, Failure> {
    let g = &a.grid;
    let b = sieve_box_with(g.n, g.k, g.radius, &sieve_options(g)?)?;
    let shape = match &a.shape {
        Some(s) => PatchShape::new(parse_shape(s)?)?,
        None => PatchShape::block(b.dim(), 2)?,
    };
    let counts = extract_patches_with(&b, &shape, exec())?;
    let patches: Vec<Value> = counts
        .configs()
        .map(|(cfg, c)| {
            json!({
                "fill": cfg.fill_string(),
                "count": c,
                "frequency": c as f64 / counts.anchors as f64,
            })
        })
        .collect();
    Ok(Outcome {
        parameters: to_value(a),
        payload: json!({
            "n": g.n,
            "k": g.k,
            "radius": g.radius,
            "shape": shape.offsets(),
            "anchors": counts.anchors,
            "distinct": counts.distinct(),
            "entropy_estimate": counts.entropy_estimate(),
            "patches": patches,
        }),
        extra_bytes: Vec::new(),
    })
}

fn parameters(c: &Command) -> Value {
    match c {
        Command::Sieve(a) => to_value(a),
        Command::Zeta(a) | Command::Entropy(a) => to_value(a),
        Command::Density(a) => to_value(a),
        Command::Admissible(a) => json!({ "in": a.input.display().to_string() }),
        Command::Symcheck(a) => to_value(a),
        Command::Aq(a) => to_value(a),
        Command::Patches(a) => to_value(a),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sieve(_) => "sieve",
        Command::Zeta(_) => "zeta",
        Command::Density(_) => "density",
        Command::Entropy(_) => "entropy",
        Command::Admissible(_) => "admissible",
        Command::Symcheck(_) => "symcheck",
        Command::Aq(_) => "aq",
        Command::Patches(_) => "patches",
    }
}

fn digest(payload: &Value, extra: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(payload).expect("json"));
    h.update(extra);
    hex::encode(h.finalize())
}

fn emit(command: &str, parameters: Value, seed: u64, started: Instant, payload: Value, extra: &[u8]) {
    let doc = json!({
        "manifest": {
            "command": command,
            "parameters": parameters,
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_ms": started.elapsed().as_millis() as u64,
            "output_digest": digest(&payload, extra),
        },
        "payload": payload,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
}

fn configure_threads(threads: usize) -> Result<(), Failure> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::invalid(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let name = command_name(&cli.command);
    let result = configure_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Sieve(a) => run_sieve(a),
        Command::Zeta(a) => run_zeta(a),
        Command::Density(a) => run_density(a),
        Command::Entropy(a) => run_entropy(a),
        Command::Admissible(a) => run_admissible(a),
        Command::Symcheck(a) => run_symcheck(a, cli.seed),
        Command::Aq(a) => run_aq(a),
        Command::Patches(a) => run_patches(a),
    });
    match result {
        Ok(out) => {
            emit(name, out.parameters, cli.seed, started, out.payload, &out.extra_bytes);
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(payload) = f.payload {
                emit(name, parameters(&cli.command), cli.seed, started, payload, &[]);
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
