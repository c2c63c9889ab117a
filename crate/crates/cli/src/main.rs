mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use hcap_core::capacity::{capacity_report, ReportOptions};
use hcap_core::verify::{
    corpus_generate, run_all, run_claim, CheckResult, Claim, CorpusKind, CorpusSpec, Fixtures, ScaleDist, Summary,
    VerifyConfig,
};
use hcap_core::wos::{WalkParams, DEFAULT_EPS_STOP};
use hcap_core::{Error, ShapeFile};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use report::{capacity_rows, emit, Envelope, Format, Report, Row};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "hcap", version, about = "Half-plane and disk capacity estimates and comparisons")]
struct Cli {
    /// Worker threads; changes run time only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity, comparator areas and ratios for one shape file.
    Capacity(CapacityArgs),
    /// Run one claim, or all, over canonical cases and a seeded corpus.
    Verify(VerifyArgs),
    /// Write a seeded corpus of shape files and a manifest.
    Corpus(CorpusArgs),
    /// Regenerate the fixture brackets from a pilot run.
    Pilot(PilotArgs),
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CapacityArgs {
    file: PathBuf,
    /// Closed forms for a single half-disk, slit or ring.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 200_000)]
    walks: usize,
    #[arg(long, default_value_t = DEFAULT_EPS_STOP)]
    eps_stop: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_area: f64,
    /// Absolute heights of the hcap fit; default {4,8,16,32} times the hull radius.
    #[arg(long, value_delimiter = ',')]
    y_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    claim: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    walks: usize,
    #[arg(long, default_value_t = DEFAULT_EPS_STOP)]
    eps_stop: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_area: f64,
    #[arg(long, default_value_t = 10)]
    corpus_size: usize,
    /// Heights of the transport tables.
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    y_grid: Option<Vec<f64>>,
    /// Treat inconclusive rows as failures.
    #[arg(long)]
    strict: bool,
    /// Fixture file replacing the shipped brackets.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "corpus")]
    out: PathBuf,
    /// log2 range of element scales, as MIN,MAX.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    scale: Option<Vec<f64>>,
}

#[derive(Args)]
struct PilotArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    walks: usize,
    #[arg(long, default_value_t = 30)]
    corpus_size: usize,
    #[arg(long)]
    out: PathBuf,
}

/// A failed command and its exit status.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn validation(err: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, err: err.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Shape(_) | Error::Argument(_) | Error::Json(_) => 2,
            _ => 3,
        };
        Failure { code, err: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure { code: 1, err }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match cli.command {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Corpus(a) => cmd_corpus(a),
        Command::Pilot(a) => cmd_pilot(a),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn envelope(start: Instant) -> Envelope {
    Envelope {
        wall_time: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Failure::validation(anyhow!("--{name} must be positive, got {v}")))
    }
}

fn cmd_capacity(a: CapacityArgs) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&a.file)
        .with_context(|| format!("reading {}", a.file.display()))
        .map_err(Failure::validation)?;
    let file = ShapeFile::parse(&text)
        .with_context(|| format!("parsing {}", a.file.display()))
        .map_err(Failure::validation)?;
    let set = file.into_set().map_err(Error::from)?;
    check_positive("eps-stop", a.eps_stop)?;
    check_positive("tol-area", a.tol_area)?;
    if a.walks < 2 {
        return Err(Failure::validation(anyhow!("--walks must be at least 2")));
    }
    if let Some(g) = &a.y_grid {
        for y in g {
            check_positive("y-grid", *y)?;
        }
    }
    let opts = ReportOptions {
        params: WalkParams::new(a.walks, a.eps_stop, a.seed),
        tol_area: a.tol_area,
        y_grid: a.y_grid.clone(),
        exact: a.exact,
    };
    let rep = capacity_report(&set, &opts)?;
    let manifest = json!({
        "command": "capacity",
        "input": a.file.display().to_string(),
        "input_sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "space": rep.space,
        "config": rep.provenance,
        "notes": rep.notes,
        "version": VERSION,
    });
    let r = Report::new(manifest, capacity_rows(&rep), envelope(start));
    emit(&r.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn print_breakdown(claim: &str, rows: &[CheckResult]) {
    let s = Summary::of(rows);
    eprintln!(
        "{claim}: {} pass, {} fail, {} inconclusive, {} table",
        s.pass, s.fail, s.inconclusive, s.table
    );
    for r in rows.iter().filter(|r| r.verdict == Some(hcap_core::verify::Verdict::Fail)) {
        eprintln!("  FAIL {} {} value {}{}", r.claim, r.case, r.value, r.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default());
    }
}

fn load_fixtures(p: &Path) -> Result<Fixtures, Failure> {
    let text = std::fs::read_to_string(p)
        .with_context(|| format!("reading {}", p.display()))
        .map_err(Failure::validation)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", p.display()))
        .map_err(Failure::validation)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let claims: Vec<Claim> = if a.claim == "all" {
        Claim::ALL.to_vec()
    } else {
        vec![a.claim.parse::<Claim>()?]
    };
    let mut cfg = VerifyConfig::new(a.seed);
    cfg.n_walks = a.walks;
    cfg.eps_stop = a.eps_stop;
    cfg.tol_area = a.tol_area;
    cfg.corpus_size = a.corpus_size;
    cfg.y_grid = a.y_grid;
    if let Some(y) = a.y {
        cfg.y_list = y;
    }
    if let Some(p) = &a.fixtures {
        cfg.fixtures = load_fixtures(p)?;
    }
    cfg.validate()?;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    if claims.len() == Claim::ALL.len() {
        let all = run_all(&cfg)?;
        for c in Claim::ALL {
            let prefix = format!("{}.", c.name());
            let part: Vec<CheckResult> = all.iter().filter(|r| r.claim.starts_with(&prefix)).cloned().collect();
            print_breakdown(c.name(), &part);
            summary.push((c.name(), Summary::of(&part)));
        }
        rows = all;
    } else {
        for c in claims {
            let part = run_claim(c, &cfg)?;
            print_breakdown(c.name(), &part);
            summary.push((c.name(), Summary::of(&part)));
            rows.extend(part);
        }
    }
    let ok = summary.iter().all(|(_, s)| s.ok(a.strict));
    let manifest = json!({
        "command": "verify",
        "claim": a.claim,
        "claims": summary.iter().map(|(c, _)| *c).collect::<Vec<_>>(),
        "strict": a.strict,
        "config": cfg,
        "summary": summary.iter().map(|(c, s)| (c.to_string(), *s)).collect::<std::collections::BTreeMap<_, _>>(),
        "version": VERSION,
    });
    let r = Report::new(manifest, rows.into_iter().map(Row::from).collect(), envelope(start));
    emit(&r.render(a.output.format)?, a.output.out.as_deref())?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct CorpusEntry {
    file: String,
    sha256: String,
}

fn cmd_corpus(a: CorpusArgs) -> Result<ExitCode, Failure> {
    let kind: CorpusKind = a.kind.parse()?;
    let mut spec = CorpusSpec::new(kind, a.count, a.seed);
    if let Some(s) = &a.scale {
        spec.scale = ScaleDist {
            log2_min: s[0],
            log2_max: s[1],
        };
    }
    let sets = corpus_generate(&spec)?;
    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .map_err(Failure::validation)?;
    let mut files = Vec::new();
    for (j, set) in sets.iter().enumerate() {
        let name = format!("{}-{j:04}.json", kind.name());
        let mut bytes = serde_json::to_vec_pretty(&ShapeFile::from_set(set)).map_err(Error::from)?;
        bytes.push(b'\n');
        std::fs::write(a.out.join(&name), &bytes).with_context(|| format!("writing {name}"))?;
        files.push(CorpusEntry {
            file: name,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let manifest = json!({
        "schema": "corpus-manifest/1",
        "kind": kind,
        "count": spec.count,
        "seed": spec.seed,
        "scale": spec.scale,
        "files": files,
        "version": VERSION,
    });
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(Error::from)?;
    bytes.push(b'\n');
    let path = a.out.join("manifest.json");
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {} files and {}", spec.count, path.display());
    Ok(ExitCode::SUCCESS)
}

/// Claims whose rows feed the fixture brackets.
const PILOT_CLAIMS: [Claim; 7] = [
    Claim::T1,
    Claim::T2,
    Claim::Prop1,
    Claim::Prop1Induction,
    Claim::Fattening,
    Claim::Omega,
    Claim::HcapCrad,
];

fn cmd_pilot(a: PilotArgs) -> Result<ExitCode, Failure> {
    let mut cfg = VerifyConfig::new(a.seed);
    cfg.n_walks = a.walks;
    cfg.corpus_size = a.corpus_size;
    cfg.fixtures = Fixtures::open();
    let mut rows = Vec::new();
    for c in PILOT_CLAIMS {
        let t = Instant::now();
        let part = run_claim(c, &cfg)?;
        eprintln!("{c}: {} rows in {:.1}s", part.len(), t.elapsed().as_secs_f64());
        rows.extend(part);
    }
    let f = Fixtures::from_pilot(&rows, a.seed, a.walks, a.corpus_size)?;
    let mut bytes = serde_json::to_vec_pretty(&f).map_err(Error::from)?;
    bytes.push(b'\n');
    emit(&bytes, Some(&a.out))?;
    Ok(ExitCode::SUCCESS)
}
