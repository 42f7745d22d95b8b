//! `folio`: generate, regenerate and evaluate book designs, or serve the studio API.

use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use folio_core::evaluate::{attribute_vector, coherence_report, diversity_score};
use folio_core::features::Feature;
use folio_core::planner::{import_settings, parse_constraints, MarginPins, PageSize};
use folio_core::rng::next_seed;
use folio_core::typeset::metrics::FontMap;
use folio_core::{load_rules, Constraints, DesignSettings, Engine, Error, ErrorClass, JobRecord, RuleSet};

#[derive(Parser)]
#[command(name = "folio", version, about = "Generative book typesetting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design and typeset a manuscript.
    Generate(GenerateArgs),
    /// Run the job in an output directory again with a new seed.
    Regenerate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Diversity and coherence of the settings.json files under a directory.
    Evaluate {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, env = "FOLIO_RULES")]
        rules: Option<PathBuf>,
    },
    /// Load and check a rule file.
    ValidateRules {
        #[arg(long)]
        rules: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "0.0.0.0")]
        host: String,
        #[arg(long, default_value = "folio-books")]
        spill_dir: PathBuf,
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Books kept in memory; older ones are read back from the spill directory.
        #[arg(long, default_value_t = 16)]
        resident_books: usize,
        #[arg(long, env = "FOLIO_RULES")]
        rules: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    images: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Settings file whose fields are all pinned.
    #[arg(long)]
    settings: Option<PathBuf>,
    #[arg(long, env = "FOLIO_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, overrides_with = "no_toc")]
    toc: bool,
    #[arg(long)]
    no_toc: bool,
    #[arg(long, overrides_with = "no_colophon")]
    colophon: bool,
    #[arg(long)]
    no_colophon: bool,
    #[arg(long)]
    language: Option<String>,
    /// Let features switch on freely.
    #[arg(long)]
    surprise: bool,
    #[arg(long = "feature", value_name = "NAME")]
    features: Vec<Feature>,
    /// Page size in mm, e.g. 130x200.
    #[arg(long, value_parser = parse_page)]
    page: Option<PageSize>,
    /// Margins in mm: top,inside,bottom,outside.
    #[arg(long, value_parser = parse_margins)]
    margins: Option<MarginPins>,
    #[arg(long)]
    columns: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_page(s: &str) -> Result<PageSize, String> {
    let (w, h) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(PageSize { w: num(w)?, h: num(h)? })
}

fn parse_margins(s: &str) -> Result<MarginPins, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [top, inside, bottom, outside] => Ok(MarginPins {
            top: Some(top),
            inside: Some(inside),
            bottom: Some(bottom),
            outside: Some(outside),
        }),
        _ => Err(format!("expected four margins top,inside,bottom,outside, got {}", v.len())),
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

fn engine(rules: Option<&Path>) -> Result<Engine> {
    match rules {
        None => Ok(Engine::with_defaults()),
        Some(path) => {
            let rules = load_rules(&read(path)?).with_context(|| format!("{}", path.display()))?;
            let fonts = FontMap::from_rules(&rules);
            Ok(Engine::new(rules, fonts))
        }
    }
}

fn random_seed() -> u64 {
    let mut h = RandomState::new().build_hasher();
    h.write_u128(std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos()));
    h.finish()
}

fn constraints(args: &GenerateArgs, rules: &RuleSet) -> Result<Constraints> {
    let base = match &args.settings {
        Some(path) => import_settings(&read(path)?, rules).with_context(|| format!("{}", path.display()))?,
        None => Constraints::default(),
    };
    let flag = |on: bool, off: bool| match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    let flags = Constraints {
        page: args.page,
        margins: args.margins.unwrap_or_default(),
        grid: folio_core::planner::GridPins {
            columns: args.columns,
            ..Default::default()
        },
        toc: flag(args.toc, args.no_toc),
        colophon: flag(args.colophon, args.no_colophon),
        language: args.language.clone(),
        surprise: args.surprise.then_some(true),
        features: (!args.features.is_empty()).then(|| args.features.clone()),
        ..Default::default()
    };
    let c = base.overlay(&flags);
    c.validate(rules)?;
    Ok(c)
}

fn run_job(engine: &Engine, job: &JobRecord, out: &Path) -> Result<()> {
    let source = read(&job.input)?;
    let book = engine.generate(&source, job.images.as_deref(), &job.constraints, job.seed)?;
    let pages = out.join("pages");
    if pages.exists() {
        std::fs::remove_dir_all(&pages).map_err(|e| Error::io(&pages, e))?;
    }
    book.write_to(out, engine.fonts.map())?;
    job.save(&out.join("job.json"))?;
    for w in &book.warnings {
        log::warn!("{w}");
    }
    println!(
        "{}: {} pages, {} {}, {} mm, seed {}",
        out.display(),
        book.page_count(),
        book.settings.book_type,
        book.settings.pairing,
        book.settings.page_label().trim_end_matches(" mm"),
        job.seed
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let engine = engine(args.rules.as_deref())?;
    let c = constraints(&args, &engine.rules)?;
    let seed = args.seed.or(c.seed).unwrap_or_else(random_seed);
    let job = JobRecord {
        input: absolute(&args.input),
        images: args.images.as_deref().map(absolute),
        rules: args.rules.as_deref().map(absolute),
        constraints: c,
        seed,
    };
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    run_job(&engine, &job, &args.out)
}

fn regenerate(out: &Path) -> Result<()> {
    let mut job = JobRecord::load(&out.join("job.json"))?;
    let engine = engine(job.rules.as_deref())?;
    job.seed = next_seed(job.seed);
    run_job(&engine, &job, out)
}

fn evaluate(dir: &Path, rules: Option<&Path>) -> Result<()> {
    let rules = engine(rules)?.rules;
    let mut files: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file() && e.file_name() == "settings.json")
        .map(|e| e.into_path())
        .collect();
    files.sort();
    let mut vectors = Vec::new();
    for f in &files {
        let c = parse_constraints(&read(f)?).with_context(|| format!("{}", f.display()))?;
        let s = DesignSettings::from_constraints(&c).with_context(|| format!("{}", f.display()))?;
        vectors.push(attribute_vector::<f64>(&s, &rules));
    }
    let diversity = diversity_score(&vectors)?;
    let report = coherence_report(&vectors)?;
    println!("designs    {}", vectors.len());
    println!("diversity  {diversity:.3}");
    println!("coherence  {:.3}", report.score);
    println!();
    println!("{:<18} {:>7} {:>7}", "slot", "shared", "spread");
    for s in &report.slots {
        println!("{:<18} {:>7} {:>7.3}", s.slot, if s.shared { "yes" } else { "no" }, s.spread);
    }
    println!("{} of {} slots shared", report.shared(), report.slots.len());
    Ok(())
}

fn validate_rules(path: &Path) -> Result<()> {
    let rules = load_rules(&read(path)?).with_context(|| format!("{}", path.display()))?;
    println!(
        "{}: ok, {} page sizes, {} pairings, {} header layouts",
        path.display(),
        rules.size_options.len(),
        rules.pairings.len(),
        rules.header_layouts.len()
    );
    Ok(())
}

fn serve(port: u16, host: &str, spill_dir: PathBuf, static_dir: Option<PathBuf>, resident: usize, rules: Option<&Path>) -> Result<()> {
    let engine = Arc::new(engine(rules)?);
    let mut config = folio_server::Config::new(spill_dir);
    config.static_dir = static_dir;
    config.resident_books = resident;
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    log::info!("listening on {addr}");
    rt.block_on(folio_server::serve(engine, config, addr))
        .map_err(|e| Error::io(addr.to_string(), e))?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let class = err.chain().find_map(|e| e.downcast_ref::<Error>()).map(Error::class);
    match class {
        Some(ErrorClass::Parse) => 2,
        Some(ErrorClass::Constraint) => 3,
        Some(ErrorClass::Infeasible) => 4,
        Some(ErrorClass::Io) | None => 5,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Regenerate { out } => regenerate(&out),
        Command::Evaluate { dir, rules } => evaluate(&dir, rules.as_deref()),
        Command::ValidateRules { rules } => validate_rules(&rules),
        Command::Serve { port, host, spill_dir, static_dir, resident_books, rules } => {
            serve(port, &host, spill_dir, static_dir, resident_books, rules.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}

