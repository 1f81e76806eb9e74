use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mebn_rm::bench::{run_bench, BenchSpec};
use mebn_rm::config::{MappingConfig, PrefixPolicy};
use mebn_rm::ingest::{load_instances, render_schema_dsl, render_schema_json, IngestError, SchemaFormat, SchemaSource};
use mebn_rm::instances::{enumerate_false_assertions, map_instances};
use mebn_rm::mapper::map_rdbs_to_mtheory;
use mebn_rm::mebn::{emit_script, MTheory};
use mebn_rm::normalize::normalize_er;
use mebn_rm::schema::RelationalDatabaseSchema;
use mebn_rm::stats::StatsReport;

/// Translate relational schemas into partial MEBN theory scripts.
#[derive(Parser)]
#[command(name = "mebn-rm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check entity-relationship normal form; exit 1 on violations.
    Check(SchemaArgs),
    /// Repair a schema into entity-relationship normal form.
    Normalize {
        #[command(flatten)]
        schema: SchemaArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output format of the repaired schema.
        #[arg(long, value_enum, default_value = "dsl")]
        emit: EmitFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Map a schema to an MTheory script.
    Map {
        #[command(flatten)]
        mapping: MappingArgs,
        /// Also print element counts and mapping time to stderr.
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a directory of `<relation>.csv` tables into ground assertions.
    Assert {
        #[command(flatten)]
        mapping: MappingArgs,
        /// Directory holding one CSV file per relation.
        data_dir: PathBuf,
        /// Also emit closed-world `false` assertions for absent tuples.
        #[arg(long)]
        emit_false: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print element counts of a schema and its mapped theory.
    Stats {
        #[command(flatten)]
        mapping: MappingArgs,
    },
    /// Time the mapping over synthetic schemas.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SchemaArgs {
    /// Schema file (`.rdbs`, `.sql`, `.json`), or `-` for stdin.
    schema: PathBuf,
    /// Input format; defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
}

#[derive(Args)]
struct MappingArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    /// Mapping configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resident-node prefix policy: `none`, `auto`, or a prefix map file.
    #[arg(long)]
    prefix: Option<String>,
    /// Normalize the schema before mapping.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Relation counts for the relation sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 150, 200, 250, 300, 350, 400, 450, 500])]
    relations: Vec<usize>,
    /// Non-key attributes per relation during the relation sweep.
    #[arg(long, default_value_t = 10)]
    attributes: usize,
    /// Non-key attributes per relation for the attribute sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [10, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500])]
    attribute_sweep: Vec<usize>,
    /// Relation count held fixed during the attribute sweep.
    #[arg(long, default_value_t = 100)]
    fixed_relations: usize,
    #[arg(long, default_value_t = 2)]
    key_width: usize,
    #[arg(long, default_value_t = 0.5)]
    entity_fraction: f64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generate schemas on several threads; timing stays sequential.
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Dsl,
    Ddl,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    Dsl,
    Json,
}

/// Exit 1 for domain violations, 2 for usage, syntax and I/O errors.
enum Failure {
    Domain(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Domain(m) | Failure::Usage(m) => f.write_str(m),
        }
    }
}

fn domain(e: impl fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Check(args) => check(&args),
        Command::Normalize {
            schema,
            config,
            emit,
            out,
        } => {
            let config = load_config(config.as_deref())?;
            let raw = load_schema(&schema)?;
            let normalized = normalize_er(&raw, &config).map_err(domain)?;
            for rel in &normalized.relations()[raw.relations().len()..] {
                eprintln!("note: added entity relation {}", rel.name);
            }
            let text = match emit {
                EmitFormat::Dsl => render_schema_dsl(&normalized),
                EmitFormat::Json => render_schema_json(&normalized),
            };
            write_output(out.as_deref(), &text)
        }
        Command::Map { mapping, stats, out } => {
            let (schema, config) = prepare(&mapping)?;
            let (theory, report) = map_timed(&schema, &config)?;
            let text = emit_script(&theory).map_err(domain)?;
            write_output(out.as_deref(), &text)?;
            if stats {
                eprint!("{report}");
            }
            Ok(())
        }
        Command::Assert {
            mapping,
            data_dir,
            emit_false,
            out,
        } => {
            let (schema, mut config) = prepare(&mapping)?;
            config.closed_world |= emit_false;
            let (theory, _) = map_timed(&schema, &config)?;
            let (db, warnings) = load_instances(&data_dir, &schema).map_err(|e| match e {
                mebn_rm::ingest::LoadError::Data { .. } => domain(e),
                other => usage(other),
            })?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let mut assertions = map_instances(&db, &theory, &config).map_err(domain)?;
            if emit_false {
                assertions.extend(enumerate_false_assertions(&db, &theory, &config).map_err(domain)?);
            }
            let text: String = assertions.iter().map(|a| format!("{a}\n")).collect();
            write_output(out.as_deref(), &text)
        }
        Command::Stats { mapping } => {
            let (schema, config) = prepare(&mapping)?;
            let (_, report) = map_timed(&schema, &config)?;
            write_output(None, &report.to_string())
        }
        Command::Bench(args) => {
            let spec = BenchSpec {
                relation_counts: args.relations,
                attributes_per_relation: args.attributes,
                attribute_counts: args.attribute_sweep,
                fixed_relations: args.fixed_relations,
                key_width: args.key_width,
                entity_fraction: args.entity_fraction,
                repetitions: args.reps,
                seed: args.seed,
                parallel: args.parallel,
            };
            let report = run_bench(&spec).map_err(usage)?;
            write_output(args.out.as_deref(), &report.to_string())
        }
    }
}

fn check(args: &SchemaArgs) -> Result<(), Failure> {
    let schema = load_schema(args)?;
    let violations = schema.check_er_normal_form();
    if violations.is_empty() {
        println!("ok: {} relations in entity-relationship normal form", schema.relations().len());
        return Ok(());
    }
    let mut stdout = io::stdout().lock();
    for v in &violations {
        writeln!(stdout, "{v}").map_err(usage)?;
    }
    Err(Failure::Domain(format!(
        "{} normal-form violation(s); `normalize` can repair them",
        violations.len()
    )))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("<stdin>: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_schema(args: &SchemaArgs) -> Result<RelationalDatabaseSchema, Failure> {
    let format = match args.format {
        Some(InputFormat::Dsl) => SchemaFormat::Dsl,
        Some(InputFormat::Ddl) => SchemaFormat::Ddl,
        Some(InputFormat::Json) => SchemaFormat::Structured,
        None if args.schema == Path::new("-") => SchemaFormat::Dsl,
        None => SchemaFormat::from_path(&args.schema).ok_or_else(|| {
            usage(format!(
                "{}: cannot tell the schema format from the extension; pass --format",
                args.schema.display()
            ))
        })?,
    };
    let origin = if args.schema == Path::new("-") {
        "<stdin>".to_string()
    } else {
        args.schema.display().to_string()
    };
    let source = SchemaSource {
        format,
        text: read_text(&args.schema)?,
        origin: origin.clone(),
    };
    source.parse().map_err(|e| {
        let msg = format!("{origin}:{e}");
        match e {
            IngestError::Schema { .. } => Failure::Domain(msg),
            _ => Failure::Usage(msg),
        }
    })
}

fn load_config(path: Option<&Path>) -> Result<MappingConfig, Failure> {
    match path {
        None => Ok(MappingConfig::default()),
        Some(p) => {
            MappingConfig::from_toml(&read_text(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn prepare(args: &MappingArgs) -> Result<(RelationalDatabaseSchema, MappingConfig), Failure> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(p) = &args.prefix {
        config.prefix_policy = match PrefixPolicy::parse_keyword(p) {
            Some(policy) => policy,
            None => PrefixPolicy::from_map_file(&read_text(Path::new(p))?).map_err(|e| usage(format!("{p}: {e}")))?,
        };
    }
    let mut schema = load_schema(&args.schema)?;
    if args.normalize {
        schema = normalize_er(&schema, &config).map_err(domain)?;
    }
    Ok((schema, config))
}

fn map_timed(schema: &RelationalDatabaseSchema, config: &MappingConfig) -> Result<(MTheory, StatsReport), Failure> {
    let start = Instant::now();
    let theory = map_rdbs_to_mtheory(schema, config).map_err(domain)?;
    let elapsed = start.elapsed();
    if let PrefixPolicy::Explicit(map) = &config.prefix_policy {
        for name in map.keys().filter(|n| theory.mfrag(n).is_none()) {
            eprintln!("warning: prefix map names unknown MFrag {name}");
        }
    }
    let report = StatsReport::new(schema, &theory, elapsed);
    Ok((theory, report))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => io::stdout().lock().write_all(text.as_bytes()).map_err(usage),
    }
}
