//! Command-line front end: database generation, synthesis, experiments,
//! fits and gate-proportion estimates.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hiersynth::cost::{CostError, CostModelSpec};
use hiersynth::experiment::{
    self, emit_fit, emit_table, fit_to_csv, parse_table_csv, table_to_csv, EmitError, EmitFormat,
    ExperimentError, ExperimentSpec,
};
use hiersynth::gates::{parse_gate, GateSet, GateSetSpec};
use hiersynth::proportion::{self, ModelError, ProportionParams};
use hiersynth::seqdb::{DbError, SequenceDatabase};
use hiersynth::stats::{ols_fit, scaling_reduction, FitError};
use hiersynth::synth::{self, GrowthPolicy, SynthError};
use hiersynth::SpatialIndex;

#[derive(Parser)]
#[command(
    name = "hier-synth",
    version,
    about = "Cost-optimal single-qubit gate synthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for EmitFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => EmitFormat::Csv,
            Format::Json => EmitFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TextOrJson {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a database up to a cost bound.
    Gen {
        /// Gate set: set1..set6 or L=<3..8>.
        #[arg(long)]
        set: GateSetSpec,
        /// catalyst-direct, catalyst-magic, distillation:<mu> or custom:<path>.
        #[arg(long)]
        cost_model: CostModelSpec,
        #[arg(long)]
        max_cost: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        node_limit: Option<usize>,
    },
    /// Extend a saved database to a higher cost bound.
    Grow {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        max_cost: f64,
        /// Defaults to overwriting the input.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        node_limit: Option<usize>,
    },
    /// Approximate one target gate.
    Synth {
        #[arg(long)]
        db: PathBuf,
        /// Gate literal, e.g. "T", "H*T*H", "Rz(pi/16)", "U(w,x,y,z)".
        #[arg(long)]
        target: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = f64::INFINITY)]
        grow_ceiling: f64,
        #[arg(long, value_enum, default_value_t = TextOrJson::Text)]
        emit: TextOrJson,
        /// Write the database back if synthesis grew it.
        #[arg(long)]
        save: bool,
    },
    /// Mean synthesized cost of random targets over a grid of epsilons.
    Experiment {
        #[arg(long)]
        set: GateSetSpec,
        #[arg(long)]
        cost_model: CostModelSpec,
        /// Comma-separated; defaults to 8 log-spaced values in [0.01, 0.1].
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long, default_value_t = 500)]
        targets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = f64::INFINITY)]
        grow_ceiling: f64,
        #[arg(long)]
        db_cache: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        emit: Format,
        /// Also write the line fit of mean cost against log10(1/epsilon).
        #[arg(long)]
        fit_out: Option<PathBuf>,
    },
    /// Fit mean cost against log10(1/epsilon) from an experiment CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Second table; reports its slope reduction relative to `input`.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        emit: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gate-order proportions from the counting model or from synthesis.
    Proportions {
        #[command(subcommand)]
        mode: ProportionMode,
    },
    /// Quick end-to-end consistency checks.
    Selftest,
}

#[derive(Subcommand)]
enum ProportionMode {
    Model {
        #[arg(long = "L")]
        max_order: u8,
        /// Comma-separated costs c3,c4,...
        #[arg(long, value_delimiter = ',')]
        costs: Vec<f64>,
        /// `auto` or comma-separated set sizes.
        #[arg(long, default_value = "auto")]
        sizes: String,
        #[arg(long)]
        max_cost: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        emit: Format,
    },
    Empirical {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        targets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = f64::INFINITY)]
        grow_ceiling: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        emit: Format,
    },
}

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
enum Failure {
    Check(String),
    Usage(String),
    Resource(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Resource(m) | Failure::Io(m) => m,
        }
    }
}

impl From<DbError> for Failure {
    fn from(e: DbError) -> Self {
        match e {
            DbError::ResourceLimit { .. } => Failure::Resource(e.to_string()),
            DbError::Io(_)
            | DbError::BadMagic
            | DbError::VersionMismatch { .. }
            | DbError::ChecksumMismatch
            | DbError::FingerprintMismatch { .. }
            | DbError::Format(_) => Failure::Io(e.to_string()),
            DbError::Cost(c) => c.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<CostError> for Failure {
    fn from(e: CostError) -> Self {
        match e {
            CostError::Io(_) | CostError::Config(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Db(d) => d.into(),
            e if e.is_resource_limit() => Failure::Resource(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<EmitError> for Failure {
    fn from(e: EmitError) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Db(d) => d.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            set,
            cost_model,
            max_cost,
            out,
            node_limit,
        } => {
            let model = cost_model.resolve(set.max_order)?;
            let mut db = SequenceDatabase::new(GateSet::new(set).map_err(usage)?, model)?;
            if let Some(n) = node_limit {
                db.set_node_limit(n);
            }
            db.grow(max_cost)?;
            db.save(&out)?;
            println!("{}", summary(&db));
        }
        Command::Grow {
            db,
            max_cost,
            out,
            node_limit,
        } => {
            let mut d = SequenceDatabase::load(&db)?;
            if let Some(n) = node_limit {
                d.set_node_limit(n);
            }
            d.grow(max_cost)?;
            d.save(out.as_ref().unwrap_or(&db))?;
            println!("{}", summary(&d));
        }
        Command::Synth {
            db,
            target,
            epsilon,
            grow_ceiling,
            emit,
            save,
        } => {
            let target_gate = parse_gate(&target).map_err(usage)?;
            let mut d = SequenceDatabase::load(&db)?;
            let before = d.len();
            let mut index = SpatialIndex::new();
            let r = synth::synthesize(
                &mut d,
                &mut index,
                &target_gate,
                epsilon,
                &GrowthPolicy::with_ceiling(grow_ceiling),
            )?;
            if save && d.len() != before {
                d.save(&db)?;
            }
            match emit {
                TextOrJson::Json => {
                    let v = serde_json::json!({
                        "target": target,
                        "sequence": r.labels(),
                        "cost": r.cost,
                        "achieved_error": r.achieved_error,
                        "epsilon": r.epsilon,
                        "watermark": r.grew_to,
                    });
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                }
                TextOrJson::Text => {
                    let seq = if r.sequence.is_empty() {
                        "I".to_string()
                    } else {
                        r.labels().join(" ")
                    };
                    println!("sequence: {seq}");
                    println!("cost: {}", r.cost);
                    println!("error: {:.6e}", r.achieved_error);
                    println!("watermark: {}", r.grew_to);
                }
            }
        }
        Command::Experiment {
            set,
            cost_model,
            epsilons,
            targets,
            seed,
            grow_ceiling,
            db_cache,
            out,
            emit,
            fit_out,
        } => {
            let mut spec = ExperimentSpec::new(set, cost_model.resolve(set.max_order)?);
            if let Some(e) = epsilons {
                spec.epsilons = e;
            }
            spec.targets = targets;
            spec.seed = seed;
            spec.growth_ceiling = grow_ceiling;
            spec.db_cache = db_cache;
            let outcome = experiment::run_experiment(&spec)?;
            let rows = &outcome.table.rows;
            match &out {
                Some(p) => emit_table(rows, emit.into(), p)?,
                None => print!("{}", render_table(rows, emit.into())),
            }
            if let Some(p) = &fit_out {
                let fit = outcome.table.fit().map_err(usage)?;
                emit_fit(&fit, emit.into(), p)?;
            }
            if let Some(e) = outcome.error {
                return Err(Failure::Resource(format!("partial results: {e}")));
            }
        }
        Command::Fit {
            input,
            compare,
            emit,
            out,
        } => {
            let base = fit_file(&input)?;
            let text = match compare {
                None => render_fit(&base, emit.into()),
                Some(other) => {
                    let b = fit_file(&other)?;
                    let red = scaling_reduction(&base, &b).map_err(usage)?;
                    match emit {
                        Format::Csv => format!(
                            "base_slope,other_slope,reduction_percent,uncertainty\n{:.11e},{:.11e},{:.11e},{:.11e}\n",
                            base.slope, b.slope, red.percent, red.uncertainty
                        ),
                        Format::Json => json_line(&serde_json::json!({
                            "base": base, "other": b, "reduction": red,
                        })),
                    }
                }
            };
            write_or_print(out.as_deref(), &text)?;
        }
        Command::Proportions { mode } => proportions(mode)?,
        Command::Selftest => selftest()?,
    }
    Ok(())
}

fn summary(db: &SequenceDatabase) -> String {
    format!(
        "accepted {} sequences up to cost {} ({} queued)",
        db.len(),
        db.watermark(),
        db.frontier_len()
    )
}

fn render_table(rows: &[experiment::ExperimentRow], format: EmitFormat) -> String {
    match format {
        EmitFormat::Csv => table_to_csv(rows),
        EmitFormat::Json => json_line(&rows),
    }
}

fn render_fit(fit: &hiersynth::FitResult, format: EmitFormat) -> String {
    match format {
        EmitFormat::Csv => fit_to_csv(fit),
        EmitFormat::Json => json_line(fit),
    }
}

fn json_line<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn fit_file(path: &Path) -> Result<hiersynth::FitResult, Failure> {
    let rows = parse_table_csv(&std::fs::read_to_string(path)?)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n > 0)
        .map(|r| ((1.0 / r.epsilon).log10(), r.mean_cost))
        .collect();
    ols_fit(&points).map_err(|e: FitError| usage(format!("{}: {e}", path.display())))
}

fn proportion_csv(p: &std::collections::BTreeMap<u8, f64>) -> String {
    let mut s = String::from("order,proportion\n");
    for (l, v) in p {
        let _ = writeln!(s, "{l},{v:.11e}");
    }
    s
}

fn proportions(mode: ProportionMode) -> Result<(), Failure> {
    let model_err = |e: ModelError| usage(e);
    match mode {
        ProportionMode::Model {
            max_order,
            costs,
            sizes,
            max_cost,
            emit,
        } => {
            if usize::from(max_order) != costs.len() + 2 {
                return Err(usage(format!(
                    "--L {max_order} needs {} costs, got {}",
                    usize::from(max_order).saturating_sub(2),
                    costs.len()
                )));
            }
            let params = if sizes == "auto" {
                ProportionParams::new(costs, max_cost)
            } else {
                let sizes = sizes
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<u64>()
                            .map_err(|_| usage(format!("bad set size `{s}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ProportionParams::with_sizes(costs, sizes, max_cost)
            }
            .map_err(model_err)?;
            let r = proportion::proportions(&params).map_err(model_err)?;
            match emit {
                Format::Csv => print!("{}", proportion_csv(&r.p)),
                Format::Json => print!("{}", json_line(&r)),
            }
        }
        ProportionMode::Empirical {
            db,
            epsilon,
            targets,
            seed,
            grow_ceiling,
            emit,
        } => {
            let mut d = SequenceDatabase::load(&db)?;
            let mut index = SpatialIndex::new();
            let t = experiment::draw_targets(seed, targets);
            let rs = synth::batch_synthesize(
                &mut d,
                &mut index,
                &t,
                epsilon,
                &GrowthPolicy::with_ceiling(grow_ceiling),
            )?;
            let p = proportion::empirical_proportions(&rs).map_err(model_err)?;
            match emit {
                Format::Csv => print!("{}", proportion_csv(&p)),
                Format::Json => print!("{}", json_line(&p)),
            }
        }
    }
    Ok(())
}

fn selftest() -> Result<(), Failure> {
    let mut failures = 0;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        failures += usize::from(!ok);
    };

    let direct: Vec<f64> = (3..=7)
        .map(|l| hiersynth::cost::catalyst_direct_cost(l).unwrap_or(f64::NAN))
        .collect();
    check(
        "catalyst cost table",
        direct == [1.0, 2.5, 3.25, 3.625, 3.8125],
    );

    let all_24 = (1..=6).all(|k| {
        GateSetSpec::set(k)
            .ok()
            .and_then(|s| {
                let model = CostModelSpec::CatalystDirect.resolve(s.max_order).ok()?;
                SequenceDatabase::generate_for(s, model, 0.0).ok()
            })
            .is_some_and(|db| db.len() == 24)
    });
    check("zero-cost closure is the 24 Cliffords", all_24);

    let set1 = GateSetSpec::set(1).map_err(usage)?;
    let model = CostModelSpec::CatalystDirect.resolve(3)?;
    let mut db = SequenceDatabase::generate_for(set1, model.clone(), 0.0)?;
    let mut index = SpatialIndex::new();
    let targets = experiment::draw_targets(1, 20);
    let rs = synth::batch_synthesize(&mut db, &mut index, &targets, 0.1, &GrowthPolicy::default())?;
    let all_verified = rs
        .iter()
        .zip(&targets)
        .all(|(r, t)| synth::verify(r, t, &model).passed());
    check("synthesized sequences verify", all_verified);
    let optimal = rs.iter().zip(&targets).all(|(r, t)| {
        synth::scan_optimum(&db, t, 0.1).is_some_and(|(id, _)| db.nodes()[id].cost() == r.cost)
    });
    check("synthesis matches exhaustive scan", optimal);

    let back = SequenceDatabase::from_bytes(&db.to_bytes());
    check(
        "database save/load round trip",
        back.is_ok_and(|b| b.to_bytes() == db.to_bytes()),
    );

    let p = ProportionParams::new(vec![1.0, 1.0], 6.0)
        .and_then(|p| proportion::proportions(&p))
        .map(|r| r.p.values().sum::<f64>());
    check(
        "model proportions sum to one",
        p.is_ok_and(|s| (s - 1.0).abs() < 1e-9),
    );

    if failures == 0 {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{failures} self-test check(s) failed"
        )))
    }
}
