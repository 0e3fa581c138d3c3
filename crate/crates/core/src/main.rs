use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use implbase::bases::{proper_premise_base, stem_base};
use implbase::bounds::{
    almost_sure_lower_exponent, almost_sure_total_log10, avg_pp_exponent, classify_regime,
    total_base_bound_log10, BoundError, ContextParams, PolynomialCount, RegimeThresholds,
};
use implbase::harness::{fit_exponent, read_csv, run_sweep, write_csv, SizeLimits, SweepSpec};
use implbase::io::{parse_context, write_burmeister};
use implbase::random::{ModelSpec, MultiParamSpec, SingleParamSpec};
use implbase::{FormalContext, ImplicationBase};

#[derive(Parser)]
#[command(
    name = "implbase",
    version,
    about = "Implicational bases of formal contexts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an implication base of a context file (Burmeister or 0/1 CSV).
    Compute(ComputeArgs),
    /// Generate a random context in Burmeister format.
    Gen(GenArgs),
    /// Evaluate the bound exponents for given parameters.
    Bounds(BoundsArgs),
    /// Run a seeded parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Fit the bound constants to a sweep CSV.
    Fit(FitArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaseArg {
    Proper,
    Stem,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Single,
    Multi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolyCountArg {
    /// count |U ∪ R|
    Ur,
    /// count |F ∪ R|
    Fr,
}

#[derive(clap::Args)]
struct Limits {
    /// Refuse the stem base above this many attributes.
    #[arg(long, default_value_t = 24)]
    max_stem_attributes: usize,
    /// Refuse the proper-premise base above this many attributes.
    #[arg(long, default_value_t = 64)]
    max_proper_attributes: usize,
}

impl Limits {
    fn get(&self) -> SizeLimits {
        SizeLimits {
            max_proper_attributes: self.max_proper_attributes,
            max_stem_attributes: self.max_stem_attributes,
        }
    }
}

#[derive(clap::Args)]
struct ComputeArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "proper")]
    base: BaseArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    limits: Limits,
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "single")]
    model: ModelArg,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    objects: usize,
    #[arg(long, default_value_t = 10)]
    attributes: usize,
    #[arg(long, default_value_t = 0)]
    u_size: usize,
    #[arg(long, default_value_t = 0)]
    r_size: usize,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, default_value_t = 0.5)]
    f_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn spec(&self) -> ModelSpec {
        match self.model {
            ModelArg::Single => ModelSpec::Single(SingleParamSpec {
                n_objects: self.objects,
                n_attributes: self.attributes,
                p: self.p,
                seed: self.seed,
            }),
            ModelArg::Multi => ModelSpec::Multi(self.multi()),
        }
    }

    fn multi(&self) -> MultiParamSpec {
        MultiParamSpec {
            n_objects: self.objects,
            n_attributes: self.attributes,
            u_size: self.u_size,
            r_size: self.r_size,
            x: self.x,
            f_prob: self.f_prob,
            seed: self.seed,
        }
    }
}

#[derive(clap::Args)]
struct GenArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Read the model from a key=value file instead of flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "")]
    name: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BoundsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c2: f64,
    #[arg(long, default_value_t = 1.0)]
    k1: f64,
    #[arg(long, default_value_t = 1.0)]
    k2: f64,
    #[arg(long, default_value_t = 2.0)]
    k3: f64,
    #[arg(long, default_value_t = 0.5)]
    k4: f64,
    #[arg(long, value_enum, default_value = "ur")]
    poly_count: PolyCountArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "single")]
    model: ModelArg,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [10])]
    attributes: Vec<usize>,
    /// Defaults to pairing each attribute count with the same object count.
    #[arg(long, value_delimiter = ',')]
    objects: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    u_size: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    r_size: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    f_prob: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "proper")]
    base: BaseArg,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    c2: f64,
    /// Add per-phase wall-time columns (output is then not reproducible).
    #[arg(long)]
    timings: bool,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    limits: Limits,
}

#[derive(clap::Args)]
struct FitArgs {
    /// Sweep CSV; `-` reads standard input.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn base_summary(base: &ImplicationBase) -> String {
    format!(
        "# base={} premises={} pairs={}\n",
        base.kind(),
        base.len(),
        base.pair_count()
    )
}

fn compute(args: &ComputeArgs) -> Result<()> {
    let text = fs::read_to_string(&args.file)
        .with_context(|| format!("reading {}", args.file.display()))?;
    let ctx = parse_context(&text).with_context(|| format!("parsing {}", args.file.display()))?;
    let n = ctx.n_attributes();
    let limits = args.limits.get();
    let want_proper = args.base != BaseArg::Stem;
    let want_stem = args.base != BaseArg::Proper;
    if want_proper && n > limits.max_proper_attributes {
        bail!(
            "context has {n} attributes; the proper-premise base is limited to {} (--max-proper-attributes)",
            limits.max_proper_attributes
        );
    }
    if want_stem && n > limits.max_stem_attributes {
        bail!(
            "context has {n} attributes; the stem base is limited to {} (--max-stem-attributes)",
            limits.max_stem_attributes
        );
    }
    let mut bases = Vec::new();
    if want_proper {
        bases.push(proper_premise_base(&ctx));
    }
    if want_stem {
        bases.push(stem_base(&ctx));
    }
    let out = render_bases(&ctx, &bases, args.format);
    emit(None, &out)
}

fn render_bases(ctx: &FormalContext, bases: &[ImplicationBase], format: Format) -> String {
    let names = ctx.attribute_names();
    let names_of =
        |s: &implbase::AttributeSet| s.iter().map(|a| names[a].clone()).collect::<Vec<_>>();
    match format {
        Format::Text => bases
            .iter()
            .map(|b| b.to_text(names) + &base_summary(b))
            .collect(),
        Format::Csv => {
            let mut out = String::from("base,premise,conclusion\n");
            for b in bases {
                for imp in b.implications() {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        b.kind(),
                        names_of(imp.premise()).join(" "),
                        names_of(imp.conclusion()).join(" ")
                    ));
                }
            }
            out
        }
        Format::Json => {
            let value: Vec<_> = bases
                .iter()
                .map(|b| {
                    json!({
                        "base": b.kind(),
                        "premises": b.len(),
                        "pairs": b.pair_count(),
                        "implications": b.implications().iter().map(|imp| json!({
                            "premise": names_of(imp.premise()),
                            "conclusion": names_of(imp.conclusion()),
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&value).unwrap_or_default() + "\n"
        }
    }
}

fn gen(args: &GenArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let lines: Vec<&str> = text
                .lines()
                .filter(|l| !l.trim_start().starts_with('#'))
                .collect();
            ModelSpec::from_kv(&lines).unwrap_or_else(|e| usage_error(e))
        }
        None => args.model.spec(),
    };
    let ctx = spec.generate().unwrap_or_else(|e| usage_error(e));
    let ctx = ctx.with_name(args.name.clone());
    emit(args.out.as_ref(), &write_burmeister(&ctx, &spec.to_kv()))
}

fn bound_row(result: Result<f64, BoundError>) -> String {
    match result {
        Ok(v) => format!("{v:.6}"),
        Err(BoundError::DegenerateDense(_)) => "degenerate-dense".to_string(),
        Err(e) => format!("undefined: {e}"),
    }
}

fn bounds(args: &BoundsArgs) -> Result<()> {
    let m = &args.model;
    let mut rows: Vec<(String, String)> = Vec::new();
    match m.model {
        ModelArg::Single => {
            if !(m.p > 0.0 && m.p < 1.0) {
                usage_error(format!(
                    "--p must lie strictly between 0 and 1, got {}",
                    m.p
                ));
            }
            let params = ContextParams {
                n_attributes: m.attributes,
                n_objects: m.objects,
                p: m.p,
            };
            let query = params.hypergraph_query(args.c);
            rows.push(("edge_count".into(), format!("{:.6}", query.m)));
            rows.push(("alpha".into(), format!("{:.6}", query.alpha)));
            rows.push((
                "avg_exponent".into(),
                bound_row(avg_pp_exponent(&params, args.c)),
            ));
            rows.push((
                "lower_exponent".into(),
                bound_row(almost_sure_lower_exponent(&params, args.c2)),
            ));
            rows.push((
                "total_log10".into(),
                bound_row(total_base_bound_log10(&params, args.c)),
            ));
            rows.push((
                "lower_total_log10".into(),
                bound_row(almost_sure_total_log10(&params, args.c2)),
            ));
        }
        ModelArg::Multi => {
            let spec = m.multi();
            let probs = spec
                .effective_probabilities()
                .unwrap_or_else(|e| usage_error(e));
            let thresholds = RegimeThresholds {
                k1: args.k1,
                k2: args.k2,
                k3: args.k3,
                k4: args.k4,
                polynomial_count: match args.poly_count {
                    PolyCountArg::Ur => PolynomialCount::UbiquitousAndRare,
                    PolyCountArg::Fr => PolynomialCount::FreeAndRare,
                },
            };
            let report = classify_regime(&spec, &thresholds);
            let mean_p = probs.iter().sum::<f64>() / probs.len().max(1) as f64;
            rows.push(("mean_probability".into(), format!("{mean_p:.6}")));
            rows.push(("regime_per_attribute".into(), report.regime.as_str().into()));
            // the |A| factor is polynomial, so the total base shares the regime
            rows.push(("regime_total".into(), report.regime.as_str().into()));
            rows.push(("witness".into(), report.witness.clone()));
            rows.push((
                "thresholds".into(),
                format!(
                    "k1={} k2={} k3={} k4={} count={}",
                    args.k1,
                    args.k2,
                    args.k3,
                    args.k4,
                    match args.poly_count {
                        PolyCountArg::Ur => "ur",
                        PolyCountArg::Fr => "fr",
                    }
                ),
            ));
        }
    }
    let out = match args.format {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = rows
                .into_iter()
                .map(|(k, v)| (k, serde_json::Value::String(v)))
                .collect();
            serde_json::to_string_pretty(&map)? + "\n"
        }
        Format::Csv | Format::Text => {
            let mut out = String::from("quantity,value\n");
            for (k, v) in rows {
                out.push_str(&format!("{k},{v}\n"));
            }
            out
        }
    };
    emit(None, &out)
}

fn sweep(args: &SweepArgs) -> Result<bool> {
    for &p in args.p.iter().chain(&args.f_prob) {
        if !(0.0..=1.0).contains(&p) {
            usage_error(format!("probabilities must lie in [0, 1], got {p}"));
        }
    }
    let sizes: Vec<(usize, usize)> = if args.objects.is_empty() {
        args.attributes.iter().map(|&n| (n, n)).collect()
    } else {
        args.attributes
            .iter()
            .flat_map(|&n| args.objects.iter().map(move |&m| (n, m)))
            .collect()
    };
    let mut cells = Vec::new();
    for &(n, m) in &sizes {
        match args.model {
            ModelArg::Single => {
                for &p in &args.p {
                    cells.push(ModelSpec::Single(SingleParamSpec {
                        n_objects: m,
                        n_attributes: n,
                        p,
                        seed: 0,
                    }));
                }
            }
            ModelArg::Multi => {
                for &u in &args.u_size {
                    for &r in &args.r_size {
                        for &f in &args.f_prob {
                            cells.push(ModelSpec::Multi(MultiParamSpec {
                                n_objects: m,
                                n_attributes: n,
                                u_size: u,
                                r_size: r,
                                x: args.x,
                                f_prob: f,
                                seed: 0,
                            }));
                        }
                    }
                }
            }
        }
    }
    let mut spec = SweepSpec::new(cells, args.trials, args.seed);
    spec.stem = args.base != BaseArg::Proper;
    spec.timings = args.timings;
    spec.limits = args.limits.get();
    spec.c = args.c;
    spec.c2 = args.c2;
    let output = run_sweep(&spec, args.workers).unwrap_or_else(|e| usage_error(e));
    emit(args.out.as_ref(), &write_csv(&spec, &output.records)?)?;
    Ok(!output.has_errors)
}

fn fit(args: &FitArgs) -> Result<()> {
    let text = if args.input.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        fs::read_to_string(&args.input)
            .with_context(|| format!("reading {}", args.input.display()))?
    };
    let rows = read_csv(&text)?;
    let report = fit_exponent(&rows)?;
    let out = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv | Format::Text => {
            let mut out = String::new();
            out.push_str(&format!("# c={:.6}\n", report.c));
            out.push_str(&format!("# c2={:.6}\n", report.c2));
            out.push_str(&format!(
                "# log_residual_norm={:.6}\n",
                report.log_residual_norm
            ));
            out.push_str(&format!("# skipped_cells={}\n", report.skipped_cells));
            out.push_str("attributes,objects,p,trials,observed_mean,predicted,relative_residual\n");
            for c in &report.cells {
                out.push_str(&format!(
                    "{},{},{},{},{:.6},{:.6},{:.6}\n",
                    c.attributes,
                    c.objects,
                    c.p,
                    c.trials,
                    c.observed_mean,
                    c.predicted,
                    c.relative_residual
                ));
            }
            out
        }
    };
    emit(None, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute(a) => compute(a).map(|_| true),
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
