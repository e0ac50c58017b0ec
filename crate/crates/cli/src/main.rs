use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use chordpack::catalog::{self, CatalogEntry, Objective};
use chordpack::manifolds::{self, CodeFile, Manifold, ManifoldKind};
use chordpack::packing::{self, Code, DensityReport, Status};
use chordpack::volumes::{self, MonteCarloBall, VolumeModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "chordpack",
    version,
    about = "Volumes, kissing radii and packing bounds on unitary, Stiefel and Grassmann manifolds"
)]
struct Cli {
    /// Worker threads for parallel sampling.
    #[arg(long, global = true, env = "MPL_THREADS")]
    threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ball volumes under every model over a radius sweep.
    Volume(VolumeArgs),
    /// Analyze a catalog code or a code file.
    Verify(VerifyArgs),
    /// Distance bounds against the number of codewords.
    Bounds(BoundsArgs),
    /// Mid-distances of random pairs against the kissing radius bounds.
    Midpoints(MidpointArgs),
    /// Named constructions.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Numerical search for a code.
    Search(SearchArgs),
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    /// List available names.
    List,
    /// Write a catalog code as JSON.
    Export {
        #[arg(long)]
        name: String,
    },
}

#[derive(Args, Debug, Clone)]
struct ManifoldArgs {
    #[arg(long)]
    kind: ManifoldKind,
    #[arg(long)]
    n: usize,
    /// Defaults to n for the unitary group.
    #[arg(long)]
    p: Option<usize>,
}

impl ManifoldArgs {
    fn manifold(&self) -> Result<Manifold, String> {
        let p = match (self.kind, self.p) {
            (_, Some(p)) => p,
            (ManifoldKind::Unitary, None) => self.n,
            (kind, None) => return Err(format!("--p is required for {kind} manifolds")),
        };
        Manifold::new(self.kind, self.n, p).map_err(|e| e.to_string())
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// exact-cap, small-ball, gaussian or monte-carlo.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn explicit(&self) -> Result<Option<VolumeModel>, String> {
        let Some(name) = self.model.as_deref() else {
            return Ok(None);
        };
        let model = match name {
            "exact-cap" => VolumeModel::ExactCap,
            "small-ball" => VolumeModel::SmallBall,
            "gaussian" => VolumeModel::GaussianAsymptotic,
            "monte-carlo" => VolumeModel::MonteCarlo {
                samples: self.samples,
                seed: self.seed,
            },
            other => return Err(format!(
                "unknown model '{other}', expected exact-cap, small-ball, gaussian or monte-carlo"
            )),
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(Some(model))
    }
}

/// Exact caps when p = 1, small balls for Grassmann radii below 1, the
/// Gaussian form otherwise.
fn default_model(m: &Manifold, r: f64) -> VolumeModel {
    if m.p() == 1 {
        VolumeModel::ExactCap
    } else if m.kind() == ManifoldKind::Grassmann && r < 1.0 {
        VolumeModel::SmallBall
    } else {
        VolumeModel::GaussianAsymptotic
    }
}

#[derive(Args, Debug)]
struct VolumeArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Single radius.
    #[arg(long, conflicts_with_all = ["r_min", "r_max", "steps", "r_sweep"])]
    r: Option<f64>,
    /// Sweep the full radius range with default settings.
    #[arg(long)]
    r_sweep: bool,
    #[arg(long)]
    r_min: Option<f64>,
    /// Defaults to the largest distance 2R.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["name", "code"]))]
struct VerifyArgs {
    /// Catalog name such as C1 or C2-m3.
    #[arg(long)]
    name: Option<String>,
    /// Code file in JSON form.
    #[arg(long)]
    code: Option<PathBuf>,
    /// Compare against the catalog's expected values.
    #[arg(long, requires = "name")]
    expect: bool,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 2)]
    n_min: u64,
    #[arg(long, default_value_t = 1024)]
    n_max: u64,
}

#[derive(Args, Debug)]
struct MidpointArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    /// Number of random pairs.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    /// Number of codewords.
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value_t = SearchObjective::MaxMinDistance)]
    objective: SearchObjective,
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SearchObjective {
    MaxMinDistance,
    MaxKissingRadius,
}

#[derive(Clone, Debug)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(x.to_string()),
            Cell::Int(x) => json!(x),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

struct Table {
    notes: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Table {
            notes: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::new();
                for note in &self.notes {
                    s.push_str(&format!("# {note}\n"));
                }
                s.push_str(&self.columns.join(","));
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
                    .collect();
                let v = json!({ "notes": self.notes, "columns": self.columns, "rows": rows });
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&v).expect("serializable")
                )
            }
        }
    }
}

fn describe(m: &Manifold) -> String {
    format!(
        "manifold {m}: dim {}, ambient sphere S^{}(R), R = {}",
        m.dim(),
        m.ambient_dim() - 1,
        m.radius()
    )
}

fn cmd_volume(args: &VolumeArgs) -> Result<Table, String> {
    let m = args.manifold.manifold()?;
    let explicit = args.model.explicit()?;
    let max = m.max_distance();
    let radii: Vec<f64> = match args.r {
        Some(r) => vec![r],
        None => {
            let lo = args.r_min.unwrap_or(0.0);
            let hi = args.r_max.unwrap_or(max);
            if args.steps == 0 {
                return Err("--steps must be at least 1".into());
            }
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(format!("--r-min {lo} exceeds --r-max {hi}"));
            }
            if args.steps == 1 {
                vec![lo]
            } else {
                (0..args.steps)
                    .map(|i| lo + (hi - lo) * i as f64 / (args.steps - 1) as f64)
                    .collect()
            }
        }
    };
    if let Some(&bad) = radii.iter().find(|r| !(0.0..=max).contains(*r)) {
        return Err(format!("radius {bad} outside [0, {max}]"));
    }
    let mc = if args.model.samples > 0 {
        Some(
            MonteCarloBall::new(&m, args.model.samples, args.model.seed)
                .map_err(|e| e.to_string())?,
        )
    } else {
        None
    };

    let vol = volumes::manifold_volume(&m);
    let mut table = Table::new(vec![
        "r",
        "exact_cap",
        "small_ball",
        "small_ball_out_of_regime",
        "gaussian",
        "monte_carlo",
        "monte_carlo_std_error",
        "model",
        "selected",
    ]);
    table.notes = vec![
        describe(&m),
        format!(
            "log10 volume {}, small-ball coefficient c = {:e}",
            vol.log10(),
            volumes::small_ball_coeff(&m)
        ),
        "exact_cap: normalized cap of the ambient sphere, exact when p = 1".into(),
        "small_ball: c r^dim, clamped to 1".into(),
        "gaussian: large-dimension limit of the cap measure".into(),
        format!(
            "monte_carlo: fraction of {} Haar samples (seed {}) within r of the base point",
            args.model.samples, args.model.seed
        ),
    ];
    for &r in &radii {
        let eval = |model| volumes::ball_volume(&m, r, model).map_err(|e| e.to_string());
        let exact = eval(VolumeModel::ExactCap)?;
        let small = eval(VolumeModel::SmallBall)?;
        let gauss = eval(VolumeModel::GaussianAsymptotic)?;
        let sampled = mc.as_ref().map(|b| b.measure(r));
        let model = explicit.unwrap_or_else(|| default_model(&m, r));
        let selected = match model {
            VolumeModel::ExactCap => exact.value,
            VolumeModel::SmallBall => small.value,
            VolumeModel::GaussianAsymptotic => gauss.value,
            VolumeModel::MonteCarlo { .. } => eval(model)?.value,
        };
        table.rows.push(vec![
            Cell::Num(r),
            Cell::Num(exact.value),
            Cell::Num(small.value),
            Cell::Bool(small.out_of_regime),
            Cell::Num(gauss.value),
            Cell::opt(sampled.map(|b| b.value)),
            Cell::opt(sampled.map(|b| b.std_error)),
            Cell::Text(model.name().into()),
            Cell::Num(selected),
        ]);
    }
    Ok(table)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Proven => "proven",
        Status::Conjectured => "conjectured",
    }
}

fn load_code(args: &VerifyArgs) -> Result<(Code, Option<CatalogEntry>), String> {
    if let Some(name) = &args.name {
        let entry = CatalogEntry::by_name(name).map_err(|e| e.to_string())?;
        let code = entry.build().map_err(|e| e.to_string())?;
        return Ok((code, Some(entry)));
    }
    let path = args.code.as_ref().expect("clap enforces one source");
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file = CodeFile::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let (m, points) = file
        .to_points()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let code = Code::new(m, points).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((code, None))
}

fn cmd_verify(args: &VerifyArgs, format: Format) -> Result<(String, Option<String>), String> {
    let explicit = args.model.explicit()?;
    let (code, entry) = load_code(args)?;
    let m = *code.manifold();
    let model = match explicit {
        Some(model) => model,
        None if args.expect => VolumeModel::SmallBall,
        None => default_model(
            &m,
            packing::kissing_radius(&code).map_err(|e| e.to_string())?,
        ),
    };
    let report = packing::analyze(&code, model).map_err(|e| e.to_string())?;
    let checks: Vec<catalog::Check> = match (&entry, args.expect) {
        (Some(entry), true) => entry
            .check(&report)
            .into_iter()
            .filter(|c| c.field != "density" || model == VolumeModel::SmallBall)
            .collect(),
        _ => Vec::new(),
    };

    let out = match format {
        Format::Csv => {
            let mut s = format!("# {}\n", describe(&m));
            if let Some(entry) = &entry {
                s.push_str(&format!(
                    "# code {} with {} codewords\n",
                    entry.name,
                    code.len()
                ));
            }
            for c in &checks {
                s.push_str(&format!(
                    "# check {}: got {:e}, expected {}, {}\n",
                    c.field,
                    c.got,
                    target_text(&c.target),
                    if c.pass { "pass" } else { "FAIL" }
                ));
            }
            format!(
                "{s}{}\n{}\n",
                DensityReport::CSV_HEADER,
                report.to_csv_row()
            )
        }
        Format::Json => {
            let v = json!({
                "name": entry.as_ref().map(|e| e.name.clone()),
                "report": report,
                "checks": checks,
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&v).map_err(|e| e.to_string())?
            )
        }
    };
    let failure = if let Some(c) = checks.iter().find(|c| !c.pass) {
        Some(format!(
            "expectation failed: {} = {:e}, expected {}",
            c.field,
            c.got,
            target_text(&c.target)
        ))
    } else if !report.violations.is_empty() {
        Some(format!(
            "report invariants violated: {}",
            report.violations.join("; ")
        ))
    } else {
        None
    };
    Ok((out, failure))
}

fn target_text(t: &catalog::Target) -> String {
    match *t {
        catalog::Target::Value { value, tol } => format!("{value:e} ± {tol:e}"),
        catalog::Target::Range { lo, hi } => format!("[{lo}, {hi}]"),
        catalog::Target::Log10 { value, tol } => format!("log10 {value} ± {tol}"),
    }
}

fn cmd_bounds(args: &BoundsArgs) -> Result<Table, String> {
    let m = args.manifold.manifold()?;
    let explicit = args.model.explicit()?;
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(format!(
            "need 2 <= --n-min <= --n-max, got {} and {}",
            args.n_min, args.n_max
        ));
    }
    let model = explicit.unwrap_or(if m.p() == 1 {
        VolumeModel::ExactCap
    } else if m.kind() == ManifoldKind::Grassmann {
        VolumeModel::SmallBall
    } else {
        VolumeModel::GaussianAsymptotic
    });
    let mut table = Table::new(vec![
        "N",
        "rate",
        "r_N",
        "two_r_N_delta_sq",
        "standard_delta_sq",
        "improved_delta_sq",
        "conjectured_delta_sq",
        "rankin_simplex_delta_sq",
        "rankin_orthoplex_delta_sq",
        "orthoplex_attainable",
    ]);
    table.notes = vec![
        describe(&m),
        format!("volume model {}", model.name()),
        "r_N: radius of a ball of measure 1/N; rate = log2(N)/dim".into(),
        "two_r_N: delta <= 2 r_N".into(),
        "standard: sphere-curvature correction delta^2 <= 4 r_N^2 - r_N^4/R^2".into(),
        "improved: kissing radius bound delta^2 <= 4 r_N^2 - 4 r_N^4/p (Grassmann only)".into(),
        "conjectured: from the upper kissing radius bound (conjectured)".into(),
        "rankin: simplex bound for N <= D+1, orthoplex bound beyond".into(),
    ];
    let e = |x: chordpack::Error| x.to_string();
    let dim = m.dim() as f64;
    for n in args.n_min..=args.n_max {
        let r = volumes::ideal_radius(&m, n, model).map_err(e)?.r;
        let sq = |d: f64| d * d;
        let improved = match m.kind() {
            ManifoldKind::Grassmann => {
                Some(sq(packing::dist_bound_grass(&m, n, model).map_err(e)?))
            }
            _ => None,
        };
        let rankin = packing::rankin_bounds(m.ambient_dim(), m.radius_sq(), n).map_err(e)?;
        table.rows.push(vec![
            Cell::Int(n),
            Cell::Num((n as f64).log2() / dim),
            Cell::Num(r),
            Cell::Num(sq(packing::dist_bound_standard(&m, n, model).map_err(e)?)),
            Cell::Num(sq(packing::dist_bound_sphere(&m, n, model).map_err(e)?)),
            Cell::opt(improved),
            Cell::Num(sq(packing::dist_bound_conjectured(&m, n, model)
                .map_err(e)?
                .value)),
            Cell::opt(rankin.simplex.map(sq)),
            Cell::opt(rankin.orthoplex.map(sq)),
            Cell::Bool(rankin.orthoplex_attainable),
        ]);
    }
    Ok(table)
}

fn cmd_midpoints(args: &MidpointArgs) -> Result<Table, String> {
    let m = args.manifold.manifold()?;
    if args.samples == 0 {
        return Err("--samples must be at least 1".into());
    }
    let pairs = manifolds::par_sample(args.samples, args.seed, |rng| {
        let x = manifolds::sample_uniform(&m, rng);
        let y = manifolds::sample_uniform(&m, rng);
        packing::pair_sandwich(&x, &y)
    });
    let mut table = Table::new(vec![
        "delta",
        "mid",
        "rho_lower",
        "rho_upper",
        "rho_upper_status",
        "half_delta",
        "rho_spherical",
        "holds",
    ]);
    table.notes = vec![
        describe(&m),
        format!("{} Haar pairs, seed {}", args.samples, args.seed),
        "mid: distance from each point of the pair to its midpoint".into(),
        "rho_lower/rho_upper: kissing radius bounds at the pair distance".into(),
        "rho_spherical: kissing radius of the embedding sphere".into(),
    ];
    for s in pairs {
        let s = s.map_err(|e| e.to_string())?;
        table.rows.push(vec![
            Cell::Num(s.delta),
            Cell::Num(s.mid),
            Cell::Num(s.lower),
            Cell::Num(s.upper.value),
            Cell::Text(status_name(s.upper.status).into()),
            Cell::Num(s.half),
            Cell::Num(s.spherical),
            Cell::Bool(s.holds(packing::INVARIANT_TOL)),
        ]);
    }
    Ok(table)
}

fn code_json(code: &Code) -> Result<String, String> {
    let text = CodeFile::from_points(code.manifold(), code.points())
        .to_json()
        .map_err(|e| e.to_string())?;
    Ok(format!("{text}\n"))
}

fn cmd_catalog(action: &CatalogAction, format: Format) -> Result<String, String> {
    match action {
        CatalogAction::List => {
            let mut table = Table::new(vec!["name", "kind", "n", "p"]);
            for name in CatalogEntry::names() {
                let entry = CatalogEntry::by_name(&name).map_err(|e| e.to_string())?;
                table.rows.push(vec![
                    Cell::Text(name),
                    Cell::Text(entry.manifold.kind().to_string()),
                    Cell::Int(entry.manifold.n() as u64),
                    Cell::Int(entry.manifold.p() as u64),
                ]);
            }
            Ok(table.render(format))
        }
        CatalogAction::Export { name } => {
            let entry = CatalogEntry::by_name(name).map_err(|e| e.to_string())?;
            code_json(&entry.build().map_err(|e| e.to_string())?)
        }
    }
}

fn cmd_search(args: &SearchArgs) -> Result<String, String> {
    let m = args.manifold.manifold()?;
    let objective = match args.objective {
        SearchObjective::MaxMinDistance => Objective::MaxMinDistance,
        SearchObjective::MaxKissingRadius => Objective::MaxKissingRadius,
    };
    let code = catalog::search_packing(&m, args.count, objective, args.iterations, args.seed)
        .map_err(|e| e.to_string())?;
    code_json(&code)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err("--threads must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let (text, failure) = match &cli.command {
        Command::Volume(args) => (cmd_volume(args)?.render(cli.format), None),
        Command::Verify(args) => cmd_verify(args, cli.format)?,
        Command::Bounds(args) => (cmd_bounds(args)?.render(cli.format), None),
        Command::Midpoints(args) => (cmd_midpoints(args)?.render(cli.format), None),
        Command::Catalog { action } => (cmd_catalog(action, cli.format)?, None),
        Command::Search(args) => (cmd_search(args)?, None),
    };
    emit(&cli.out, &text)?;
    failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            eprintln!(
                "{}",
                text.lines().next().unwrap_or("error: invalid arguments")
            );
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
