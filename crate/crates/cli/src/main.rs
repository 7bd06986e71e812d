//! `brflow`: run benchmark cases, single solves and mesh queries.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use brflow::bench::{self, builtin_case, BenchmarkCase, ErrorRecord, MeshSpec, CASE_IDS};
use brflow::fespace::FeField;
use brflow::mesh::{uniform_box_mesh, uniform_rectangle_mesh, Pattern, SimplicialMesh};
use brflow::schemes::SchemeOptions;
use clap::{Parser, Subcommand};

use config::RunConfig;

pub const OUTPUT_DIR_ENV: &str = "BRFLOW_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "brflow", version, about = "P1xP0 Bernardi-Raugel/EAFE flow solver and benchmark harness")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case on one mesh level and write its CSV rows.
    Solve(Flags),
    /// Run convergence tables over schemes, viscosities and levels.
    Bench(Flags),
    /// Print mesh statistics.
    MeshInfo(Flags),
}

#[derive(clap::Args, Default)]
struct Flags {
    /// key = value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// Scheme name(s), comma separated.
    #[arg(long)]
    scheme: Option<String>,
    /// Viscosity value(s), comma separated.
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// row-sum or column-sum.
    #[arg(long)]
    eafe_diagonal: Option<String>,
    /// right-diagonal or crisscross.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    ny: Option<String>,
    /// Dimension for mesh-info without a case.
    #[arg(long)]
    dim: Option<String>,
    /// Number of mesh levels (bench).
    #[arg(long)]
    levels: Option<String>,
    /// Mesh level (solve, mesh-info).
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// CSV file name, relative to the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write VTK files.
    #[arg(long)]
    vtk: bool,
    /// Write the effective configuration to this file.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        let text = [
            ("case", &self.case),
            ("scheme", &self.scheme),
            ("nu", &self.nu),
            ("eps", &self.eps),
            ("eafe_diagonal", &self.eafe_diagonal),
            ("pattern", &self.pattern),
            ("nx", &self.nx),
            ("ny", &self.ny),
            ("dim", &self.dim),
            ("levels", &self.levels),
            ("level", &self.level),
            ("tau", &self.tau),
            ("t_end", &self.t_end),
            ("max_iters", &self.max_iters),
            ("tol", &self.tol),
        ];
        for (k, v) in text {
            if let Some(v) = v {
                c.set(k, v).with_context(|| format!("--{}", k.replace('_', "-")))?;
            }
        }
        c.output_dir = self.output_dir.clone();
        c.out = self.out.clone();
        if self.vtk {
            c.vtk = Some(true);
        }
        Ok(c)
    }
}

/// File values, then the environment's output directory, then flags.
fn effective_config(command: &str, flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            cfg.output_dir = Some(PathBuf::from(dir));
        }
    }
    cfg.merge(&flags.to_config()?);
    cfg.command = Some(command.to_string());
    cfg.validate()?;
    Ok(cfg)
}

fn print_header(cfg: &RunConfig) {
    let d = SchemeOptions::default();
    println!(
        "# defaults: eps={:e} eafe_diagonal={} picard_max_iters={} picard_tol={:e} divergence_window={} tau=0.1",
        d.eps, d.eafe_diagonal, d.picard.max_iters, d.picard.tol, d.picard.divergence_window
    );
    let entries: Vec<String> = cfg.entries().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("# config: {}", entries.join(" "));
}

fn load_case(cfg: &RunConfig) -> Result<BenchmarkCase> {
    let id = cfg
        .case
        .as_deref()
        .ok_or_else(|| anyhow!("--case is required (one of: {})", CASE_IDS.join(", ")))?;
    let mut case = builtin_case(id).map_err(|e| anyhow!("{e} (known cases: {})", CASE_IDS.join(", ")))?;
    match &mut case.mesh {
        MeshSpec::Rectangle { nx, ny, pattern, .. } => {
            if let Some(n) = cfg.nx {
                *nx = n;
                *ny = cfg.ny.unwrap_or(n);
            } else if let Some(n) = cfg.ny {
                *ny = n;
            }
            if let Some(p) = cfg.pattern {
                *pattern = p;
            }
        }
        MeshSpec::Box { n, .. } => {
            if let Some(k) = cfg.nx {
                *n = k;
            }
        }
    }
    if let Some(t) = case.time.as_mut() {
        if let Some(tau) = cfg.tau {
            t.tau = tau;
        }
        if let Some(te) = cfg.t_end {
            t.t_end = te;
            t.report_times.retain(|&r| r <= te + 1e-12);
            if t.report_times.last().is_none_or(|&r| (r - te).abs() > 1e-12) {
                t.report_times.push(te);
            }
        }
    }
    Ok(case)
}

fn scheme_options(case: &BenchmarkCase, cfg: &RunConfig) -> SchemeOptions {
    let mut o = case.scheme_options();
    if let Some(e) = cfg.eps {
        o.eps = e;
    }
    if let Some(d) = cfg.eafe_diagonal {
        o.eafe_diagonal = d;
    }
    if let Some(m) = cfg.max_iters {
        o.picard.max_iters = m;
    }
    if let Some(t) = cfg.tol {
        o.picard.tol = t;
    }
    o
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    if !dir.is_dir() {
        bail!("output directory '{}' does not exist; create it or pass --output-dir", dir.display());
    }
    Ok(dir)
}

fn resolve(dir: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        dir.join(file)
    }
}

fn vtk_name(r: &ErrorRecord) -> String {
    let t = r.t.map(|t| format!("-t{t:.4}")).unwrap_or_default();
    format!("{}-{}-nu{:e}-l{}{}.vtk", r.case, r.scheme, r.nu, r.level, t)
}

fn run_case(case: &BenchmarkCase, scheme: &str, nu: f64, levels: std::ops::RangeInclusive<usize>, opts: &SchemeOptions, vtk_dir: Option<&Path>) -> Result<Vec<ErrorRecord>> {
    let mut sink = |r: &ErrorRecord, u: &FeField, p: &FeField| -> brflow::Result<()> {
        if let Some(dir) = vtk_dir {
            brflow::io::write_vtk(&dir.join(vtk_name(r)), u, p)?;
        }
        Ok(())
    };
    Ok(bench::run_convergence(case, scheme, nu, levels, opts, Some(&mut sink))?)
}

fn write_table(path: &Path, rows: &[ErrorRecord]) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    bench::write_csv(std::io::BufWriter::new(file), rows)?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn solve(cfg: &RunConfig) -> Result<ExitCode> {
    let case = load_case(cfg)?;
    let dir = output_dir(cfg)?;
    let scheme = cfg.scheme.first().map(String::as_str).unwrap_or(case.default_scheme());
    bench::validate_scheme(&case, scheme).map_err(|e| anyhow!("{e} (schemes for {}: {})", case.id, case.schemes.join(", ")))?;
    let nu = cfg.nu.first().copied().unwrap_or(case.default_nu);
    let level = cfg.level.unwrap_or(1);
    let opts = scheme_options(&case, cfg);
    let vtk = cfg.vtk.unwrap_or(false).then_some(dir.as_path());
    let rows = run_case(&case, scheme, nu, level..=level, &opts, vtk)?;
    println!("{}", bench::CSV_HEADER);
    for r in &rows {
        println!("{}", r.csv_row());
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}-{}.csv", case.id, scheme)));
    write_table(&resolve(&dir, &out), &rows)?;
    if let Some(bad) = rows.iter().find(|r| r.is_flagged()) {
        eprintln!("solve flagged: status {} at level {}{}", bad.status, bad.level, bad.t.map(|t| format!(", t = {t}")).unwrap_or_default());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn sort_rows(rows: &mut [ErrorRecord]) {
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(b.nu.total_cmp(&a.nu))
            .then(a.level.cmp(&b.level))
            .then(a.t.unwrap_or(0.0).total_cmp(&b.t.unwrap_or(0.0)))
    });
}

fn run_bench(cfg: &RunConfig) -> Result<ExitCode> {
    let case = load_case(cfg)?;
    let dir = output_dir(cfg)?;
    let schemes: Vec<String> = if cfg.scheme.is_empty() {
        case.schemes.iter().map(|s| s.to_string()).collect()
    } else {
        cfg.scheme.clone()
    };
    for s in &schemes {
        bench::validate_scheme(&case, s).map_err(|e| anyhow!("{e} (schemes for {}: {})", case.id, case.schemes.join(", ")))?;
    }
    let nus = if cfg.nu.is_empty() { case.nus.clone() } else { cfg.nu.clone() };
    let levels = cfg.levels.unwrap_or(case.levels);
    let opts = scheme_options(&case, cfg);
    let vtk = cfg.vtk.unwrap_or(false).then_some(dir.as_path());
    let mut rows = Vec::new();
    for s in &schemes {
        for &nu in &nus {
            rows.extend(run_case(&case, s, nu, 1..=levels, &opts, vtk)?);
        }
    }
    sort_rows(&mut rows);
    println!("{}", bench::CSV_HEADER);
    for r in &rows {
        println!("{}", r.csv_row());
    }
    let flagged = rows.iter().filter(|r| r.is_flagged()).count();
    if flagged > 0 {
        eprintln!("{flagged} flagged row(s)");
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}-bench.csv", case.id)));
    write_table(&resolve(&dir, &out), &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn info_mesh(cfg: &RunConfig) -> Result<SimplicialMesh> {
    if cfg.case.is_some() {
        return Ok(load_case(cfg)?.mesh.build(cfg.level.unwrap_or(1))?);
    }
    let nx = cfg.nx.unwrap_or(8);
    Ok(match cfg.dim.unwrap_or(2) {
        3 => uniform_box_mesh([(0.0, 1.0); 3], [nx, cfg.ny.unwrap_or(nx), nx])?,
        _ => uniform_rectangle_mesh((0.0, 1.0), (0.0, 1.0), nx, cfg.ny.unwrap_or(nx), cfg.pattern.unwrap_or(Pattern::RightDiagonal))?,
    })
}

fn mesh_info(cfg: &RunConfig) -> Result<ExitCode> {
    let m = info_mesh(cfg)?;
    let d = m.dim();
    let boundary_faces = m.faces().iter().filter(|f| f.is_boundary()).count();
    println!("dim: {d}");
    println!("vertices: {} ({} interior)", m.n_vertices(), m.n_interior_vertices());
    println!("cells: {}", m.n_cells());
    println!("faces: {} ({} boundary)", m.n_faces(), boundary_faces);
    println!("edges: {}", m.n_edges());
    println!("h: {:.6e}", m.h());
    println!("measure: {:.6e}", m.total_measure());
    let ndof = d * m.n_interior_vertices() + m.n_cells();
    println!("ndof: {ndof}");
    println!("ndof with bubbles: {}", ndof + m.n_interior_faces());
    if cfg.vtk.unwrap_or(false) {
        let path = output_dir(cfg)?.join("mesh.vtk");
        brflow::io::write_mesh_vtk(&path, &m)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (name, flags) = match &cli.command {
        Command::Solve(f) => ("solve", f),
        Command::Bench(f) => ("bench", f),
        Command::MeshInfo(f) => ("mesh-info", f),
    };
    let cfg = effective_config(name, flags)?;
    print_header(&cfg);
    if let Some(p) = &flags.save_config {
        std::fs::write(p, cfg.serialize()).with_context(|| format!("writing {}", p.display()))?;
    }
    match cli.command {
        Command::Solve(_) => solve(&cfg),
        Command::Bench(_) => run_bench(&cfg),
        Command::MeshInfo(_) => mesh_info(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
