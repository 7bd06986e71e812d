//! Benchmark driver: built-in cases, error norms, convergence tables and CSV
//! output.

mod cases;
mod locate;

use std::io::Write;

use log::info;

use crate::error::{Error, Result};
use crate::fespace::{ExactSolution, FeField, Space};
use crate::linalg::Point;
use crate::mesh::{uniform_rectangle_mesh, SimplicialMesh};
use crate::quadrature::QuadratureRule;
use crate::schemes::{
    self, FlowSolution, NsVariant, OseenVariant, SchemeOptions, SolveStatus, SolverReport, StokesVariant, UnsteadyScheme,
    UnsteadySolver, UnsteadyState,
};

pub use cases::{builtin_case, BenchmarkCase, CaseKind, ExactFamily, MeshSpec, TimeSpec, CASE_IDS};
pub use cases::{kovasznay, kovasznay_lambda, oseen_exponential, potential2d, potential3d, stokes_sinusoidal};
pub use locate::PointLocator;

pub const CSV_HEADER: &str = "case,scheme,level,ndof,nu,t,err_u_l2,err_u_h1,err_p_l2,order_u,order_p,picard_iters,status";

/// Subdivisions per side of the reference mesh for cases without an exact
/// solution.
pub const REFERENCE_SUBDIVISIONS: usize = 160;

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub case: String,
    pub scheme: String,
    pub level: usize,
    pub ndof: usize,
    /// Unknowns including bubbles, `N_f + d·N_v + N_t`.
    pub ndof_full: usize,
    pub h: f64,
    pub nu: f64,
    pub t: Option<f64>,
    /// `‖u − u_h^l‖` of the linear velocity part.
    pub err_u_l2: f64,
    /// `|u − u_h^l|₁`.
    pub err_u_h1: f64,
    /// `‖p − p_h‖` after matching means.
    pub err_p_l2: f64,
    /// Rate of `err_u_l2` against the previous level.
    pub order_u: Option<f64>,
    pub order_p: Option<f64>,
    pub picard_iters: usize,
    pub status: SolveStatus,
}

impl ErrorRecord {
    pub fn is_flagged(&self) -> bool {
        self.status != SolveStatus::Converged
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.5e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{:.5e},{},{:.5e},{:.5e},{:.5e},{},{},{},{}",
            self.case,
            self.scheme,
            self.level,
            self.ndof,
            self.nu,
            opt(self.t),
            self.err_u_l2,
            self.err_u_h1,
            self.err_p_l2,
            opt(self.order_u),
            opt(self.order_p),
            self.picard_iters,
            self.status
        )
    }
}

pub fn write_csv(mut out: impl Write, records: &[ErrorRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Error norms of a discrete solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldErrors {
    pub u_l2: f64,
    pub u_h1: f64,
    pub p_l2: f64,
}

/// Target values at a point: velocity, velocity gradient `[k][m] = ∂_m u_k`
/// and pressure.
pub type Target<'a> = dyn Fn(&Point) -> (Point, [[f64; 3]; 3], f64) + 'a;

/// Errors of the linear velocity part and the pressure with a degree-4 rule.
/// Both pressures are shifted to zero mean first.
pub fn compute_errors_against(velocity: &FeField, pressure: &FeField, target: &Target) -> Result<FieldErrors> {
    let mesh = velocity.mesh();
    let d = mesh.dim();
    let linear = FeField::new(mesh, Space::VectorP1, velocity.linear_part().to_vec())?;
    let rule = QuadratureRule::degree4(d);
    let mut samples = Vec::with_capacity(mesh.n_cells() * rule.len());
    let (mut p_mean, mut ph_mean) = (0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let vol = mesh.geometry(c).volume;
        for (bary, w) in rule.iter() {
            let x = mesh.map_to_physical(c, bary);
            let (u, g, p) = target(&x);
            let ev = linear.evaluate(c, bary)?;
            let ph = pressure.evaluate(c, bary)?.value[0];
            let wt = w * vol;
            let mut du = 0.0;
            let mut dg = 0.0;
            for k in 0..d {
                du += (u[k] - ev.value[k]).powi(2);
                for m in 0..d {
                    dg += (g[k][m] - ev.gradient[k][m]).powi(2);
                }
            }
            p_mean += wt * p;
            ph_mean += wt * ph;
            samples.push((wt, du, dg, p - ph));
        }
    }
    let area = mesh.total_measure();
    let shift = (p_mean - ph_mean) / area;
    let mut e = FieldErrors { u_l2: 0.0, u_h1: 0.0, p_l2: 0.0 };
    for (wt, du, dg, dp) in samples {
        e.u_l2 += wt * du;
        e.u_h1 += wt * dg;
        e.p_l2 += wt * (dp - shift).powi(2);
    }
    e.u_l2 = e.u_l2.sqrt();
    e.u_h1 = e.u_h1.sqrt();
    e.p_l2 = e.p_l2.sqrt();
    Ok(e)
}

/// Errors against an exact solution at time `t`.
pub fn compute_errors(velocity: &FeField, pressure: &FeField, exact: &ExactSolution, t: f64) -> Result<FieldErrors> {
    compute_errors_against(velocity, pressure, &|x| ((exact.velocity)(x, t), (exact.gradient)(x, t), (exact.pressure)(x, t)))
}

/// A fine-mesh solution used in place of an exact one.
pub struct ReferenceSolution {
    mesh: SimplicialMesh,
    velocity: Vec<f64>,
    pressure: Vec<f64>,
}

impl ReferenceSolution {
    /// Solves `case` with the stabilized EAFE scheme (or the robust Stokes
    /// scheme) on a `n × n` right-diagonal mesh.
    pub fn compute(case: &BenchmarkCase, nu: f64, n: usize, options: &SchemeOptions) -> Result<Self> {
        let MeshSpec::Rectangle { x, y, pattern, .. } = case.mesh else {
            return Err(Error::Unsupported("reference solutions are 2D only".into()));
        };
        let mesh = uniform_rectangle_mesh(x, y, n, n, pattern)?;
        info!("{}: reference solution on {} cells", case.id, mesh.n_cells());
        let scheme = match case.kind {
            CaseKind::Stokes => "robust",
            CaseKind::Unsteady => "td1",
            _ => "eafe",
        };
        let sol = solve_steady(case, &mesh, scheme, nu, options)?;
        if sol.report.status != SolveStatus::Converged {
            return Err(Error::InvalidArgument(format!("reference solve ended with status {}", sol.report.status)));
        }
        let (velocity, pressure) = (sol.velocity.into_coeffs(), sol.pressure.into_coeffs());
        Ok(ReferenceSolution { mesh, velocity, pressure })
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    /// Errors of a coarse solution against the reference (full BR field).
    pub fn errors(&self, velocity: &FeField, pressure: &FeField) -> Result<FieldErrors> {
        let u = FeField::new(&self.mesh, Space::BrFull, self.velocity.clone())?;
        let p = FeField::new(&self.mesh, Space::P0Pressure, self.pressure.clone())?;
        let loc = PointLocator::new(&self.mesh);
        let target = |x: &Point| {
            let (c, bary) = loc.locate(x).expect("coarse and reference meshes cover the same domain");
            let b = &bary[..=self.mesh.dim()];
            let ev = u.evaluate(c, b).expect("located cell");
            (ev.value, ev.gradient, p.coeffs()[c])
        };
        compute_errors_against(velocity, pressure, &target)
    }
}

fn bad_scheme(case: &BenchmarkCase, scheme: &str) -> Error {
    Error::UnknownScheme {
        scheme: scheme.to_string(),
        kind: case.kind.name().to_string(),
    }
}

/// Checks that `scheme` names a scheme of the case's kind.
pub fn validate_scheme(case: &BenchmarkCase, scheme: &str) -> Result<()> {
    let ok = match case.kind {
        CaseKind::Stokes => scheme.parse::<StokesVariant>().is_ok(),
        CaseKind::Oseen => scheme.parse::<OseenVariant>().is_ok(),
        CaseKind::NavierStokes => scheme.parse::<NsVariant>().is_ok(),
        CaseKind::Unsteady => scheme.parse::<UnsteadyScheme>().is_ok(),
    };
    if ok {
        Ok(())
    } else {
        Err(bad_scheme(case, scheme))
    }
}

/// Solves a steady case on `mesh`.
pub fn solve_steady<'m>(case: &BenchmarkCase, mesh: &'m SimplicialMesh, scheme: &str, nu: f64, options: &SchemeOptions) -> Result<FlowSolution<'m>> {
    let problem = case.problem(nu)?;
    let bad = || bad_scheme(case, scheme);
    match case.kind {
        CaseKind::Stokes => schemes::solve_stokes(mesh, &problem, scheme.parse().map_err(|_| bad())?),
        CaseKind::Oseen => {
            let b = case.convection.unwrap_or([0.0; 3]);
            schemes::solve_oseen(mesh, &problem, b, scheme.parse().map_err(|_| bad())?, options)
        }
        CaseKind::NavierStokes => schemes::solve_navier_stokes(mesh, &problem, scheme.parse().map_err(|_| bad())?, options),
        CaseKind::Unsteady => Err(Error::Unsupported(format!("{} is time dependent", case.id))),
    }
}

/// Called with each computed record and the fields it was measured on.
pub type SolutionSink<'a> = dyn FnMut(&ErrorRecord, &FeField, &FeField) -> Result<()> + 'a;

/// Runs one scheme of a case for one viscosity on a sequence of levels and
/// returns one record per level (per report time for unsteady cases), with
/// rates against the previous level.
pub fn run_convergence(
    case: &BenchmarkCase,
    scheme: &str,
    nu: f64,
    levels: std::ops::RangeInclusive<usize>,
    options: &SchemeOptions,
    sink: Option<&mut SolutionSink>,
) -> Result<Vec<ErrorRecord>> {
    validate_scheme(case, scheme)?;
    let mut sink = sink;
    let reference = if case.has_exact_solution() {
        None
    } else {
        Some(ReferenceSolution::compute(case, nu, REFERENCE_SUBDIVISIONS, options)?)
    };
    let mut out: Vec<ErrorRecord> = Vec::new();
    for level in levels {
        let mesh = case.mesh.build(level)?;
        let mut rows = match case.kind {
            CaseKind::Unsteady => run_unsteady_level(case, &mesh, scheme, nu, level, options, sink.as_deref_mut())?,
            _ => {
                let sol = solve_steady(case, &mesh, scheme, nu, options)?;
                let e = match (&reference, case.exact(nu)) {
                    (_, Some(ex)) => compute_errors(&sol.velocity, &sol.pressure, &ex, 0.0)?,
                    (Some(r), None) => r.errors(&sol.velocity, &sol.pressure)?,
                    (None, None) => unreachable!(),
                };
                let rec = record(case, scheme, level, &mesh, nu, None, e, &sol.report);
                if let Some(s) = sink.as_deref_mut() {
                    s(&rec, &sol.velocity, &sol.pressure)?;
                }
                vec![rec]
            }
        };
        for r in rows.iter_mut() {
            if let Some(prev) = out.iter().rev().find(|p| p.level + 1 == r.level && p.t == r.t) {
                let hr = (prev.h / r.h).ln();
                r.order_u = Some((prev.err_u_l2 / r.err_u_l2).ln() / hr);
                r.order_p = Some((prev.err_p_l2 / r.err_p_l2).ln() / hr);
            }
            info!("{}", r.csv_row());
        }
        out.extend(rows);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn record(case: &BenchmarkCase, scheme: &str, level: usize, mesh: &SimplicialMesh, nu: f64, t: Option<f64>, e: FieldErrors, report: &SolverReport) -> ErrorRecord {
    ErrorRecord {
        case: case.id.to_string(),
        scheme: scheme.to_string(),
        level,
        ndof: report.ndof,
        ndof_full: report.ndof_full,
        h: mesh.h(),
        nu,
        t,
        err_u_l2: e.u_l2,
        err_u_h1: e.u_h1,
        err_p_l2: e.p_l2,
        order_u: None,
        order_p: None,
        picard_iters: report.picard_iters,
        status: report.status,
    }
}

fn severity(s: SolveStatus) -> u8 {
    match s {
        SolveStatus::Converged => 0,
        SolveStatus::MaxIters => 1,
        SolveStatus::Diverged => 2,
        SolveStatus::Failed => 3,
    }
}

/// Marches an unsteady case to `t_end` and records errors at the report
/// times. The status of a row is the worst step status up to that time; a
/// failed step stops the march and leaves the remaining rows failed.
fn run_unsteady_level(
    case: &BenchmarkCase,
    mesh: &SimplicialMesh,
    scheme: &str,
    nu: f64,
    level: usize,
    options: &SchemeOptions,
    mut sink: Option<&mut SolutionSink>,
) -> Result<Vec<ErrorRecord>> {
    let time = case.time.as_ref().ok_or_else(|| Error::InvalidArgument(format!("{} has no time settings", case.id)))?;
    let exact = case.exact(nu).ok_or_else(|| Error::Unsupported("unsteady runs need an exact solution".into()))?;
    let scheme_id: UnsteadyScheme = scheme.parse().map_err(|_| bad_scheme(case, scheme))?;
    let solver = UnsteadySolver::new(mesh, case.problem(nu)?, scheme_id, time.tau, *options)?;
    let u0 = exact.velocity.clone();
    let mut state = UnsteadyState::initial(mesh, |x| u0(x, 0.0), 0.0)?;
    let n_steps = (time.t_end / time.tau).round() as usize;
    let mut worst = SolveStatus::Converged;
    let mut rows = Vec::new();
    let mut failed = false;
    let mut last_report = None;
    for _ in 0..n_steps {
        if !failed {
            let (next, report) = solver.step(&state)?;
            if severity(report.status) > severity(worst) {
                worst = report.status;
            }
            failed = report.status == SolveStatus::Failed;
            state = next;
            last_report = Some(report);
        } else {
            state.t += time.tau;
            state.step += 1;
        }
        let t = state.t;
        if time.report_times.iter().any(|&r| (r - t).abs() < 0.5 * time.tau) {
            let mut report = last_report.clone().expect("at least one step");
            report.status = worst;
            let e = if failed {
                FieldErrors { u_l2: f64::NAN, u_h1: f64::NAN, p_l2: f64::NAN }
            } else {
                compute_errors(&state.velocity, &state.pressure, &exact, t)?
            };
            let rec = record(case, scheme, level, mesh, nu, Some(t), e, &report);
            if let Some(s) = sink.as_deref_mut() {
                s(&rec, &state.velocity, &state.pressure)?;
            }
            rows.push(rec);
        }
    }
    Ok(rows)
}
