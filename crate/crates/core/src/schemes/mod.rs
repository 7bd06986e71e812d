//! Discrete schemes for Stokes, Oseen, steady and unsteady Navier–Stokes.
//!
//! Every solve builds a [`BlockSaddleSystem`] on interior unknowns. Schemes
//! whose bubble block is diagonal are solved by static condensation, the
//! classical baselines by a direct solve of the full block system.

mod diagnostics;
mod system;

pub use diagnostics::{divergence_residual, inf_sup_constant};
pub use system::{solve_pinned, BlockSaddleSystem, BlockSolution, CondensedSystem};

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::fespace::{nodal_interpolate, DofLayout, FeField, Space, VectorFn};
use crate::forms::{self, BrBlocks, ConvectionField, DivBlocks, EafeDiagonal, LoadVectors};
use crate::linalg::{self, Point};
use crate::mesh::SimplicialMesh;
use crate::sparse::CsrMatrix;

/// Viscosity, forcing `f(x, t)` and Dirichlet data `g(x, t)`.
#[derive(Clone)]
pub struct FlowProblem {
    pub nu: f64,
    pub forcing: VectorFn,
    pub boundary: VectorFn,
}

impl FlowProblem {
    pub fn new(nu: f64, forcing: VectorFn, boundary: VectorFn) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        Ok(FlowProblem { nu, forcing, boundary })
    }

    /// Homogeneous problem: `f = 0`, `g = 0`.
    pub fn homogeneous(nu: f64) -> Result<Self> {
        let zero: VectorFn = std::sync::Arc::new(|_, _| [0.0; 3]);
        Self::new(nu, zero.clone(), zero)
    }
}

impl fmt::Debug for FlowProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowProblem").field("nu", &self.nu).finish_non_exhaustive()
    }
}

/// Fixed-point iteration controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardControls {
    pub max_iters: usize,
    /// Stop when `|X_{k+1} − X_k| / |X_k|` drops below this.
    pub tol: f64,
    /// Flag divergence after this many consecutive increment increases.
    pub divergence_window: usize,
}

impl Default for PicardControls {
    fn default() -> Self {
        PicardControls {
            max_iters: 50,
            tol: 1e-6,
            divergence_window: 5,
        }
    }
}

/// Options shared by the convective schemes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeOptions {
    /// Artificial diffusion of the EAFE form.
    pub eps: f64,
    pub eafe_diagonal: EafeDiagonal,
    pub picard: PicardControls,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions {
            eps: 1e-10,
            eafe_diagonal: EafeDiagonal::default(),
            picard: PicardControls::default(),
        }
    }
}

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident, $kind:literal, { $($(#[$vm:meta])* $variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($(#[$vm])* $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::UnknownScheme { scheme: s.to_string(), kind: $kind.to_string() }),
                }
            }
        }
    };
}

named_enum!(
    /// Stokes discretizations.
    StokesVariant, "stokes", {
        /// Modified form `a_h` with `(f, Π_h v)`.
        Robust => "robust",
        /// Modified form `a_h` with `(f, v)`.
        Plain => "plain",
        /// Full BR gradient form with `(f, Π_h v)`.
        Unmodified => "unmodified",
    }
);

named_enum!(
    /// Oseen discretizations.
    OseenVariant, "oseen", {
        /// EAFE convection plus `(b·∇v^l, Π_h w^b)`.
        Eafe => "eafe",
        /// EAFE convection only.
        EafeUnstabilized => "eafe-unstabilized",
        /// `(b·∇u, Π_h v)` with the full BR gradient form.
        Classical => "classical",
    }
);

named_enum!(
    /// Steady Navier–Stokes discretizations.
    NsVariant, "navier-stokes", {
        Eafe => "eafe",
        Classical => "classical",
    }
);

named_enum!(
    /// Backward-Euler Navier–Stokes discretizations.
    UnsteadyScheme, "unsteady", {
        /// Lumped mass `(u, v)_h`.
        Td1 => "td1",
        /// Lumped mass with postprocessed test functions `(u, Π_h v)_h`.
        Td2 => "td2",
        /// `(Π_h u, Π_h v)` with classical convection.
        Classical => "classical",
    }
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    Diverged,
    MaxIters,
    Failed,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Diverged => "diverged",
            SolveStatus::MaxIters => "max-iters",
            SolveStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub scheme: String,
    pub n_cells: usize,
    pub n_vertices: usize,
    /// `d·N_v + N_t`.
    pub ndof: usize,
    /// `N_f + d·N_v + N_t`.
    pub ndof_full: usize,
    pub picard_iters: usize,
    pub increments: Vec<f64>,
    pub final_increment: f64,
    pub status: SolveStatus,
    pub message: Option<String>,
    pub wall_time: Duration,
}

impl SolverReport {
    fn new(scheme: String, mesh: &SimplicialMesh, layout: &DofLayout) -> Self {
        SolverReport {
            scheme,
            n_cells: mesh.n_cells(),
            n_vertices: mesh.n_vertices(),
            ndof: layout.n_condensed(),
            ndof_full: layout.n_full(),
            picard_iters: 0,
            increments: Vec::new(),
            final_increment: f64::NAN,
            status: SolveStatus::Converged,
            message: None,
            wall_time: Duration::ZERO,
        }
    }
}

/// Velocity (BR, boundary values included), zero-mean pressure and report.
#[derive(Clone, Debug)]
pub struct FlowSolution<'m> {
    pub velocity: FeField<'m>,
    pub pressure: FeField<'m>,
    pub report: SolverReport,
}

/// Forms that do not depend on the convection field, assembled once.
struct StaticForms<'m> {
    mesh: &'m SimplicialMesh,
    grad: BrBlocks,
    bubble_diag: CsrMatrix,
    bubble_full: OnceCell<CsrMatrix>,
    div: DivBlocks,
}

impl<'m> StaticForms<'m> {
    fn new(mesh: &'m SimplicialMesh) -> Result<Self> {
        Ok(StaticForms {
            mesh,
            grad: forms::assemble_grad_grad(mesh)?,
            bubble_diag: forms::assemble_bubble_diag(mesh)?,
            bubble_full: OnceCell::new(),
            div: forms::assemble_div(mesh)?,
        })
    }

    /// `a_h` (diagonal bubble block) or the full gradient form.
    fn viscous(&self, modified: bool) -> Result<BrBlocks> {
        let bb = if modified {
            self.bubble_diag.clone()
        } else {
            match self.bubble_full.get() {
                Some(m) => m.clone(),
                None => {
                    let m = forms::assemble_bubble_full(self.mesh)?;
                    self.bubble_full.get_or_init(|| m).clone()
                }
            }
        };
        Ok(BrBlocks { bb, ..self.grad.clone() })
    }
}

/// Convection term of one linearized system.
enum Convection<'a, 'm> {
    None,
    Eafe { field: ConvectionField, stabilized: bool },
    Classical(&'a FeField<'m>),
}

fn convection_blocks(mesh: &SimplicialMesh, conv: &Convection, options: &SchemeOptions) -> Result<Option<BrBlocks>> {
    Ok(match conv {
        Convection::None => None,
        Convection::Eafe { field, stabilized } => {
            let mut b = BrBlocks::zeros(mesh);
            b.ll = forms::assemble_eafe(mesh, field, options.eafe_diagonal)?;
            if *stabilized {
                b.bl = forms::assemble_conv_stab(mesh, field)?;
            }
            Some(b)
        }
        Convection::Classical(w) => Some(forms::assemble_classical_convection(mesh, w)?),
    })
}

fn lift_at(mesh: &SimplicialMesh, g: &VectorFn, t: f64) -> Vec<f64> {
    let lift = nodal_interpolate(mesh, |x| g(x, t));
    check_boundary_flux(mesh, lift.coeffs());
    lift.into_coeffs()
}

/// Warns when the nodal lift carries a noticeable net flux, which makes the
/// discrete constraint inconsistent.
fn check_boundary_flux(mesh: &SimplicialMesh, lift: &[f64]) {
    let d = mesh.dim();
    let (mut net, mut total) = (0.0, 0.0);
    for f in mesh.faces().iter().filter(|f| f.is_boundary()) {
        let mut avg = [0.0; 3];
        for &v in &f.vertices[..d] {
            for k in 0..d {
                avg[k] += lift[d * v + k] / d as f64;
            }
        }
        let q = f.measure * linalg::dot(&avg, &f.normal);
        net += q;
        total += q.abs();
    }
    if total > 0.0 && net.abs() > 1e-10 * total {
        warn!("boundary data has net discrete flux {net:.3e} (relative {:.3e})", net.abs() / total);
    }
}

fn load_at(mesh: &SimplicialMesh, f: &VectorFn, t: f64, postprocessed: bool) -> Result<LoadVectors> {
    forms::assemble_load(mesh, &|x: &Point| f(x, t), postprocessed)
}

/// Extended velocity vector `(linear, bubble)` of a BR field.
fn split_extended(v: &FeField) -> (Vec<f64>, Vec<f64>) {
    (v.linear_part().to_vec(), v.bubble_part().to_vec())
}

fn add_mass_times(load: &mut LoadVectors, mass: &BrBlocks, prev: &FeField) {
    let (ul, ub) = split_extended(prev);
    let terms = [
        (mass.ll.mul_vec(&ul), true),
        (mass.lb.mul_vec(&ub), true),
        (mass.bl.mul_vec(&ul), false),
        (mass.bb.mul_vec(&ub), false),
    ];
    for (v, linear) in terms {
        let target = if linear { &mut load.linear } else { &mut load.bubble };
        for (t, x) in target.iter_mut().zip(v) {
            *t += x;
        }
    }
}

fn scale_load(load: &mut LoadVectors, s: f64) {
    load.linear.iter_mut().chain(load.bubble.iter_mut()).for_each(|x| *x *= s);
}

/// The iterate vector of a field pair, using the pinned pressure convention.
fn iterate_from_fields(velocity: &FeField, pressure: &FeField, layout: &DofLayout, condensed: bool) -> Vec<f64> {
    let d = layout.dim();
    let mut x = Vec::with_capacity(layout.n_full());
    if !condensed {
        let b = velocity.bubble_part();
        x.extend(layout.interior_faces().iter().map(|&f| b[f]));
    }
    let l = velocity.linear_part();
    for &v in layout.interior_vertices() {
        x.extend_from_slice(&l[d * v..d * v + d]);
    }
    let p = pressure.coeffs();
    x.extend(p.iter().map(|q| q - p[0]));
    x
}

fn relative_increment(x: &[f64], prev: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if diff == 0.0 {
        return 0.0;
    }
    let base = linalg::norm2(prev);
    if base > 0.0 {
        diff / base
    } else {
        diff / linalg::norm2(x)
    }
}

/// Solves the Stokes problem.
pub fn solve_stokes<'m>(mesh: &'m SimplicialMesh, problem: &FlowProblem, variant: StokesVariant) -> Result<FlowSolution<'m>> {
    let start = Instant::now();
    let forms = StaticForms::new(mesh)?;
    let layout = DofLayout::new(mesh);
    let label = format!("stokes/{variant}");
    let (modified, post) = match variant {
        StokesVariant::Robust => (true, true),
        StokesVariant::Plain => (true, false),
        StokesVariant::Unmodified => (false, true),
    };
    let lift = lift_at(mesh, &problem.boundary, 0.0);
    let sys = BlockSaddleSystem::from_extended(
        mesh,
        &forms.viscous(modified)?.scaled(problem.nu),
        &forms.div,
        1.0,
        &load_at(mesh, &problem.forcing, 0.0, post)?,
        &lift,
    );
    let sol = sys.solve(&label)?;
    let (velocity, pressure) = sol.to_fields(mesh, &layout, &lift)?;
    let mut report = SolverReport::new(label, mesh, &layout);
    report.wall_time = start.elapsed();
    Ok(FlowSolution { velocity, pressure, report })
}

/// Solves the Oseen problem with a constant convection field `b`.
pub fn solve_oseen<'m>(
    mesh: &'m SimplicialMesh,
    problem: &FlowProblem,
    b: Point,
    variant: OseenVariant,
    options: &SchemeOptions,
) -> Result<FlowSolution<'m>> {
    let start = Instant::now();
    let forms = StaticForms::new(mesh)?;
    let layout = DofLayout::new(mesh);
    let label = format!("oseen/{variant}");
    let lift = lift_at(mesh, &problem.boundary, 0.0);
    let load = load_at(mesh, &problem.forcing, 0.0, true)?;
    let b_field;
    let (modified, conv) = match variant {
        OseenVariant::Eafe | OseenVariant::EafeUnstabilized => (
            true,
            Convection::Eafe {
                field: ConvectionField::constant(mesh, b, options.eps)?,
                stabilized: variant == OseenVariant::Eafe,
            },
        ),
        OseenVariant::Classical => {
            b_field = nodal_interpolate(mesh, |_| b);
            (false, Convection::Classical(&b_field))
        }
    };
    let mut velocity = forms.viscous(modified)?.scaled(problem.nu);
    if let Some(c) = convection_blocks(mesh, &conv, options)? {
        velocity = velocity.add_scaled(1.0, &c);
    }
    let sys = BlockSaddleSystem::from_extended(mesh, &velocity, &forms.div, 1.0, &load, &lift);
    let sol = sys.solve(&label)?;
    let (velocity, pressure) = sol.to_fields(mesh, &layout, &lift)?;
    let mut report = SolverReport::new(label, mesh, &layout);
    report.wall_time = start.elapsed();
    Ok(FlowSolution { velocity, pressure, report })
}

/// Fixed-point loop shared by the steady and unsteady solvers. `build`
/// returns the system linearized at the given velocity.
fn picard_loop<'m>(
    mesh: &'m SimplicialMesh,
    layout: &DofLayout,
    lift: &[f64],
    build: &dyn Fn(&FeField<'m>) -> Result<BlockSaddleSystem>,
    initial: (FeField<'m>, FeField<'m>),
    condensed: bool,
    controls: &PicardControls,
    report: &mut SolverReport,
) -> (FeField<'m>, FeField<'m>) {
    let (mut velocity, mut pressure) = initial;
    let mut x_prev = iterate_from_fields(&velocity, &pressure, layout, condensed);
    let mut growth = 0;
    report.status = SolveStatus::MaxIters;
    for k in 1..=controls.max_iters {
        let step = build(&velocity).and_then(|sys| sys.solve(&report.scheme));
        let sol = match step {
            Ok(s) => s,
            Err(e) => {
                warn!("{}: linear solve failed at Picard iteration {k}: {e}", report.scheme);
                report.status = if k == 1 { SolveStatus::Failed } else { SolveStatus::Diverged };
                report.message = Some(e.to_string());
                break;
            }
        };
        let x = sol.iterate_vector();
        let inc = relative_increment(&x, &x_prev);
        report.picard_iters = k;
        report.increments.push(inc);
        report.final_increment = inc;
        if !inc.is_finite() || x.iter().any(|v| !v.is_finite()) {
            report.status = SolveStatus::Diverged;
            report.message = Some(format!("non-finite iterate at Picard iteration {k}"));
            break;
        }
        match sol.to_fields(mesh, layout, lift) {
            Ok((v, p)) => {
                velocity = v;
                pressure = p;
            }
            Err(e) => {
                report.status = SolveStatus::Failed;
                report.message = Some(e.to_string());
                break;
            }
        }
        x_prev = x;
        debug!("{} Picard {k}: increment {inc:.3e}", report.scheme);
        if inc < controls.tol {
            report.status = SolveStatus::Converged;
            break;
        }
        if k >= 2 && inc > report.increments[k - 2] {
            growth += 1;
        } else {
            growth = 0;
        }
        if growth >= controls.divergence_window {
            report.status = SolveStatus::Diverged;
            report.message = Some(format!("increment grew {growth} consecutive times"));
            break;
        }
    }
    (velocity, pressure)
}

/// Solves the steady Navier–Stokes equations by Picard iteration, starting
/// from the Stokes solution of the same discretization. Non-convergence is
/// reported in the status, not as an error.
pub fn solve_navier_stokes<'m>(
    mesh: &'m SimplicialMesh,
    problem: &FlowProblem,
    variant: NsVariant,
    options: &SchemeOptions,
) -> Result<FlowSolution<'m>> {
    let start = Instant::now();
    let forms = StaticForms::new(mesh)?;
    let layout = DofLayout::new(mesh);
    let label = format!("navier-stokes/{variant}");
    let lift = lift_at(mesh, &problem.boundary, 0.0);
    let load = load_at(mesh, &problem.forcing, 0.0, true)?;
    let modified = variant == NsVariant::Eafe;
    let viscous = forms.viscous(modified)?.scaled(problem.nu);

    let stokes = BlockSaddleSystem::from_extended(mesh, &viscous, &forms.div, 1.0, &load, &lift).solve(&label)?;
    let initial = stokes.to_fields(mesh, &layout, &lift)?;

    let build = |u: &FeField<'m>| -> Result<BlockSaddleSystem> {
        let field;
        let conv = match variant {
            NsVariant::Eafe => Convection::Eafe {
                field: ConvectionField::cell_average_of_linear(u, options.eps)?,
                stabilized: true,
            },
            NsVariant::Classical => {
                field = u.clone();
                Convection::Classical(&field)
            }
        };
        let c = convection_blocks(mesh, &conv, options)?.expect("convective scheme");
        Ok(BlockSaddleSystem::from_extended(mesh, &viscous.add_scaled(1.0, &c), &forms.div, 1.0, &load, &lift))
    };
    let mut report = SolverReport::new(label, mesh, &layout);
    let (velocity, pressure) = picard_loop(mesh, &layout, &lift, &build, initial, modified, &options.picard, &mut report);
    report.wall_time = start.elapsed();
    Ok(FlowSolution { velocity, pressure, report })
}

/// State of a time-dependent simulation.
#[derive(Clone, Debug)]
pub struct UnsteadyState<'m> {
    pub t: f64,
    pub step: usize,
    pub velocity: FeField<'m>,
    pub pressure: FeField<'m>,
}

impl<'m> UnsteadyState<'m> {
    /// Nodal interpolant of `u0` with zero bubbles and zero pressure.
    pub fn initial(mesh: &'m SimplicialMesh, u0: impl Fn(&Point) -> Point, t0: f64) -> Result<Self> {
        let lin = nodal_interpolate(mesh, u0);
        Ok(UnsteadyState {
            t: t0,
            step: 0,
            velocity: FeField::from_parts(&lin, &FeField::zeros(mesh, Space::BrBubble))?,
            pressure: FeField::zeros(mesh, Space::P0Pressure),
        })
    }
}

/// Time stepper holding the forms that stay fixed across steps.
pub struct UnsteadySolver<'m> {
    mesh: &'m SimplicialMesh,
    problem: FlowProblem,
    scheme: UnsteadyScheme,
    options: SchemeOptions,
    tau: f64,
    layout: DofLayout,
    div: DivBlocks,
    /// `M + τν A`.
    base: BrBlocks,
    mass: BrBlocks,
}

impl<'m> UnsteadySolver<'m> {
    pub fn new(mesh: &'m SimplicialMesh, problem: FlowProblem, scheme: UnsteadyScheme, tau: f64, options: SchemeOptions) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")));
        }
        let forms = StaticForms::new(mesh)?;
        let (mass, modified) = match scheme {
            UnsteadyScheme::Td1 => (forms::assemble_lumped_mass(mesh, false)?, true),
            UnsteadyScheme::Td2 => (forms::assemble_lumped_mass(mesh, true)?, true),
            UnsteadyScheme::Classical => (forms::assemble_bdm_mass(mesh)?, false),
        };
        let base = mass.add_scaled(tau * problem.nu, &forms.viscous(modified)?);
        Ok(UnsteadySolver {
            mesh,
            layout: DofLayout::new(mesh),
            div: forms.div,
            problem,
            scheme,
            options,
            tau,
            base,
            mass,
        })
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    /// One backward-Euler step with Picard linearization, starting the
    /// iteration from the previous state.
    pub fn step(&self, state: &UnsteadyState<'m>) -> Result<(UnsteadyState<'m>, SolverReport)> {
        let start = Instant::now();
        let mesh = self.mesh;
        let t = state.t + self.tau;
        let lift = lift_at(mesh, &self.problem.boundary, t);
        let mut load = load_at(mesh, &self.problem.forcing, t, true)?;
        scale_load(&mut load, self.tau);
        add_mass_times(&mut load, &self.mass, &state.velocity);
        let condensed = self.scheme != UnsteadyScheme::Classical;

        let build = |u: &FeField<'m>| -> Result<BlockSaddleSystem> {
            let field;
            let conv = if condensed {
                Convection::Eafe {
                    field: ConvectionField::cell_average_of_linear(u, self.options.eps)?,
                    stabilized: true,
                }
            } else {
                field = u.clone();
                Convection::Classical(&field)
            };
            let c = convection_blocks(mesh, &conv, &self.options)?.expect("convective scheme");
            Ok(BlockSaddleSystem::from_extended(
                mesh,
                &self.base.add_scaled(self.tau, &c),
                &self.div,
                self.tau,
                &load,
                &lift,
            ))
        };
        let label = format!("unsteady/{}", self.scheme);
        let mut report = SolverReport::new(label, mesh, &self.layout);
        let initial = (state.velocity.clone(), state.pressure.clone());
        let (velocity, pressure) = picard_loop(mesh, &self.layout, &lift, &build, initial, condensed, &self.options.picard, &mut report);
        report.wall_time = start.elapsed();
        Ok((
            UnsteadyState {
                t,
                step: state.step + 1,
                velocity,
                pressure,
            },
            report,
        ))
    }

    /// The linear system of one step linearized at `state`, for inspection.
    pub fn linearized_system(&self, state: &UnsteadyState<'m>) -> Result<BlockSaddleSystem> {
        let mesh = self.mesh;
        let t = state.t + self.tau;
        let lift = lift_at(mesh, &self.problem.boundary, t);
        let mut load = load_at(mesh, &self.problem.forcing, t, true)?;
        scale_load(&mut load, self.tau);
        add_mass_times(&mut load, &self.mass, &state.velocity);
        let conv = if self.scheme == UnsteadyScheme::Classical {
            Convection::Classical(&state.velocity)
        } else {
            Convection::Eafe {
                field: ConvectionField::cell_average_of_linear(&state.velocity, self.options.eps)?,
                stabilized: true,
            }
        };
        let c = convection_blocks(mesh, &conv, &self.options)?.expect("convective scheme");
        Ok(BlockSaddleSystem::from_extended(mesh, &self.base.add_scaled(self.tau, &c), &self.div, self.tau, &load, &lift))
    }
}

/// One backward-Euler step; see [`UnsteadySolver`] for repeated stepping.
pub fn step_unsteady<'m>(
    mesh: &'m SimplicialMesh,
    problem: &FlowProblem,
    state: &UnsteadyState<'m>,
    tau: f64,
    scheme: UnsteadyScheme,
    options: &SchemeOptions,
) -> Result<(UnsteadyState<'m>, SolverReport)> {
    UnsteadySolver::new(mesh, problem.clone(), scheme, tau, *options)?.step(state)
}

/// Linear system of a Stokes or Oseen scheme, for inspection and testing.
pub fn assemble_linear_system(
    mesh: &SimplicialMesh,
    problem: &FlowProblem,
    convection: Option<(Point, OseenVariant)>,
    stokes: StokesVariant,
    options: &SchemeOptions,
) -> Result<BlockSaddleSystem> {
    let forms = StaticForms::new(mesh)?;
    let lift = lift_at(mesh, &problem.boundary, 0.0);
    let b_field;
    let (modified, post, conv) = match convection {
        None => (stokes != StokesVariant::Unmodified, stokes != StokesVariant::Plain, Convection::None),
        Some((b, OseenVariant::Classical)) => {
            b_field = nodal_interpolate(mesh, |_| b);
            (false, true, Convection::Classical(&b_field))
        }
        Some((b, v)) => (
            true,
            true,
            Convection::Eafe {
                field: ConvectionField::constant(mesh, b, options.eps)?,
                stabilized: v == OseenVariant::Eafe,
            },
        ),
    };
    let mut velocity = forms.viscous(modified)?.scaled(problem.nu);
    if let Some(c) = convection_blocks(mesh, &conv, options)? {
        velocity = velocity.add_scaled(1.0, &c);
    }
    let load = load_at(mesh, &problem.forcing, 0.0, post)?;
    Ok(BlockSaddleSystem::from_extended(mesh, &velocity, &forms.div, 1.0, &load, &lift))
}
