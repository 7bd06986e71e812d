//! The built-in benchmark problems.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fespace::{ExactSolution, VectorFn};
use crate::linalg::Point;
use crate::mesh::{quad_refine, uniform_box_mesh, uniform_rectangle_mesh, Pattern, SimplicialMesh};
use crate::schemes::{FlowProblem, SchemeOptions};

/// Which equations a case solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    Stokes,
    Oseen,
    NavierStokes,
    Unsteady,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Stokes => "stokes",
            CaseKind::Oseen => "oseen",
            CaseKind::NavierStokes => "navier-stokes",
            CaseKind::Unsteady => "unsteady",
        }
    }
}

/// Mesh family. Level 1 is the base mesh; each further level halves `h`
/// (quad refinement in 2D, doubled subdivisions in 3D).
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Rectangle {
        x: (f64, f64),
        y: (f64, f64),
        nx: usize,
        ny: usize,
        pattern: Pattern,
    },
    Box { ranges: [(f64, f64); 3], n: usize },
}

impl MeshSpec {
    pub fn build(&self, level: usize) -> Result<SimplicialMesh> {
        if level == 0 {
            return Err(Error::InvalidMeshParameter("mesh levels start at 1".into()));
        }
        match *self {
            MeshSpec::Rectangle { x, y, nx, ny, pattern } => {
                let mut m = uniform_rectangle_mesh(x, y, nx, ny, pattern)?;
                for _ in 1..level {
                    m = quad_refine(&m)?;
                }
                Ok(m)
            }
            MeshSpec::Box { ranges, n } => {
                let k = n << (level - 1);
                uniform_box_mesh(ranges, [k; 3])
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeshSpec::Rectangle { .. } => 2,
            MeshSpec::Box { .. } => 3,
        }
    }

    /// Analytic domain measure.
    pub fn measure(&self) -> f64 {
        match self {
            MeshSpec::Rectangle { x, y, .. } => (x.1 - x.0) * (y.1 - y.0),
            MeshSpec::Box { ranges, .. } => ranges.iter().map(|r| r.1 - r.0).product(),
        }
    }
}

/// Backward-Euler settings for unsteady cases.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSpec {
    pub tau: f64,
    pub t_end: f64,
    pub report_times: Vec<f64>,
}

/// Exact solution as a function of the viscosity.
pub type ExactFamily = fn(f64) -> ExactSolution;

#[derive(Clone, Debug)]
pub struct BenchmarkCase {
    pub id: &'static str,
    pub kind: CaseKind,
    pub mesh: MeshSpec,
    pub levels: usize,
    pub nus: Vec<f64>,
    pub default_nu: f64,
    /// Constant convection field of Oseen cases.
    pub convection: Option<Point>,
    /// EAFE diffusion used by this case.
    pub eps: f64,
    pub schemes: Vec<&'static str>,
    pub time: Option<TimeSpec>,
    exact: Option<ExactFamily>,
    forcing: Option<fn(f64) -> VectorFn>,
}

impl BenchmarkCase {
    pub fn exact(&self, nu: f64) -> Option<ExactSolution> {
        self.exact.map(|e| e(nu))
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact.is_some()
    }

    /// Viscosity, forcing and boundary data at `nu`.
    pub fn problem(&self, nu: f64) -> Result<FlowProblem> {
        match (self.exact(nu), self.forcing) {
            (Some(e), _) => FlowProblem::new(nu, e.forcing.clone(), e.boundary()),
            (None, Some(f)) => FlowProblem::new(nu, f(nu), Arc::new(|_, _| [0.0; 3])),
            (None, None) => unreachable!("case without data"),
        }
    }

    pub fn scheme_options(&self) -> SchemeOptions {
        SchemeOptions {
            eps: self.eps,
            ..SchemeOptions::default()
        }
    }

    pub fn default_scheme(&self) -> &'static str {
        self.schemes[0]
    }
}

pub const CASE_IDS: &[&str] = &["stokes-sinusoidal", "oseen-exponential", "oseen-rotational", "kovasznay", "potential2d", "potential3d"];

pub fn builtin_case(id: &str) -> Result<BenchmarkCase> {
    let unit = MeshSpec::Rectangle {
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        nx: 16,
        ny: 16,
        pattern: Pattern::RightDiagonal,
    };
    let eps = SchemeOptions::default().eps;
    Ok(match id {
        "stokes-sinusoidal" => BenchmarkCase {
            id: "stokes-sinusoidal",
            kind: CaseKind::Stokes,
            mesh: MeshSpec::Rectangle {
                x: (0.0, 1.0),
                y: (0.0, 1.0),
                nx: 8,
                ny: 8,
                pattern: Pattern::RightDiagonal,
            },
            levels: 4,
            nus: vec![1.0, 1e-3, 1e-6],
            default_nu: 1e-3,
            convection: None,
            eps,
            schemes: vec!["robust", "plain", "unmodified"],
            time: None,
            exact: Some(stokes_sinusoidal),
            forcing: None,
        },
        "oseen-exponential" => BenchmarkCase {
            id: "oseen-exponential",
            kind: CaseKind::Oseen,
            mesh: unit,
            levels: 1,
            nus: vec![1e-4],
            default_nu: 1e-4,
            convection: Some([10.0, 1.0, 0.0]),
            eps: 1e-8,
            schemes: vec!["eafe", "eafe-unstabilized", "classical"],
            time: None,
            exact: Some(oseen_exponential),
            forcing: None,
        },
        "oseen-rotational" => BenchmarkCase {
            id: "oseen-rotational",
            kind: CaseKind::Oseen,
            mesh: unit,
            levels: 1,
            nus: vec![1e-3],
            default_nu: 1e-3,
            convection: Some([10.0, 1.0, 0.0]),
            eps,
            schemes: vec!["eafe", "classical", "eafe-unstabilized"],
            time: None,
            exact: None,
            forcing: Some(|_| Arc::new(|x, _| [-10.0 * x[1], 10.0 * x[0], 0.0])),
        },
        "kovasznay" => BenchmarkCase {
            id: "kovasznay",
            kind: CaseKind::NavierStokes,
            mesh: MeshSpec::Rectangle {
                x: (-0.5, 1.5),
                y: (0.0, 2.0),
                nx: 8,
                ny: 8,
                pattern: Pattern::RightDiagonal,
            },
            levels: 5,
            nus: vec![1.0, 1e-3, 5e-4, 1e-4],
            default_nu: 1e-3,
            convection: None,
            eps,
            schemes: vec!["eafe", "classical"],
            time: None,
            exact: Some(kovasznay),
            forcing: None,
        },
        "potential2d" => BenchmarkCase {
            id: "potential2d",
            kind: CaseKind::Unsteady,
            // 2048 right triangles; crisscross layouts are available through
            // the mesh overrides
            mesh: MeshSpec::Rectangle {
                x: (-0.5, 0.5),
                y: (-0.5, 0.5),
                nx: 32,
                ny: 32,
                pattern: Pattern::RightDiagonal,
            },
            levels: 1,
            nus: vec![1.0, 1e-6],
            default_nu: 1e-6,
            convection: None,
            eps,
            schemes: vec!["td1", "td2", "classical"],
            time: Some(TimeSpec {
                tau: 0.1,
                t_end: 2.0,
                report_times: vec![0.5, 1.0, 1.5, 2.0],
            }),
            exact: Some(potential2d),
            forcing: None,
        },
        "potential3d" => BenchmarkCase {
            id: "potential3d",
            kind: CaseKind::NavierStokes,
            mesh: MeshSpec::Box { ranges: [(0.0, 1.0); 3], n: 8 },
            levels: 1,
            nus: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            default_nu: 1e-5,
            convection: None,
            eps,
            schemes: vec!["eafe", "classical"],
            time: None,
            exact: Some(potential3d),
            forcing: None,
        },
        other => return Err(Error::UnknownCase(other.to_string())),
    })
}

fn exact(
    velocity: impl Fn(&Point, f64) -> Point + Send + Sync + 'static,
    gradient: impl Fn(&Point, f64) -> [[f64; 3]; 3] + Send + Sync + 'static,
    pressure: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
    forcing: impl Fn(&Point, f64) -> Point + Send + Sync + 'static,
) -> ExactSolution {
    ExactSolution {
        velocity: Arc::new(velocity),
        gradient: Arc::new(gradient),
        pressure: Arc::new(pressure),
        forcing: Arc::new(forcing),
    }
}

const E: f64 = std::f64::consts::E;

/// `u = (−sin²(πx) sin(2πy), sin(2πx) sin²(πy))`, `p = e^{x+y} − (e−1)²`,
/// `f = −νΔu + ∇p`.
pub fn stokes_sinusoidal(nu: f64) -> ExactSolution {
    exact(
        |x, _| {
            let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
            [-sx * sx * (2.0 * PI * x[1]).sin(), (2.0 * PI * x[0]).sin() * sy * sy, 0.0]
        },
        |x, _| {
            let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
            let (s2x, s2y) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
            let (c2x, c2y) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
            [
                [-PI * s2x * s2y, -2.0 * PI * sx * sx * c2y, 0.0],
                [2.0 * PI * c2x * sy * sy, PI * s2x * s2y, 0.0],
                [0.0; 3],
            ]
        },
        |x, _| (x[0] + x[1]).exp() - (E - 1.0) * (E - 1.0),
        move |x, _| {
            let (sx, sy) = ((PI * x[0]).sin(), (PI * x[1]).sin());
            let lap1 = -2.0 * PI * PI * (2.0 * PI * x[1]).sin() * (1.0 - 4.0 * sx * sx);
            let lap2 = 2.0 * PI * PI * (2.0 * PI * x[0]).sin() * (1.0 - 4.0 * sy * sy);
            let e = (x[0] + x[1]).exp();
            [-nu * lap1 + e, -nu * lap2 + e, 0.0]
        },
    )
}

/// `u = (e^y, e^x)` with `b = (10, 1)`.
pub fn oseen_exponential(nu: f64) -> ExactSolution {
    exact(
        |x, _| [x[1].exp(), x[0].exp(), 0.0],
        |x, _| [[0.0, x[1].exp(), 0.0], [x[0].exp(), 0.0, 0.0], [0.0; 3]],
        |x, _| (x[0] + x[1]).exp() - (E - 1.0) * (E - 1.0),
        move |x, _| {
            let e = (x[0] + x[1]).exp();
            [(1.0 - nu) * x[1].exp() + e, (10.0 - nu) * x[0].exp() + e, 0.0]
        },
    )
}

pub fn kovasznay_lambda(nu: f64) -> f64 {
    1.0 / (2.0 * nu) - (1.0 / (4.0 * nu * nu) + 4.0 * PI * PI).sqrt()
}

/// Kovasznay flow on `[−0.5, 1.5] × [0, 2]`, `f = 0`.
pub fn kovasznay(nu: f64) -> ExactSolution {
    let l = kovasznay_lambda(nu);
    let c = ((3.0 * l).exp() - (-l).exp()) / (8.0 * l);
    exact(
        move |x, _| {
            let e = (l * x[0]).exp();
            let (s, co) = ((2.0 * PI * x[1]).sin(), (2.0 * PI * x[1]).cos());
            [1.0 - e * co, l / (2.0 * PI) * e * s, 0.0]
        },
        move |x, _| {
            let e = (l * x[0]).exp();
            let (s, co) = ((2.0 * PI * x[1]).sin(), (2.0 * PI * x[1]).cos());
            [[-l * e * co, 2.0 * PI * e * s, 0.0], [l * l / (2.0 * PI) * e * s, l * e * co, 0.0], [0.0; 3]]
        },
        move |x, _| -0.5 * (2.0 * l * x[0]).exp() + c,
        |_, _| [0.0; 3],
    )
}

/// `∫ (x² + y²)⁴` over `[−1/2, 1/2]²`.
fn r8_integral() -> f64 {
    let m = |k: i32| 0.25f64.powi(k) / (2 * k + 1) as f64;
    2.0 * m(4) * m(0) + 8.0 * m(3) * m(1) + 6.0 * m(2) * m(2)
}

/// `u = ∇χ`, `χ = t²(5x⁴y − 10x²y³ + y⁵)`, `p = −|u|²/2 − χ_t + C(t)`.
pub fn potential2d(_nu: f64) -> ExactSolution {
    let c = 12.5 * r8_integral();
    exact(
        |x, t| {
            let (a, b) = (x[0], x[1]);
            let t2 = t * t;
            [t2 * (20.0 * a.powi(3) * b - 20.0 * a * b.powi(3)), t2 * (5.0 * a.powi(4) - 30.0 * a * a * b * b + 5.0 * b.powi(4)), 0.0]
        },
        |x, t| {
            let (a, b) = (x[0], x[1]);
            let t2 = t * t;
            let d11 = t2 * (60.0 * a * a * b - 20.0 * b.powi(3));
            let d12 = t2 * (20.0 * a.powi(3) - 60.0 * a * b * b);
            [[d11, d12, 0.0], [d12, -d11, 0.0], [0.0; 3]]
        },
        move |x, t| {
            let (a, b) = (x[0], x[1]);
            let r2 = a * a + b * b;
            let speed2 = 25.0 * t.powi(4) * r2.powi(4);
            let chi_t = 2.0 * t * (5.0 * a.powi(4) * b - 10.0 * a * a * b.powi(3) + b.powi(5));
            -0.5 * speed2 - chi_t + c * t.powi(4)
        },
        |_, _| [0.0; 3],
    )
}

/// `u = ∇(xyz)`, `p = −|u|²/2 + 1/6` on the unit cube.
pub fn potential3d(_nu: f64) -> ExactSolution {
    exact(
        |x, _| [x[1] * x[2], x[0] * x[2], x[0] * x[1]],
        |x, _| [[0.0, x[2], x[1]], [x[2], 0.0, x[0]], [x[1], x[0], 0.0]],
        |x, _| -0.5 * ((x[1] * x[2]).powi(2) + (x[0] * x[2]).powi(2) + (x[0] * x[1]).powi(2)) + 1.0 / 6.0,
        |_, _| [0.0; 3],
    )
}
