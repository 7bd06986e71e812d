//! Field export: legacy ASCII VTK and plain CSV.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fespace::{FeField, Space};
use crate::mesh::SimplicialMesh;

fn write_mesh_part(out: &mut impl Write, mesh: &SimplicialMesh, title: &str) -> Result<()> {
    let d = mesh.dim();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for v in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
    }
    let n = mesh.n_cells();
    writeln!(out, "CELLS {} {}", n, n * (d + 2))?;
    for c in 0..n {
        let ids: Vec<String> = mesh.cell(c).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", d + 1, ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {n}")?;
    let ty = if d == 2 { 5 } else { 10 };
    for _ in 0..n {
        writeln!(out, "{ty}")?;
    }
    Ok(())
}

/// Writes the mesh with vertex velocities (linear part) and cell pressures.
pub fn write_vtk(path: &Path, velocity: &FeField, pressure: &FeField) -> Result<()> {
    if pressure.space() != Space::P0Pressure || !matches!(velocity.space(), Space::BrFull | Space::VectorP1) {
        return Err(Error::InvalidArgument("VTK export needs a BR or P1 velocity and a P0 pressure".into()));
    }
    let mesh = velocity.mesh();
    let mut out = BufWriter::new(File::create(path)?);
    write_mesh_part(&mut out, mesh, "brflow solution")?;
    writeln!(out, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(out, "VECTORS velocity double")?;
    for v in 0..mesh.n_vertices() {
        let u = velocity.vertex_value(v);
        writeln!(out, "{:.16e} {:.16e} {:.16e}", u[0], u[1], u[2])?;
    }
    writeln!(out, "CELL_DATA {}", mesh.n_cells())?;
    writeln!(out, "SCALARS pressure double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for p in pressure.coeffs() {
        writeln!(out, "{p:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the mesh alone.
pub fn write_mesh_vtk(path: &Path, mesh: &SimplicialMesh) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_mesh_part(&mut out, mesh, "brflow mesh")?;
    out.flush()?;
    Ok(())
}

/// One line per vertex: `x,y,z,u,v,w`.
pub fn write_velocity_csv(path: &Path, velocity: &FeField) -> Result<()> {
    let mesh = velocity.mesh();
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x,y,z,u,v,w")?;
    for v in 0..mesh.n_vertices() {
        let x = mesh.vertex(v);
        let u = velocity.vertex_value(v);
        writeln!(out, "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}", x[0], x[1], x[2], u[0], u[1], u[2])?;
    }
    out.flush()?;
    Ok(())
}
