//! Snapshot and report files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::Simulation;
use crate::state::{FIELD_NAMES, NVARS};

use super::ErrorReport;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step}.vtk")
}

/// Legacy ASCII VTK structured grid of the interior cells with every state
/// component, the energy density and the material id as cell data.
pub fn write_vtk(sim: &Simulation, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = create(path)?;
    let g = &sim.disc.grid;
    let [n1, n2, n3] = g.dims;
    let gw = g.ghost;
    let vd = g.ext.map(|n| n + 1);
    writeln!(w, "# vtk DataFile Version 3.0").map_err(io)?;
    writeln!(w, "porowave t={:.9e} step={}", sim.t, sim.step).map_err(io)?;
    writeln!(w, "ASCII\nDATASET STRUCTURED_GRID").map_err(io)?;
    writeln!(w, "DIMENSIONS {} {} {}", n1 + 1, n2 + 1, n3 + 1).map_err(io)?;
    writeln!(w, "POINTS {} double", (n1 + 1) * (n2 + 1) * (n3 + 1)).map_err(io)?;
    for k in gw..=gw + n3 {
        for j in gw..=gw + n2 {
            for i in gw..=gw + n1 {
                let p = g.vertices[i + vd[0] * (j + vd[1] * k)];
                writeln!(w, "{:.12e} {:.12e} {:.12e}", p.x, p.y, p.z).map_err(io)?;
            }
        }
    }
    let cells: Vec<usize> = g.interior_indices().collect();
    writeln!(w, "CELL_DATA {}", cells.len()).map_err(io)?;
    for (m, name) in FIELD_NAMES.iter().enumerate() {
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default").map_err(io)?;
        for &c in &cells {
            writeln!(w, "{:.9e}", sim.q[c][m]).map_err(io)?;
        }
    }
    let energy = sim.energy_density();
    writeln!(w, "SCALARS energy double 1\nLOOKUP_TABLE default").map_err(io)?;
    for &c in &cells {
        writeln!(w, "{:.9e}", energy[c]).map_err(io)?;
    }
    writeln!(w, "SCALARS material int 1\nLOOKUP_TABLE default").map_err(io)?;
    for &c in &cells {
        writeln!(w, "{}", sim.disc.medium(c).material_id).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// One interior ξ3 layer of cell-centroid values as CSV.
pub fn write_csv_slice(sim: &Simulation, layer: usize, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let g = &sim.disc.grid;
    if layer >= g.dims[2] {
        return Err(Error::InvalidParameter(format!(
            "slice layer {layer} outside 0..{}",
            g.dims[2]
        )));
    }
    let mut w = create(path)?;
    write!(w, "i,j,x,y,z").map_err(io)?;
    for name in FIELD_NAMES {
        write!(w, ",{name}").map_err(io)?;
    }
    writeln!(w, ",energy").map_err(io)?;
    let energy = sim.energy_density();
    let k = g.ghost + layer;
    for j in 0..g.dims[1] {
        for i in 0..g.dims[0] {
            let c = g.index(i + g.ghost, j + g.ghost, k);
            let x = g.centroid[c];
            write!(w, "{i},{j},{:.12e},{:.12e},{:.12e}", x.x, x.y, x.z).map_err(io)?;
            for m in 0..NVARS {
                write!(w, ",{:.9e}", sim.q[c][m]).map_err(io)?;
            }
            writeln!(w, ",{:.9e}", energy[c]).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Appends error reports as `case,N,norm,value,rate` rows.
pub fn write_report(reports: &[ErrorReport], path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = create(path)?;
    writeln!(w, "case,N,norm,value,rate").map_err(io)?;
    for r in reports {
        for (norm, values, rate) in [("l1", &r.l1, r.rate_l1), ("max", &r.max, r.rate_max)] {
            for (n, v) in r.resolutions.iter().zip(values.iter()) {
                let rate = rate.map(|x| format!("{x:.4}")).unwrap_or_default();
                writeln!(w, "{},{n},{norm},{v:.6e},{rate}", r.label).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

pub fn report_path(dir: &Path) -> PathBuf {
    dir.join("report.csv")
}
