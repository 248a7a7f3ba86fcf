//! CSV ingestion and output of trajectories.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::compare::{ReferenceTrajectory, REFERENCE_COLUMNS};
use super::Trajectory;
use crate::dynamics::FlightState;
use crate::error::{Result, SoaringError};

pub const TRAJECTORY_HEADER: [&str; 12] =
    ["t", "x", "y", "z", "V", "gamma", "psi", "phi", "u", "J", "e", "E"];

fn csv_err(e: csv::Error) -> SoaringError {
    SoaringError::Format(e.to_string())
}

fn fmt(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for i in 0..traj.len() {
        let s = &traj.states[i];
        let row = [
            traj.times[i],
            s.x,
            s.y,
            s.z,
            s.v,
            s.gamma,
            s.psi,
            s.phi,
            traj.controls[i],
            traj.objective[i],
            traj.specific_energy[i],
            traj.total_energy[i],
        ];
        out.write_record(row.iter().map(|v| fmt(*v))).map_err(csv_err)?;
    }
    out.flush().map_err(|e| SoaringError::Format(e.to_string()))
}

pub fn write_trajectory_file(path: &Path, traj: &Trajectory) -> Result<()> {
    let f = File::create(path).map_err(|e| SoaringError::io(path, e))?;
    write_trajectory(f, traj)
}

/// Reads the columns named in `wanted` (by header) from every row.
fn read_columns<R: Read>(r: R, wanted: &[&str], optional: &[&str]) -> Result<(Vec<Vec<f64>>, Vec<Option<Vec<f64>>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let req: Vec<usize> = wanted
        .iter()
        .map(|n| find(n).ok_or_else(|| SoaringError::Format(format!("missing column `{n}`"))))
        .collect::<Result<_>>()?;
    let opt: Vec<Option<usize>> = optional.iter().map(|n| find(n)).collect();
    let mut cols = vec![Vec::new(); req.len()];
    let mut opt_cols: Vec<Option<Vec<f64>>> = opt.iter().map(|o| o.map(|_| Vec::new())).collect();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |i: usize| -> Result<f64> {
            let cell = rec.get(i).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| {
                SoaringError::Format(format!("row {}: cannot parse `{cell}`", line + 2))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(SoaringError::Format(format!("row {}: non-finite value", line + 2)))
            }
        };
        for (c, &i) in cols.iter_mut().zip(&req) {
            c.push(parse(i)?);
        }
        for (c, o) in opt_cols.iter_mut().zip(&opt) {
            if let (Some(c), Some(i)) = (c.as_mut(), o) {
                c.push(parse(*i)?);
            }
        }
    }
    Ok((cols, opt_cols))
}

/// Reads a reference trajectory: requires `t,x,y,z,V,gamma,psi`, picks up
/// `phi` when present and ignores every other column.
pub fn read_reference<R: Read>(r: R) -> Result<ReferenceTrajectory> {
    let mut wanted = vec!["t"];
    wanted.extend(REFERENCE_COLUMNS);
    let (cols, opt) = read_columns(r, &wanted, &["phi"])?;
    let n = cols[0].len();
    let reference = ReferenceTrajectory {
        times: cols[0].clone(),
        states: (0..n)
            .map(|i| [cols[1][i], cols[2][i], cols[3][i], cols[4][i], cols[5][i], cols[6][i]])
            .collect(),
        phi: opt.into_iter().next().flatten(),
    };
    reference.validate()?;
    Ok(reference)
}

pub fn read_reference_file(path: &Path) -> Result<ReferenceTrajectory> {
    let f = File::open(path).map_err(|e| SoaringError::io(path, e))?;
    read_reference(f)
}

/// Reads a CSV written by [`write_trajectory`].
pub fn read_trajectory<R: Read>(r: R) -> Result<Trajectory> {
    let (cols, _) = read_columns(r, &TRAJECTORY_HEADER, &[])?;
    let n = cols[0].len();
    let traj = Trajectory {
        times: cols[0].clone(),
        states: (0..n)
            .map(|i| {
                FlightState::from_array([
                    cols[1][i], cols[2][i], cols[3][i], cols[4][i], cols[5][i], cols[6][i], cols[7][i],
                ])
            })
            .collect(),
        controls: cols[8].clone(),
        objective: cols[9].clone(),
        specific_energy: cols[10].clone(),
        total_energy: cols[11].clone(),
    };
    traj.validate()?;
    Ok(traj)
}
