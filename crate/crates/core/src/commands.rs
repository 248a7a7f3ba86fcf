//! Command implementations behind the `soaring` binary. Each command writes
//! its artifacts under the output directory and returns a one-line summary
//! plus the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::chen_fliess::{example2_exact_output, example2_integrate, random_piecewise_control};
use crate::dynamics::{ForceModel, WindCouplingSign};
use crate::error::{Result, SoaringError};
use crate::esc::scalar_esc_demo;
use crate::lie::fixtures::{self, Fixture};
use crate::lie::{
    bad_bracket_check, find_admissible_weight, larc_rank, weight_neutralization, BracketOptions, DiffScheme,
    FieldSet, FormalBracket, LarcOptions, LarcReport,
};
use crate::scenario::{ForceModelChoice, Scenario};
use crate::sim::{
    compare_trajectories, detect_phases, io, simulate_ds, SimOutcome, SimStatus, Trajectory,
};

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub h: Option<f64>,
    pub t_end: Option<f64>,
    pub sign: Option<WindCouplingSign>,
    pub seed: Option<u64>,
}

impl Overrides {
    /// Applies the overrides and re-validates.
    pub fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(o) = &self.out {
            s.output.dir = o.clone();
        }
        if let Some(h) = self.h {
            s.sim.h = h;
        }
        if let Some(t) = self.t_end {
            s.sim.t_end = t;
        }
        if let Some(sign) = self.sign {
            s.sim.sign = sign;
        }
        if let Some(seed) = self.seed {
            s.demo_chenfliess.seed = seed;
        }
        s.resolve();
        s.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn out_dir(s: &Scenario) -> Result<PathBuf> {
    let dir = s.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| SoaringError::io(&dir, e))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| SoaringError::Format(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| SoaringError::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
struct EnergySummary {
    initial: f64,
    last: f64,
    min: f64,
    max: f64,
    relative_drift: f64,
}

fn energy_summary(traj: &Trajectory) -> Option<EnergySummary> {
    let e = &traj.total_energy;
    let (first, last) = (*e.first()?, *e.last()?);
    Some(EnergySummary {
        initial: first,
        last,
        min: e.iter().copied().fold(f64::INFINITY, f64::min),
        max: e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        relative_drift: (last - first).abs() / first.abs(),
    })
}

fn run_sim(s: &Scenario) -> Result<SimOutcome> {
    simulate_ds(&s.initial, &s.params(), &s.esc, s.sim.t_end, s.sim.h, s.sim.sign)
}

/// Closed-loop run: `trajectory.csv` and `report.json`. Exit code 2 when the
/// integration aborted.
pub fn cmd_simulate(s: &Scenario) -> Result<CommandOutcome> {
    let dir = out_dir(s)?;
    let outcome = run_sim(s)?;
    let traj = &outcome.trajectory;
    let csv = dir.join("trajectory.csv");
    io::write_trajectory_file(&csv, traj)?;
    let phases = if traj.len() >= 2 {
        Some(detect_phases(traj, &s.phases)?)
    } else {
        None
    };
    let report = json!({
        "scenario": s,
        "sign": s.sim.sign,
        "status": outcome.status,
        "samples": traj.len(),
        "energy": energy_summary(traj),
        "phases": phases,
    });
    let json_path = dir.join("report.json");
    write_json(&json_path, &report)?;

    let (exit_code, what) = match &outcome.status {
        SimStatus::Completed => (0, "completed".to_string()),
        SimStatus::Aborted { time, reason } => (2, format!("aborted at t = {time:.4} s: {reason}")),
    };
    let cycle = phases
        .as_ref()
        .and_then(|p| p.cycle.as_ref())
        .map(|c| format!(", cycle {:.3}-{:.3} s, energy drift {:.2}%", c.t_start, c.t_end, 100.0 * c.energy_drift))
        .unwrap_or_else(|| ", no complete cycle".into());
    Ok(CommandOutcome {
        exit_code,
        summary: format!("simulation {what}, {} samples{cycle}", traj.len()),
        files: vec![csv, json_path],
    })
}

fn larc_opts(s: &Scenario, scheme: DiffScheme) -> LarcOptions {
    LarcOptions {
        tol: s.controllability.tol,
        brackets: BracketOptions {
            scheme,
            max_depth: s.controllability.max_depth,
        },
    }
}

/// Largest relative difference between two evaluations, bracket by bracket.
fn max_rel_diff(a: &LarcReport, b: &LarcReport) -> f64 {
    a.vectors
        .iter()
        .zip(&b.vectors)
        .map(|(x, y)| {
            let num = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            let den = x.iter().map(|p| p * p).sum::<f64>().sqrt().max(1e-300);
            num / den
        })
        .fold(0.0, f64::max)
}

fn fixture_setup(s: &Scenario, forces: ForceModel) -> Result<(FieldSet, Vec<f64>, Vec<FormalBracket>)> {
    let c = &s.controllability;
    let (fields, x, default) = match c.fixture {
        Fixture::Soaring => (
            fixtures::soaring_fields(s.params(), s.sim.sign, forces)?,
            s.initial.to_array().to_vec(),
            fixtures::soaring_completed_brackets(),
        ),
        Fixture::GroundRobot => (fixtures::ground_robot_fields()?, vec![0.0; 3], fixtures::ground_robot_brackets()),
        Fixture::Obstruction => (fixtures::obstruction_fields()?, vec![0.0; 2], fixtures::obstruction_brackets()),
    };
    Ok((fields, x, c.brackets.clone().unwrap_or(default)))
}

/// Rank test with diagnostics: `controllability.json`. Exit 0 when the
/// distribution has full rank, the two differentiation schemes agree, and
/// (for the soaring model) an admissible weight exists; otherwise 2.
pub fn cmd_controllability(s: &Scenario) -> Result<CommandOutcome> {
    let dir = out_dir(s)?;
    let c = &s.controllability;
    let forces = s.force_model()?;
    let (fields, x, brackets) = fixture_setup(s, forces)?;
    let m = fields.inputs();

    let taylor = larc_rank(&brackets, &fields, &x, &larc_opts(s, DiffScheme::Taylor))?;
    let fd = larc_rank(
        &brackets,
        &fields,
        &x,
        &larc_opts(s, DiffScheme::FiniteDifference(c.finite_difference)),
    )?;
    let agreement = max_rel_diff(&taylor, &fd);
    let schemes_agree = agreement <= c.agreement_tol && fd.breakdown.is_empty();

    let mut report = json!({
        "scenario": s,
        "sign": s.sim.sign,
        "fixture": c.fixture,
        "point": x,
        "distribution": taylor,
        "finite_difference": {
            "scheme": fd.scheme,
            "rank": fd.rank,
            "singular_values": fd.singular_values,
            "breakdown": fd.breakdown,
            "max_relative_difference": agreement,
            "agreement_tol": c.agreement_tol,
            "agree": schemes_agree,
        },
    });

    let bad: Vec<FormalBracket> = brackets.iter().filter(|b| b.is_bad(m)).cloned().collect();
    let mut weight_ok = true;
    match c.fixture {
        Fixture::Soaring => {
            let opts = larc_opts(s, DiffScheme::Taylor);
            let printed = fixtures::soaring_printed_brackets();
            let printed_report = larc_rank(&printed, &fields, &x, &opts)?;
            let other = match c.force_model {
                ForceModelChoice::AirspeedDependent => ForceModelChoice::Frozen,
                ForceModelChoice::Frozen => ForceModelChoice::AirspeedDependent,
            };
            let other_forces = match other {
                ForceModelChoice::AirspeedDependent => ForceModel::AirspeedDependent,
                ForceModelChoice::Frozen => ForceModel::frozen_at(s.initial.v, &s.params())?,
            };
            let (other_fields, _, _) = fixture_setup(s, other_forces)?;
            let other_report = larc_rank(&brackets, &other_fields, &x, &opts)?;
            let bad_bracket = fixtures::soaring_bad_bracket();
            let against_list = bad_bracket_check(&fields, &x, &bad_bracket, &brackets, &opts)?;
            let against_printed = bad_bracket_check(&fields, &x, &bad_bracket, &printed, &opts)?;
            let found = find_admissible_weight(c.max_w0, c.max_w)?;
            weight_ok = found.is_some();
            let check = found.map(|(w0, w)| weight_neutralization(w0, w)).transpose()?;
            report["printed_set"] = json!({
                "brackets": printed_report.brackets,
                "rank": printed_report.rank,
                "singular_values": printed_report.singular_values,
            });
            report["other_force_model"] = json!({
                "force_model": other,
                "rank": other_report.rank,
                "singular_values": other_report.singular_values,
            });
            report["bad_bracket"] = json!({
                "against_bracket_list": against_list,
                "against_printed_set": against_printed,
            });
            report["weight"] = json!({
                "bounds": [c.max_w0, c.max_w],
                "admissible": found,
                "check": check,
            });
            let ob_fields = fixtures::obstruction_fields()?;
            let ob = larc_rank(&fixtures::obstruction_brackets(), &ob_fields, &[0.0, 0.0], &opts)?;
            let ob_bad = bad_bracket_check(
                &ob_fields,
                &[0.0, 0.0],
                &fixtures::obstruction_bad_bracket(),
                &[
                    FormalBracket::Control(1),
                    FormalBracket::bracket(FormalBracket::Drift, FormalBracket::Control(1)),
                ],
                &opts,
            )?;
            report["obstruction_example"] = json!({
                "rank": ob.rank,
                "rank_without_bad": ob.rank_without_bad,
                "bad_bracket": ob_bad,
            });
        }
        Fixture::GroundRobot | Fixture::Obstruction => {
            let opts = larc_opts(s, DiffScheme::Taylor);
            let good: Vec<FormalBracket> = brackets.iter().filter(|b| !b.is_bad(m)).cloned().collect();
            let checks = bad
                .iter()
                .map(|b| bad_bracket_check(&fields, &x, b, &good, &opts))
                .collect::<Result<Vec<_>>>()?;
            report["bad_brackets"] = json!(checks);
        }
    }

    let path = dir.join("controllability.json");
    write_json(&path, &report)?;
    let pass = taylor.full_rank && schemes_agree && weight_ok;
    let sv = &taylor.singular_values;
    let ratio = match (sv.first(), sv.last()) {
        (Some(a), Some(b)) if *a > 0.0 => b / a,
        _ => 0.0,
    };
    Ok(CommandOutcome {
        exit_code: if pass { 0 } else { 2 },
        summary: format!(
            "rank {}/{} (σ_min/σ_max = {ratio:.3e}), schemes agree to {agreement:.2e}{}",
            taylor.rank,
            taylor.dim,
            if weight_ok { "" } else { ", no admissible weight" }
        ),
        files: vec![path],
    })
}

/// Simulates and compares against a reference CSV: `comparison.json`.
pub fn cmd_compare(s: &Scenario, reference: Option<&Path>) -> Result<CommandOutcome> {
    let path = reference
        .map(Path::to_path_buf)
        .or_else(|| s.compare.reference.clone())
        .ok_or_else(|| SoaringError::invalid("compare.reference", "no reference trajectory given"))?;
    let reference = io::read_reference_file(&path)?;
    let dir = out_dir(s)?;
    let outcome = run_sim(s)?;
    let cmp = compare_trajectories(&outcome.trajectory, &reference, &s.params())?;
    let report = json!({
        "scenario": s,
        "sign": s.sim.sign,
        "reference": path,
        "status": outcome.status,
        "comparison": cmp,
    });
    let out = dir.join("comparison.json");
    write_json(&out, &report)?;
    let worst = cmp
        .rmse
        .iter()
        .map(|(k, v)| format!("{k} {v:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(CommandOutcome {
        exit_code: if outcome.status == SimStatus::Completed { 0 } else { 2 },
        summary: format!("overlap {:.3} s, rmse: {worst}", cmp.overlap),
        files: vec![out],
    })
}

/// Scalar extremum-seeking demo: `esc_demo.csv` and `esc_demo.json`.
pub fn cmd_demo_esc(s: &Scenario) -> Result<CommandOutcome> {
    let d = &s.demo_esc;
    let dir = out_dir(s)?;
    let traj = scalar_esc_demo(d.x0, d.x_star, d.omega, d.t_end, d.h)?;
    let csv_path = dir.join("esc_demo.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| SoaringError::Format(e.to_string()))?;
    w.write_record(["t", "x"]).map_err(|e| SoaringError::Format(e.to_string()))?;
    for (t, x) in traj.times.iter().zip(&traj.values) {
        w.write_record([format!("{t:.8e}"), format!("{x:.8e}")])
            .map_err(|e| SoaringError::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| SoaringError::io(&csv_path, e))?;
    let tail = traj.max_error_after(d.t_end - 1.0);
    let report = json!({
        "scenario": s,
        "demo": d,
        "final_error": traj.final_error(),
        "max_error_last_second": tail,
    });
    let json_path = dir.join("esc_demo.json");
    write_json(&json_path, &report)?;
    Ok(CommandOutcome {
        exit_code: 0,
        summary: format!(
            "x(0) = {}, x* = {}: |x - x*| <= {tail:.4} over the last second",
            d.x0, d.x_star
        ),
        files: vec![csv_path, json_path],
    })
}

/// Random piecewise-constant inputs on `ẋ = u, ẏ = x²`: compares the
/// closed-form series output to direct integration and records the
/// smallest output reached. `chenfliess_demo.json`.
pub fn cmd_demo_chenfliess(s: &Scenario) -> Result<CommandOutcome> {
    let d = &s.demo_chenfliess;
    let dir = out_dir(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
    let mut min_y = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    for _ in 0..d.samples {
        let u = random_piecewise_control(&mut rng, d.u_max, d.t_end, d.max_pieces);
        let exact = example2_exact_output(d.x0, d.y0, &u, d.t_end, &d.quadrature)?;
        let ode = example2_integrate(d.x0, d.y0, &u, d.t_end, d.t_end / d.quadrature.intervals.max(1) as f64)?;
        min_y = min_y.min(exact);
        max_err = max_err.max((exact - ode).abs());
    }
    let report = json!({
        "scenario": s,
        "demo": d,
        "min_output": min_y,
        "min_output_minus_y0": min_y - d.y0,
        "max_series_vs_ode": max_err,
    });
    let path = dir.join("chenfliess_demo.json");
    write_json(&path, &report)?;
    Ok(CommandOutcome {
        exit_code: 0,
        summary: format!(
            "{} inputs: min y(T) - y0 = {:.3e}, series vs ODE <= {max_err:.3e}",
            d.samples,
            min_y - d.y0
        ),
        files: vec![path],
    })
}
