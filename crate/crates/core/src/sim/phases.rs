//! Segmentation of a trajectory into the four dynamic-soaring phases.
//!
//! Altitude extrema that stand out by at least `prominence` mark the turns:
//! a maximum is the high-altitude turn and a minimum the low-altitude turn,
//! each covering `±turn_window` around the extremum (clipped halfway to the
//! neighbouring extremum). What lies between is climb or descent.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Result, SoaringError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDetectionParams {
    /// Minimum altitude swing for an extremum to count, m.
    pub prominence: f64,
    /// Half-width of a turn window around an extremum, s.
    pub turn_window: f64,
}

impl Default for PhaseDetectionParams {
    fn default() -> Self {
        Self {
            prominence: 0.5,
            turn_window: 0.5,
        }
    }
}

impl PhaseDetectionParams {
    pub fn validate(&self) -> Result<()> {
        if !self.prominence.is_finite() || self.prominence <= 0.0 {
            return Err(SoaringError::invalid("prominence", "must be finite and > 0"));
        }
        if !self.turn_window.is_finite() || self.turn_window < 0.0 {
            return Err(SoaringError::invalid("turn_window", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    WindwardClimb,
    HighTurn,
    LeewardDescent,
    LowTurn,
}

impl Phase {
    pub const CYCLE: [Phase; 4] = [
        Phase::WindwardClimb,
        Phase::HighTurn,
        Phase::LeewardDescent,
        Phase::LowTurn,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSegment {
    pub label: Phase,
    pub t_start: f64,
    pub t_end: f64,
    /// `ψ(t_end) - ψ(t_start)`, rad.
    pub heading_change: f64,
    /// Mean `|φ̇|` over the samples of the segment, rad/s.
    pub mean_abs_roll_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStatus {
    Complete,
    IncompleteCycle,
}

/// First complete climb, high turn, descent, low turn sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleWindow {
    pub t_start: f64,
    pub t_end: f64,
    /// `|E(t_end) - E(t_start)| / |E(t_start)|`.
    pub energy_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub t: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSegmentation {
    pub segments: Vec<PhaseSegment>,
    pub extrema: Vec<Extremum>,
    pub full_cycle: bool,
    pub status: CycleStatus,
    pub cycle: Option<CycleWindow>,
}

impl PhaseSegmentation {
    pub fn labels(&self) -> Vec<Phase> {
        self.segments.iter().map(|s| s.label).collect()
    }
}

/// Indices of prominent altitude extrema (zigzag with hysteresis). The
/// first and last samples are never reported, and a trailing candidate that
/// has not yet been confirmed by a reversal is dropped.
fn prominent_extrema(z: &[f64], prominence: f64) -> Vec<(usize, ExtremumKind)> {
    #[derive(PartialEq)]
    enum Dir {
        Unknown,
        Up,
        Down,
    }
    let mut out = Vec::new();
    if z.is_empty() {
        return out;
    }
    let mut dir = Dir::Unknown;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut cand = 0usize;
    for (i, &zi) in z.iter().enumerate().skip(1) {
        match dir {
            Dir::Unknown => {
                if zi < z[lo] {
                    lo = i;
                }
                if zi > z[hi] {
                    hi = i;
                }
                if zi >= z[lo] + prominence {
                    dir = Dir::Up;
                    cand = i;
                } else if zi <= z[hi] - prominence {
                    dir = Dir::Down;
                    cand = i;
                }
            }
            Dir::Up => {
                if zi > z[cand] {
                    cand = i;
                } else if zi <= z[cand] - prominence {
                    out.push((cand, ExtremumKind::Max));
                    dir = Dir::Down;
                    cand = i;
                }
            }
            Dir::Down => {
                if zi < z[cand] {
                    cand = i;
                } else if zi >= z[cand] + prominence {
                    out.push((cand, ExtremumKind::Min));
                    dir = Dir::Up;
                    cand = i;
                }
            }
        }
    }
    out
}

fn segment(traj: &Trajectory, label: Phase, t_start: f64, t_end: f64) -> PhaseSegment {
    let i0 = traj.index_near(t_start);
    let i1 = traj.index_near(t_end);
    let (sum, n) = traj
        .times
        .iter()
        .zip(&traj.controls)
        .filter(|(t, _)| **t >= t_start && **t <= t_end)
        .fold((0.0, 0usize), |(s, n), (_, u)| (s + u.abs(), n + 1));
    PhaseSegment {
        label,
        t_start,
        t_end,
        heading_change: traj.states[i1].psi - traj.states[i0].psi,
        mean_abs_roll_rate: if n > 0 { sum / n as f64 } else { 0.0 },
    }
}

/// Splits `traj` into labelled phases and looks for a complete cycle.
pub fn detect_phases(traj: &Trajectory, params: &PhaseDetectionParams) -> Result<PhaseSegmentation> {
    params.validate()?;
    traj.validate()?;
    let z: Vec<f64> = traj.states.iter().map(|s| s.z).collect();
    let t = &traj.times;
    let (t0, tn) = (t[0], t[t.len() - 1]);
    let ext = prominent_extrema(&z, params.prominence);

    let mut segments = Vec::new();
    if ext.is_empty() {
        let label = if z[z.len() - 1] >= z[0] {
            Phase::WindwardClimb
        } else {
            Phase::LeewardDescent
        };
        segments.push(segment(traj, label, t0, tn));
    } else {
        let mut cursor = t0;
        for (k, &(idx, kind)) in ext.iter().enumerate() {
            let te = t[idx];
            let left = if k == 0 { t0 } else { 0.5 * (t[ext[k - 1].0] + te) };
            let right = if k + 1 == ext.len() { tn } else { 0.5 * (te + t[ext[k + 1].0]) };
            let lo = (te - params.turn_window).max(left).max(cursor);
            let hi = (te + params.turn_window).min(right);
            let (approach, turn) = match kind {
                ExtremumKind::Max => (Phase::WindwardClimb, Phase::HighTurn),
                ExtremumKind::Min => (Phase::LeewardDescent, Phase::LowTurn),
            };
            if lo > cursor {
                segments.push(segment(traj, approach, cursor, lo));
            }
            segments.push(segment(traj, turn, lo, hi));
            cursor = hi;
        }
        if cursor < tn {
            let label = match ext[ext.len() - 1].1 {
                ExtremumKind::Max => Phase::LeewardDescent,
                ExtremumKind::Min => Phase::WindwardClimb,
            };
            segments.push(segment(traj, label, cursor, tn));
        }
    }

    let cycle = segments
        .windows(4)
        .find(|w| w.iter().map(|s| s.label).eq(Phase::CYCLE))
        .map(|w| {
            let (ts, te) = (w[0].t_start, w[3].t_end);
            let e0 = traj.total_energy[traj.index_near(ts)];
            let e1 = traj.total_energy[traj.index_near(te)];
            CycleWindow {
                t_start: ts,
                t_end: te,
                energy_drift: (e1 - e0).abs() / e0.abs(),
            }
        });

    Ok(PhaseSegmentation {
        extrema: ext
            .iter()
            .map(|&(i, kind)| Extremum { kind, t: t[i], z: z[i] })
            .collect(),
        full_cycle: cycle.is_some(),
        status: if cycle.is_some() {
            CycleStatus::Complete
        } else {
            CycleStatus::IncompleteCycle
        },
        cycle,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::FlightState;

    fn synthetic(n: usize, t_end: f64, zf: impl Fn(f64) -> f64, psif: impl Fn(f64) -> f64) -> Trajectory {
        let mut tr = Trajectory::default();
        for k in 0..=n {
            let t = t_end * k as f64 / n as f64;
            let s = FlightState {
                z: zf(t),
                psi: psif(t),
                ..FlightState::default()
            };
            tr.times.push(t);
            tr.states.push(s);
            tr.controls.push(0.0);
            tr.objective.push(0.0);
            tr.specific_energy.push(s.z);
            tr.total_energy.push(100.0 + s.z);
        }
        tr
    }

    #[test]
    fn monotone_climb_is_one_segment() {
        let tr = synthetic(200, 4.0, |t| 2.0 * t, |_| 0.0);
        let seg = detect_phases(&tr, &PhaseDetectionParams::default()).unwrap();
        assert_eq!(seg.labels(), vec![Phase::WindwardClimb]);
        assert!(!seg.full_cycle);
        assert_eq!(seg.status, CycleStatus::IncompleteCycle);
    }

    #[test]
    fn sine_altitude_gives_canonical_cycle() {
        use std::f64::consts::PI;
        // heading advances by π over each turn, centred on the extrema
        let psi = |t: f64| t - (2.0 * t).sin() / 2.0;
        let tr = synthetic(4000, 2.0 * PI + 1.0, f64::sin, psi);
        let seg = detect_phases(&tr, &PhaseDetectionParams::default()).unwrap();
        assert_eq!(
            seg.labels(),
            vec![
                Phase::WindwardClimb,
                Phase::HighTurn,
                Phase::LeewardDescent,
                Phase::LowTurn,
                Phase::WindwardClimb,
            ]
        );
        assert!(seg.full_cycle);
        let c = seg.cycle.unwrap();
        assert_eq!(c.t_start, 0.0);
        assert!((c.t_end - (1.5 * PI + 0.5)).abs() < 2e-3);
        let high = &seg.segments[1];
        assert!((high.t_start - (0.5 * PI - 0.5)).abs() < 2e-3);
        assert!((high.t_end - (0.5 * PI + 0.5)).abs() < 2e-3);
        assert!(seg.extrema.len() == 2);
        // the turn windows carry most of the heading change
        assert!(high.heading_change > seg.segments[0].heading_change);
    }

    #[test]
    fn small_wiggles_are_ignored() {
        let tr = synthetic(1000, 10.0, |t| t + 0.2 * (5.0 * t).sin(), |_| 0.0);
        let seg = detect_phases(&tr, &PhaseDetectionParams::default()).unwrap();
        assert!(seg.extrema.is_empty());
    }

    #[test]
    fn cycle_energy_drift() {
        use std::f64::consts::PI;
        let tr = synthetic(2000, 2.0 * PI, f64::sin, |_| 0.0);
        let seg = detect_phases(&tr, &PhaseDetectionParams::default()).unwrap();
        let c = seg.cycle.unwrap();
        let expected = ((100.0 + c.t_end.sin()) - 100.0).abs() / 100.0;
        assert!((c.energy_drift - expected).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_params() {
        let p = PhaseDetectionParams {
            prominence: 0.0,
            turn_window: 0.5,
        };
        assert!(p.validate().is_err());
    }
}
