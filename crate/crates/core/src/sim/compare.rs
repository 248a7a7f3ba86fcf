//! Comparison of a simulated trajectory against a reference, e.g. the
//! output of an optimal-control solver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::dynamics::BirdWindParams;
use crate::error::{Result, SoaringError};

/// Reference time history. Roll angle is optional because trajectories from
/// the two-input model carry it as a control rather than a state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReferenceTrajectory {
    pub times: Vec<f64>,
    /// Rows of `[x, y, z, V, gamma, psi]`.
    pub states: Vec<[f64; 6]>,
    pub phi: Option<Vec<f64>>,
}

pub const REFERENCE_COLUMNS: [&str; 6] = ["x", "y", "z", "V", "gamma", "psi"];

impl ReferenceTrajectory {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self {
            times: traj.times.clone(),
            states: traj
                .states
                .iter()
                .map(|s| [s.x, s.y, s.z, s.v, s.gamma, s.psi])
                .collect(),
            phi: Some(traj.states.iter().map(|s| s.phi).collect()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.len() != self.times.len()
            || self.phi.as_ref().is_some_and(|p| p.len() != self.times.len())
        {
            return Err(SoaringError::InvalidTrajectory(
                "reference columns have different lengths".into(),
            ));
        }
        if self.times.len() < 2 {
            return Err(SoaringError::InvalidTrajectory(
                "reference has fewer than two samples".into(),
            ));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SoaringError::InvalidTrajectory(
                "reference times not strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Linear interpolation of column `j` (0..6 states, 6 = phi) at `t`,
    /// which must lie inside the time range.
    fn sample(&self, j: usize, t: f64) -> f64 {
        let value = |i: usize| {
            if j < 6 {
                self.states[i][j]
            } else {
                self.phi.as_ref().expect("phi column")[i]
            }
        };
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return value(0);
        }
        if k >= self.times.len() {
            return value(self.times.len() - 1);
        }
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        let w = (t - ta) / (tb - ta);
        value(k - 1) * (1.0 - w) + value(k) * w
    }

    fn total_energy(&self, i: usize, p: &BirdWindParams) -> f64 {
        let s = &self.states[i];
        p.mass * p.g * (s[2] + s[3] * s[3] / (2.0 * p.g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Root-mean-square difference per state over the overlap.
    pub rmse: BTreeMap<String, f64>,
    /// Relative total-energy drift of the simulated trajectory over its span.
    pub energy_drift_trajectory: f64,
    /// Relative total-energy drift of the reference over its span.
    pub energy_drift_reference: f64,
    /// Length of the common time range, s.
    pub overlap: f64,
    pub samples: usize,
}

fn drift(first: f64, last: f64) -> f64 {
    (last - first).abs() / first.abs()
}

/// Resamples `reference` onto the simulated times that fall in the common
/// range and reports per-state RMSE.
pub fn compare_trajectories(
    traj: &Trajectory,
    reference: &ReferenceTrajectory,
    p: &BirdWindParams,
) -> Result<ComparisonReport> {
    traj.validate()?;
    reference.validate()?;
    let lo = traj.times[0].max(reference.times[0]);
    let hi = traj.times[traj.len() - 1].min(reference.times[reference.times.len() - 1]);
    let idx: Vec<usize> = (0..traj.len())
        .filter(|&i| traj.times[i] >= lo && traj.times[i] <= hi)
        .collect();
    if hi <= lo || idx.is_empty() {
        return Err(SoaringError::EmptyOverlap);
    }

    let ncols = if reference.phi.is_some() { 7 } else { 6 };
    let mut sums = [0.0; 7];
    for &i in &idx {
        let a = traj.states[i].to_array();
        for (j, sum) in sums.iter_mut().enumerate().take(ncols) {
            let d = a[j] - reference.sample(j, traj.times[i]);
            *sum += d * d;
        }
    }
    let names = ["x", "y", "z", "V", "gamma", "psi", "phi"];
    let rmse = names
        .iter()
        .zip(sums)
        .take(ncols)
        .map(|(n, s)| (n.to_string(), (s / idx.len() as f64).sqrt()))
        .collect();

    let nr = reference.times.len();
    Ok(ComparisonReport {
        rmse,
        energy_drift_trajectory: drift(traj.total_energy[0], traj.total_energy[traj.len() - 1]),
        energy_drift_reference: drift(
            reference.total_energy(0, p),
            reference.total_energy(nr - 1, p),
        ),
        overlap: hi - lo,
        samples: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::WindCouplingSign;
    use crate::esc::ZeroRoll;
    use crate::sim::simulate;

    fn run() -> Trajectory {
        simulate(
            &Default::default(),
            &BirdWindParams::default(),
            WindCouplingSign::Positive,
            &ZeroRoll,
            1.0,
            1e-2,
        )
        .unwrap()
        .trajectory
    }

    #[test]
    fn self_comparison_is_zero() {
        let tr = run();
        let r = compare_trajectories(&tr, &ReferenceTrajectory::from_trajectory(&tr), &BirdWindParams::default())
            .unwrap();
        assert_eq!(r.rmse.len(), 7);
        assert!(r.rmse.values().all(|&v| v == 0.0));
        assert_eq!(r.energy_drift_trajectory, r.energy_drift_reference);
        assert!((r.overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn altitude_offset_shows_only_in_z() {
        let tr = run();
        let mut reference = ReferenceTrajectory::from_trajectory(&tr);
        reference.phi = None;
        for s in &mut reference.states {
            s[2] += 1.0;
        }
        let r = compare_trajectories(&tr, &reference, &BirdWindParams::default()).unwrap();
        assert_eq!(r.rmse.len(), 6);
        for (k, v) in &r.rmse {
            if k == "z" {
                assert!((v - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(*v, 0.0, "{k}");
            }
        }
    }

    #[test]
    fn interpolates_coarse_reference() {
        let tr = run();
        // straight line in x, sampled only at the ends
        let reference = ReferenceTrajectory {
            times: vec![-1.0, 3.0],
            states: vec![[0.0; 6], [4.0, 0.0, 0.0, 0.0, 0.0, 0.0]],
            phi: None,
        };
        let r = compare_trajectories(&tr, &reference, &BirdWindParams::default()).unwrap();
        let expected = (tr
            .times
            .iter()
            .zip(&tr.states)
            .map(|(t, s)| (s.x - (t + 1.0)).powi(2))
            .sum::<f64>()
            / tr.len() as f64)
            .sqrt();
        assert!((r.rmse["x"] - expected).abs() < 1e-12);
    }

    #[test]
    fn disjoint_ranges_error() {
        let tr = run();
        let mut reference = ReferenceTrajectory::from_trajectory(&tr);
        for t in &mut reference.times {
            *t += 10.0;
        }
        assert!(matches!(
            compare_trajectories(&tr, &reference, &BirdWindParams::default()),
            Err(SoaringError::EmptyOverlap)
        ));
    }
}
