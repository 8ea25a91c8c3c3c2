//! Time-indexed storage of divergence-free snapshots plus the snapshot
//! schedule (uniform head on `[0, head_end]`, geometric tail `2^{k/q}`).

use crate::field::VelocityField;
use crate::grid::Grid;
use crate::{AnsError, Result};
use std::sync::Arc;

/// Uniform-head / geometric-tail snapshot schedule.
///
/// Early times control the quadrature error of the Duhamel reconstruction
/// and get uniform spacing `head_dt`; late times need only logarithmic
/// density and follow `2^{k/q}` up to `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotSchedule {
    pub head_dt: f64,
    pub head_end: f64,
    /// Geometric points per octave (`q` in `2^{k/q}`).
    pub tail_per_octave: u32,
    pub t_end: f64,
}

impl SnapshotSchedule {
    pub fn new(head_dt: f64, t_end: f64) -> Result<Self> {
        Self::with_shape(head_dt, 1.0, 4, t_end)
    }

    pub fn with_shape(head_dt: f64, head_end: f64, tail_per_octave: u32, t_end: f64) -> Result<Self> {
        if !(head_dt > 0.0) || !(head_end > 0.0) || tail_per_octave == 0 {
            return Err(AnsError::InvalidSolverConfig(format!(
                "bad schedule shape: head_dt={head_dt}, head_end={head_end}, q={tail_per_octave}"
            )));
        }
        if t_end < head_end {
            return Err(AnsError::InvalidSolverConfig(format!(
                "t_end = {t_end} shorter than the uniform head [0, {head_end}]"
            )));
        }
        Ok(SnapshotSchedule {
            head_dt,
            head_end,
            tail_per_octave,
            t_end,
        })
    }

    /// Schedule with twice the density everywhere.
    pub fn refined(&self) -> Self {
        SnapshotSchedule {
            head_dt: self.head_dt / 2.0,
            head_end: self.head_end,
            tail_per_octave: self.tail_per_octave * 2,
            t_end: self.t_end,
        }
    }

    /// The snapshot times: `0, head_dt, …, head_end`, then `2^{k/q}`
    /// clipped to `t_end` (always included).
    pub fn times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let n_head = (self.head_end / self.head_dt).round().max(1.0) as usize;
        for i in 0..=n_head {
            out.push(i as f64 * self.head_end / n_head as f64);
        }
        let q = self.tail_per_octave as f64;
        let mut k = 1u32;
        loop {
            let t = 2f64.powf(k as f64 / q) * self.head_end;
            if t >= self.t_end * (1.0 - 1e-12) {
                break;
            }
            if t > self.head_end * (1.0 + 1e-12) {
                out.push(t);
            }
            k += 1;
        }
        if (out.last().copied().unwrap_or(0.0) - self.t_end).abs() > 1e-12 * self.t_end {
            out.push(self.t_end);
        }
        out
    }
}

/// Ordered divergence-free snapshots sharing one grid. The first snapshot
/// is the initial data at `t = 0`.
#[derive(Debug)]
pub struct SnapshotStore {
    grid: Arc<Grid>,
    times: Vec<f64>,
    snapshots: Vec<VelocityField>,
    schedule: Option<SnapshotSchedule>,
}

impl SnapshotStore {
    pub fn new(grid: Arc<Grid>, schedule: Option<SnapshotSchedule>) -> Self {
        SnapshotStore {
            grid,
            times: Vec::new(),
            snapshots: Vec::new(),
            schedule,
        }
    }

    pub fn push(&mut self, t: f64, field: VelocityField) -> Result<()> {
        if !field.grid().same_grid(&self.grid) {
            return Err(AnsError::GridMismatch);
        }
        if self.times.is_empty() {
            if t != 0.0 {
                return Err(AnsError::InvalidSolverConfig(format!(
                    "first snapshot must be the initial data at t = 0, got {t}"
                )));
            }
        } else if t <= *self.times.last().unwrap() {
            return Err(AnsError::InvalidSolverConfig(format!(
                "snapshot times must increase strictly, got {t} after {}",
                self.times.last().unwrap()
            )));
        }
        self.times.push(t);
        self.snapshots.push(field);
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshot(&self, i: usize) -> &VelocityField {
        &self.snapshots[i]
    }

    pub fn schedule(&self) -> Option<&SnapshotSchedule> {
        self.schedule.as_ref()
    }

    /// Index of an exact snapshot time (relative tolerance `1e−9`).
    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(AnsError::OffScheduleTime { t })
    }
}
