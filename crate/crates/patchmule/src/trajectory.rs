//! Time-sampled trajectories and their CSV representation.
//!
//! One trajectory holds the flattened state (see [`StateLayout`]) at each
//! observation time, for a single stochastic run, an ensemble mean or a
//! mean-field integration. The CSV schema is shared by all three so that
//! comparison tooling does not care where a file came from:
//!
//! ```text
//! # key: value            (optional reproducibility header)
//! t,N_0,...,A_0,...,A_0_1,...
//! 0.0000000000000000e0,...
//! ```
//!
//! Values are written with 17 significant digits so that files round-trip
//! `f64` exactly and identical runs produce byte-identical output.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::layout::StateLayout;
use crate::model::{EventInstance, SystemState};

/// A logged event: firing time plus the event and its rate at that moment.
pub type LoggedEvent = (f64, EventInstance);

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    layout: StateLayout,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
    event_log: Option<Vec<LoggedEvent>>,
}

impl Trajectory {
    pub fn new(n_patches: usize) -> Self {
        Self {
            layout: StateLayout::new(n_patches),
            times: Vec::new(),
            rows: Vec::new(),
            event_log: None,
        }
    }

    pub(crate) fn with_event_log(mut self) -> Self {
        self.event_log = Some(Vec::new());
        self
    }

    pub(crate) fn push(&mut self, t: f64, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.layout.width());
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.rows.push(row);
    }

    pub(crate) fn log_event(&mut self, t: f64, event: EventInstance) {
        if let Some(log) = self.event_log.as_mut() {
            log.push((t, event));
        }
    }

    pub fn layout(&self) -> StateLayout {
        self.layout
    }

    pub fn n_patches(&self) -> usize {
        self.layout.n_patches()
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

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn event_log(&self) -> Option<&[LoggedEvent]> {
        self.event_log.as_deref()
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Reconstructs the full state at sample `k`. Only meaningful for
    /// stochastic trajectories, whose population columns are exact integers.
    pub fn snapshot(&self, k: usize) -> Result<SystemState> {
        SystemState::from_row(self.times[k], &self.rows[k])
    }

    /// Writes the trajectory as CSV. `meta` lines are emitted first as
    /// `# key: value` comments (reproducibility header).
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &[(String, String)]) -> Result<()> {
        for (key, value) in meta {
            writeln!(w, "# {key}: {value}")?;
        }
        writeln!(w, "{}", self.layout.csv_header())?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            write!(w, "{t:.16e}")?;
            for v in row {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads a trajectory written by [`Trajectory::write_csv`]. Comment
    /// lines are skipped; the patch count is inferred from the header.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (header_line, header) = loop {
            match lines.next() {
                Some((idx, line)) => {
                    let line = line?;
                    if !line.starts_with('#') && !line.trim().is_empty() {
                        break (idx + 1, line);
                    }
                }
                None => {
                    return Err(Error::TrajectoryFormat {
                        line: 0,
                        msg: "file has no header".into(),
                    })
                }
            }
        };
        let n = header.split(',').filter(|c| c.starts_with("N_")).count();
        if n == 0 {
            return Err(Error::TrajectoryFormat {
                line: header_line,
                msg: "header has no population columns".into(),
            });
        }
        let layout = StateLayout::new(n);
        if header != layout.csv_header() {
            return Err(Error::TrajectoryFormat {
                line: header_line,
                msg: format!("header does not match the {n}-patch schema"),
            });
        }
        let mut trajectory = Trajectory::new(n);
        for (idx, line) in lines {
            let line = line?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut values = Vec::with_capacity(1 + layout.width());
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| Error::TrajectoryFormat {
                    line: idx + 1,
                    msg: format!("cannot parse value {field:?}"),
                })?;
                values.push(v);
            }
            if values.len() != 1 + layout.width() {
                return Err(Error::TrajectoryFormat {
                    line: idx + 1,
                    msg: format!(
                        "expected {} columns, found {}",
                        1 + layout.width(),
                        values.len()
                    ),
                });
            }
            let t = values.remove(0);
            if trajectory.times.last().is_some_and(|&last| t <= last) {
                return Err(Error::TrajectoryFormat {
                    line: idx + 1,
                    msg: "sample times must be strictly increasing".into(),
                });
            }
            trajectory.push(t, values);
        }
        Ok(trajectory)
    }
}

/// Uniform observation grid over `[0, horizon]` with the given step. The
/// first point is exactly 0 and the last exactly `horizon`.
pub fn uniform_grid(horizon: f64, step: f64) -> Result<Vec<f64>> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sample step must be positive, got {step}"
        )));
    }
    let mut grid = Vec::new();
    let mut k: u64 = 0;
    loop {
        let t = k as f64 * step;
        if t > horizon * (1.0 + 1e-12) {
            break;
        }
        grid.push(t.min(horizon));
        k += 1;
    }
    let last = *grid.last().expect("grid contains at least t = 0");
    if last < horizon {
        grid.push(horizon);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spans_zero_to_horizon_exactly() {
        let grid = uniform_grid(90.0, 0.1).unwrap();
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 90.0);
        assert_eq!(grid.len(), 901);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_handles_step_larger_than_horizon() {
        let grid = uniform_grid(0.05, 0.1).unwrap();
        assert_eq!(grid, vec![0.0, 0.05]);
    }

    #[test]
    fn grid_with_exact_multiple_has_no_duplicate_endpoint() {
        let grid = uniform_grid(10.0, 2.5).unwrap();
        assert_eq!(grid, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(uniform_grid(0.0, 0.1).is_err());
        assert!(uniform_grid(1.0, 0.0).is_err());
        assert!(uniform_grid(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Trajectory::new(2);
        t.push(0.0, vec![1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        t.push(
            0.1,
            vec![1.0, 2.0, 0.1, 0.1 + 1e-16, 1.0 / 3.0, 2.0 / 7.0],
        );
        let mut buf = Vec::new();
        t.write_csv(&mut buf, &[("seed".into(), "7".into())])
            .unwrap();
        let back = Trajectory::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.times(), t.times());
        assert_eq!(back.rows(), t.rows());
    }

    #[test]
    fn csv_rejects_column_mismatch() {
        let data = "t,N_0,A_0\n0.0,1.0\n";
        let err = Trajectory::read_csv(data.as_bytes());
        assert!(matches!(err, Err(Error::TrajectoryFormat { line: 2, .. })));
    }

    #[test]
    fn csv_rejects_unknown_header() {
        let data = "time,x,y\n0.0,1.0,2.0\n";
        assert!(Trajectory::read_csv(data.as_bytes()).is_err());
    }
}
