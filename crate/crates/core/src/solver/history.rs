//! Time-stamped record of past velocities `v_t(., s)`.
//!
//! Snapshot `k` sits at `s = k * dt`. The newest snapshot is always the
//! current velocity, so `v_t(t - tau(t))` is read back by linear
//! interpolation without solving the transport form of the delay.

use std::collections::VecDeque;

use super::{Grid, SolverError};
use crate::params::DelayProfile;

/// Relative distance (in steps) under which a query snaps to a snapshot.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    grid: Grid,
    dt: f64,
    span: f64,
    first: i64,
    snapshots: VecDeque<Vec<f64>>,
    /// Trapezoidal `∫ v_t^2 dx` of each snapshot.
    norms: VecDeque<f64>,
}

impl HistoryBuffer {
    /// Empty buffer whose next snapshot gets index `first`.
    pub fn new(grid: Grid, dt: f64, span: f64, first: i64) -> Result<Self, SolverError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SolverError::config("dt", dt, "must be finite and > 0"));
        }
        if !(span.is_finite() && span > 0.0) {
            return Err(SolverError::config("history span", span, "must be finite and > 0"));
        }
        Ok(Self {
            grid,
            dt,
            span,
            first,
            snapshots: VecDeque::new(),
            norms: VecDeque::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    fn time_of(&self, k: i64) -> f64 {
        k as f64 * self.dt
    }

    pub fn oldest_time(&self) -> f64 {
        self.time_of(self.first)
    }

    pub fn newest_index(&self) -> i64 {
        self.first + self.snapshots.len() as i64 - 1
    }

    pub fn newest_time(&self) -> f64 {
        self.time_of(self.newest_index())
    }

    /// Time stamp the next pushed snapshot will receive.
    pub fn next_time(&self) -> f64 {
        self.time_of(self.newest_index() + 1)
    }

    pub fn newest(&self) -> Option<&[f64]> {
        self.snapshots.back().map(|s| s.as_slice())
    }

    /// Replaces the newest snapshot (used to enforce compatibility with the
    /// initial velocity).
    pub fn replace_newest(&mut self, vt: &[f64]) {
        let norm = self.grid.norm2(vt);
        if let Some(last) = self.snapshots.back_mut() {
            last.copy_from_slice(vt);
            *self.norms.back_mut().unwrap() = norm;
        }
    }

    /// Appends the velocity at `next_time()` and drops snapshots older than
    /// `newest - span - dt`.
    pub fn push(&mut self, vt: &[f64]) {
        let norm = self.grid.norm2(vt);
        // Reuse the evicted allocation when possible.
        let keep_from = self.newest_index() + 1 - (self.span / self.dt).ceil() as i64 - 1;
        let mut recycled = None;
        while self.first < keep_from && self.snapshots.len() > 1 {
            recycled = self.snapshots.pop_front();
            self.norms.pop_front();
            self.first += 1;
        }
        let snap = match recycled {
            Some(mut buf) if buf.len() == vt.len() => {
                buf.copy_from_slice(vt);
                buf
            }
            _ => vt.to_vec(),
        };
        self.snapshots.push_back(snap);
        self.norms.push_back(norm);
    }

    /// Locates `t` as `(k, theta)` with `t = (k + theta) dt`, or an exact hit.
    fn locate(&self, t: f64) -> Result<(usize, f64), SolverError> {
        if self.snapshots.is_empty() {
            return Err(SolverError::Underrun {
                query: t,
                oldest: f64::NAN,
            });
        }
        let r = t / self.dt - self.first as f64;
        let last = (self.snapshots.len() - 1) as f64;
        let nearest = r.round();
        if (r - nearest).abs() <= SNAP * r.abs().max(1.0) && nearest >= 0.0 && nearest <= last {
            return Ok((nearest as usize, 0.0));
        }
        if r < 0.0 {
            return Err(SolverError::Underrun {
                query: t,
                oldest: self.oldest_time(),
            });
        }
        if r > last {
            return Err(SolverError::Overrun {
                query: t,
                newest: self.newest_time(),
            });
        }
        let k = r.floor();
        Ok((k as usize, r - k))
    }

    /// Linearly interpolated `v_t(., t)` written into `out`.
    pub fn sample_into(&self, t: f64, out: &mut [f64]) -> Result<(), SolverError> {
        let (k, theta) = self.locate(t)?;
        let a = &self.snapshots[k];
        if theta == 0.0 {
            out.copy_from_slice(a);
        } else {
            let b = &self.snapshots[k + 1];
            for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                *o = x + theta * (y - x);
            }
        }
        Ok(())
    }

    pub fn sample(&self, t: f64) -> Result<Vec<f64>, SolverError> {
        let mut out = vec![0.0; self.grid.n];
        self.sample_into(t, &mut out)?;
        Ok(out)
    }

    /// `∫_{lower}^{t_new} e^{lambda (s - t_new)} ∫ v_t^2(x, s) dx ds` by the
    /// trapezoidal rule on the snapshots, `t_new` being the newest time.
    /// `norm_at_lower` is `∫ v_t^2 dx` of the interpolated velocity at the
    /// lower endpoint, used for the partial first cell.
    pub fn weighted_integral(
        &self,
        lower: f64,
        lambda: f64,
        norm_at_lower: f64,
    ) -> Result<f64, SolverError> {
        let t = self.newest_time();
        if lower >= t {
            return Ok(0.0);
        }
        let (k, theta) = self.locate(lower)?;
        let weight = |j: usize| {
            let s = self.time_of(self.first + j as i64);
            (lambda * (s - t)).exp() * self.norms[j]
        };
        let last = self.snapshots.len() - 1;
        let start = if theta == 0.0 { k } else { k + 1 };
        let mut total = 0.0;
        for j in start..last {
            total += 0.5 * self.dt * (weight(j) + weight(j + 1));
        }
        if theta > 0.0 {
            let cell = self.time_of(self.first + start as i64) - lower;
            let f_lower = (lambda * (lower - t)).exp() * norm_at_lower;
            total += 0.5 * cell * (f_lower + weight(start));
        }
        Ok(total)
    }
}

/// Buffer holding `g0(x, s)` at `s = -k dt` for `k = K, ..., 0`, with
/// `K dt >= span + dt`. The span is the largest delay the profile can take.
pub fn init_history(
    grid: &Grid,
    delay: &DelayProfile,
    mut g0: impl FnMut(f64, f64) -> f64,
    dt: f64,
) -> Result<HistoryBuffer, SolverError> {
    let span = history_span(delay);
    let steps = ((span + dt) / dt).ceil() as i64;
    let mut buffer = HistoryBuffer::new(*grid, dt, span, -steps)?;
    let nodes = grid.nodes();
    let mut snap = vec![0.0; grid.n];
    for k in (0..=steps).rev() {
        let s = -(k as f64) * dt;
        for (out, &x) in snap.iter_mut().zip(&nodes) {
            let value = g0(x, s);
            if !value.is_finite() {
                return Err(SolverError::NonFinite {
                    what: "initial history g0",
                    t: s,
                });
            }
            *out = value;
        }
        buffer.push(&snap);
    }
    Ok(buffer)
}

/// Retained duration: the declared `tau_bar` unless the profile itself can
/// exceed it.
pub(crate) fn history_span(delay: &DelayProfile) -> f64 {
    let (_, natural_max, _) = delay.shape.natural_bounds();
    delay.tau_bar.max(natural_max)
}
