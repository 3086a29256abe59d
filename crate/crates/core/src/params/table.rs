use serde::{Deserialize, Serialize};

use super::ParamsError;

/// A user-supplied time series `(t_i, f_i)`.
///
/// Values are interpolated linearly. Derivatives come from the three-point
/// second-order stencil on the (possibly non-uniform) nodes: centred in the
/// interior, one-sided at both ends. The second derivative reapplies the same
/// stencil to the nodal slopes. Outside `[t_0, t_last]` the profile is held
/// constant and both derivatives are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableData", into = "TableData")]
pub struct Table {
    times: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableData {
    pub times_s: Vec<f64>,
    pub values: Vec<f64>,
}

impl TryFrom<TableData> for Table {
    type Error = ParamsError;

    fn try_from(data: TableData) -> Result<Self, Self::Error> {
        Table::new(data.times_s, data.values)
    }
}

impl From<Table> for TableData {
    fn from(table: Table) -> Self {
        TableData {
            times_s: table.times,
            values: table.values,
        }
    }
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, ParamsError> {
        if times.len() != values.len() {
            return Err(ParamsError::Table(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 3 {
            return Err(ParamsError::Table(
                "at least 3 nodes are needed for the derivative stencil".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(ParamsError::Table("non-finite time stamp".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ParamsError::Table("time stamps must be strictly increasing".into()));
        }
        let slopes = stencil_derivative(&times, &values);
        let curvatures = stencil_derivative(&times, &slopes);
        Ok(Self {
            times,
            values,
            slopes,
            curvatures,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn value(&self, t: f64) -> f64 {
        self.interpolate(&self.values, t, true)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.interpolate(&self.slopes, t, false)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        self.interpolate(&self.curvatures, t, false)
    }

    fn interpolate(&self, nodal: &[f64], t: f64, hold: bool) -> f64 {
        let last = self.times.len() - 1;
        if t < self.times[0] {
            return if hold { nodal[0] } else { 0.0 };
        }
        if t > self.times[last] {
            return if hold { nodal[last] } else { 0.0 };
        }
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k => (k - 1).min(last - 1),
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let theta = (t - t0) / (t1 - t0);
        nodal[k] + theta * (nodal[k + 1] - nodal[k])
    }
}

fn stencil_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = t[i] - t[i - 1];
        let h2 = t[i + 1] - t[i];
        out[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1]
            + (h2 - h1) / (h1 * h2) * f[i]
            + h1 / (h2 * (h1 + h2)) * f[i + 1];
    }
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    out[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1]
        - h1 / (h2 * (h1 + h2)) * f[2];
    let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
    out[n - 1] = (2.0 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1]
        - (h1 + h2) / (h1 * h2) * f[n - 2]
        + h2 / (h1 * (h1 + h2)) * f[n - 3];
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_exact_on_quadratics() {
        let times = vec![0.0, 0.3, 0.5, 1.1, 1.2, 2.0];
        let values: Vec<f64> = times.iter().map(|t| 1.0 + 2.0 * t - 0.5 * t * t).collect();
        let table = Table::new(times.clone(), values).unwrap();
        for (t, s) in times.iter().zip(table.slopes()) {
            assert!((s - (2.0 - t)).abs() < 1e-12, "slope at {t}: {s}");
        }
        assert!((table.second_derivative(0.7) + 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_order_convergence_on_sine() {
        let err = |n: usize| {
            let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let values: Vec<f64> = times.iter().map(|t| t.sin()).collect();
            let table = Table::new(times.clone(), values).unwrap();
            times
                .iter()
                .zip(table.slopes())
                .map(|(t, s)| (s - t.cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(21) / err(41)).log2();
        assert!(order > 1.8 && order < 2.3, "order {order}");
    }

    #[test]
    fn holds_outside_range() {
        let table = Table::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(table.value(-1.0), 1.0);
        assert_eq!(table.value(5.0), 4.0);
        assert_eq!(table.derivative(5.0), 0.0);
        assert_eq!(table.value(1.5), 3.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Table::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(Table::new(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(Table::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0]).is_err());
    }
}
