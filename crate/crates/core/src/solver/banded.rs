//! Symmetric positive-definite band matrices and their Cholesky factors.

use super::SolverError;

/// Lower band of a symmetric matrix: `band[i * (kd + 1) + k] = A[i][i - k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSpd {
    n: usize,
    kd: usize,
    band: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, kd: usize) -> Self {
        Self {
            n,
            kd,
            band: vec![0.0; n * (kd + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    pub fn clear(&mut self) {
        self.band.iter_mut().for_each(|x| *x = 0.0);
    }

    /// Adds `value` to `A[i][j]` for `j <= i`; entries above the diagonal are
    /// implied by symmetry and ignored.
    pub fn add_lower(&mut self, i: usize, j: usize, value: f64) {
        if j > i {
            return;
        }
        let k = i - j;
        assert!(k <= self.kd, "entry ({i}, {j}) outside the band");
        self.band[i * (self.kd + 1) + k] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.kd {
            0.0
        } else {
            self.band[i * (self.kd + 1) + k]
        }
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kd);
            let hi = (i + self.kd).min(self.n - 1);
            y[i] = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
    }

    pub fn factor(&self) -> Result<BandedCholesky, SolverError> {
        let (n, kd) = (self.n, self.kd);
        let w = kd + 1;
        let mut l = self.band.clone();
        for j in 0..n {
            let lo = j.saturating_sub(kd);
            let mut diag = l[j * w];
            for k in lo..j {
                let ljk = l[j * w + (j - k)];
                diag -= ljk * ljk;
            }
            if !(diag > 0.0 && diag.is_finite()) {
                return Err(SolverError::Singular { row: j, pivot: diag });
            }
            let ljj = diag.sqrt();
            l[j * w] = ljj;
            for i in j + 1..=(j + kd).min(n - 1) {
                let mut s = l[i * w + (i - j)];
                for k in i.saturating_sub(kd)..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                l[i * w + (i - j)] = s / ljj;
            }
        }
        Ok(BandedCholesky { n, kd, l })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky {
    n: usize,
    kd: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kd) = (self.n, self.kd);
        let w = kd + 1;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(kd)..i {
                s -= self.l[i * w + (i - k)] * b[k];
            }
            b[i] = s / self.l[i * w];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..=(i + kd).min(n - 1) {
                s -= self.l[k * w + (k - i)] * b[k];
            }
            b[i] = s / self.l[i * w];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_spd(n: usize, kd: usize, seed: &[f64]) -> BandedSpd {
        let mut a = BandedSpd::zeros(n, kd);
        let mut it = seed.iter().cycle();
        for i in 0..n {
            for j in i.saturating_sub(kd)..i {
                a.add_lower(i, j, *it.next().unwrap());
            }
        }
        // Diagonal dominance makes the matrix SPD.
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
            a.add_lower(i, i, off + 1.0);
        }
        a
    }

    #[test]
    fn rejects_indefinite() {
        let mut a = BandedSpd::zeros(2, 1);
        a.add_lower(0, 0, 1.0);
        a.add_lower(1, 0, 2.0);
        a.add_lower(1, 1, 1.0);
        assert!(matches!(a.factor(), Err(SolverError::Singular { row: 1, .. })));
    }

    proptest! {
        #[test]
        fn solve_recovers_rhs(
            n in 1usize..40,
            kd in 0usize..5,
            seed in prop::collection::vec(-1.0..1.0f64, 1..50),
            x in prop::collection::vec(-10.0..10.0f64, 40),
        ) {
            let a = random_spd(n, kd, &seed);
            let x = &x[..n];
            let mut b = vec![0.0; n];
            a.mul_vec(x, &mut b);
            a.factor().unwrap().solve_in_place(&mut b);
            for (got, want) in b.iter().zip(x) {
                prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
            }
        }
    }
}
