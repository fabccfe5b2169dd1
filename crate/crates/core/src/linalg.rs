//! Banded direct solvers: Cholesky for symmetric positive definite systems
//! and LU with partial pivoting for symmetric indefinite ones.

use crate::error::{Error, Result};

/// Square matrix with half-bandwidth `bw`, stored by rows over the columns
/// `i − bw ..= i + 2·bw` (the extra `bw` columns hold LU fill-in).
#[derive(Debug, Clone, PartialEq)]
pub struct Banded {
    n: usize,
    bw: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let width = 3 * bw + 1;
        Self { n, bw, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.bw >= i && j <= i + 2 * self.bw, "({i}, {j}) outside band");
        i * self.width + (j + self.bw - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.bw < i || j > i + self.bw {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.add(i, i, v);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.bw);
                let hi = (i + self.bw).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Cholesky factorization of the (assumed symmetric) band, reading the
    /// lower triangle. Fails if the matrix is not positive definite.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let li = |i: usize, j: usize| i * w + (j + bw - i);
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut s = self.get(j, j);
            for k in k0..j {
                s -= l[li(j, k)] * l[li(j, k)];
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::NumericalFailure(format!("matrix not positive definite at row {j}")));
            }
            let d = s.sqrt();
            l[li(j, j)] = d;
            for i in j + 1..(j + bw + 1).min(n) {
                let k0 = i.saturating_sub(bw);
                let mut s = self.get(i, j);
                for k in k0..j {
                    s -= l[li(i, k)] * l[li(j, k)];
                }
                l[li(i, j)] = s / d;
            }
        }
        Ok(Cholesky { n, bw, l })
    }

    /// Solves `A x = b` by banded LU with partial pivoting.
    pub fn lu_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.lu_solve_many(&[b])?.pop().expect("one right-hand side"))
    }

    /// Solves `A x = b` for several right-hand sides with one factorization.
    pub fn lu_solve_many(&self, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let (n, bw) = (self.n, self.bw);
        let mut a = self.clone();
        let mut xs: Vec<Vec<f64>> = rhs.iter().map(|b| b.to_vec()).collect();
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let last_row = (i + bw).min(n - 1);
            let last_col = (i + 2 * bw).min(n - 1);
            let mut p = i;
            let mut best = a.data[a.idx(i, i)].abs();
            for r in i + 1..=last_row {
                let v = a.data[a.idx(r, i)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 1e-300_f64.max(1e-15 * scale)) {
                return Err(Error::NumericalFailure(format!("singular matrix at pivot {i}")));
            }
            if p != i {
                for c in i..=last_col {
                    let (ki, kp) = (a.idx(i, c), a.idx(p, c));
                    a.data.swap(ki, kp);
                }
                for x in xs.iter_mut() {
                    x.swap(i, p);
                }
            }
            let piv = a.data[a.idx(i, i)];
            for r in i + 1..=last_row {
                let kr = a.idx(r, i);
                let m = a.data[kr] / piv;
                if m == 0.0 {
                    continue;
                }
                a.data[kr] = 0.0;
                for c in i + 1..=last_col {
                    let v = a.data[a.idx(i, c)];
                    let k = a.idx(r, c);
                    a.data[k] -= m * v;
                }
                for x in xs.iter_mut() {
                    x[r] -= m * x[i];
                }
            }
        }
        for x in xs.iter_mut() {
            for i in (0..n).rev() {
                let last_col = (i + 2 * bw).min(n - 1);
                let mut s = x[i];
                for c in i + 1..=last_col {
                    s -= a.data[a.idx(i, c)] * x[c];
                }
                x[i] = s / a.data[a.idx(i, i)];
            }
        }
        Ok(xs)
    }
}

/// Lower-triangular banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl Cholesky {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + (j + self.bw - i)]
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        y
    }
}
