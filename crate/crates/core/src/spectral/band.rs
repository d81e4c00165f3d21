//! Banded LU without pivoting, sufficient for the diagonally dominant M-matrices
//! produced by the grid Laplacian (and its shifts below the first eigenvalue).

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct BandLu {
    n: usize,
    bl: usize,
    bu: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandLu {
    pub fn zeros(n: usize, bl: usize, bu: usize) -> Self {
        let width = bl + bu + 1;
        BandLu { n, bl, bu, width, data: vec![0.0; n * width] }
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * self.width + c + self.bl - r
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(c + self.bl >= r && c <= r + self.bu);
        let i = self.idx(r, c);
        self.data[i] += v;
    }

    /// In-place factorization `A = LU` with unit lower `L`.
    pub fn factor(&mut self) -> Result<()> {
        let (n, bl, bu, w) = (self.n, self.bl, self.bu, self.width);
        for k in 0..n {
            let pivot = self.data[self.idx(k, k)];
            if !(pivot.abs() > 1e-300) || !pivot.is_finite() {
                return Err(Error::NoConvergence { iterations: k, residual: pivot });
            }
            let jmax = (k + bu).min(n - 1);
            let len = jmax - k;
            let imax = (k + bl).min(n - 1);
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let krow_start = k * w + bl + 1;
            let krow = &head[krow_start..krow_start + len];
            for i in k + 1..=imax {
                let base = (i - k - 1) * w;
                let lpos = base + k + bl - i;
                let l = tail[lpos] / pivot;
                tail[lpos] = l;
                if l == 0.0 {
                    continue;
                }
                let start = base + k + 1 + bl - i;
                for (a, &u) in tail[start..start + len].iter_mut().zip(krow) {
                    *a -= l * u;
                }
            }
        }
        Ok(())
    }

    /// Solve `LU x = b` in place; call after [`BandLu::factor`].
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bl, bu) = (self.n, self.bl, self.bu);
        for i in 0..n {
            let c0 = i.saturating_sub(bl);
            let row = &self.data[self.idx(i, c0)..self.idx(i, i)];
            let s: f64 = row.iter().zip(&b[c0..i]).map(|(l, x)| l * x).sum();
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let c1 = (i + bu).min(n - 1);
            let row = &self.data[self.idx(i, i + 1).min(self.data.len())..][..c1 - i];
            let s: f64 = row.iter().zip(&b[i + 1..=c1]).map(|(u, x)| u * x).sum();
            b[i] = (b[i] - s) / self.data[self.idx(i, i)];
        }
    }
}
