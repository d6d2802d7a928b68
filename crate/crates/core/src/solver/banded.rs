//! Cholesky factorization of symmetric positive definite band matrices.

/// Lower band of a symmetric matrix: entry `(i, j)` with `0 ≤ i - j ≤ p`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    m: usize,
    p: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(m: usize, p: usize) -> Self {
        BandMatrix { m, p, data: vec![0.0; m * (p + 1)] }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.p);
        i * (self.p + 1) + (i - j)
    }

    /// Adds `v` to entry `(i, j)`; either triangle may be addressed.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.p {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// In-place Cholesky factor `L` with `A = L Lᵀ`; `None` if not positive definite.
    pub fn cholesky(mut self) -> Option<BandCholesky> {
        let p = self.p;
        for i in 0..self.m {
            let lo = i.saturating_sub(p);
            for j in lo..=i {
                let mut s = self.data[self.idx(i, j)];
                for k in lo.max(j.saturating_sub(p))..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return None;
                    }
                    let k = self.idx(i, i);
                    self.data[k] = s.sqrt();
                } else {
                    let d = self.data[self.idx(j, j)];
                    let k = self.idx(i, j);
                    self.data[k] = s / d;
                }
            }
        }
        Some(BandCholesky { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    l: BandMatrix,
}

impl BandCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (m, p) = (self.l.m, self.l.p);
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..m {
            let mut s = y[i];
            for k in i.saturating_sub(p)..i {
                s -= l.data[l.idx(i, k)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        for i in (0..m).rev() {
            let mut s = y[i];
            for k in i + 1..(i + p + 1).min(m) {
                s -= l.data[l.idx(k, i)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve() {
        let (m, p) = (9, 2);
        let mut band = BandMatrix::zeros(m, p);
        let mut dense = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i.saturating_sub(p)..=i {
                let v = if i == j { 6.0 + i as f64 } else { -1.0 / (1.0 + (i + j) as f64) };
                band.add(i, j, v);
                dense[(i, j)] = v;
                dense[(j, i)] = v;
            }
        }
        let b: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = band.cholesky().unwrap().solve(&b);
        let r = &dense * DVector::from_vec(x) - DVector::from_vec(b);
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn rejects_singular() {
        let mut band = BandMatrix::zeros(2, 1);
        band.add(0, 0, 1.0);
        band.add(1, 1, 1.0);
        band.add(1, 0, -1.0);
        assert!(band.cholesky().is_none());
    }
}
