use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Complex matrix in compressed-row layout with sorted, unique columns per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Builds row by row; `row(i, buf)` pushes (column, value) pairs in any
    /// order, duplicates are summed and exact zeros dropped.
    pub fn from_rows(dim: usize, mut row: impl FnMut(usize, &mut Vec<(u32, C64)>)) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut buf = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            buf.clear();
            row(i, &mut buf);
            buf.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < buf.len() {
                let c = buf[k].0;
                let mut v = C64::new(0.0, 0.0);
                while k < buf.len() && buf[k].0 == c {
                    v += buf[k].1;
                    k += 1;
                }
                if v != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_rows(m.nrows(), |i, buf| {
            for j in 0..m.ncols() {
                buf.push((j as u32, m[(i, j)]));
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, &v)| (c as usize, v))
    }

    /// y = A x.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    /// y = (A x − shift·x)·scale.
    pub fn matvec_shifted(&self, x: &[C64], y: &mut [C64], shift: C64, scale: f64) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = -shift * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc * scale;
        }
    }

    /// ⟨x|A|x⟩.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, xi) in x.iter().enumerate() {
            let mut r = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.vals[k] * x[self.cols[k] as usize];
            }
            acc += xi.conj() * r;
        }
        acc
    }

    /// ‖A x‖².
    pub fn image_norm_sqr(&self, x: &[C64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut r = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.vals[k] * x[self.cols[k] as usize];
            }
            acc += r.norm_sqr();
        }
        acc
    }

    pub fn adjoint(&self) -> CsrMatrix {
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                rows[j].push((i as u32, v.conj()));
            }
        }
        CsrMatrix::from_rows(self.dim, |i, buf| buf.extend_from_slice(&rows[i]))
    }

    /// Elementwise linear combination a·self + b·other.
    pub fn combine(&self, a: C64, other: &CsrMatrix, b: C64) -> CsrMatrix {
        assert_eq!(self.dim, other.dim);
        CsrMatrix::from_rows(self.dim, |i, buf| {
            buf.extend(self.row(i).map(|(j, v)| (j as u32, a * v)));
            buf.extend(other.row(i).map(|(j, v)| (j as u32, b * v)));
        })
    }

    pub fn scaled(&self, a: C64) -> CsrMatrix {
        CsrMatrix {
            vals: self.vals.iter().map(|v| a * v).collect(),
            ..self.clone()
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Largest |A_ij − conj(A_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.combine(C64::new(1.0, 0.0), &self.adjoint(), C64::new(-1.0, 0.0));
        d.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_and_products() {
        let m = DMatrix::<C64>::from_fn(5, 5, |i, j| {
            if (i + 2 * j) % 3 == 0 {
                C64::new(i as f64 - 1.0, j as f64 * 0.5)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let s = CsrMatrix::from_dense(&m);
        assert_eq!(s.to_dense(), m);
        assert_eq!(s.adjoint().to_dense(), m.adjoint());
        let x: Vec<C64> = (0..5).map(|i| C64::new(1.0 + i as f64, -0.3 * i as f64)).collect();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let mut y = vec![C64::new(0.0, 0.0); 5];
        s.matvec(&x, &mut y);
        let want = &m * &xv;
        for i in 0..5 {
            assert!((y[i] - want[i]).norm() < 1e-13);
        }
        let shift = C64::new(0.3, -0.2);
        s.matvec_shifted(&x, &mut y, shift, 0.5);
        for i in 0..5 {
            assert!((y[i] - (want[i] - shift * x[i]) * 0.5).norm() < 1e-13);
        }
        let e = (xv.adjoint() * &m * &xv)[(0, 0)];
        assert!((s.expectation(&x) - e).norm() < 1e-12);
        assert!((s.image_norm_sqr(&x) - want.norm_squared()).abs() < 1e-10);
    }

    #[test]
    fn duplicates_summed() {
        let s = CsrMatrix::from_rows(2, |i, b| {
            b.push((1, C64::new(1.0, 0.0)));
            b.push((1, C64::new(2.0, 0.0)));
            if i == 0 {
                b.push((0, C64::new(1.0, 0.0)));
                b.push((0, C64::new(-1.0, 0.0)));
            }
        });
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense()[(0, 1)], C64::new(3.0, 0.0));
    }
}
