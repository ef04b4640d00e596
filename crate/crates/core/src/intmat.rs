//! Small exact integer matrices: dilation matrices, coset arithmetic, and
//! the scalar factor in the block factorization. Everything here is exact
//! (i128 fraction-free elimination), no floating point.

use std::fmt;

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    a: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, a: Vec<i64>) -> Self {
        assert_eq!(a.len(), rows * cols, "entry count mismatch");
        IntMatrix { rows, cols, a }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            a.extend_from_slice(row);
        }
        IntMatrix {
            rows: r,
            cols: c,
            a,
        }
    }

    /// 1x1 matrix, the univariate dilation factor.
    pub fn scalar(v: i64) -> Self {
        IntMatrix {
            rows: 1,
            cols: 1,
            a: vec![v],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = vec![0; n * n];
        for i in 0..n {
            a[i * n + i] = 1;
        }
        IntMatrix {
            rows: n,
            cols: n,
            a,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.a[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut a = vec![0; self.a.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                a[j * self.rows + i] = self.get(i, j);
            }
        }
        IntMatrix {
            rows: self.cols,
            cols: self.rows,
            a,
        }
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Determinant by cofactor expansion; matrices here are tiny.
    pub fn det(&self) -> i64 {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        match n {
            0 => 1,
            1 => self.a[0],
            2 => self.a[0] * self.a[3] - self.a[1] * self.a[2],
            _ => {
                let mut d = 0i64;
                for j in 0..n {
                    let m = self.minor(0, j);
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    d += s * self.get(0, j) * m.det();
                }
                d
            }
        }
    }

    fn minor(&self, row: usize, col: usize) -> IntMatrix {
        let n = self.rows;
        let mut a = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == row {
                continue;
            }
            for j in 0..n {
                if j == col {
                    continue;
                }
                a.push(self.get(i, j));
            }
        }
        IntMatrix {
            rows: n - 1,
            cols: n - 1,
            a,
        }
    }

    /// Adjugate, so that `self * adj = det * I`.
    pub fn adjugate(&self) -> IntMatrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 1 {
            return IntMatrix::identity(1);
        }
        let mut a = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                // cofactor transpose
                a[j * n + i] = s * self.minor(i, j).det();
            }
        }
        IntMatrix {
            rows: n,
            cols: n,
            a,
        }
    }

    /// Solves `self * x = v` over the integers, `None` when no integer
    /// solution exists. Requires a nonzero determinant.
    pub fn solve_integer(&self, v: &[i64]) -> Option<Vec<i64>> {
        let d = self.det();
        assert_ne!(d, 0, "singular dilation matrix");
        let num = self.adjugate().mul_vec(v);
        let mut x = Vec::with_capacity(num.len());
        for n in num {
            if n % d != 0 {
                return None;
            }
            x.push(n / d);
        }
        Some(x)
    }

    /// Exact rank via fraction-free Gaussian elimination in i128.
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<i128>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) as i128).collect())
            .collect();
        let (nr, nc) = (self.rows, self.cols);
        let mut rank = 0;
        let mut prev = 1i128;
        for col in 0..nc {
            // find pivot
            let pivot = (rank..nr).find(|&r| m[r][col] != 0);
            let Some(p) = pivot else { continue };
            m.swap(rank, p);
            for r in rank + 1..nr {
                for c in col + 1..nc {
                    m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) / prev;
                }
                m[r][col] = 0;
            }
            prev = m[rank][col];
            rank += 1;
            if rank == nr {
                break;
            }
        }
        rank
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "{:?}", &self.a[i * self.cols..(i + 1) * self.cols])?;
        }
        Ok(())
    }
}
