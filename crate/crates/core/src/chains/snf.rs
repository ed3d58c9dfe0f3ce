//! Smith normal form over ℤ for small dense matrices.
//!
//! All arithmetic is checked; an overflow surfaces as an internal error
//! instead of wrapping.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

fn overflow() -> Error {
    Error::Internal("integer overflow in exact elimination".into())
}

fn mul_add(acc: i64, a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b)
        .and_then(|p| acc.checked_add(p))
        .ok_or_else(overflow)
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for k in 0..size {
            m.set(k, k, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: i64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn mul_vec(&self, x: &[i64]) -> Result<Vec<i64>> {
        assert_eq!(x.len(), self.cols, "matrix/vector size mismatch");
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(x).try_fold(0i64, |acc, (&a, &b)| mul_add(acc, a, b))
            })
            .collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        assert_eq!(self.cols, other.rows, "matrix product size mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0i64;
                for k in 0..self.cols {
                    acc = mul_add(acc, self.get(r, k), other.get(k, c))?;
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row(&mut self, dst: usize, src: usize, factor: i64) -> Result<()> {
        for c in 0..self.cols {
            let v = mul_add(self.get(dst, c), factor, self.get(src, c))?;
            self.set(dst, c, v);
        }
        Ok(())
    }

    /// col[dst] += factor * col[src]
    fn add_col(&mut self, dst: usize, src: usize, factor: i64) -> Result<()> {
        for r in 0..self.rows {
            let v = mul_add(self.get(r, dst), factor, self.get(r, src))?;
            self.set(r, dst, v);
        }
        Ok(())
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = self.get(r, c);
            self.set(r, c, -v);
        }
    }
}

/// `U · A · V = diag(d)` with `U`, `V` unimodular and `d[k] | d[k+1]`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diagonal: Vec<i64>,
    pub rank: usize,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

pub fn smith_normal_form(matrix: &IntMatrix) -> Result<SmithForm> {
    let (m, n) = (matrix.rows, matrix.cols);
    let mut a = matrix.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut rank = 0;

    for t in 0..m.min(n) {
        while let Some((pr, pc)) = min_nonzero(&a, t) {
            a.swap_rows(t, pr);
            u.swap_rows(t, pr);
            a.swap_cols(t, pc);
            v.swap_cols(t, pc);
            let pivot = a.get(t, t);

            let mut clean = true;
            for r in t + 1..m {
                let q = a.get(r, t) / pivot;
                if q != 0 {
                    a.add_row(r, t, -q)?;
                    u.add_row(r, t, -q)?;
                }
                clean &= a.get(r, t) == 0;
            }
            for c in t + 1..n {
                let q = a.get(t, c) / pivot;
                if q != 0 {
                    a.add_col(c, t, -q)?;
                    v.add_col(c, t, -q)?;
                }
                clean &= a.get(t, c) == 0;
            }
            if !clean {
                continue;
            }
            // enforce divisibility of the remaining block
            let offender = (t + 1..m).find(|&r| (t + 1..n).any(|c| a.get(r, c) % pivot != 0));
            match offender {
                Some(r) => {
                    a.add_row(t, r, 1)?;
                    u.add_row(t, r, 1)?;
                }
                None => break,
            }
        }
        if a.get(t, t) == 0 {
            break;
        }
        if a.get(t, t) < 0 {
            a.negate_row(t);
            u.negate_row(t);
        }
        rank = t + 1;
    }

    let diagonal = (0..m.min(n)).map(|k| a.get(k, k)).collect();
    Ok(SmithForm { diagonal, rank, u, v })
}

fn min_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, i64)> = None;
    for r in t..a.rows {
        for c in t..a.cols {
            let x = a.get(r, c).abs();
            if x != 0 && best.is_none_or(|(_, _, b)| x < b) {
                best = Some((r, c, x));
            }
        }
    }
    best.map(|(r, c, _)| (r, c))
}

impl SmithForm {
    /// One integer solution of `A x = b`, or `None` if the system has none.
    pub fn solve(&self, b: &[i64]) -> Result<Option<Vec<i64>>> {
        let ub = self.u.mul_vec(b)?;
        let mut y = vec![0i64; self.v.rows()];
        for (k, &rhs) in ub.iter().enumerate() {
            if k < self.rank {
                let d = self.diagonal[k];
                if rhs % d != 0 {
                    return Ok(None);
                }
                y[k] = rhs / d;
            } else if rhs != 0 {
                return Ok(None);
            }
        }
        self.v.mul_vec(&y).map(Some)
    }

    /// Basis of the integer kernel of `A`.
    pub fn kernel_basis(&self) -> Vec<Vec<i64>> {
        (self.rank..self.v.cols()).map(|c| self.v.column(c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[i64]]) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                m.set(r, c, x);
            }
        }
        m
    }

    fn check_form(a: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(a).unwrap();
        let d = s.u.mul(a).unwrap().mul(&s.v).unwrap();
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                let expected = if r == c { s.diagonal[r] } else { 0 };
                assert_eq!(d.get(r, c), expected, "entry ({r},{c})");
            }
        }
        for k in 1..s.rank {
            assert_eq!(s.diagonal[k] % s.diagonal[k - 1], 0);
        }
        s
    }

    #[test]
    fn textbook_example() {
        let a = from_rows(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = check_form(&a);
        assert_eq!(s.diagonal, vec![2, 6, 12]);
        assert_eq!(s.rank, 3);
    }

    #[test]
    fn rank_deficient_matrix_has_kernel() {
        let a = from_rows(&[&[1, 2, 3], &[2, 4, 6]]);
        let s = check_form(&a);
        assert_eq!(s.rank, 1);
        let kernel = s.kernel_basis();
        assert_eq!(kernel.len(), 2);
        for k in kernel {
            assert_eq!(a.mul_vec(&k).unwrap(), vec![0, 0]);
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = from_rows(&[&[2, 0], &[0, 2]]);
        let s = check_form(&a);
        assert_eq!(s.solve(&[4, 2]).unwrap(), Some(vec![2, 1]));
        assert_eq!(s.solve(&[1, 0]).unwrap(), None);
    }

    #[test]
    fn zero_matrix() {
        let s = check_form(&IntMatrix::zeros(3, 2));
        assert_eq!(s.rank, 0);
        assert_eq!(s.kernel_basis().len(), 2);
    }
}
