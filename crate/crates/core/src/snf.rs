//! Smith normal form over the integers with tracked unimodular transforms.
//!
//! Row/column reduction with partial pivoting on the minimal absolute value.
//! Matrices here are small (n x n with n around 30 at most), so no modular
//! techniques are needed.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

pub struct SnfResult {
    /// Diagonal d_1 | d_2 | ... (nonnegative).
    pub diag: Vec<BigInt>,
    /// U * input * V = diag.
    pub u: Matrix,
    pub u_inv: Matrix,
    pub v: Matrix,
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                let prod = &a[i][l] * &b[l][j];
                out[i][j] += prod;
            }
        }
    }
    out
}

struct Work {
    b: Matrix,
    u: Matrix,
    u_inv: Matrix,
    v: Matrix,
    n: usize,
}

impl Work {
    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        self.b.swap(i, k);
        self.u.swap(i, k);
        for row in self.u_inv.iter_mut() {
            row.swap(i, k);
        }
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        if j == k {
            return;
        }
        for row in self.b.iter_mut() {
            row.swap(j, k);
        }
        for row in self.v.iter_mut() {
            row.swap(j, k);
        }
    }

    /// row_i -= c * row_k
    fn row_sub(&mut self, i: usize, k: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for j in 0..self.n {
            let s = c * &self.b[k][j];
            self.b[i][j] -= s;
            let s = c * &self.u[k][j];
            self.u[i][j] -= s;
        }
        // mirror on the inverse: col_k += c * col_i
        for r in 0..self.n {
            let s = c * &self.u_inv[r][i];
            self.u_inv[r][k] += s;
        }
    }

    /// col_j -= c * col_k
    fn col_sub(&mut self, j: usize, k: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        for r in 0..self.n {
            let s = c * &self.b[r][k];
            self.b[r][j] -= s;
            let s = c * &self.v[r][k];
            self.v[r][j] -= s;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.n {
            self.b[i][j] = -self.b[i][j].clone();
            self.u[i][j] = -self.u[i][j].clone();
        }
        for r in 0..self.n {
            self.u_inv[r][i] = -self.u_inv[r][i].clone();
        }
    }

    fn min_pivot(&self, k: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in k..self.n {
            for j in k..self.n {
                if self.b[i][j].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if self.b[i][j].abs() < self.b[bi][bj].abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }
}

pub fn smith_normal_form(input: &Matrix) -> SnfResult {
    let n = input.len();
    let mut w = Work {
        b: input.clone(),
        u: identity(n),
        u_inv: identity(n),
        v: identity(n),
        n,
    };

    for k in 0..n {
        'pivot: loop {
            let Some((pi, pj)) = w.min_pivot(k) else {
                break 'pivot;
            };
            w.swap_rows(pi, k);
            w.swap_cols(pj, k);

            let mut clean = true;
            for i in (k + 1)..n {
                if !w.b[i][k].is_zero() {
                    let q = &w.b[i][k] / &w.b[k][k];
                    w.row_sub(i, k, &q);
                    if !w.b[i][k].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'pivot;
            }
            for j in (k + 1)..n {
                if !w.b[k][j].is_zero() {
                    let q = &w.b[k][j] / &w.b[k][k];
                    w.col_sub(j, k, &q);
                    if !w.b[k][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'pivot;
            }

            // divisibility chain: pivot must divide the rest of the submatrix
            let mut offender = None;
            'scan: for i in (k + 1)..n {
                for j in (k + 1)..n {
                    if !(&w.b[i][j] % &w.b[k][k]).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    w.row_sub(k, i, &minus_one); // row_k += row_i
                    continue 'pivot;
                }
                None => break 'pivot,
            }
        }
        if w.b[k][k].is_negative() {
            w.negate_row(k);
        }
    }

    let diag = (0..n).map(|k| w.b[k][k].clone()).collect();
    SnfResult {
        diag,
        u: w.u,
        u_inv: w.u_inv,
        v: w.v,
    }
}
