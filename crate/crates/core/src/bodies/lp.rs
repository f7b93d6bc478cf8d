//! Dense two-phase simplex method for the small linear programs used by
//! support and membership queries (tens of variables, at most a few hundred
//! constraints).

use nalgebra::DMatrix;

const PIVOT_EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    /// Phase one could not drive the artificial variables to zero; carries the
    /// residual infeasibility (sum of artificials).
    Infeasible { residual: f64 },
    Unbounded,
}

struct Tableau {
    t: DMatrix<f64>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[(i, self.cols)]
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.t[(p, q)];
        for j in 0..=self.cols {
            self.t[(p, j)] /= piv;
        }
        for i in 0..=self.rows {
            if i == p {
                continue;
            }
            let f = self.t[(i, q)];
            if f != 0.0 {
                for j in 0..=self.cols {
                    let v = self.t[(p, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[p] = q;
    }

    /// Runs Bland's rule on the objective row until optimal. Columns with
    /// `allowed[j] == false` never enter.
    fn optimize(&mut self, allowed: &[bool]) -> Result<(), ()> {
        for _ in 0..MAX_PIVOTS {
            let obj = self.rows;
            let entering = (0..self.cols).find(|&j| allowed[j] && self.t[(obj, j)] > PIVOT_EPS);
            let Some(q) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[(i, q)];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14
                                || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match best {
                Some((p, _)) => self.pivot(p, q),
                None => return Err(()),
            }
        }
        Err(())
    }
}

/// Maximizes `c·y` subject to `a·y = b`, `y ≥ 0`.
pub fn solve_standard_form(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> LpOutcome {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);

    let cols = n + m;
    let mut t = DMatrix::zeros(m + 1, cols + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, cols)] = sign * b[i];
    }
    // phase one: maximize -sum(artificials)
    for j in 0..n {
        let s: f64 = (0..m).map(|i| t[(i, j)]).sum();
        t[(m, j)] = s;
    }
    let s: f64 = (0..m).map(|i| t[(i, cols)]).sum();
    t[(m, cols)] = s;

    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        rows: m,
        cols,
    };
    let all = vec![true; cols];
    if tab.optimize(&all).is_err() {
        // phase one is bounded; failure means the pivot budget ran out
        return LpOutcome::Infeasible { residual: f64::INFINITY };
    }
    let residual = tab.t[(m, cols)].max(0.0);
    let scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if residual > 1e-9 * scale {
        return LpOutcome::Infeasible { residual };
    }

    // drive artificials out of the basis; rows that cannot pivot are redundant
    let mut redundant = vec![false; m];
    for i in 0..m {
        if tab.basis[i] >= n {
            let q = (0..n).find(|&j| tab.t[(i, j)].abs() > 1e-9);
            match q {
                Some(q) => tab.pivot(i, q),
                None => redundant[i] = true,
            }
        }
    }
    if redundant.iter().any(|&r| r) {
        let keep: Vec<usize> = (0..m).filter(|&i| !redundant[i]).collect();
        let mut t2 = DMatrix::zeros(keep.len() + 1, cols + 1);
        for (r, &i) in keep.iter().enumerate() {
            t2.set_row(r, &tab.t.row(i));
        }
        tab.basis = keep.iter().map(|&i| tab.basis[i]).collect();
        tab.rows = keep.len();
        tab.t = t2;
    }

    // phase two objective row: reduced costs c_j - c_B B^-1 A_j
    let rows = tab.rows;
    for j in 0..=cols {
        let cj = if j < n { c[j] } else { 0.0 };
        let mut r = if j == cols { 0.0 } else { cj };
        for i in 0..rows {
            let bi = tab.basis[i];
            let cb = if bi < n { c[bi] } else { 0.0 };
            r -= cb * tab.t[(i, j)];
        }
        tab.t[(rows, j)] = r;
    }
    let mut allowed = vec![true; cols];
    for flag in allowed.iter_mut().skip(n) {
        *flag = false;
    }
    if tab.optimize(&allowed).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for i in 0..rows {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i);
        }
    }
    let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

/// Maximizes `u·x` over `{x : normals·x ≤ offsets}` with `x` free.
pub fn maximize_over_halfspaces(normals: &DMatrix<f64>, offsets: &[f64], u: &[f64]) -> LpOutcome {
    let (m, n) = normals.shape();
    let mut a = DMatrix::zeros(m, 2 * n + m);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = normals[(i, j)];
            a[(i, n + j)] = -normals[(i, j)];
        }
        a[(i, 2 * n + i)] = 1.0;
    }
    let mut c = vec![0.0; 2 * n + m];
    for j in 0..n {
        c[j] = u[j];
        c[n + j] = -u[j];
    }
    match solve_standard_form(&a, offsets, &c) {
        LpOutcome::Optimal { x, value } => {
            let free = (0..n).map(|j| x[j] - x[n + j]).collect();
            LpOutcome::Optimal { x: free, value }
        }
        other => other,
    }
}

/// Maximizes `u·x` over the convex hull of `points` by optimizing the convex
/// weights. Used as an independent check of vertex-maximum support values.
pub fn maximize_over_hull(points: &[Vec<f64>], u: &[f64]) -> LpOutcome {
    let k = points.len();
    let a = DMatrix::from_element(1, k, 1.0);
    let c: Vec<f64> = points
        .iter()
        .map(|p| p.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect();
    solve_standard_form(&a, &[1.0], &c)
}

/// Whether `x` is a convex combination of `points`, up to an absolute
/// infeasibility budget `tol` summed over the coordinate equations.
pub fn in_convex_hull(points: &[Vec<f64>], x: &[f64], tol: f64) -> bool {
    let k = points.len();
    let n = x.len();
    let mut a = DMatrix::zeros(n + 1, k);
    let mut b = vec![0.0; n + 1];
    for (j, p) in points.iter().enumerate() {
        for i in 0..n {
            a[(i, j)] = p[i];
        }
        a[(n, j)] = 1.0;
    }
    b[..n].copy_from_slice(x);
    b[n] = 1.0;
    let c = vec![0.0; k];
    match solve_standard_form(&a, &b, &c) {
        LpOutcome::Optimal { .. } => true,
        LpOutcome::Infeasible { residual } => residual <= tol,
        LpOutcome::Unbounded => true,
    }
}
