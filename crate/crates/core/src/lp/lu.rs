//! Sparse left-looking LU factorization of a simplex basis with threshold
//! partial pivoting.
//!
//! Columns are processed in ascending nonzero-count order. For column `k`
//! the pivot row is chosen among rows within 10% of the largest magnitude,
//! preferring rows with fewer basis nonzeros to limit fill.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub(crate) struct LuFactor {
    m: usize,
    /// Row eliminated at step `k`.
    prow: Vec<usize>,
    /// Basis position factored at step `k`.
    qpos: Vec<usize>,
    /// Multipliers of step `k`, keyed by row (rows pivoted later).
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Off-diagonal entries of column `k` of U, keyed by earlier step.
    u_cols: Vec<Vec<(usize, f64)>>,
    u_diag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Singular {
    pub position: usize,
}

impl LuFactor {
    /// Factors the square matrix whose column `j` is `columns[j]` (row, value).
    pub fn factor(m: usize, columns: &[&[(usize, f64)]]) -> Result<Self, Singular> {
        assert_eq!(columns.len(), m);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&j| columns[j].len());

        let mut row_count = vec![0usize; m];
        for col in columns {
            for &(r, _) in col.iter() {
                row_count[r] += 1;
            }
        }

        let mut step_of_row = vec![usize::MAX; m];
        let mut work = vec![0.0f64; m];
        let mut in_pattern = vec![false; m];
        let mut pattern: Vec<usize> = Vec::new();
        let mut queued = vec![false; m];
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

        let mut lu = LuFactor {
            m,
            prow: Vec::with_capacity(m),
            qpos: Vec::with_capacity(m),
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
        };

        for (k, &pos) in order.iter().enumerate() {
            for &(r, v) in columns[pos] {
                if !in_pattern[r] {
                    in_pattern[r] = true;
                    pattern.push(r);
                }
                work[r] += v;
                let s = step_of_row[r];
                if s != usize::MAX && !queued[s] {
                    queued[s] = true;
                    heap.push(Reverse(s));
                }
            }
            // Apply earlier eliminations in step order.
            let mut u_col = Vec::new();
            while let Some(Reverse(s)) = heap.pop() {
                queued[s] = false;
                let v = work[lu.prow[s]];
                if v == 0.0 {
                    continue;
                }
                u_col.push((s, v));
                for &(r, l) in &lu.l_cols[s] {
                    if !in_pattern[r] {
                        in_pattern[r] = true;
                        pattern.push(r);
                    }
                    work[r] -= l * v;
                    let t = step_of_row[r];
                    if t != usize::MAX && !queued[t] {
                        queued[t] = true;
                        heap.push(Reverse(t));
                    }
                }
            }

            let mut max_abs = 0.0f64;
            for &r in &pattern {
                if step_of_row[r] == usize::MAX {
                    max_abs = max_abs.max(work[r].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                return Err(Singular { position: pos });
            }
            let mut pivot = usize::MAX;
            for &r in &pattern {
                if step_of_row[r] != usize::MAX || work[r].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                let better = pivot == usize::MAX
                    || row_count[r] < row_count[pivot]
                    || (row_count[r] == row_count[pivot]
                        && (work[r].abs() > work[pivot].abs()
                            || (work[r].abs() == work[pivot].abs() && r < pivot)));
                if better {
                    pivot = r;
                }
            }
            let piv_val = work[pivot];
            let mut l_col = Vec::new();
            for &r in &pattern {
                if r != pivot && step_of_row[r] == usize::MAX && work[r].abs() > DROP_TOL {
                    l_col.push((r, work[r] / piv_val));
                }
            }
            l_col.sort_by_key(|&(r, _)| r);
            step_of_row[pivot] = k;
            lu.prow.push(pivot);
            lu.qpos.push(pos);
            lu.l_cols.push(l_col);
            lu.u_cols.push(u_col);
            lu.u_diag.push(piv_val);

            for &r in &pattern {
                work[r] = 0.0;
                in_pattern[r] = false;
            }
            pattern.clear();
        }
        Ok(lu)
    }

    /// Solves `B z = rhs`; `rhs` is indexed by row, the result by basis position.
    pub fn solve(&self, mut rhs: Vec<f64>) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.m);
        for k in 0..self.m {
            let v = rhs[self.prow[k]];
            if v != 0.0 {
                for &(r, l) in &self.l_cols[k] {
                    rhs[r] -= l * v;
                }
            }
        }
        let mut z = vec![0.0; self.m];
        for k in (0..self.m).rev() {
            let w = rhs[self.prow[k]] / self.u_diag[k];
            if w != 0.0 {
                for &(i, u) in &self.u_cols[k] {
                    rhs[self.prow[i]] -= u * w;
                }
            }
            z[self.qpos[k]] = w;
        }
        z
    }

    /// Solves `yᵀ B = cᵀ`; `c` is indexed by basis position, `y` by row.
    pub fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        debug_assert_eq!(c.len(), self.m);
        let mut t = vec![0.0; self.m];
        for k in 0..self.m {
            let mut s = c[self.qpos[k]];
            for &(i, u) in &self.u_cols[k] {
                s -= u * t[i];
            }
            t[k] = s / self.u_diag[k];
        }
        let mut y = vec![0.0; self.m];
        for k in (0..self.m).rev() {
            let mut s = t[k];
            for &(r, l) in &self.l_cols[k] {
                s -= l * y[r];
            }
            y[self.prow[k]] = s;
        }
        y
    }
}
