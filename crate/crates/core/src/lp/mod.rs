//! Linear programs with bounded variables and their solution, including
//! row duals and reduced costs.
//!
//! [`RevisedSimplex`] is the built-in engine. Anything implementing
//! [`LpSolver`] can stand in for it.

mod lu;
mod simplex;

use std::fmt::Write as _;

use thiserror::Error;

pub use simplex::RevisedSimplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `minimize cᵀx + offset` subject to row constraints and `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub costs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub objective_offset: f64,
    var_names: Vec<String>,
    row_names: Vec<String>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> VarId {
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.var_names.push(name.into());
        VarId(self.costs.len() - 1)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        self.rows.push(Row { coeffs, sense, rhs });
        self.row_names.push(name.into());
        RowId(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.0]
    }

    pub fn row_name(&self, r: RowId) -> &str {
        &self.row_names[r.0]
    }

    /// Objective value of `x`, including the constant offset.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.costs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Row activity `aᵀx` for every row.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.coeffs.iter().map(|(v, a)| a * x[v.0]).sum())
            .collect()
    }

    /// Renders the program in CPLEX LP text format. The constant offset is
    /// reported as a comment since not every reader accepts it.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let name = |i: usize| sanitize(&self.var_names[i], 'x', i);
        let _ = writeln!(out, "\\ objective offset: {}", self.objective_offset);
        out.push_str("Minimize\n obj:");
        let mut any = false;
        for (i, &c) in self.costs.iter().enumerate() {
            if c != 0.0 {
                write_term(&mut out, c, &name(i), !any);
                any = true;
            }
        }
        if !any {
            out.push_str(" 0 ");
            out.push_str(&name(0));
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " {}:", sanitize(&self.row_names[r], 'c', r));
            if row.coeffs.is_empty() {
                let _ = write!(out, " 0 {}", name(0));
            }
            for (k, (v, a)) in row.coeffs.iter().enumerate() {
                write_term(&mut out, *a, &name(v.0), k == 0);
            }
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(out, " {op} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for i in 0..self.num_vars() {
            let (l, u) = (self.lower[i], self.upper[i]);
            let n = name(i);
            let _ = match (l.is_finite(), u.is_finite()) {
                (false, false) => writeln!(out, " {n} free"),
                (true, true) if l == u => writeln!(out, " {n} = {l}"),
                (true, true) => writeln!(out, " {l} <= {n} <= {u}"),
                (true, false) => writeln!(out, " {n} >= {l}"),
                (false, true) => writeln!(out, " -inf <= {n} <= {u}"),
            };
        }
        out.push_str("End\n");
        out
    }
}

fn write_term(out: &mut String, coeff: f64, name: &str, first: bool) {
    if coeff < 0.0 {
        let _ = write!(out, " - {} {name}", -coeff);
    } else if first {
        let _ = write!(out, " {coeff} {name}");
    } else {
        let _ = write!(out, " + {coeff} {name}");
    }
}

fn sanitize(raw: &str, prefix: char, idx: usize) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if cleaned.is_empty() || cleaned.starts_with(|c: char| c.is_ascii_digit()) {
        format!("{prefix}{idx}_{cleaned}")
    } else {
        cleaned
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Optimal,
    /// Rows whose phase-one artificial stayed positive.
    Infeasible { rows: Vec<RowId> },
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Sensitivity of the optimal objective to each row's right-hand side.
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("numerical failure in LP solver: {0}")]
    NumericalFailure(String),
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("malformed LP: {0}")]
    Malformed(String),
}

pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError>;
}
