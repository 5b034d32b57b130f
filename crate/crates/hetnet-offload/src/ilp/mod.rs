//! Generic 0/1 integer linear program engine.
//!
//! The LP relaxation is delegated to the `microlp` sparse simplex; on top of
//! it sits a depth-first branch-and-bound that branches on the most
//! fractional variable and stops at the first integer-feasible node when
//! only feasibility is asked for. Identical programs yield identical
//! results, node counts included.
//!
//! Coefficients in the built programs span many orders of magnitude (bits
//! against joules), so every row is scaled to unit maximum coefficient
//! before solving.

mod lp_format;

pub use lp_format::{parse_lp, to_lp_string, write_lp, LpParseError};

use std::time::{Duration, Instant};

use thiserror::Error;

/// Integrality tolerance for accepting a relaxation value as 0/1.
pub const INT_TOL: f64 = 1e-6;
/// Tolerance for feasibility checks on (row-scaled) constraints.
pub const ROW_TOL: f64 = 1e-6;
/// Tolerance for objective comparisons.
pub const OBJ_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IlpError {
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("LP solver failure: {0}")]
    Solver(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// One linear constraint with sparse coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    /// Stop at the first integer-feasible point; the objective is ignored.
    Feasibility,
}

/// A pure 0/1 linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLinearProgram {
    pub var_names: Vec<String>,
    /// Objective coefficients (minimize). All zero for feasibility programs.
    pub objective: Vec<f64>,
    /// Constant added to the reported objective value.
    pub objective_offset: f64,
    pub sense: Sense,
    pub rows: Vec<Row>,
    /// Marks variables whose value is implied once the others are integral
    /// (e.g. product-linearization variables). Branch-and-bound prefers
    /// branching on the non-derived variables, which shrinks the effective
    /// search dimension without affecting correctness.
    pub derived: Vec<bool>,
}

impl BinaryLinearProgram {
    pub fn new(sense: Sense) -> Self {
        BinaryLinearProgram {
            var_names: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            sense,
            rows: Vec::new(),
            derived: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.var_names.push(name.into());
        self.objective.push(0.0);
        self.derived.push(false);
        self.var_names.len() - 1
    }

    pub fn mark_derived(&mut self, j: usize) {
        self.derived[j] = true;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    /// Objective value (including offset) of a 0/1 assignment.
    pub fn objective_value(&self, assignment: &[bool]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(assignment)
                .filter(|&(_, &b)| b)
                .map(|(&c, _)| c)
                .sum::<f64>()
    }

    /// Whether a 0/1 assignment satisfies every row, after scaling each row
    /// to unit maximum coefficient.
    pub fn is_feasible(&self, assignment: &[bool]) -> bool {
        self.rows.iter().all(|row| {
            let scale = row_scale(row);
            let lhs: f64 = row
                .coeffs
                .iter()
                .filter(|&&(j, _)| assignment[j])
                .map(|&(_, c)| c)
                .sum();
            let (lhs, rhs) = (lhs * scale, row.rhs * scale);
            match row.relation {
                Relation::Le => lhs <= rhs + ROW_TOL,
                Relation::Ge => lhs >= rhs - ROW_TOL,
                Relation::Eq => (lhs - rhs).abs() <= ROW_TOL,
            }
        })
    }

    pub fn validate(&self) -> Result<(), IlpError> {
        if self.objective.len() != self.var_names.len() {
            return Err(IlpError::Invalid("objective length mismatch".into()));
        }
        if self.derived.len() != self.var_names.len() {
            return Err(IlpError::Invalid("derived-flag length mismatch".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) || !self.objective_offset.is_finite() {
            return Err(IlpError::Invalid("non-finite objective".into()));
        }
        let mut used = vec![false; self.num_vars()];
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(IlpError::Invalid(format!("row {i}: non-finite rhs")));
            }
            for &(j, c) in &row.coeffs {
                if j >= self.num_vars() {
                    return Err(IlpError::Invalid(format!("row {i}: variable index {j} out of range")));
                }
                if !c.is_finite() {
                    return Err(IlpError::Invalid(format!("row {i}: non-finite coefficient")));
                }
                if c != 0.0 {
                    used[j] = true;
                }
            }
        }
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                used[j] = true;
            }
        }
        if let Some(j) = used.iter().position(|&u| !u) {
            return Err(IlpError::Invalid(format!(
                "variable {} appears in no constraint or objective",
                self.var_names[j]
            )));
        }
        Ok(())
    }
}

fn row_scale(row: &Row) -> f64 {
    let max = row
        .coeffs
        .iter()
        .map(|&(_, c)| c.abs())
        .fold(0.0f64, f64::max);
    if max > 0.0 {
        1.0 / max
    } else {
        1.0
    }
}

/// Row-scaled copy with constant rows resolved and duplicate rows removed.
/// Returns `None` when a constant row is violated (trivially infeasible).
fn presolve(p: &BinaryLinearProgram) -> Option<BinaryLinearProgram> {
    let mut out = p.clone();
    let mut seen = std::collections::HashSet::new();
    let mut rows = Vec::with_capacity(out.rows.len());
    for mut row in std::mem::take(&mut out.rows) {
        row.coeffs.retain(|&(_, c)| c != 0.0);
        let scale = row_scale(&row);
        for (_, c) in row.coeffs.iter_mut() {
            *c *= scale;
        }
        row.rhs *= scale;
        if row.coeffs.is_empty() {
            let ok = match row.relation {
                Relation::Le => 0.0 <= row.rhs + ROW_TOL,
                Relation::Ge => 0.0 >= row.rhs - ROW_TOL,
                Relation::Eq => row.rhs.abs() <= ROW_TOL,
            };
            if !ok {
                return None;
            }
            continue;
        }
        let mut key: Vec<u64> = Vec::with_capacity(2 * row.coeffs.len() + 2);
        for &(j, c) in &row.coeffs {
            key.push(j as u64);
            key.push(c.to_bits());
        }
        key.push(row.rhs.to_bits());
        key.push(row.relation.symbol().as_bytes()[0] as u64);
        if seen.insert(key) {
            rows.push(row);
        }
    }
    out.rows = rows;
    Some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { values: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

fn to_microlp(p: &BinaryLinearProgram) -> (microlp::Problem, Vec<microlp::Variable>) {
    let mut prob = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
    let vars: Vec<_> = p
        .objective
        .iter()
        .map(|&c| prob.add_var(c, (0.0, 1.0)))
        .collect();
    for row in &p.rows {
        let mut expr = microlp::LinearExpr::empty();
        for &(j, c) in &row.coeffs {
            expr.add(vars[j], c);
        }
        let op = match row.relation {
            Relation::Le => microlp::ComparisonOp::Le,
            Relation::Eq => microlp::ComparisonOp::Eq,
            Relation::Ge => microlp::ComparisonOp::Ge,
        };
        prob.add_constraint(expr, op, row.rhs);
    }
    (prob, vars)
}

/// Solve the LP relaxation over the box [0,1]^n.
pub fn solve_lp_relaxation(p: &BinaryLinearProgram) -> Result<LpOutcome, IlpError> {
    p.validate()?;
    let scaled = match presolve(p) {
        Some(s) => s,
        None => return Ok(LpOutcome::Infeasible),
    };
    if scaled.num_vars() == 0 {
        return Ok(LpOutcome::Optimal {
            values: Vec::new(),
            objective: p.objective_offset,
        });
    }
    let (prob, vars) = to_microlp(&scaled);
    match prob.solve() {
        Ok(sol) => {
            let values: Vec<f64> = vars.iter().map(|&v| *sol.var_value(v)).collect();
            let objective = p.objective_offset
                + p.objective
                    .iter()
                    .zip(&values)
                    .map(|(c, v)| c * v)
                    .sum::<f64>();
            Ok(LpOutcome::Optimal { values, objective })
        }
        Err(microlp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
        Err(microlp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
        Err(e) => Err(IlpError::Solver(e.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlpStatus {
    Optimal,
    Infeasible,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct IlpResult {
    pub status: IlpStatus,
    /// Best 0/1 assignment found, if any (always present for `Optimal`,
    /// present for `Timeout` when an incumbent exists).
    pub assignment: Option<Vec<bool>>,
    /// Objective of `assignment` including the offset; meaningless without
    /// an assignment.
    pub objective: f64,
    /// Number of branch-and-bound nodes evaluated.
    pub nodes: u64,
}

struct Search<'a> {
    original: &'a BinaryLinearProgram,
    scaled: &'a BinaryLinearProgram,
    vars: Vec<microlp::Variable>,
    incumbent: Option<(Vec<bool>, f64)>,
    /// Values pinned along the current dive path, used to rebuild a node
    /// from scratch when the warm-started refactorization fails numerically.
    fixed: Vec<Option<bool>>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
    /// When every objective coefficient is integral the node bound can be
    /// rounded up before pruning.
    integral_objective: bool,
    feasibility_only: bool,
}

enum Walk {
    Continue,
    Stop,
}

impl<'a> Search<'a> {
    fn node_bound(&self, lp_obj: f64) -> f64 {
        let b = lp_obj + self.original.objective_offset;
        if self.integral_objective {
            (b - ROW_TOL).ceil()
        } else {
            b
        }
    }

    fn dive(&mut self, sol: microlp::Solution) -> Result<Walk, IlpError> {
        self.nodes += 1;
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                self.timed_out = true;
                return Ok(Walk::Stop);
            }
        }
        if !self.feasibility_only {
            if let Some((_, inc)) = &self.incumbent {
                if self.node_bound(sol.objective()) >= inc - OBJ_TOL {
                    return Ok(Walk::Continue);
                }
            }
        }

        // Most fractional non-derived variable, lowest index on ties;
        // derived variables are only branched on when every structural one
        // is already integral (their linking rows normally force them).
        let mut branch: Option<(usize, f64)> = None;
        for pass_derived in [false, true] {
            let mut worst = INT_TOL;
            for (j, &v) in self.vars.iter().enumerate() {
                if self.scaled.derived[j] != pass_derived {
                    continue;
                }
                let val = *sol.var_value(v);
                let frac = (val - val.round()).abs();
                if frac > worst {
                    worst = frac;
                    branch = Some((j, val));
                }
            }
            if branch.is_some() {
                break;
            }
        }

        let Some((j, val)) = branch else {
            let assignment: Vec<bool> = self
                .vars
                .iter()
                .map(|&v| *sol.var_value(v) > 0.5)
                .collect();
            // Guard against relaxation round-off: re-check the rounded point.
            if !self.scaled.is_feasible(&assignment) {
                return Ok(Walk::Continue);
            }
            let obj = self.original.objective_value(&assignment);
            let better = match &self.incumbent {
                None => true,
                Some((_, inc)) => obj < inc - OBJ_TOL,
            };
            if better {
                self.incumbent = Some((assignment, obj));
            }
            if self.feasibility_only {
                return Ok(Walk::Stop);
            }
            return Ok(Walk::Continue);
        };

        let first = if val >= 0.5 { 1.0 } else { 0.0 };
        for value in [first, 1.0 - first] {
            self.fixed[j] = Some(value == 1.0);
            let child = match sol.clone().fix_var(self.vars[j], value) {
                Ok(child) => Some(child),
                Err(microlp::Error::Infeasible) => None,
                // Warm-started refactorization can fail on ill-conditioned
                // bases; retry the node from a fresh factorization before
                // giving up on it.
                Err(_) => self.resolve_from_scratch()?,
            };
            if let Some(child) = child {
                if let Walk::Stop = self.dive(child)? {
                    self.fixed[j] = None;
                    return Ok(Walk::Stop);
                }
            }
            self.fixed[j] = None;
        }
        Ok(Walk::Continue)
    }

    /// Re-solve the current node's LP from scratch: a fresh problem with
    /// every pinned variable held by an equality row. `None` means the node
    /// is infeasible.
    fn resolve_from_scratch(&self) -> Result<Option<microlp::Solution>, IlpError> {
        let (mut prob, vars) = to_microlp(self.scaled);
        for (j, f) in self.fixed.iter().enumerate() {
            if let Some(b) = f {
                let mut expr = microlp::LinearExpr::empty();
                expr.add(vars[j], 1.0);
                prob.add_constraint(expr, microlp::ComparisonOp::Eq, if *b { 1.0 } else { 0.0 });
            }
        }
        match prob.solve() {
            Ok(sol) => Ok(Some(sol)),
            Err(microlp::Error::Infeasible) => Ok(None),
            Err(e) => Err(IlpError::Solver(e.to_string())),
        }
    }
}

/// Branch-and-bound solve of a 0/1 program within an optional time budget.
pub fn solve(p: &BinaryLinearProgram, time_budget: Option<Duration>) -> Result<IlpResult, IlpError> {
    p.validate()?;
    let scaled = match presolve(p) {
        Some(s) => s,
        None => {
            return Ok(IlpResult {
                status: IlpStatus::Infeasible,
                assignment: None,
                objective: f64::NAN,
                nodes: 0,
            })
        }
    };
    if scaled.num_vars() == 0 {
        return Ok(IlpResult {
            status: IlpStatus::Optimal,
            assignment: Some(Vec::new()),
            objective: p.objective_offset,
            nodes: 0,
        });
    }

    let (prob, vars) = to_microlp(&scaled);
    let root = match prob.solve() {
        Ok(sol) => sol,
        Err(microlp::Error::Infeasible) => {
            return Ok(IlpResult {
                status: IlpStatus::Infeasible,
                assignment: None,
                objective: f64::NAN,
                nodes: 1,
            })
        }
        Err(e) => return Err(IlpError::Solver(e.to_string())),
    };

    let integral_objective = p
        .objective
        .iter()
        .all(|c| (c - c.round()).abs() < 1e-12)
        && (p.objective_offset - p.objective_offset.round()).abs() < 1e-12;
    let mut search = Search {
        original: p,
        scaled: &scaled,
        vars,
        incumbent: None,
        fixed: vec![None; scaled.num_vars()],
        nodes: 0,
        deadline: time_budget.map(|d| Instant::now() + d),
        timed_out: false,
        integral_objective,
        feasibility_only: p.sense == Sense::Feasibility,
    };
    search.dive(root)?;

    let status = if search.timed_out {
        IlpStatus::Timeout
    } else if search.incumbent.is_some() {
        IlpStatus::Optimal
    } else {
        IlpStatus::Infeasible
    };
    let (assignment, objective) = match search.incumbent {
        Some((a, o)) => (Some(a), o),
        None => (None, f64::NAN),
    };
    Ok(IlpResult {
        status,
        assignment,
        objective,
        nodes: search.nodes,
    })
}
