use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::MilpError;

/// Handle to a variable inside a [`MilpModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

/// A linear expression `sum(coef * var) + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(mut self, var: VarId, coef: f64) -> Self {
        self.add_term(var, coef);
        self
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_scaled(&mut self, other: &LinExpr, factor: f64) {
        for &(v, c) in &other.terms {
            self.add_term(v, c * factor);
        }
        self.constant += other.constant * factor;
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn normalized(&self) -> LinExpr {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        LinExpr {
            terms: out,
            constant: self.constant,
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(v, c)| c * values[v.0])
            .sum::<f64>()
            + self.constant
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::new().term(v, 1.0)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        self.add_scaled(&rhs, 1.0);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        })
    }
}

/// `terms cmp rhs`; constants are folded into `rhs` on insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violates the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.cmp {
            Cmp::Le => (lhs - self.rhs).max(0.0),
            Cmp::Ge => (self.rhs - lhs).max(0.0),
            Cmp::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

/// Per-solve knobs. `cutoff` is an early-stop threshold: the solve returns as
/// soon as an incumbent strictly better than it is known.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveParams {
    pub time_limit: Option<f64>,
    pub cutoff: Option<f64>,
    pub mip_gap: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            time_limit: None,
            cutoff: None,
            mip_gap: 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MilpModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub sense: ObjSense,
    pub objective: LinExpr,
    pub params: SolveParams,
    /// Optional full assignment handed to the solver as a starting incumbent.
    pub warm_start: Option<Vec<f64>>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, sense: ObjSense) -> Self {
        MilpModel {
            name: name.into(),
            vars: Vec::new(),
            constraints: Vec::new(),
            sense,
            objective: LinExpr::new(),
            params: SolveParams::default(),
            warm_start: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lo: f64, hi: f64) -> VarId {
        let (lo, hi) = match kind {
            VarKind::Binary => (lo.max(0.0), hi.min(1.0)),
            _ => (lo, hi),
        };
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lo,
            hi,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lo, hi)
    }

    pub fn integer(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> VarId {
        self.add_var(name, VarKind::Integer, lo, hi)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, expr: LinExpr, cmp: Cmp, rhs: f64) {
        let expr = expr.normalized();
        self.constraints.push(Constraint {
            name: name.into(),
            terms: expr.terms,
            cmp,
            rhs: rhs - expr.constant,
        });
    }

    pub fn add_le(&mut self, name: impl Into<String>, expr: LinExpr, rhs: f64) {
        self.add_constraint(name, expr, Cmp::Le, rhs)
    }

    pub fn add_ge(&mut self, name: impl Into<String>, expr: LinExpr, rhs: f64) {
        self.add_constraint(name, expr, Cmp::Ge, rhs)
    }

    pub fn add_eq(&mut self, name: impl Into<String>, expr: LinExpr, rhs: f64) {
        self.add_constraint(name, expr, Cmp::Eq, rhs)
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        self.objective = expr.normalized();
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.eval(values)
    }

    /// Structural check run before handing the model to a solver.
    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.vars.len();
        for (i, v) in self.vars.iter().enumerate() {
            if v.lo.is_nan() || v.hi.is_nan() || v.lo > v.hi {
                return Err(MilpError::Malformed(format!(
                    "variable {} ({}) has bounds [{}, {}]",
                    i, v.name, v.lo, v.hi
                )));
            }
        }
        let check_terms = |what: &str, terms: &[(VarId, f64)]| -> Result<(), MilpError> {
            for &(var, c) in terms {
                if var.0 >= n {
                    return Err(MilpError::Malformed(format!(
                        "{what} references undeclared variable #{}",
                        var.0
                    )));
                }
                if !c.is_finite() {
                    return Err(MilpError::Malformed(format!(
                        "{what} has non-finite coefficient on {}",
                        self.vars[var.0].name
                    )));
                }
            }
            Ok(())
        };
        for c in &self.constraints {
            check_terms(&format!("constraint {}", c.name), &c.terms)?;
            if c.rhs.is_nan() {
                return Err(MilpError::Malformed(format!("constraint {} has NaN rhs", c.name)));
            }
        }
        check_terms("objective", &self.objective.terms)?;
        if let Some(ws) = &self.warm_start {
            if ws.len() != n {
                return Err(MilpError::Malformed(format!(
                    "warm start has {} values for {} variables",
                    ws.len(),
                    n
                )));
            }
        }
        if let Some(t) = self.params.time_limit {
            if !(t > 0.0) {
                return Err(MilpError::Malformed(format!("time limit {t} is not positive")));
            }
        }
        Ok(())
    }

    /// Re-evaluates bounds, integrality and every constraint at `values`.
    /// Returns one entry per violated item; empty means feasible within `tol`.
    pub fn check_feasibility(&self, values: &[f64], tol: f64) -> Vec<FeasibilityViolation> {
        let mut out = Vec::new();
        if values.len() != self.vars.len() {
            out.push(FeasibilityViolation {
                item: "assignment".into(),
                amount: f64::INFINITY,
            });
            return out;
        }
        for (v, &x) in self.vars.iter().zip(values) {
            let amount = (v.lo - x).max(x - v.hi).max(0.0);
            if amount > tol || x.is_nan() {
                out.push(FeasibilityViolation {
                    item: format!("bounds of {}", v.name),
                    amount,
                });
            }
            if v.kind.is_integral() {
                let frac = (x - x.round()).abs();
                if frac > tol {
                    out.push(FeasibilityViolation {
                        item: format!("integrality of {}", v.name),
                        amount: frac,
                    });
                }
            }
        }
        for c in &self.constraints {
            let amount = c.violation(values);
            if amount > tol || amount.is_nan() {
                out.push(FeasibilityViolation {
                    item: format!("constraint {}", c.name),
                    amount,
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityViolation {
    pub item: String,
    pub amount: f64,
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {:.3e}", self.item, self.amount)
    }
}
