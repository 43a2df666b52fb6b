//! Dense simplex method in dictionary form with Bland's rule.
//!
//! The dictionary keeps one row per constraint and one column per nonbasic
//! variable, so a problem with many `<=` rows and few variables (a
//! discretised continuum of constraints) stays small: slack columns are
//! never materialised.

use std::cmp::Ordering;

use super::{LinearProgram, LpError, LpSolution, LpStatus, Sense, VarBound};
use crate::scalar::Scalar;

/// Hard stop for the float path, where rounding could in principle defeat
/// Bland's termination argument.
const MAX_ITERATIONS: usize = 1_000_000;

/// Float mode rebuilds the dictionary from the original data this often, so
/// rounding does not accumulate over long pivot sequences.
const REFRESH_EVERY: usize = 16;

/// Smallest pivot element accepted in float mode.
const FLOAT_PIVOT_TOL: f64 = 1e-9;

/// Entering-variable rule. Both use Bland's lowest-index choice for the
/// leaving variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Lowest-index improving variable enters, always.
    Bland,
    /// Largest reduced cost enters; from a degenerate pivot until the next
    /// strict improvement, Bland's rule is used instead. Cycling needs an
    /// unbroken run of degenerate pivots, which Bland's rule cannot sustain
    /// forever, and strict improvements never revisit a basis.
    #[default]
    Hybrid,
}

/// Solves `lp` (a maximisation) with [`PivotRule::Hybrid`]. Arithmetic is
/// that of `T`: exact for [`crate::Rational`], tolerance-based for `f64`.
pub fn simplex_solve<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    simplex_solve_with(lp, PivotRule::default())
}

pub fn simplex_solve_with<T: Scalar>(
    lp: &LinearProgram<T>,
    rule: PivotRule,
) -> Result<LpSolution<T>, LpError> {
    let canon = Canonical::from_lp(lp);
    let mut dict = Dictionary::new(&canon, rule);
    let mut iterations = 0;

    if dict.b.iter().any(|b| b.is_negative()) {
        match dict.phase_one(&canon, &mut iterations)? {
            true => {}
            false => {
                return Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    value: None,
                    point: Vec::new(),
                    iterations,
                })
            }
        }
    }

    if !dict.run(&mut iterations, Some(&canon))? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: None,
            point: Vec::new(),
            iterations,
        });
    }

    let split = dict.primal(canon.columns);
    let point = canon.recover(&split);
    let value = lp
        .objective()
        .iter()
        .zip(&point)
        .fold(T::zero(), |acc, (c, x)| acc.add(&c.mul(x)));
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: Some(value),
        point,
        iterations,
    })
}

/// `max c.x  s.t.  A x <= b, x >= 0`, with free variables split in two.
struct Canonical<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    c: Vec<T>,
    columns: usize,
    /// For each original variable, its column and (if free) the column of
    /// its negative part.
    map: Vec<(usize, Option<usize>)>,
}

impl<T: Scalar> Canonical<T> {
    fn from_lp(lp: &LinearProgram<T>) -> Self {
        let mut map = Vec::with_capacity(lp.num_vars());
        let mut columns = 0;
        for bound in lp.bounds() {
            match bound {
                VarBound::NonNegative => {
                    map.push((columns, None));
                    columns += 1;
                }
                VarBound::Free => {
                    map.push((columns, Some(columns + 1)));
                    columns += 2;
                }
            }
        }
        let expand = |row: &[T]| -> Vec<T> {
            let mut out = vec![T::zero(); columns];
            for (x, &(pos, neg)) in row.iter().zip(&map) {
                out[pos] = x.clone();
                if let Some(neg) = neg {
                    out[neg] = x.neg();
                }
            }
            out
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        for ((row, rhs), sense) in lp.rows().iter().zip(lp.rhs()).zip(lp.senses()) {
            let row = expand(row);
            if matches!(sense, Sense::Le | Sense::Eq) {
                a.push(row.clone());
                b.push(rhs.clone());
            }
            if matches!(sense, Sense::Ge | Sense::Eq) {
                a.push(row.iter().map(T::neg).collect());
                b.push(rhs.neg());
            }
        }
        let c = expand(lp.objective());
        Canonical {
            a,
            b,
            c,
            columns,
            map,
        }
    }

    fn recover(&self, split: &[T]) -> Vec<T> {
        self.map
            .iter()
            .map(|&(pos, neg)| match neg {
                Some(neg) => split[pos].sub(&split[neg]),
                None => split[pos].clone(),
            })
            .collect()
    }
}

/// Basic variables `B_i = b_i - sum_j a_ij x_{N_j}`; objective
/// `z = v + sum_j c_j x_{N_j}`. Variable ids: structural columns first, then
/// one slack per row, then the phase-one auxiliary.
struct Dictionary<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    c: Vec<T>,
    v: T,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    rule: PivotRule,
    /// Consecutive pivots that left the objective unchanged.
    degenerate_run: usize,
    /// Set when phase one drops a redundant row; disables refreshing.
    rows_removed: bool,
}

impl<T: Scalar> Dictionary<T> {
    fn new(canon: &Canonical<T>, rule: PivotRule) -> Self {
        let rows = canon.a.len();
        Dictionary {
            a: canon.a.clone(),
            b: canon.b.clone(),
            c: canon.c.clone(),
            v: T::zero(),
            basic: (canon.columns..canon.columns + rows).collect(),
            nonbasic: (0..canon.columns).collect(),
            rule,
            degenerate_run: 0,
            rows_removed: false,
        }
    }

    fn pivot(&mut self, leave: usize, enter: usize) {
        let inv = T::one().div(&self.a[leave][enter]);
        let pivot_row: Vec<T> = self.a[leave]
            .iter()
            .enumerate()
            .map(|(j, x)| if j == enter { inv.clone() } else { x.mul(&inv) })
            .collect();
        let pivot_b = self.b[leave].mul(&inv);

        for (i, row) in self.a.iter_mut().enumerate() {
            if i == leave {
                continue;
            }
            let f = row[enter].clone();
            if exactly_zero(&f) {
                continue;
            }
            for (j, x) in row.iter_mut().enumerate() {
                if j == enter {
                    *x = f.mul(&pivot_row[enter]).neg();
                } else if !exactly_zero(&pivot_row[j]) {
                    *x = x.sub(&f.mul(&pivot_row[j]));
                }
            }
            self.b[i] = self.b[i].sub(&f.mul(&pivot_b));
        }

        let ce = self.c[enter].clone();
        if !exactly_zero(&ce) {
            self.v = self.v.add(&ce.mul(&pivot_b));
            for (j, cj) in self.c.iter_mut().enumerate() {
                if j == enter {
                    *cj = ce.mul(&pivot_row[enter]).neg();
                } else if !exactly_zero(&pivot_row[j]) {
                    *cj = cj.sub(&ce.mul(&pivot_row[j]));
                }
            }
        }

        self.a[leave] = pivot_row;
        self.b[leave] = pivot_b;
        std::mem::swap(&mut self.basic[leave], &mut self.nonbasic[enter]);
    }

    /// Pivots to optimality. Returns `false` if the objective is unbounded.
    /// With `refresh` set, float mode periodically rebuilds the dictionary
    /// and always re-checks optimality on a freshly rebuilt one.
    fn run(
        &mut self,
        iterations: &mut usize,
        refresh: Option<&Canonical<T>>,
    ) -> Result<bool, LpError> {
        let refresh = refresh.filter(|_| !T::EXACT && !self.rows_removed);
        let mut fresh = false;
        loop {
            let improving = (0..self.nonbasic.len()).filter(|&j| self.c[j].is_positive());
            let enter = if self.rule == PivotRule::Bland || self.degenerate_run > 0 {
                // Bland: lowest-id improving variable enters.
                improving.min_by_key(|&j| self.nonbasic[j])
            } else {
                improving.max_by(|&x, &y| {
                    self.c[x]
                        .partial_cmp(&self.c[y])
                        .unwrap_or(Ordering::Equal)
                        .then(self.nonbasic[y].cmp(&self.nonbasic[x]))
                })
            };
            let Some(enter) = enter else {
                match refresh {
                    Some(canon) if !fresh && self.refresh(canon) => {
                        fresh = true;
                        continue;
                    }
                    _ => return Ok(true),
                }
            };
            // Lowest-id variable among the tightest rows leaves.
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.a.len() {
                let coef = &self.a[i][enter];
                if !coef.is_positive() || !T::EXACT && coef.to_f64() <= FLOAT_PIVOT_TOL {
                    continue;
                }
                let ratio = self.b[i].div(coef);
                let better = match &leave {
                    None => true,
                    Some((l, best)) => match ratio.partial_cmp(best) {
                        Some(Ordering::Less) => true,
                        Some(Ordering::Equal) => self.basic[i] < self.basic[*l],
                        _ => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((leave, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.is_zero() {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(leave, enter);
            *iterations += 1;
            fresh = false;
            if *iterations > MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
            if let Some(canon) = refresh {
                if *iterations % REFRESH_EVERY == 0 {
                    fresh = self.refresh(canon);
                }
            }
        }
    }

    /// Recomputes every dictionary entry for the current basis from the
    /// original data (phase two only). Basic structural variables are
    /// pinned down by the rows whose slacks are nonbasic; that square system
    /// is at most `min(rows, columns)` wide. Returns `false`, leaving the
    /// dictionary untouched, if the system is numerically singular.
    fn refresh(&mut self, canon: &Canonical<T>) -> bool {
        let cols = canon.columns;
        let basic_structural: Vec<usize> =
            self.basic.iter().copied().filter(|&id| id < cols).collect();
        let tight: Vec<usize> = self
            .nonbasic
            .iter()
            .filter(|&&id| id >= cols)
            .map(|&id| id - cols)
            .collect();
        if tight.len() != basic_structural.len() {
            return false;
        }
        let k = tight.len();
        let n = self.nonbasic.len();

        // Solve M X = [R | b_T] with M = A[T][B_S] and R the coefficients of
        // the nonbasic variables in the tight rows.
        let mut system: Vec<Vec<f64>> = tight
            .iter()
            .enumerate()
            .map(|(t, &row)| {
                let mut line: Vec<f64> = basic_structural
                    .iter()
                    .map(|&j| canon.a[row][j].to_f64())
                    .collect();
                line.extend(self.nonbasic.iter().map(|&id| {
                    if id < cols {
                        canon.a[row][id].to_f64()
                    } else if id - cols == tight[t] {
                        1.0
                    } else {
                        0.0
                    }
                }));
                line.push(canon.b[row].to_f64());
                line
            })
            .collect();
        if !gauss_jordan(&mut system, k) {
            return false;
        }
        if system.iter().flatten().any(|x| !x.is_finite()) {
            return false;
        }
        let solved: Vec<&[f64]> = system.iter().map(|line| &line[k..]).collect();

        let position: std::collections::HashMap<usize, usize> = basic_structural
            .iter()
            .enumerate()
            .map(|(i, &j)| (j, i))
            .collect();
        for (i, &id) in self.basic.iter().enumerate() {
            let (row, rhs): (Vec<f64>, f64) = if let Some(&p) = position.get(&id) {
                (solved[p][..n].to_vec(), solved[p][n])
            } else {
                let r = id - cols;
                let orig = &canon.a[r];
                let mut row: Vec<f64> = self
                    .nonbasic
                    .iter()
                    .map(|&nb| if nb < cols { orig[nb].to_f64() } else { 0.0 })
                    .collect();
                let mut rhs = canon.b[r].to_f64();
                for (p, &j) in basic_structural.iter().enumerate() {
                    let w = orig[j].to_f64();
                    if w != 0.0 {
                        rhs -= w * solved[p][n];
                        for (x, s) in row.iter_mut().zip(solved[p]) {
                            *x -= w * s;
                        }
                    }
                }
                (row, rhs)
            };
            self.a[i] = row.into_iter().map(lift).collect();
            self.b[i] = lift(rhs);
        }

        let mut c: Vec<f64> = self
            .nonbasic
            .iter()
            .map(|&nb| if nb < cols { canon.c[nb].to_f64() } else { 0.0 })
            .collect();
        let mut v = 0.0;
        for (p, &j) in basic_structural.iter().enumerate() {
            let w = canon.c[j].to_f64();
            if w != 0.0 {
                v += w * solved[p][n];
                for (x, s) in c.iter_mut().zip(solved[p]) {
                    *x -= w * s;
                }
            }
        }
        self.c = c.into_iter().map(lift).collect();
        self.v = lift(v);
        true
    }

    /// Finds a feasible dictionary via the auxiliary problem
    /// `max -x0  s.t.  A x - x0 <= b`. Returns `false` if none exists.
    fn phase_one(&mut self, canon: &Canonical<T>, iterations: &mut usize) -> Result<bool, LpError> {
        let aux = canon.columns + canon.a.len();
        for row in &mut self.a {
            row.push(T::one().neg());
        }
        self.nonbasic.push(aux);
        let aux_col = self.nonbasic.len() - 1;
        self.c = vec![T::zero(); self.nonbasic.len()];
        self.c[aux_col] = T::one().neg();
        self.v = T::zero();

        let most_negative = (0..self.b.len())
            .min_by(|&i, &j| self.b[i].partial_cmp(&self.b[j]).unwrap_or(Ordering::Equal))
            .expect("at least one row");
        self.pivot(most_negative, aux_col);
        *iterations += 1;
        self.run(iterations, None)?;
        if self.v.is_negative() {
            return Ok(false);
        }

        // Drive the auxiliary variable out of the basis if it is still there.
        if let Some(row) = self.basic.iter().position(|&id| id == aux) {
            let col = (0..self.nonbasic.len())
                .filter(|&j| !self.a[row][j].is_zero())
                .max_by(|&x, &y| {
                    let ax = self.a[row][x].to_f64().abs();
                    let ay = self.a[row][y].to_f64().abs();
                    ax.total_cmp(&ay)
                });
            match col {
                Some(col) => {
                    self.pivot(row, col);
                    *iterations += 1;
                }
                // Row reads x0 = b_row; with b_row = 0 it is redundant.
                None => {
                    self.rows_removed = true;
                    self.a.remove(row);
                    self.b.remove(row);
                    self.basic.remove(row);
                }
            }
        }
        let col = self
            .nonbasic
            .iter()
            .position(|&id| id == aux)
            .expect("auxiliary is nonbasic");
        for row in &mut self.a {
            row.remove(col);
        }
        self.nonbasic.remove(col);

        // Re-express the true objective over the current nonbasics.
        self.c = vec![T::zero(); self.nonbasic.len()];
        self.v = T::zero();
        for (var, cost) in canon.c.iter().enumerate() {
            if exactly_zero(cost) {
                continue;
            }
            if let Some(j) = self.nonbasic.iter().position(|&id| id == var) {
                self.c[j] = self.c[j].add(cost);
            } else if let Some(i) = self.basic.iter().position(|&id| id == var) {
                self.v = self.v.add(&cost.mul(&self.b[i]));
                for j in 0..self.nonbasic.len() {
                    self.c[j] = self.c[j].sub(&cost.mul(&self.a[i][j]));
                }
            }
        }
        Ok(true)
    }

    fn primal(&self, columns: usize) -> Vec<T> {
        let mut x = vec![T::zero(); columns];
        for (i, &id) in self.basic.iter().enumerate() {
            if id < columns {
                x[id] = self.b[i].clone();
            }
        }
        x
    }
}

fn lift<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite after the refresh check")
}

/// Reduces the first `k` columns of `m` (a `k`-row augmented matrix) to the
/// identity with partial pivoting. Returns `false` if a pivot is tiny.
fn gauss_jordan(m: &mut [Vec<f64>], k: usize) -> bool {
    for col in 0..k {
        let (piv, best) = (col..k)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if best < 1e-12 {
            return false;
        }
        m.swap(col, piv);
        let inv = 1.0 / m[col][col];
        for x in m[col].iter_mut() {
            *x *= inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col] == 0.0 {
                continue;
            }
            let f = row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
    }
    true
}

fn exactly_zero<T: Scalar>(x: &T) -> bool {
    if T::EXACT {
        x.is_zero()
    } else {
        x.to_f64() == 0.0
    }
}
