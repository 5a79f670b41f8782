//! Gaussian elimination of a Z2-graded complex.
//!
//! Each step picks an entry `a = ⟨d x, y⟩ ≠ 0`, splits off the acyclic pair
//! `x → d x` and continues on the complement with the corrected differential
//! `d'(u) = d(u) − a⁻¹ ⟨d u, y⟩ d(x)`. When nothing is left to cancel the
//! survivors form a basis of cohomology. The splitting changes the basis by a
//! unitriangular matrix up to the factor `a`, so the product of those factors
//! is the image of the standard wedge under `det C ≅ det H` relative to the
//! survivors.

use std::collections::{BTreeSet, HashSet};

use num_traits::{One, Signed, Zero};

use crate::graded::Parity;
use crate::linalg::{Rational, SparseMatrix, Vector};

type Column = Vec<(usize, Rational)>;

#[derive(Debug, Clone)]
struct Step {
    x: usize,
    y: usize,
    pivot: Rational,
    column: Column,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    dim: usize,
    steps: Vec<Step>,
    /// `(step, coefficient)` corrections applied to each basis element.
    corrections: Vec<Vec<(usize, Rational)>>,
    survivors: Vec<usize>,
    scalar: Rational,
}

fn axpy(target: &Column, c: &Rational, x: &Column) -> Column {
    // target - c * x, both sorted by row.
    let mut out = Vec::with_capacity(target.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < x.len() {
        let ti = target.get(i).map(|e| e.0);
        let xj = x.get(j).map(|e| e.0);
        match (ti, xj) {
            (Some(a), Some(b)) if a == b => {
                let v = &target[i].1 - c * &x[j].1;
                if !v.is_zero() {
                    out.push((a, v));
                }
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => {
                out.push(target[i].clone());
                i += 1;
            }
            (Some(_), None) => {
                out.push(target[i].clone());
                i += 1;
            }
            (_, Some(b)) => {
                out.push((b, -(c * &x[j].1)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

impl Reduction {
    /// Reduces the complex with differential `d` (square, odd with respect to
    /// `parities`). Pivots follow a Markowitz-style rule on the current
    /// sparsity pattern with ties broken by index, so the result is
    /// deterministic.
    pub fn new(d: &SparseMatrix, parities: &[Parity]) -> Reduction {
        let n = d.cols();
        assert_eq!(d.rows(), n);
        let mut cols: Vec<Column> = (0..n).map(|j| d.column(j).to_vec()).collect();
        let mut rows: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for (j, col) in cols.iter().enumerate() {
            for (i, _) in col {
                rows[*i].insert(j);
            }
        }
        let mut queue: BTreeSet<(usize, usize)> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(j, c)| (c.len(), j))
            .collect();
        let mut active = vec![true; n];
        let mut corrections: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        let mut steps = Vec::new();
        let mut scalar = Rational::one();

        let set_column = |j: usize,
                              new: Column,
                              cols: &mut Vec<Column>,
                              rows: &mut Vec<HashSet<usize>>,
                              queue: &mut BTreeSet<(usize, usize)>| {
            let old = std::mem::replace(&mut cols[j], new);
            if !old.is_empty() {
                queue.remove(&(old.len(), j));
            }
            for (i, _) in &old {
                rows[*i].remove(&j);
            }
            for (i, _) in &cols[j] {
                rows[*i].insert(j);
            }
            if !cols[j].is_empty() {
                queue.insert((cols[j].len(), j));
            }
        };

        while let Some(&(_, x)) = queue.iter().next() {
            let (y, pivot) = cols[x]
                .iter()
                .min_by_key(|(i, v)| (rows[*i].len(), !v.abs().is_one(), *i))
                .map(|(i, v)| (*i, v.clone()))
                .expect("queued columns are nonempty");
            let col_x = cols[x].clone();
            let step_idx = steps.len();
            let mut touched: Vec<usize> = rows[y].iter().copied().filter(|&u| u != x).collect();
            touched.sort_unstable();
            for u in touched {
                let entry = cols[u]
                    .binary_search_by_key(&y, |e| e.0)
                    .map(|p| cols[u][p].1.clone())
                    .expect("row index is consistent");
                let c = entry / &pivot;
                let updated = axpy(&cols[u], &c, &col_x);
                set_column(u, updated, &mut cols, &mut rows, &mut queue);
                corrections[u].push((step_idx, c));
            }
            // Drop x and y as columns and as rows.
            set_column(x, Vec::new(), &mut cols, &mut rows, &mut queue);
            set_column(y, Vec::new(), &mut cols, &mut rows, &mut queue);
            for gone in [x, y] {
                let mut users: Vec<usize> = rows[gone].iter().copied().collect();
                users.sort_unstable();
                for v in users {
                    let pruned: Column = cols[v].iter().filter(|e| e.0 != gone).cloned().collect();
                    set_column(v, pruned, &mut cols, &mut rows, &mut queue);
                }
            }
            active[x] = false;
            active[y] = false;
            scalar *= match parities[x] {
                Parity::Even => pivot.clone(),
                Parity::Odd => pivot.recip(),
            };
            steps.push(Step {
                x,
                y,
                pivot,
                column: col_x,
            });
        }

        let survivors = (0..n).filter(|&i| active[i]).collect();
        Reduction {
            dim: n,
            steps,
            corrections,
            survivors,
            scalar,
        }
    }

    /// Basis indices whose classes form the computed basis of cohomology.
    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    /// Image of the standard wedge of `C` relative to the survivor wedge.
    pub fn scalar(&self) -> &Rational {
        &self.scalar
    }

    pub fn rank_of_differential(&self) -> usize {
        self.steps.len()
    }

    /// Coordinates of the class of the cocycle `v` in the survivor basis.
    pub fn class_coordinates(&self, v: &[Rational]) -> Vector {
        let mut v = v.to_vec();
        for step in &self.steps {
            let c = &v[step.y] / &step.pivot;
            if !c.is_zero() {
                for (i, a) in &step.column {
                    v[*i] -= &c * a;
                }
            }
            v[step.x] = Rational::zero();
            v[step.y] = Rational::zero();
        }
        self.survivors.iter().map(|&i| v[i].clone()).collect()
    }

    /// Cocycle representatives of the survivor classes, in survivor order.
    pub fn representatives(&self) -> Vec<Vector> {
        // Every dependency of x_t is some x_{t'} with t' < t.
        let mut needed = vec![false; self.steps.len()];
        let mut stack: Vec<usize> = self
            .survivors
            .iter()
            .flat_map(|&u| self.corrections[u].iter().map(|(t, _)| *t))
            .collect();
        while let Some(t) = stack.pop() {
            if needed[t] {
                continue;
            }
            needed[t] = true;
            stack.extend(self.corrections[self.steps[t].x].iter().map(|(t2, _)| *t2));
        }
        let mut memo: Vec<Option<Vec<(usize, Rational)>>> = vec![None; self.steps.len()];
        let combine = |base: usize, corr: &[(usize, Rational)], memo: &Vec<Option<Vec<(usize, Rational)>>>| {
            let mut acc: std::collections::BTreeMap<usize, Rational> = Default::default();
            acc.insert(base, Rational::one());
            for (t, c) in corr {
                for (i, x) in memo[*t].as_ref().expect("dependencies precede") {
                    *acc.entry(*i).or_insert_with(Rational::zero) -= c * x;
                }
            }
            acc.into_iter().filter(|(_, x)| !x.is_zero()).collect::<Vec<_>>()
        };
        for t in 0..self.steps.len() {
            if needed[t] {
                let x = self.steps[t].x;
                let rep = combine(x, &self.corrections[x], &memo);
                memo[t] = Some(rep);
            }
        }
        self.survivors
            .iter()
            .map(|&u| {
                let sparse = combine(u, &self.corrections[u], &memo);
                let mut v = vec![Rational::zero(); self.dim];
                for (i, x) in sparse {
                    v[i] = x;
                }
                v
            })
            .collect()
    }
}
