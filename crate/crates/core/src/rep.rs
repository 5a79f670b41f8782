//! Representations up to homotopy on an ordered simplicial complex: graded
//! fibers over the vertices with structure operators `ω_k` on the
//! k-simplices, the twisted cochain complex they define, the induced local
//! system on fiber cohomology, duals, direct sums and morphisms.
//!
//! Sign table of the differential on a cochain `F` whose values have fiber
//! parity `|e|`, evaluated on a k-simplex `σ`:
//!
//! `(DF)(σ) = Σ_j (−1)^{j|e|} ω_j(back_j σ) F(front_{k−j} σ) + (−1)^{|e|} Σ_{i≥1} (−1)^i F(d_i σ)`
//!
//! with `ω_0 = ∂`. The `d_0` face is carried by the `j = 1` term, so the
//! trivial representation reproduces the simplicial coboundary. Morphisms use
//! the same `(−1)^{j|e|}` weights.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::complexes::{ComplexError, FilteredComplex, Z2Complex};
use crate::graded::{GradedSpace, Parity};
use crate::linalg::{is_zero_vec, Matrix, Rational, SparseMatrix, Vector};
use crate::simplicial::{CochainLayout, OrderedComplex, Simplex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepError {
    #[error("expected {expected} fibers, got {got}")]
    FiberCount { expected: usize, got: usize },
    #[error("operator on {simplex:?} is not a simplex of the complex")]
    UnknownSimplex { simplex: Simplex },
    #[error("operator on {simplex:?} has shape {got:?}, expected {expected:?}")]
    Shape {
        simplex: Simplex,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("operator on {simplex:?} has the wrong internal parity")]
    Parity { simplex: Simplex },
    #[error("flatness fails on {simplex:?}: residual {residual}")]
    Violation { simplex: Simplex, residual: String },
    #[error("not a local system: {0}")]
    NotLocalSystem(String),
    #[error("induced map on fiber cohomology along {edge:?} is not invertible")]
    InducedMapNotInvertible { edge: Simplex },
    #[error("automatic dual needs ω_k = 0 for k ≥ 2 and invertible ω₁; supply dual data")]
    DualDataRequired,
    #[error("dual data incompatible at {location}: {residual}")]
    DualIncompatible { location: String, residual: String },
    #[error("representations live over different complexes")]
    BaseMismatch,
    #[error("morphism is not a chain map at {simplex:?}: residual {residual}")]
    NotChainMap { simplex: Simplex, residual: String },
    #[error("no structure operator solves the flatness equation on {simplex:?}")]
    Unsolvable { simplex: Simplex },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

fn block_parity_ok(m: &Matrix, rows: (usize, usize), cols: (usize, usize), parity: Parity) -> bool {
    for i in 0..m.rows() {
        let pi = if i < rows.0 { Parity::Even } else { Parity::Odd };
        for j in 0..m.cols() {
            let pj = if j < cols.0 { Parity::Even } else { Parity::Odd };
            if !m.get(i, j).is_zero() && pi.add(pj) != parity {
                return false;
            }
        }
    }
    true
}

fn describe(m: &Matrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let r: Vec<String> = m.row(i).iter().map(crate::linalg::format_rational).collect();
            format!("[{}]", r.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Fibers `(even, odd)` per vertex and structure operators keyed by simplex.
/// The operator on a k-simplex maps the fiber at its last vertex to the fiber
/// at its first vertex, with internal parity `k + 1 mod 2`. Missing keys are
/// zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepUH {
    fibers: Vec<(usize, usize)>,
    operators: BTreeMap<Simplex, Matrix>,
}

impl RepUH {
    pub fn new(
        k: &OrderedComplex,
        fibers: Vec<(usize, usize)>,
        operators: BTreeMap<Simplex, Matrix>,
    ) -> Result<Self, RepError> {
        if fibers.len() != k.vertex_count() {
            return Err(RepError::FiberCount {
                expected: k.vertex_count(),
                got: fibers.len(),
            });
        }
        let mut kept = BTreeMap::new();
        for (s, m) in operators {
            if !k.contains(&s) {
                return Err(RepError::UnknownSimplex { simplex: s });
            }
            let (r, c) = (fibers[s[0]], fibers[*s.last().expect("nonempty")]);
            let expected = (r.0 + r.1, c.0 + c.1);
            if (m.rows(), m.cols()) != expected {
                return Err(RepError::Shape {
                    simplex: s,
                    expected,
                    got: (m.rows(), m.cols()),
                });
            }
            if !block_parity_ok(&m, r, c, Parity::from_int(s.len())) {
                return Err(RepError::Parity { simplex: s });
            }
            if !m.is_zero() {
                kept.insert(s, m);
            }
        }
        Ok(RepUH { fibers, operators: kept })
    }

    /// Constant fiber `ℝ^{even|odd}` with ω₁ = identity on every edge.
    pub fn trivial(k: &OrderedComplex, even: usize, odd: usize) -> Self {
        let ops = k
            .simplices(1)
            .iter()
            .map(|e| (e.clone(), Matrix::identity(even + odd)))
            .collect();
        RepUH::new(k, vec![(even, odd); k.vertex_count()], ops).expect("well formed")
    }

    pub fn fibers(&self) -> &[(usize, usize)] {
        &self.fibers
    }

    pub fn fiber_dim(&self, v: usize) -> usize {
        self.fibers[v].0 + self.fibers[v].1
    }

    pub fn operators(&self) -> &BTreeMap<Simplex, Matrix> {
        &self.operators
    }

    pub fn operator(&self, s: &[usize]) -> Option<&Matrix> {
        self.operators.get(s)
    }

    /// The operator on `s`, or zero.
    pub fn operator_or_zero(&self, s: &[usize]) -> Matrix {
        self.operators.get(s).cloned().unwrap_or_else(|| {
            Matrix::zeros(self.fiber_dim(s[0]), self.fiber_dim(*s.last().expect("nonempty")))
        })
    }

    /// Largest k with a nonzero ω_k.
    pub fn max_degree(&self) -> usize {
        self.operators.keys().map(|s| s.len() - 1).max().unwrap_or(0)
    }

    pub fn layout(&self, k: &OrderedComplex) -> CochainLayout {
        CochainLayout::new(k, &self.fibers)
    }

    /// Checks `∂ = 0`, no operators above degree one, invertible edge maps and
    /// the cocycle condition on triangles.
    pub fn check_local_system(&self, k: &OrderedComplex) -> Result<(), RepError> {
        for s in self.operators.keys() {
            if s.len() != 2 {
                return Err(RepError::NotLocalSystem(format!("nonzero operator on {s:?}")));
            }
        }
        for e in k.simplices(1) {
            let m = self.operator_or_zero(e);
            if !m.is_square() || m.det().map_or(true, |d| d.is_zero()) {
                return Err(RepError::NotLocalSystem(format!("edge map on {e:?} is not invertible")));
            }
        }
        for t in k.simplices(2) {
            let lhs = self.operator_or_zero(&[t[0], t[1]]).mul(&self.operator_or_zero(&[t[1], t[2]]));
            let rhs = self.operator_or_zero(&[t[0], t[2]]);
            if lhs != rhs {
                return Err(RepError::NotLocalSystem(format!("cocycle condition fails on {t:?}")));
            }
        }
        Ok(())
    }

    pub fn is_local_system(&self, k: &OrderedComplex) -> bool {
        self.check_local_system(k).is_ok()
    }

    /// Edge holonomy `hol(a, b)` transporting the fiber at `b` to `a` for
    /// vertices of a common simplex, `a ≤ b`.
    pub fn holonomy(&self, a: usize, b: usize) -> Matrix {
        if a == b {
            Matrix::identity(self.fiber_dim(a))
        } else {
            self.operator_or_zero(&[a, b])
        }
    }
}

fn sign(negative: bool) -> Rational {
    if negative {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Adds the block `s · m` at rows of simplex `row_idx`, columns of `col_idx`,
/// with `s = (−1)^{j · parity(column)}` for the operator term of weight `j`.
fn add_block(
    d: &mut SparseMatrix,
    layout: &CochainLayout,
    row_idx: usize,
    col_idx: usize,
    col_vertex: usize,
    m: &Matrix,
    j: usize,
    extra: bool,
) {
    for c in 0..m.cols() {
        let odd = layout.fiber_parity(col_vertex, c) == Parity::Odd;
        let s = sign((j % 2 == 1 && odd) ^ extra);
        for r in 0..m.rows() {
            let x = m.get(r, c);
            if !x.is_zero() {
                d.add_entry(layout.offsets[row_idx] + r, layout.offsets[col_idx] + c, x * &s);
            }
        }
    }
}

/// The operator `D` on `⊕_Δ Π^{dim Δ} E_{v₀(Δ)}` without any validation.
pub fn differential(k: &OrderedComplex, e: &RepUH) -> SparseMatrix {
    let layout = e.layout(k);
    let mut d = SparseMatrix::zeros(layout.total, layout.total);
    for (t, sigma) in k.all().iter().enumerate() {
        let m = sigma.len() - 1;
        for j in 0..=m {
            if let Some(op) = e.operator(&sigma[..=j]) {
                let src = k.index_of(&sigma[j..]).expect("faces are present");
                add_block(&mut d, &layout, t, src, sigma[j], op, j, false);
            }
        }
        let v0 = sigma[0];
        let dim = e.fiber_dim(v0);
        for i in 1..=m {
            let mut f = sigma.clone();
            f.remove(i);
            let src = k.index_of(&f).expect("faces are present");
            for c in 0..dim {
                let odd = layout.fiber_parity(v0, c) == Parity::Odd;
                d.add_entry(layout.offsets[t] + c, layout.offsets[src] + c, sign(odd ^ (i % 2 == 1)));
            }
        }
    }
    d
}

/// Confirms `D² = 0`; otherwise reports the lowest-dimensional simplex on
/// which `D²` has a nonzero row.
pub fn validate_mc(k: &OrderedComplex, e: &RepUH) -> Result<(), RepError> {
    let layout = e.layout(k);
    let d = differential(k, e);
    let d2 = d.mul(&d);
    if d2.is_zero() {
        return Ok(());
    }
    let mut worst: Option<(usize, usize, usize, Rational)> = None;
    for j in 0..d2.cols() {
        for (i, x) in d2.column(j) {
            let t = layout.offsets.partition_point(|&o| o <= *i) - 1;
            let key = (k.all()[t].len(), t);
            if worst.as_ref().is_none_or(|w| (w.0, w.1) > key) {
                worst = Some((key.0, key.1, *i, x.clone()));
            }
        }
    }
    let (_, t, _, _) = worst.expect("nonzero");
    // Report the whole row block of D² on that simplex.
    let rows: Vec<usize> = (layout.offsets[t]..layout.offsets[t] + e.fiber_dim(k.all()[t][0])).collect();
    let dense_rows: Vec<String> = rows
        .iter()
        .map(|&r| {
            let entries: Vec<String> = (0..d2.cols())
                .filter_map(|c| {
                    let x = d2.get(r, c);
                    (!x.is_zero()).then(|| format!("{c}:{}", crate::linalg::format_rational(&x)))
                })
                .collect();
            format!("{{{}}}", entries.join(", "))
        })
        .collect();
    Err(RepError::Violation {
        simplex: k.all()[t].clone(),
        residual: dense_rows.join(" "),
    })
}

/// `C(K, E)` with its degree filtration, after checking flatness.
pub fn cochain_complex(k: &OrderedComplex, e: &RepUH) -> Result<FilteredComplex, RepError> {
    validate_mc(k, e)?;
    Ok(cochain_complex_unchecked(k, e)?)
}

pub(crate) fn cochain_complex_unchecked(k: &OrderedComplex, e: &RepUH) -> Result<FilteredComplex, ComplexError> {
    let layout = e.layout(k);
    let (parities, degrees) = layout.gradings(k);
    let c = Z2Complex::new(GradedSpace::from_parities(parities), differential(k, e), Some(degrees))?;
    FilteredComplex::new(c, k.dim())
}

/// Cohomology of one fiber `(E_v, ∂_v)`: homogeneous representatives (even
/// first) and a way to read off class coordinates.
#[derive(Debug, Clone)]
pub struct FiberCohomology {
    pub even: usize,
    pub odd: usize,
    pub representatives: Vec<Vector>,
    /// Representatives followed by a basis of the image of `∂`.
    basis: Vec<Vector>,
    dim: usize,
}

impl FiberCohomology {
    pub fn compute(fiber: (usize, usize), partial: &Matrix) -> Self {
        let dim = fiber.0 + fiber.1;
        let image = partial.image_basis();
        let mut reps = Vec::new();
        let mut counts = [0usize; 2];
        for (pi, range) in [(0, 0..fiber.0), (1, fiber.0..dim)] {
            let idx: Vec<usize> = range.collect();
            let all: Vec<usize> = (0..dim).collect();
            let kernel = partial.select(&all, &idx).kernel_basis();
            let kernel: Vec<Vector> = kernel
                .into_iter()
                .map(|k| {
                    let mut v = vec![Rational::zero(); dim];
                    for (x, &i) in k.into_iter().zip(&idx) {
                        v[i] = x;
                    }
                    v
                })
                .collect();
            let image_here: Vec<Vector> = image
                .iter()
                .map(|v| {
                    let mut w = vec![Rational::zero(); dim];
                    for &i in &idx {
                        w[i] = v[i].clone();
                    }
                    w
                })
                .filter(|w| !is_zero_vec(w))
                .collect();
            let image_here = crate::linalg::independent_subset(dim, &image_here);
            let extra = crate::linalg::extend_basis(dim, &image_here, &kernel);
            counts[pi] = extra.len();
            reps.extend(extra);
        }
        let mut basis = reps.clone();
        basis.extend(image);
        FiberCohomology {
            even: counts[0],
            odd: counts[1],
            representatives: reps,
            basis,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Class coordinates of a `∂`-cocycle.
    pub fn class_coordinates(&self, v: &[Rational]) -> Result<Vector, crate::linalg::LinalgError> {
        let c = crate::linalg::coordinates(self.dim, &self.basis, &[v.to_vec()])?;
        Ok(c[0][..self.representatives.len()].to_vec())
    }

    fn with_representatives(&self, reps: Vec<Vector>) -> Self {
        let mut basis = reps.clone();
        basis.extend(self.basis[self.representatives.len()..].iter().cloned());
        FiberCohomology {
            even: self.even,
            odd: self.odd,
            representatives: reps,
            basis,
            dim: self.dim,
        }
    }
}

/// The local system `H_∂(E)` with the induced edge maps `[ω₁]`, together with
/// the chosen fiber representatives.
#[derive(Debug, Clone)]
pub struct CohomologySystem {
    pub system: RepUH,
    pub fibers: Vec<FiberCohomology>,
}

fn induced_system(k: &OrderedComplex, e: &RepUH, fibers: Vec<FiberCohomology>) -> Result<CohomologySystem, RepError> {
    let mut ops = BTreeMap::new();
    for edge in k.simplices(1) {
        let (a, b) = (edge[0], edge[1]);
        let w = e.operator_or_zero(edge);
        let mut m = Matrix::zeros(fibers[a].dim(), fibers[b].dim());
        for (j, h) in fibers[b].representatives.iter().enumerate() {
            let image = w.mul_vec(h);
            let coords = fibers[a]
                .class_coordinates(&image)
                .map_err(|_| RepError::Violation {
                    simplex: edge.clone(),
                    residual: "ω₁ does not map cocycles to cocycles".into(),
                })?;
            for (i, x) in coords.into_iter().enumerate() {
                m.set(i, j, x);
            }
        }
        if !m.is_square() || m.det().map_or(true, |d| d.is_zero()) {
            return Err(RepError::InducedMapNotInvertible { edge: edge.clone() });
        }
        ops.insert(edge.clone(), m);
    }
    let system = RepUH::new(k, fibers.iter().map(|f| (f.even, f.odd)).collect(), ops)?;
    system.check_local_system(k)?;
    Ok(CohomologySystem { system, fibers })
}

/// `H_∂(E)` with the flat structure `[ω₁]`.
pub fn fiber_cohomology_system(k: &OrderedComplex, e: &RepUH) -> Result<CohomologySystem, RepError> {
    validate_mc(k, e)?;
    let fibers = (0..k.vertex_count())
        .map(|v| FiberCohomology::compute(e.fibers[v], &e.operator_or_zero(&[v])))
        .collect();
    induced_system(k, e, fibers)
}

/// `H_∂*(E*)` with representatives normalized against those of `E`, so that
/// the fiberwise pairing of representatives is the identity, checked against
/// `[ω₁*] = [ω₁]^{−T}`.
pub fn dual_cohomology_system(
    k: &OrderedComplex,
    e_star: &RepUH,
    primal: &CohomologySystem,
) -> Result<CohomologySystem, RepError> {
    validate_mc(k, e_star)?;
    let mut fibers = Vec::new();
    for v in 0..k.vertex_count() {
        let raw = FiberCohomology::compute(e_star.fibers[v], &e_star.operator_or_zero(&[v]));
        let h = &primal.fibers[v].representatives;
        if raw.dim() != h.len() || (raw.even, raw.odd) != (primal.fibers[v].even, primal.fibers[v].odd) {
            return Err(RepError::DualIncompatible {
                location: format!("vertex {v}"),
                residual: "fiber cohomology dimensions differ".into(),
            });
        }
        let g = &raw.representatives;
        let mut p = Matrix::zeros(g.len(), h.len());
        for (i, gi) in g.iter().enumerate() {
            for (j, hj) in h.iter().enumerate() {
                p.set(i, j, gi.iter().zip(hj).fold(Rational::zero(), |acc, (x, y)| acc + x * y));
            }
        }
        let m = p.transpose().inverse().ok_or_else(|| RepError::DualIncompatible {
            location: format!("vertex {v}"),
            residual: format!("fiber pairing {} is degenerate", describe(&p)),
        })?;
        let gm = Matrix::from_columns(raw.dim, g).mul(&m).columns();
        fibers.push(raw.with_representatives(gm));
    }
    let dual = induced_system(k, e_star, fibers)?;
    for edge in k.simplices(1) {
        let w = primal.system.operator_or_zero(edge);
        let expected = w.inverse().expect("invertible").transpose();
        let got = dual.system.operator_or_zero(edge);
        if got != expected {
            return Err(RepError::DualIncompatible {
                location: format!("edge {edge:?}"),
                residual: describe(&got.sub(&expected)),
            });
        }
    }
    Ok(dual)
}

/// `∂*` from `∂`: `∂*(α) = −(−1)^{|α|} ∂ᵀ α`.
fn dual_partial(fiber: (usize, usize), partial: &Matrix) -> Matrix {
    let t = partial.transpose();
    let mut out = Matrix::zeros(t.rows(), t.cols());
    for i in 0..t.rows() {
        for j in 0..t.cols() {
            let odd = j >= fiber.0;
            let x = t.get(i, j);
            if !x.is_zero() {
                out.set(i, j, if odd { x.clone() } else { -x.clone() });
            }
        }
    }
    out
}

/// The automatic dual: signed transpose of `∂`, inverse transpose of `ω₁`.
pub fn dual(k: &OrderedComplex, e: &RepUH) -> Result<RepUH, RepError> {
    if e.max_degree() >= 2 {
        return Err(RepError::DualDataRequired);
    }
    let mut ops = BTreeMap::new();
    for v in 0..k.vertex_count() {
        if let Some(p) = e.operator(&[v]) {
            ops.insert(vec![v], dual_partial(e.fibers[v], p));
        }
    }
    for edge in k.simplices(1) {
        let w = e.operator_or_zero(edge);
        let inv = w.inverse().ok_or(RepError::DualDataRequired)?;
        ops.insert(edge.clone(), inv.transpose());
    }
    RepUH::new(k, e.fibers.clone(), ops)
}

/// Checks supplied dual data at the level the torsion pipeline consumes:
/// fibers, `∂*` against `±∂ᵀ` blockwise, and the induced maps on fiber
/// cohomology.
pub fn check_dual(k: &OrderedComplex, e: &RepUH, e_star: &RepUH) -> Result<CohomologySystem, RepError> {
    for v in 0..k.vertex_count() {
        if e.fibers[v] != e_star.fibers[v] {
            return Err(RepError::DualIncompatible {
                location: format!("vertex {v}"),
                residual: "fiber dimensions differ".into(),
            });
        }
        let (ev, _) = e.fibers[v];
        let n = e.fiber_dim(v);
        let t = e.operator_or_zero(&[v]).transpose();
        let got = e_star.operator_or_zero(&[v]);
        let even: Vec<usize> = (0..ev).collect();
        let odd: Vec<usize> = (ev..n).collect();
        for (rows, cols) in [(&even, &odd), (&odd, &even)] {
            let a = got.select(rows, cols);
            let b = t.select(rows, cols);
            if a != b && a != b.neg() {
                return Err(RepError::DualIncompatible {
                    location: format!("vertex {v}"),
                    residual: describe(&got.sub(&dual_partial(e.fibers[v], &e.operator_or_zero(&[v])))),
                });
            }
        }
    }
    let primal = fiber_cohomology_system(k, e)?;
    dual_cohomology_system(k, e_star, &primal)
}

/// Permutation placing `E_v ⊕ F_v` in even-then-odd order: returns, for the
/// summand `which` (0 or 1), the position of each of its basis vectors.
fn sum_positions(a: (usize, usize), b: (usize, usize), which: usize) -> Vec<usize> {
    let (ae, ao) = a;
    let (be, bo) = b;
    if which == 0 {
        (0..ae).chain((ae + be)..(ae + be + ao)).collect()
    } else {
        (ae..ae + be).chain((ae + be + ao)..(ae + be + ao + bo)).collect()
    }
}

pub fn direct_sum(k: &OrderedComplex, e: &RepUH, f: &RepUH) -> Result<RepUH, RepError> {
    if e.fibers.len() != f.fibers.len() || e.fibers.len() != k.vertex_count() {
        return Err(RepError::BaseMismatch);
    }
    let fibers: Vec<(usize, usize)> = e
        .fibers
        .iter()
        .zip(&f.fibers)
        .map(|(a, b)| (a.0 + b.0, a.1 + b.1))
        .collect();
    let mut ops = BTreeMap::new();
    for s in e.operators.keys().chain(f.operators.keys()) {
        if ops.contains_key(s) {
            continue;
        }
        let (v0, vk) = (s[0], *s.last().expect("nonempty"));
        let mut m = Matrix::zeros(fibers[v0].0 + fibers[v0].1, fibers[vk].0 + fibers[vk].1);
        for (which, rep) in [(0, e), (1, f)] {
            let block = rep.operator_or_zero(s);
            let rows = sum_positions(e.fibers[v0], f.fibers[v0], which);
            let cols = sum_positions(e.fibers[vk], f.fibers[vk], which);
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    m.set(r, c, block.get(i, j).clone());
                }
            }
        }
        ops.insert(s.clone(), m);
    }
    RepUH::new(k, fibers, ops)
}

/// Embeds a cochain of one summand into the cochains of `e ⊕ f`.
pub fn embed_summand(k: &OrderedComplex, e: &RepUH, f: &RepUH, which: usize, v: &[Rational]) -> Vector {
    let le = e.layout(k);
    let lf = f.layout(k);
    let fibers: Vec<(usize, usize)> = e
        .fibers
        .iter()
        .zip(&f.fibers)
        .map(|(a, b)| (a.0 + b.0, a.1 + b.1))
        .collect();
    let ls = CochainLayout::new(k, &fibers);
    let src = if which == 0 { &le } else { &lf };
    let mut out = vec![Rational::zero(); ls.total];
    for (t, s) in k.all().iter().enumerate() {
        let pos = sum_positions(e.fibers[s[0]], f.fibers[s[0]], which);
        for (i, &p) in pos.iter().enumerate() {
            out[ls.offsets[t] + p] = v[src.offsets[t] + i].clone();
        }
    }
    out
}

/// Components `φ_k` on k-simplices, mapping the source fiber at the last
/// vertex to the target fiber at the first, of internal parity `k mod 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepMorphism {
    pub components: BTreeMap<Simplex, Matrix>,
}

impl RepMorphism {
    pub fn new(
        k: &OrderedComplex,
        source: &RepUH,
        target: &RepUH,
        components: BTreeMap<Simplex, Matrix>,
    ) -> Result<Self, RepError> {
        for (s, m) in &components {
            if !k.contains(s) {
                return Err(RepError::UnknownSimplex { simplex: s.clone() });
            }
            let (r, c) = (target.fibers[s[0]], source.fibers[*s.last().expect("nonempty")]);
            let expected = (r.0 + r.1, c.0 + c.1);
            if (m.rows(), m.cols()) != expected {
                return Err(RepError::Shape {
                    simplex: s.clone(),
                    expected,
                    got: (m.rows(), m.cols()),
                });
            }
            if !block_parity_ok(m, r, c, Parity::from_int(s.len() - 1)) {
                return Err(RepError::Parity { simplex: s.clone() });
            }
        }
        Ok(RepMorphism { components })
    }

    pub fn identity(k: &OrderedComplex, e: &RepUH) -> Self {
        let components = (0..k.vertex_count())
            .map(|v| (vec![v], Matrix::identity(e.fiber_dim(v))))
            .collect();
        RepMorphism { components }
    }
}

/// The chain map `Φ(F)(σ) = Σ_j (−1)^{j|e|} φ_j(back_j σ) F(front_{k−j} σ)`,
/// checked against `D'Φ = ΦD`.
pub fn apply_morphism(
    k: &OrderedComplex,
    source: &RepUH,
    target: &RepUH,
    phi: &RepMorphism,
) -> Result<SparseMatrix, RepError> {
    let ls = source.layout(k);
    let lt = target.layout(k);
    let mut m = SparseMatrix::zeros(lt.total, ls.total);
    for (t, sigma) in k.all().iter().enumerate() {
        for j in 0..sigma.len() {
            if let Some(op) = phi.components.get(&sigma[..=j]) {
                let src = k.index_of(&sigma[j..]).expect("faces are present");
                for c in 0..op.cols() {
                    let odd = ls.fiber_parity(sigma[j], c) == Parity::Odd;
                    let s = sign(j % 2 == 1 && odd);
                    for r in 0..op.rows() {
                        let x = op.get(r, c);
                        if !x.is_zero() {
                            m.add_entry(lt.offsets[t] + r, ls.offsets[src] + c, x * &s);
                        }
                    }
                }
            }
        }
    }
    let lhs = differential(k, target).mul(&m);
    let rhs = m.mul(&differential(k, source));
    if lhs != rhs {
        // Lowest simplex with a nonzero residual row.
        let mut best: Option<usize> = None;
        for j in 0..lhs.cols() {
            for r in lhs.column(j).iter().map(|e| e.0).chain(rhs.column(j).iter().map(|e| e.0)) {
                if lhs.get(r, j) != rhs.get(r, j) {
                    let t = lt.offsets.partition_point(|&o| o <= r) - 1;
                    let key = (k.all()[t].len(), t);
                    if best.is_none_or(|b| (k.all()[b].len(), b) > key) {
                        best = Some(t);
                    }
                }
            }
        }
        let t = best.expect("some residual");
        return Err(RepError::NotChainMap {
            simplex: k.all()[t].clone(),
            residual: "D'Φ − ΦD is nonzero on this simplex".into(),
        });
    }
    Ok(m)
}

/// Whether `φ₀` induces isomorphisms on fiber cohomology at every vertex.
pub fn is_quasi_iso(k: &OrderedComplex, source: &RepUH, target: &RepUH, phi: &RepMorphism) -> Result<bool, RepError> {
    apply_morphism(k, source, target, phi)?;
    for v in 0..k.vertex_count() {
        let hs = FiberCohomology::compute(source.fibers[v], &source.operator_or_zero(&[v]));
        let ht = FiberCohomology::compute(target.fibers[v], &target.operator_or_zero(&[v]));
        if hs.dim() != ht.dim() || (hs.even, hs.odd) != (ht.even, ht.odd) {
            return Ok(false);
        }
        let p0 = phi
            .components
            .get(&vec![v])
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(target.fiber_dim(v), source.fiber_dim(v)));
        let mut m = Matrix::zeros(ht.dim(), hs.dim());
        for (j, h) in hs.representatives.iter().enumerate() {
            let coords = ht.class_coordinates(&p0.mul_vec(h)).map_err(|_| RepError::NotChainMap {
                simplex: vec![v],
                residual: "φ₀ does not map cocycles to cocycles".into(),
            })?;
            for (i, x) in coords.into_iter().enumerate() {
                m.set(i, j, x);
            }
        }
        if m.rows() > 0 && m.det().map_or(true, |d| d.is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves the flatness equations for `ω_k`, `k ≥ 2`, level by level, keeping
/// any operators already supplied. At level `k` the part of `D²` raising the
/// simplicial degree by `k` is linear in the unknown `ω_k`; on a k-simplex
/// `σ` it reads `(−1)^{k|e|} (∂ X + (−1)^k X ∂) = −R`.
pub fn complete_structure_operators(
    k: &OrderedComplex,
    fibers: Vec<(usize, usize)>,
    operators: BTreeMap<Simplex, Matrix>,
) -> Result<RepUH, RepError> {
    let mut e = RepUH::new(k, fibers, operators)?;
    for level in 2..=k.dim() {
        let layout = e.layout(k);
        let d = differential(k, &e);
        let mut ops = e.operators.clone();
        for sigma in k.simplices(level) {
            if e.operator(sigma).is_some() {
                continue;
            }
            let t = k.index_of(sigma).expect("present");
            let (v0, vk) = (sigma[0], sigma[level]);
            let (rows, cols) = (e.fiber_dim(v0), e.fiber_dim(vk));
            // R restricted to the rows at σ and the columns of the 0-cochains at v_k.
            let src = k.index_of(&[vk]).expect("vertex");
            let mut rhs = Vec::new();
            let mut ok_elsewhere = true;
            for vi in &sigma[..level] {
                let col0 = layout.offsets[k.index_of(&[*vi]).expect("vertex")];
                for c in 0..e.fiber_dim(*vi) {
                    let image = d.mul_vec(&d.column_dense(col0 + c));
                    if (0..rows).any(|r| !image[layout.offsets[t] + r].is_zero()) {
                        ok_elsewhere = false;
                    }
                }
            }
            if !ok_elsewhere {
                return Err(RepError::Violation {
                    simplex: sigma.clone(),
                    residual: "curvature depends on more than the last vertex".into(),
                });
            }
            for c in 0..cols {
                let image = d.mul_vec(&d.column_dense(layout.offsets[src] + c));
                for r in 0..rows {
                    rhs.push(-image[layout.offsets[t] + r].clone());
                }
            }
            let parity = Parity::from_int(level + 1);
            let unknowns: Vec<(usize, usize)> = (0..rows)
                .flat_map(|r| (0..cols).map(move |c| (r, c)))
                .filter(|&(r, c)| layout.fiber_parity(v0, r).add(layout.fiber_parity(vk, c)) == parity)
                .collect();
            let p_top = e.operator_or_zero(&[v0]);
            let p_bot = e.operator_or_zero(&[vk]);
            let mut system = Matrix::zeros(rows * cols, unknowns.len());
            for (u, &(r0, c0)) in unknowns.iter().enumerate() {
                let mut x = Matrix::zeros(rows, cols);
                x.set(r0, c0, Rational::one());
                let mut contrib = p_top.mul(&x);
                let xp = x.mul(&p_bot);
                contrib = if level % 2 == 0 { contrib.add(&xp) } else { contrib.sub(&xp) };
                for c in 0..cols {
                    let odd = layout.fiber_parity(vk, c) == Parity::Odd;
                    let s = sign(level % 2 == 1 && odd);
                    for r in 0..rows {
                        system.set(c * rows + r, u, contrib.get(r, c) * &s);
                    }
                }
            }
            let sol = system
                .solve(&rhs)
                .map_err(|_| RepError::Unsolvable { simplex: sigma.clone() })?;
            let mut x = Matrix::zeros(rows, cols);
            for (val, &(r, c)) in sol.into_iter().zip(&unknowns) {
                x.set(r, c, val);
            }
            if !x.is_zero() {
                ops.insert(sigma.clone(), x);
            }
        }
        e = RepUH::new(k, e.fibers.clone(), ops)?;
    }
    validate_mc(k, &e)?;
    Ok(e)
}

/// Pulls a representation back along an order-preserving vertex map
/// `g: K' → K`. Simplices collapsing under `g` get the identity in degree one
/// and zero above.
pub fn pullback(k: &OrderedComplex, k2: &OrderedComplex, g: &[usize], e: &RepUH) -> Result<RepUH, RepError> {
    let fibers: Vec<(usize, usize)> = g.iter().map(|&v| e.fibers[v]).collect();
    let mut ops = BTreeMap::new();
    for s in k2.all() {
        let image: Simplex = s.iter().map(|&v| g[v]).collect();
        let mut dedup = image.clone();
        dedup.dedup();
        let op = if dedup.len() == image.len() {
            e.operator(&image).cloned()
        } else if s.len() == 2 {
            Some(Matrix::identity(e.fiber_dim(image[0])))
        } else {
            None
        };
        if let Some(m) = op {
            ops.insert(s.clone(), m);
        }
    }
    let _ = k;
    RepUH::new(k2, fibers, ops)
}

/// The induced cochain map `F ↦ F ∘ g` (zero on collapsing simplices).
pub fn pullback_cochain(k: &OrderedComplex, k2: &OrderedComplex, g: &[usize], e: &RepUH, f: &[Rational]) -> Vector {
    let l = e.layout(k);
    let fibers: Vec<(usize, usize)> = g.iter().map(|&v| e.fibers[v]).collect();
    let l2 = CochainLayout::new(k2, &fibers);
    let mut out = vec![Rational::zero(); l2.total];
    for (t, s) in k2.all().iter().enumerate() {
        let image: Simplex = s.iter().map(|&v| g[v]).collect();
        if image.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let src = k.index_of(&image).expect("simplicial map");
        let val = l.value(k, f, src);
        out[l2.offsets[t]..l2.offsets[t] + val.len()].clone_from_slice(val);
    }
    out
}

/// Rescales the fiber basis at every vertex by an even gauge `g_v`:
/// `ω_k(σ) ↦ g_{v₀} ω_k(σ) g_{v_k}⁻¹`.
pub fn gauge_transform(k: &OrderedComplex, e: &RepUH, gauge: &[Matrix]) -> Result<RepUH, RepError> {
    let mut ops = BTreeMap::new();
    for (s, m) in &e.operators {
        let inv = gauge[*s.last().expect("nonempty")]
            .inverse()
            .ok_or_else(|| RepError::NotLocalSystem("singular gauge".into()))?;
        ops.insert(s.clone(), gauge[s[0]].mul(m).mul(&inv));
    }
    RepUH::new(k, e.fibers.clone(), ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cohomology;
    use crate::linalg::{frac, q};
    use crate::simplicial::face;

    fn circle() -> OrderedComplex {
        OrderedComplex::from_maximal(&[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn sphere(n: usize) -> OrderedComplex {
        let full: Simplex = (0..=n + 1).collect();
        let maximal: Vec<Simplex> = (0..=n + 1).map(|i| face(&full, i).unwrap()).collect();
        OrderedComplex::from_maximal(&maximal).unwrap()
    }

    fn circle_lambda(l: Rational) -> RepUH {
        let k = circle();
        let mut ops = BTreeMap::new();
        ops.insert(vec![0, 1], Matrix::identity(1));
        ops.insert(vec![1, 2], Matrix::identity(1));
        ops.insert(vec![0, 2], Matrix::diagonal(&[l]));
        RepUH::new(&k, vec![(1, 0); 3], ops).unwrap()
    }

    fn h_dims(k: &OrderedComplex, e: &RepUH) -> (usize, usize) {
        let f = cochain_complex(k, e).unwrap();
        let h = cohomology(f.base());
        (h.even_dim(), h.odd_dim())
    }

    #[test]
    fn trivial_rep_reproduces_coboundary() {
        let k = sphere(2);
        let e = RepUH::trivial(&k, 1, 0);
        let d = differential(&k, &e).to_dense();
        // rows of 1-simplices against columns of vertices: the transpose of ∂₁
        let b1 = k.boundary_matrix(1).transpose();
        let rows: Vec<usize> = (k.count(0)..k.count(0) + k.count(1)).collect();
        let cols: Vec<usize> = (0..k.count(0)).collect();
        assert_eq!(d.select(&rows, &cols), b1);
        assert!(validate_mc(&k, &e).is_ok());
    }

    #[test]
    fn interval_and_circle_cohomology() {
        let interval = OrderedComplex::from_maximal(&[vec![0, 1]]).unwrap();
        assert_eq!(h_dims(&interval, &RepUH::trivial(&interval, 1, 0)), (1, 0));
        let k = circle();
        assert_eq!(h_dims(&k, &RepUH::trivial(&k, 1, 0)), (1, 1));
        assert_eq!(h_dims(&k, &circle_lambda(q(3))), (0, 0));
    }

    #[test]
    fn broken_cocycle_is_reported_on_the_triangle() {
        let k = OrderedComplex::from_maximal(&[vec![0, 1, 2]]).unwrap();
        let mut ops = BTreeMap::new();
        ops.insert(vec![0, 1], Matrix::diagonal(&[q(2)]));
        ops.insert(vec![1, 2], Matrix::diagonal(&[q(3)]));
        ops.insert(vec![0, 2], Matrix::diagonal(&[q(5)]));
        let e = RepUH::new(&k, vec![(1, 0); 3], ops).unwrap();
        match validate_mc(&k, &e) {
            Err(RepError::Violation { simplex, .. }) => assert_eq!(simplex, vec![0, 1, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn graded_local_system_is_flat() {
        let k = sphere(3);
        let e = RepUH::trivial(&k, 1, 1);
        assert!(validate_mc(&k, &e).is_ok());
        let gauge: Vec<Matrix> = (0..5).map(|v| Matrix::diagonal(&[q(v as i64 + 1), frac(1, v as i64 + 2)])).collect();
        let twisted = gauge_transform(&k, &e, &gauge).unwrap();
        assert!(validate_mc(&k, &twisted).is_ok());
        assert!(twisted.is_local_system(&k));
    }

    #[test]
    fn fiberwise_acyclic_has_zero_cohomology_system() {
        let k = sphere(3);
        let mut ops: BTreeMap<Simplex, Matrix> = k.simplices(1).iter().map(|e| (e.clone(), Matrix::identity(2))).collect();
        for v in 0..5 {
            ops.insert(vec![v], Matrix::from_i64(&[&[0, 0], &[1, 0]]));
        }
        let e = RepUH::new(&k, vec![(1, 1); 5], ops).unwrap();
        assert!(validate_mc(&k, &e).is_ok());
        let l = fiber_cohomology_system(&k, &e).unwrap();
        assert!(l.system.fibers().iter().all(|&f| f == (0, 0)));
        assert_eq!(h_dims(&k, &e), (0, 0));
    }

    #[test]
    fn local_system_is_its_own_cohomology_system() {
        let e = circle_lambda(q(3));
        let l = fiber_cohomology_system(&circle(), &e).unwrap();
        assert_eq!(l.system, e);
    }

    #[test]
    fn automatic_dual() {
        let k = circle();
        let d = dual(&k, &circle_lambda(q(3))).unwrap();
        assert_eq!(d.operator(&[0, 2]).unwrap(), &Matrix::diagonal(&[frac(1, 3)]));
        let e = RepUH::trivial(&k, 1, 0);
        assert_eq!(dual(&k, &e).unwrap(), e);
    }

    #[test]
    fn dual_with_wrong_partial_is_rejected() {
        let k = circle();
        let mut ops: BTreeMap<Simplex, Matrix> = k.simplices(1).iter().map(|e| (e.clone(), Matrix::identity(2))).collect();
        for v in 0..3 {
            ops.insert(vec![v], Matrix::from_i64(&[&[0, 0], &[1, 0]]));
        }
        let e = RepUH::new(&k, vec![(1, 1); 3], ops).unwrap();
        let good = dual(&k, &e).unwrap();
        assert!(check_dual(&k, &e, &good).is_ok());
        let mut bad_ops = good.operators().clone();
        bad_ops.insert(vec![1], Matrix::from_i64(&[&[0, 2], &[0, 0]]));
        let bad = RepUH::new(&k, vec![(1, 1); 3], bad_ops).unwrap();
        match check_dual(&k, &e, &bad) {
            Err(RepError::DualIncompatible { location, .. }) => assert_eq!(location, "vertex 1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn direct_sum_dimensions_add() {
        let k = circle();
        let a = RepUH::trivial(&k, 1, 0);
        let b = circle_lambda(q(5));
        let s = direct_sum(&k, &a, &b).unwrap();
        assert!(validate_mc(&k, &s).is_ok());
        assert_eq!(h_dims(&k, &s), (1, 1));
        let zero = RepUH::new(&k, vec![(0, 0); 3], BTreeMap::new()).unwrap();
        assert_eq!(direct_sum(&k, &b, &zero).unwrap(), b);
    }

    #[test]
    fn identity_morphism_is_quasi_iso() {
        let k = sphere(2);
        let e = RepUH::trivial(&k, 1, 1);
        let id = RepMorphism::identity(&k, &e);
        let m = apply_morphism(&k, &e, &e, &id).unwrap();
        assert_eq!(m.to_dense(), Matrix::identity(m.rows()));
        assert!(is_quasi_iso(&k, &e, &e, &id).unwrap());
        let zero = RepMorphism { components: BTreeMap::new() };
        assert!(!is_quasi_iso(&k, &e, &e, &zero).unwrap());
    }

    #[test]
    fn completion_finds_second_order_operator() {
        // Non-associative edge data on a triangle, corrected by ω₂.
        let k = OrderedComplex::from_maximal(&[vec![0, 1, 2]]).unwrap();
        let mut ops = BTreeMap::new();
        for v in 0..3 {
            // ∂ e₂ = o on the basis (e₁, e₂ | o)
            ops.insert(vec![v], Matrix::from_i64(&[&[0, 0, 0], &[0, 0, 0], &[0, 1, 0]]));
        }
        ops.insert(vec![0, 1], Matrix::from_i64(&[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]));
        ops.insert(vec![1, 2], Matrix::from_i64(&[&[1, 2, 0], &[0, 1, 0], &[0, 0, 1]]));
        ops.insert(vec![0, 2], Matrix::from_i64(&[&[1, 7, 0], &[0, 1, 0], &[0, 0, 1]]));
        let partial = RepUH::new(&k, vec![(2, 1); 3], ops.clone()).unwrap();
        assert!(validate_mc(&k, &partial).is_err());
        let e = complete_structure_operators(&k, vec![(2, 1); 3], ops).unwrap();
        assert!(e.operator(&[0, 1, 2]).is_some());
        assert!(validate_mc(&k, &e).is_ok());
    }

    #[test]
    fn subdivision_pullback_is_a_chain_map() {
        let k = circle();
        let e = circle_lambda(q(3));
        let sd = k.barycentric_subdivision();
        let g = sd.last_vertex_map();
        let e2 = pullback(&k, &sd.complex, &g, &e).unwrap();
        assert!(validate_mc(&sd.complex, &e2).is_ok());
        let d = differential(&k, &e);
        let d2 = differential(&sd.complex, &e2);
        let n = e.layout(&k).total;
        for j in 0..n {
            let mut v = vec![Rational::zero(); n];
            v[j] = Rational::one();
            let lhs = d2.mul_vec(&pullback_cochain(&k, &sd.complex, &g, &e, &v));
            let rhs = pullback_cochain(&k, &sd.complex, &g, &e, &d.mul_vec(&v));
            assert_eq!(lhs, rhs);
        }
    }
}
