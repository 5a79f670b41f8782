//! Ordered simplicial complexes: face calculus, orientation, Euler
//! characteristic, barycentric subdivision and the cup pairing against the
//! fundamental cycle.

use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use thiserror::Error;

use crate::graded::Parity;
use crate::linalg::{Matrix, Rational, SparseMatrix, Vector};

/// A simplex as a strictly increasing tuple of vertices.
pub type Simplex = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplicialError {
    #[error("face index {index} out of range for a simplex of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("simplex {0:?} is not strictly increasing")]
    NotIncreasing(Simplex),
    #[error("complex is empty")]
    Empty,
    #[error("vertex {0} does not occur in any simplex")]
    MissingVertex(usize),
    #[error("not a closed pseudomanifold: {0}")]
    NotClosed(String),
    #[error("not orientable: inconsistent signs around face {0:?}")]
    NotOrientable(Simplex),
    #[error("cochain degrees {p} + {q} do not add up to the dimension {n}")]
    DegreeMismatch { p: usize, q: usize, n: usize },
}

pub fn face(s: &[usize], i: usize) -> Result<Simplex, SimplicialError> {
    if s.is_empty() || i >= s.len() {
        return Err(SimplicialError::IndexOutOfRange {
            index: i,
            dim: s.len().saturating_sub(1),
        });
    }
    let mut f = s.to_vec();
    f.remove(i);
    Ok(f)
}

/// `(back_i σ, front_i σ)`: the first and the last `i + 1` vertices.
pub fn back_front(s: &[usize], i: usize) -> Result<(Simplex, Simplex), SimplicialError> {
    if s.is_empty() || i >= s.len() {
        return Err(SimplicialError::IndexOutOfRange {
            index: i,
            dim: s.len().saturating_sub(1),
        });
    }
    Ok((s[..=i].to_vec(), s[s.len() - 1 - i..].to_vec()))
}

/// A finite simplicial complex whose vertices `0..V` are totally ordered.
/// Simplices are stored by dimension, lexicographically within a dimension;
/// that position is the simplex's global index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedComplex {
    vertex_count: usize,
    simplices: Vec<Simplex>,
    dim_start: Vec<usize>,
    index: HashMap<Simplex, usize>,
}

impl OrderedComplex {
    /// Builds the downward closure of the given maximal simplices.
    pub fn from_maximal(maximal: &[Simplex]) -> Result<Self, SimplicialError> {
        if maximal.is_empty() {
            return Err(SimplicialError::Empty);
        }
        let mut by_dim: Vec<std::collections::BTreeSet<Simplex>> = Vec::new();
        for s in maximal {
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SimplicialError::NotIncreasing(s.clone()));
            }
            let k = s.len();
            // every nonempty subset
            for mask in 1u64..(1u64 << k) {
                let sub: Simplex = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
                let d = sub.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize_with(d + 1, Default::default);
                }
                by_dim[d].insert(sub);
            }
        }
        let vertex_count = by_dim[0].iter().map(|v| v[0]).max().expect("nonempty") + 1;
        for v in 0..vertex_count {
            if !by_dim[0].contains(&vec![v]) {
                return Err(SimplicialError::MissingVertex(v));
            }
        }
        let mut simplices = Vec::new();
        let mut dim_start = Vec::new();
        for level in by_dim {
            dim_start.push(simplices.len());
            simplices.extend(level);
        }
        dim_start.push(simplices.len());
        let index = simplices.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(OrderedComplex {
            vertex_count,
            simplices,
            dim_start,
            index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn dim(&self) -> usize {
        self.dim_start.len() - 2
    }

    /// All simplices in global order.
    pub fn all(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        if k > self.dim() {
            return &[];
        }
        &self.simplices[self.dim_start[k]..self.dim_start[k + 1]]
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index.contains_key(s)
    }

    /// Maximal simplices in global order.
    pub fn maximal(&self) -> Vec<Simplex> {
        let mut cofaced = vec![false; self.len()];
        for s in &self.simplices {
            if s.len() > 1 {
                for i in 0..s.len() {
                    let f = face(s, i).expect("in range");
                    cofaced[self.index[&f]] = true;
                }
            }
        }
        self.simplices
            .iter()
            .zip(cofaced)
            .filter(|(_, c)| !c)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim())
            .map(|k| if k % 2 == 0 { self.count(k) as i64 } else { -(self.count(k) as i64) })
            .sum()
    }

    /// The simplicial boundary `C_k → C_{k-1}` with the alternating sign.
    pub fn boundary_matrix(&self, k: usize) -> Matrix {
        let rows = if k == 0 { 0 } else { self.count(k - 1) };
        let mut m = Matrix::zeros(rows, self.count(k));
        if k == 0 {
            return m;
        }
        let base = self.dim_start[k - 1];
        for (j, s) in self.simplices(k).iter().enumerate() {
            for i in 0..s.len() {
                let f = face(s, i).expect("in range");
                let sign = if i % 2 == 0 { 1 } else { -1 };
                m.set(self.index[&f] - base, j, crate::linalg::q(sign));
            }
        }
        m
    }

    /// Checks that every codimension-one face lies in exactly two top
    /// simplices and solves for a consistent orientation.
    pub fn validate_closed_oriented(&self) -> Result<FundamentalCycle, SimplicialError> {
        let n = self.dim();
        let top = self.simplices(n);
        if self.maximal().len() != top.len() {
            return Err(SimplicialError::NotClosed("maximal simplices of lower dimension".into()));
        }
        if n == 0 {
            return Ok(FundamentalCycle { signs: vec![1; top.len()] });
        }
        // face -> [(top simplex, position of the removed vertex)]
        let mut incidence: HashMap<Simplex, Vec<(usize, usize)>> = HashMap::new();
        for (t, s) in top.iter().enumerate() {
            for i in 0..=n {
                incidence.entry(face(s, i).expect("in range")).or_default().push((t, i));
            }
        }
        for f in self.simplices(n - 1) {
            let c = incidence.get(f).map_or(0, Vec::len);
            if c != 2 {
                return Err(SimplicialError::NotClosed(format!("face {f:?} lies in {c} top simplices")));
            }
        }
        let mut signs = vec![0i64; top.len()];
        for start in 0..top.len() {
            if signs[start] != 0 {
                continue;
            }
            signs[start] = 1;
            let mut queue = VecDeque::from([start]);
            while let Some(t) = queue.pop_front() {
                for i in 0..=n {
                    let f = face(&top[t], i).expect("in range");
                    let inc = &incidence[&f];
                    let &(u, j) = inc.iter().find(|(u, _)| *u != t).expect("two cofaces");
                    // The face must cancel in the boundary of the signed sum.
                    let want = -signs[t] * sgn(i) * sgn(j);
                    if signs[u] == 0 {
                        signs[u] = want;
                        queue.push_back(u);
                    } else if signs[u] != want {
                        return Err(SimplicialError::NotOrientable(f));
                    }
                }
            }
        }
        Ok(FundamentalCycle { signs })
    }

    /// The first barycentric subdivision. Its vertices are the simplices of
    /// `self` in global order, so the carrier of vertex `i` is `self.all()[i]`.
    pub fn barycentric_subdivision(&self) -> Subdivision {
        let mut maximal = Vec::new();
        for s in self.maximal() {
            let mut flags = Vec::new();
            flag_chains(self, &s, &mut Vec::new(), &mut flags);
            maximal.extend(flags);
        }
        let complex = OrderedComplex::from_maximal(&maximal).expect("flags are increasing and cover all simplices");
        Subdivision {
            carrier: self.simplices.clone(),
            complex,
        }
    }
}

fn sgn(i: usize) -> i64 {
    if i.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All maximal flags ending at `s`, written as increasing tuples of global
/// indices.
fn flag_chains(k: &OrderedComplex, s: &[usize], tail: &mut Vec<usize>, out: &mut Vec<Simplex>) {
    tail.push(k.index[s]);
    if s.len() == 1 {
        let mut flag = tail.clone();
        flag.reverse();
        out.push(flag);
    } else {
        for i in 0..s.len() {
            flag_chains(k, &face(s, i).expect("in range"), tail, out);
        }
    }
    tail.pop();
}

/// Signs of the top simplices making their signed sum a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalCycle {
    pub signs: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct Subdivision {
    pub complex: OrderedComplex,
    /// Carrier simplex of each new vertex.
    pub carrier: Vec<Simplex>,
}

impl Subdivision {
    /// The order-preserving simplicial approximation of the identity sending
    /// a barycenter to the last vertex of its carrier.
    pub fn last_vertex_map(&self) -> Vec<usize> {
        self.carrier.iter().map(|s| *s.last().expect("nonempty")).collect()
    }
}

/// Where each simplex's fiber sits inside the cochain space
/// `⊕_Δ Π^{dim Δ} E_{v₀(Δ)}`, fibers ordered even part first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CochainLayout {
    pub offsets: Vec<usize>,
    pub total: usize,
    fibers: Vec<(usize, usize)>,
}

impl CochainLayout {
    pub fn new(k: &OrderedComplex, fibers: &[(usize, usize)]) -> Self {
        let mut offsets = Vec::with_capacity(k.len());
        let mut total = 0;
        for s in k.all() {
            offsets.push(total);
            let (e, o) = fibers[s[0]];
            total += e + o;
        }
        CochainLayout {
            offsets,
            total,
            fibers: fibers.to_vec(),
        }
    }

    pub fn fiber(&self, v: usize) -> (usize, usize) {
        self.fibers[v]
    }

    pub fn fiber_dim(&self, v: usize) -> usize {
        self.fibers[v].0 + self.fibers[v].1
    }

    pub fn fiber_parity(&self, v: usize, i: usize) -> Parity {
        if i < self.fibers[v].0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Total parity and z-degree of every basis vector.
    pub fn gradings(&self, k: &OrderedComplex) -> (Vec<Parity>, Vec<usize>) {
        let mut parities = Vec::with_capacity(self.total);
        let mut degrees = Vec::with_capacity(self.total);
        for s in k.all() {
            let dim = s.len() - 1;
            for i in 0..self.fiber_dim(s[0]) {
                parities.push(self.fiber_parity(s[0], i).add(Parity::from_int(dim)));
                degrees.push(dim);
            }
        }
        (parities, degrees)
    }

    /// The value of the cochain `f` on the simplex with global index `idx`.
    pub fn value<'a>(&self, k: &OrderedComplex, f: &'a [Rational], idx: usize) -> &'a [Rational] {
        let v0 = k.all()[idx][0];
        &f[self.offsets[idx]..self.offsets[idx] + self.fiber_dim(v0)]
    }
}

/// Sign `ε(p, |a|)` in front of the local term of the cup pairing, where `p`
/// is the degree of the dual-valued cochain and `|a|` the fiber parity of
/// its value. Frozen so that the coboundaries are skew-adjoint.
pub fn cup_sign(p: usize, fiber_parity: Parity) -> i64 {
    if (p * fiber_parity.bit()).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign injected into the cup pairing for negative tests. Zero means none.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignFault {
    /// Flip the sign of the local term in this cochain degree.
    pub flip_degree: Option<usize>,
}

/// `Σ_σ sign(σ) ε ⟨α(back_p σ), hol(v₀, v_p) β(front_{n−p} σ)⟩` for a cochain
/// `α` of degree `p` valued in the dual system and `β` of degree `n − p`.
/// `hol(a, b)` transports the fiber at `b` to the fiber at `a`.
#[allow(clippy::too_many_arguments)]
pub fn cup_pairing(
    k: &OrderedComplex,
    cycle: &FundamentalCycle,
    dual_layout: &CochainLayout,
    layout: &CochainLayout,
    hol: &dyn Fn(usize, usize) -> Matrix,
    alpha: &[Rational],
    p: usize,
    beta: &[Rational],
    fault: SignFault,
) -> Result<Rational, SimplicialError> {
    let n = k.dim();
    if p > n {
        return Err(SimplicialError::DegreeMismatch { p, q: 0, n });
    }
    let mut total = Rational::zero();
    for (t, sigma) in k.simplices(n).iter().enumerate() {
        let (back, _) = back_front(sigma, p).expect("p ≤ n");
        let (_, front) = back_front(sigma, n - p).expect("p ≤ n");
        let a = dual_layout.value(k, alpha, k.index[&back]);
        let b = layout.value(k, beta, k.index[&front]);
        if a.iter().all(Zero::is_zero) || b.iter().all(Zero::is_zero) {
            continue;
        }
        let moved: Vector = if p == 0 { b.to_vec() } else { hol(sigma[0], sigma[p]).mul_vec(b) };
        let v0 = sigma[0];
        let mut local = Rational::zero();
        for (i, (x, y)) in a.iter().zip(&moved).enumerate() {
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let mut s = cup_sign(p, dual_layout.fiber_parity(v0, i)) * cycle.signs[t];
            if fault.flip_degree == Some(p) {
                s = -s;
            }
            local += x * y * Rational::from_integer(s.into());
        }
        total += local;
    }
    Ok(total)
}

/// The cup pairing as a sparse matrix, rows indexing cochains of the dual
/// system and columns cochains of the system itself. Summed over all `p`.
pub fn cup_pairing_matrix(
    k: &OrderedComplex,
    cycle: &FundamentalCycle,
    dual_layout: &CochainLayout,
    layout: &CochainLayout,
    hol: &dyn Fn(usize, usize) -> Matrix,
    fault: SignFault,
) -> SparseMatrix {
    let n = k.dim();
    let mut m = SparseMatrix::zeros(dual_layout.total, layout.total);
    for (t, sigma) in k.simplices(n).iter().enumerate() {
        for p in 0..=n {
            let (back, _) = back_front(sigma, p).expect("p ≤ n");
            let (_, front) = back_front(sigma, n - p).expect("p ≤ n");
            let (ra, cb) = (dual_layout.offsets[k.index[&back]], layout.offsets[k.index[&front]]);
            let v0 = sigma[0];
            let h = if p == 0 {
                Matrix::identity(layout.fiber_dim(sigma[p]))
            } else {
                hol(v0, sigma[p])
            };
            for i in 0..dual_layout.fiber_dim(v0) {
                let mut s = cup_sign(p, dual_layout.fiber_parity(v0, i)) * cycle.signs[t];
                if fault.flip_degree == Some(p) {
                    s = -s;
                }
                for j in 0..h.cols() {
                    let x = h.get(i, j);
                    if !x.is_zero() {
                        m.add_entry(ra + i, cb + j, x * Rational::from_integer(s.into()));
                    }
                }
            }
        }
    }
    m
}
