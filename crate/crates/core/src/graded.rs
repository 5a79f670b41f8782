//! Z2-graded vector spaces and determinant lines.
//!
//! A determinant line `det V = ∧top V⁰ ⊗ (∧top V¹)*` is one-dimensional, so
//! every canonical isomorphism between such lines is recorded as a single
//! rational scalar relative to explicitly chosen bases. Signs of these scalars
//! depend on ordering conventions and are reported but never relied upon.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexes::Z2Complex;
use crate::linalg::{
    change_of_basis_det, coordinates, is_zero_vec, rank_of, LinalgError, Matrix, Rational, Vector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_int(k: usize) -> Parity {
        if k.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn add(self, other: Parity) -> Parity {
        Parity::from_int(self.bit() + other.bit())
    }

    pub fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// `(-1)^self`.
    pub fn sign(self) -> i64 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "0̄"),
            Parity::Odd => write!(f, "1̄"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetError {
    #[error("wedge is degenerate: {0}")]
    DegenerateWedge(String),
    #[error("sequence is not exact: {0}")]
    NotExact(String),
    #[error("differential does not square to zero")]
    NotAComplex,
    #[error("vector {0} is not parity-homogeneous")]
    NotHomogeneous(usize),
    #[error("invalid cohomology basis: {0}")]
    InvalidCohomologyBasis(String),
    #[error("invalid filtration data: {0}")]
    InvalidFiltration(String),
    #[error("duplicate basis label {0}")]
    DuplicateLabel(String),
    #[error("map does not respect the grading: {0}")]
    ParityViolation(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A Z2-graded vector space with a chosen, labelled basis. The order of the
/// labels fixes the coordinate order; parities may interleave.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSpace {
    labels: Vec<String>,
    parities: Vec<Parity>,
}

impl GradedSpace {
    pub fn new(even_basis: Vec<String>, odd_basis: Vec<String>) -> Result<Self, DetError> {
        let parities = std::iter::repeat_n(Parity::Even, even_basis.len())
            .chain(std::iter::repeat_n(Parity::Odd, odd_basis.len()))
            .collect();
        let mut labels = even_basis;
        labels.extend(odd_basis);
        Self::from_labelled(labels, parities)
    }

    pub fn from_labelled(labels: Vec<String>, parities: Vec<Parity>) -> Result<Self, DetError> {
        assert_eq!(labels.len(), parities.len());
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(DetError::DuplicateLabel(l.clone()));
            }
        }
        Ok(GradedSpace { labels, parities })
    }

    /// Generic labels `e0, e1, …` and `o0, o1, …`.
    pub fn from_dims(even: usize, odd: usize) -> Self {
        let e = (0..even).map(|i| format!("e{i}")).collect();
        let o = (0..odd).map(|i| format!("o{i}")).collect();
        Self::new(e, o).expect("generated labels are unique")
    }

    pub fn from_parities(parities: Vec<Parity>) -> Self {
        let labels = (0..parities.len()).map(|i| format!("b{i}")).collect();
        GradedSpace { labels, parities }
    }

    pub fn dim(&self) -> usize {
        self.parities.len()
    }

    pub fn even_dim(&self) -> usize {
        self.indices(Parity::Even).len()
    }

    pub fn odd_dim(&self) -> usize {
        self.indices(Parity::Odd).len()
    }

    pub fn dim_of(&self, p: Parity) -> usize {
        self.indices(p).len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.parities[i]
    }

    pub fn indices(&self, p: Parity) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parities[i] == p).collect()
    }

    pub fn even_basis(&self) -> Vec<&str> {
        self.indices(Parity::Even).into_iter().map(|i| self.labels[i].as_str()).collect()
    }

    pub fn odd_basis(&self) -> Vec<&str> {
        self.indices(Parity::Odd).into_iter().map(|i| self.labels[i].as_str()).collect()
    }

    /// `ΠV`: same labels, every parity reversed.
    pub fn parity_shift(&self) -> GradedSpace {
        GradedSpace {
            labels: self.labels.clone(),
            parities: self.parities.iter().map(|p| p.flip()).collect(),
        }
    }

    /// `V*` with the dual basis.
    pub fn dual(&self) -> GradedSpace {
        GradedSpace {
            labels: self.labels.iter().map(|l| format!("{l}*")).collect(),
            parities: self.parities.clone(),
        }
    }

    pub fn direct_sum(&self, other: &GradedSpace) -> GradedSpace {
        let mut labels: Vec<String> = self.labels.iter().map(|l| format!("L.{l}")).collect();
        labels.extend(other.labels.iter().map(|l| format!("R.{l}")));
        let mut parities = self.parities.clone();
        parities.extend_from_slice(&other.parities);
        GradedSpace { labels, parities }
    }

    /// Parity of a vector, `None` when it mixes parities. The zero vector is
    /// reported as even.
    pub fn vector_parity(&self, v: &[Rational]) -> Option<Parity> {
        let mut found = None;
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            match found {
                None => found = Some(self.parities[i]),
                Some(p) if p != self.parities[i] => return None,
                _ => {}
            }
        }
        Some(found.unwrap_or(Parity::Even))
    }

    /// Restricts a full-coordinate vector to the indices of parity `p`.
    pub fn component(&self, v: &[Rational], p: Parity) -> Vector {
        self.indices(p).into_iter().map(|i| v[i].clone()).collect()
    }

    /// Embeds component coordinates of parity `p` into full coordinates.
    pub fn embed(&self, v: &[Rational], p: Parity) -> Vector {
        let mut out = vec![Rational::zero(); self.dim()];
        for (x, i) in v.iter().zip(self.indices(p)) {
            out[i] = x.clone();
        }
        out
    }

    pub fn standard_vector(&self, i: usize) -> Vector {
        let mut v = vec![Rational::zero(); self.dim()];
        v[i] = Rational::one();
        v
    }
}

/// A homogeneous linear map between graded spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedMap {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub parity: Parity,
    /// `target.dim() × source.dim()` in the two spaces' coordinate orders.
    pub matrix: Matrix,
}

impl GradedMap {
    pub fn new(source: GradedSpace, target: GradedSpace, parity: Parity, matrix: Matrix) -> Result<Self, DetError> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(LinalgError::DimensionMismatch(format!(
                "map matrix is {}x{}, spaces have dims {} -> {}",
                matrix.rows(),
                matrix.cols(),
                source.dim(),
                target.dim()
            ))
            .into());
        }
        for i in 0..target.dim() {
            for j in 0..source.dim() {
                if !matrix.get(i, j).is_zero() && target.parity(i) != source.parity(j).add(parity) {
                    return Err(DetError::ParityViolation(format!(
                        "entry ({i}, {j}) connects {} to {} in a map of parity {parity}",
                        source.parity(j),
                        target.parity(i)
                    )));
                }
            }
        }
        Ok(GradedMap { source, target, parity, matrix })
    }
}

/// An element `coefficient · ∧even_wedge ⊗ (∧odd_wedge)*` of `det V`. Wedge
/// vectors are in component coordinates of their parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetElement {
    pub space: GradedSpace,
    pub even_wedge: Vec<Vector>,
    pub odd_wedge: Vec<Vector>,
    pub coefficient: Rational,
}

impl DetElement {
    /// The wedge of the space's own basis; for the zero space this is the
    /// unit `1` of the scalar line.
    pub fn standard(space: &GradedSpace) -> Self {
        let unit = |n: usize| Matrix::identity(n).columns();
        DetElement {
            even_wedge: unit(space.even_dim()),
            odd_wedge: unit(space.odd_dim()),
            coefficient: Rational::one(),
            space: space.clone(),
        }
    }

    /// Builds the element from homogeneous full-coordinate vectors, keeping
    /// their relative order inside each parity.
    pub fn from_vectors(space: &GradedSpace, vectors: &[Vector]) -> Result<Self, DetError> {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (k, v) in vectors.iter().enumerate() {
            if is_zero_vec(v) {
                return Err(DetError::DegenerateWedge(format!("vector {k} is zero")));
            }
            match space.vector_parity(v) {
                Some(Parity::Even) => even.push(space.component(v, Parity::Even)),
                Some(Parity::Odd) => odd.push(space.component(v, Parity::Odd)),
                None => return Err(DetError::NotHomogeneous(k)),
            }
        }
        Ok(DetElement {
            space: space.clone(),
            even_wedge: even,
            odd_wedge: odd,
            coefficient: Rational::one(),
        })
    }

    pub fn scaled(mut self, c: &Rational) -> Self {
        self.coefficient *= c;
        self
    }
}

/// The scalar `r` with `x = r · y` in `det V`.
pub fn ratio(x: &DetElement, y: &DetElement) -> Result<Rational, DetError> {
    if x.space.even_dim() != y.space.even_dim() || x.space.odd_dim() != y.space.odd_dim() {
        return Err(LinalgError::DimensionMismatch("elements of different lines".into()).into());
    }
    let even = wedge_det(x.space.even_dim(), &x.even_wedge, &y.even_wedge)?;
    let odd = wedge_det(x.space.odd_dim(), &x.odd_wedge, &y.odd_wedge)?;
    if x.coefficient.is_zero() || y.coefficient.is_zero() {
        return Err(DetError::DegenerateWedge("zero coefficient".into()));
    }
    Ok(&x.coefficient * even / (&y.coefficient * odd))
}

/// `det T` where `xs = ys · T`, both being bases of a `dim`-dimensional space.
fn wedge_det(dim: usize, xs: &[Vector], ys: &[Vector]) -> Result<Rational, DetError> {
    if xs.len() != dim || ys.len() != dim {
        return Err(DetError::DegenerateWedge(format!(
            "wedge of {} and {} vectors in a space of dimension {dim}",
            xs.len(),
            ys.len()
        )));
    }
    if rank_of(dim, xs) != dim || rank_of(dim, ys) != dim {
        return Err(DetError::DegenerateWedge("dependent wedge vectors".into()));
    }
    Ok(change_of_basis_det(dim, xs, ys)?)
}

/// Scalar with `std_wedge(V) = s · (∧ basis)` for full-coordinate vectors
/// `basis` forming a homogeneous basis of `V`.
pub fn standard_ratio(space: &GradedSpace, basis: &[Vector]) -> Result<Rational, DetError> {
    ratio(&DetElement::standard(space), &DetElement::from_vectors(space, basis)?)
}

/// A norm on a determinant line, declared by an element of norm one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetNorm {
    pub reference: DetElement,
}

impl DetNorm {
    pub fn norm(&self, x: &DetElement) -> Result<Rational, DetError> {
        Ok(num_traits::Signed::abs(&ratio(x, &self.reference)?))
    }
}

/// For `0 → U → V → W → 0` with even maps, the scalar `s` relating
/// `std(V) = s · (inc(std U) ∧ lift(std W))`, i.e. the image of the standard
/// wedge of `V` under `det V ≅ det U ⊗ det W`.
pub fn det_ses(inc: &GradedMap, proj: &GradedMap) -> Result<Rational, DetError> {
    if inc.target != proj.source {
        return Err(DetError::NotExact("middle spaces differ".into()));
    }
    if inc.parity != Parity::Even || proj.parity != Parity::Even {
        return Err(DetError::NotExact("short exact sequences use even maps".into()));
    }
    let (u, v, w) = (&inc.source, &inc.target, &proj.target);
    if !proj.matrix.mul(&inc.matrix).is_zero() {
        return Err(DetError::NotExact("composite is nonzero".into()));
    }
    if inc.matrix.rank() != u.dim() {
        return Err(DetError::NotExact("first map is not injective".into()));
    }
    if proj.matrix.rank() != w.dim() {
        return Err(DetError::NotExact("second map is not surjective".into()));
    }
    if v.dim() != u.dim() + w.dim() {
        return Err(DetError::NotExact("dimensions do not add up".into()));
    }
    let mut basis = inc.matrix.columns();
    let lifts = proj.matrix.solve_many(&Matrix::identity(w.dim()).columns())?;
    basis.extend(lifts);
    // Images of homogeneous basis vectors under even maps stay homogeneous;
    // order inside each parity: U first, then W.
    standard_ratio(v, &basis)
}

/// How bases of the auxiliary spaces `B` and `Z` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Canonical,
    /// Canonical bases twisted by seeded random invertible integer matrices.
    Seeded(u64),
}

pub(crate) fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| crate::linalg::q(rng.gen_range(-3..=3))).collect())
            .collect();
        let m = Matrix::from_rows(rows);
        if n == 0 || !m.det().expect("square").is_zero() {
            return m;
        }
    }
}

fn twist(vs: Vec<Vector>, dim: usize, rng: Option<&mut ChaCha8Rng>) -> Vec<Vector> {
    match rng {
        Some(rng) if !vs.is_empty() => {
            let g = random_invertible(rng, vs.len());
            let m = Matrix::from_columns(dim, &vs).mul(&g);
            m.columns()
        }
        _ => vs,
    }
}

/// The image of the standard wedge of `C` under `det C ≅ det H(C)`, relative
/// to the wedge of the cohomology basis represented by the cocycles `h`.
///
/// Realized through `0 → B → Z → H → 0` and `0 → Z → C → ΠB → 0`; the
/// auxiliary bases of `B` and `Z` are chosen according to `choice`.
pub fn det_cohomology(c: &Z2Complex, h: &[Vector], choice: BasisChoice) -> Result<Rational, DetError> {
    let space = c.space();
    let n = space.dim();
    let d = c.differential().to_dense();
    if !d.mul(&d).is_zero() {
        return Err(DetError::NotAComplex);
    }
    let mut rng = match choice {
        BasisChoice::Canonical => None,
        BasisChoice::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
    };
    for (k, v) in h.iter().enumerate() {
        if space.vector_parity(v).is_none() {
            return Err(DetError::NotHomogeneous(k));
        }
        if !is_zero_vec(&d.mul_vec(v)) {
            return Err(DetError::InvalidCohomologyBasis(format!("vector {k} is not a cocycle")));
        }
    }

    // Z and B per parity, in full coordinates.
    let mut z_all = Vec::new();
    let mut b_all = Vec::new();
    for p in [Parity::Even, Parity::Odd] {
        let idx = space.indices(p);
        let all_rows: Vec<usize> = (0..n).collect();
        let block = d.select(&all_rows, &idx);
        let z: Vec<Vector> = block
            .kernel_basis()
            .into_iter()
            .map(|k| space.embed(&k, p))
            .collect();
        z_all.extend(twist(z, n, rng.as_mut()));
        // d maps parity p onto B of parity p.flip().
        let b: Vec<Vector> = block.image_basis();
        b_all.extend(twist(b, n, rng.as_mut()));
    }

    // 0 → B → Z → H → 0.
    let z_space = GradedSpace::from_parities(z_all.iter().map(|v| space.vector_parity(v).unwrap()).collect());
    let b_space = GradedSpace::from_parities(b_all.iter().map(|v| space.vector_parity(v).unwrap()).collect());
    let h_space = GradedSpace::from_parities(h.iter().map(|v| space.vector_parity(v).unwrap()).collect());
    if b_all.len() + h.len() != z_all.len() {
        return Err(DetError::InvalidCohomologyBasis(format!(
            "expected {} classes, got {}",
            z_all.len() - b_all.len(),
            h.len()
        )));
    }
    let mut bh = b_all.clone();
    bh.extend_from_slice(h);
    if rank_of(n, &bh) != bh.len() {
        return Err(DetError::InvalidCohomologyBasis("classes are dependent modulo coboundaries".into()));
    }
    let b_in_z = coordinates(n, &z_all, &b_all)?;
    let inc1 = GradedMap::new(
        b_space.clone(),
        z_space.clone(),
        Parity::Even,
        Matrix::from_columns(z_all.len(), &b_in_z),
    )?;
    let z_in_bh = coordinates(n, &bh, &z_all)?;
    let mut proj1 = Matrix::zeros(h.len(), z_all.len());
    for (j, coords) in z_in_bh.iter().enumerate() {
        for (i, x) in coords[b_all.len()..].iter().enumerate() {
            proj1.set(i, j, x.clone());
        }
    }
    let proj1 = GradedMap::new(z_space.clone(), h_space, Parity::Even, proj1)?;
    let s1 = det_ses(&inc1, &proj1)?;

    // 0 → Z → C → ΠB → 0, the second map being d read in B coordinates.
    let inc2 = GradedMap::new(z_space, space.clone(), Parity::Even, Matrix::from_columns(n, &z_all))?;
    let pb_space = b_space.parity_shift();
    let d_cols = d.columns();
    let d_in_b = coordinates(n, &b_all, &d_cols)?;
    let proj2 = GradedMap::new(
        space.clone(),
        pb_space,
        Parity::Even,
        Matrix::from_columns(b_all.len(), &d_in_b),
    )?;
    let s2 = det_ses(&inc2, &proj2)?;
    Ok(s1 * s2)
}

/// Image of `∧basis` under `det V ≅ det GV`, relative to the wedge of the
/// associated-graded basis represented by `graded_reps[p] ⊂ F_p`.
///
/// `filtration[p]` spans `F_p`; the list is decreasing and ends implicitly
/// with `0`.
pub fn det_filtered(
    space: &GradedSpace,
    basis: &[Vector],
    filtration: &[Vec<Vector>],
    graded_reps: &[Vec<Vector>],
) -> Result<Rational, DetError> {
    let n = space.dim();
    if filtration.len() != graded_reps.len() {
        return Err(DetError::InvalidFiltration("one representative family per level".into()));
    }
    for p in 0..filtration.len() {
        let here = rank_of(n, &filtration[p]);
        let below = filtration.get(p + 1).map_or(0, |f| rank_of(n, f));
        if graded_reps[p].len() != here - below {
            return Err(DetError::InvalidFiltration(format!(
                "level {p}: {} representatives for a quotient of dimension {}",
                graded_reps[p].len(),
                here - below
            )));
        }
        let mut lower: Vec<Vector> = filtration.get(p + 1).cloned().unwrap_or_default();
        if rank_of(n, &lower) != below || (p + 1 < filtration.len() && below > here) {
            return Err(DetError::InvalidFiltration(format!("level {p} is not decreasing")));
        }
        let mut with_reps = filtration[p].clone();
        with_reps.extend(graded_reps[p].iter().cloned());
        if rank_of(n, &with_reps) != here {
            return Err(DetError::InvalidFiltration(format!("level {p}: representative outside F_p")));
        }
        lower.extend(graded_reps[p].iter().cloned());
        if rank_of(n, &lower) != here {
            return Err(DetError::InvalidFiltration(format!(
                "level {p}: representatives dependent modulo F_{}",
                p + 1
            )));
        }
    }
    let reps: Vec<Vector> = graded_reps.iter().flatten().cloned().collect();
    ratio(&DetElement::from_vectors(space, basis)?, &DetElement::from_vectors(space, &reps)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frac, q, SparseMatrix};
    use num_traits::Signed;

    #[test]
    fn parity_shift_swaps_and_is_involutive() {
        let v = GradedSpace::from_dims(2, 1);
        let pv = v.parity_shift();
        assert_eq!((pv.even_dim(), pv.odd_dim()), (1, 2));
        assert_eq!(pv.parity_shift(), v);
    }

    #[test]
    fn shifted_dual_line_matches() {
        // det(ΠV*): its even part is (V¹)*, odd part (V⁰)*. The dual-basis
        // wedges identify with the standard element of det V with ratio ±1.
        let v = GradedSpace::from_dims(2, 3);
        let w = v.dual().parity_shift();
        assert_eq!((w.even_dim(), w.odd_dim()), (v.odd_dim(), v.even_dim()));
        // Scale V's basis by g = diag(2, 1 | 3, 1, 1). The dual basis scales by
        // g^{-1}; in det(ΠV*) the even part (V¹)* picks up 1/3 and the odd
        // part (V⁰)* sits dual, contributing 2. Both lines see ratio 2/3.
        let x = DetElement {
            even_wedge: vec![vec![q(2), q(0)], vec![q(0), q(1)]],
            odd_wedge: Matrix::diagonal(&[q(3), q(1), q(1)]).columns(),
            coefficient: q(1),
            space: v.clone(),
        };
        let rx = ratio(&x, &DetElement::standard(&v)).unwrap();
        let y = DetElement {
            even_wedge: Matrix::diagonal(&[frac(1, 3), q(1), q(1)]).columns(),
            odd_wedge: Matrix::diagonal(&[frac(1, 2), q(1)]).columns(),
            coefficient: q(1),
            space: w.clone(),
        };
        let ry = ratio(&y, &DetElement::standard(&w)).unwrap();
        assert_eq!(rx, frac(2, 3));
        assert_eq!(ry, rx);
    }

    #[test]
    fn ratio_examples() {
        let v = GradedSpace::from_dims(1, 0);
        let std = DetElement::standard(&v);
        assert_eq!(ratio(&std, &std).unwrap(), q(1));
        let mut x = std.clone();
        x.even_wedge = vec![vec![q(2)]];
        assert_eq!(ratio(&x, &std).unwrap(), q(2));
        let w = GradedSpace::from_dims(0, 1);
        let std = DetElement::standard(&w);
        let mut y = std.clone();
        y.odd_wedge = vec![vec![q(2)]];
        assert_eq!(ratio(&y, &std).unwrap(), frac(1, 2));
    }

    #[test]
    fn ratio_rejects_dependent_wedge() {
        let v = GradedSpace::from_dims(2, 0);
        let mut x = DetElement::standard(&v);
        x.even_wedge = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        assert!(matches!(ratio(&x, &DetElement::standard(&v)), Err(DetError::DegenerateWedge(_))));
    }

    #[test]
    fn ses_with_zero_kernel_term() {
        let u = GradedSpace::from_dims(0, 0);
        let v = GradedSpace::from_dims(1, 0);
        let inc = GradedMap::new(u, v.clone(), Parity::Even, Matrix::zeros(1, 0)).unwrap();
        let proj = GradedMap::new(v.clone(), v, Parity::Even, Matrix::from_i64(&[&[4]])).unwrap();
        // lift of the standard W vector is 1/4, so std V = 4 · lift.
        assert_eq!(det_ses(&inc, &proj).unwrap(), q(4));
    }

    #[test]
    fn ses_coordinate_split_is_unit() {
        let u = GradedSpace::from_dims(1, 1);
        let w = GradedSpace::from_dims(1, 0);
        let v = GradedSpace::new(vec!["a".into(), "c".into()], vec!["b".into()]).unwrap();
        let inc = GradedMap::new(u, v.clone(), Parity::Even, Matrix::from_i64(&[&[1, 0], &[0, 0], &[0, 1]])).unwrap();
        let proj = GradedMap::new(v, w, Parity::Even, Matrix::from_i64(&[&[0, 1, 0]])).unwrap();
        assert_eq!(det_ses(&inc, &proj).unwrap().abs(), q(1));
    }

    #[test]
    fn ses_detects_non_exactness() {
        let u = GradedSpace::from_dims(1, 0);
        let v = GradedSpace::from_dims(2, 0);
        let inc = GradedMap::new(u, v.clone(), Parity::Even, Matrix::from_i64(&[&[1], &[0]])).unwrap();
        let proj = GradedMap::new(v, GradedSpace::from_dims(1, 0), Parity::Even, Matrix::from_i64(&[&[1, 0]])).unwrap();
        assert!(matches!(det_ses(&inc, &proj), Err(DetError::NotExact(_))));
    }

    #[test]
    fn graded_map_rejects_wrong_blocks() {
        let v = GradedSpace::from_dims(1, 1);
        assert!(GradedMap::new(v.clone(), v.clone(), Parity::Odd, Matrix::identity(2)).is_err());
        assert!(GradedMap::new(v.clone(), v, Parity::Even, Matrix::identity(2)).is_ok());
    }

    fn two_term(a: i64) -> Z2Complex {
        let space = GradedSpace::from_dims(1, 1);
        let mut d = SparseMatrix::zeros(2, 2);
        d.add_entry(1, 0, q(a));
        Z2Complex::new(space, d, None).unwrap()
    }

    #[test]
    fn cohomology_det_of_identity_differential() {
        let s = det_cohomology(&two_term(1), &[], BasisChoice::Canonical).unwrap();
        assert_eq!(s.abs(), q(1));
    }

    #[test]
    fn cohomology_det_of_doubling() {
        // Hand computation: B¹ = ⟨f⟩, lift e/2; std = 2·(e/2) in even, f in
        // odd, so the scalar is 2.
        let s = det_cohomology(&two_term(2), &[], BasisChoice::Canonical).unwrap();
        assert_eq!(s, q(2));
        for seed in 0..20 {
            let t = det_cohomology(&two_term(2), &[], BasisChoice::Seeded(seed)).unwrap();
            assert_eq!(t.abs(), q(2));
        }
    }

    #[test]
    fn cohomology_det_rejects_bad_basis() {
        let c = Z2Complex::new(GradedSpace::from_dims(1, 0), SparseMatrix::zeros(1, 1), None).unwrap();
        assert!(matches!(
            det_cohomology(&c, &[], BasisChoice::Canonical),
            Err(DetError::InvalidCohomologyBasis(_))
        ));
        assert_eq!(det_cohomology(&c, &[vec![q(3)]], BasisChoice::Canonical).unwrap(), frac(1, 3));
    }

    #[test]
    fn filtered_trivial_and_adapted() {
        let v = GradedSpace::from_dims(2, 1);
        let std = Matrix::identity(3).columns();
        let one = det_filtered(&v, &std, std::slice::from_ref(&std), std::slice::from_ref(&std)).unwrap();
        assert_eq!(one.abs(), q(1));
        let f1 = vec![std[2].clone()];
        let two = det_filtered(&v, &std, &[std.clone(), f1.clone()], &[vec![std[0].clone(), std[1].clone()], f1]).unwrap();
        assert_eq!(two.abs(), q(1));
    }
}
