//! Z2-graded complexes with a bounded auxiliary Z-degree, their cohomology,
//! the spectral sequence of the decreasing degree filtration, pairings on its
//! pages, and the chain of determinant-line isomorphisms running through the
//! pages.

mod reduction;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use thiserror::Error;

pub use reduction::Reduction;

use crate::graded::{det_cohomology, det_filtered, BasisChoice, DetError, GradedSpace, Parity};
use crate::linalg::{coordinates, extend_basis, is_zero_vec, LinalgError, Matrix, Rational, SparseMatrix, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("differential does not square to zero")]
    NotAComplex,
    #[error("differential is not odd: entry ({0}, {1}) preserves parity")]
    NotOdd(usize, usize),
    #[error("differential lowers the degree: entry ({0}, {1})")]
    DegreeLowering(usize, usize),
    #[error("pairing is not skew-adjoint on basis pair ({a}, {b})")]
    NotSkewAdjoint { a: usize, b: usize },
    #[error("pairing has the wrong bidegree on basis pair ({a}, {b})")]
    WrongBidegree { a: usize, b: usize },
    #[error("vector is not a representative of the requested page entry: {0}")]
    NotARepresentative(String),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite Z2-graded complex `(C, d)` with `d` odd and `d² = 0`, optionally
/// carrying a Z-degree per basis vector which `d` never lowers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Z2Complex {
    space: GradedSpace,
    d: SparseMatrix,
    z_degree: Option<Vec<usize>>,
}

impl Z2Complex {
    pub fn new(space: GradedSpace, d: SparseMatrix, z_degree: Option<Vec<usize>>) -> Result<Self, ComplexError> {
        let n = space.dim();
        if d.rows() != n || d.cols() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "differential is {}x{} on a space of dimension {n}",
                d.rows(),
                d.cols()
            ))
            .into());
        }
        if let Some(z) = &z_degree {
            assert_eq!(z.len(), n, "one degree per basis vector");
        }
        for j in 0..n {
            for (i, _) in d.column(j) {
                if space.parity(*i) == space.parity(j) {
                    return Err(ComplexError::NotOdd(*i, j));
                }
                if let Some(z) = &z_degree {
                    if z[*i] < z[j] {
                        return Err(ComplexError::DegreeLowering(*i, j));
                    }
                }
            }
        }
        if !d.mul(&d).is_zero() {
            return Err(ComplexError::NotAComplex);
        }
        Ok(Z2Complex { space, d, z_degree })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn differential(&self) -> &SparseMatrix {
        &self.d
    }

    pub fn z_degree(&self) -> Option<&[usize]> {
        self.z_degree.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn direct_sum(&self, other: &Z2Complex) -> Z2Complex {
        let z_degree = match (&self.z_degree, &other.z_degree) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Z2Complex {
            space: self.space.direct_sum(&other.space),
            d: self.d.direct_sum(&other.d),
            z_degree,
        }
    }

    /// Replaces the differential by a different one on the same space,
    /// skipping the `d² = 0` check. Used to inject faults in negative tests.
    #[doc(hidden)]
    pub fn with_unchecked_differential(&self, d: SparseMatrix) -> Z2Complex {
        Z2Complex {
            space: self.space.clone(),
            d,
            z_degree: self.z_degree.clone(),
        }
    }
}

/// Cohomology of a complex with cocycle representatives and a projection from
/// cocycles to class coordinates.
#[derive(Debug, Clone)]
pub struct Cohomology {
    pub space: GradedSpace,
    pub representatives: Vec<Vector>,
    reduction: Reduction,
}

impl Cohomology {
    pub fn even_dim(&self) -> usize {
        self.space.even_dim()
    }

    pub fn odd_dim(&self) -> usize {
        self.space.odd_dim()
    }

    /// Coordinates of the class of a cocycle in the representative basis.
    pub fn class_coordinates(&self, cocycle: &[Rational]) -> Vector {
        self.reduction.class_coordinates(cocycle)
    }

    /// Image of the standard wedge of `C` relative to the representatives.
    pub fn standard_scalar(&self) -> &Rational {
        self.reduction.scalar()
    }
}

pub fn cohomology(c: &Z2Complex) -> Cohomology {
    let reduction = Reduction::new(c.differential(), c.space().parities());
    let parities = reduction.survivors().iter().map(|&i| c.space().parity(i)).collect();
    let labels = reduction
        .survivors()
        .iter()
        .map(|&i| format!("[{}]", c.space().labels()[i]))
        .collect();
    Cohomology {
        space: GradedSpace::from_labelled(labels, parities).expect("labels inherited from a valid space"),
        representatives: reduction.representatives(),
        reduction,
    }
}

/// `det C ≅ det H(C)` through sparse Gaussian elimination: the image of the
/// standard wedge relative to the wedge of the classes of `h`.
pub fn det_cohomology_sparse(c: &Z2Complex, h: &[Vector]) -> Result<Rational, ComplexError> {
    let coh = cohomology(c);
    let k = coh.space.dim();
    if h.len() != k {
        return Err(DetError::InvalidCohomologyBasis(format!("expected {k} classes, got {}", h.len())).into());
    }
    let d = c.differential();
    let mut coords = Vec::with_capacity(k);
    for (i, v) in h.iter().enumerate() {
        if c.space().vector_parity(v).is_none() {
            return Err(DetError::NotHomogeneous(i).into());
        }
        if !is_zero_vec(&d.mul_vec(v)) {
            return Err(DetError::InvalidCohomologyBasis(format!("vector {i} is not a cocycle")).into());
        }
        coords.push(coh.class_coordinates(v));
    }
    // std = s · ∧surv and ∧h = r · ∧surv, hence std = (s / r) · ∧h.
    let h_elem = crate::graded::DetElement::from_vectors(&coh.space, &coords)
        .map_err(|_| DetError::InvalidCohomologyBasis("a class vanishes".into()))?;
    let r = crate::graded::ratio(&h_elem, &crate::graded::DetElement::standard(&coh.space))
        .map_err(|_| DetError::InvalidCohomologyBasis("classes are dependent".into()))?;
    Ok(coh.standard_scalar() / r)
}

/// A complex with the decreasing filtration `F_p = span{ z_degree ≥ p }`,
/// `0 ≤ p ≤ top_degree`.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    base: Z2Complex,
    top_degree: usize,
    /// Dense copy of the differential, built on first use by the pages.
    dense: OnceLock<Matrix>,
}

impl FilteredComplex {
    pub fn new(base: Z2Complex, top_degree: usize) -> Result<Self, ComplexError> {
        let z = base
            .z_degree()
            .ok_or_else(|| LinalgError::DimensionMismatch("filtered complexes need a z-degree".into()))?;
        if let Some(&m) = z.iter().max() {
            if m > top_degree {
                return Err(LinalgError::DimensionMismatch(format!("degree {m} exceeds bound {top_degree}")).into());
            }
        }
        Ok(FilteredComplex {
            base,
            top_degree,
            dense: OnceLock::new(),
        })
    }

    pub fn base(&self) -> &Z2Complex {
        &self.base
    }

    pub fn top_degree(&self) -> usize {
        self.top_degree
    }

    fn degree(&self, i: usize) -> usize {
        self.base.z_degree().expect("checked at construction")[i]
    }

    /// Indices of parity `par` in `F_p` (all of them for `p ≤ 0`).
    fn filtered_indices(&self, p: i64, par: Parity) -> Vec<usize> {
        self.base
            .space()
            .indices(par)
            .into_iter()
            .filter(|&i| self.degree(i) as i64 >= p)
            .collect()
    }

    /// `Z_r^p = { a ∈ F_p : d a ∈ F_{p+r} }` in parity `par`, full coordinates.
    fn cycles(&self, r: i64, p: i64, par: Parity) -> Vec<Vector> {
        let n = self.base.dim();
        let cols = self.filtered_indices(p, par);
        if cols.is_empty() {
            return Vec::new();
        }
        let rows: Vec<usize> = self
            .base
            .space()
            .indices(par.flip())
            .into_iter()
            .filter(|&i| (self.degree(i) as i64) < p + r)
            .collect();
        let embed = |k: Vector| {
            let mut v = vec![Rational::zero(); n];
            for (x, &i) in k.into_iter().zip(&cols) {
                v[i] = x;
            }
            v
        };
        if rows.is_empty() {
            return (0..cols.len())
                .map(|j| {
                    let mut k = vec![Rational::zero(); cols.len()];
                    k[j] = Rational::one();
                    embed(k)
                })
                .collect();
        }
        self.dense
            .get_or_init(|| self.base.differential().to_dense())
            .select(&rows, &cols).kernel_basis().into_iter().map(embed).collect()
    }

    fn apply_d(&self, v: &[Rational]) -> Vector {
        self.base.differential().mul_vec(v)
    }

    /// The page `E_r`. For `r > top_degree` this is `E_∞`, the associated
    /// graded of `H(C)`.
    pub fn page(&self, r: usize) -> Page {
        let n = self.base.dim();
        let r = r as i64;
        let mut entries = BTreeMap::new();
        for p in 0..=self.top_degree as i64 {
            for par in [Parity::Even, Parity::Odd] {
                let z = self.cycles(r, p, par);
                // Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1}
                let mut rel = self.cycles(r - 1, p + 1, par);
                rel.extend(
                    self.cycles(r - 1, p - r + 1, par.flip())
                        .iter()
                        .map(|v| self.apply_d(v))
                        .filter(|v| !is_zero_vec(v)),
                );
                let relations = crate::linalg::independent_subset(n, &rel);
                let reps = extend_basis(n, &relations, &z);
                let mut basis = relations.clone();
                basis.extend(reps.iter().cloned());
                entries.insert(
                    (p as usize, par),
                    PageEntry {
                        representatives: reps,
                        relations,
                        basis,
                        dim: n,
                    },
                );
            }
        }
        Page {
            r: r as usize,
            top_degree: self.top_degree,
            entries,
        }
    }

    /// All pages `E_0, …, E_{top+1}`.
    pub fn pages(&self) -> Vec<Page> {
        (0..=self.top_degree + 1).map(|r| self.page(r)).collect()
    }

    /// The matrix of `d_r` on `page` in representative coordinates, rows and
    /// columns ordered as [`Page::flat_index`].
    pub fn page_differential(&self, page: &Page) -> Result<Matrix, ComplexError> {
        let idx = page.flat_index();
        let total = idx.len();
        let mut m = Matrix::zeros(total, total);
        for (&(p, par), entry) in &page.entries {
            let target_p = p + page.r;
            for (k, rep) in entry.representatives.iter().enumerate() {
                let col = page.offset(p, par) + k;
                let image = self.apply_d(rep);
                if target_p > self.top_degree {
                    continue;
                }
                let target = &page.entries[&(target_p, par.flip())];
                let coords = target.coordinates(&image)?;
                for (i, x) in coords.into_iter().enumerate() {
                    m.set(page.offset(target_p, par.flip()) + i, col, x);
                }
            }
        }
        Ok(m)
    }

    /// Total dimensions `(p, parity) ↦ dim E_r^{p,parity}`.
    pub fn page_dimensions(&self, r: usize) -> BTreeMap<(usize, Parity), usize> {
        self.page(r).dimensions()
    }
}

/// One subquotient `E_r^{p, parity}`: representatives in `F_p` of a basis of
/// the quotient by the span of `relations`.
#[derive(Debug, Clone)]
pub struct PageEntry {
    pub representatives: Vec<Vector>,
    pub relations: Vec<Vector>,
    basis: Vec<Vector>,
    dim: usize,
}

impl PageEntry {
    /// Coordinates of (the class of) `v` in the representative basis; `v`
    /// must lie in the span of representatives and relations.
    pub fn coordinates(&self, v: &[Rational]) -> Result<Vector, ComplexError> {
        if is_zero_vec(v) {
            return Ok(vec![Rational::zero(); self.representatives.len()]);
        }
        let c = coordinates(self.dim, &self.basis, &[v.to_vec()])
            .map_err(|_| ComplexError::NotARepresentative("vector outside the entry's cycles".into()))?;
        Ok(c[0][self.relations.len()..].to_vec())
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }
}

#[derive(Debug, Clone)]
pub struct Page {
    pub r: usize,
    pub top_degree: usize,
    pub entries: BTreeMap<(usize, Parity), PageEntry>,
}

impl Page {
    pub fn dimensions(&self) -> BTreeMap<(usize, Parity), usize> {
        self.entries.iter().map(|(k, e)| (*k, e.dim())).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.values().map(PageEntry::dim).sum()
    }

    /// `(p, parity)` for each flat coordinate, entries in key order.
    pub fn flat_index(&self) -> Vec<(usize, Parity)> {
        self.entries
            .iter()
            .flat_map(|(k, e)| std::iter::repeat_n(*k, e.dim()))
            .collect()
    }

    pub fn offset(&self, p: usize, par: Parity) -> usize {
        self.entries.range(..(p, par)).map(|(_, e)| e.dim()).sum()
    }

    pub fn graded_space(&self) -> GradedSpace {
        GradedSpace::from_parities(self.flat_index().into_iter().map(|(_, par)| par).collect())
    }

    /// All representatives in flat order.
    pub fn representatives(&self) -> Vec<Vector> {
        self.entries.values().flat_map(|e| e.representatives.iter().cloned()).collect()
    }

    /// Flat coordinates of a vector known to lie in `Z_r^p` with the given
    /// parity.
    pub fn flat_coordinates(&self, p: usize, par: Parity, v: &[Rational]) -> Result<Vector, ComplexError> {
        let entry = self
            .entries
            .get(&(p, par))
            .ok_or_else(|| ComplexError::NotARepresentative(format!("no entry ({p}, {par})")))?;
        let local = entry.coordinates(v)?;
        let mut out = vec![Rational::zero(); self.total_dim()];
        let off = self.offset(p, par);
        for (i, x) in local.into_iter().enumerate() {
            out[off + i] = x;
        }
        Ok(out)
    }
}

/// Determinant chain `det C ≅ det E_0 ≅ det E_1 ≅ … ≅ det E_∞ ≅ det GH ≅ det H`
/// applied to the standard wedge of `C`, relative to the classes of the
/// cocycles `h`.
pub fn det_chain(f: &FilteredComplex, h: &[Vector]) -> Result<Rational, ComplexError> {
    let pages = f.pages();
    let c = f.base();
    let n = c.dim();
    let std_basis = Matrix::identity(n).columns();
    let filtration: Vec<Vec<Vector>> = (0..=f.top_degree())
        .map(|p| {
            let mut idx = f.filtered_indices(p as i64, Parity::Even);
            idx.extend(f.filtered_indices(p as i64, Parity::Odd));
            idx.into_iter().map(|i| c.space().standard_vector(i)).collect()
        })
        .collect();
    let graded: Vec<Vec<Vector>> = (0..=f.top_degree())
        .map(|p| {
            [Parity::Even, Parity::Odd]
                .iter()
                .flat_map(|&par| pages[0].entries[&(p, par)].representatives.iter().cloned())
                .collect()
        })
        .collect();
    let s0 = det_filtered(c.space(), &std_basis, &filtration, &graded)?;
    // det_filtered orders the graded wedge by level; realign with the page's
    // flat order.
    let level_order: Vec<Vector> = graded.iter().flatten().cloned().collect();
    let flat = pages[0].representatives();
    let align = crate::graded::ratio(
        &crate::graded::DetElement::from_vectors(c.space(), &level_order)?,
        &crate::graded::DetElement::from_vectors(c.space(), &flat)?,
    )?;
    Ok(s0 * align * det_chain_tail(f, &pages, 0, h)?)
}

/// Continues the determinant chain from page `r0`, whose standard wedge is
/// the wedge of `pages[r0]`'s representatives.
fn det_chain_tail(f: &FilteredComplex, pages: &[Page], r0: usize, h: &[Vector]) -> Result<Rational, ComplexError> {
    let mut s = Rational::one();
    for r in r0..=f.top_degree() {
        let page = &pages[r];
        let next = &pages[r + 1];
        let dr = f.page_differential(page)?;
        let e_r = Z2Complex::new(page.graded_space(), SparseMatrix::from_dense(&dr), None)?;
        let mut classes = Vec::new();
        for (&(p, par), entry) in &next.entries {
            for rep in &entry.representatives {
                classes.push(page.flat_coordinates(p, par, rep)?);
            }
        }
        s *= det_cohomology(&e_r, &classes, BasisChoice::Canonical)?;
    }
    Ok(s * associated_graded_to_cohomology(f, &pages[f.top_degree() + 1], h)?)
}

/// Chain from page `r0 ≥ 0`, starting at the wedge of `start`: vectors given
/// with their filtration level, each lying in `Z_{r0}^p` and together
/// representing a basis of `E_{r0}`.
pub fn det_chain_from(
    f: &FilteredComplex,
    r0: usize,
    start: &[(usize, Vector)],
    h: &[Vector],
) -> Result<Rational, ComplexError> {
    let pages = f.pages();
    let page = &pages[r0];
    let space = page.graded_space();
    let mut coords = Vec::with_capacity(start.len());
    for (p, v) in start {
        let par = f
            .base()
            .space()
            .vector_parity(v)
            .ok_or(ComplexError::NotARepresentative("inhomogeneous start vector".into()))?;
        coords.push(page.flat_coordinates(*p, par, v)?);
    }
    let r = crate::graded::ratio(
        &crate::graded::DetElement::from_vectors(&space, &coords)?,
        &crate::graded::DetElement::standard(&space),
    )?;
    // start = r · std(E_r0), and std(E_r0) maps to tail · h.
    Ok(r * det_chain_tail(f, &pages, r0, h)?)
}

/// `det E_∞ = det GH ≅ det H`: the standard wedge of `E_∞` (whose
/// representatives are cocycles lifting an adapted basis of `H`) relative to
/// the wedge of the classes of `h`.
fn associated_graded_to_cohomology(f: &FilteredComplex, e_inf: &Page, h: &[Vector]) -> Result<Rational, ComplexError> {
    let c = f.base();
    let coh = cohomology(c);
    let k = coh.space.dim();
    if h.len() != k {
        return Err(DetError::InvalidCohomologyBasis(format!("expected {k} classes, got {}", h.len())).into());
    }
    let d = c.differential();
    for (i, v) in h.iter().enumerate() {
        if !is_zero_vec(&d.mul_vec(v)) {
            return Err(DetError::InvalidCohomologyBasis(format!("vector {i} is not a cocycle")).into());
        }
    }
    let h_coords: Vec<Vector> = h.iter().map(|v| coh.class_coordinates(v)).collect();
    let mut levels: Vec<Vec<Vector>> = Vec::new();
    for p in 0..=f.top_degree() {
        let mut level = Vec::new();
        for par in [Parity::Even, Parity::Odd] {
            for rep in &e_inf.entries[&(p, par)].representatives {
                level.push(coh.class_coordinates(rep));
            }
        }
        levels.push(level);
    }
    let filtration: Vec<Vec<Vector>> = (0..levels.len())
        .map(|p| levels[p..].iter().flatten().cloned().collect())
        .collect();
    // ∧h ↦ t · ∧(adapted lifts) under det H ≅ det GH.
    let t = det_filtered(&coh.space, &h_coords, &filtration, &levels)?;
    let level_order: Vec<Vector> = levels.iter().flatten().cloned().collect();
    let flat: Vec<Vector> = e_inf.representatives().iter().map(|v| coh.class_coordinates(v)).collect();
    let align = crate::graded::ratio(
        &crate::graded::DetElement::from_vectors(&coh.space, &flat)?,
        &crate::graded::DetElement::from_vectors(&coh.space, &level_order)?,
    )?;
    // std(E_∞) = ∧flat = align · ∧levels = (align / t) · ∧h.
    Ok(align / t)
}

/// Values of a bilinear pairing between the pages of two filtered complexes,
/// one block per `(p, parity)` of the first page, pairing it with
/// `(n − p, parity + n)` of the second.
#[derive(Debug, Clone)]
pub struct PagePairing {
    pub r: usize,
    pub n: usize,
    pub blocks: BTreeMap<(usize, Parity), Matrix>,
    left: Page,
    right: Page,
    left_d: Matrix,
    right_d: Matrix,
}

impl PagePairing {
    /// Every block is square and invertible.
    pub fn is_nondegenerate(&self) -> bool {
        self.blocks
            .values()
            .all(|m| m.is_square() && (m.rows() == 0 || !m.det().expect("square").is_zero()))
    }

    /// Checks `⟨d_r a, b⟩ = −(−1)^{|a|} ⟨a, d_r b⟩` on all pairs of page basis
    /// vectors.
    pub fn check_skew_adjoint(&self) -> Result<(), ComplexError> {
        let full = self.full_matrix();
        let lhs = self.left_d.transpose().mul(&full);
        let rhs = full.mul(&self.right_d);
        let left_idx = self.left.flat_index();
        for (a, &(_, par)) in left_idx.iter().enumerate() {
            for b in 0..full.cols() {
                let expected = -rhs.get(a, b).clone() * crate::linalg::q(par.sign());
                if *lhs.get(a, b) != expected {
                    return Err(ComplexError::NotSkewAdjoint { a, b });
                }
            }
        }
        Ok(())
    }

    /// The pairing as one matrix in flat coordinates of both pages.
    pub fn full_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.left.total_dim(), self.right.total_dim());
        let np = Parity::from_int(self.n);
        for (&(p, par), block) in &self.blocks {
            let row0 = self.left.offset(p, par);
            let col0 = self.right.offset(self.n - p, par.add(np));
            for i in 0..block.rows() {
                for j in 0..block.cols() {
                    m.set(row0 + i, col0 + j, block.get(i, j).clone());
                }
            }
        }
        m
    }
}

/// Validates a chain-level pairing of bidegree `(−n, 0̄)` (skew-adjointness on
/// every basis pair, degree and parity support) and induces it on page `r`.
pub fn page_pairing(
    left: &FilteredComplex,
    right: &FilteredComplex,
    pairing: &Matrix,
    n: usize,
    r: usize,
) -> Result<PagePairing, ComplexError> {
    validate_chain_pairing(left.base(), right.base(), pairing, n)?;
    let lp = left.page(r);
    let rp = right.page(r);
    let np = Parity::from_int(n);
    let mut blocks = BTreeMap::new();
    for (&(p, par), entry) in &lp.entries {
        if p > n {
            continue;
        }
        let partner = &rp.entries[&(n - p, par.add(np))];
        let mut m = Matrix::zeros(entry.dim(), partner.dim());
        for (i, a) in entry.representatives.iter().enumerate() {
            let pa = pairing.transpose().mul_vec(a);
            for (j, b) in partner.representatives.iter().enumerate() {
                let v = pa.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y);
                m.set(i, j, v);
            }
        }
        blocks.insert((p, par), m);
    }
    let left_d = left.page_differential(&lp)?;
    let right_d = right.page_differential(&rp)?;
    Ok(PagePairing {
        r,
        n,
        blocks,
        left: lp,
        right: rp,
        left_d,
        right_d,
    })
}

pub fn validate_chain_pairing(a: &Z2Complex, b: &Z2Complex, pairing: &Matrix, n: usize) -> Result<(), ComplexError> {
    if pairing.rows() != a.dim() || pairing.cols() != b.dim() {
        return Err(LinalgError::DimensionMismatch("pairing matrix shape".into()).into());
    }
    let np = Parity::from_int(n);
    for i in 0..a.dim() {
        for j in 0..b.dim() {
            if pairing.get(i, j).is_zero() {
                continue;
            }
            let degrees_ok = match (a.z_degree(), b.z_degree()) {
                (Some(za), Some(zb)) => za[i] + zb[j] == n,
                _ => true,
            };
            if !degrees_ok || a.space().parity(i).add(b.space().parity(j)) != np {
                return Err(ComplexError::WrongBidegree { a: i, b: j });
            }
        }
    }
    let da = a.differential().to_dense();
    let db = b.differential().to_dense();
    let lhs = da.transpose().mul(pairing);
    let rhs = pairing.mul(&db);
    for i in 0..a.dim() {
        let sign = crate::linalg::q(a.space().parity(i).sign());
        for j in 0..b.dim() {
            if *lhs.get(i, j) != -(rhs.get(i, j) * &sign) {
                return Err(ComplexError::NotSkewAdjoint { a: i, b: j });
            }
        }
    }
    Ok(())
}

/// Matrix of the induced pairing between two families of cocycles.
pub fn pairing_matrix(pairing: &Matrix, left: &[Vector], right: &[Vector]) -> Matrix {
    let mut m = Matrix::zeros(left.len(), right.len());
    for (i, a) in left.iter().enumerate() {
        let pa = pairing.transpose().mul_vec(a);
        for (j, b) in right.iter().enumerate() {
            m.set(i, j, pa.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use num_traits::Signed;

    fn two_term(a: i64) -> Z2Complex {
        let mut d = SparseMatrix::zeros(2, 2);
        d.add_entry(1, 0, q(a));
        Z2Complex::new(GradedSpace::from_dims(1, 1), d, Some(vec![0, 1])).unwrap()
    }

    #[test]
    fn rejects_non_complex() {
        let mut d = SparseMatrix::zeros(2, 2);
        d.add_entry(1, 0, q(1));
        d.add_entry(0, 1, q(1));
        assert_eq!(
            Z2Complex::new(GradedSpace::from_dims(1, 1), d, None),
            Err(ComplexError::NotAComplex)
        );
    }

    #[test]
    fn zero_differential_cohomology_is_everything() {
        let c = Z2Complex::new(GradedSpace::from_dims(2, 1), SparseMatrix::zeros(3, 3), None).unwrap();
        let h = cohomology(&c);
        assert_eq!((h.even_dim(), h.odd_dim()), (2, 1));
        for (i, rep) in h.representatives.iter().enumerate() {
            let mut e = vec![Rational::zero(); 3];
            e[i] = Rational::one();
            assert_eq!(h.class_coordinates(rep), e);
        }
    }

    #[test]
    fn identity_like_differential_is_acyclic() {
        let h = cohomology(&two_term(1));
        assert_eq!(h.space.dim(), 0);
        assert_eq!(det_cohomology_sparse(&two_term(5), &[]).unwrap(), q(5));
    }

    #[test]
    fn one_step_filtration_pages() {
        let c = Z2Complex::new(GradedSpace::from_dims(1, 1), {
            let mut d = SparseMatrix::zeros(2, 2);
            d.add_entry(1, 0, q(3));
            d
        }, Some(vec![0, 0]))
        .unwrap();
        let f = FilteredComplex::new(c, 0).unwrap();
        assert_eq!(f.page(1).total_dim(), 0);
        assert_eq!(f.page(5).total_dim(), 0);
        let chain = det_chain(&f, &[]).unwrap();
        assert_eq!(chain.abs(), q(3));
    }

    #[test]
    fn two_level_chain_matches_direct() {
        let f = FilteredComplex::new(two_term(7), 1).unwrap();
        assert_eq!(f.page(0).total_dim(), 2);
        assert_eq!(f.page(1).total_dim(), 2);
        assert_eq!(f.page(2).total_dim(), 0);
        let chain = det_chain(&f, &[]).unwrap();
        assert_eq!(chain.abs(), q(7));
    }
}
