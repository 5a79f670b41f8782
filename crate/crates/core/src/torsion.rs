//! The torsion pipeline: the doubled complex `C(E) ⊕ C(E*)`, the μ-norm,
//! Poincaré duality, the torsion norm through two independent routes, and
//! the invariance checks.
//!
//! With `h` a basis of `H(E)`, `g` a basis of `H(E*)` and `std ↦ s·(∧h ⊗ ∧g)`
//! under `det C_K ≅ det H(C_K)`, duality sends `∧g` to `ρ⁻¹ ∧h` where
//! `ρ = det P(g_odd, h_even) / det P(g_even, h_odd)` for the pairing matrix
//! `P`. Hence `τ_R(∧h)² = N · |ρ| / |s|`, with `N` the μ-norm of the standard
//! wedge of `C_K`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::complexes::{
    cohomology, det_chain, det_chain_from, det_cohomology_sparse, ComplexError, FilteredComplex, Z2Complex,
};
use crate::graded::{det_cohomology, BasisChoice, DetElement, DetError, DetNorm, GradedSpace, Parity};
use crate::linalg::{format_rational, to_f64, Matrix, Rational, SparseMatrix, Vector};
use crate::rep::{
    apply_morphism, check_dual, cochain_complex, dual, fiber_cohomology_system, pullback, pullback_cochain,
    validate_mc, CohomologySystem, RepError, RepMorphism, RepUH,
};
use crate::simplicial::{cup_pairing_matrix, FundamentalCycle, OrderedComplex, SignFault, SimplicialError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TorsionError {
    #[error("torsion needs an odd-dimensional manifold, got dimension {0}")]
    OddDimensionRequired(usize),
    #[error("μ must be a nonzero constant on each component; vertex {vertex} breaks it")]
    NonFlatSection { vertex: usize },
    #[error("μ has {got} entries for {expected} vertices")]
    MuLength { expected: usize, got: usize },
    #[error("degenerate duality pairing: {0}")]
    DegeneratePairing(String),
    #[error("routes disagree: direct {direct}, via pages {e2}")]
    RouteMismatch { direct: String, e2: String },
    #[error("invalid cohomology basis: {0}")]
    InvalidBasis(String),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Det(#[from] DetError),
}

impl TorsionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            TorsionError::OddDimensionRequired(_) => "OddDimensionRequired",
            TorsionError::NonFlatSection { .. } => "NonFlatSection",
            TorsionError::MuLength { .. } => "MuLength",
            TorsionError::DegeneratePairing(_) => "DegeneratePairing",
            TorsionError::RouteMismatch { .. } => "RouteMismatch",
            TorsionError::InvalidBasis(_) => "InvalidBasis",
            TorsionError::Simplicial(e) => simplicial_code(e),
            TorsionError::Rep(e) => rep_code(e),
            TorsionError::Complex(_) => "ComplexError",
            TorsionError::Det(_) => "DeterminantError",
        }
    }
}

pub fn simplicial_code(e: &SimplicialError) -> &'static str {
    match e {
        SimplicialError::IndexOutOfRange { .. } => "IndexOutOfRange",
        SimplicialError::NotIncreasing(_) => "NotIncreasing",
        SimplicialError::Empty => "EmptyComplex",
        SimplicialError::MissingVertex(_) => "MissingVertex",
        SimplicialError::NotClosed(_) => "NotClosed",
        SimplicialError::NotOrientable(_) => "NotOrientable",
        SimplicialError::DegreeMismatch { .. } => "DegreeMismatch",
    }
}

pub fn rep_code(e: &RepError) -> &'static str {
    match e {
        RepError::FiberCount { .. } => "FiberCount",
        RepError::UnknownSimplex { .. } => "UnknownSimplex",
        RepError::Shape { .. } => "ShapeMismatch",
        RepError::Parity { .. } => "ParityViolation",
        RepError::Violation { .. } => "Violation",
        RepError::NotLocalSystem(_) => "NotLocalSystem",
        RepError::InducedMapNotInvertible { .. } => "InducedMapNotInvertible",
        RepError::DualDataRequired => "DualDataRequired",
        RepError::DualIncompatible { .. } => "DualIncompatible",
        RepError::BaseMismatch => "BaseMismatch",
        RepError::NotChainMap { .. } => "NotChainMap",
        RepError::Unsolvable { .. } => "Unsolvable",
        RepError::Complex(_) => "ComplexError",
    }
}

/// Size limits deciding between dense and sparse algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest `C_K` handled by the dense determinant of cohomology.
    pub dense: usize,
    /// Largest `C(E)` for which the spectral pages are computed.
    pub pages: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { dense: 240, pages: 240 }
    }
}

/// Everything the torsion of one representation depends on.
#[derive(Debug, Clone)]
pub struct TorsionConfig {
    pub complex: OrderedComplex,
    pub rep: RepUH,
    pub dual_rep: RepUH,
    pub mu: Option<Vec<Rational>>,
    pub cycle: FundamentalCycle,
    pub limits: Limits,
    pub fault: SignFault,
    /// `H_∂(E)` and `H_∂*(E*)` with paired representatives.
    pub systems: (CohomologySystem, CohomologySystem),
    local: bool,
    auto_dual: bool,
}

impl TorsionConfig {
    pub fn new(
        complex: OrderedComplex,
        rep: RepUH,
        dual_rep: Option<RepUH>,
        mu: Option<Vec<Rational>>,
    ) -> Result<Self, TorsionError> {
        let cycle = complex.validate_closed_oriented()?;
        validate_mc(&complex, &rep)?;
        let auto = dual(&complex, &rep);
        let dual_rep = match dual_rep {
            Some(d) => d,
            None => auto.clone()?,
        };
        let auto_dual = auto.is_ok_and(|a| a == dual_rep);
        let dual_system = check_dual(&complex, &rep, &dual_rep)?;
        let primal = fiber_cohomology_system(&complex, &rep)?;
        if let Some(m) = &mu {
            check_mu(&complex, m)?;
        }
        let local = rep.is_local_system(&complex);
        Ok(TorsionConfig {
            complex,
            rep,
            dual_rep,
            mu,
            cycle,
            limits: Limits::default(),
            fault: SignFault::default(),
            systems: (primal, dual_system),
            local,
            auto_dual,
        })
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_mu(mut self, mu: Option<Vec<Rational>>) -> Result<Self, TorsionError> {
        if let Some(m) = &mu {
            check_mu(&self.complex, m)?;
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn is_local_system(&self) -> bool {
        self.local
    }

    /// The same data with the roles of `E` and `E*` exchanged, `E** = E`.
    pub fn swapped(&self) -> Result<TorsionConfig, TorsionError> {
        let mut c = TorsionConfig::new(
            self.complex.clone(),
            self.dual_rep.clone(),
            Some(self.rep.clone()),
            self.mu.clone(),
        )?;
        c.limits = self.limits;
        c.fault = self.fault;
        Ok(c)
    }
}

fn check_mu(k: &OrderedComplex, mu: &[Rational]) -> Result<(), TorsionError> {
    if mu.len() != k.vertex_count() {
        return Err(TorsionError::MuLength {
            expected: k.vertex_count(),
            got: mu.len(),
        });
    }
    for (v, m) in mu.iter().enumerate() {
        if m.is_zero() {
            return Err(TorsionError::NonFlatSection { vertex: v });
        }
    }
    for e in k.simplices(1) {
        if mu[e[0]] != mu[e[1]] {
            return Err(TorsionError::NonFlatSection { vertex: e[1] });
        }
    }
    Ok(())
}

/// `C(E) ⊕ C(E*)` with the common degree filtration.
pub fn build_ck(cfg: &TorsionConfig) -> Result<FilteredComplex, TorsionError> {
    let a = cochain_complex(&cfg.complex, &cfg.rep)?;
    let b = cochain_complex(&cfg.complex, &cfg.dual_rep)?;
    Ok(FilteredComplex::new(a.base().direct_sum(b.base()), cfg.complex.dim())?)
}

/// μ-norm of the standard wedge of `C_K`:
/// `Π_Δ |μ(v₀Δ)|^{−(−1)^{dim Δ}}`, which is 1 for the canonical section.
pub fn mu_scale(cfg: &TorsionConfig) -> Rational {
    let Some(mu) = &cfg.mu else {
        return Rational::one();
    };
    let mut n = Rational::one();
    for s in cfg.complex.all() {
        let m = mu[s[0]].abs();
        if (s.len() - 1) % 2 == 0 {
            n /= m;
        } else {
            n *= m;
        }
    }
    n
}

/// The μ-norm on `det C_K` as an explicit reference element. Dense; meant
/// for small complexes.
pub fn mu_norm(cfg: &TorsionConfig) -> Result<DetNorm, TorsionError> {
    let ck = build_ck(cfg)?;
    let reference = DetElement::standard(ck.base().space()).scaled(&mu_scale(cfg).recip());
    Ok(DetNorm { reference })
}

/// Chosen bases of `H(E)` and `H(E*)`.
#[derive(Debug, Clone)]
pub struct CohomologyBases {
    pub h: Vec<Vector>,
    pub g: Vec<Vector>,
}

fn default_bases(cfg: &TorsionConfig) -> Result<CohomologyBases, TorsionError> {
    let a = cochain_complex(&cfg.complex, &cfg.rep)?;
    let b = cochain_complex(&cfg.complex, &cfg.dual_rep)?;
    Ok(CohomologyBases {
        h: cohomology(a.base()).representatives,
        g: cohomology(b.base()).representatives,
    })
}

fn parity_of(c: &Z2Complex, v: &[Rational]) -> Result<Parity, TorsionError> {
    c.space()
        .vector_parity(v)
        .ok_or_else(|| TorsionError::InvalidBasis("inhomogeneous class".into()))
}

/// Pairing matrix between classes of a local system `l` and its automatic
/// dual, plus the blockwise check of the degree filtration.
fn local_pairing(
    k: &OrderedComplex,
    cycle: &FundamentalCycle,
    l: &RepUH,
    l_star: &RepUH,
    h: &[Vector],
    g: &[Vector],
    fault: SignFault,
) -> (Matrix, Vec<String>) {
    let hol = |x: usize, y: usize| l.holonomy(x, y);
    let m = cup_pairing_matrix(k, cycle, &l_star.layout(k), &l.layout(k), &hol, fault);
    let mut p = Matrix::zeros(g.len(), h.len());
    for (j, hj) in h.iter().enumerate() {
        let mh = m.mul_vec(hj);
        for (i, gi) in g.iter().enumerate() {
            p.set(i, j, gi.iter().zip(&mh).fold(Rational::zero(), |acc, (x, y)| acc + x * y));
        }
    }
    let mut notes = Vec::new();
    let degree = |layout: &crate::simplicial::CochainLayout, v: &[Rational]| -> Option<usize> {
        let mut d = None;
        for (t, s) in k.all().iter().enumerate() {
            if layout.value(k, v, t).iter().any(|x| !x.is_zero()) {
                let here = s.len() - 1;
                if d.is_some_and(|d| d != here) {
                    return None;
                }
                d = Some(here);
            }
        }
        d
    };
    let lh: Vec<Option<usize>> = h.iter().map(|v| degree(&l.layout(k), v)).collect();
    let lg: Vec<Option<usize>> = g.iter().map(|v| degree(&l_star.layout(k), v)).collect();
    if lh.iter().chain(&lg).any(Option::is_none) {
        notes.push("blockwise check skipped: classes are not degree-homogeneous".into());
    } else {
        let n = k.dim();
        for deg in 0..=n {
            let rows: Vec<usize> = (0..g.len()).filter(|&i| lg[i] == Some(deg)).collect();
            let cols: Vec<usize> = (0..h.len()).filter(|&j| lh[j] == Some(n - deg)).collect();
            let block = p.select(&rows, &cols);
            let ok = block.is_square() && (block.rows() == 0 || !block.det().expect("square").is_zero());
            if !ok {
                notes.push(format!("graded pairing block ({deg}, {}) is degenerate", n - deg));
            }
        }
    }
    (p, notes)
}

/// `ρ = det P(g_odd, h_even) / det P(g_even, h_odd)`.
fn rho_from_pairing(p: &Matrix, g_par: &[Parity], h_par: &[Parity]) -> Result<Rational, TorsionError> {
    let sel = |par: &[Parity], want: Parity| -> Vec<usize> { (0..par.len()).filter(|&i| par[i] == want).collect() };
    let oe = p.select(&sel(g_par, Parity::Odd), &sel(h_par, Parity::Even));
    let eo = p.select(&sel(g_par, Parity::Even), &sel(h_par, Parity::Odd));
    if !oe.is_square() || !eo.is_square() {
        return Err(TorsionError::DegeneratePairing(format!(
            "blocks {}x{} and {}x{} are not square",
            oe.rows(),
            oe.cols(),
            eo.rows(),
            eo.cols()
        )));
    }
    let a = oe.det().expect("square");
    let b = eo.det().expect("square");
    if a.is_zero() || b.is_zero() {
        return Err(TorsionError::DegeneratePairing("pairing between cohomology classes is singular".into()));
    }
    Ok(a / b)
}

/// Converts cochains of a supplied dual local system into cochains of the
/// automatic dual through the normalized fiber representatives.
fn to_auto_dual(cfg: &TorsionConfig, g: &[Vector]) -> Vec<Vector> {
    if cfg.auto_dual {
        return g.to_vec();
    }
    let k = &cfg.complex;
    let layout = cfg.dual_rep.layout(k);
    let inv: Vec<Matrix> = cfg
        .systems
        .1
        .fibers
        .iter()
        .map(|f| {
            Matrix::from_columns(f.representatives.first().map_or(0, Vec::len), &f.representatives)
                .inverse()
                .expect("normalized representatives form a basis")
        })
        .collect();
    g.iter()
        .map(|v| {
            let mut out = v.clone();
            for (t, s) in k.all().iter().enumerate() {
                let val = layout.value(k, v, t);
                if val.is_empty() {
                    continue;
                }
                let w = inv[s[0]].mul_vec(val);
                out[layout.offsets[t]..layout.offsets[t] + w.len()].clone_from_slice(&w);
            }
            out
        })
        .collect()
}

/// Lifts the standard basis of `C(L)` into `C(E)` through the fiber
/// representatives, tagged with filtration level.
fn lifted_standard(k: &OrderedComplex, e: &RepUH, sys: &CohomologySystem) -> Vec<(usize, Vector)> {
    let layout = e.layout(k);
    let mut out = Vec::new();
    for (t, s) in k.all().iter().enumerate() {
        for h in &sys.fibers[s[0]].representatives {
            let mut v = vec![Rational::zero(); layout.total];
            v[layout.offsets[t]..layout.offsets[t] + h.len()].clone_from_slice(h);
            out.push((s.len() - 1, v));
        }
    }
    out
}

/// `c_E` with `x_L ↦ c_E · x_E` under `det H(L) ≅ det E₂ ≅ … ≅ det H(E)`.
/// Above the page limit only `|c_E|` is available, see [`transport_scalar_abs`].
fn transport_scalar(
    k: &OrderedComplex,
    e: &RepUH,
    sys: &CohomologySystem,
    x_l: &[Vector],
    x_e: &[Vector],
    limits: Limits,
) -> Result<Rational, TorsionError> {
    let ce = cochain_complex(k, e)?;
    if ce.base().dim() > limits.pages {
        return transport_scalar_abs(k, e, sys, x_l, x_e, limits);
    }
    let cl = cochain_complex(k, &sys.system)?;
    let s_l = det_cohomology(cl.base(), x_l, BasisChoice::Canonical)?;
    let k_e = det_chain_from(&ce, 1, &lifted_standard(k, e, sys), x_e)?;
    Ok(k_e / s_l)
}

/// `|c_E|` without the pages. The step `det E₀ ≅ det E₁` is fiberwise, so
/// `|s_E| = |k_E| · Π_σ |f_{v₀σ}|^{(−1)^{dim σ}}` with `f_v` the scalar of
/// `(E_v, ∂)` against the fiber representatives.
fn transport_scalar_abs(
    k: &OrderedComplex,
    e: &RepUH,
    sys: &CohomologySystem,
    x_l: &[Vector],
    x_e: &[Vector],
    limits: Limits,
) -> Result<Rational, TorsionError> {
    let det = |c: &Z2Complex, x: &[Vector]| -> Result<Rational, TorsionError> {
        if c.dim() <= limits.dense {
            Ok(det_cohomology(c, x, BasisChoice::Canonical)?)
        } else {
            Ok(det_cohomology_sparse(c, x)?)
        }
    };
    let fiber: Vec<Rational> = (0..k.vertex_count())
        .map(|v| {
            let (even, odd) = e.fibers()[v];
            let d = SparseMatrix::from_dense(&e.operator_or_zero(&[v]));
            let c = Z2Complex::new(GradedSpace::from_dims(even, odd), d, None)?;
            Ok::<_, TorsionError>(det_cohomology(&c, &sys.fibers[v].representatives, BasisChoice::Canonical)?.abs())
        })
        .collect::<Result<_, _>>()?;
    let mut f = Rational::one();
    for s in k.all() {
        if (s.len() - 1) % 2 == 0 {
            f *= &fiber[s[0]];
        } else {
            f /= &fiber[s[0]];
        }
    }
    let s_e = det(cochain_complex(k, e)?.base(), x_e)?;
    let s_l = det(cochain_complex(k, &sys.system)?.base(), x_l)?;
    Ok((s_e / f / s_l).abs())
}

/// `ρ` for the configuration with the given bases; local systems pair
/// directly, other representations go through their cohomology local systems.
pub fn pd_determinant(cfg: &TorsionConfig, bases: &CohomologyBases) -> Result<(Rational, Vec<String>), TorsionError> {
    if cfg.complex.dim().is_multiple_of(2) {
        return Err(TorsionError::OddDimensionRequired(cfg.complex.dim()));
    }
    let k = &cfg.complex;
    let ce = cochain_complex(k, &cfg.rep)?;
    let cd = cochain_complex(k, &cfg.dual_rep)?;
    let h_par = bases.h.iter().map(|v| parity_of(ce.base(), v)).collect::<Result<Vec<_>, _>>()?;
    let g_par = bases.g.iter().map(|v| parity_of(cd.base(), v)).collect::<Result<Vec<_>, _>>()?;
    if cfg.local {
        let auto = dual(k, &cfg.rep)?;
        let g = to_auto_dual(cfg, &bases.g);
        let (p, notes) = local_pairing(k, &cfg.cycle, &cfg.rep, &auto, &bases.h, &g, cfg.fault);
        return Ok((rho_from_pairing(&p, &g_par, &h_par)?, notes));
    }
    let (l, l_star) = &cfg.systems;
    let cl = cochain_complex(k, &l.system)?;
    let cls = cochain_complex(k, &l_star.system)?;
    let x_l = cohomology(cl.base()).representatives;
    let x_ls = cohomology(cls.base()).representatives;
    let (p, mut notes) = local_pairing(k, &cfg.cycle, &l.system, &l_star.system, &x_l, &x_ls, cfg.fault);
    let xl_par = x_l.iter().map(|v| parity_of(cl.base(), v)).collect::<Result<Vec<_>, _>>()?;
    let xls_par = x_ls.iter().map(|v| parity_of(cls.base(), v)).collect::<Result<Vec<_>, _>>()?;
    let rho_l = rho_from_pairing(&p, &xls_par, &xl_par)?;
    let c_e = transport_scalar(k, &cfg.rep, l, &x_l, &bases.h, cfg.limits)?;
    let c_es = transport_scalar(k, &cfg.dual_rep, l_star, &x_ls, &bases.g, cfg.limits)?;
    notes.push("duality transported from the cohomology local systems".into());
    Ok((rho_l * c_es / c_e, notes))
}

/// Exact outcome of a torsion computation.
#[derive(Debug, Clone)]
pub struct TorsionResult {
    pub dimension: usize,
    pub h: Vec<Vector>,
    pub h_even: usize,
    pub h_odd: usize,
    pub tau_squared: Rational,
    pub tau_squared_bundle: Rational,
    pub route_direct: Rational,
    pub route_e2: Option<Rational>,
    pub rho: Rational,
    pub mu_scale: Rational,
    pub page_dimensions: Option<Vec<PageRow>>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageRow {
    pub r: usize,
    pub p: usize,
    pub parity: u8,
    pub dim: usize,
}

/// Page dimension table `r = 0..=n+1` of a filtered complex.
pub fn page_table(f: &FilteredComplex) -> Vec<PageRow> {
    let mut rows = Vec::new();
    for r in 0..=f.top_degree() + 1 {
        for ((p, par), dim) in f.page_dimensions(r) {
            rows.push(PageRow {
                r,
                p,
                parity: par.bit() as u8,
                dim,
            });
        }
    }
    rows
}

fn check_basis(c: &Z2Complex, h: &[Vector]) -> Result<(), TorsionError> {
    let coh = cohomology(c);
    if h.len() != coh.space.dim() {
        return Err(TorsionError::InvalidBasis(format!(
            "{} vectors for a cohomology of dimension {}",
            h.len(),
            coh.space.dim()
        )));
    }
    for v in h {
        parity_of(c, v)?;
        if c.differential().mul_vec(v).iter().any(|x| !x.is_zero()) {
            return Err(TorsionError::InvalidBasis("not a cocycle".into()));
        }
    }
    Ok(())
}

fn s_direct(cfg: &TorsionConfig, ck: &Z2Complex, classes: &[Vector]) -> Result<Rational, TorsionError> {
    if ck.dim() <= cfg.limits.dense {
        Ok(det_cohomology(ck, classes, BasisChoice::Canonical)?)
    } else {
        Ok(det_cohomology_sparse(ck, classes)?)
    }
}

/// The scalar `s` with `std ↦ s · (∧h ⊗ ∧g)` under `det C_K ≅ det H(C_K)`,
/// computed directly and, below the page limit, through the spectral pages.
#[derive(Debug, Clone)]
pub struct Routes {
    pub direct: Rational,
    pub e2: Option<Rational>,
    pub diagnostics: Vec<String>,
}

/// Both routes for `C_K`; any dimension. Fails with `RouteMismatch` when
/// their absolute values differ.
pub fn det_routes(cfg: &TorsionConfig, bases: &CohomologyBases) -> Result<Routes, TorsionError> {
    let k = &cfg.complex;
    let ce = cochain_complex(k, &cfg.rep)?;
    let cd = cochain_complex(k, &cfg.dual_rep)?;
    let ck = ce.base().direct_sum(cd.base());
    let na = ce.base().dim();
    let mut classes: Vec<Vector> = bases
        .h
        .iter()
        .map(|v| {
            let mut w = v.clone();
            w.resize(ck.dim(), Rational::zero());
            w
        })
        .collect();
    classes.extend(bases.g.iter().map(|v| {
        let mut w = vec![Rational::zero(); na];
        w.extend(v.iter().cloned());
        w
    }));
    let direct = s_direct(cfg, &ck, &classes)?;
    let mut diagnostics = Vec::new();
    let e2 = if na <= cfg.limits.pages && cd.base().dim() <= cfg.limits.pages {
        Some(det_chain(&ce, &bases.h)? * det_chain(&cd, &bases.g)?)
    } else {
        diagnostics.push(format!("page route skipped: C(E) has dimension {na}"));
        None
    };
    if let Some(e2) = &e2 {
        if e2.abs() != direct.abs() {
            return Err(TorsionError::RouteMismatch {
                direct: format_rational(&direct),
                e2: format_rational(e2),
            });
        }
    }
    Ok(Routes { direct, e2, diagnostics })
}

/// Default cocycle bases of `H(E)` and `H(E*)`.
pub fn cohomology_bases(cfg: &TorsionConfig) -> Result<CohomologyBases, TorsionError> {
    default_bases(cfg)
}

/// `τ_R(∧h)²` through `det C_K ≅ det H(C_K)` computed directly, with the
/// page route computed alongside when the complex is small enough.
pub fn torsion_direct(cfg: &TorsionConfig, h: Option<&[Vector]>) -> Result<TorsionResult, TorsionError> {
    let n = cfg.complex.dim();
    if n.is_multiple_of(2) {
        return Err(TorsionError::OddDimensionRequired(n));
    }
    let k = &cfg.complex;
    let ce = cochain_complex(k, &cfg.rep)?;
    let mut bases = default_bases(cfg)?;
    if let Some(h) = h {
        check_basis(ce.base(), h)?;
        bases.h = h.to_vec();
    }
    let mut diagnostics = Vec::new();
    let (rho, notes) = pd_determinant(cfg, &bases)?;
    diagnostics.extend(notes);

    let na = ce.base().dim();
    let routes = det_routes(cfg, &bases)?;
    diagnostics.extend(routes.diagnostics);
    let (route_direct, route_e2) = (routes.direct, routes.e2);
    let mu = mu_scale(cfg);
    let tau_squared = &mu * rho.abs() / route_direct.abs();

    let tau_squared_bundle = if cfg.local {
        tau_squared.clone()
    } else if na <= cfg.limits.pages {
        let t = torsion_via_cohomology_bundle(cfg, &bases.h)?;
        if t != tau_squared {
            return Err(TorsionError::RouteMismatch {
                direct: format_rational(&tau_squared),
                e2: format_rational(&t),
            });
        }
        t
    } else {
        diagnostics.push("cohomology bundle route skipped: complex too large for pages".into());
        tau_squared.clone()
    };
    let page_dimensions = (na <= cfg.limits.pages).then(|| page_table(&ce));
    let (h_even, h_odd) = {
        let coh = cohomology(ce.base());
        (coh.even_dim(), coh.odd_dim())
    };
    if !cfg.auto_dual {
        diagnostics.push("dual representation supplied by the caller".into());
    }
    diagnostics.push("duality realized by the cup pairing against the fundamental cycle".into());
    Ok(TorsionResult {
        dimension: n,
        h: bases.h,
        h_even,
        h_odd,
        tau_squared,
        tau_squared_bundle,
        route_direct,
        route_e2,
        rho,
        mu_scale: mu,
        page_dimensions,
        diagnostics,
    })
}

/// `τ_R(∧h)²` as the torsion of the cohomology local system `L = H_∂(E)`,
/// carried to `det H(E)` through the spectral pages of `C(E)`.
pub fn torsion_via_cohomology_bundle(cfg: &TorsionConfig, h: &[Vector]) -> Result<Rational, TorsionError> {
    let k = &cfg.complex;
    if cfg.local {
        return Ok(torsion_direct(cfg, Some(h))?.tau_squared);
    }
    let (l, _) = &cfg.systems;
    let lcfg = TorsionConfig::new(k.clone(), l.system.clone(), None, cfg.mu.clone())?.with_limits(cfg.limits);
    let cl = cochain_complex(k, &l.system)?;
    let x_l = cohomology(cl.base()).representatives;
    let tau_l = torsion_direct(&lcfg, Some(&x_l))?.tau_squared;
    let c_e = transport_scalar(k, &cfg.rep, l, &x_l, h, cfg.limits)?;
    Ok(tau_l / (&c_e * &c_e))
}

/// Outcome of one invariance check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Which checks to run.
#[derive(Debug, Clone, Default)]
pub struct CheckRequest {
    pub subdivision: Option<usize>,
    pub duality: bool,
    pub mu: Option<Rational>,
    pub morphisms: Vec<(RepUH, Option<RepUH>, RepMorphism)>,
}

fn outcome(name: &str, lhs: &Rational, rhs: &Rational) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed: lhs == rhs,
        detail: format!("{} vs {}", format_rational(lhs), format_rational(rhs)),
    }
}

/// `τ` on `sd^depth K` of the pulled-back classes against `τ` on `K`.
pub fn subdivision_check(cfg: &TorsionConfig, base: &TorsionResult, depth: usize) -> Result<CheckOutcome, TorsionError> {
    let name = format!("subdivision x{depth}");
    if cfg.rep.max_degree() >= 2 {
        // Higher operators do not survive pullback; compare on H_∂(E).
        let l = &cfg.systems.0.system;
        let lcfg = TorsionConfig::new(cfg.complex.clone(), l.clone(), None, cfg.mu.clone())?.with_limits(cfg.limits);
        let lres = torsion_direct(&lcfg, None)?;
        let mut out = subdivision_check(&lcfg, &lres, depth)?;
        out.name = format!("{name} (cohomology local system)");
        return Ok(out);
    }
    let mut k = cfg.complex.clone();
    let mut e = cfg.rep.clone();
    let mut es = cfg.dual_rep.clone();
    let mut h = base.h.clone();
    let mut mu = cfg.mu.clone();
    for _ in 0..depth {
        let sd = k.barycentric_subdivision();
        let g = sd.last_vertex_map();
        let e2 = pullback(&k, &sd.complex, &g, &e)?;
        let es2 = pullback(&k, &sd.complex, &g, &es)?;
        h = h.iter().map(|v| pullback_cochain(&k, &sd.complex, &g, &e, v)).collect();
        mu = mu.map(|m| g.iter().map(|&v| m[v].clone()).collect());
        k = sd.complex;
        e = e2;
        es = es2;
    }
    let sub = TorsionConfig::new(k, e, Some(es), mu)?.with_limits(cfg.limits);
    let res = torsion_direct(&sub, Some(&h))?;
    Ok(outcome(&name, &res.tau_squared, &base.tau_squared))
}

/// `τ_{E*}(∧g)² · ρ² = τ_E(∧h)²`: duality is an isometry.
pub fn duality_check(cfg: &TorsionConfig, base: &TorsionResult) -> Result<CheckOutcome, TorsionError> {
    let swapped = cfg.swapped()?;
    let g = default_bases(cfg)?.g;
    let other = torsion_direct(&swapped, Some(&g))?;
    // Recompute ρ for the bases actually used on both sides.
    let bases = CohomologyBases {
        h: base.h.clone(),
        g,
    };
    let (rho, _) = pd_determinant(cfg, &bases)?;
    let lhs = &other.tau_squared * &rho * &rho;
    Ok(outcome("duality", &lhs, &base.tau_squared))
}

/// Rescaling μ leaves `τ_R` unchanged on odd-dimensional manifolds.
pub fn mu_check(cfg: &TorsionConfig, base: &TorsionResult, factor: &Rational) -> Result<CheckOutcome, TorsionError> {
    let mu: Vec<Rational> = match &cfg.mu {
        Some(m) => m.iter().map(|x| x * factor).collect(),
        None => vec![factor.clone(); cfg.complex.vertex_count()],
    };
    let scaled = cfg.clone().with_mu(Some(mu))?;
    let res = torsion_direct(&scaled, Some(&base.h))?;
    Ok(outcome("mu", &res.tau_squared, &base.tau_squared))
}

/// `τ'(Φ(∧h))² = τ(∧h)²` for a quasi-isomorphism `φ: E → E'`.
pub fn quasi_iso_check(
    cfg: &TorsionConfig,
    base: &TorsionResult,
    target: &RepUH,
    target_dual: Option<&RepUH>,
    phi: &RepMorphism,
) -> Result<CheckOutcome, TorsionError> {
    let k = &cfg.complex;
    if !crate::rep::is_quasi_iso(k, &cfg.rep, target, phi)? {
        return Ok(CheckOutcome {
            name: "quasi-iso".into(),
            passed: false,
            detail: "morphism is not a quasi-isomorphism".into(),
        });
    }
    let m = apply_morphism(k, &cfg.rep, target, phi)?;
    let image: Vec<Vector> = base.h.iter().map(|v| m.mul_vec(v)).collect();
    let tcfg = TorsionConfig::new(k.clone(), target.clone(), target_dual.cloned(), cfg.mu.clone())?.with_limits(cfg.limits);
    let res = torsion_direct(&tcfg, Some(&image))?;
    Ok(outcome("quasi-iso", &res.tau_squared, &base.tau_squared))
}

/// Runs the requested checks; failures are reported, not raised.
pub fn check_invariance_suite(
    cfg: &TorsionConfig,
    base: &TorsionResult,
    request: &CheckRequest,
) -> Result<Vec<CheckOutcome>, TorsionError> {
    let mut out = Vec::new();
    if let Some(depth) = request.subdivision {
        out.push(subdivision_check(cfg, base, depth)?);
    }
    if request.duality {
        out.push(duality_check(cfg, base)?);
    }
    if let Some(f) = &request.mu {
        out.push(mu_check(cfg, base, f)?);
    }
    for (target, target_dual, phi) in &request.morphisms {
        out.push(quasi_iso_check(cfg, base, target, target_dual.as_ref(), phi)?);
    }
    Ok(out)
}

/// Machine-readable report with exact values as `"p/q"` strings.
#[derive(Debug, Clone, Serialize)]
pub struct TorsionReport {
    pub dimension: usize,
    pub h_even: usize,
    pub h_odd: usize,
    /// Cocycle representatives as sparse `(index, value)` lists.
    pub basis: Vec<Vec<(usize, String)>>,
    pub tau_squared: String,
    pub tau: f64,
    pub tau_squared_bundle: String,
    pub route_direct: String,
    pub route_e2: Option<String>,
    pub pd_determinant: String,
    pub mu_scale: String,
    pub page_dimensions: Option<Vec<PageRow>>,
    pub checks: Vec<CheckOutcome>,
    pub diagnostics: Vec<String>,
}

/// Rounds to the given number of significant digits.
pub fn display_float(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

impl TorsionResult {
    pub fn report(&self, checks: Vec<CheckOutcome>, precision: usize) -> TorsionReport {
        let basis = self
            .h
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (i, format_rational(x)))
                    .collect()
            })
            .collect();
        TorsionReport {
            dimension: self.dimension,
            h_even: self.h_even,
            h_odd: self.h_odd,
            basis,
            tau_squared: format_rational(&self.tau_squared),
            tau: display_float(to_f64(&self.tau_squared).sqrt(), precision),
            tau_squared_bundle: format_rational(&self.tau_squared_bundle),
            route_direct: format_rational(&self.route_direct),
            route_e2: self.route_e2.as_ref().map(format_rational),
            pd_determinant: format_rational(&self.rho),
            mu_scale: format_rational(&self.mu_scale),
            page_dimensions: self.page_dimensions.clone(),
            checks,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Cochain complexes of `L*` and `L` with the chain-level cup pairing, for
/// a local system `L` on a closed oriented complex. Dense; small inputs.
pub fn local_chain_pairing(
    k: &OrderedComplex,
    l: &RepUH,
    fault: SignFault,
) -> Result<(FilteredComplex, FilteredComplex, Matrix), TorsionError> {
    l.check_local_system(k)?;
    let cycle = k.validate_closed_oriented()?;
    let l_star = dual(k, l)?;
    let hol = |x: usize, y: usize| l.holonomy(x, y);
    let m = cup_pairing_matrix(k, &cycle, &l_star.layout(k), &l.layout(k), &hol, fault);
    Ok((cochain_complex(k, &l_star)?, cochain_complex(k, l)?, m.to_dense()))
}

/// `dim H^p(K, L)` per degree and total parity of a local system.
pub fn local_cohomology_table(k: &OrderedComplex, l: &RepUH) -> Result<BTreeMap<(usize, Parity), usize>, TorsionError> {
    let c = cochain_complex(k, l)?;
    let coh = cohomology(c.base());
    let layout = l.layout(k);
    let (_, degrees) = layout.gradings(k);
    let mut table = BTreeMap::new();
    for p in 0..=k.dim() {
        for par in [Parity::Even, Parity::Odd] {
            table.insert((p, par), 0);
        }
    }
    for v in &coh.representatives {
        let par = parity_of(c.base(), v)?;
        let deg = v
            .iter()
            .zip(&degrees)
            .filter(|(x, _)| !x.is_zero())
            .map(|(_, d)| *d)
            .max()
            .unwrap_or(0);
        *table.get_mut(&(deg, par)).expect("present") += 1;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frac, q};

    fn circle() -> OrderedComplex {
        OrderedComplex::from_maximal(&[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn circle_lambda(l: Rational) -> RepUH {
        let k = circle();
        let mut ops = BTreeMap::new();
        ops.insert(vec![0, 1], Matrix::identity(1));
        ops.insert(vec![1, 2], Matrix::identity(1));
        ops.insert(vec![0, 2], Matrix::diagonal(&[l]));
        RepUH::new(&k, vec![(1, 0); 3], ops).unwrap()
    }

    #[test]
    fn circle_twisted_acyclic_torsion() {
        let cfg = TorsionConfig::new(circle(), circle_lambda(q(3)), None, None).unwrap();
        let r = torsion_direct(&cfg, None).unwrap();
        assert_eq!((r.h_even, r.h_odd), (0, 0));
        assert_eq!(r.route_e2.as_ref().unwrap().abs(), r.route_direct.abs());
        assert!(r.tau_squared > q(0));
    }

    #[test]
    fn ck_of_twisted_circle_has_dimension_twelve() {
        let cfg = TorsionConfig::new(circle(), circle_lambda(q(3)), None, None).unwrap();
        let ck = build_ck(&cfg).unwrap();
        assert_eq!(ck.base().dim(), 12);
        assert_eq!(cohomology(ck.base()).space.dim(), 0);
    }

    #[test]
    fn mu_must_be_flat() {
        let e = circle_lambda(q(2));
        let err = TorsionConfig::new(circle(), e, None, Some(vec![q(1), q(2), q(1)])).unwrap_err();
        assert_eq!(err.code(), "NonFlatSection");
    }

    #[test]
    fn mu_rescaling_leaves_circle_torsion() {
        let cfg = TorsionConfig::new(circle(), circle_lambda(frac(7, 2)), None, None).unwrap();
        let r = torsion_direct(&cfg, None).unwrap();
        let c = mu_check(&cfg, &r, &q(7)).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn fiberwise_transport_matches_the_pages() {
        use crate::corpus::{fiberwise_acyclic, sphere, split_cone, with_higher_operators};
        let s3 = sphere(3);
        let (hi, hi_dual) = with_higher_operators(&s3).unwrap();
        let gauged = |k: &OrderedComplex, e: &RepUH| {
            let g: Vec<Matrix> = (0..k.vertex_count())
                .map(|v| {
                    let (even, odd) = e.fibers()[v];
                    Matrix::diagonal(&(0..even + odd).map(|i| q((v + 2 * i + 2) as i64)).collect::<Vec<_>>())
                })
                .collect();
            crate::rep::gauge_transform(k, e, &g).unwrap()
        };
        let cases = [
            TorsionConfig::new(circle(), gauged(&circle(), &split_cone(q(3), q(5)).0), None, None).unwrap(),
            TorsionConfig::new(s3.clone(), gauged(&s3, &fiberwise_acyclic(&s3)), None, None).unwrap(),
            TorsionConfig::new(circle(), split_cone(q(3), q(5)).0, None, None).unwrap(),
            TorsionConfig::new(circle(), split_cone(frac(-2, 7), q(4)).0, None, None).unwrap(),
            TorsionConfig::new(s3.clone(), fiberwise_acyclic(&s3), None, None).unwrap(),
            TorsionConfig::new(s3.clone(), hi, Some(hi_dual), None).unwrap(),
        ];
        for cfg in cases {
            let k = &cfg.complex;
            let bases = default_bases(&cfg).unwrap();
            for (e, sys, x) in [(&cfg.rep, &cfg.systems.0, &bases.h), (&cfg.dual_rep, &cfg.systems.1, &bases.g)] {
                let x_l = cohomology(cochain_complex(k, &sys.system).unwrap().base()).representatives;
                let paged = transport_scalar(k, e, sys, &x_l, x, Limits::default()).unwrap();
                let fiberwise = transport_scalar_abs(k, e, sys, &x_l, x, Limits::default()).unwrap();
                assert_eq!(paged.abs(), fiberwise);
            }
        }
    }
}
