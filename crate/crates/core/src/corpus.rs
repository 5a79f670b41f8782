//! Job files and the built-in example inputs.
//!
//! A job is a JSON document:
//!
//! ```json
//! {"complex": [[0,1],[1,2],[0,2]],
//!  "representation": {"fibers": [[1,0],[1,0],[1,0]],
//!                     "operators": [{"simplex": [0,2], "matrix": [["3"]]}]},
//!  "options": {"checks": ["duality"], "precision": 12}}
//! ```
//!
//! Rationals are strings `"p/q"`. Operators on vertices are the fiber
//! differentials, on k-simplices the structure operators `ω_k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{format_rational, frac, parse_rational, q, Matrix, Rational};
use crate::rep::{complete_structure_operators, dual, RepError, RepMorphism, RepUH};
use crate::simplicial::{face, OrderedComplex, Simplex, SimplicialError};

#[derive(Debug, Error)]
pub enum JobError {
    #[error("malformed job: {0}")]
    Parse(String),
    #[error("bad rational {0:?}")]
    Rational(String),
    #[error("matrix rows have different lengths")]
    Ragged,
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

impl JobError {
    pub fn code(&self) -> &'static str {
        match self {
            JobError::Parse(_) => "ParseError",
            JobError::Rational(_) => "BadRational",
            JobError::Ragged => "RaggedMatrix",
            JobError::Simplicial(e) => crate::torsion::simplicial_code(e),
            JobError::Rep(e) => crate::torsion::rep_code(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub simplex: Simplex,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepJson {
    pub fibers: Vec<[usize; 2]>,
    #[serde(default)]
    pub operators: Vec<OperatorJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismJson {
    pub target: RepJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dual: Option<RepJson>,
    pub components: Vec<OperatorJson>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobOptions {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subdivide: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    /// Factor for the μ-rescaling check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_factor: Option<String>,
    /// Error code a negative-control input must be refused with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub complex: Vec<Simplex>,
    pub representation: RepJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_representation: Option<RepJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub morphisms: Vec<MorphismJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<String>>,
    #[serde(default)]
    pub options: JobOptions,
}

/// A job with its data parsed into library types.
#[derive(Debug, Clone)]
pub struct ParsedJob {
    pub complex: OrderedComplex,
    pub rep: RepUH,
    pub dual: Option<RepUH>,
    pub morphisms: Vec<(RepUH, Option<RepUH>, RepMorphism)>,
    pub mu: Option<Vec<Rational>>,
    pub options: JobOptions,
}

fn parse_q(s: &str) -> Result<Rational, JobError> {
    parse_rational(s).ok_or_else(|| JobError::Rational(s.to_string()))
}

fn matrix_from_json(rows: &[Vec<String>]) -> Result<Matrix, JobError> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(JobError::Ragged);
    }
    let parsed = rows
        .iter()
        .map(|r| r.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    if parsed.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    Ok(Matrix::from_rows(parsed))
}

fn matrix_to_json(m: &Matrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| format_rational(m.get(i, j))).collect())
        .collect()
}

fn operators_from_json(ops: &[OperatorJson]) -> Result<BTreeMap<Simplex, Matrix>, JobError> {
    ops.iter()
        .map(|o| Ok((o.simplex.clone(), matrix_from_json(&o.matrix)?)))
        .collect()
}

fn operators_to_json(ops: &BTreeMap<Simplex, Matrix>) -> Vec<OperatorJson> {
    ops.iter()
        .map(|(s, m)| OperatorJson {
            simplex: s.clone(),
            matrix: matrix_to_json(m),
        })
        .collect()
}

pub fn rep_from_json(k: &OrderedComplex, r: &RepJson) -> Result<RepUH, JobError> {
    let fibers = r.fibers.iter().map(|f| (f[0], f[1])).collect();
    Ok(RepUH::new(k, fibers, operators_from_json(&r.operators)?)?)
}

pub fn rep_to_json(e: &RepUH) -> RepJson {
    RepJson {
        fibers: e.fibers().iter().map(|&(a, b)| [a, b]).collect(),
        operators: operators_to_json(e.operators()),
    }
}

impl Job {
    pub fn from_json(text: &str) -> Result<Job, JobError> {
        serde_json::from_str(text).map_err(|e| JobError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("jobs serialize")
    }

    pub fn new(k: &OrderedComplex, e: &RepUH) -> Job {
        Job {
            provenance: None,
            complex: k.maximal(),
            representation: rep_to_json(e),
            dual_representation: None,
            morphisms: Vec::new(),
            mu: None,
            options: JobOptions::default(),
        }
    }

    pub fn with_provenance(mut self, text: &str) -> Job {
        self.provenance = Some(text.into());
        self
    }

    pub fn with_dual(mut self, e: &RepUH) -> Job {
        self.dual_representation = Some(rep_to_json(e));
        self
    }

    pub fn with_morphism(mut self, target: &RepUH, phi: &RepMorphism) -> Job {
        self.morphisms.push(MorphismJson {
            target: rep_to_json(target),
            target_dual: None,
            components: operators_to_json(&phi.components),
        });
        self
    }

    pub fn with_checks(mut self, checks: &[&str]) -> Job {
        self.options.checks = checks.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn expecting(mut self, code: &str) -> Job {
        self.options.expect_error = Some(code.into());
        self
    }

    /// Parses the simplicial and representation data. The complex and the
    /// representations are checked for shape and parity only.
    pub fn parse(&self) -> Result<ParsedJob, JobError> {
        let complex = OrderedComplex::from_maximal(&self.complex)?;
        let rep = rep_from_json(&complex, &self.representation)?;
        let dual = self
            .dual_representation
            .as_ref()
            .map(|d| rep_from_json(&complex, d))
            .transpose()?;
        let mut morphisms = Vec::new();
        for m in &self.morphisms {
            let target = rep_from_json(&complex, &m.target)?;
            let target_dual = m.target_dual.as_ref().map(|d| rep_from_json(&complex, d)).transpose()?;
            let phi = RepMorphism::new(&complex, &rep, &target, operators_from_json(&m.components)?)?;
            morphisms.push((target, target_dual, phi));
        }
        let mu = self
            .mu
            .as_ref()
            .map(|m| m.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>, _>>())
            .transpose()?;
        Ok(ParsedJob {
            complex,
            rep,
            dual,
            morphisms,
            mu,
            options: self.options.clone(),
        })
    }
}

/// `∂Δ^{n+1}`, a triangulated `n`-sphere on `n + 2` vertices.
pub fn sphere(n: usize) -> OrderedComplex {
    let full: Simplex = (0..=n + 1).collect();
    let maximal: Vec<Simplex> = (0..=n + 1).map(|i| face(&full, i).expect("in range")).collect();
    OrderedComplex::from_maximal(&maximal).expect("boundary of a simplex")
}

/// The circle on three vertices.
pub fn circle() -> OrderedComplex {
    sphere(1)
}

/// The six-vertex projective plane.
pub fn projective_plane() -> OrderedComplex {
    let faces: [[usize; 3]; 10] = [
        [0, 1, 3],
        [0, 1, 5],
        [0, 2, 4],
        [0, 2, 5],
        [0, 3, 4],
        [1, 2, 3],
        [1, 2, 4],
        [1, 4, 5],
        [2, 3, 5],
        [3, 4, 5],
    ];
    let maximal: Vec<Simplex> = faces.iter().map(|f| f.to_vec()).collect();
    OrderedComplex::from_maximal(&maximal).expect("valid complex")
}

/// Edge holonomies on the circle: identity on `[0,1]` and `[1,2]`, `m` on `[0,2]`.
pub fn circle_holonomy(fibers: (usize, usize), partial: Option<&Matrix>, m: Matrix) -> RepUH {
    let k = circle();
    let dim = fibers.0 + fibers.1;
    let mut ops = BTreeMap::new();
    if let Some(p) = partial {
        for v in 0..3 {
            ops.insert(vec![v], p.clone());
        }
    }
    ops.insert(vec![0, 1], Matrix::identity(dim));
    ops.insert(vec![1, 2], Matrix::identity(dim));
    ops.insert(vec![0, 2], m);
    RepUH::new(&k, vec![fibers; 3], ops).expect("well formed")
}

pub fn circle_lambda(l: Rational) -> RepUH {
    circle_holonomy((1, 0), None, Matrix::diagonal(&[l]))
}

/// Fibers `ℝ^{1|1}`, zero differential, `diag(a, d)` on one edge.
pub fn circle_graded(a: Rational, d: Rational) -> RepUH {
    circle_holonomy((1, 1), None, Matrix::diagonal(&[a, d]))
}

/// Fibers `ℝ^{1|1}` with `∂e = o` and `ω₁ = id` on `∂Δ^{n+1}`: acyclic fibers.
pub fn fiberwise_acyclic(k: &OrderedComplex) -> RepUH {
    let mut ops = BTreeMap::new();
    for v in 0..k.vertex_count() {
        ops.insert(vec![v], Matrix::from_i64(&[&[0, 0], &[1, 0]]));
    }
    for e in k.simplices(1) {
        ops.insert(e.clone(), Matrix::identity(2));
    }
    RepUH::new(k, vec![(1, 1); k.vertex_count()], ops).expect("well formed")
}

/// The trivial `ℝ^{1|1}` local system on `k` conjugated by the vertex gauge
/// `diag(v + 1, 1/(v + 2))`.
pub fn gauge_twisted(k: &OrderedComplex) -> RepUH {
    let mut ops = BTreeMap::new();
    for e in k.simplices(1) {
        let (a, b) = (e[0] as i64, e[1] as i64);
        ops.insert(e.clone(), Matrix::diagonal(&[frac(a + 1, b + 1), frac(b + 2, a + 2)]));
    }
    RepUH::new(k, vec![(1, 1); k.vertex_count()], ops).expect("well formed")
}

/// Fibers `ℝ^{2|1}` on `(e₁, e₂ | o)` with `∂e₂ = o` and edge operators
/// `[[a, b, 0], [0, d, 0], [0, 0, d]]` whose `b` and `d` are not
/// multiplicative, so higher operators are needed. Returns the completed
/// representation and a completed dual.
pub fn with_higher_operators(k: &OrderedComplex) -> Result<(RepUH, RepUH), RepError> {
    let n = k.vertex_count();
    let partial = Matrix::from_i64(&[&[0, 0, 0], &[0, 0, 0], &[0, 1, 0]]);
    let mut ops = BTreeMap::new();
    for v in 0..n {
        ops.insert(vec![v], partial.clone());
    }
    for e in k.simplices(1) {
        let (i, j) = (e[0] as i64, e[1] as i64);
        let a = frac(j + 1, i + 1);
        let b = q(i + 2 * j + 1);
        let d = q(i + j + 2);
        let m = Matrix::from_rows(vec![
            vec![a, b, q(0)],
            vec![q(0), d.clone(), q(0)],
            vec![q(0), q(0), d],
        ]);
        ops.insert(e.clone(), m);
    }
    let first = RepUH::new(k, vec![(2, 1); n], ops.clone())?;
    let e = complete_structure_operators(k, vec![(2, 1); n], ops)?;
    let star_first = dual(k, &first)?;
    let e_star = complete_structure_operators(k, vec![(2, 1); n], star_first.operators().clone())?;
    Ok((e, e_star))
}

/// A split mapping cone on the circle: `ℝ^{2|1} = L ⊕ cone(id)` on the basis
/// `(l, c | c')` with `∂c = c'`, the λ-twisted line `L`, and an off-diagonal
/// `b` mixing `c` into `l` on the twisted edge. Returns the representation,
/// the line, and the quasi-isomorphism projecting onto it.
pub fn split_cone(l: Rational, b: Rational) -> (RepUH, RepUH, RepMorphism) {
    let k = circle();
    let partial = Matrix::from_i64(&[&[0, 0, 0], &[0, 0, 0], &[0, 1, 0]]);
    let m = Matrix::from_rows(vec![
        vec![l.clone(), b.clone(), q(0)],
        vec![q(0), q(1), q(0)],
        vec![q(0), q(0), q(1)],
    ]);
    let e = circle_holonomy((2, 1), Some(&partial), m);
    let target = circle_lambda(l);
    for sign in [1, -1] {
        let mut comps = BTreeMap::new();
        for v in 0..3 {
            comps.insert(vec![v], Matrix::from_i64(&[&[1, 0, 0]]));
        }
        comps.insert(
            vec![0, 2],
            Matrix::from_rows(vec![vec![q(0), q(0), &b * q(sign)]]),
        );
        let phi = RepMorphism::new(&k, &e, &target, comps).expect("well formed");
        if crate::rep::apply_morphism(&k, &e, &target, &phi).is_ok() {
            return (e, target, phi);
        }
    }
    unreachable!("one sign makes the projection a chain map")
}

/// Breaks the chain-map condition of an edge operator on the circle.
pub fn broken_circle() -> RepUH {
    let partial = Matrix::from_i64(&[&[0, 0], &[1, 0]]);
    circle_holonomy((1, 1), Some(&partial), Matrix::diagonal(&[q(2), q(1)]))
}

/// Name and job of every corpus input.
pub fn corpus() -> Vec<(String, Job)> {
    let mut out: Vec<(String, Job)> = Vec::new();
    let c = circle();
    out.push((
        "circle_trivial".into(),
        Job::new(&c, &RepUH::trivial(&c, 1, 0))
            .with_provenance("Constant real line on the three-vertex circle; H = ℝ in degrees 0 and 1.")
            .with_checks(&["subdivision", "duality", "mu"]),
    ));
    for (name, l) in [
        ("2", q(2)),
        ("3", q(3)),
        ("5", q(5)),
        ("7_2", frac(7, 2)),
    ] {
        out.push((
            format!("circle_lambda_{name}"),
            Job::new(&c, &circle_lambda(l.clone()))
                .with_provenance(&format!(
                    "Rank-one local system on the circle with holonomy {}; acyclic, torsion |λ|/(1−λ)².",
                    format_rational(&l)
                ))
                .with_checks(&["subdivision", "duality", "mu"]),
        ));
    }
    let rank2 = circle_holonomy((2, 0), None, Matrix::from_i64(&[&[2, 1], &[0, 3]]));
    out.push((
        "circle_rank2".into(),
        Job::new(&c, &rank2)
            .with_provenance("Rank-two local system on the circle with holonomy [[2,1],[0,3]].")
            .with_checks(&["subdivision", "duality", "mu"]),
    ));
    out.push((
        "circle_graded".into(),
        Job::new(&c, &circle_graded(q(2), q(3)))
            .with_provenance("Graded local system ℝ^{1|1} with zero differential and holonomy diag(2, 3).")
            .with_checks(&["duality", "mu"]),
    ));
    let (cone, line, phi) = split_cone(q(3), q(5));
    out.push((
        "circle_split_cone".into(),
        Job::new(&c, &cone)
            .with_morphism(&line, &phi)
            .with_provenance(
                "L ⊕ cone(id) on the circle with L of holonomy 3 and an off-diagonal 5 on the twisted edge; \
                 the projection to L is a quasi-isomorphism.",
            )
            .with_checks(&["duality", "quasi-iso"]),
    ));
    let s2 = sphere(2);
    out.push((
        "s2_trivial".into(),
        Job::new(&s2, &RepUH::trivial(&s2, 1, 0))
            .with_provenance("Constant line on the boundary of the tetrahedron; even-dimensional, used for μ-scaling."),
    ));
    let s3 = sphere(3);
    out.push((
        "s3_trivial".into(),
        Job::new(&s3, &RepUH::trivial(&s3, 1, 0))
            .with_provenance("Constant line on the boundary of the 4-simplex; H = ℝ in degrees 0 and 3.")
            .with_checks(&["duality", "mu"]),
    ));
    out.push((
        "s3_fiberwise_acyclic".into(),
        Job::new(&s3, &fiberwise_acyclic(&s3))
            .with_provenance("ℝ^{1|1} with ∂e = o at every vertex; acyclic with torsion 1.")
            .with_checks(&["duality", "mu"]),
    ));
    out.push((
        "s3_graded_gauge".into(),
        Job::new(&s3, &gauge_twisted(&s3))
            .with_provenance("Trivial ℝ^{1|1} local system on the 3-sphere conjugated by a vertex gauge.")
            .with_checks(&["duality", "mu"]),
    ));
    let (higher, higher_dual) = with_higher_operators(&s3).expect("solvable");
    out.push((
        "s3_higher".into(),
        Job::new(&s3, &higher)
            .with_dual(&higher_dual)
            .with_provenance(
                "ℝ^{2|1} with ∂e₂ = o and non-associative edge data completed by ω₂, ω₃ on the 3-sphere; \
                 the dual is completed the same way.",
            )
            .with_checks(&["duality", "mu"]),
    ));
    let rp2 = projective_plane();
    out.push((
        "rp2_trivial".into(),
        Job::new(&rp2, &RepUH::trivial(&rp2, 1, 0))
            .with_provenance("Six-vertex projective plane; not orientable.")
            .expecting("NotOrientable"),
    ));
    out.push((
        "circle_broken".into(),
        Job::new(&c, &broken_circle())
            .with_provenance("ℝ^{1|1} with ∂e = o and an edge operator that is not a chain map.")
            .expecting("Violation"),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::validate_mc;

    #[test]
    fn jobs_round_trip() {
        for (name, job) in corpus() {
            let back = Job::from_json(&job.to_json()).unwrap();
            assert_eq!(back, job, "{name}");
        }
    }

    #[test]
    fn higher_operators_are_present_and_flat() {
        let k = sphere(3);
        let (e, e_star) = with_higher_operators(&k).unwrap();
        assert!(e.max_degree() >= 2);
        assert!(validate_mc(&k, &e).is_ok());
        assert!(validate_mc(&k, &e_star).is_ok());
    }

    #[test]
    fn projective_plane_is_a_closed_surface() {
        let k = projective_plane();
        assert_eq!(k.euler_characteristic(), 1);
        assert!(matches!(k.validate_closed_oriented(), Err(SimplicialError::NotOrientable(_))));
    }

    #[test]
    fn broken_circle_is_parsed_but_not_flat() {
        let job = corpus().into_iter().find(|(n, _)| n == "circle_broken").unwrap().1;
        let p = job.parse().unwrap();
        assert!(validate_mc(&p.complex, &p.rep).is_err());
    }
}
