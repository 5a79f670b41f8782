//! Subcommands of the `supertorsion` binary. Each returns the JSON document
//! for standard output together with the process exit code.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use supertorsion::complexes::page_pairing;
use supertorsion::corpus::{Job, ParsedJob};
use supertorsion::graded::DetElement;
use supertorsion::linalg::{format_rational, parse_rational, q, Rational};
use supertorsion::rep::{
    apply_morphism, check_dual, cochain_complex, direct_sum, embed_summand, fiber_cohomology_system, validate_mc,
};
use supertorsion::simplicial::SignFault;
use supertorsion::torsion::{
    cohomology_bases, det_routes, duality_check, local_chain_pairing, local_cohomology_table, mu_check, mu_norm,
    page_table, quasi_iso_check, subdivision_check, torsion_direct, TorsionConfig, TorsionError,
};

/// Environment variable naming the corpus directory.
pub const CORPUS_ENV: &str = "SUPERTORSION_CORPUS";

pub const EXIT_OK: i32 = 0;
/// A validator refused the input, a computation failed, or a check failed.
pub const EXIT_FAILED: i32 = 1;
/// The job could not be read or parsed.
pub const EXIT_INPUT: i32 = 2;

const DEFAULT_PRECISION: usize = 12;
const DEFAULT_MU_FACTOR: i64 = 7;
/// Inputs whose cochain complex exceeds this are skipped by the page checks
/// of the self-test.
const SELFTEST_PAGE_LIMIT: usize = 240;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: Value,
    pub code: i32,
}

fn error(code: &str, message: impl Into<String>, exit: i32) -> Outcome {
    Outcome {
        document: json!({"error": {"code": code, "message": message.into()}}),
        code: exit,
    }
}

fn torsion_error(e: &TorsionError) -> Outcome {
    error(e.code(), e.to_string(), EXIT_FAILED)
}

pub fn corpus_dir() -> PathBuf {
    match std::env::var_os(CORPUS_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus"),
    }
}

/// Reads a job from a path, or by name from the corpus directory.
pub fn load_job(arg: &str) -> Result<Job, Outcome> {
    let direct = Path::new(arg);
    let path = if direct.exists() {
        direct.to_path_buf()
    } else {
        let named = corpus_dir().join(format!("{arg}.json"));
        if !named.exists() {
            return Err(error("FileNotFound", format!("no job file {arg}"), EXIT_INPUT));
        }
        named
    };
    let text = std::fs::read_to_string(&path).map_err(|e| error("Io", format!("{}: {e}", path.display()), EXIT_INPUT))?;
    Job::from_json(&text).map_err(|e| error(e.code(), e.to_string(), EXIT_INPUT))
}

fn parse(job: &Job) -> Result<ParsedJob, Outcome> {
    job.parse().map_err(|e| error(e.code(), e.to_string(), EXIT_FAILED))
}

fn configure(p: &ParsedJob) -> Result<TorsionConfig, Outcome> {
    TorsionConfig::new(p.complex.clone(), p.rep.clone(), p.dual.clone(), p.mu.clone()).map_err(|e| torsion_error(&e))
}

pub fn cmd_validate(job: &Job) -> Outcome {
    let p = match parse(job) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let k = &p.complex;
    let mut problems = Vec::new();
    let mut push = |code: &str, message: String| problems.push(json!({"code": code, "message": message}));
    if let Err(e) = k.validate_closed_oriented() {
        push(supertorsion::torsion::simplicial_code(&e), e.to_string());
    }
    let mc = validate_mc(k, &p.rep);
    if let Err(e) = &mc {
        push(supertorsion::torsion::rep_code(e), e.to_string());
    }
    if mc.is_ok() {
        let dual = match &p.dual {
            Some(d) => validate_mc(k, d).map(|_| d.clone()),
            None => supertorsion::rep::dual(k, &p.rep),
        };
        match dual {
            Ok(d) => {
                if let Err(e) = check_dual(k, &p.rep, &d) {
                    push(supertorsion::torsion::rep_code(&e), e.to_string());
                }
            }
            Err(e) => push(supertorsion::torsion::rep_code(&e), e.to_string()),
        }
        for (i, (target, _, phi)) in p.morphisms.iter().enumerate() {
            if let Err(e) = validate_mc(k, target).and_then(|_| apply_morphism(k, &p.rep, target, phi)) {
                push(supertorsion::torsion::rep_code(&e), format!("morphism {i}: {e}"));
            }
        }
    }
    let valid = problems.is_empty();
    Outcome {
        document: json!({
            "valid": valid,
            "vertices": k.vertex_count(),
            "dimension": k.dim(),
            "euler_characteristic": k.euler_characteristic(),
            "max_degree": p.rep.max_degree(),
            "local_system": p.rep.is_local_system(k),
            "dual": if p.dual.is_some() { "supplied" } else { "automatic" },
            "problems": problems,
        }),
        code: if valid { EXIT_OK } else { EXIT_FAILED },
    }
}

pub fn cmd_cohomology(job: &Job) -> Outcome {
    let p = match parse(job) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let k = &p.complex;
    let f = match cochain_complex(k, &p.rep) {
        Ok(f) => f,
        Err(e) => return error(supertorsion::torsion::rep_code(&e), e.to_string(), EXIT_FAILED),
    };
    let coh = supertorsion::complexes::cohomology(f.base());
    let fibers = match fiber_cohomology_system(k, &p.rep) {
        Ok(s) => s.fibers.iter().map(|c| [c.even, c.odd]).collect::<Vec<_>>(),
        Err(e) => return error(supertorsion::torsion::rep_code(&e), e.to_string(), EXIT_FAILED),
    };
    Outcome {
        document: json!({
            "dimension": k.dim(),
            "cochain_dimension": f.base().dim(),
            "h_even": coh.even_dim(),
            "h_odd": coh.odd_dim(),
            "fiber_cohomology": fibers,
            "pages": page_table(&f),
        }),
        code: EXIT_OK,
    }
}

#[derive(Debug, Clone, Default)]
pub struct TorsionArgs {
    pub checks: Option<Vec<String>>,
    pub subdivide: Option<usize>,
    pub precision: Option<usize>,
}

pub fn cmd_torsion(job: &Job, args: &TorsionArgs) -> Outcome {
    let p = match parse(job) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let cfg = match configure(&p) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let checks = args.checks.clone().unwrap_or_else(|| p.options.checks.clone());
    for c in &checks {
        if !["subdivision", "duality", "mu", "quasi-iso"].contains(&c.as_str()) {
            return error("UnknownCheck", format!("unknown check {c}"), EXIT_INPUT);
        }
    }
    let result = match torsion_direct(&cfg, None) {
        Ok(r) => r,
        Err(e) => return torsion_error(&e),
    };
    let mut depth = args.subdivide.or(p.options.subdivide);
    if depth.is_none() && checks.iter().any(|c| c == "subdivision") {
        depth = Some(1);
    }
    let factor = match &p.options.mu_factor {
        Some(s) => match parse_rational(s) {
            Some(x) => x,
            None => return error("BadRational", format!("bad rational {s:?}"), EXIT_INPUT),
        },
        None => q(DEFAULT_MU_FACTOR),
    };
    let mut outcomes = Vec::new();
    let mut run = || -> Result<(), TorsionError> {
        if let Some(d) = depth.filter(|&d| d > 0) {
            outcomes.push(subdivision_check(&cfg, &result, d)?);
        }
        if checks.iter().any(|c| c == "duality") {
            outcomes.push(duality_check(&cfg, &result)?);
        }
        if checks.iter().any(|c| c == "mu") {
            outcomes.push(mu_check(&cfg, &result, &factor)?);
        }
        if checks.iter().any(|c| c == "quasi-iso") {
            for (target, target_dual, phi) in &p.morphisms {
                outcomes.push(quasi_iso_check(&cfg, &result, target, target_dual.as_ref(), phi)?);
            }
        }
        Ok(())
    };
    if let Err(e) = run() {
        return torsion_error(&e);
    }
    let failed = outcomes.iter().any(|o| !o.passed);
    let precision = args.precision.or(p.options.precision).unwrap_or(DEFAULT_PRECISION);
    let report = result.report(outcomes, precision);
    Outcome {
        document: serde_json::to_value(report).expect("reports serialize"),
        code: if failed { EXIT_FAILED } else { EXIT_OK },
    }
}

/// One line of the self-test.
fn entry(input: &str, check: &str, passed: bool, detail: impl Into<String>) -> Value {
    json!({"input": input, "check": check, "passed": passed, "detail": detail.into()})
}

fn selftest_job(name: &str, job: &Job, fault: SignFault, out: &mut Vec<Value>) {
    let parsed = match job.parse() {
        Ok(p) => p,
        Err(e) => {
            let expected = job.options.expect_error.as_deref() == Some(e.code());
            out.push(entry(name, "refusal", expected, e.to_string()));
            return;
        }
    };
    let cfg = match configure(&parsed) {
        Ok(c) => c,
        Err(o) => {
            let code = o.document["error"]["code"].as_str().unwrap_or_default().to_string();
            let expected = job.options.expect_error.as_deref() == Some(code.as_str());
            out.push(entry(name, "refusal", expected, code));
            return;
        }
    };
    if let Some(code) = &job.options.expect_error {
        out.push(entry(name, "refusal", false, format!("accepted, expected {code}")));
        return;
    }
    let k = &cfg.complex;
    let n = k.dim();

    // Route agreement, any dimension.
    let bases = match cohomology_bases(&cfg) {
        Ok(b) => b,
        Err(e) => {
            out.push(entry(name, "routes", false, e.to_string()));
            return;
        }
    };
    match det_routes(&cfg, &bases) {
        Ok(r) => out.push(entry(
            name,
            "routes",
            true,
            format!(
                "direct {}, pages {}",
                format_rational(&r.direct),
                r.e2.as_ref().map_or("skipped".into(), format_rational)
            ),
        )),
        Err(e) => out.push(entry(name, "routes", false, e.to_string())),
    }

    // Spectral pages.
    if let (Ok(f), Ok(l)) = (cochain_complex(k, &cfg.rep), fiber_cohomology_system(k, &cfg.rep)) {
        if f.base().dim() <= SELFTEST_PAGE_LIMIT {
            let expected = local_cohomology_table(k, &l.system);
            let page2 = f.page_dimensions(2);
            let ok = expected.as_ref().is_ok_and(|t| {
                t.iter().all(|(key, d)| page2.get(key).copied().unwrap_or(0) == *d)
            });
            out.push(entry(name, "second page", ok, "E_2 against cohomology of the fiber cohomology system"));
            let stable = f.page_dimensions(n + 1) == f.page_dimensions(n + 2);
            out.push(entry(name, "stabilization", stable, format!("pages {} and {}", n + 1, n + 2)));
        }
    }

    // Pairings on the pages of a local system.
    if cfg.is_local_system() && cfg.rep.layout(k).total <= SELFTEST_PAGE_LIMIT {
        match local_chain_pairing(k, &cfg.rep, fault) {
            Ok((left, right, m)) => {
                let mut ok = true;
                let mut detail = String::from("skew-adjoint on every page");
                let mut nondegenerate = false;
                for r in 0..=n + 2 {
                    match page_pairing(&left, &right, &m, n, r).and_then(|pp| pp.check_skew_adjoint().map(|_| pp)) {
                        Ok(pp) => {
                            if nondegenerate && !pp.is_nondegenerate() {
                                ok = false;
                                detail = format!("page {r} lost nondegeneracy");
                                break;
                            }
                            nondegenerate |= pp.is_nondegenerate();
                        }
                        Err(e) => {
                            ok = false;
                            detail = format!("page {r}: {e}");
                            break;
                        }
                    }
                }
                out.push(entry(name, "page pairing skew-adjointness", ok, detail));
            }
            Err(e) => out.push(entry(name, "page pairing skew-adjointness", false, e.to_string())),
        }
    }

    if n % 2 == 0 {
        // μ-scaling of the norm on the even-dimensional toy.
        if cfg.rep.layout(k).total <= SELFTEST_PAGE_LIMIT {
            let lambda = q(2);
            let check = (|| -> Result<bool, TorsionError> {
                let a = mu_norm(&cfg)?;
                let b = mu_norm(&cfg.clone().with_mu(Some(vec![lambda.clone(); k.vertex_count()]))?)?;
                let x = DetElement::standard(&a.reference.space);
                let expected = lambda.pow(-(k.euler_characteristic() as i32));
                Ok(b.norm(&x)? / a.norm(&x)? == expected)
            })();
            out.push(entry(name, "mu-scaling", check.unwrap_or(false), "norm rescales by |λ|^(−χ)"));
        }
        return;
    }

    let result = match torsion_direct(&cfg, None) {
        Ok(r) => r,
        Err(e) => {
            out.push(entry(name, "torsion", false, e.to_string()));
            return;
        }
    };
    out.push(entry(name, "torsion", true, format_rational(&result.tau_squared)));
    let mut record = |r: Result<supertorsion::torsion::CheckOutcome, TorsionError>, label: &str| match r {
        Ok(o) => out.push(entry(name, &o.name, o.passed, o.detail)),
        Err(e) => out.push(entry(name, label, false, e.to_string())),
    };
    record(duality_check(&cfg, &result), "duality");
    record(mu_check(&cfg, &result, &q(DEFAULT_MU_FACTOR)), "mu");
    record(subdivision_check(&cfg, &result, 1), "subdivision");
    for (target, target_dual, phi) in &parsed.morphisms {
        record(quasi_iso_check(&cfg, &result, target, target_dual.as_ref(), phi), "quasi-iso");
    }
}

/// Multiplicativity of the torsion over direct sums of the odd-dimensional
/// inputs that share a complex.
fn selftest_sums(jobs: &[(String, ParsedJob)], out: &mut Vec<Value>) {
    let usable: Vec<(&String, &ParsedJob, TorsionConfig)> = jobs
        .iter()
        .filter_map(|(name, p)| {
            let cfg = configure(p).ok()?;
            (cfg.complex.dim() % 2 == 1 && cfg.rep.layout(&cfg.complex).total <= 60).then_some((name, p, cfg))
        })
        .collect();
    for (i, (na, pa, ca)) in usable.iter().enumerate() {
        for (nb, pb, cb) in &usable[i + 1..] {
            if pa.complex != pb.complex {
                continue;
            }
            let label = format!("{na} + {nb}");
            let check = (|| -> Result<(bool, String), TorsionError> {
                let k = &ca.complex;
                let ra = torsion_direct(ca, None)?;
                let rb = torsion_direct(cb, None)?;
                let sum = direct_sum(k, &ca.rep, &cb.rep)?;
                let sum_dual = direct_sum(k, &ca.dual_rep, &cb.dual_rep)?;
                let cs = TorsionConfig::new(k.clone(), sum, Some(sum_dual), None)?;
                let mut h: Vec<_> = ra.h.iter().map(|v| embed_summand(k, &ca.rep, &cb.rep, 0, v)).collect();
                h.extend(rb.h.iter().map(|v| embed_summand(k, &ca.rep, &cb.rep, 1, v)));
                let rs = torsion_direct(&cs, Some(&h))?;
                let expected: Rational = &ra.tau_squared * &rb.tau_squared;
                Ok((
                    rs.tau_squared == expected,
                    format!("{} vs {}", format_rational(&rs.tau_squared), format_rational(&expected)),
                ))
            })();
            match check {
                Ok((ok, detail)) => out.push(entry(&label, "direct sum", ok, detail)),
                Err(e) => out.push(entry(&label, "direct sum", false, e.to_string())),
            }
        }
    }
}

/// Runs the property suite over every job in `dir`, sorted by file name.
pub fn cmd_selftest(dir: &Path, inject_sign_error: bool) -> Outcome {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => return error("Io", format!("{}: {e}", dir.display()), EXIT_INPUT),
    };
    files.sort();
    let fault = SignFault {
        flip_degree: inject_sign_error.then_some(1),
    };
    let mut out = Vec::new();
    let mut parsed = Vec::new();
    for path in &files {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let job = match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| Job::from_json(&t).map_err(|e| e.to_string()))
        {
            Ok(j) => j,
            Err(e) => {
                out.push(entry(&name, "parse", false, e));
                continue;
            }
        };
        selftest_job(&name, &job, fault, &mut out);
        if job.options.expect_error.is_none() {
            if let Ok(p) = job.parse() {
                parsed.push((name, p));
            }
        }
    }
    selftest_sums(&parsed, &mut out);
    let failed: Vec<String> = out
        .iter()
        .filter(|e| e["passed"] == json!(false))
        .map(|e| format!("{}: {}", e["input"].as_str().unwrap_or(""), e["check"].as_str().unwrap_or("")))
        .collect();
    Outcome {
        document: json!({
            "passed": failed.is_empty(),
            "inputs": files.len(),
            "failures": failed,
            "checks": out,
        }),
        code: if failed.is_empty() { EXIT_OK } else { EXIT_FAILED },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use supertorsion::corpus::corpus;

    fn job(name: &str) -> Job {
        corpus().into_iter().find(|(n, _)| n == name).unwrap().1
    }

    #[test]
    fn validate_accepts_the_circle() {
        assert_eq!(cmd_validate(&job("circle_lambda_3")).code, EXIT_OK);
    }

    #[test]
    fn validate_reports_codes() {
        let o = cmd_validate(&job("circle_broken"));
        assert_eq!(o.code, EXIT_FAILED);
        assert_eq!(o.document["problems"][0]["code"], "Violation");
        let o = cmd_validate(&job("rp2_trivial"));
        assert_eq!(o.document["problems"][0]["code"], "NotOrientable");
    }

    #[test]
    fn cohomology_of_spheres() {
        let o = cmd_cohomology(&job("s3_trivial"));
        assert_eq!((o.document["h_even"].clone(), o.document["h_odd"].clone()), (json!(1), json!(1)));
        let o = cmd_cohomology(&job("s3_fiberwise_acyclic"));
        assert_eq!(o.document["h_even"], json!(0));
    }

    #[test]
    fn torsion_rejects_unknown_checks() {
        let args = TorsionArgs {
            checks: Some(vec!["bogus".into()]),
            ..Default::default()
        };
        assert_eq!(cmd_torsion(&job("circle_lambda_3"), &args).code, EXIT_INPUT);
    }
}
