//! Acceptance suite over the shipped corpus. Prints one line per criterion
//! and exits non-zero if any fails.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::brute_force_tau_squared;
use num_traits::Signed;
use supertorsion::complexes::{cohomology, page_pairing, ComplexError};
use supertorsion::corpus::{circle_lambda, Job, ParsedJob};
use supertorsion::graded::{DetElement, Parity};
use supertorsion::linalg::{frac, q, Rational, Vector};
use supertorsion::rep::{cochain_complex, direct_sum, embed_summand};
use supertorsion::simplicial::SignFault;
use supertorsion::torsion::{
    cohomology_bases, det_routes, duality_check, local_chain_pairing, local_cohomology_table, mu_check, mu_norm,
    pd_determinant, quasi_iso_check, subdivision_check, torsion_direct, CohomologyBases, TorsionConfig,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus")
}

fn load(name: &str) -> Job {
    let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.json"))).expect("corpus file");
    Job::from_json(&text).expect("corpus file parses")
}

fn all_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus dir")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "json").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

fn config(job: &ParsedJob) -> Result<TorsionConfig, String> {
    TorsionConfig::new(job.complex.clone(), job.rep.clone(), job.dual.clone(), job.mu.clone()).map_err(|e| e.to_string())
}

/// Corpus inputs that are accepted, with their parsed form and configuration.
fn accepted() -> Vec<(String, ParsedJob, TorsionConfig)> {
    all_names()
        .into_iter()
        .filter_map(|name| {
            let job = load(&name);
            if job.options.expect_error.is_some() {
                return None;
            }
            let parsed = job.parse().expect("accepted input parses");
            let cfg = config(&parsed).expect("accepted input builds");
            Some((name, parsed, cfg))
        })
        .collect()
}

fn odd(inputs: &[(String, ParsedJob, TorsionConfig)]) -> impl Iterator<Item = &(String, ParsedJob, TorsionConfig)> {
    inputs.iter().filter(|(_, _, c)| c.complex.dim() % 2 == 1)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(format!("{:.1}s", t.as_secs_f64()))
}

fn criterion_1(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for (name, _, cfg) in inputs {
        let bases = cohomology_bases(cfg).map_err(|e| format!("{name}: {e}"))?;
        let routes = det_routes(cfg, &bases).map_err(|e| format!("{name}: {e}"))?;
        let e2 = routes.e2.ok_or_else(|| format!("{name}: page route skipped"))?;
        ensure(e2.abs() == routes.direct.abs(), || format!("{name}: {} vs {}", routes.direct, e2))?;
        count += 1;
    }
    ensure(count >= 10, || format!("only {count} inputs"))?;
    Ok(format!("{count} inputs in {}", within(start, Duration::from_secs(60))?))
}

fn criterion_2() -> Outcome {
    for (name, l) in [("2", q(2)), ("3", q(3)), ("5", q(5)), ("7_2", frac(7, 2))] {
        let expected = brute_force_tau_squared(&l);
        let parsed = load(&format!("circle_lambda_{name}")).parse().map_err(|e| e.to_string())?;
        ensure(parsed.rep == circle_lambda(l.clone()), || format!("corpus file for λ = {l} differs"))?;
        let r = torsion_direct(&config(&parsed)?, None).map_err(|e| e.to_string())?;
        ensure(r.tau_squared == expected, || format!("λ = {l}: {} vs oracle {expected}", r.tau_squared))?;
    }
    Ok("λ ∈ {2, 3, 5, 7/2} exact".into())
}

fn criterion_3(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for (name, _, cfg) in odd(inputs) {
        let base = torsion_direct(cfg, None).map_err(|e| format!("{name}: {e}"))?;
        for depth in [1, 2] {
            let c = subdivision_check(cfg, &base, depth).map_err(|e| format!("{name} x{depth}: {e}"))?;
            ensure(c.passed, || format!("{name}: {} {}", c.name, c.detail))?;
            count += 1;
        }
    }
    Ok(format!("{count} subdivisions in {}", within(start, Duration::from_secs(600))?))
}

fn criterion_4(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    let (_, s2, cfg) = inputs.iter().find(|(n, _, _)| n == "s2_trivial").ok_or("s2_trivial missing")?;
    let reference = mu_norm(cfg).map_err(|e| e.to_string())?;
    let x = DetElement::standard(&reference.reference.space);
    for l in [q(2), q(3)] {
        let scaled = cfg
            .clone()
            .with_mu(Some(vec![l.clone(); s2.complex.vertex_count()]))
            .map_err(|e| e.to_string())?;
        let ratio = mu_norm(&scaled).map_err(|e| e.to_string())?.norm(&x).map_err(|e| e.to_string())?
            / reference.norm(&x).map_err(|e| e.to_string())?;
        ensure(ratio == (&l * &l).recip(), || format!("λ = {l}: ratio {ratio}"))?;
    }
    let mut count = 0;
    for (name, _, cfg) in odd(inputs) {
        let base = torsion_direct(cfg, None).map_err(|e| format!("{name}: {e}"))?;
        for f in [q(7), frac(-3, 2)] {
            let c = mu_check(cfg, &base, &f).map_err(|e| format!("{name}: {e}"))?;
            ensure(c.passed, || format!("{name} factor {f}: {}", c.detail))?;
        }
        count += 1;
    }
    Ok(format!("S² scales by |λ|^-2; {count} odd inputs unchanged"))
}

fn direct_sum_holds(a: &TorsionConfig, b: &TorsionConfig) -> Result<(), String> {
    let k = &a.complex;
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let ra = torsion_direct(a, None).map_err(|e| err(&e))?;
    let rb = torsion_direct(b, None).map_err(|e| err(&e))?;
    let sum = direct_sum(k, &a.rep, &b.rep).map_err(|e| err(&e))?;
    let sum_dual = direct_sum(k, &a.dual_rep, &b.dual_rep).map_err(|e| err(&e))?;
    let cs = TorsionConfig::new(k.clone(), sum, Some(sum_dual), None).map_err(|e| err(&e))?;
    let embed = |e: &_, f: &_, which, v: &Vector| embed_summand(k, e, f, which, v);
    let mut h: Vec<Vector> = ra.h.iter().map(|v| embed(&a.rep, &b.rep, 0, v)).collect();
    h.extend(rb.h.iter().map(|v| embed(&a.rep, &b.rep, 1, v)));
    let rs = torsion_direct(&cs, Some(&h)).map_err(|e| err(&e))?;
    let product = &ra.tau_squared * &rb.tau_squared;
    ensure(rs.tau_squared == product, || format!("τ² {} vs {product}", rs.tau_squared))?;

    let ga = cohomology_bases(a).map_err(|e| err(&e))?.g;
    let gb = cohomology_bases(b).map_err(|e| err(&e))?.g;
    let mut g: Vec<Vector> = ga.iter().map(|v| embed(&a.dual_rep, &b.dual_rep, 0, v)).collect();
    g.extend(gb.iter().map(|v| embed(&a.dual_rep, &b.dual_rep, 1, v)));
    let rho = |cfg, h, g| -> Result<Rational, String> {
        Ok(pd_determinant(cfg, &CohomologyBases { h, g }).map_err(|e| err(&e))?.0)
    };
    let rs = rho(&cs, h, g)?;
    let re = rho(a, ra.h.clone(), ga)? * rho(b, rb.h.clone(), gb)?;
    ensure(rs.abs() == re.abs(), || format!("ρ {rs} vs {re}"))
}

fn criterion_5(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    let mut dual_count = 0;
    for (name, _, cfg) in odd(inputs) {
        let base = torsion_direct(cfg, None).map_err(|e| format!("{name}: {e}"))?;
        let c = duality_check(cfg, &base).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.passed, || format!("{name} duality: {}", c.detail))?;
        dual_count += 1;
    }
    let find = |n: &str| inputs.iter().find(|(m, _, _)| m == n).map(|(_, _, c)| c).ok_or(format!("{n} missing"));
    let pairs = [
        ("circle_lambda_2", "circle_lambda_3"),
        ("circle_trivial", "circle_lambda_7_2"),
        ("circle_graded", "circle_split_cone"),
        ("circle_rank2", "circle_lambda_5"),
        ("s3_trivial", "s3_fiberwise_acyclic"),
        ("s3_higher", "s3_graded_gauge"),
    ];
    for (a, b) in pairs {
        direct_sum_holds(find(a)?, find(b)?).map_err(|e| format!("{a} ⊕ {b}: {e}"))?;
    }
    Ok(format!("duality on {dual_count} inputs, {} direct sums", pairs.len()))
}

fn criterion_6(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    let mut count = 0;
    for (name, parsed, cfg) in inputs {
        for (target, target_dual, phi) in &parsed.morphisms {
            let base = torsion_direct(cfg, None).map_err(|e| format!("{name}: {e}"))?;
            let c = quasi_iso_check(cfg, &base, target, target_dual.as_ref(), phi).map_err(|e| format!("{name}: {e}"))?;
            ensure(c.passed, || format!("{name}: {}", c.detail))?;
            count += 1;
        }
    }
    ensure(count > 0, || "no morphisms in the corpus".into())?;
    Ok(format!("morphisms checked: {count}"))
}

fn criterion_7(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    for (name, parsed, cfg) in inputs {
        let k = &parsed.complex;
        let n = k.dim();
        let f = cochain_complex(k, &parsed.rep).map_err(|e| e.to_string())?;
        let l = &cfg.systems.0.system;
        let expected = local_cohomology_table(k, l).map_err(|e| e.to_string())?;
        let page2 = f.page_dimensions(2);
        for (key, dim) in &expected {
            let got = page2.get(key).copied().unwrap_or(0);
            ensure(got == *dim, || format!("{name}: page 2 at {key:?} is {got}, expected {dim}"))?;
        }
        let last = f.page_dimensions(n + 1);
        for r in n + 2..=n + 4 {
            ensure(f.page_dimensions(r) == last, || format!("{name}: page {r} differs from page {}", n + 1))?;
        }
        let coh = cohomology(f.base());
        let total = |p: Parity| last.iter().filter(|(k, _)| k.1 == p).map(|(_, d)| d).sum::<usize>();
        ensure((total(Parity::Even), total(Parity::Odd)) == (coh.even_dim(), coh.odd_dim()), || {
            format!("{name}: limit page is not H")
        })?;

        let (left, right, m) = local_chain_pairing(k, l, SignFault::default()).map_err(|e| e.to_string())?;
        let mut nondegenerate = false;
        for r in 0..=n + 2 {
            let pp = page_pairing(&left, &right, &m, n, r).map_err(|e| format!("{name} page {r}: {e}"))?;
            pp.check_skew_adjoint().map_err(|e| format!("{name} page {r}: {e}"))?;
            ensure(!nondegenerate || pp.is_nondegenerate(), || format!("{name}: page {r} degenerate"))?;
            nondegenerate |= pp.is_nondegenerate();
        }
        ensure(nondegenerate, || format!("{name}: pairing never nondegenerate"))?;
    }
    Ok(format!("{} inputs", inputs.len()))
}

fn criterion_8(inputs: &[(String, ParsedJob, TorsionConfig)]) -> Outcome {
    let mut refused = 0;
    for name in all_names() {
        let job = load(&name);
        let Some(expected) = &job.options.expect_error else { continue };
        let code = match job.parse() {
            Err(e) => e.code(),
            Ok(p) => TorsionConfig::new(p.complex, p.rep, p.dual, p.mu)
                .err()
                .map_or("accepted", |e| e.code()),
        };
        ensure(code == expected, || format!("{name}: got {code}, expected {expected}"))?;
        refused += 1;
    }
    ensure(refused >= 2, || "missing negative controls".into())?;
    let mut caught = 0;
    for (name, parsed, cfg) in inputs.iter().filter(|(_, _, c)| c.is_local_system()) {
        let k = &parsed.complex;
        for degree in 0..=k.dim() {
            let fault = SignFault { flip_degree: Some(degree) };
            let (left, right, m) = local_chain_pairing(k, &cfg.rep, fault).map_err(|e| e.to_string())?;
            match page_pairing(&left, &right, &m, k.dim(), 0) {
                Err(ComplexError::NotSkewAdjoint { .. }) => caught += 1,
                other => return Err(format!("{name}, flipped degree {degree}: {other:?}")),
            }
        }
    }
    Ok(format!("{refused} inputs refused, {caught} sign errors caught"))
}

fn main() -> ExitCode {
    let inputs = accepted();
    let criteria: Vec<Criterion> = vec![
        ("routes agree", Box::new(|| criterion_1(&inputs))),
        ("circle oracle", Box::new(criterion_2)),
        ("subdivision invariance", Box::new(|| criterion_3(&inputs))),
        ("mu scaling", Box::new(|| criterion_4(&inputs))),
        ("duality and direct sums", Box::new(|| criterion_5(&inputs))),
        ("quasi-isomorphism invariance", Box::new(|| criterion_6(&inputs))),
        ("spectral pages", Box::new(|| criterion_7(&inputs))),
        ("negative controls", Box::new(|| criterion_8(&inputs))),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {title} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {title}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
