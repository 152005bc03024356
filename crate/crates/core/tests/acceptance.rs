//! Acceptance run: one line per criterion, then a single assertion.

mod support;

use std::time::{Duration, Instant};

use ckmorita::ckterm::{evaluate, Polynomial, Presentation};
use ckmorita::elemeq::{solve_elementary, verify_elementary, Budget, SolveOutcome};
use ckmorita::exactmat::{mat_mul, trace_power_sequence, Matrix};
use ckmorita::invariants::{bowen_franks, det_i_minus_a, entropy};
use ckmorita::morita::{build_certificate, reconstruct_factors, verify_certificate, MoritaCertificate, CHECK_NAMES};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn standard_factors() -> (Matrix, Matrix, Matrix, Matrix) {
    (m(&[&[2]]), m(&[&[1, 1], &[1, 1]]), m(&[&[1, 1]]), m(&[&[1], &[1]]))
}

fn standard_example() -> Outcome {
    let start = Instant::now();
    let (a, b, c, d) = standard_factors();
    ensure(verify_elementary(&a, &b, &c, &d).map_err(|e| e.to_string())?, || "verify_elementary rejected (C, D)".into())?;
    let cert = build_certificate(&a, &b, &c, &d).map_err(|e| e.to_string())?;
    ensure(cert.c_tilde == m(&[&[1, 0], &[0, 1]]), || format!("C~ = {:?}", to_vecs(&cert.c_tilde)))?;
    ensure(cert.d_tilde == m(&[&[1, 1], &[1, 1]]), || format!("D~ = {:?}", to_vecs(&cert.d_tilde)))?;
    let report = verify_certificate(&cert);
    ensure(report.passed() && report.checks.len() == CHECK_NAMES.len(), || format!("failed checks {:?}", report.failed_names()))?;
    let recovered = reconstruct_factors(&cert).map_err(|e| e.to_string())?;
    ensure(recovered == (c, d), || "reconstruction differs from (C, D)".into())?;
    let total = start.elapsed();
    ensure(total < Duration::from_secs(1), || format!("took {total:?}"))?;
    Ok(format!("13/13 checks, exact reconstruction, {total:.2?}"))
}

/// Random `(C, D)` with sizes at most 3 and entries at most 2 whose
/// products are irreducible and not permutations.
fn random_factors(rng: &mut impl Rng) -> (Matrix, Matrix) {
    loop {
        let (n, k) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let c = random_matrix(rng, n, k, 2);
        let d = random_matrix(rng, k, n, 2);
        if is_standing(&mat_mul(&c, &d).unwrap()) && is_standing(&mat_mul(&d, &c).unwrap()) {
            return (c, d);
        }
    }
}

fn random_witnesses() -> Vec<(Matrix, Matrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..200).map(|_| random_factors(&mut rng)).collect()
}

fn round_trip_at_scale(witnesses: &[(Matrix, Matrix)]) -> Outcome {
    let mut slowest = Duration::ZERO;
    for (i, (c, d)) in witnesses.iter().enumerate() {
        let (result, elapsed) = timed(|| -> Result<bool, String> {
            let a = mat_mul(c, d).map_err(|e| e.to_string())?;
            let b = mat_mul(d, c).map_err(|e| e.to_string())?;
            let cert = build_certificate(&a, &b, c, d).map_err(|e| e.to_string())?;
            let report = verify_certificate(&cert);
            if !report.passed() {
                return Err(format!("failed checks {:?}", report.failed_names()));
            }
            Ok(reconstruct_factors(&cert).map_err(|e| e.to_string())? == (c.clone(), d.clone()))
        });
        let tag = || format!("pair {i}: C = {:?}, D = {:?}", to_vecs(c), to_vecs(d));
        match result {
            Ok(true) => {}
            Ok(false) => return Err(format!("{}: reconstruction differs", tag())),
            Err(e) => return Err(format!("{}: {e}", tag())),
        }
        ensure(elapsed < Duration::from_secs(2), || format!("{} took {elapsed:?}", tag()))?;
        slowest = slowest.max(elapsed);
    }
    Ok(format!("{} pairs round-tripped, slowest {slowest:.2?}", witnesses.len()))
}

fn invariance(witnesses: &[(Matrix, Matrix)]) -> Outcome {
    for (i, (c, d)) in witnesses.iter().enumerate() {
        let a = mat_mul(c, d).unwrap();
        let b = mat_mul(d, c).unwrap();
        let traces = |x: &Matrix| trace_power_sequence(x, 6).map_err(|e| e.to_string());
        ensure(traces(&a)? == traces(&b)?, || format!("pair {i}: traces differ"))?;
        let det = |x: &Matrix| det_i_minus_a(x).map_err(|e| e.to_string());
        ensure(det(&a)? == det(&b)?, || format!("pair {i}: det(I - A) differs"))?;
        let bf = |x: &Matrix| bowen_franks(x).map_err(|e| e.to_string());
        ensure(bf(&a)? == bf(&b)?, || format!("pair {i}: Bowen-Franks differs"))?;
    }
    Ok(format!("{} witnesses: traces n <= 6, det(I - A), Bowen-Franks all equal", witnesses.len()))
}

fn small_standing() -> Vec<Matrix> {
    (1..=2).flat_map(|n| all_matrices(n, n, 2)).filter(is_standing).collect()
}

fn solver_vs_enumeration() -> Outcome {
    let mats = small_standing();
    let (mut found, mut infeasible) = (0, 0);
    let mut slowest = Duration::ZERO;
    for a in &mats {
        for b in &mats {
            let (got, elapsed) = timed(|| solve_elementary(a, b, &Budget::unlimited()));
            let got = match got.map_err(|e| e.to_string())? {
                SolveOutcome::Found(w) => Some((to_vecs(&w.c), to_vecs(&w.d))),
                SolveOutcome::Infeasible { .. } => None,
                SolveOutcome::BudgetExhausted { .. } => return Err("unlimited budget exhausted".into()),
            };
            let expected = naive_least_witness(&to_vecs(a), &to_vecs(b));
            ensure(got == expected, || {
                format!("A = {:?}, B = {:?}: solver {got:?}, enumeration {expected:?}", to_vecs(a), to_vecs(b))
            })?;
            ensure(elapsed < Duration::from_secs(5), || format!("{:?} vs {:?} took {elapsed:?}", to_vecs(a), to_vecs(b)))?;
            slowest = slowest.max(elapsed);
            if got.is_some() {
                found += 1;
            } else {
                infeasible += 1;
            }
        }
    }
    let golden = m(&[&[1, 1], &[1, 0]]);
    match solve_elementary(&m(&[&[2]]), &golden, &Budget::unlimited()).map_err(|e| e.to_string())? {
        SolveOutcome::Infeasible { screen: Some(name) } => Ok(format!(
            "{} pairs agree ({found} equivalent, {infeasible} not), slowest {slowest:.2?}; ([2], golden mean) screened by {name}",
            found + infeasible
        )),
        other => Err(format!("([2], golden mean) gave {other:?}")),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1729);
    let (mut equal, mut different) = (0, 0);
    for i in 0..1000 {
        let x = random_presenting(&mut rng, 6);
        let pres = Presentation::with_default_names(&x).unwrap();
        let pa = PathAction::new(&x);
        let ep = random_expr(&mut rng, &pa, 3);
        let eq = companion(&mut rng, &pa, &ep, 3);
        let p = evaluate(&ep, &pres).map_err(|e| e.to_string())?;
        let q = evaluate(&eq, &pres).map_err(|e| e.to_string())?;
        let l = probe_length(&p, &q);
        let claimed = p.is_equal(&q).map_err(|e| e.to_string())?;
        let observed = pa.agree(&ep, &eq, &[l, l + 1]);
        ensure(claimed == observed, || format!("pair {i}: is_equal {claimed}, oracle {observed} for {p} vs {q}"))?;
        if claimed {
            equal += 1;
        } else {
            different += 1;
        }
    }
    let (checked, elapsed) = timed(relation_suite);
    Ok(format!(
        "1000 pairs agree ({equal} equal, {different} not); relations hold for {} presenting matrices in {elapsed:.2?}",
        checked?
    ))
}

fn relations_hold(x: &Matrix) -> Result<(), String> {
    let pres = Presentation::with_default_names(x).map_err(|e| e.to_string())?;
    let n = x.rows();
    let mut total = Polynomial::zero(&pres);
    for e in 0..n {
        let s = Polynomial::generator(&pres, e);
        let mut rhs = Polynomial::zero(&pres);
        for f in (0..n).filter(|&f| !x.get(e, f).is_zero()) {
            rhs = rhs.add(&Polynomial::range_projection(&pres, f)).unwrap();
        }
        let lhs = s.adjoint().mul(&s).unwrap();
        ensure(lhs.is_equal(&rhs).unwrap(), || format!("{:?}: S*S fails at edge {e}", to_vecs(x)))?;
        total = total.add(&Polynomial::range_projection(&pres, e)).unwrap();
    }
    ensure(total.is_equal(&Polynomial::one(&pres)).unwrap(), || format!("{:?}: projections do not sum to 1", to_vecs(x)))
}

fn no_zero_lines(x: &Matrix) -> bool {
    let n = x.rows();
    (0..n).all(|i| (0..n).any(|j| !x.get(i, j).is_zero())) && (0..n).all(|j| (0..n).any(|i| !x.get(i, j).is_zero()))
}

/// Every 0-1 matrix up to size 4, then a seeded sample of each size 5 to 8.
fn relation_suite() -> Result<usize, String> {
    let mut checked = 0;
    for n in 1..=4 {
        for x in all_matrices(n, n, 1).into_iter().filter(no_zero_lines) {
            relations_hold(&x)?;
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 5..=8 {
        let mut sampled = 0;
        while sampled < 250 {
            let x = random_matrix(&mut rng, n, n, 1);
            if no_zero_lines(&x) {
                relations_hold(&x)?;
                sampled += 1;
            }
        }
        checked += sampled;
    }
    Ok(checked)
}

fn corrupt(rng: &mut impl Rng, cert: &MoritaCertificate) -> (String, MoritaCertificate) {
    let mut bad = cert.clone();
    let label = match rng.gen_range(0..4) {
        0 | 1 => {
            let (name, x) = if rng.gen_bool(0.5) { ("C~", &mut bad.c_tilde) } else { ("D~", &mut bad.d_tilde) };
            let (i, j) = (rng.gen_range(0..x.rows()), rng.gen_range(0..x.cols()));
            let v = if x.get(i, j).is_zero() { 1 } else { 0 };
            x.set(i, j, v);
            format!("flip {name}({i},{j})")
        }
        2 => {
            let (phi, firsts, seconds) = if rng.gen_bool(0.5) {
                (&mut bad.phi_a, &cert.e_c, &cert.e_d)
            } else {
                (&mut bad.phi_b, &cert.e_d, &cert.e_c)
            };
            let i = rng.gen_range(0..phi.len());
            let old = (phi[i].first.clone(), phi[i].second.clone());
            loop {
                let first = firsts[rng.gen_range(0..firsts.len())].clone();
                let second = seconds[rng.gen_range(0..seconds.len())].clone();
                if (&first, &second) != (&old.0, &old.1) {
                    phi[i].first = first;
                    phi[i].second = second;
                    break;
                }
            }
            format!("remap {} to ({}, {})", phi[i].edge, phi[i].first, phi[i].second)
        }
        _ => {
            let (i, j) = (rng.gen_range(0..bad.z.rows()), rng.gen_range(0..bad.z.cols()));
            let old = bad.z.get(i, j).clone();
            let new = loop {
                let v = BigInt::from(rng.gen_range(0..=3));
                if v != old {
                    break v;
                }
            };
            bad.z.set(i, j, new.clone());
            format!("alter Z({i},{j}) {old} -> {new}")
        }
    };
    (label, bad)
}

fn mutation_sensitivity() -> Outcome {
    let (a, b, c, d) = standard_factors();
    let cert = build_certificate(&a, &b, &c, &d).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut kinds = std::collections::BTreeMap::new();
    for _ in 0..20 {
        let (label, bad) = corrupt(&mut rng, &cert);
        let failed = verify_certificate(&bad).failed_names();
        ensure(!failed.is_empty(), || format!("{label} passed every check"))?;
        *kinds.entry(label.split(' ').next().unwrap_or_default().to_string()).or_insert(0) += 1;
    }
    Ok(format!("20/20 corruptions caught, by kind {kinds:?}"))
}

fn log_bracket(a: &Matrix, what: &str) -> Result<Duration, String> {
    let tol = BigRational::new(1.into(), BigInt::from(10u64.pow(9)));
    let (iv, elapsed) = timed(|| entropy(a, &tol));
    let iv = iv.map_err(|e| e.to_string())?;
    ensure(iv.width() <= tol, || format!("{what}: width {}", iv.width()))?;
    ensure(brackets_log_radius(a, &iv.lo, &iv.hi), || format!("{what}: [{}, {}] misses the log radius", iv.lo, iv.hi))?;
    ensure(elapsed < Duration::from_secs(1), || format!("{what}: took {elapsed:?}"))?;
    Ok(elapsed)
}

fn invariant_numerics() -> Outcome {
    let t2 = log_bracket(&m(&[&[2]]), "entropy([2])")?;
    let tg = log_bracket(&m(&[&[1, 1], &[1, 0]]), "entropy(golden mean)")?;
    let (bf, tb) = timed(|| bowen_franks(&m(&[&[1, 2], &[2, 1]])));
    let bf = bf.map_err(|e| e.to_string())?;
    ensure(bf == vec![BigInt::from(2), BigInt::from(2)], || format!("bowen_franks = {bf:?}"))?;
    ensure(tb < Duration::from_secs(1), || format!("bowen_franks took {tb:?}"))?;
    Ok(format!("log 2 in {t2:.2?}, log golden ratio in {tg:.2?}, Bowen-Franks [2, 2]"))
}

#[test]
fn acceptance() {
    let witnesses = random_witnesses();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("standard example end to end", Box::new(standard_example)),
        ("certificate round trip at scale", Box::new(|| round_trip_at_scale(&witnesses))),
        ("invariance under elementary equivalence", Box::new(|| invariance(&witnesses))),
        ("solver agrees with full enumeration", Box::new(solver_vs_enumeration)),
        ("normal forms agree with the path action", Box::new(oracle_equivalence)),
        ("mutation sensitivity", Box::new(mutation_sensitivity)),
        ("invariant numerics", Box::new(invariant_numerics)),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(why) => {
                println!("criterion {} [{name}]: FAIL ({why})", i + 1);
                failures.push(i + 1);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
