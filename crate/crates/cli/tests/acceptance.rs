//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cyclofree::kfree::{
    density_estimate, hereditary_check, is_admissible, pointwise_box, sieve_box_with, AdmissibilityChecker,
    PatchShape, SieveOptions,
};
use cyclofree::prime_ideals::{split_prime, IdealCache};
use cyclofree::symmetries::{aq_search, generator_elements, vanishing_four_sums, verify_lemma_factors, verify_on_box};
use cyclofree::zeta::{dedekind_zeta_with, entropy_constant};
use cyclofree::{arith, CyclotomicRing, Execution, KFreeBox};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed <= limit, || {
        format!("{what} took {:.1}s, target {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64())
    })
}

fn sieve(n: u64, k: u32, r: u64, exec: Execution) -> KFreeBox {
    let opts = SieveOptions {
        exec,
        ..SieveOptions::default()
    };
    sieve_box_with(n, k, r, &opts).expect("sieve")
}

/// `L(2, χ)` for the odd real character of conductor `q ∈ {3, 4}`, summed in
/// pairs `1/(qj+1)² - 1/(qj+q-1)²` with an Euler–Maclaurin tail.
fn l2_odd_character(q: u64) -> f64 {
    let t = |x: f64| 1.0 / (q as f64 * x + 1.0).powi(2) - 1.0 / (q as f64 * x + q as f64 - 1.0).powi(2);
    let n = 200_000u64;
    let nf = n as f64;
    let integral = (1.0 / (q as f64 * nf + 1.0) - 1.0 / (q as f64 * nf + q as f64 - 1.0)) / q as f64;
    let mut sum = integral + t(nf) / 2.0;
    for j in (0..n).rev() {
        sum += t(j as f64);
    }
    sum
}

/// `ζ_K(2) = ζ(2)·L(2, χ)` for the imaginary quadratic fields `Q(i)` and `Q(√-3)`.
fn quadratic_zeta2(n: u64) -> f64 {
    let q = if n == 4 { 4 } else { 3 };
    std::f64::consts::PI.powi(2) / 6.0 * l2_odd_character(q)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut notes = Vec::new();
    for n in [4u64, 3] {
        let z = dedekind_zeta_with(n, 2, 1_000_000, Execution::Sequential).map_err(|e| e.to_string())?;
        let oracle = quadratic_zeta2(n);
        let slack = 1e-12;
        ensure(z.zeta.lo <= oracle + slack && oracle - slack <= z.zeta.hi, || {
            format!("n={n}: oracle {oracle} outside [{}, {}]", z.zeta.lo, z.zeta.hi)
        })?;
        let b = sieve(n, 2, 300, Execution::Sequential);
        let rep = density_estimate(&b, 1_000_000).map_err(|e| e.to_string())?;
        ensure(rep.relative_gap <= 0.02, || format!("n={n}: relative gap {}", rep.relative_gap))?;
        notes.push(format!(
            "n={n} empirical {:.6} vs {:.6} (gap {:.4}%)",
            rep.empirical_density_approx,
            rep.reference_density.mid(),
            100.0 * rep.relative_gap
        ));
    }
    within(started.elapsed(), Duration::from_secs(60), "single-threaded run")?;
    Ok(notes.join("; "))
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let b = sieve(5, 2, 12, Execution::Parallel);
    let rep = density_estimate(&b, 1_000_000).map_err(|e| e.to_string())?;
    ensure(b.volume() == 25usize.pow(4), || format!("box volume {}", b.volume()))?;
    ensure(rep.relative_gap <= 0.05, || format!("relative gap {}", rep.relative_gap))?;
    within(started.elapsed(), Duration::from_secs(600), "run")?;
    Ok(format!(
        "{} points, empirical {:.6} vs {:.6} (gap {:.3}%)",
        b.volume(),
        rep.empirical_density_approx,
        rep.reference_density.mid(),
        100.0 * rep.relative_gap
    ))
}

fn criterion_3() -> Outcome {
    let mut total = 0usize;
    for n in [3u64, 4, 5, 8, 12] {
        for k in [2u32, 3] {
            let fast = sieve(n, k, 5, Execution::Parallel);
            let slow = pointwise_box(n, k, 5, Execution::Parallel).map_err(|e| e.to_string())?;
            let diff = fast.flags().iter().zip(slow.flags()).filter(|(a, b)| a != b).count();
            ensure(diff == 0, || format!("n={n} k={k}: {diff} discrepancies"))?;
            total += fast.volume();
        }
    }
    Ok(format!("{total} points compared, 0 discrepancies"))
}

fn criterion_4() -> Outcome {
    let mut lattices = 0usize;
    for n in [3u64, 4, 5, 7, 8, 9, 12, 15, 16] {
        let phi = (1..=n).filter(|&a| arith::gcd(a, n) == 1).count() as u64;
        let cache = IdealCache::new(CyclotomicRing::new(n).map_err(|e| e.to_string())?);
        for ell in (2..=1000u64).filter(|&l| (2..l).take_while(|p| p * p <= l).all(|p| l % p != 0)) {
            let ideals = split_prime(ell, n).map_err(|e| e.to_string())?;
            let ef: u64 = ideals.iter().map(|p| u64::from(p.e) * u64::from(p.f)).sum();
            ensure(ef == phi, || format!("n={n} ell={ell}: sum e*f = {ef}, phi = {phi}"))?;
            let ramified = ideals.iter().any(|p| p.is_ramified());
            ensure(ramified == (n % ell == 0), || format!("n={n} ell={ell}: ramified = {ramified}"))?;
            for p in &ideals {
                for m in 1..=3u32 {
                    let lat = cache.lattice(p, m).map_err(|e| e.to_string())?;
                    ensure(*lat.index() == p.norm_big().pow(m), || {
                        format!("n={n} ell={ell} m={m}: index {} vs N^m", lat.index())
                    })?;
                    lattices += 1;
                }
            }
        }
    }
    Ok(format!("9 conductors x 168 primes, {lattices} ideal-power indices checked"))
}

fn criterion_5() -> Outcome {
    let mut checked = 0usize;
    let mut pairs = 0usize;
    for n in [3u64, 4, 5, 8, 12] {
        let gens = generator_elements(n).map_err(|e| e.to_string())?;
        let r = if CyclotomicRing::new(n).map_err(|e| e.to_string())?.degree() == 2 { 30 } else { 6 };
        for k in [2u32, 3] {
            let b = sieve(n, k, r, Execution::Parallel);
            for s in &gens {
                let rep = verify_on_box(s, &b, 1000, 0, Execution::Parallel).map_err(|e| e.to_string())?;
                ensure(rep.checked == 1000, || format!("n={n} k={k}: only {} points", rep.checked))?;
                ensure(rep.passed(), || {
                    format!("n={n} k={k} {:?}: {} failures", s.describe(), rep.failures.len())
                })?;
                checked += 2 * rep.checked;
            }
        }
        let identity = cyclofree::SymmetryElement::identity(n).map_err(|e| e.to_string())?;
        for s in &gens {
            let det = s.determinant().to_string();
            ensure(det == "1" || det == "-1", || format!("n={n}: det {det}"))?;
            let inv = s.inverse().map_err(|e| e.to_string())?;
            ensure(s.compose(&inv).map_err(|e| e.to_string())? == identity, || {
                format!("n={n}: s * s^-1 is not the identity")
            })?;
            for t in &gens {
                let st = s.compose(t).map_err(|e| e.to_string())?;
                ensure(st.matrix() == s.matrix_product(t).map_err(|e| e.to_string())?, || {
                    format!("n={n}: group law fails for {:?}, {:?}", s.describe(), t.describe())
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{checked} images k-free, {pairs} generator pairs obey the group law"))
}

fn criterion_6() -> Outcome {
    let b = sieve(4, 2, 50, Execution::Parallel);
    let rep = hereditary_check(&b, 100, 0, Execution::Parallel).map_err(|e| e.to_string())?;
    ensure(rep.full_window_admissible, || "full window not admissible".into())?;
    ensure(rep.failed_trials.is_empty(), || format!("failed subsets {:?}", rep.failed_trials))?;

    let checker = AdmissibilityChecker::new(4, 2, 21 * 21).map_err(|e| e.to_string())?;
    let mut windows = 0;
    for cx in (-40i64..=40).step_by(20) {
        for cy in (-40i64..=40).step_by(20) {
            let window: Vec<Vec<i64>> = b
                .points()
                .filter(|p| (p[0] - cx).abs() <= 10 && (p[1] - cy).abs() <= 10)
                .collect();
            let ok = checker.check(&window).map_err(|e| e.to_string())?.admissible;
            ensure(ok, || format!("window at ({cx},{cy}) not admissible"))?;
            windows += 1;
        }
    }

    let cover: Vec<Vec<i64>> = (0..4).flat_map(|x| (0..4).map(move |y| vec![x, y])).collect();
    let cover_rep = AdmissibilityChecker::new(4, 2, cover.len())
        .and_then(|c| c.check(&cover))
        .map_err(|e| e.to_string())?;
    ensure(!cover_rep.admissible, || "full coset cover reported admissible".into())?;
    let witness = cover_rep.witness.as_ref().map(|p| p.ell);
    ensure(witness == Some(2), || format!("witness above {witness:?}, expected 2"))?;
    ensure(!is_admissible(&cover[..2 * 4], 4, 2).map_err(|e| e.to_string())?, || "2x4 block admissible".into())?;
    Ok(format!(
        "{} window points + {windows} sub-windows admissible, 100/100 random subsets admissible, 4x4 cover rejected",
        rep.window_points
    ))
}

fn criterion_7() -> Outcome {
    let ln2 = std::f64::consts::LN_2;
    let mut notes = Vec::new();
    for n in [3u64, 4, 5] {
        let es: Vec<_> = (2..=4)
            .map(|k| entropy_constant(n, k, 100_000))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (i, e) in es.iter().enumerate() {
            ensure(e.hi < ln2, || format!("n={n} k={}: upper {} not below log 2", i + 2, e.hi))?;
        }
        for w in es.windows(2) {
            ensure(w[0].strictly_below(&w[1]), || format!("n={n}: {:?} not below {:?}", w[0], w[1]))?;
        }
    }
    let b = sieve(4, 2, 300, Execution::Parallel);
    let shape = PatchShape::block(2, 2).map_err(|e| e.to_string())?;
    let est = cyclofree::kfree::extract_patches_with(&b, &shape, Execution::Parallel)
        .map_err(|e| e.to_string())?
        .entropy_estimate();
    let density = b.count() as f64 / b.volume() as f64;
    let lower = ln2 * density - 0.05;
    ensure(lower <= est && est <= ln2, || format!("estimate {est} outside [{lower}, {ln2}]"))?;
    notes.push(format!("entropy constants < log 2 and increasing in k for n=3,4,5; 2x2 estimate {est:.4} in [{lower:.4}, {ln2:.4}]"));
    Ok(notes.join("; "))
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let c = aq_search(12, 13, 10_000, 1_000_000, Execution::Parallel).map_err(|e| e.to_string())?;
    for (m, j) in [(3u64, 1u64), (4, 1), (12, 5)] {
        let rep = verify_lemma_factors(&c, m, j).map_err(|e| e.to_string())?;
        ensure(rep.passed(), || format!("lemma (m={m}, j={j}) failed: {rep:?}"))?;
    }
    within(started.elapsed(), Duration::from_secs(300), "run")?;
    Ok(format!("a_13 = {} for n=12, lemma holds at (3,1), (4,1), (12,5)", c.a()))
}

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    for set in [&[-1i64, 1][..], &[-2, -1, 1, 2][..]] {
        let mut survivors = 0usize;
        let mut orders = HashSet::new();
        for n in 1..=60u64 {
            let rep = vanishing_four_sums(n, set).map_err(|e| e.to_string())?;
            ensure(rep.violations.is_empty(), || format!("n={n} {set:?}: {:?}", rep.violations))?;
            survivors += rep.survivors.len();
            orders.extend(rep.survivors.iter().map(|s| s.reduced_order));
        }
        let mut orders: Vec<_> = orders.into_iter().collect();
        orders.sort_unstable();
        notes.push(format!("{set:?}: {survivors} survivors, reduced orders {orders:?}"));
    }
    Ok(format!("n <= 60, 0 violations; {}", notes.join("; ")))
}

fn run_cli(args: &[String], threads: usize) -> Result<(String, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cyclofree"))
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("{args:?}: unparsable stdout ({e}); stderr {}", String::from_utf8_lossy(&out.stderr)))?;
    let digest = doc["manifest"]["output_digest"]
        .as_str()
        .ok_or_else(|| format!("{args:?}: no digest"))?
        .to_string();
    Ok((digest, code))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let patch = dir.path().join("patch.json");
    std::fs::write(&patch, r#"{"n":4,"k":2,"shape":[[0,0],[0,1],[1,0],[1,1]],"fill":"1101"}"#)
        .map_err(|e| e.to_string())?;
    let path = |p: &Path| p.display().to_string();
    let commands: Vec<Vec<String>> = [
        vec!["sieve", "--n", "4", "--k", "2", "--radius", "40", "--out", &path(&dir.path().join("pts.csv"))],
        vec!["sieve", "--n", "5", "--k", "2", "--radius", "4", "--format", "json", "--out", &path(&dir.path().join("pts.json"))],
        vec!["zeta", "--n", "5", "--k", "2", "--prime-bound", "200000"],
        vec!["density", "--n", "3", "--k", "3", "--radius", "60", "--prime-bound", "100000"],
        vec!["entropy", "--n", "8", "--k", "2", "--prime-bound", "100000"],
        vec!["admissible", "--in", &path(&patch)],
        vec!["symcheck", "--n", "5", "--k", "2", "--radius", "5", "--samples", "300", "--seed", "7"],
        vec!["aq", "--n", "12", "--q", "13", "--ell-bound", "10000", "--a-bound", "1000000", "--lemma", "3,1"],
        vec!["patches", "--n", "4", "--k", "2", "--radius", "60"],
    ]
    .iter()
    .map(|c| c.iter().map(|s| s.to_string()).collect())
    .collect();
    for args in &commands {
        let runs = [1usize, 2, 4]
            .iter()
            .map(|&t| run_cli(args, t))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(runs.iter().all(|(_, code)| *code == 0), || format!("{args:?}: exit codes {runs:?}"))?;
        ensure(runs.windows(2).all(|w| w[0].0 == w[1].0), || format!("{args:?}: digests differ {runs:?}"))?;
    }
    Ok(format!("{} commands x threads 1, 2, 4: identical digests", commands.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("density vs zeta, n=4 and n=3, k=2, radius 300", criterion_1),
        ("higher degree density, n=5, k=2, radius 12", criterion_2),
        ("sieve equals pointwise k-freeness, radius 5", criterion_3),
        ("splitting sanity, primes <= 1000", criterion_4),
        ("stabiliser action and group law", criterion_5),
        ("admissibility and heredity, n=4, k=2, radius 50", criterion_6),
        ("entropy constants and patch-entropy bracket", criterion_7),
        ("a_q search and factor lemma, n=12, q=13", criterion_8),
        ("four-term vanishing sums, n <= 60", criterion_9),
        ("CLI determinism across thread counts", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
