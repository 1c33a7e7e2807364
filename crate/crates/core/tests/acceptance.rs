//! End-to-end acceptance criteria, one `PASS`/`FAIL` line each. Runs
//! without the libtest harness so the lines show up in plain `cargo test`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use ggs_core::beauville::{
    certify_not_beauville, level_persistence, recheck_certificate, search_beauville_structure,
    verify_standard_structure, CheckOptions, PairStatus, SearchOutcome, Verdict,
};
use ggs_core::ggs::{ClassE, DefiningVector, OrderMode, ScanConfig};
use ggs_core::group::FiniteQuotient;
use ggs_core::pcgs::{frattini_rank, LevelPcgs};
use ggs_core::properties::{branching_equality, odd_branching_hypotheses, order_checks, run_suite, Suite};
use ggs_core::sweep::{flag_counts, sweep, FlagCounts, SweepOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ENUM_CAP: usize = 10_000_000;
/// Orders and subgroup comparisons are exact.
const ORDER_TOLERANCE: u64 = 0;
const SEED: u64 = 20_241_015;

const A1_BUDGET: Duration = Duration::from_secs(1);
const A2_BUDGET: Duration = Duration::from_secs(120);
const A3_BUDGET: Duration = Duration::from_secs(600);
const A4_BUDGET: Duration = Duration::from_secs(300);
const A5_BUDGET: Duration = Duration::from_secs(300);
const A6_BUDGET: Duration = Duration::from_secs(300);
const A7_BUDGET: Duration = Duration::from_secs(600);
const A8_BUDGET: Duration = Duration::from_secs(600);

/// `m_G` for `e = (1,0,1)`, pinned after the first verified scan.
const M_G_101: u32 = 6;
/// A8 runs at the deepest level whose three ranks finish inside the budget.
const A8_LEVEL: u32 = 5;
/// Sweep flags for `p = 2, n = 2`, pinned after the first verified run.
const SWEEP_FLAGS: FlagCounts = FlagCounts {
    rows: 63,
    infinite: 60,
    periodic: 7,
    infinite_periodic: 4,
    class_e_i: 2,
    class_e_ii: 1,
};

fn v(s: &str) -> DefiningVector {
    s.parse().unwrap()
}

fn report(id: &str, passed: bool, started: Instant, budget: Option<Duration>, detail: &str) {
    let elapsed = started.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let ok = passed && in_time;
    println!(
        "{id} {} ({:.2?}{}) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        budget.map(|b| format!(" of {b:?}")).unwrap_or_default()
    );
    assert!(passed, "{id}: {detail}");
    assert!(in_time, "{id}: over budget");
}

fn a1_classification_fixtures() {
    let t = Instant::now();
    let g = v("p=2 n=2 e=1,0,1");
    let f = v("p=2 n=2 e=2,0,2");
    let h = v("p=2 n=2 e=2,0,0");
    let np = v("p=2 n=2 e=1,0,0");
    let ok = g.is_infinite()
        && g.is_periodic()
        && g.class_e() == ClassE::None
        && !f.is_infinite()
        && f.is_periodic()
        && f.class_e() == ClassE::II
        && !h.is_infinite()
        && h.class_e() == ClassE::I
        && !np.is_periodic();
    report("A1", ok, t, Some(A1_BUDGET), "four classification fixtures");
}

/// Periodic vectors for `(3, 2)` drawn with a fixed seed.
fn sampled_periodic(count: usize) -> Vec<DefiningVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = BTreeSet::new();
    while out.len() < count {
        let e: Vec<u32> = (0..8).map(|_| rng.gen_range(0..9)).collect();
        if let Ok(x) = DefiningVector::new(3, 2, e) {
            if x.is_periodic() {
                out.insert(x.to_string());
            }
        }
    }
    out.into_iter().map(|s| v(&s)).collect()
}

fn a2_order_formula_against_oracle() {
    let t = Instant::now();
    let fixture = g_fixture();
    let mut vectors: Vec<DefiningVector> = DefiningVector::all(2, 2)
        .unwrap()
        .into_iter()
        .filter(|x| x.is_periodic())
        .collect();
    vectors.extend(sampled_periodic(20));
    let mut total = 0;
    let mut bad = Vec::new();
    for x in &vectors {
        for c in order_checks(x, 0).unwrap() {
            total += 1;
            if !c.passed {
                bad.push(format!("{x}: {} {}", c.name, c.detail));
            }
        }
    }
    report(
        "A2",
        fixture && bad.is_empty(),
        t,
        Some(A2_BUDGET),
        &format!(
            "{total} comparisons over {} vectors, tolerance {ORDER_TOLERANCE}, mismatches {bad:?}",
            vectors.len()
        ),
    );
}

fn g_fixture() -> bool {
    let g = v("p=2 n=2 e=1,0,1");
    let c = g.order_of(0, 0, 1, 1, 4, OrderMode::Both).unwrap();
    c.formula == Some(32) && c.oracle == Some(32)
}

fn a3_infinite_group_structure() {
    let t = Instant::now();
    let g = v("p=2 n=2 e=1,0,1");
    let opts = CheckOptions::default();
    let m_g = g.lambda_prime(ScanConfig::default()).unwrap().m_g;
    let (r, c) = verify_standard_structure(&g, None, &opts, false).unwrap();
    let pairs_ok = r.pairs.len() == 9 && r.pairs.iter().all(|p| p.status == PairStatus::Disjoint);
    let c_ok = c.case == 2 && c.pattern.level == 2 && c.pattern.target.to_string() == "[a, b, a^2]";
    let persist = level_persistence(&g, m_g, &opts).unwrap();
    let ok = m_g == M_G_101
        && r.depth == m_g
        && c_ok
        && r.generates == vec![true, true]
        && pairs_ok
        && r.verdict == Verdict::Beauville
        && persist.holds;
    report(
        "A3",
        ok,
        t,
        Some(A3_BUDGET),
        &format!(
            "m_G = {m_g}, verdict {}, persistence {} (orders {:?} -> {:?})",
            r.verdict, persist.holds, persist.orders_k0, persist.orders_k1
        ),
    );
}

fn a3_stretch_odd_prime() {
    // non-blocking: the line is printed, failures do not fail the suite
    let t = Instant::now();
    let g = v("p=3 n=2 e=1,0,0,2,0,0,0,0");
    let outcome = verify_standard_structure(&g, None, &CheckOptions::default(), false);
    let (ok, detail) = match &outcome {
        Ok((r, c)) => (
            r.verdict == Verdict::Beauville && c.case == 2,
            format!("k = {}, verdict {}", r.depth, r.verdict),
        ),
        Err(e) => (false, e.to_string()),
    };
    println!(
        "A3-stretch {} ({:.2?}) {detail}",
        if ok { "PASS" } else { "FAIL" },
        t.elapsed()
    );
}

fn a4_second_class_e_variant() {
    let t = Instant::now();
    let g = v("p=2 n=2 e=2,0,2");
    let opts = CheckOptions::default();
    let stab = run_suite(Suite::Stab, &g, None, ENUM_CAP).unwrap();
    let mut certified = Vec::new();
    for k in 1..=4 {
        let mut q = FiniteQuotient::new(&g, k).unwrap();
        let r = certify_not_beauville(&mut q, &opts).unwrap();
        certified.push(r.verdict == Verdict::NotBeauvilleCertified && recheck_certificate(&r, &opts).unwrap());
    }
    let mut q2 = FiniteQuotient::new(&g, 2).unwrap();
    let search = search_beauville_structure(&mut q2, 10_000).unwrap();
    let exhausted = matches!(search, SearchOutcome::Exhausted { .. });
    report(
        "A4",
        stab.passed() && certified.iter().all(|&c| c) && exhausted,
        t,
        Some(A4_BUDGET),
        &format!("stabilizers {}, certified k=1..4 {certified:?}, search k=2 {search:?}", stab.passed()),
    );
}

fn a5_first_class_e_variant() {
    let t = Instant::now();
    let g = v("p=2 n=2 e=2,0,0");
    let opts = CheckOptions::default();
    let log_order = |k: u32| {
        LevelPcgs::subgroup(g.shape(k).unwrap(), &[g.generator_a(k).unwrap(), g.generator_b(k).unwrap()]).log_order()
    };
    // the tower is stable once two consecutive steps add nothing
    let mut top = 1;
    while !(log_order(top) == log_order(top + 1) && log_order(top) == log_order(top + 2)) {
        top += 1;
    }
    let mut certified = Vec::new();
    for k in 1..=top {
        let mut q = FiniteQuotient::new(&g, k).unwrap();
        let r = certify_not_beauville(&mut q, &opts).unwrap();
        certified.push(r.verdict == Verdict::NotBeauvilleCertified && recheck_certificate(&r, &opts).unwrap());
    }
    report(
        "A5",
        certified.iter().all(|&c| c),
        t,
        Some(A5_BUDGET),
        &format!("tower stable from k = {top}, certified {certified:?}"),
    );
}

fn a6_structure_suites() {
    let t = Instant::now();
    let g = v("p=2 n=2 e=2,0,2");
    let full = {
        let o = |k| {
            let mut q = FiniteQuotient::new(&g, k).unwrap();
            q.enumerate(ENUM_CAP).unwrap()
        };
        o(4) == o(5)
    };
    let mut lines = Vec::new();
    let mut ok = full;
    for suite in [Suite::Nilpotent, Suite::Series, Suite::Allconj] {
        let r = run_suite(suite, &g, Some(4), ENUM_CAP).unwrap();
        ok &= r.passed();
        lines.push(format!("{suite}: {}/{}", r.checks.iter().filter(|c| c.passed).count(), r.checks.len()));
    }
    report("A6", ok, t, Some(A6_BUDGET), &format!("G = G_4: {full}; {}", lines.join(", ")));
}

fn a7_branching_and_fractality() {
    let t = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for s in ["p=2 n=2 e=1,0,1", "p=2 n=2 e=2,0,2"] {
        let r = run_suite(Suite::Fractal, &v(s), Some(4), ENUM_CAP).unwrap();
        ok &= r.passed();
        lines.push(format!("fractal {s}: {} vertices", r.checks.len()));
    }
    for (s, alpha, r, depths) in [
        ("p=2 n=2 e=1,0,1", 0, 0, 3..=4),
        ("p=2 n=2 e=2,0,2", 0, 1, 3..=4),
    ] {
        for k in depths {
            let (eq, lhs, _) = branching_equality(&v(s), alpha, r, k).unwrap();
            ok &= eq;
            lines.push(format!("branching {s} k={k}: {eq} (log order {lhs})"));
        }
    }
    for (s, k) in [("p=3 n=1 e=1,2", 4), ("p=3 n=2 e=1,1,1,1,1,1,1,2", 3)] {
        let odd = v(s);
        ok &= odd_branching_hypotheses(&odd, 0);
        let (eq, lhs, _) = branching_equality(&odd, 0, 0, k).unwrap();
        ok &= eq;
        lines.push(format!("odd branching {odd} k={k}: {eq} (log order {lhs})"));
    }
    report("A7", ok, t, Some(A7_BUDGET), &lines.join("; "));
}

fn a8_maximal_subgroup_ranks() {
    let t = Instant::now();
    let g = v("p=2 n=2 e=1,0,1");
    let k = A8_LEVEL;
    let a = g.generator_a(k).unwrap();
    let b = g.generator_b(k).unwrap();
    let ab = a.compose(&b).unwrap();
    let maximal = [
        vec![a.clone(), ab.pow(2), b.pow(2)],
        vec![a.pow(2), b.clone(), ab.pow(2)],
        vec![a.pow(2), b.pow(2), ab],
    ];
    let shape = g.shape(k).unwrap();
    let ranks: Vec<u64> = maximal.iter().map(|m| frattini_rank(shape, m)).collect();
    report(
        "A8",
        ranks == vec![3, 3, 3],
        t,
        Some(A8_BUDGET),
        &format!("k = {k}, ranks {ranks:?}"),
    );
}

fn sweep_options() -> SweepOptions {
    SweepOptions {
        levels: vec![2],
        ..SweepOptions::default()
    }
}

fn sweep_json(threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let rows = pool.install(|| sweep(2, 2, &sweep_options()).unwrap());
    serde_json::to_string(&serde_json::to_value(&rows).unwrap()).unwrap()
}

fn a9_sweep_regression() {
    let t = Instant::now();
    let rows = sweep(2, 2, &sweep_options()).unwrap();
    let counts = flag_counts(&rows);
    let one = sweep_json(1);
    let identical = one == sweep_json(4) && one == sweep_json(1);
    report(
        "A9",
        rows.len() == 63 && counts == SWEEP_FLAGS && identical,
        t,
        None,
        &format!("{} rows, {counts:?}, identical across runs and threads: {identical}", rows.len()),
    );
}

fn a10_certificate_against_search() {
    let t = Instant::now();
    let opts = CheckOptions::default();
    let mut compared = 0;
    let mut disagreements = Vec::new();
    let mut unresolved = 0;
    for x in DefiningVector::all(2, 2).unwrap() {
        for k in 1..=3 {
            let mut q = FiniteQuotient::new(&x, k).unwrap();
            if q.enumerate(10_000).is_err() {
                continue;
            }
            let cert = certify_not_beauville(&mut q, &opts).unwrap();
            let search = search_beauville_structure(&mut q, 10_000).unwrap();
            compared += 1;
            let certified = cert.verdict == Verdict::NotBeauvilleCertified;
            let found = matches!(search, SearchOutcome::Structure { .. });
            if certified && found {
                disagreements.push(format!("{x} k={k}"));
            }
            if !certified && !found {
                unresolved += 1;
            }
        }
    }
    report(
        "A10",
        disagreements.is_empty() && compared > 0,
        t,
        None,
        &format!(
            "{compared} quotients of order <= 10^4 compared, {} disagreements, {unresolved} not certified yet exhausted",
            disagreements.len()
        ),
    );
}

fn main() {
    let criteria: [(&str, fn()); 10] = [
        ("A1", a1_classification_fixtures),
        ("A2", a2_order_formula_against_oracle),
        ("A3", a3_infinite_group_structure),
        ("A4", a4_second_class_e_variant),
        ("A5", a5_first_class_e_variant),
        ("A6", a6_structure_suites),
        ("A7", a7_branching_and_fractality),
        ("A8", a8_maximal_subgroup_ranks),
        ("A9", a9_sweep_regression),
        ("A10", a10_certificate_against_search),
    ];
    // failing criteria print their own line; keep the panic text short
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let failed: Vec<&str> = criteria
        .iter()
        .filter(|(_, f)| std::panic::catch_unwind(f).is_err())
        .map(|(id, _)| *id)
        .collect();
    let _ = std::panic::catch_unwind(a3_stretch_odd_prime);
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failing {failed:?}");
        std::process::exit(1);
    }
}
