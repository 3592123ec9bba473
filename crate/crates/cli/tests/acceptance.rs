//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qset_core::arith::{gcd, is_primitive_root, primes_up_to};
use qset_core::constructions::{contains_3ap, empirical_lower_density, greedy_no3ap_set, zero_density_dense_set, ThresholdSet};
use qset_core::families::{
    self, enumerate_power_sums, lift_three_cubes_mod3, lift_two_cubes_mod7, lift_two_squares, FamilySpec,
};
use qset_core::lucas::{self, lucas_term, period_mod, vp_first_kind, LucasKind, LucasParams};
use qset_core::padic::{vp_int, Valuation};
use qset_core::pairs::{self, Pattern};
use qset_core::verdict::{CrossCheck, DensityStatus, OracleConfig};
use qset_core::Rational;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn line(id: u32, pass: bool, detail: impl Into<String>) -> Line {
    Line {
        id,
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn criterion_1() -> Line {
    let expected = "p\tq\tp≺q\tq≺p\tp≺q²\tq≺p²\n\
                    3\t5\tT\tT\tT\tT\n\
                    5\t7\tT\tT\tT\tF\n\
                    3\t7\tT\tF\tT\tF\n\
                    5\t11\tF\tF\tF\tF\n\
                    7\t19\tF\tT\tF\tF\n";
    let t = Instant::now();
    let out = qset_cli::run(["qset", "pairs", "table", "--pairs", "3:5,5:7,3:7,5:11,7:19"]);
    let dt = t.elapsed();
    let ok = out.code == 0 && out.stdout == expected && dt < Duration::from_secs(1);
    line(1, ok, format!("pairs table matrix {} in {}", if out.stdout == expected { "exact" } else { "DIFFERS" }, secs(dt)))
}

fn criterion_2() -> Line {
    let pr = |g: i128, m: u64| is_primitive_root(g, m).expect("valid modulus");
    let checks = [
        ("14 < 29", pr(14, 29), true),
        ("14 < 29^2", pr(14, 29 * 29), false),
        ("18 < 37", pr(18, 37), true),
        ("18 < 37^2", pr(18, 37 * 37), false),
        ("5 < 7^2", pr(5, 49), true),
        ("7 < 5^2", pr(7, 25), false),
    ];
    let bad: Vec<&str> = checks.iter().filter(|c| c.1 != c.2).map(|c| c.0).collect();
    line(2, bad.is_empty(), if bad.is_empty() { "all six booleans exact".to_string() } else { format!("wrong: {bad:?}") })
}

fn criterion_3() -> Line {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let primes = [2u64, 3, 5, 7, 11, 13];
    let mut params = Vec::new();
    while params.len() < 24 {
        let (r, s) = (rng.gen_range(-10i64..=10), rng.gen_range(-10i64..=10));
        if let Ok(p) = LucasParams::new(r, s) {
            if !params.iter().any(|q: &LucasParams| q.r() == r && q.s() == s) {
                params.push(p);
            }
        }
    }
    let (mut compared, mut mismatches) = (0u64, Vec::new());
    for &params in &params {
        let exact: Vec<_> = (0..=300).map(|n| lucas_term(params, LucasKind::First, n)).collect();
        for &p in primes.iter().filter(|&&p| params.s() % p as i64 != 0) {
            for n in 1..=300u64 {
                let want = vp_int(&exact[n as usize], p).expect("prime");
                let got = vp_first_kind(params, p, n).expect("hypotheses hold");
                compared += 1;
                if want != got {
                    mismatches.push((params.r(), params.s(), p, n));
                }
            }
        }
    }
    let dt = t.elapsed();
    line(
        3,
        mismatches.is_empty() && dt < Duration::from_secs(30),
        format!("{} params, {compared} comparisons, {} mismatches in {}", params.len(), mismatches.len(), secs(dt)),
    )
}

#[derive(Default)]
struct Tally {
    cells: u32,
    dense: u32,
    not_dense: u32,
    undecided: u32,
    failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, name: String, check: qset_core::Result<CrossCheck>) {
        self.cells += 1;
        match check {
            Ok(c) => {
                match c.verdict.status() {
                    DensityStatus::Dense => self.dense += 1,
                    DensityStatus::NotDense => self.not_dense += 1,
                    DensityStatus::UndecidedByTheory => self.undecided += 1,
                }
                if !c.consistent() {
                    self.failures.push(name);
                }
            }
            Err(e) => self.failures.push(format!("{name}: {e}")),
        }
    }
}

fn criterion_4() -> Line {
    let t = Instant::now();
    let config = OracleConfig::default();
    // cube sums are sparse; at p = 13 the grid needs values up to 10^5
    let cube_config = OracleConfig {
        bound: 100_000,
        ..config.clone()
    };
    let mut tally = Tally::default();
    for m in 1..=4 {
        for p in [2u64, 3, 5, 7, 13] {
            let s = FamilySpec::SumOfSquares { m };
            tally.record(format!("{} p={p}", s.label()), families::cross_check(s, p, &config));
            let c = FamilySpec::SumOfCubes { m };
            tally.record(format!("{} p={p}", c.label()), families::cross_check(c, p, &cube_config));
        }
    }
    let aps: [(u64, i64); 8] = [(1, 0), (1, 1), (2, 1), (3, 1), (4, 3), (6, 3), (10, 5), (9, 6)];
    for (a, b) in aps {
        for p in [2u64, 3, 5, 7] {
            let s = FamilySpec::ArithmeticProgression { a, b };
            tally.record(format!("{} p={p}", s.label()), families::cross_check(s, p, &config));
        }
    }
    for p in primes_up_to(19).into_iter().filter(|&p| p > 2) {
        for b in 2..p * p {
            if gcd(b, p) != 1 {
                continue;
            }
            let s = FamilySpec::PrimePowerUnion { p, b };
            tally.record(format!("{} p={p}", s.label()), families::cross_check(s, p, &config));
        }
    }
    let fib = LucasParams::fibonacci();
    for p in primes_up_to(13) {
        for kind in [LucasKind::First, LucasKind::Second] {
            tally.record(format!("{kind:?}(1,1) p={p}"), lucas::cross_check(fib, kind, p, 4096, &config));
        }
    }
    let dt = t.elapsed();
    line(
        4,
        tally.failures.is_empty() && dt < Duration::from_secs(300),
        format!(
            "{} cells ({} dense, {} not dense, {} undecided), {} disagreements{} in {}",
            tally.cells,
            tally.dense,
            tally.not_dense,
            tally.undecided,
            tally.failures.len(),
            if tally.failures.is_empty() { String::new() } else { format!(" {:?}", &tally.failures[..tally.failures.len().min(5)]) },
            secs(dt)
        ),
    )
}

fn criterion_5() -> Line {
    let mut bad = Vec::new();

    let params = LucasParams::new(15, -54).expect("non-degenerate");
    for n in 1..=30 {
        match lucas::consecutive_ratio_gap(params, 3, 3, n) {
            Ok(Valuation::Finite(1)) => {}
            other => bad.push(format!("nu_3(a_{}/a_{n} - 3) = {other:?}", n + 1)),
        }
    }

    let c2 = enumerate_power_sums(2, 3, 100_000).expect("small bound");
    if let Some(x) = c2.elements().iter().find(|&&x| ![0, 1, 2, 7, 8].contains(&(x % 9))) {
        bad.push(format!("{x} in C_2 has residue {} mod 9", x % 9));
    }

    let period = period_mod(LucasParams::fibonacci(), LucasKind::Second, 8);
    if period.is_empty() || period.contains(&0) {
        bad.push(format!("L_n mod 8 period {period:?}"));
    }

    let s3 = enumerate_power_sums(3, 2, 10_000).expect("small bound");
    let excluded = |mut n: u64| {
        while n % 4 == 0 {
            n /= 4;
        }
        n % 8 == 7
    };
    let wrong: Vec<u64> = (1..=10_000).filter(|&n| s3.contains(n) == excluded(n)).collect();
    if !wrong.is_empty() {
        bad.push(format!("S_3 disagrees with 4^i(8j+7) at {:?}", &wrong[..wrong.len().min(5)]));
    }

    let detail = if bad.is_empty() {
        format!("ratio gap, C_2 mod 9, L_n mod 8 (period {}), S_3 up to 10^4 all exact", period.len() - 1)
    } else {
        bad.join("; ")
    };
    line(5, bad.is_empty(), detail)
}

fn criterion_6() -> Line {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut solved = 0u64;
    for p in [5u64, 13] {
        for r in 1..=6u32 {
            let m = p.pow(r);
            for n in 0..m {
                match lift_two_squares(n as i64, p, r) {
                    Ok((x, y)) if (x as u128 * x as u128 + y as u128 * y as u128) % m as u128 == n as u128 && x % p != 0 => {
                        solved += 1
                    }
                    other => failures.push(format!("squares p={p} r={r} n={n}: {other:?}")),
                }
            }
        }
    }
    for r in 1..=6u32 {
        let m = 7u64.pow(r);
        for n in 0..m {
            let admissible = ![3, 4].contains(&(n % 7));
            match lift_two_cubes_mod7(n as i64, r) {
                Ok((x, y)) if admissible && ((x as u128).pow(3) + (y as u128).pow(3)) % m as u128 == n as u128 && x % 7 != 0 => {
                    solved += 1
                }
                Err(_) if !admissible => {}
                other => failures.push(format!("cubes mod 7^{r} n={n}: {other:?}")),
            }
        }
    }
    for r in 2..=6u32 {
        let m = 3u64.pow(r);
        for n in 0..m {
            let admissible = ![4, 5].contains(&(n % 9));
            match lift_three_cubes_mod3(n as i64, r) {
                Ok((x, y, z))
                    if admissible
                        && ((x as u128).pow(3) + (y as u128).pow(3) + (z as u128).pow(3)) % m as u128 == n as u128
                        && x % 3 != 0 =>
                {
                    solved += 1
                }
                Err(_) if !admissible => {}
                other => failures.push(format!("three cubes mod 3^{r} n={n}: {other:?}")),
            }
        }
    }
    let dt = t.elapsed();
    line(
        6,
        failures.is_empty() && dt < Duration::from_secs(60),
        format!(
            "{solved} lifts checked (p = 5, 13; 7^r; 3^r; r <= 6), {} failures{} in {}",
            failures.len(),
            failures.first().map(|f| format!(" e.g. {f}")).unwrap_or_default(),
            secs(dt)
        ),
    )
}

fn criterion_7() -> Line {
    let t = Instant::now();
    let p = pairs::sieve_primes(1_000_000)[0];
    let witnesses = pairs::sieve_witnesses(p, 10_000, 1).expect("sieve runs");
    let reverified = witnesses.iter().all(|w| w.p == p && w.verify().unwrap_or(false));
    let mut identity_checks = 0u64;
    let mut identity_failures = Vec::new();
    for q_p in primes_up_to(100) {
        let m = q_p * q_p;
        for q in (1..m).filter(|q| q % q_p != 0) {
            for h in 0..q_p {
                identity_checks += 1;
                if !pairs::verify_sieve_identity(q_p, q, h).unwrap_or(false) {
                    identity_failures.push((q_p, q, h));
                }
            }
        }
    }
    let dt = t.elapsed();
    let ok = p == 213_623 && !witnesses.is_empty() && reverified && identity_failures.is_empty();
    line(
        7,
        ok,
        format!(
            "p = {p}: {} witnesses (h <= 10^4), reverified = {reverified}; identity {identity_checks} cases, {} failures; {}",
            witnesses.len(),
            identity_failures.len(),
            secs(dt)
        ),
    )
}

fn criterion_8() -> Line {
    let mut bad = Vec::new();
    let greedy = greedy_no3ap_set(500).expect("within search window");
    if let Some(ap) = contains_3ap(&greedy) {
        bad.push(format!("greedy set has 3-AP {ap:?}"));
    }
    for k in [1usize, 10, 100, 250, 499] {
        let prefix = greedy_no3ap_set(k).expect("within search window");
        if prefix.elements() != &greedy.elements()[..k] {
            bad.push(format!("greedy({k}) is not a prefix of greedy(500)"));
        }
    }
    let zd = zero_density_dense_set(13).expect("small bound");
    let below: Vec<u64> = zd.elements().iter().copied().filter(|&x| x < 13).collect();
    if below != [1, 2, 5, 6, 7] {
        bad.push(format!("zero-density prefix {below:?}"));
    }
    let alpha = Rational::new(1, 2).expect("nonzero denominator");
    let sample = ThresholdSet::new(alpha).and_then(|mut t| t.sample(100_000)).expect("threshold set");
    let density = empirical_lower_density(&sample, 1);
    if density < 0.48 {
        bad.push(format!("threshold lower density {density:.4}"));
    }
    let detail = if bad.is_empty() {
        format!("greedy(500) 3-AP-free and prefix-stable; prefix {below:?}; threshold density {density:.4}")
    } else {
        bad.join("; ")
    };
    line(8, bad.is_empty(), detail)
}

fn criterion_9() -> Vec<Line> {
    let ttff = Pattern::parse("T,T,F,F").expect("pattern");
    let sstt = Pattern::parse("*,*,T,T").expect("pattern");
    let t = Instant::now();
    let empty = pairs::search_pattern(&ttff, 2000, 1).expect("search");
    let single = t.elapsed();
    let nonempty = pairs::search_pattern(&sstt, 2000, 1).expect("search");
    let ok = empty.is_empty() && !nonempty.is_empty() && single < Duration::from_secs(120);
    let mut out = vec![line(
        9,
        ok,
        format!(
            "(T,T,F,F) up to 2000: {} pairs in {} single-threaded; (*,*,T,T): {} pairs, first {:?}",
            empty.len(),
            secs(single),
            nonempty.len(),
            nonempty.first().map(|r| (r.p, r.q))
        ),
    )];

    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cores >= 4 {
        let t = Instant::now();
        let parallel = pairs::search_pattern(&ttff, 2000, 4).expect("search");
        let par = t.elapsed();
        let speedup = single.as_secs_f64() / par.as_secs_f64().max(1e-9);
        out.push(line(
            9,
            parallel == empty && speedup >= 3.0,
            format!("speedup on 4 workers: {speedup:.2}x"),
        ));
    } else {
        println!("criterion 9: NOT MEASURABLE parallel speedup needs 4 cores, this machine has {cores}");
    }
    out
}

fn main() {
    // `cargo test -- --list` and friends pass flags; only run on a plain invocation or a filter match.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if !args.is_empty() && !args.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }

    let mut lines = Vec::new();
    let criteria: [fn() -> Vec<Line>; 9] = [
        || vec![criterion_1()],
        || vec![criterion_2()],
        || vec![criterion_3()],
        || vec![criterion_4()],
        || vec![criterion_5()],
        || vec![criterion_6()],
        || vec![criterion_7()],
        || vec![criterion_8()],
        criterion_9,
    ];
    for run in criteria {
        for l in run() {
            println!("criterion {}: {} {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.detail);
            lines.push(l);
        }
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
