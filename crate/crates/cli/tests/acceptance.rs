//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use dispersion_core::io::{generate_instance, Distribution, InstanceSpec};
use dispersion_core::ptas::PtasParams;
use dispersion_core::{
    bound_fraction, brute_force, candidate_union, directional_topk, greedy_baseline,
    rotate_linf_to_l1, solve_fixed_k, solve_ptas, subset_weight, Direction, Metric, PointSet,
    Solution, Weight,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// ---- independent oracles -------------------------------------------------

fn naive_l1(p: &[i64], q: &[i64]) -> i128 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (*a as i128 - *b as i128).abs())
        .sum()
}

fn naive_linf(p: &[i64], q: &[i64]) -> i128 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (*a as i128 - *b as i128).abs())
        .max()
        .unwrap_or(0)
}

fn naive_l2(p: &[i64], q: &[i64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = (*a - *b) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn pair_sum<T: std::iter::Sum<T>>(
    pts: &PointSet,
    s: &[usize],
    d: impl Fn(&[i64], &[i64]) -> T,
) -> T {
    let mut terms = Vec::new();
    for (i, &a) in s.iter().enumerate() {
        for &b in &s[i + 1..] {
            terms.push(d(pts.point(a), pts.point(b)));
        }
    }
    terms.into_iter().sum()
}

/// Reported exact weight of a solution as an integer.
fn reported_int(sol: &Solution) -> Result<i128, String> {
    ok(sol.reported_weight().parse::<i128>())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn below(r: &mut ChaCha8Rng, n: u64) -> u64 {
    r.next_u64() % n
}

fn random_subset(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(r, (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

// ---- instance families ---------------------------------------------------

struct Case {
    points: PointSet,
    k: usize,
}

/// 200 instances, uniform and clustered, n in [6,20], d in {1,2,3},
/// k in {2,3,4}, coordinates in [-50, 50].
fn oracle_cases() -> Vec<Case> {
    let mut r = rng(2024);
    (0..200)
        .map(|i| {
            let n = 6 + below(&mut r, 15) as usize;
            let dim = 1 + i % 3;
            let k = 2 + (i / 3) % 3;
            let distribution = if i % 2 == 0 {
                Distribution::Uniform
            } else {
                Distribution::Clustered {
                    clusters: 1 + below(&mut r, 4) as usize,
                    spread: 2 + below(&mut r, 8) as i64,
                }
            };
            let spec = InstanceSpec {
                n,
                dim,
                lo: -50,
                hi: 50,
                distribution,
                seed: 10_000 + i as u64,
            };
            Case {
                points: generate_instance(&spec).unwrap(),
                k,
            }
        })
        .collect()
}

fn planar(n: usize, lo: i64, hi: i64, seed: u64) -> PointSet {
    generate_instance(&InstanceSpec::uniform(n, 2, lo, hi, seed)).unwrap()
}

// ---- criteria ------------------------------------------------------------

fn c1_fixed_k_matches_brute(cases: &[Case]) -> Check {
    let started = Instant::now();
    for (i, c) in cases.iter().enumerate() {
        let fast = ok(solve_fixed_k(&c.points, c.k, Metric::L1))?;
        let slow = ok(brute_force(&c.points, c.k, Metric::L1))?;
        ensure!(
            fast.weight == slow.weight,
            "instance {i}: fixed-k {:?} != brute {:?}",
            fast.weight,
            slow.weight
        );
        let naive = pair_sum(&c.points, &fast.indices, naive_l1);
        ensure!(
            fast.weight == Weight::Exact(naive),
            "instance {i}: weight {:?} != naive {naive}",
            fast.weight
        );
    }
    let elapsed = started.elapsed();
    ensure!(
        elapsed <= Duration::from_secs(60),
        "took {elapsed:?} > 60 s"
    );
    Ok(format!(
        "{} instances, 0 mismatches, {:.2} s",
        cases.len(),
        elapsed.as_secs_f64()
    ))
}

fn c2_union_bound(cases: &[Case]) -> Check {
    let mut worst = 0f64;
    for (i, c) in cases.iter().enumerate() {
        let u = ok(candidate_union(&c.points, c.k))?.len();
        let bound = c.k.pow(c.points.dim() as u32 + 1);
        ensure!(u <= bound, "instance {i}: |union| = {u} > {bound}");
        worst = worst.max(u as f64 / bound as f64);
    }
    Ok(format!(
        "{} instances, max |union|/k^(d+1) = {worst:.3}",
        cases.len()
    ))
}

fn c3_ptas_bound() -> Check {
    let started = Instant::now();
    let bf = ok(bound_fraction(4))?;
    let dir = ok(tempfile::TempDir::new())?;
    let mut ratios = Vec::new();
    for i in 0..10u64 {
        let n = 9 + (i % 4) as usize;
        let pts = planar(n, -50, 50, 300 + i);
        let heu = ok(solve_ptas(&pts, 8, &PtasParams::new(4, Metric::L1)))?;
        let opt = ok(brute_force(&pts, 8, Metric::L1))?;
        let (h, o) = (reported_int(&heu)?, reported_int(&opt)?);
        ensure!(
            h == pair_sum(&pts, &heu.indices, naive_l1),
            "instance {i}: PTAS weight is wrong"
        );
        ensure!(12 * h >= o, "instance {i}: HEU {h} < OPT {o} / 12");
        ensure!(
            bf.is_satisfied_by(h, o),
            "instance {i}: bound check disagrees"
        );
        ensure!(h <= o, "instance {i}: HEU {h} > OPT {o}");
        ratios.push(h as f64 / o as f64);
        let csv = ok(dispersion_core::io::write_instance(
            &pts,
            dispersion_core::io::Format::Csv,
            0,
        ))?;
        ok(fs::write(dir.path().join(format!("ptas{i:02}.csv")), csv))?;
    }
    // the same instances through the bench report
    let (code, report, summary) = dispersion(&[
        "bench",
        "--instances",
        dir.path().to_str().unwrap(),
        "--scale",
        "0",
        "--k",
        "8",
        "--algos",
        "ptas,brute",
        "--m",
        "4",
    ]);
    ensure!(code == 0, "bench exited with {code}");
    let ptas_rows: Vec<&str> = report.lines().filter(|l| l.contains(",ptas,")).collect();
    ensure!(
        ptas_rows.len() == 10,
        "bench produced {} ptas rows",
        ptas_rows.len()
    );
    for line in ptas_rows {
        let ratio = line.split(',').nth(7).unwrap_or("");
        let (p, q) = ratio
            .split_once('/')
            .ok_or(format!("bad ratio in {line:?}"))?;
        let (p, q): (i128, i128) = (ok(p.parse())?, ok(q.parse())?);
        ensure!(
            12 * p >= q && p <= q,
            "bench row violates the bound: {line}"
        );
    }
    let elapsed = started.elapsed();
    ensure!(
        elapsed <= Duration::from_secs(600),
        "took {elapsed:?} > 10 min"
    );
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ptas_line = summary
        .lines()
        .find(|l| l.starts_with("ptas"))
        .unwrap_or("")
        .trim()
        .to_string();
    Ok(format!(
        "10 instances, min ratio {min:.4}, mean ratio {mean:.4} (bound 1/12), {:.2} s; bench: {ptas_line}",
        elapsed.as_secs_f64()
    ))
}

fn c4_bound_values() -> Check {
    for (m, p, q) in [(4, 11, 12), (5, 2, 3), (10, 41, 144)] {
        let f = ok(bound_fraction(m))?;
        ensure!(
            (f.numer(), f.denom()) == (p, q),
            "f({m}) = {f}, expected {p}/{q}"
        );
    }
    Ok("f(4)=11/12, f(5)=2/3, f(10)=41/144".into())
}

fn c5_diameter() -> Check {
    let mut r = rng(55);
    for i in 0..100u64 {
        let n = 2 + below(&mut r, 79) as usize;
        let pts = planar(n, -1000, 1000, 500 + i);
        let sol = ok(solve_fixed_k(&pts, 2, Metric::L1))?;
        let mut best = 0;
        for a in 0..n {
            for b in a + 1..n {
                best = best.max(naive_l1(pts.point(a), pts.point(b)));
            }
        }
        ensure!(
            sol.weight == Weight::Exact(best),
            "instance {i}: {:?} != pair scan {best}",
            sol.weight
        );
    }
    Ok("100 instances, 0 mismatches".into())
}

fn c6_linf_rotation() -> Check {
    let mut pairs = 0usize;
    for i in 0..50u64 {
        let pts = planar(20 + (i % 10) as usize, -10_000, 10_000, 600 + i);
        let rot = ok(rotate_linf_to_l1(&pts))?;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let l1 = naive_l1(rot.point(a), rot.point(b));
                let linf = naive_linf(pts.point(a), pts.point(b));
                ensure!(
                    l1 == 2 * linf,
                    "instance {i} pair ({a},{b}): {l1} != 2*{linf}"
                );
                pairs += 1;
            }
        }
    }
    let mut solved = 0;
    for i in 0..50u64 {
        let n = 4 + (i % 13) as usize;
        let pts = planar(n, -50, 50, 700 + i);
        for k in [2, 3] {
            let fast = ok(solve_fixed_k(&pts, k, Metric::Linf))?;
            let slow = ok(brute_force(&pts, k, Metric::Linf))?;
            let (f, s) = (reported_int(&fast)?, reported_int(&slow)?);
            ensure!(f == s, "instance {i} k={k}: fixed-k {f} != brute {s}");
            ensure!(
                f == pair_sum(&pts, &fast.indices, naive_linf),
                "instance {i} k={k}: L-inf weight is wrong"
            );
            solved += 1;
        }
    }
    Ok(format!(
        "{pairs} pairs exact; {solved} L-inf solves match brute force"
    ))
}

fn c7_euclidean() -> Check {
    let mut ratios = Vec::new();
    for i in 0..20u64 {
        let n = 8 + (i % 5) as usize;
        let pts = planar(n, -50, 50, 800 + i);
        let heu = ok(solve_ptas(&pts, 6, &PtasParams::new(4, Metric::L2)))?;
        let opt = ok(brute_force(&pts, 6, Metric::L2))?;
        let h = pair_sum(&pts, &heu.indices, naive_l2);
        let o = pair_sum(&pts, &opt.indices, naive_l2);
        ensure!(
            (h - heu.weight.as_f64()).abs() <= 1e-9 * h,
            "instance {i}: reported L2 weight is wrong"
        );
        let floor = o / (2f64.sqrt() * 12.0);
        ensure!(h >= floor * (1.0 - 1e-9), "instance {i}: {h} < {floor}");
        ensure!(
            h <= o * (1.0 + 1e-9),
            "instance {i}: PTAS {h} beats the optimum {o}"
        );
        ratios.push(h / o);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "20 instances, bound 1/(12*sqrt 2) = {:.4}, min ratio {min:.4}, mean ratio {mean:.4}",
        1.0 / (12.0 * 2f64.sqrt())
    ))
}

fn c8_properties() -> Check {
    let mut r = rng(88);
    for t in 0..1000u64 {
        let dim = 1 + (t % 4) as usize;
        let n = 2 + below(&mut r, 30) as usize;
        let pts = generate_instance(&InstanceSpec::uniform(
            n,
            dim,
            -1_000_000,
            1_000_000,
            900 + t,
        ))
        .unwrap();
        let k = 1 + below(&mut r, n as u64) as usize;
        let s = random_subset(&mut r, n, k);
        let w = ok(subset_weight(&pts, &s, Metric::L1))?;
        ensure!(
            w == Weight::Exact(pair_sum(&pts, &s, naive_l1)),
            "subset {t}: L1 weight formula"
        );
        let off: Vec<i64> = (0..dim)
            .map(|_| below(&mut r, 2001) as i64 - 1000)
            .collect();
        let moved = ok(pts.translated(&off))?;
        ensure!(
            ok(subset_weight(&moved, &s, Metric::L1))? == w,
            "subset {t}: translation changed the weight"
        );
        if dim == 2 {
            let wi = ok(subset_weight(&pts, &s, Metric::Linf))?;
            ensure!(
                wi == Weight::Exact(2 * pair_sum(&pts, &s, naive_linf)),
                "subset {t}: L-inf weight"
            );
            ensure!(
                ok(subset_weight(&moved, &s, Metric::Linf))? == wi,
                "subset {t}: L-inf translation"
            );
        }
        let c = Direction::new((0..dim).map(|_| below(&mut r, 21) as i64 - 10).collect());
        let kk = 1 + below(&mut r, n as u64) as usize;
        let base = ok(directional_topk(&pts, &c, kk))?;
        let lambda = 1 + below(&mut r, 50) as i64;
        ensure!(
            ok(directional_topk(&pts, &c.scaled(lambda), kk))? == base,
            "subset {t}: top-k changed under scaling"
        );
    }

    // solver determinism under repeated runs and 1, 2, 4 worker threads
    let mut checked = 0;
    for i in 0..6u64 {
        let pts = planar(12, -50, 50, 1000 + i);
        let pts3 = generate_instance(&InstanceSpec::uniform(14, 3, -50, 50, 1100 + i)).unwrap();
        let run = || -> Result<Vec<Solution>, String> {
            let mut out = Vec::new();
            for metric in [Metric::L1, Metric::Linf, Metric::L2] {
                out.push(ok(solve_fixed_k(&pts, 3, metric))?);
                out.push(ok(brute_force(&pts, 4, metric))?);
                out.push(ok(greedy_baseline(&pts, 5, metric))?);
                out.push(ok(solve_ptas(&pts, 8, &PtasParams::new(4, metric)))?);
            }
            out.push(ok(solve_fixed_k(&pts3, 3, Metric::L1))?);
            Ok(out)
        };
        let key = |v: &[Solution]| -> Vec<(Vec<usize>, String)> {
            v.iter()
                .map(|s| (s.indices.clone(), s.reported_weight()))
                .collect()
        };
        let reference = key(&run()?);
        for threads in [1, 2, 4, 4] {
            let pool = ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build())?;
            let got = pool.install(run)?;
            ensure!(
                key(&got) == reference,
                "instance {i}: results differ with {threads} threads"
            );
            checked += got.len();
        }
    }
    Ok(format!(
        "1000 random subsets; {checked} solver runs deterministic across 1/2/4 threads"
    ))
}

fn c9_reproducible() -> Check {
    let dir = ok(tempfile::TempDir::new())?;
    let gen_args = |path: &str| {
        vec![
            "gen".to_string(),
            "--n".into(),
            "25".into(),
            "--d".into(),
            "3".into(),
            "--seed".into(),
            "99".into(),
            "--clusters".into(),
            "4".into(),
            "--spread".into(),
            "6".into(),
            "-o".into(),
            path.to_string(),
        ]
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let args = gen_args(p.to_str().unwrap());
        let (code, _, _) = dispersion(&args.iter().map(String::as_str).collect::<Vec<_>>());
        ensure!(code == 0, "gen exited with {code}");
    }
    ensure!(ok(fs::read(&a))? == ok(fs::read(&b))?, "gen files differ");
    let (_, s1, _) = dispersion(&["gen", "--n", "40", "--seed", "3", "--format", "json"]);
    let (_, s2, _) = dispersion(&["gen", "--n", "40", "--seed", "3", "--format", "json"]);
    ensure!(s1 == s2, "gen stdout differs");

    let bench = [
        "bench",
        "--n",
        "8..13",
        "--reps",
        "2",
        "--k",
        "3,4,8",
        "--seed",
        "17",
        "--algos",
        "fixed-k,ptas,greedy,brute",
        "--m",
        "4",
    ];
    let (c1, r1, _) = dispersion(&bench);
    let (c2, r2, _) = dispersion(&bench);
    ensure!(c1 == 0 && c2 == 0, "bench exited with {c1}/{c2}");
    ensure!(r1 == r2, "bench reports differ");
    let mut single = bench.to_vec();
    single.extend(["--threads", "1"]);
    let (_, r3, _) = dispersion(&single);
    ensure!(r1 == r3, "bench report depends on the thread count");

    // separate processes
    let bin = env!("CARGO_BIN_EXE_dispersion");
    let spawn = |args: &[&str]| {
        std::process::Command::new(bin)
            .args(args)
            .output()
            .map(|o| o.stdout)
    };
    let p1 = ok(spawn(&bench))?;
    let p2 = ok(spawn(&bench))?;
    ensure!(
        p1 == p2 && p1 == r1.as_bytes(),
        "bench output differs across processes"
    );
    let g = ["gen", "--n", "30", "--seed", "5"];
    ensure!(
        ok(spawn(&g))? == ok(spawn(&g))?,
        "gen output differs across processes"
    );
    Ok(format!(
        "gen and bench byte-identical ({} report bytes)",
        r1.len()
    ))
}

fn dispersion(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = dispersion_cli::run(
        std::iter::once("dispersion").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let cases = oracle_cases();
    let criteria: Vec<Criterion<'_>> = vec![
        (
            "exact solver equals brute force",
            Box::new(|| c1_fixed_k_matches_brute(&cases)),
        ),
        (
            "candidate union at most k^(d+1)",
            Box::new(|| c2_union_bound(&cases)),
        ),
        ("PTAS meets its bound (m=4, k=8)", Box::new(c3_ptas_bound)),
        ("bound fraction values", Box::new(c4_bound_values)),
        ("k=2 equals the diameter", Box::new(c5_diameter)),
        ("L-inf rotation identity", Box::new(c6_linf_rotation)),
        ("Euclidean composed bound", Box::new(c7_euclidean)),
        ("weight and determinism properties", Box::new(c8_properties)),
        ("gen and bench reproducibility", Box::new(c9_reproducible)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
