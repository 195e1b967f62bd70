//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#![allow(clippy::type_complexity)]

use std::fs;
use std::num::NonZeroU32;
use std::path::Path;
use std::time::{Duration, Instant};

use fuzzyface::formats::{face_to_json, parse_face};
use fuzzyface::synthbench::{rank_auc, roc_area};
use fuzzyface::{
    compare, compute_alpha, evaluate, generate_population, mask_subtract, shannon_entropy, solve_t, AlphaMode, BinaryMask,
    Calibration, Config, FaceInput, Kernel, Point, PopulationConfig, Report, Sample,
};
use fuzzyface_cli::run;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn face_from_points(outline: Vec<Point>, w: u32, h: u32) -> FaceInput {
    let pop = generate_population(&PopulationConfig {
        identity_count: 1,
        captures_per_identity: 1,
        seed: 0,
        ..PopulationConfig::default()
    })
    .unwrap();
    let template = &pop[0].face;
    let sx = w as f64 / template.width() as f64;
    let sy = h as f64 / template.height() as f64;
    let lms = template
        .landmarks()
        .iter()
        .map(|(k, p)| (k.clone(), Point::new(p.x * sx, p.y * sy)))
        .collect();
    FaceInput::new("square", w, h, lms, outline).unwrap()
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
}

fn scaled(face: &FaceInput, c: f64) -> FaceInput {
    let w = (face.width() as f64 * c).round() as u32;
    let h = (face.height() as f64 * c).round() as u32;
    face.resized(w, h).unwrap()
}

/// 100 faces from varied seeds and noise levels.
fn random_faces(n: usize) -> Vec<FaceInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..n)
        .map(|_| {
            let cfg = PopulationConfig {
                identity_count: 1,
                captures_per_identity: 1,
                identity_sigma: rng.random_range(0.0..8.0),
                capture_sigma: rng.random_range(0.0..3.0),
                outline_sigma: rng.random_range(0.0..4.0),
                seed: rng.random(),
            };
            generate_population(&cfg).unwrap().remove(0).face
        })
        .collect()
}

fn c1_identity() -> Outcome {
    let start = Instant::now();
    let faces = random_faces(100);
    let cfg = Config::default();
    for f in &faces {
        let r = compare(f, f, &cfg).map_err(|e| e.to_string())?;
        ensure((r.delta - 100.0).abs() <= 1e-9, || format!("{}: delta {}", f.id(), r.delta))?;
        for row in &r.features {
            ensure((row.entropy - 1.0).abs() <= 1e-12 && (row.membership - 1.0).abs() <= 1e-12, || {
                format!("{}: {} H={} mu={}", f.id(), row.name, row.entropy, row.membership)
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("100 faces, delta = 100 within 1e-9, {elapsed:.2?}"))
}

// Independent entropy evaluation: the smaller probability p feeds log2 p
// directly and the larger one through ln_1p(-p), avoiding cancellation.
fn entropy_oracle(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let p = lo / (lo + hi);
    let q = hi / (lo + hi);
    let lo_term = if p == 0.0 { 0.0 } else { p * p.ln() };
    -(lo_term + q * (-p).ln_1p()) / std::f64::consts::LN_2
}

fn c2_entropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        // (0, 100]: 100 - [0, 100) never hits zero
        let a = 100.0 - rng.random_range(0.0..100.0);
        let b = 100.0 - rng.random_range(0.0..100.0);
        let h = shannon_entropy(&[a, b]).map_err(|e| e.to_string())?;
        let err = (h - entropy_oracle(a, b)).abs();
        worst = worst.max(err);
        ensure(err <= 1e-12, || format!("H({a}, {b}) off by {err:e}"))?;
        for c in [0.1, 7.0, 1000.0] {
            let hc = shannon_entropy(&[c * a, c * b]).map_err(|e| e.to_string())?;
            ensure((hc - h).abs() <= 1e-12, || format!("scale {c} on ({a}, {b}): {hc} vs {h}"))?;
        }
    }
    let h13 = shannon_entropy(&[1.0f64, 3.0]).map_err(|e| e.to_string())?;
    ensure((h13 - 0.811278).abs() <= 1e-6, || format!("H(1,3) = {h13}"))?;
    Ok(format!("1000 pairs, worst |err| {worst:.1e}; H(1,3) = {h13:.6}"))
}

fn c3_membership() -> Outcome {
    let bell = Kernel::default_bell();
    let expect: [(f64, f64, f64); 3] = [(0.0, 0.0, 0.0), (0.5, 0.58410, 1e-5), (1.0, 1.0, 0.0)];
    for (x, want, tol) in expect {
        let got = bell.eval(x).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= tol.max(1e-15), || format!("bell({x}) = {got}"))?;
    }
    let tri = |p: f64, r: f64, q: f64, x: f64| f64::max(0.0, f64::min((x - p) / (r - p), (q - x) / (q - r)));
    let trap = |p: f64, s: f64, t: f64, q: f64, x: f64| {
        f64::min((x - p) / (s - p), (q - x) / (q - t)).clamp(0.0, 1.0)
    };
    let grid = |lo: f64, hi: f64, breaks: &[f64]| -> Vec<f64> {
        let mut g: Vec<f64> = (0..1000).map(|i| lo + (hi - lo) * i as f64 / 999.0).collect();
        g.extend_from_slice(breaks);
        g
    };
    let kernels: [(Kernel, Box<dyn Fn(f64) -> f64>, Vec<f64>); 4] = [
        (Kernel::triangle(0.0, 1.0, 2.0).unwrap(), Box::new(move |x| tri(0.0, 1.0, 2.0, x)), grid(-0.5, 2.5, &[0.0, 1.0, 2.0])),
        (Kernel::triangle(-3.0, 0.25, 5.0).unwrap(), Box::new(move |x| tri(-3.0, 0.25, 5.0, x)), grid(-4.0, 6.0, &[-3.0, 0.25, 5.0])),
        (
            Kernel::trapezoid(0.0, 1.0, 2.0, 3.0).unwrap(),
            Box::new(move |x| trap(0.0, 1.0, 2.0, 3.0, x)),
            grid(-0.5, 3.5, &[0.0, 1.0, 2.0, 3.0]),
        ),
        (
            Kernel::trapezoid(0.0, 0.9, 1.0, 1.1).unwrap(),
            Box::new(move |x| trap(0.0, 0.9, 1.0, 1.1, x)),
            grid(-0.2, 1.3, &[0.0, 0.9, 1.0, 1.1]),
        ),
    ];
    let mut points = 0;
    for (kernel, oracle, xs) in &kernels {
        for &x in xs {
            let got = kernel.eval(x).map_err(|e| e.to_string())?;
            let want = oracle(x);
            ensure((got - want).abs() <= 1e-12, || format!("{kernel:?} at {x}: {got} vs {want}"))?;
            points += 1;
        }
    }
    Ok(format!("bell(0, 0.5, 1) ok; {points} piecewise points within 1e-12"))
}

fn c4_alpha() -> Outcome {
    let big = face_from_points(rect(5.0, 5.0, 15.0, 15.0), 20, 20);
    let small = face_from_points(rect(6.0, 6.0, 14.0, 14.0), 20, 20);
    let far = face_from_points(rect(0.0, 0.0, 4.0, 4.0), 20, 20);
    // 20 * 26 = 520 raster pixels per side
    let raster = NonZeroU32::new(26);
    let alpha = |a: &FaceInput, b: &FaceInput, m| compute_alpha(a, b, m, raster).map_err(|e| e.to_string());
    let comp = alpha(&big, &small, AlphaMode::Complement)?;
    let lit = alpha(&big, &small, AlphaMode::Literal)?;
    ensure((comp - 0.64).abs() <= 0.01, || format!("complement {comp}"))?;
    ensure((lit - 0.36).abs() <= 0.01, || format!("literal {lit}"))?;
    for m in [AlphaMode::Literal, AlphaMode::Complement] {
        let same = alpha(&big, &big, m)?;
        ensure(same == 1.0, || format!("identical outlines, {m}: {same}"))?;
    }
    let dc = alpha(&big, &far, AlphaMode::Complement)?;
    let dl = alpha(&big, &far, AlphaMode::Literal)?;
    ensure(dc == 0.0 && dl == 1.0, || format!("disjoint: complement {dc}, literal {dl}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let (w, h) = (rng.random_range(1..64), rng.random_range(1..64));
        let (da, db) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let a = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(da));
        let b = BinaryMask::from_fn(w, h, |_, _| rng.random_bool(db));
        let diff = mask_subtract(&a, &b).map_err(|e| e.to_string())?.area();
        let inter = a.intersection(&b).map_err(|e| e.to_string())?.area();
        ensure(diff + inter == a.area(), || format!("mask pair {i}: {diff} + {inter} != {}", a.area()))?;
    }
    Ok(format!("complement {comp:.4}, literal {lit:.4}; identity/disjoint exact; 200 mask pairs exact"))
}

fn c5_size_invariance() -> Outcome {
    let pop = generate_population(&PopulationConfig {
        identity_count: 20,
        captures_per_identity: 2,
        seed: 5,
        ..PopulationConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let cfg = Config::default();
    let mut worst: f64 = 0.0;
    // 10 genuine pairs (captures of one identity) and 10 impostor pairs
    let pairs = (0..10).map(|i| (2 * i, 2 * i + 1)).chain((0..10).map(|i| (2 * i, 2 * i + 2)));
    for (i, j) in pairs {
        let (a, b) = (&pop[i].face, &pop[j].face);
        let base = compare(a, b, &cfg).map_err(|e| e.to_string())?.delta;
        for c in [0.5, 2.0, 3.7] {
            let d = compare(a, &scaled(b, c), &cfg).map_err(|e| e.to_string())?.delta;
            worst = worst.max((d - base).abs());
            ensure((d - base).abs() <= 0.1, || format!("{} vs {} at c={c}: {base} -> {d}", a.id(), b.id()))?;
        }
    }
    Ok(format!("20 pairs x 3 scales, worst |change| {worst:.2e}"))
}

fn c6_calibration() -> Outcome {
    let s = |b: f64, a: f64| Sample::new(b, a).unwrap();
    let mut state = Calibration::new();
    state.update(s(0.98, 0.40));
    state.update(s(0.96, 0.30));
    let k = state.finalize().map_err(|e| e.to_string())?;
    ensure((state.k1 - 0.984848).abs() <= 1e-6, || format!("k1 = {}", state.k1))?;
    ensure((k - 0.992424).abs() <= 1e-6, || format!("K = {k}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let beta = rng.random_range(0.05..=1.0);
        let alpha = beta * rng.random_range(0.0..0.99);
        let t1 = solve_t(0.95, beta, alpha).unwrap();
        let mut st = Calibration::new();
        for _ in 0..50 {
            st.update(s(beta, alpha));
        }
        ensure((st.k1 - t1).abs() <= 1e-6, || format!("({beta}, {alpha}): k1 {} vs t1 {t1}", st.k1))?;
    }

    let mut updates = 0;
    for stream in 0..1000 {
        let mut st = Calibration::new();
        for _ in 0..rng.random_range(1..40) {
            st.update(s(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0)));
            updates += 1;
            if st.initialized {
                let k = st.finalize().unwrap();
                ensure(st.k1 <= st.k2 && (0.0..=1.0).contains(&k), || {
                    format!("stream {stream}: k1 {} k2 {} K {k}", st.k1, st.k2)
                })?;
            }
        }
    }
    Ok(format!("k1 = {:.6}, K = {k:.6}; convergence ok; {updates} random updates ordered", state.k1))
}

fn c7_separation() -> Outcome {
    let start = Instant::now();
    let pop = generate_population(&PopulationConfig {
        identity_count: 20,
        captures_per_identity: 3,
        identity_sigma: 6.0,
        capture_sigma: 1.0,
        outline_sigma: 2.0,
        seed: 42,
    })
    .map_err(|e| e.to_string())?;
    let cfg = Config::default().with_alpha_mode(AlphaMode::Complement).with_k(0.5);
    let r = evaluate(&pop, &cfg, 95.0).map_err(|e| e.to_string())?;
    let gap = r.genuine.mean - r.impostor.mean;
    ensure(gap >= 5.0, || format!("mean gap {gap}"))?;
    ensure(r.auc >= 0.8, || format!("AUC {}", r.auc))?;
    let mut wins = 0.0;
    for g in &r.genuine_scores {
        for i in &r.impostor_scores {
            wins += if g > i { 1.0 } else if g == i { 0.5 } else { 0.0 };
        }
    }
    let brute = wins / (r.genuine_scores.len() * r.impostor_scores.len()) as f64;
    ensure((r.auc - brute).abs() <= 1e-9, || format!("AUC {} vs brute force {brute}", r.auc))?;
    let from_roc = roc_area(&r.roc_points);
    ensure((from_roc - brute).abs() <= 1e-9, || format!("ROC area {from_roc} vs {brute}"))?;
    let again = rank_auc(&r.genuine_scores, &r.impostor_scores).map_err(|e| e.to_string())?;
    ensure(again == r.auc, || "rank AUC not reproducible".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "genuine {:.2} vs impostor {:.2} (gap {gap:.2}), AUC {:.4}, {elapsed:.2?}",
        r.genuine.mean, r.impostor.mean, r.auc
    ))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("fuzzyface").chain(args.iter().copied()), &mut out, &mut err);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    Ok(out)
}

fn read(path: &Path) -> Result<Vec<u8>, String> {
    fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn c8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let p = |name: &str| root.join(name).to_str().unwrap().to_string();
    let mut artifacts = 0;
    for run_dir in ["r1", "r2"] {
        cli(&["synth", "--identities", "3", "--captures", "2", "--seed", "7", "-o", &p(run_dir)])?;
        let manifest = p(&format!("{run_dir}/manifest.json"));
        cli(&["calibrate", &manifest, "-o", &p(&format!("{run_dir}/model.json"))])?;
        cli(&[
            "evaluate", &manifest, "--model", &p(&format!("{run_dir}/model.json")), "--threshold", "95",
            "-o", &p(&format!("{run_dir}/report.json")), "--csv", &p(&format!("{run_dir}/scores.csv")),
        ])?;
    }
    let mut files: Vec<String> = ["manifest.json", "model.json", "report.json", "scores.csv"].map(String::from).to_vec();
    for entry in fs::read_dir(root.join("r1/faces")).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        files.push(format!("faces/{}", name.to_string_lossy()));
    }
    for f in &files {
        let (a, b) = (read(&root.join("r1").join(f))?, read(&root.join("r2").join(f))?);
        ensure(a == b, || format!("{f} differs between runs"))?;
        artifacts += 1;
    }
    let face = p("r1/faces/id000_c00.json");
    let other = p("r1/faces/id001_c01.json");
    let c1 = cli(&["compare", &face, &other, "--json"])?;
    let c2 = cli(&["compare", &face, &other, "--json"])?;
    ensure(c1 == c2, || "compare output differs between runs".into())?;
    let report: Report = serde_json::from_slice(&c1).map_err(|e| e.to_string())?;
    report.check_consistency().map_err(|e| e.to_string())?;

    for f in files.iter().filter(|f| f.starts_with("faces/")) {
        let text = String::from_utf8(read(&root.join("r1").join(f))?).map_err(|e| e.to_string())?;
        let loaded = parse_face(&text).map_err(|e| e.to_string())?;
        let resaved = face_to_json(&loaded);
        ensure(resaved == text, || format!("{f} changed on load/save"))?;
        ensure(parse_face(&resaved).map_err(|e| e.to_string())? == loaded, || format!("{f} content changed"))?;
    }
    Ok(format!("{artifacts} artifacts byte-identical across runs; compare JSON stable; faces round-trip"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 identity", c1_identity),
        ("2 entropy oracle", c2_entropy),
        ("3 membership closed forms", c3_membership),
        ("4 alpha oracle", c4_alpha),
        ("5 size invariance", c5_size_invariance),
        ("6 calibration trace", c6_calibration),
        ("7 separation", c7_separation),
        ("8 determinism and round-trip", c8_determinism),
    ];
    let mut failed = 0;
    println!("\nacceptance criteria");
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed\n", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
