//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hitchin::atlas::LiftAtlas;
use hitchin::fixtures::{self, NAMES};
use hitchin::flag::{double_ratio, is_positive_quadruple, is_positive_triple, triple_indices, triple_ratio, Flag};
use hitchin::identities::check_identities;
use hitchin::invariants::{full_coordinates, lengths, Invariants};
use hitchin::lamination::Side;
use hitchin::polytope::{affine_dimension, global_relation_residual, sample_interior, side_length_product};
use hitchin::representation::{positive_eigendata, sl2_symmetric_lift, RepError};
use hitchin::synthesis::{reconstruct, SynthesisError};
use hitchin::{Matrix, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::Rational;
use tempfile::TempDir;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn identity_suite() -> Check {
    let start = Instant::now();
    let mut summary = Vec::new();
    for n in 3..=5 {
        // Draw until at least 100 tuples were generic.
        let mut trials = 100;
        let report = loop {
            let r = check_identities(n, trials, 2024 + n as u64, None);
            if trials - r.skipped_degenerate >= 100 {
                break r;
            }
            trials += r.skipped_degenerate;
        };
        ensure!(report.pass(), "n={n}: {:?}", report.failures);
        for name in [
            "triple ratio rotation",
            "triple ratio transposition",
            "quadruple ratio product",
            "quadruple ratio top index",
            "double ratio last pair",
            "double ratio first pair",
            "projective invariance",
            "representative invariance",
        ] {
            ensure!(report.passed.get(name).copied().unwrap_or(0) > 0, "n={n}: {name} never checked");
        }
        let checks: usize = report.passed.values().sum();
        summary.push(format!("n={n}: {} generic tuples, {checks} equalities", trials - report.skipped_degenerate));
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(summary.join("; "))
}

fn fuchsian_eigenvalues() -> Check {
    let m = Matrix::diag(&[Scalar::int(2), Scalar::ratio(1, 2)]);
    for n in 2..=6 {
        let lift = sl2_symmetric_lift(&m, n).map_err(|e| e.to_string())?;
        let data = positive_eigendata(&lift, 256).map_err(|e| e.to_string())?;
        for (k, ev) in data.eigenvalues.iter().enumerate() {
            let expected = Scalar::int(2).powi(n as i32 - 2 * (k as i32 + 1) + 1);
            ensure!(*ev == expected, "n={n} k={}: {ev} != {expected}", k + 1);
        }
        ensure!(data.ratios().iter().all(|r| *r == Scalar::int(4)), "n={n}: ratios {:?}", data.ratios());
    }
    Ok("n=2..6 exact".into())
}

/// Determinant by the Leibniz sum, independent of the library's elimination.
fn leibniz(cols: &[Vec<Rational>]) -> Rational {
    let n = cols.len();
    let mut total = Rational::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(k: usize, perm: &mut Vec<usize>, sign: i32, cols: &[Vec<Rational>], total: &mut Rational) {
        let n = perm.len();
        if k == n {
            let mut term = Rational::from(sign);
            for (j, &i) in perm.iter().enumerate() {
                term *= &cols[j][i];
            }
            *total += term;
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            rec(k + 1, perm, if i == k { sign } else { -sign }, cols, total);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, 1, cols, &mut total);
    total
}

/// Osculating flag of `t -> (1, t, ..., t^(n-1))`, column `k` being the `k`-th
/// derivative over `k!`, built directly from binomials.
fn moment_flag(n: usize, t: &Rational) -> Vec<Vec<Rational>> {
    let binom = |i: usize, k: usize| -> Rational {
        let mut b = Rational::from(1);
        for j in 0..k {
            b = b * Rational::from(i - j) / Rational::from(j + 1);
        }
        b
    };
    (0..n)
        .map(|k| {
            (0..n)
                .map(|i| if i < k { Rational::new() } else { binom(i, k) * Rational::from(t.pow((i - k) as u32)) })
                .collect()
        })
        .collect()
}

fn oracle_wedge(parts: &[(&Vec<Vec<Rational>>, usize)]) -> Rational {
    let cols: Vec<Vec<Rational>> = parts.iter().flat_map(|(f, k)| f[..*k].iter().cloned()).collect();
    leibniz(&cols)
}

fn oracle_triple(
    e: &Vec<Vec<Rational>>,
    f: &Vec<Vec<Rational>>,
    g: &Vec<Vec<Rational>>,
    a: usize,
    b: usize,
    c: usize,
) -> Rational {
    let w = |x, y, z| oracle_wedge(&[(e, x), (f, y), (g, z)]);
    (w(a + 1, b, c - 1) * w(a, b - 1, c + 1) * w(a - 1, b + 1, c))
        / (w(a - 1, b, c + 1) * w(a, b + 1, c - 1) * w(a + 1, b - 1, c))
}

fn oracle_double(
    e: &Vec<Vec<Rational>>,
    f: &Vec<Vec<Rational>>,
    g: &Vec<Vec<Rational>>,
    h: &Vec<Vec<Rational>>,
    a: usize,
) -> Rational {
    let n = e.len();
    let num = oracle_wedge(&[(e, a), (f, n - a - 1), (g, 1)]) * oracle_wedge(&[(e, a - 1), (f, n - a), (h, 1)]);
    let den = oracle_wedge(&[(e, a), (f, n - a - 1), (h, 1)]) * oracle_wedge(&[(e, a - 1), (f, n - a), (g, 1)]);
    -(num / den)
}

fn moment_curve_positivity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut cases = 0;
    for n in 3..=4 {
        for _ in 0..10 {
            let mut ts: Vec<Rational> = Vec::new();
            let mut cur = Rational::from((rng.gen_range(-20..20), rng.gen_range(1..5)));
            for _ in 0..4 {
                ts.push(cur.clone());
                cur += Rational::from((rng.gen_range(1..10), rng.gen_range(1..5)));
            }
            let oracle: Vec<_> = ts.iter().map(|t| moment_flag(n, t)).collect();
            let lib: Vec<Flag> = ts.iter().map(|t| Flag::osculating(n, &Scalar::Exact(t.clone()))).collect();
            for (a, b, c) in triple_indices(n) {
                let o = oracle_triple(&oracle[0], &oracle[1], &oracle[2], a, b, c);
                ensure!(o == 1, "oracle T_{a}{b}{c} = {o} at n={n}");
                let l = triple_ratio(&lib[0], &lib[1], &lib[2], a, b, c).map_err(|e| e.to_string())?;
                ensure!(l == Scalar::one(), "library T_{a}{b}{c} = {l} at n={n}");
            }
            ensure!(is_positive_triple(&lib[0], &lib[1], &lib[2]).unwrap_or(false), "triple not positive at n={n}");
            // t1 < t2 < t3 < t4: the pair (t1, t3) separates t2 from t4.
            let (e, f, g, h) = (0, 2, 1, 3);
            for a in 1..n {
                let o = oracle_double(&oracle[e], &oracle[f], &oracle[g], &oracle[h], a);
                ensure!(o > 0, "oracle D_{a} = {o} at n={n}");
                let l = double_ratio(&lib[e], &lib[f], &lib[g], &lib[h], a).map_err(|err| err.to_string())?;
                ensure!(l == Scalar::Exact(o.clone()), "library D_{a} = {l}, oracle {o}");
            }
            ensure!(
                is_positive_quadruple(&lib[e], &lib[f], &lib[g], &lib[h]).unwrap_or(false),
                "quadruple not positive at n={n}"
            );
            cases += 1;
        }
    }
    Ok(format!("{cases} point sets, n=3,4"))
}

fn closed_leaf_lengths() -> Check {
    let mut count = 0;
    for name in NAMES {
        let f = fixtures::load(name).unwrap();
        for n in 2..=4 {
            let rep = f.fuchsian.symmetric_power(n).map_err(|e| e.to_string())?;
            let coords =
                Invariants::new(&rep, &f.lamination, &f.atlas, 256).coordinates().map_err(|e| e.to_string())?;
            for c in f.lamination.closed_leaves() {
                let eig = lengths(&rep, &f.atlas.closed_leaf_words[&c.id], 256).map_err(|e| e.to_string())?;
                for side in [Side::Left, Side::Right] {
                    for a in 1..n {
                        let p =
                            side_length_product(&coords, &f.lamination, &c.id, side, a).map_err(|e| e.to_string())?;
                        ensure!(p == eig[a - 1], "{name} n={n} {} {side} a={a}: {p} vs {}", c.id, eig[a - 1]);
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{count} side products, all exact"))
}

fn polytope_dimension() -> Check {
    let mut out = Vec::new();
    for name in NAMES {
        let f = fixtures::load(name).unwrap();
        let genus = f.lamination.genus();
        for n in 2..=4 {
            let d = affine_dimension(&f.lamination, n).dimension;
            let expected = 2 * (genus - 1) * (n * n - 1);
            ensure!(d == expected, "{name} n={n}: {d} != {expected}");
            out.push(d.to_string());
        }
    }
    Ok(format!("dimensions {}", out.join(",")))
}

fn relation_residuals() -> Check {
    let mut samples = 0;
    for name in NAMES {
        let f = fixtures::load(name).unwrap();
        for n in 3..=5 {
            let rep = f.fuchsian.symmetric_power(n).map_err(|e| e.to_string())?;
            let coords = full_coordinates(&rep, &f.lamination, &f.atlas, 256).map_err(|e| e.to_string())?;
            let r = global_relation_residual(&coords, &f.lamination).map_err(|e| e.to_string())?;
            ensure!(r.iter().all(Scalar::is_one), "{name} n={n} Fuchsian residual {r:?}");
            for seed in 0..20 {
                let c = sample_interior(&f.lamination, n, seed).map_err(|e| e.to_string())?;
                let r = global_relation_residual(&c, &f.lamination).map_err(|e| e.to_string())?;
                ensure!(r.iter().all(Scalar::is_one), "{name} n={n} seed {seed}: {r:?}");
                samples += 1;
            }
        }
    }
    Ok(format!("Fuchsian lifts and {samples} samples, residual exactly 1"))
}

fn master_round_trip() -> Check {
    let mut out = Vec::new();
    for name in NAMES {
        let start = Instant::now();
        let f = fixtures::load(name).unwrap();
        for n in 2..=3 {
            for seed in 0..10 {
                let coords = sample_interior(&f.lamination, n, seed).map_err(|e| e.to_string())?;
                let rep = reconstruct(&coords, &f.lamination, &f.atlas, 256)
                    .map_err(|e| format!("{name} n={n} seed {seed}: {e}"))?;
                let relator = rep.eval_word(&f.atlas.relator).map_err(|e| e.to_string())?;
                ensure!(relator.is_scalar_multiple_of_identity(None), "{name} n={n} seed {seed}: relator");
                let mut back = full_coordinates(&rep, &f.lamination, &f.atlas, 256).map_err(|e| e.to_string())?;
                back.lengths.clear();
                let dev = back.max_deviation(&coords).ok_or("coordinate keys differ")?;
                ensure!(dev.is_zero(), "{name} n={n} seed {seed}: deviation {dev}");
            }
        }
        let elapsed = start.elapsed();
        ensure!(elapsed < Duration::from_secs(300), "{name} took {elapsed:?}");
        out.push(format!("{name} 20 points in {:.2}s", elapsed.as_secs_f64()));
    }
    Ok(out.join("; "))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_hitchin")).args(args).output().expect("binary runs");
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap_or_default();
    (o.status.code().unwrap_or(-1), err["error"].as_str().unwrap_or_default().to_string())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn error_paths() -> Check {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let d = dir.path();

    // Non-loxodromic and mixed-sign spectra.
    let rotation = Matrix::from_i64(&[&[0, -1], &[1, 0]]);
    ensure!(matches!(positive_eigendata(&rotation, 256), Err(RepError::NotLoxodromic(_))), "rotation accepted");
    let mixed = Matrix::from_i64(&[&[2, 0, 0], &[0, -1, 0], &[0, 0, -3]]);
    ensure!(matches!(positive_eigendata(&mixed, 256), Err(RepError::MixedSigns)), "mixed signs accepted");
    let rot = r#"["0","-1"],["1","0"]"#;
    let rep = format!(r#"{{"n":2,"generators":{{"x1":[{rot}],"x2":[{rot}],"x3":[{rot}],"x4":[{rot}]}}}}"#);
    let p = write(d, "rotation.json", &rep);
    let got = run_cli(&["invariants", "--fixture", "pants", "--rep", &p]);
    ensure!(got == (2, "NotLoxodromic".into()), "rotation: {got:?}");
    let diag = |a: i64, b: i64, c: i64| format!(r#"[["{a}","0","0"],["1","{b}","0"],["0","0","{c}"]]"#);
    let rep = format!(
        r#"{{"n":3,"generators":{{"x1":{},"x2":{},"x3":{},"x4":{}}}}}"#,
        diag(2, -1, -3),
        diag(5, -7, -11),
        diag(13, -17, -19),
        diag(23, -29, -31)
    );
    let p = write(d, "mixed.json", &rep);
    let got = run_cli(&["invariants", "--fixture", "pants", "--rep", &p]);
    ensure!(got == (2, "MixedSigns".into()), "mixed signs: {got:?}");

    // Coordinates off the closed leaf equality.
    let f = fixtures::load("pants").unwrap();
    let mut coords = sample_interior(&f.lamination, 3, 4).map_err(|e| e.to_string())?;
    coords.shears.get_mut("g0").unwrap()[1] = Scalar::ratio(1234, 5);
    ensure!(
        matches!(reconstruct(&coords, &f.lamination, &f.atlas, 256), Err(SynthesisError::MembershipFailed(_))),
        "equality violation accepted by reconstruct"
    );
    let p = write(d, "coords.json", &serde_json::to_string(&coords).unwrap());
    let (code, _) = run_cli(&["check-polytope", "--fixture", "pants", "--coords", &p]);
    ensure!(code == 2, "check-polytope exit {code}");
    let got = run_cli(&["reconstruct", "--fixture", "pants", "--coords", &p]);
    ensure!(got == (2, "MembershipFailed".into()), "reconstruct: {got:?}");

    // One generator path scrambled.
    let [lam, atlas_src, _, _] = fixtures::sources("pants").unwrap();
    let mut atlas: LiftAtlas = serde_json::from_str(atlas_src).unwrap();
    let (p1, p2) = (atlas.generator_paths["x1"].clone(), atlas.generator_paths["x2"].clone());
    atlas.generator_paths.insert("x1".into(), p2);
    atlas.generator_paths.insert("x2".into(), p1);
    let good = sample_interior(&f.lamination, 3, 4).map_err(|e| e.to_string())?;
    ensure!(
        matches!(reconstruct(&good, &f.lamination, &atlas, 256), Err(SynthesisError::RelatorViolation(_))),
        "scrambled atlas accepted"
    );
    let l = write(d, "lam.json", lam);
    let a = write(d, "atlas.json", &serde_json::to_string(&atlas).unwrap());
    let got = run_cli(&["--exact", "roundtrip", "--lamination", &l, "--atlas", &a, "--n", "3"]);
    ensure!(got == (3, "RelatorViolation".into()), "scrambled atlas: {got:?}");

    Ok("NotLoxodromic 2, MixedSigns 2, MembershipFailed 2, RelatorViolation 3".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("exact identity suite", identity_suite),
        ("Fuchsian eigenvalue pattern", fuchsian_eigenvalues),
        ("moment curve positivity", moment_curve_positivity),
        ("closed leaf lengths from spiral products", closed_leaf_lengths),
        ("polytope dimension", polytope_dimension),
        ("global relation residuals", relation_residuals),
        ("master round trip", master_round_trip),
        ("error paths", error_paths),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
