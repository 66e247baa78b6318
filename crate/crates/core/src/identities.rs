//! Randomized exact checks of the ratio identities on generic flag tuples.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::flag::{double_ratio, is_generic, quadruple_ratio, triple_indices, triple_ratio, Flag, FlagError};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Counts of passed checks per identity, degenerate draws that were skipped,
/// and a description of every failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub trials: usize,
    pub skipped_degenerate: usize,
    pub passed: BTreeMap<String, usize>,
    pub failures: Vec<String>,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let rows: Vec<Vec<Scalar>> = (0..n)
            .map(|_| (0..n).map(|_| Scalar::ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect())
            .collect();
        let m = Matrix::from_rows(rows).expect("square");
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Another basis of the same flag: multiply by an invertible upper triangular matrix.
fn rebase(f: &Flag, rng: &mut ChaCha8Rng) -> Flag {
    let n = f.n();
    let mut u = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                let k: i64 = rng.gen_range(1..=5);
                Scalar::int(if rng.gen_bool(0.5) { k } else { -k })
            } else {
                Scalar::int(rng.gen_range(-4..=4))
            };
            u.set(i, j, v);
        }
    }
    Flag::new(f.basis().mul(&u)).expect("invertible")
}

struct Tally<'a> {
    report: &'a mut IdentityReport,
}

impl Tally<'_> {
    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            *self.report.passed.entry(name.to_string()).or_default() += 1;
        } else {
            self.report.failures.push(format!("{name}: {}", detail()));
        }
    }
}

fn check_tuple(n: usize, flags: &[Flag; 4], rng: &mut ChaCha8Rng, tally: &mut Tally) -> Result<(), FlagError> {
    let [e, f, g, h] = flags;
    for (a, b, c) in triple_indices(n) {
        let t = triple_ratio(e, f, g, a, b, c)?;
        let rotated = triple_ratio(f, g, e, b, c, a)?;
        let swapped = triple_ratio(f, e, g, b, a, c)?;
        tally.check("triple ratio rotation", t == rotated, || format!("T_{a}{b}{c}: {t} vs {rotated}"));
        tally.check("triple ratio transposition", &t * &swapped == Scalar::one(), || {
            format!("T_{a}{b}{c}: {t} vs 1/{swapped}")
        });
    }
    for a in 1..n {
        let q = quadruple_ratio(e, f, g, a)?;
        let mut prod = Scalar::one();
        for b in 1..n.saturating_sub(a) {
            prod = prod * triple_ratio(e, f, g, a, b, n - a - b)?;
        }
        tally.check("quadruple ratio product", q == prod, || format!("Q_{a} = {q}, product {prod}"));
    }
    let last = quadruple_ratio(e, f, g, n - 1)?;
    tally.check("quadruple ratio top index", last.is_one(), || format!("Q_{} = {last}", n - 1));
    for a in 1..n {
        let d = double_ratio(e, f, g, h, a)?;
        let swapped_last = double_ratio(e, f, h, g, a)?;
        let swapped_first = double_ratio(f, e, g, h, n - a)?;
        tally.check("double ratio last pair", &d * &swapped_last == Scalar::one(), || {
            format!("D_{a}: {d}, {swapped_last}")
        });
        tally.check("double ratio first pair", &d * &swapped_first == Scalar::one(), || {
            format!("D_{a}: {d}, {swapped_first}")
        });
    }
    let m = random_matrix(n, rng);
    let moved: Vec<Flag> = flags.iter().map(|x| x.transform(&m)).collect();
    let rebased: Vec<Flag> = flags.iter().map(|x| rebase(x, rng)).collect();
    for (label, other) in [("projective invariance", &moved), ("representative invariance", &rebased)] {
        for (a, b, c) in triple_indices(n) {
            let t = triple_ratio(e, f, g, a, b, c)?;
            let u = triple_ratio(&other[0], &other[1], &other[2], a, b, c)?;
            tally.check(label, t == u, || format!("T_{a}{b}{c}: {t} vs {u}"));
        }
        for a in 1..n {
            let d = double_ratio(e, f, g, h, a)?;
            let u = double_ratio(&other[0], &other[1], &other[2], &other[3], a)?;
            tally.check(label, d == u, || format!("D_{a}: {d} vs {u}"));
        }
    }
    Ok(())
}

/// A deliberately degenerate quadruple: `G` shares its line with `E`.
fn degenerate(n: usize, rng: &mut ChaCha8Rng) -> [Flag; 4] {
    let e = Flag::new(random_matrix(n, rng)).expect("invertible");
    let mut cols: Vec<Vec<Scalar>> = (0..n).map(|j| random_matrix(n, rng).column(j)).collect();
    cols[0] = e.column(0);
    let g = Flag::from_columns(&cols).unwrap_or_else(|_| e.clone());
    [e, Flag::opposite(n), g, Flag::standard(n)]
}

/// Runs `trials` random generic tuples of four exact flags in `R^n`. When
/// `degenerate_every` is set, every k-th draw is replaced by a degenerate
/// tuple, which must be detected and skipped.
pub fn check_identities(n: usize, trials: usize, seed: u64, degenerate_every: Option<usize>) -> IdentityReport {
    let mut report = IdentityReport { n, trials, skipped_degenerate: 0, passed: BTreeMap::new(), failures: Vec::new() };
    if n < 2 {
        report.failures.push(format!("n = {n} is below 2"));
        return report;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let flags: [Flag; 4] = if degenerate_every.is_some_and(|k| k > 0 && trial % k == 0) {
            degenerate(n, &mut rng)
        } else {
            std::array::from_fn(|_| Flag::new(random_matrix(n, &mut rng)).expect("invertible"))
        };
        let refs: Vec<&Flag> = flags.iter().collect();
        if !is_generic(&refs).unwrap_or(false) {
            report.skipped_degenerate += 1;
            continue;
        }
        let mut tally = Tally { report: &mut report };
        if let Err(e) = check_tuple(n, &flags, &mut rng, &mut tally) {
            report.failures.push(format!("trial {trial}: {e}"));
        }
    }
    report
}
