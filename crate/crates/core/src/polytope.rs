//! The closed leaf equalities and inequalities on exponentiated coordinates,
//! written as integer exponent vectors: a row `e` stands for the monomial
//! `prod x_i^(e_i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer};
use serde::Serialize;

use crate::coords::{rotate_to_base, CoordinateVector, TripleKey};
use crate::flag::triple_indices;
use crate::lamination::{Direction, End, Lamination, Side};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("no interior point found after {0} draws")]
    SamplingFailed(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("incomplete coordinates: {0}")]
    Incomplete(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    /// `exp tau_abc(T, v0)`.
    Tau { triangle: usize, key: TripleKey },
    /// `exp sigma_a` of an infinite leaf.
    Shear { leaf: usize, a: usize },
    /// `exp sigma_a` of a closed leaf.
    ClosedShear { leaf: usize, a: usize },
}

#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    n: usize,
    variables: Vec<Variable>,
    keys: Vec<TripleKey>,
    triangles: usize,
    /// `(closed leaf, a, right - left)`.
    equalities: Vec<(usize, usize, Vec<i64>)>,
    /// `(closed leaf, a, right)`.
    inequalities: Vec<(usize, usize, Vec<i64>)>,
}

impl ConstraintSystem {
    pub fn new(lam: &Lamination, n: usize) -> ConstraintSystem {
        let keys = triple_indices(n);
        let mut variables = Vec::new();
        for t in 0..lam.triangles().len() {
            for &key in &keys {
                variables.push(Variable::Tau { triangle: t, key });
            }
        }
        for leaf in 0..lam.infinite_leaves().len() {
            for a in 1..n {
                variables.push(Variable::Shear { leaf, a });
            }
        }
        for leaf in 0..lam.closed_leaves().len() {
            for a in 1..n {
                variables.push(Variable::ClosedShear { leaf, a });
            }
        }
        let mut sys = ConstraintSystem {
            n,
            variables,
            keys,
            triangles: lam.triangles().len(),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        };
        for ci in 0..lam.closed_leaves().len() {
            for a in 1..n {
                let right = sys.side_exponents(lam, ci, Side::Right, a);
                let left = sys.side_exponents(lam, ci, Side::Left, a);
                let diff = right.iter().zip(&left).map(|(r, l)| r - l).collect();
                sys.equalities.push((ci, a, diff));
                sys.inequalities.push((ci, a, right));
            }
        }
        sys
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn equality_rows(&self) -> impl Iterator<Item = &[i64]> {
        self.equalities.iter().map(|(_, _, r)| r.as_slice())
    }

    pub fn inequality_rows(&self) -> impl Iterator<Item = &[i64]> {
        self.inequalities.iter().map(|(_, _, r)| r.as_slice())
    }

    fn tau_var(&self, triangle: usize, vertex: usize, key: TripleKey) -> usize {
        let base = rotate_to_base(vertex, key);
        let pos = self.keys.iter().position(|k| *k == base).expect("valid index triple");
        triangle * self.keys.len() + pos
    }

    fn shear_var(&self, leaf: usize, a: usize) -> usize {
        self.triangles * self.keys.len() + leaf * (self.n - 1) + (a - 1)
    }

    /// Exponents of `exp L_a` on one side of a closed leaf.
    pub fn side_exponents(&self, lam: &Lamination, closed_leaf: usize, side: Side, a: usize) -> Vec<i64> {
        let n = self.n;
        let mut e = vec![0i64; self.variables.len()];
        let direction = lam.direction(closed_leaf, side);
        let sign = match (side, direction) {
            (Side::Right, Direction::With) | (Side::Left, Direction::Against) => 1,
            _ => -1,
        };
        // With the spiraling: sigma-bar_a and tau_abc with b + c = n - a.
        // Against it: sigma-bar_(n-a) and tau_(n-a)bc with b + c = a.
        let (shear_index, first) = match direction {
            Direction::With => (a, a),
            Direction::Against => (n - a, n - a),
        };
        for step in lam.spiral_steps(closed_leaf, side).expect("validated lamination") {
            let idx = if step.leaf_end == End::Positive { shear_index } else { n - shear_index };
            e[self.shear_var(step.leaf, idx)] += sign;
            for b in 1..n - first {
                let c = n - first - b;
                e[self.tau_var(step.triangle, step.vertex, (first, b, c))] += sign;
            }
        }
        e
    }

    /// Coordinate values in variable order.
    pub fn values(&self, coords: &CoordinateVector, lam: &Lamination) -> Result<Vec<Scalar>, PolytopeError> {
        if coords.n != self.n {
            return Err(PolytopeError::Incomplete(format!("coordinates have n = {}, expected {}", coords.n, self.n)));
        }
        coords.check_complete(lam).map_err(PolytopeError::Incomplete)?;
        Ok(self
            .variables
            .iter()
            .map(|v| match *v {
                Variable::Tau { triangle, key } => coords.triangles[&lam.triangles()[triangle].id][&key].clone(),
                Variable::Shear { leaf, a } => coords.shears[&lam.infinite_leaves()[leaf].id][a - 1].clone(),
                Variable::ClosedShear { leaf, a } => coords.shears[&lam.closed_leaves()[leaf].id][a - 1].clone(),
            })
            .collect())
    }

    fn to_coordinates(&self, lam: &Lamination, values: &[Scalar]) -> CoordinateVector {
        let mut out = CoordinateVector::new(self.n, lam.name());
        for (v, x) in self.variables.iter().zip(values) {
            match *v {
                Variable::Tau { triangle, key } => {
                    out.triangles.entry(lam.triangles()[triangle].id.clone()).or_default().insert(key, x.clone());
                }
                Variable::Shear { leaf, .. } => {
                    out.shears.entry(lam.infinite_leaves()[leaf].id.clone()).or_default().push(x.clone());
                }
                Variable::ClosedShear { leaf, .. } => {
                    out.shears.entry(lam.closed_leaves()[leaf].id.clone()).or_default().push(x.clone());
                }
            }
        }
        for t in lam.triangles() {
            out.triangles.entry(t.id.clone()).or_default();
        }
        out
    }
}

/// `prod values_i^(e_i)`.
pub fn monomial(values: &[Scalar], exponents: &[i64]) -> Scalar {
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    for (x, &e) in values.iter().zip(exponents) {
        if e > 0 {
            num = num * x.powi(e as i32);
        } else if e < 0 {
            den = den * x.powi((-e) as i32);
        }
    }
    num / den
}

/// `exp L_a` on one side of a closed leaf.
pub fn side_length_product(
    coords: &CoordinateVector,
    lam: &Lamination,
    closed_leaf: &str,
    side: Side,
    a: usize,
) -> Result<Scalar, PolytopeError> {
    let ci = lam.closed_leaf_index(closed_leaf).map_err(|e| PolytopeError::IndexOutOfRange(e.to_string()))?;
    if a == 0 || a >= coords.n {
        return Err(PolytopeError::IndexOutOfRange(format!("a = {a} for n = {}", coords.n)));
    }
    let sys = ConstraintSystem::new(lam, coords.n);
    let values = sys.values(coords, lam)?;
    Ok(monomial(&values, &sys.side_exponents(lam, ci, side, a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Equality,
    Inequality,
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    pub kind: RowKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_leaf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub pass: bool,
    pub violations: Vec<RowViolation>,
}

fn tolerance(prec: u32) -> Float {
    Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2))
}

/// Checks every closed leaf equality (`L_a^right = L_a^left`, exactly for
/// exact input and to relative `2^(-precision/2)` otherwise) and inequality
/// (`exp L_a^right > 1`).
pub fn check_membership(coords: &CoordinateVector, lam: &Lamination, precision: u32) -> MembershipReport {
    let sys = ConstraintSystem::new(lam, coords.n);
    let values = match sys.values(coords, lam) {
        Ok(v) => v,
        Err(e) => {
            return MembershipReport {
                pass: false,
                violations: vec![RowViolation {
                    kind: RowKind::Incomplete,
                    closed_leaf: None,
                    a: None,
                    detail: e.to_string(),
                }],
            }
        }
    };
    let tol = tolerance(precision);
    let mut violations = Vec::new();
    for ci in 0..lam.closed_leaves().len() {
        let id = &lam.closed_leaves()[ci].id;
        for a in 1..coords.n {
            let right = monomial(&values, &sys.side_exponents(lam, ci, Side::Right, a));
            let left = monomial(&values, &sys.side_exponents(lam, ci, Side::Left, a));
            let equal = if right.is_exact() && left.is_exact() {
                right == left
            } else {
                (&right / &left - Scalar::one()).is_negligible(&tol)
            };
            if !equal {
                violations.push(RowViolation {
                    kind: RowKind::Equality,
                    closed_leaf: Some(id.clone()),
                    a: Some(a),
                    detail: format!("exp L right = {right}, left = {left}"),
                });
            }
            if right <= Scalar::one() {
                violations.push(RowViolation {
                    kind: RowKind::Inequality,
                    closed_leaf: Some(id.clone()),
                    a: Some(a),
                    detail: format!("exp L right = {right} is not above 1"),
                });
            }
        }
    }
    MembershipReport { pass: violations.is_empty(), violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub free: usize,
    pub rank: usize,
    pub dimension: usize,
}

/// Free variables minus the exact rank of the equality rows.
pub fn affine_dimension(lam: &Lamination, n: usize) -> DimensionReport {
    let sys = ConstraintSystem::new(lam, n);
    let free = sys.variables.len();
    let rows: Vec<Vec<Scalar>> = sys.equality_rows().map(|r| r.iter().map(|&x| Scalar::int(x)).collect()).collect();
    let rank = if rows.is_empty() { 0 } else { Matrix::from_rows(rows).expect("rectangular").rank() };
    DimensionReport { free, rank, dimension: free - rank }
}

/// `prod over triangles and vertices of (prod_(b+c=n-a) exp tau_abc) / (prod_(b+c=a) exp tau_(n-a)bc)`.
pub fn global_relation_residual_at(
    coords: &CoordinateVector,
    lam: &Lamination,
    a: usize,
) -> Result<Scalar, PolytopeError> {
    let n = coords.n;
    if a == 0 || a >= n {
        return Err(PolytopeError::IndexOutOfRange(format!("a = {a} for n = {n}")));
    }
    let mut num = Scalar::one();
    let mut den = Scalar::one();
    for t in lam.triangles() {
        for v in 0..3 {
            let get = |key: TripleKey| {
                coords
                    .tau(&t.id, v, key)
                    .cloned()
                    .ok_or_else(|| PolytopeError::Incomplete(format!("triangle {}", t.id)))
            };
            for b in 1..n - a {
                num = num * get((a, b, n - a - b))?;
            }
            for b in 1..a {
                den = den * get((n - a, b, a - b))?;
            }
        }
    }
    Ok(num / den)
}

/// Residuals for `a = 1, ..., floor((n-1)/2)`.
pub fn global_relation_residual(coords: &CoordinateVector, lam: &Lamination) -> Result<Vec<Scalar>, PolytopeError> {
    (1..=(coords.n - 1) / 2).map(|a| global_relation_residual_at(coords, lam, a)).collect()
}

/// Reduced equality rows: each entry is `(pivot, row)` where `row[pivot]` is
/// the only pivot column in the row.
fn pivot_rows(sys: &ConstraintSystem) -> Vec<(usize, Vec<Integer>)> {
    let mut rows: Vec<Vec<Integer>> =
        sys.equality_rows().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let class = |v: &Variable| match v {
        Variable::Shear { .. } => 0,
        Variable::Tau { .. } => 1,
        Variable::ClosedShear { .. } => 2,
    };
    for r in 0..rows.len() {
        let nonzero: Vec<usize> = (0..rows[r].len()).filter(|&j| rows[r][j] != 0).collect();
        let Some(&p) = nonzero.iter().min_by_key(|&&j| {
            let unit = if rows[r][j].clone().abs() == 1 { 0 } else { 1 };
            (unit, class(&sys.variables[j]), rows[r][j].clone().abs(), j)
        }) else {
            continue;
        };
        let pivot_row = rows[r].clone();
        let d = pivot_row[p].clone();
        for (s, row) in rows.iter_mut().enumerate() {
            if s == r || row[p] == 0 {
                continue;
            }
            let f = row[p].clone();
            for j in 0..row.len() {
                row[j] = Integer::from(&d * &row[j]) - Integer::from(&f * &pivot_row[j]);
            }
            let g = row.iter().fold(Integer::new(), |acc, x| acc.gcd(x));
            if g > 1 {
                for x in row.iter_mut() {
                    *x /= &g;
                }
            }
        }
        pivots.push((p, r));
    }
    pivots.into_iter().map(|(p, r)| (p, rows[r].clone())).collect()
}

fn draw_rational(rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let p: i64 = rng.gen_range(1..=9);
        let q: i64 = rng.gen_range(1..=9);
        if 3 * p >= q && p <= 3 * q {
            return Scalar::ratio(p, q);
        }
    }
}

/// One point satisfying every equality, with all free coordinates drawn in
/// `[1/3, 3]` (raised to a common power when some pivot is not a unit).
fn draw_equality_point(sys: &ConstraintSystem, reduced: &[(usize, Vec<Integer>)], rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    let power = reduced.iter().fold(Integer::from(1), |acc, (p, row)| acc.lcm(&row[*p].clone().abs()));
    let power = power.to_i32().expect("small pivot");
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; sys.variables.len()];
        for (p, _) in reduced {
            v[*p] = true;
        }
        v
    };
    let base: Vec<Scalar> =
        (0..sys.variables.len()).map(|j| if is_pivot[j] { Scalar::one() } else { draw_rational(rng) }).collect();
    let mut values: Vec<Scalar> = base.iter().map(|x| x.powi(power)).collect();
    for (p, row) in reduced {
        // d log x_p + sum c_j log x_j = 0 with x_j = y_j^power.
        let d = row[*p].to_i64().expect("small pivot");
        let exps: Vec<i64> = row
            .iter()
            .enumerate()
            .map(|(j, c)| if j == *p { 0 } else { -c.to_i64().expect("small entry") * power as i64 / d })
            .collect();
        values[*p] = monomial(&base, &exps);
    }
    values
}

fn interior(sys: &ConstraintSystem, values: &[Scalar]) -> bool {
    sys.inequality_rows().all(|r| monomial(values, r) > Scalar::one())
}

const REJECTION_ROUNDS: usize = 64;
const SHIFT_LIMIT: usize = 64;

/// A rational point of the polytope, deterministic in `seed`.
///
/// Free coordinates are drawn in `[1/3, 3]` and the equalities solved for
/// pivot coordinates (infinite leaf shears first). If no draw is interior
/// after a fixed number of rounds, the last draw is pushed inside along a
/// direction with all triangle invariants 1 and shears independent of `a`.
pub fn sample_interior(lam: &Lamination, n: usize, seed: u64) -> Result<CoordinateVector, PolytopeError> {
    let sys = ConstraintSystem::new(lam, n);
    let reduced = pivot_rows(&sys);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = Vec::new();
    for _ in 0..REJECTION_ROUNDS {
        last = draw_equality_point(&sys, &reduced, &mut rng);
        if interior(&sys, &last) {
            return Ok(sys.to_coordinates(lam, &last));
        }
    }
    let direction = uniform_direction(lam, &sys, &mut rng)?;
    let mut shifted = last;
    for _ in 0..SHIFT_LIMIT {
        for (x, d) in shifted.iter_mut().zip(&direction) {
            *x = &*x * d;
        }
        if interior(&sys, &shifted) {
            return Ok(sys.to_coordinates(lam, &shifted));
        }
    }
    Err(PolytopeError::SamplingFailed(REJECTION_ROUNDS + SHIFT_LIMIT))
}

/// A polytope point with every triangle invariant 1 and each shear
/// independent of `a`, found at the level `n = 2` and repeated across indices.
fn uniform_direction(
    lam: &Lamination,
    sys: &ConstraintSystem,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Scalar>, PolytopeError> {
    let small = ConstraintSystem::new(lam, 2);
    let reduced = pivot_rows(&small);
    const ROUNDS: usize = 4096;
    for _ in 0..ROUNDS {
        let v = draw_equality_point(&small, &reduced, rng);
        if interior(&small, &v) {
            return Ok(sys
                .variables
                .iter()
                .map(|var| match *var {
                    Variable::Tau { .. } | Variable::ClosedShear { .. } => Scalar::one(),
                    Variable::Shear { leaf, .. } => v[small.shear_var(leaf, 1)].clone(),
                })
                .collect());
        }
    }
    Err(PolytopeError::SamplingFailed(ROUNDS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn monomials_handle_negative_exponents() {
        let v = [Scalar::int(2), Scalar::ratio(1, 3), Scalar::int(5)];
        assert_eq!(monomial(&v, &[3, -2, 0]), Scalar::int(72));
        assert_eq!(monomial(&v, &[]), Scalar::one());
    }

    #[test]
    fn length_index_out_of_range() {
        let f = fixtures::load("single-leaf").unwrap();
        for a in [0, 2] {
            let err = side_length_product(&f.shears, &f.lamination, "c", Side::Left, a).unwrap_err();
            assert!(matches!(err, PolytopeError::IndexOutOfRange(_)));
        }
        let oracle = crate::invariants::lengths(&f.fuchsian, &f.atlas.closed_leaf_words["c"], 256).unwrap();
        for side in [Side::Left, Side::Right] {
            assert_eq!(side_length_product(&f.shears, &f.lamination, "c", side, 1).unwrap(), oracle[0]);
        }
    }

    #[test]
    fn missing_values_are_incomplete() {
        let f = fixtures::load("pants").unwrap();
        let mut coords = f.shears.clone();
        coords.shears.remove("c1");
        let report = check_membership(&coords, &f.lamination, 256);
        assert!(!report.pass);
        assert!(report.violations.iter().all(|v| v.kind == RowKind::Incomplete));
    }
}
