//! Flags in R^n, genericity, and the triple, quadruple and double ratios.
//!
//! A wedge `e^(a) ^ f^(b) ^ g^(c)` is the determinant of the matrix whose
//! columns are the first `a` basis vectors of `E`, then the first `b` of `F`,
//! then the first `c` of `G`. Every ratio uses that one convention, so the signs
//! of individual wedges cancel out.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::{Scalar, DEFAULT_PRECISION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlagError {
    #[error("flags have different dimensions")]
    DimensionMismatch,
    #[error("flag basis is not invertible")]
    Singular,
    #[error("flag tuple is not generic")]
    NotGeneric,
    #[error("ratio index out of range: {0}")]
    IndexOutOfRange(String),
}

/// A full flag, stored as an ordered basis whose first `a` columns span `F^(a)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "FlagRepr", into = "FlagRepr")]
pub struct Flag {
    basis: Matrix,
}

#[derive(Serialize, Deserialize)]
struct FlagRepr {
    n: usize,
    basis: Matrix,
}

impl TryFrom<FlagRepr> for Flag {
    type Error = String;
    fn try_from(r: FlagRepr) -> Result<Flag, String> {
        if r.basis.rows() != r.n || r.basis.cols() != r.n {
            return Err(format!("flag basis must be {0}x{0}", r.n));
        }
        Flag::new(r.basis).map_err(|e| e.to_string())
    }
}

impl From<Flag> for FlagRepr {
    fn from(f: Flag) -> FlagRepr {
        FlagRepr { n: f.n(), basis: f.basis }
    }
}

impl Flag {
    pub fn new(basis: Matrix) -> Result<Flag, FlagError> {
        if !basis.is_square() || basis.rows() < 2 {
            return Err(FlagError::DimensionMismatch);
        }
        let d = basis.det();
        let singular = if d.is_exact() { d.is_zero() } else { !nonnegligible_wedge(&d, &basis) };
        if singular {
            return Err(FlagError::Singular);
        }
        Ok(Flag { basis })
    }

    pub fn from_columns(cols: &[Vec<Scalar>]) -> Result<Flag, FlagError> {
        Flag::new(Matrix::from_columns(cols).map_err(|_| FlagError::DimensionMismatch)?)
    }

    /// `E^(a) = span(e_1, ..., e_a)`.
    pub fn standard(n: usize) -> Flag {
        Flag { basis: Matrix::identity(n) }
    }

    /// `F^(a) = span(e_n, ..., e_(n-a+1))`, the flag opposite to [`Flag::standard`].
    pub fn opposite(n: usize) -> Flag {
        let cols: Vec<Vec<Scalar>> = (0..n)
            .map(|j| {
                let mut c = vec![Scalar::zero(); n];
                c[n - 1 - j] = Scalar::one();
                c
            })
            .collect();
        Flag { basis: Matrix::from_columns(&cols).unwrap() }
    }

    /// Osculating flag of the moment curve `t -> (1, t, ..., t^(n-1))`:
    /// column `k` is the `k`-th derivative divided by `k!`.
    pub fn osculating(n: usize, t: &Scalar) -> Flag {
        let mut m = Matrix::zeros(n, n);
        for k in 0..n {
            let mut binom = Scalar::one();
            for i in k..n {
                // binom = C(i, k), updated incrementally
                if i > k {
                    binom = binom * Scalar::int(i as i64) / Scalar::int((i - k) as i64);
                }
                m.set(i, k, &binom * &t.powi((i - k) as i32));
            }
        }
        Flag { basis: m }
    }

    /// The osculating flag of the moment curve at infinity.
    pub fn osculating_at_infinity(n: usize) -> Flag {
        Flag::opposite(n)
    }

    pub fn n(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        self.basis.column(j)
    }

    pub fn is_exact(&self) -> bool {
        self.basis.is_exact()
    }

    pub fn transform(&self, m: &Matrix) -> Flag {
        Flag { basis: m.mul(&self.basis) }
    }

    pub fn to_float(&self, prec: u32) -> Flag {
        Flag { basis: self.basis.to_float(prec) }
    }

    /// Same nested subspaces, possibly different bases.
    pub fn same_flag(&self, other: &Flag) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let n = self.n();
        for a in 1..n {
            let mut cols: Vec<Vec<Scalar>> = (0..a).map(|j| self.column(j)).collect();
            cols.extend((0..a).map(|j| other.column(j)));
            let m = Matrix::from_columns(&cols).unwrap();
            if m.rank() != a {
                return false;
            }
        }
        true
    }
}

fn column_norm(col: &[Scalar], prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 0);
    for x in col {
        let f = x.to_float(prec);
        acc += Float::with_val(prec, &f * &f);
    }
    acc.sqrt()
}

/// Float genericity test: `|det| > 2^(-prec/4)` relative to the product of
/// column norms.
fn nonnegligible_wedge(d: &Scalar, m: &Matrix) -> bool {
    let prec = m.precision().or(d.precision()).unwrap_or(DEFAULT_PRECISION);
    let mut scale = Float::with_val(prec, 1);
    for j in 0..m.cols() {
        scale *= column_norm(&m.column(j), prec);
    }
    let tol = scale * Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 4));
    d.to_float(prec).abs() > tol
}

fn check_dims(flags: &[&Flag]) -> Result<usize, FlagError> {
    let n = flags[0].n();
    if flags.iter().any(|f| f.n() != n) {
        return Err(FlagError::DimensionMismatch);
    }
    Ok(n)
}

fn assemble(parts: &[(&Flag, usize)]) -> Matrix {
    let mut cols = Vec::new();
    for (f, k) in parts {
        for j in 0..*k {
            cols.push(f.column(j));
        }
    }
    Matrix::from_columns(&cols).expect("equal column lengths")
}

/// Raw wedge product `f1^(k1) ^ f2^(k2) ^ ...` with `sum k = n`.
pub fn wedge(parts: &[(&Flag, usize)]) -> Scalar {
    assemble(parts).det()
}

/// Wedge product that fails with `NotGeneric` when it vanishes.
fn wedge_nonzero(parts: &[(&Flag, usize)]) -> Result<Scalar, FlagError> {
    let m = assemble(parts);
    let d = m.det();
    let ok = if d.is_exact() { !d.is_zero() } else { nonnegligible_wedge(&d, &m) };
    if ok {
        Ok(d)
    } else {
        Err(FlagError::NotGeneric)
    }
}

pub fn triple_ratio(e: &Flag, f: &Flag, g: &Flag, a: usize, b: usize, c: usize) -> Result<Scalar, FlagError> {
    let n = check_dims(&[e, f, g])?;
    if a == 0 || b == 0 || c == 0 || a + b + c != n {
        return Err(FlagError::IndexOutOfRange(format!("({a},{b},{c}) for n = {n}")));
    }
    let w = |x: usize, y: usize, z: usize| wedge_nonzero(&[(e, x), (f, y), (g, z)]);
    let num = w(a + 1, b, c - 1)? * w(a, b - 1, c + 1)? * w(a - 1, b + 1, c)?;
    let den = w(a - 1, b, c + 1)? * w(a, b + 1, c - 1)? * w(a + 1, b - 1, c)?;
    Ok(num / den)
}

pub fn quadruple_ratio(e: &Flag, f: &Flag, g: &Flag, a: usize) -> Result<Scalar, FlagError> {
    let n = check_dims(&[e, f, g])?;
    if a == 0 || a >= n {
        return Err(FlagError::IndexOutOfRange(format!("a = {a} for n = {n}")));
    }
    let w = |x: usize, y: usize, z: usize| wedge_nonzero(&[(e, x), (f, y), (g, z)]);
    let num = w(a - 1, n - a, 1)? * w(a, 1, n - a - 1)? * w(a + 1, n - a - 1, 0)? * w(a, 0, n - a)?;
    let den = w(a, n - a - 1, 1)? * w(a - 1, 1, n - a)? * w(a + 1, 0, n - a - 1)? * w(a, n - a, 0)?;
    Ok(num / den)
}

/// The signed double ratio `D_a(E, F, G, G')`.
pub fn double_ratio(e: &Flag, f: &Flag, g: &Flag, g2: &Flag, a: usize) -> Result<Scalar, FlagError> {
    let n = check_dims(&[e, f, g, g2])?;
    if a == 0 || a >= n {
        return Err(FlagError::IndexOutOfRange(format!("a = {a} for n = {n}")));
    }
    let n1 = wedge_nonzero(&[(e, a), (f, n - a - 1), (g, 1)])?;
    let d1 = wedge_nonzero(&[(e, a), (f, n - a - 1), (g2, 1)])?;
    let n2 = wedge_nonzero(&[(e, a - 1), (f, n - a), (g2, 1)])?;
    let d2 = wedge_nonzero(&[(e, a - 1), (f, n - a), (g, 1)])?;
    Ok(-(n1 * n2) / (d1 * d2))
}

/// All compositions of `n` into `parts` nonnegative summands.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every wedge `E1^(a1) ^ ... ^ Ek^(ak)` with `sum a_i = n` is nonzero.
pub fn is_generic(flags: &[&Flag]) -> Result<bool, FlagError> {
    if flags.len() < 2 || flags.len() > 4 {
        return Err(FlagError::IndexOutOfRange(format!("{} flags", flags.len())));
    }
    let n = check_dims(flags)?;
    for comp in compositions(n, flags.len()) {
        let parts: Vec<(&Flag, usize)> = flags.iter().copied().zip(comp).collect();
        if wedge_nonzero(&parts).is_err() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All index triples `(a, b, c)` with `a, b, c >= 1` and `a + b + c = n`, in
/// lexicographic order.
pub fn triple_indices(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 1..n {
        for b in 1..n {
            if a + b < n {
                out.push((a, b, n - a - b));
            }
        }
    }
    out
}

pub fn is_positive_triple(e: &Flag, f: &Flag, g: &Flag) -> Result<bool, FlagError> {
    if !is_generic(&[e, f, g])? {
        return Ok(false);
    }
    for (a, b, c) in triple_indices(e.n()) {
        if !triple_ratio(e, f, g, a, b, c)?.is_positive() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_positive_quadruple(e: &Flag, f: &Flag, g: &Flag, g2: &Flag) -> Result<bool, FlagError> {
    if !is_generic(&[e, f, g, g2])? {
        return Ok(false);
    }
    if !is_positive_triple(e, f, g)? || !is_positive_triple(e, f, g2)? {
        return Ok(false);
    }
    for a in 1..e.n() {
        if !double_ratio(e, f, g, g2, a)?.is_positive() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Positivity of a triple or quadruple of flags.
pub fn is_positive(flags: &[&Flag]) -> Result<bool, FlagError> {
    match flags {
        [e, f, g] => is_positive_triple(e, f, g),
        [e, f, g, h] => is_positive_quadruple(e, f, g, h),
        _ => Err(FlagError::IndexOutOfRange(format!("{} flags", flags.len()))),
    }
}

/// For a generic pair `(E, F)`, vectors `v_1, ..., v_n` with `v_a` spanning the
/// line `E^(a) ∩ F^(n-a+1)`. Any such basis adapts to both flags at once.
pub fn adapted_basis(e: &Flag, f: &Flag) -> Result<Vec<Vec<Scalar>>, FlagError> {
    let n = check_dims(&[e, f])?;
    let mut out = Vec::with_capacity(n);
    for a in 1..=n {
        let mut cols: Vec<Vec<Scalar>> = (0..a).map(|j| e.column(j)).collect();
        cols.extend((0..n - a + 1).map(|j| f.column(j)));
        let ns = Matrix::from_columns(&cols).unwrap().nullspace();
        if ns.len() != 1 {
            return Err(FlagError::NotGeneric);
        }
        let coeffs = &ns[0];
        let mut v = vec![Scalar::zero(); n];
        for (j, c) in coeffs.iter().take(a).enumerate() {
            if c.is_zero() {
                continue;
            }
            let col = e.column(j);
            for i in 0..n {
                v[i] = &v[i] + &(c * &col[i]);
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// Coordinates of `v` in the basis given by the columns `basis`.
pub fn coordinates(basis: &[Vec<Scalar>], v: &[Scalar]) -> Result<Vec<Scalar>, FlagError> {
    Matrix::from_columns(basis).map_err(|_| FlagError::DimensionMismatch)?.solve(v).map_err(|_| FlagError::Singular)
}

/// The unique projective map sending `E0 -> E1`, `F0 -> F1` and the line
/// spanned by `g0` to the line spanned by `g1`, for generic pairs and lines in
/// general position with respect to them.
pub fn frame_map(
    e0: &Flag,
    f0: &Flag,
    g0: &[Scalar],
    e1: &Flag,
    f1: &Flag,
    g1: &[Scalar],
) -> Result<Matrix, FlagError> {
    let src = adapted_basis(e0, f0)?;
    let dst = adapted_basis(e1, f1)?;
    let gs = coordinates(&src, g0)?;
    let gd = coordinates(&dst, g1)?;
    let n = src.len();
    let mut cols = Vec::with_capacity(n);
    for a in 0..n {
        if gs[a].is_zero() || gd[a].is_zero() {
            return Err(FlagError::NotGeneric);
        }
        let s = &gd[a] / &gs[a];
        cols.push(dst[a].iter().map(|x| x * &s).collect::<Vec<_>>());
    }
    let image = Matrix::from_columns(&cols).unwrap();
    let source = Matrix::from_columns(&src).unwrap();
    let inv = source.inverse().map_err(|_| FlagError::Singular)?;
    Ok(image.mul(&inv))
}
