//! Surface-group representations given by generator matrices, word
//! evaluation, and the positive eigendata of loxodromic elements.
//!
//! Matrices are projective representatives: any nonzero rescaling describes the
//! same element. Keeping representatives with positive determinant (instead of
//! forcing determinant one) lets reconstructed representations stay rational.

use std::collections::BTreeMap;
use std::fmt;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::eigen::real_eigen;
use crate::flag::Flag;
use crate::linalg::{LinalgError, Matrix};
use crate::scalar::{Scalar, DEFAULT_PRECISION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("malformed word {0:?}")]
    MalformedWord(String),
    #[error("matrix has the wrong shape: {0}")]
    DimensionMismatch(String),
    #[error("matrix for {0:?} is singular")]
    Singular(String),
    #[error("matrix for {0:?} has negative determinant")]
    DeterminantSign(String),
    #[error("determinant is not 1")]
    DeterminantNotOne,
    #[error("not loxodromic: {0}")]
    NotLoxodromic(String),
    #[error("eigenvalues have mixed signs")]
    MixedSigns,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: String,
    pub inverse: bool,
}

impl Letter {
    pub fn inverted(&self) -> Letter {
        Letter { generator: self.generator.clone(), inverse: !self.inverse }
    }
}

/// A word in the generators and their inverses, written as space-separated
/// letters with `^-1` marking inverses, e.g. `"a b^-1 a^-1 b"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letter(generator: &str, inverse: bool) -> Word {
        Word(vec![Letter { generator: generator.to_string(), inverse }])
    }

    pub fn parse(s: &str) -> Result<Word, RepError> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (name, inverse) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            if name.is_empty() || name.contains('^') {
                return Err(RepError::MalformedWord(s.to_string()));
            }
            letters.push(Letter { generator: name.to_string(), inverse });
        }
        Ok(Word(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(Letter::inverted).collect())
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.extend(other.0.iter().cloned());
        Word(out).reduced()
    }

    pub fn conjugate_by(&self, h: &Word) -> Word {
        h.concat(self).concat(&h.inverse())
    }

    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for l in &self.0 {
            if out.last().is_some_and(|p| p.generator == l.generator && p.inverse != l.inverse) {
                out.pop();
            } else {
                out.push(l.clone());
            }
        }
        Word(out)
    }

    /// Free and cyclic reduction.
    pub fn cyclically_reduced(&self) -> Word {
        let mut w = self.reduced().0;
        while w.len() >= 2 {
            let (f, l) = (&w[0], &w[w.len() - 1]);
            if f.generator == l.generator && f.inverse != l.inverse {
                w.remove(0);
                w.pop();
            } else {
                break;
            }
        }
        Word(w)
    }

    pub fn generators(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|l| l.generator.as_str())
    }

    /// Replaces every occurrence of `generator` by `replacement` (and its
    /// inverse by the inverse word).
    pub fn substitute(&self, generator: &str, replacement: &Word) -> Word {
        let inv = replacement.inverse();
        let mut out = Vec::new();
        for l in &self.0 {
            if l.generator == generator {
                out.extend(if l.inverse { inv.0.iter().cloned() } else { replacement.0.iter().cloned() });
            } else {
                out.push(l.clone());
            }
        }
        Word(out).reduced()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| if l.inverse { format!("{}^-1", l.generator) } else { l.generator.clone() })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RepRepr", into = "RepRepr")]
pub struct Representation {
    n: usize,
    generators: BTreeMap<String, Matrix>,
    inverses: BTreeMap<String, Matrix>,
}

#[derive(Serialize, Deserialize)]
struct RepRepr {
    n: usize,
    generators: BTreeMap<String, Matrix>,
}

impl TryFrom<RepRepr> for Representation {
    type Error = RepError;
    fn try_from(r: RepRepr) -> Result<Self, RepError> {
        Representation::new(r.n, r.generators)
    }
}

impl From<Representation> for RepRepr {
    fn from(r: Representation) -> RepRepr {
        RepRepr { n: r.n, generators: r.generators }
    }
}

impl Representation {
    /// Every matrix must be `n x n` with positive determinant (the projective
    /// class of an element of `PSL_n(R)`).
    pub fn new(n: usize, generators: BTreeMap<String, Matrix>) -> Result<Representation, RepError> {
        let mut inverses = BTreeMap::new();
        for (name, m) in &generators {
            if m.rows() != n || m.cols() != n {
                return Err(RepError::DimensionMismatch(format!("{name} is {}x{}", m.rows(), m.cols())));
            }
            let d = m.det();
            if d.is_zero() {
                return Err(RepError::Singular(name.clone()));
            }
            if d.signum() < 0 {
                return Err(RepError::DeterminantSign(name.clone()));
            }
            inverses.insert(name.clone(), m.inverse().map_err(|_| RepError::Singular(name.clone()))?);
        }
        Ok(Representation { n, generators, inverses })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator_names(&self) -> impl Iterator<Item = &str> {
        self.generators.keys().map(String::as_str)
    }

    pub fn matrix(&self, generator: &str) -> Option<&Matrix> {
        self.generators.get(generator)
    }

    pub fn generators(&self) -> &BTreeMap<String, Matrix> {
        &self.generators
    }

    pub fn is_exact(&self) -> bool {
        self.generators.values().all(Matrix::is_exact)
    }

    pub fn eval_word(&self, w: &Word) -> Result<Matrix, RepError> {
        let mut acc = Matrix::identity(self.n);
        for l in &w.0 {
            let table = if l.inverse { &self.inverses } else { &self.generators };
            let m = table.get(&l.generator).ok_or_else(|| RepError::UnknownGenerator(l.generator.clone()))?;
            acc = acc.mul(m);
        }
        Ok(acc)
    }

    /// `A rho A^-1`.
    pub fn conjugate(&self, a: &Matrix) -> Result<Representation, RepError> {
        let inv = a.inverse().map_err(|_| RepError::Singular("conjugator".into()))?;
        let gens = self.generators.iter().map(|(k, m)| (k.clone(), a.mul(m).mul(&inv))).collect();
        Representation::new(self.n, gens)
    }

    /// Composes with the irreducible representation `PGL_2 -> PGL_n`.
    pub fn symmetric_power(&self, n: usize) -> Result<Representation, RepError> {
        if self.n != 2 {
            return Err(RepError::DimensionMismatch("symmetric powers need a 2-dimensional representation".into()));
        }
        let gens = self.generators.iter().map(|(k, m)| (k.clone(), symmetric_power(m, n))).collect();
        Representation::new(n, gens)
    }

    /// Rescales every generator to determinant one, in floats. For even `n` the
    /// sign of the lift is a free choice; the positive real root is used.
    pub fn unimodular_lift(&self, prec: u32) -> Representation {
        let gens = self
            .generators
            .iter()
            .map(|(k, m)| {
                let d = m.det().to_float(prec);
                let root = d.root(self.n as u32);
                (k.clone(), m.to_float(prec).scale(&Scalar::Float(root.recip())))
            })
            .collect();
        Representation::new(self.n, gens).expect("rescaling keeps determinants positive")
    }

    pub fn to_float(&self, prec: u32) -> Representation {
        let gens = self.generators.iter().map(|(k, m)| (k.clone(), m.to_float(prec))).collect();
        Representation::new(self.n, gens).expect("same matrices")
    }
}

#[derive(Clone, Debug)]
pub struct EigenData {
    /// Decreasing, positive.
    pub eigenvalues: Vec<Scalar>,
    /// `eigenvectors[a]` spans the eigenline of `eigenvalues[a]`.
    pub eigenvectors: Vec<Vec<Scalar>>,
    pub stable: Flag,
    pub unstable: Flag,
}

impl EigenData {
    /// `m_a / m_(a+1)` for `a = 1, ..., n-1`.
    pub fn ratios(&self) -> Vec<Scalar> {
        self.eigenvalues.windows(2).map(|w| &w[0] / &w[1]).collect()
    }
}

/// Eigendata of the positive lift of `m`: the lift whose eigenvalues are all
/// positive. Negation is only allowed when `n` is even.
pub fn positive_eigendata(m: &Matrix, precision: u32) -> Result<EigenData, RepError> {
    let n = m.rows();
    let pairs = real_eigen(m, precision).map_err(|e| match e {
        LinalgError::NonRealSpectrum(_) => RepError::NotLoxodromic("complex eigenvalues".into()),
        LinalgError::RepeatedModulus => RepError::NotLoxodromic("eigenvalues of equal modulus".into()),
        other => RepError::NotLoxodromic(other.to_string()),
    })?;
    let signs: Vec<i32> = pairs.iter().map(|p| p.value.signum()).collect();
    let negate = if signs.iter().all(|&s| s > 0) {
        false
    } else if signs.iter().all(|&s| s < 0) && n.is_multiple_of(2) {
        true
    } else {
        return Err(RepError::MixedSigns);
    };
    let eigenvalues: Vec<Scalar> = pairs.iter().map(|p| if negate { -&p.value } else { p.value.clone() }).collect();
    let eigenvectors: Vec<Vec<Scalar>> = pairs.into_iter().map(|p| p.vector).collect();
    let stable = Flag::from_columns(&eigenvectors).map_err(|e| RepError::NotLoxodromic(e.to_string()))?;
    let reversed: Vec<Vec<Scalar>> = eigenvectors.iter().rev().cloned().collect();
    let unstable = Flag::from_columns(&reversed).map_err(|e| RepError::NotLoxodromic(e.to_string()))?;
    Ok(EigenData { eigenvalues, eigenvectors, stable, unstable })
}

/// Eigendata of `m` when `m` is known to preserve `flag`: in the basis of the
/// flag, `m` is upper triangular, so eigenvalues and eigenvectors come out by
/// back substitution without solving a characteristic polynomial.
pub fn eigendata_preserving(m: &Matrix, flag: &Flag) -> Result<EigenData, RepError> {
    let n = m.rows();
    let basis = flag.basis();
    let binv = basis.inverse().map_err(|_| RepError::Singular("flag basis".into()))?;
    let t = binv.mul(m).mul(basis);
    let prec = t.precision().unwrap_or(DEFAULT_PRECISION);
    let scale = t.entries().iter().fold(Float::with_val(prec, 0), |acc, x| acc.max(&x.to_float(prec).abs()));
    let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2)) * scale;
    for i in 0..n {
        for j in 0..i {
            let x = t.get(i, j);
            if !(x.is_zero() || (!x.is_exact() && x.is_negligible(&tol))) {
                return Err(RepError::NotLoxodromic("matrix does not preserve the flag".into()));
            }
        }
    }
    let diag: Vec<Scalar> = (0..n).map(|i| t.get(i, i).clone()).collect();
    // `m` is only a projective representative here, so any overall sign is fine.
    let negate = if diag.iter().all(|d| d.is_positive()) {
        false
    } else if diag.iter().all(|d| d.signum() < 0) {
        true
    } else {
        return Err(RepError::MixedSigns);
    };
    let mut pairs = Vec::with_capacity(n);
    for j in 0..n {
        let dj = &diag[j];
        let mut v = vec![Scalar::zero(); n];
        v[j] = Scalar::one();
        for i in (0..j).rev() {
            let mut acc = Scalar::zero();
            for (k, vk) in v.iter().enumerate().take(j + 1).skip(i + 1) {
                acc = acc + t.get(i, k) * vk;
            }
            let denom = &diag[i] - dj;
            if denom.is_zero() {
                return Err(RepError::NotLoxodromic("repeated eigenvalue".into()));
            }
            v[i] = -acc / denom;
        }
        let value = if negate { -dj } else { dj.clone() };
        pairs.push((value, basis.mul_vec(&v)));
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("comparable eigenvalues"));
    for w in pairs.windows(2) {
        let equal = if w[0].0.is_exact() && w[1].0.is_exact() {
            w[0].0 == w[1].0
        } else {
            (&w[0].0 - &w[1].0).is_negligible(&tol)
        };
        if equal {
            return Err(RepError::NotLoxodromic("repeated eigenvalue".into()));
        }
    }
    let eigenvalues: Vec<Scalar> = pairs.iter().map(|p| p.0.clone()).collect();
    let eigenvectors: Vec<Vec<Scalar>> = pairs.into_iter().map(|p| p.1).collect();
    let stable = Flag::from_columns(&eigenvectors).map_err(|e| RepError::NotLoxodromic(e.to_string()))?;
    let reversed: Vec<Vec<Scalar>> = eigenvectors.iter().rev().cloned().collect();
    let unstable = Flag::from_columns(&reversed).map_err(|e| RepError::NotLoxodromic(e.to_string()))?;
    Ok(EigenData { eigenvalues, eigenvectors, stable, unstable })
}

/// Matrix of `p(X, Y) -> p((X, Y) m)` on the monomials `X^(n-1), X^(n-2) Y, ..., Y^(n-1)`,
/// i.e. `X -> aX + cY`, `Y -> bX + dY`. Multiplicative in `m`.
pub fn symmetric_power(m: &Matrix, n: usize) -> Matrix {
    assert!(m.rows() == 2 && m.cols() == 2, "symmetric power of a 2x2 matrix");
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let deg = n - 1;
    // Coefficients of (aX + cY)^i (bX + dY)^j in the monomial basis, X-degree first.
    let power = |p: &Scalar, q: &Scalar, e: usize| -> Vec<Scalar> {
        // (pX + qY)^e: coefficient of X^(e-k) Y^k
        let mut out = Vec::with_capacity(e + 1);
        let mut binom = Scalar::one();
        for k in 0..=e {
            if k > 0 {
                binom = binom * Scalar::int((e - k + 1) as i64) / Scalar::int(k as i64);
            }
            out.push(&binom * &(p.powi((e - k) as i32) * q.powi(k as i32)));
        }
        out
    };
    let mut out = Matrix::zeros(n, n);
    for col in 0..n {
        // monomial X^(deg-col) Y^col
        let u = power(a, c, deg - col);
        let v = power(b, d, col);
        let mut coeffs = vec![Scalar::zero(); n];
        for (i, x) in u.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in v.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(x * y);
            }
        }
        for (row, val) in coeffs.into_iter().enumerate() {
            out.set(row, col, val);
        }
    }
    out
}

/// [`symmetric_power`] restricted to `SL_2`: the determinant must be exactly one
/// (or within `2^(-prec/2)` for float input).
pub fn sl2_symmetric_lift(m: &Matrix, n: usize) -> Result<Matrix, RepError> {
    if m.rows() != 2 || m.cols() != 2 || n < 2 {
        return Err(RepError::DimensionMismatch("expected a 2x2 matrix and n >= 2".into()));
    }
    let d = m.det();
    let ok = if d.is_exact() {
        d.is_one()
    } else {
        let prec = d.precision().unwrap_or(DEFAULT_PRECISION);
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
        (d - Scalar::one()).is_negligible(&tol)
    };
    if !ok {
        return Err(RepError::DeterminantNotOne);
    }
    Ok(symmetric_power(m, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_parsing_and_reduction() {
        let w = Word::parse("a b^-1 b a^-1 c").unwrap();
        assert_eq!(w.reduced().to_string(), "c");
        assert_eq!(Word::parse("a b").unwrap().inverse().to_string(), "b^-1 a^-1");
        assert!(Word::parse("a^2").is_err());
        assert_eq!(Word::parse("a b a^-1").unwrap().cyclically_reduced().to_string(), "b");
    }

    #[test]
    fn eval_word_basics() {
        let mut g = BTreeMap::new();
        g.insert("a".to_string(), Matrix::from_i64(&[&[2, 1], &[1, 1]]));
        let rep = Representation::new(2, g).unwrap();
        assert_eq!(rep.eval_word(&Word::empty()).unwrap(), Matrix::identity(2));
        assert_eq!(rep.eval_word(&Word::parse("a a^-1").unwrap()).unwrap(), Matrix::identity(2));
        assert!(matches!(rep.eval_word(&Word::parse("b").unwrap()), Err(RepError::UnknownGenerator(_))));
    }

    #[test]
    fn diagonal_eigendata() {
        let m = Matrix::diag(&[Scalar::int(4), Scalar::int(2), Scalar::int(1)]);
        let e = positive_eigendata(&m, 256).unwrap();
        assert_eq!(e.eigenvalues, vec![Scalar::int(4), Scalar::int(2), Scalar::int(1)]);
        assert!(e.stable.same_flag(&Flag::standard(3)));
        assert!(e.unstable.same_flag(&Flag::opposite(3)));
        let neg = m.scale(&Scalar::int(-1));
        assert_eq!(positive_eigendata(&neg, 256).unwrap_err(), RepError::MixedSigns);
        let neg2 = Matrix::diag(&[Scalar::int(-4), Scalar::int(-1)]);
        assert_eq!(positive_eigendata(&neg2, 256).unwrap().eigenvalues, vec![Scalar::int(4), Scalar::int(1)]);
    }

    #[test]
    fn rotation_is_not_loxodromic() {
        let m = Matrix::from_i64(&[&[0, -1], &[1, 0]]);
        assert!(matches!(positive_eigendata(&m, 256), Err(RepError::NotLoxodromic(_))));
    }

    #[test]
    fn conjugated_diagonal() {
        let p = Matrix::from_i64(&[&[1, 2, 0], &[0, 1, 3], &[1, 0, 1]]);
        let d = Matrix::diag(&[Scalar::int(9), Scalar::int(3), Scalar::int(1)]);
        let m = p.mul(&d).mul(&p.inverse().unwrap());
        let e = positive_eigendata(&m, 256).unwrap();
        assert_eq!(e.eigenvalues, vec![Scalar::int(9), Scalar::int(3), Scalar::int(1)]);
        assert!(e.stable.same_flag(&Flag::standard(3).transform(&p)));
        let inv = positive_eigendata(&m.inverse().unwrap(), 256).unwrap();
        assert!(inv.unstable.same_flag(&e.stable));
    }

    #[test]
    fn eigendata_from_preserved_flag() {
        let p = Matrix::from_i64(&[&[1, 2, 0], &[0, 1, 3], &[1, 0, 1]]);
        let d = Matrix::diag(&[Scalar::int(9), Scalar::int(3), Scalar::int(1)]);
        let m = p.mul(&d).mul(&p.inverse().unwrap());
        let flag = Flag::standard(3).transform(&p);
        let e = eigendata_preserving(&m, &flag).unwrap();
        assert_eq!(e.eigenvalues, vec![Scalar::int(9), Scalar::int(3), Scalar::int(1)]);
        assert!(e.stable.same_flag(&flag));
        let e2 = eigendata_preserving(&m, &Flag::opposite(3).transform(&p)).unwrap();
        assert!(e2.stable.same_flag(&flag));
        assert!(eigendata_preserving(&m, &Flag::standard(3)).is_err());
    }

    #[test]
    fn symmetric_lift_examples() {
        let d = Matrix::diag(&[Scalar::int(3), Scalar::ratio(1, 3)]);
        let l = sl2_symmetric_lift(&d, 4).unwrap();
        assert_eq!(l, Matrix::diag(&[Scalar::int(27), Scalar::int(3), Scalar::ratio(1, 3), Scalar::ratio(1, 27)]));
        assert_eq!(sl2_symmetric_lift(&Matrix::identity(2), 5).unwrap(), Matrix::identity(5));
        let u = Matrix::from_i64(&[&[1, 1], &[0, 1]]);
        assert_eq!(sl2_symmetric_lift(&u, 3).unwrap(), Matrix::from_i64(&[&[1, 1, 1], &[0, 1, 2], &[0, 0, 1]]));
        assert_eq!(sl2_symmetric_lift(&Matrix::from_i64(&[&[2, 0], &[0, 1]]), 3), Err(RepError::DeterminantNotOne));
    }
}
