//! Real eigenvalues through the characteristic polynomial.
//!
//! The characteristic polynomial is always formed exactly: float entries are
//! dyadic rationals, so nothing is lost by converting them. Real roots are
//! isolated with Sturm sequences, then polished by bracketed Newton steps in
//! MPFR. For exact input every root is tried as a rational (continued-fraction
//! convergents, confirmed by exact evaluation), which keeps eigenvectors and
//! everything downstream exact whenever the spectrum is rational.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::linalg::{LinalgError, Matrix};
use crate::scalar::Scalar;

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    fn trimmed(mut c: Vec<Rational>) -> Poly {
        while c.last().is_some_and(|x| *x == 0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.0.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let mut acc = Float::with_val(x.prec(), 0);
        for c in self.0.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let c = self.0.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u32)).collect();
        Poly::trimmed(c)
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Poly {
        let c =
            self.0.iter().enumerate().map(|(i, c)| if i % 2 == 1 { Rational::from(-c) } else { c.clone() }).collect();
        Poly::trimmed(c)
    }

    fn rem(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.0[dd].clone();
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let q = Rational::from(&r[k] / &lead);
            for i in 0..=dd {
                let t = Rational::from(&q * &d.0[i]);
                r[k - dd + i] -= t;
            }
            r.pop();
            while r.last().is_some_and(|x| *x == 0) {
                r.pop();
            }
        }
        Poly::trimmed(r)
    }

    fn div_exact(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("division by the zero polynomial");
        let Some(n) = self.degree() else { return Poly(vec![]) };
        if n < dd {
            return Poly(vec![]);
        }
        let mut r = self.0.clone();
        let mut q = vec![Rational::new(); n - dd + 1];
        for k in (dd..=n).rev() {
            let c = Rational::from(&r[k] / &d.0[dd]);
            for i in 0..=dd {
                let t = Rational::from(&c * &d.0[i]);
                r[k - dd + i] -= t;
            }
            q[k - dd] = c;
        }
        Poly::trimmed(q)
    }

    fn monic(&self) -> Poly {
        match self.0.last() {
            Some(l) => {
                let l = l.clone();
                Poly(self.0.iter().map(|c| Rational::from(c / &l)).collect())
            }
            None => self.clone(),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Scales to integer coefficients with content 1 and returns them.
    fn primitive_integer(&self) -> Vec<Integer> {
        let mut l = Integer::from(1);
        for c in &self.0 {
            l.lcm_mut(c.denom());
        }
        let ints: Vec<Integer> = self.0.iter().map(|c| c.numer() * Integer::from(&l / c.denom())).collect();
        let mut g = Integer::new();
        for c in &ints {
            g.gcd_mut(c);
        }
        if g == 0 {
            return ints;
        }
        ints.into_iter().map(|c| c.div_exact(&g)).collect()
    }

    fn sturm_chain(&self) -> Vec<Poly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            if chain[n - 1].degree() == Some(0) {
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            let neg = Poly(r.0.into_iter().map(|c| -c).collect());
            chain.push(neg);
        }
        chain
    }
}

fn sign_variations(chain: &[Poly], x: &Rational) -> usize {
    let mut last = 0;
    let mut count = 0;
    for p in chain {
        let s = match p.eval(x).cmp0() {
            Ordering::Less => -1,
            Ordering::Greater => 1,
            Ordering::Equal => 0,
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Characteristic polynomial `det(xI - m)` by Faddeev-LeVerrier over the
/// rationals. Float entries are taken at their exact dyadic value.
pub fn char_poly(m: &Matrix) -> Poly {
    assert!(m.is_square());
    let n = m.rows();
    let a: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).to_rational_exact().expect("finite matrix entry")).collect())
        .collect();
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[n] = Rational::from(1);
    let mut mk: Vec<Vec<Rational>> = vec![vec![Rational::new(); n]; n];
    for k in 1..=n {
        // mk <- a * mk + c_{n-k+1} I
        let mut next = vec![vec![Rational::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Rational::new();
                for l in 0..n {
                    if mk[l][j] != 0 && a[i][l] != 0 {
                        acc += Rational::from(&a[i][l] * &mk[l][j]);
                    }
                }
                if i == j {
                    acc += &coeffs[n - k + 1];
                }
                next[i][j] = acc;
            }
        }
        mk = next;
        let mut tr = Rational::new();
        for i in 0..n {
            for l in 0..n {
                if a[i][l] != 0 && mk[l][i] != 0 {
                    tr += Rational::from(&a[i][l] * &mk[l][i]);
                }
            }
        }
        coeffs[n - k] = -tr / Rational::from(k as u32);
    }
    Poly::trimmed(coeffs)
}

/// A real root located either exactly or as a float polished to working precision.
#[derive(Clone, Debug)]
enum Root {
    Exact(Rational),
    Approx(Float),
}

impl Root {
    fn abs_cmp(&self, other: &Root, prec: u32) -> Ordering {
        match (self, other) {
            (Root::Exact(a), Root::Exact(b)) => Rational::from(a.abs_ref()).cmp(&Rational::from(b.abs_ref())),
            _ => {
                let a = self.to_float(prec).abs();
                let b = other.to_float(prec).abs();
                a.partial_cmp(&b).unwrap_or(Ordering::Equal)
            }
        }
    }

    fn to_float(&self, prec: u32) -> Float {
        match self {
            Root::Exact(r) => Float::with_val(prec, r),
            Root::Approx(f) => Float::with_val(prec, f),
        }
    }
}

/// Upper bound on the absolute values of the roots (Cauchy), as a power of two.
fn root_bound(p: &Poly) -> Rational {
    let n = p.degree().unwrap();
    let lead = Rational::from(p.0[n].abs_ref());
    let mut m = Rational::new();
    for c in &p.0[..n] {
        let q = Rational::from(c.abs_ref()) / &lead;
        if q > m {
            m = q;
        }
    }
    let b = m + 1u32;
    let mut pow = Rational::from(1);
    while pow <= b {
        pow *= 2u32;
    }
    pow
}

/// Isolates the real roots of a squarefree polynomial into intervals `(lo, hi]`
/// each containing exactly one root.
fn isolate(p: &Poly) -> Vec<(Rational, Rational)> {
    let chain = p.sturm_chain();
    let b = root_bound(p);
    let lo = Rational::from(-&b);
    let mut out = Vec::new();
    let mut stack = vec![(lo, b)];
    while let Some((a, c)) = stack.pop() {
        let count = sign_variations(&chain, &a) as i64 - sign_variations(&chain, &c) as i64;
        if count <= 0 {
            continue;
        }
        if count == 1 {
            out.push((a, c));
            continue;
        }
        let width = Rational::from(&c - &a);
        let mut mid = Rational::from(&a + &c) / 2u32;
        let mut nudge = Rational::from(&width / 7u32);
        while p.eval(&mid) == 0 {
            mid += &nudge;
            nudge /= 3u32;
        }
        stack.push((mid.clone(), c));
        stack.push((a, mid));
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

fn sign(p: &Poly, x: &Rational) -> Ordering {
    p.eval(x).cmp0()
}

/// Bracketed Newton on `[lo, hi]` in MPFR, falling back to bisection whenever a
/// step leaves the bracket.
fn polish(p: &Poly, lo: &Rational, hi: &Rational, prec: u32) -> Float {
    let dp = p.derivative();
    let mut a = Float::with_val(prec, lo);
    let mut b = Float::with_val(prec, hi);
    let sa = p.eval_float(&a).cmp0().unwrap_or(Ordering::Equal);
    let mut x = Float::with_val(prec, &a + &b) / 2u32;
    let stop = Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 4));
    for _ in 0..(4 * prec as usize + 200) {
        let fx = p.eval_float(&x);
        if fx.is_zero() {
            return x;
        }
        let sx = fx.cmp0().unwrap_or(Ordering::Equal);
        if sx == sa {
            a = x.clone();
        } else {
            b = x.clone();
        }
        let dfx = dp.eval_float(&x);
        let newton = if dfx.is_zero() { None } else { Some(Float::with_val(prec, &x - &(fx / &dfx))) };
        let next = match newton {
            Some(n) if n > a && n < b => n,
            _ => Float::with_val(prec, &a + &b) / 2u32,
        };
        let step = Float::with_val(prec, &next - &x).abs();
        let scale = Float::with_val(prec, next.abs_ref()).max(&Float::with_val(prec, 1));
        x = next;
        if step <= Float::with_val(prec, &stop * &scale) {
            break;
        }
        let width = Float::with_val(prec, &b - &a);
        if width <= Float::with_val(prec, &stop * &scale) {
            break;
        }
    }
    x
}

/// Tries to recognise `x` as a rational root of `p` in `(lo, hi]` with
/// denominator at most `max_den`, using the continued-fraction convergents of `x`.
fn rational_root(p: &Poly, x: &Float, max_den: &Integer, lo: &Rational, hi: &Rational) -> Option<Rational> {
    let exact = x.to_rational()?;
    let (mut h0, mut h1) = (Integer::from(0), Integer::from(1));
    let (mut k0, mut k1) = (Integer::from(1), Integer::from(0));
    let mut rest = exact;
    for _ in 0..2000 {
        let a = rest.clone().floor().into_numer_denom().0;
        let h2 = Integer::from(&a * &h1) + &h0;
        let k2 = Integer::from(&a * &k1) + &k0;
        if k2 > *max_den {
            return None;
        }
        let cand = Rational::from((h2.clone(), k2.clone()));
        if cand > *lo && cand <= *hi && p.eval(&cand) == 0 {
            return Some(cand);
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = Rational::from(&rest - &a);
        if frac == 0 {
            return None;
        }
        rest = frac.recip();
    }
    None
}

/// Real roots of `p` with their multiplicity structure checked: the roots must
/// all be real, simple, and of pairwise distinct absolute value.
fn real_roots(p: &Poly, prec: u32, try_exact: bool) -> Result<Vec<Root>, LinalgError> {
    let n = p.degree().unwrap_or(0);
    let dp = p.derivative();
    let g = p.gcd(&dp);
    let sq = if g.degree().unwrap_or(0) > 0 { p.div_exact(&g) } else { p.clone() };
    let intervals = isolate(&sq);
    let distinct = sq.degree().unwrap_or(0);
    if intervals.len() < distinct {
        return Err(LinalgError::NonRealSpectrum(n));
    }
    if distinct < n {
        return Err(LinalgError::RepeatedModulus);
    }
    // Roots r and -r present together (0 cannot occur twice after the
    // squarefree check above).
    let mut reduced = p.clone();
    while reduced.0.first().is_some_and(|c| *c == 0) {
        reduced.0.remove(0);
    }
    let sym = reduced.gcd(&reduced.reflect());
    if sym.degree().unwrap_or(0) > 0 {
        return Err(LinalgError::RepeatedModulus);
    }

    let ints = p.primitive_integer();
    let lead = Integer::from(ints[n].abs_ref());
    let bound_bits = root_bound(p).numer().significant_bits();
    let work = if try_exact { prec.max(2 * lead.significant_bits() + bound_bits + 64) } else { prec + 32 };

    let mut roots = Vec::with_capacity(n);
    for (lo, hi) in intervals {
        if sign(p, &hi) == Ordering::Equal {
            roots.push(Root::Exact(hi));
            continue;
        }
        let x = polish(p, &lo, &hi, work);
        if try_exact {
            if let Some(r) = rational_root(p, &x, &lead, &lo, &hi) {
                roots.push(Root::Exact(r));
                continue;
            }
        }
        roots.push(Root::Approx(Float::with_val(prec, &x)));
    }
    Ok(roots)
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Scalar,
    pub vector: Vec<Scalar>,
}

fn normalize_vector(v: Vec<Scalar>, tol: Option<&Float>) -> Vec<Scalar> {
    let lead = v
        .iter()
        .position(|x| match tol {
            Some(t) if !x.is_exact() => !x.is_negligible(t),
            _ => !x.is_zero(),
        })
        .expect("nonzero eigenvector");
    let inv = v[lead].recip();
    v.iter().enumerate().map(|(i, x)| if i == lead { Scalar::one().with_precision_of(x) } else { x * &inv }).collect()
}

trait WithPrecisionOf {
    fn with_precision_of(self, other: &Scalar) -> Scalar;
}

impl WithPrecisionOf for Scalar {
    fn with_precision_of(self, other: &Scalar) -> Scalar {
        match other.precision() {
            Some(p) => self.into_float(p),
            None => self,
        }
    }
}

/// Eigenvalues sorted by decreasing absolute value with eigenvectors whose
/// first nonzero coordinate is 1.
///
/// Exact input with a rational spectrum gives exact output. Otherwise values
/// and vectors are floats at `precision` bits.
pub fn real_eigen(m: &Matrix, precision: u32) -> Result<Vec<EigenPair>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::DimensionMismatch("eigenvalues of a non-square matrix".into()));
    }
    let n = m.rows();
    let exact_input = m.is_exact();
    let prec = m.precision().unwrap_or(precision).max(precision);
    let p = char_poly(m);
    let mut roots = real_roots(&p, prec, exact_input)?;
    roots.sort_by(|a, b| b.abs_cmp(a, prec));

    if !exact_input {
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
        for w in roots.windows(2) {
            let a = w[0].to_float(prec).abs();
            let b = w[1].to_float(prec).abs();
            let gap = Float::with_val(prec, &a - &b) / a.max(&Float::with_val(prec, 1));
            if gap <= tol {
                return Err(LinalgError::RepeatedModulus);
            }
        }
    }

    let mut out = Vec::with_capacity(n);
    for root in roots {
        let (value, shifted) = match (&root, exact_input) {
            (Root::Exact(r), true) => {
                let v = Scalar::Exact(r.clone());
                (v.clone(), m.sub(&Matrix::identity(n).scale(&v)))
            }
            _ => {
                let v = Scalar::Float(root.to_float(prec));
                (v.clone(), m.to_float(prec).sub(&Matrix::identity(n).scale(&v)))
            }
        };
        let mut ns = shifted.nullspace();
        if ns.is_empty() {
            return Err(LinalgError::Singular);
        }
        let tol =
            if value.is_exact() { None } else { Some(Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2))) };
        let vector = normalize_vector(ns.swap_remove(0), tol.as_ref());
        out.push(EigenPair { value, vector });
    }
    Ok(out)
}

/// `2^e` as a rational; handy for tolerances in tests.
pub fn pow2(e: i32) -> Rational {
    if e >= 0 {
        Rational::from(Integer::from(2).pow(e as u32))
    } else {
        Rational::from((1, Integer::from(2).pow((-e) as u32)))
    }
}
