//! Reconstruction of a representation from coordinates: flag triples are
//! realized triangle by triangle, glued across leaves with prescribed shears,
//! and holonomies are read off as the projective maps between a base lifted
//! triangle and its translates.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::atlas::{LiftAtlas, PathStep};
use crate::coords::{CoordinateVector, TripleRatios};
use crate::flag::{
    adapted_basis, coordinates, frame_map, is_positive_quadruple, is_positive_triple, triple_indices, triple_ratio,
    Flag, FlagError,
};
use crate::lamination::{far_vertex, next, Lamination, Side};
use crate::linalg::Matrix;
use crate::polytope::{check_membership, monomial, ConstraintSystem, MembershipReport};
use crate::representation::{eigendata_preserving, RepError, Representation};
use crate::scalar::{Scalar, DEFAULT_PRECISION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthesisError {
    #[error("could not realize the prescribed triple ratios: {0}")]
    RealizationFailed(String),
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Representation(#[from] RepError),
    #[error("eigenvalue ratios across {closed_leaf} do not match: {detail}")]
    EigenvalueMismatch { closed_leaf: String, detail: String },
    #[error("coordinates are not in the polytope")]
    MembershipFailed(Box<MembershipReport>),
    #[error("relator is not trivial: {0}")]
    RelatorViolation(String),
    #[error("bad path: {0}")]
    BadPath(String),
    #[error("flags at {0} are not positive")]
    NotPositive(String),
    #[error("coordinates do not fit the lamination: {0}")]
    Incomplete(String),
}

/// Exact sign of the wedge `e^(a) ^ f^(b) ^ g^(c)` for `E` standard, `F`
/// opposite and `G` spanned by the standard vectors that `E` and `F` miss.
fn block_sign(n: usize, a: usize, b: usize, c: usize) -> i64 {
    let mut perm: Vec<usize> = (0..a).collect();
    perm.extend((0..b).map(|j| n - 1 - j));
    perm.extend(a..a + c);
    let mut sign = 1;
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// A positive flag triple with the prescribed triple ratios, with `E` the
/// standard flag, `F` the opposite one and `G` spanned by the columns of a
/// lower unipotent matrix whose first column is all ones.
pub fn realize_triple(ratios: &TripleRatios, n: usize) -> Result<(Flag, Flag, Flag), SynthesisError> {
    if n < 2 {
        return Err(SynthesisError::RealizationFailed(format!("n = {n}")));
    }
    for key in triple_indices(n) {
        match ratios.get(&key) {
            Some(t) if t.is_positive() => {}
            Some(_) => return Err(SynthesisError::RealizationFailed(format!("ratio {key:?} is not positive"))),
            None => return Err(SynthesisError::RealizationFailed(format!("missing ratio {key:?}"))),
        }
    }
    // minors[a][c]: determinant of rows a+1..a+c, columns 1..c of the unipotent matrix.
    let mut minors = vec![vec![Scalar::one(); n + 1]; n + 1];
    let w =
        |minors: &Vec<Vec<Scalar>>, a: usize, b: usize, c: usize| Scalar::int(block_sign(n, a, b, c)) * &minors[a][c];
    for c in 1..n.saturating_sub(1) {
        for a in 1..n - c {
            let b = n - a - c;
            let t = &ratios[&(a, b, c)];
            let den = w(&minors, a - 1, b, c + 1) * w(&minors, a, b + 1, c - 1) * w(&minors, a + 1, b - 1, c);
            let others = w(&minors, a + 1, b, c - 1) * w(&minors, a - 1, b + 1, c);
            let wedge = t * &den / others;
            minors[a][c + 1] = wedge * Scalar::int(block_sign(n, a, b - 1, c + 1));
        }
    }
    let mut l = Matrix::identity(n);
    for i in 1..n {
        l.set(i, 0, Scalar::one());
    }
    for c in 2..n {
        for a in 1..=n - c {
            let row = a + c - 1;
            l.set(row, c - 1, Scalar::zero());
            let sub = |m: &Matrix| {
                let rows: Vec<Vec<Scalar>> =
                    (a..a + c).map(|i| (0..c).map(|j| m.get(i, j).clone()).collect()).collect();
                Matrix::from_rows(rows).expect("square").det()
            };
            let rest = sub(&l);
            let cofactor = &minors[a][c - 1];
            if cofactor.is_zero() {
                return Err(SynthesisError::RealizationFailed("vanishing minor".into()));
            }
            l.set(row, c - 1, (&minors[a][c] - &rest) / cofactor);
        }
    }
    let e = Flag::standard(n);
    let f = Flag::opposite(n);
    let g = Flag::new(l).map_err(|e| SynthesisError::RealizationFailed(e.to_string()))?;
    for (key, t) in ratios {
        let got = triple_ratio(&e, &f, &g, key.0, key.1, key.2)?;
        let ok = if got.is_exact() && t.is_exact() {
            &got == t
        } else {
            let prec = got.precision().or(t.precision()).unwrap_or(DEFAULT_PRECISION);
            (&got / t - Scalar::one()).is_negligible(&Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2)))
        };
        if !ok {
            return Err(SynthesisError::RealizationFailed(format!("ratio {key:?}: wanted {t}, got {got}")));
        }
    }
    Ok((e, f, g))
}

/// Builds the unknown third vertex of the triangle across a leaf with ends
/// `x` (positive) and `y` (negative). `known` is the third vertex on the other
/// side. When the unknown vertex is on the right, `ratios` are those of
/// `(y, x, unknown)`; on the left, those of `(x, y, unknown)`. `sigma` holds
/// `D_a(x, y, left vertex, right vertex)`.
fn solve_third(
    unknown: Side,
    x: &Flag,
    y: &Flag,
    known: &Flag,
    ratios: &TripleRatios,
    sigma: &[Scalar],
) -> Result<Flag, SynthesisError> {
    let n = x.n();
    if sigma.len() != n - 1 {
        return Err(SynthesisError::Incomplete(format!("{} shears for n = {n}", sigma.len())));
    }
    let (_, _, g0) = realize_triple(ratios, n)?;
    let basis = adapted_basis(x, y)?;
    let gamma = coordinates(&basis, &known.column(0))?;
    let seed = g0.column(0);
    if gamma.iter().any(Scalar::is_zero) {
        return Err(FlagError::NotGeneric.into());
    }
    let mut target = vec![Scalar::one(); n];
    for a in 0..n - 1 {
        target[a + 1] = match unknown {
            Side::Right => -(&gamma[a + 1] * &target[a]) / (&gamma[a] * &sigma[a]),
            Side::Left => -(&sigma[a] * &gamma[a + 1] * &target[a]) / &gamma[a],
        };
    }
    // Map the realized (E0, F0) onto (y, x) or (x, y), scaling so that the
    // first vector of G0 lands on the target coordinates.
    let cols: Vec<Vec<Scalar>> = (0..n)
        .map(|a| {
            let (line, coeff) = match unknown {
                Side::Right => (n - 1 - a, &target[n - 1 - a]),
                Side::Left => (a, &target[a]),
            };
            let s = coeff / &seed[a];
            basis[line].iter().map(|v| v * &s).collect()
        })
        .collect();
    let h = Matrix::from_columns(&cols).expect("square");
    Ok(g0.transform(&h))
}

/// The flag `G'` opposite `G` across the leaf with positive end `E` and
/// negative end `F`, with `D_a(E, F, G, G') = sigma_a` and with
/// `ratios_opposite` the triple ratios of `(F, E, G')`.
pub fn extend_across_leaf(
    e: &Flag,
    f: &Flag,
    g: &Flag,
    ratios_opposite: &TripleRatios,
    sigma: &[Scalar],
) -> Result<Flag, SynthesisError> {
    solve_third(Side::Right, e, f, g, ratios_opposite, sigma)
}

/// Mirror of [`extend_across_leaf`]: given `G'` on the right, finds `G` on the
/// left with `D_a(E, F, G, G') = sigma_a` and `ratios` those of `(E, F, G)`.
pub fn extend_across_leaf_leftward(
    e: &Flag,
    f: &Flag,
    g_right: &Flag,
    ratios: &TripleRatios,
    sigma: &[Scalar],
) -> Result<Flag, SynthesisError> {
    solve_third(Side::Left, e, f, g_right, ratios, sigma)
}

/// What one side of a closed leaf contributes to the gluing: the holonomy
/// `[c]` in that side's frame, a flag it preserves (the spike of a triangle
/// in the fan) and the far vertex of the arc triangle.
#[derive(Clone, Debug)]
pub struct ClosedLeafSide {
    pub monodromy: Matrix,
    pub spike: Flag,
    pub far: Flag,
}

fn same_value(a: &Scalar, b: &Scalar) -> bool {
    if a.is_exact() && b.is_exact() {
        a == b
    } else {
        let prec = a.precision().or(b.precision()).unwrap_or(DEFAULT_PRECISION);
        (a / b - Scalar::one()).is_negligible(&Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2)))
    }
}

/// The projective map `A` taking the frame of the side opposite `fixed` onto
/// the frame of `fixed`: `A` conjugates the moving monodromy to the fixed one
/// and makes the arc double ratios `D_a(x, y, z, z')` equal to `sigma`.
/// Both monodromies must have eigenvalue ratios `lengths`.
pub fn glue_across_closed_leaf(
    left: &ClosedLeafSide,
    right: &ClosedLeafSide,
    lengths: &[Scalar],
    sigma: &[Scalar],
    fixed: Side,
    name: &str,
) -> Result<Matrix, SynthesisError> {
    let el = eigendata_preserving(&left.monodromy, &left.spike)?;
    let er = eigendata_preserving(&right.monodromy, &right.spike)?;
    let n = el.eigenvalues.len();
    for (side, e) in [(Side::Left, &el), (Side::Right, &er)] {
        let ratios = e.ratios();
        if ratios.len() != lengths.len() || !ratios.iter().zip(lengths).all(|(a, b)| same_value(a, b)) {
            return Err(SynthesisError::EigenvalueMismatch {
                closed_leaf: name.to_string(),
                detail: format!(
                    "{side} side has ratios [{}], expected [{}]",
                    ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "),
                    lengths.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
                ),
            });
        }
    }
    let gl = coordinates(&el.eigenvectors, &left.far.column(0))?;
    let gr = coordinates(&er.eigenvectors, &right.far.column(0))?;
    if gl.iter().chain(gr.iter()).any(Scalar::is_zero) {
        return Err(FlagError::NotGeneric.into());
    }
    let mut beta = vec![Scalar::one(); n];
    for a in 0..n - 1 {
        beta[a + 1] = match fixed {
            Side::Left => -(&beta[a] * &gr[a] * &gl[a + 1]) / (&gl[a] * &gr[a + 1] * &sigma[a]),
            Side::Right => -(&sigma[a] * &beta[a] * &gl[a] * &gr[a + 1]) / (&gl[a + 1] * &gr[a]),
        };
    }
    let (fixed_e, moving_e) = match fixed {
        Side::Left => (&el, &er),
        Side::Right => (&er, &el),
    };
    let p = Matrix::from_columns(&fixed_e.eigenvectors).expect("square");
    let q = Matrix::from_columns(&moving_e.eigenvectors).expect("square");
    let qinv = q.inverse().map_err(|_| FlagError::Singular)?;
    Ok(p.mul(&Matrix::diag(&beta)).mul(&qinv))
}

/// A lift of a surface triangle together with the flags at its vertices.
#[derive(Clone, Debug)]
pub struct LiftedTriangle {
    pub triangle: usize,
    pub flags: [Flag; 3],
}

/// Walks lifted triangles through the dual graph, building flags as it goes.
pub struct Decorator<'a> {
    lam: &'a Lamination,
    coords: &'a CoordinateVector,
    n: usize,
    verify: bool,
    lengths: Vec<Vec<Scalar>>,
    realized: RefCell<HashMap<(usize, usize), (Flag, Flag, Flag)>>,
}

impl<'a> Decorator<'a> {
    pub fn new(lam: &'a Lamination, coords: &'a CoordinateVector) -> Result<Decorator<'a>, SynthesisError> {
        coords.check_complete(lam).map_err(SynthesisError::Incomplete)?;
        let n = coords.n;
        let sys = ConstraintSystem::new(lam, n);
        let values = sys.values(coords, lam).map_err(|e| SynthesisError::Incomplete(e.to_string()))?;
        let lengths = (0..lam.closed_leaves().len())
            .map(|ci| (1..n).map(|a| monomial(&values, &sys.side_exponents(lam, ci, Side::Right, a))).collect())
            .collect();
        Ok(Decorator { lam, coords, n, verify: false, lengths, realized: RefCell::new(HashMap::new()) })
    }

    /// Checks positivity of every triple and quadruple the walk creates.
    pub fn verifying(mut self, on: bool) -> Decorator<'a> {
        self.verify = on;
        self
    }

    fn taus(&self, t: usize, v: usize) -> TripleRatios {
        self.coords.taus_at(&self.lam.triangles()[t].id, v).expect("complete coordinates")
    }

    fn shear(&self, leaf: usize) -> &[Scalar] {
        self.coords.shear(&self.lam.infinite_leaves()[leaf].id).expect("complete coordinates")
    }

    /// Flags `(v0, v1, v2)` of a fresh lift of `t` realizing its invariants.
    pub fn fresh(&self, t: usize) -> Result<LiftedTriangle, SynthesisError> {
        let key = (t, 0);
        if let Some((e, f, g)) = self.realized.borrow().get(&key) {
            return Ok(LiftedTriangle { triangle: t, flags: [e.clone(), f.clone(), g.clone()] });
        }
        let (e, f, g) = realize_triple(&self.taus(t, 0), self.n)?;
        self.realized.borrow_mut().insert(key, (e.clone(), f.clone(), g.clone()));
        Ok(LiftedTriangle { triangle: t, flags: [e, f, g] })
    }

    pub fn cross_side(&self, cur: &LiftedTriangle, k: usize) -> Result<LiftedTriangle, SynthesisError> {
        let t = &self.lam.triangles()[cur.triangle];
        let leaf = self.lam.leaf_index(&t.sides[k].leaf).expect("validated");
        let (nt, nk) = self.lam.neighbor(cur.triangle, k);
        let sigma = self.shear(leaf);
        let ratios = self.taus(nt, nk);
        let (a, b, c) = (&cur.flags[k], &cur.flags[next(k)], &cur.flags[next(next(k))]);
        let (third, quad) = match t.sides[k].side {
            Side::Left => {
                let z = solve_third(Side::Right, a, b, c, &ratios, sigma)?;
                let quad = [a.clone(), b.clone(), c.clone(), z.clone()];
                (z, quad)
            }
            Side::Right => {
                let z = solve_third(Side::Left, b, a, c, &ratios, sigma)?;
                let quad = [b.clone(), a.clone(), z.clone(), c.clone()];
                (z, quad)
            }
        };
        let mut flags: [Option<Flag>; 3] = [None, None, None];
        // The neighbor sees the leaf from the other side, traversed backwards.
        flags[nk] = Some(b.clone());
        flags[next(nk)] = Some(a.clone());
        flags[next(next(nk))] = Some(third);
        let out = LiftedTriangle { triangle: nt, flags: flags.map(|f| f.expect("all three set")) };
        if self.verify {
            let site = format!("leaf {}", t.sides[k].leaf);
            let [p, q, r] = &out.flags;
            if !is_positive_triple(p, q, r)? || !is_positive_quadruple(&quad[0], &quad[1], &quad[2], &quad[3])? {
                return Err(SynthesisError::NotPositive(site));
            }
        }
        Ok(out)
    }

    /// The projective map taking the flags of `from` onto those of `to`, two
    /// lifts of the same surface triangle.
    pub fn frame_between(&self, from: &LiftedTriangle, to: &LiftedTriangle) -> Result<Matrix, SynthesisError> {
        if from.triangle != to.triangle {
            return Err(SynthesisError::BadPath("lifts of different triangles".into()));
        }
        let m = frame_map(
            &from.flags[0],
            &from.flags[1],
            &from.flags[2].column(0),
            &to.flags[0],
            &to.flags[1],
            &to.flags[2].column(0),
        )?;
        if !from.flags[2].transform(&m).same_flag(&to.flags[2]) {
            return Err(SynthesisError::RealizationFailed("translate is not projectively equivalent".into()));
        }
        Ok(m)
    }

    /// Walks once around the spike `v` of `start` and returns the deck
    /// transformation, in the frame of `start`.
    pub fn fan_monodromy(&self, start: &LiftedTriangle, v: usize) -> Result<Matrix, SynthesisError> {
        let mut cur = start.clone();
        let mut idx = v;
        loop {
            let (nt, nk) = self.lam.neighbor(cur.triangle, idx);
            cur = self.cross_side(&cur, idx)?;
            idx = next(nk);
            if nt == start.triangle && idx == v {
                break;
            }
        }
        self.frame_between(start, &cur)
    }

    fn closed_side(&self, cur: &LiftedTriangle, spike: usize, side: Side) -> Result<ClosedLeafSide, SynthesisError> {
        let fwd = self.fan_monodromy(cur, spike)?;
        // Walking forward is [c] on the right and [c]^-1 on the left.
        let monodromy = match side {
            Side::Right => fwd,
            Side::Left => fwd.inverse().map_err(|_| FlagError::Singular)?,
        };
        let direction = self.lam.vertex_target(cur.triangle, spike).direction;
        Ok(ClosedLeafSide {
            monodromy,
            spike: cur.flags[spike].clone(),
            far: cur.flags[far_vertex(spike, side, direction)].clone(),
        })
    }

    /// Crosses the transverse arc of closed leaf `ci` from the current lift,
    /// which must contain the arc endpoint on the side opposite `to`.
    pub fn cross_arc(&self, cur: &LiftedTriangle, ci: usize, to: Side) -> Result<LiftedTriangle, SynthesisError> {
        let name = &self.lam.closed_leaves()[ci].id;
        let (left, right) = self.lam.arc(ci);
        let (from, dest) = match to {
            Side::Right => (left, right),
            Side::Left => (right, left),
        };
        if cur.triangle != from.0 {
            return Err(SynthesisError::BadPath(format!("arc of {name} does not start here")));
        }
        let known = self.closed_side(cur, from.1, to.opposite())?;
        let fresh = self.fresh(dest.0)?;
        let moving = self.closed_side(&fresh, dest.1, to)?;
        let sigma = self.coords.shear(name).expect("complete coordinates");
        let (l, r) = match to {
            Side::Right => (&known, &moving),
            Side::Left => (&moving, &known),
        };
        let a = glue_across_closed_leaf(l, r, &self.lengths[ci], sigma, to.opposite(), name)?;
        let out = LiftedTriangle { triangle: dest.0, flags: fresh.flags.map(|f| f.transform(&a)) };
        if self.verify {
            let el = eigendata_preserving(&known.monodromy, &known.spike)?;
            let far_new = out.flags[far_vertex(dest.1, to, self.lam.vertex_target(dest.0, dest.1).direction)].clone();
            let (z, zp) = match to {
                Side::Right => (&known.far, &far_new),
                Side::Left => (&far_new, &known.far),
            };
            if !is_positive_quadruple(&el.stable, &el.unstable, z, zp)? {
                return Err(SynthesisError::NotPositive(format!("arc of {name}")));
            }
        }
        Ok(out)
    }

    pub fn follow(&self, start: &LiftedTriangle, path: &[PathStep]) -> Result<LiftedTriangle, SynthesisError> {
        let mut cur = start.clone();
        for step in path {
            cur = match step {
                PathStep::Side { side } if *side < 3 => self.cross_side(&cur, *side)?,
                PathStep::Side { side } => return Err(SynthesisError::BadPath(format!("side {side}"))),
                PathStep::Arc { across, to } => {
                    let ci = self.lam.closed_leaf_index(across).map_err(|e| SynthesisError::BadPath(e.to_string()))?;
                    self.cross_arc(&cur, ci, *to)?
                }
            };
        }
        Ok(cur)
    }
}

fn exact_root(q: &Rational, k: u32) -> Option<Rational> {
    let root = |z: &Integer| {
        let r = z.clone().root(k);
        (r.clone().pow(k) == *z).then_some(r)
    };
    Some(Rational::from((root(q.numer())?, root(q.denom())?)))
}

/// Rescales to determinant one when that keeps the entries exact (or in
/// float mode), and otherwise to positive determinant.
fn normalize(m: Matrix) -> Matrix {
    let n = m.rows();
    let mut m = m;
    let mut d = m.det();
    if d.signum() < 0 && n % 2 == 1 {
        m = m.scale(&Scalar::int(-1));
        d = -d;
    }
    if d.signum() <= 0 {
        return m;
    }
    match &d {
        Scalar::Exact(q) => match exact_root(q, n as u32) {
            Some(r) => m.scale(&Scalar::Exact(r.recip())),
            None => m,
        },
        Scalar::Float(f) => {
            let r = Float::with_val(f.prec(), f.root_ref(n as u32));
            m.scale(&Scalar::Float(r.recip()))
        }
    }
}

/// Reconstructs a representation from polytope coordinates, using the
/// realized base triangle as frame.
pub fn reconstruct(
    coords: &CoordinateVector,
    lam: &Lamination,
    atlas: &LiftAtlas,
    precision: u32,
) -> Result<Representation, SynthesisError> {
    reconstruct_with_frame(coords, lam, atlas, None, precision)
}

/// Like [`reconstruct`], placing the base lifted triangle at `base` instead of
/// at its realized triple.
pub fn reconstruct_with_frame(
    coords: &CoordinateVector,
    lam: &Lamination,
    atlas: &LiftAtlas,
    base: Option<[Flag; 3]>,
    precision: u32,
) -> Result<Representation, SynthesisError> {
    if coords.lamination != lam.name() || atlas.lamination != lam.name() {
        return Err(SynthesisError::Incomplete("coordinates, atlas and lamination disagree on the lamination".into()));
    }
    let report = check_membership(coords, lam, precision);
    if !report.pass {
        return Err(SynthesisError::MembershipFailed(Box::new(report)));
    }
    let deco = Decorator::new(lam, coords)?;
    let t0 = lam.triangle_index(&atlas.base_triangle).map_err(|e| SynthesisError::BadPath(e.to_string()))?;
    let start = match base {
        Some(flags) => {
            let taus = coords.taus_at(&atlas.base_triangle, 0).expect("complete coordinates");
            for (key, t) in &taus {
                if !same_value(&triple_ratio(&flags[0], &flags[1], &flags[2], key.0, key.1, key.2)?, t) {
                    return Err(SynthesisError::RealizationFailed("base frame has the wrong triple ratios".into()));
                }
            }
            LiftedTriangle { triangle: t0, flags }
        }
        None => deco.fresh(t0)?,
    };
    let mut gens = BTreeMap::new();
    for g in &atlas.generators {
        let path = atlas.generator_paths.get(g).ok_or_else(|| SynthesisError::BadPath(format!("no path for {g}")))?;
        let end = deco.follow(&start, path)?;
        if end.triangle != t0 {
            return Err(SynthesisError::BadPath(format!("path for {g} does not return to the base triangle")));
        }
        gens.insert(g.clone(), normalize(deco.frame_between(&start, &end)?));
    }
    let rep = Representation::new(coords.n, gens)?;
    let r = rep.eval_word(&atlas.relator)?;
    let tol = (!r.is_exact()).then(|| {
        let prec = r.precision().unwrap_or(precision);
        Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2))
    });
    if !r.is_scalar_multiple_of_identity(tol.as_ref()) {
        return Err(SynthesisError::RelatorViolation(format!(
            "relator {} is not a multiple of the identity",
            atlas.relator
        )));
    }
    Ok(rep)
}
