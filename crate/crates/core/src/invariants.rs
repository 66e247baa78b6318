//! Triangle, shear and length invariants of a representation, read off from
//! the flags at lifted ideal vertices.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::atlas::{FixedPoint, LiftAtlas, QuadrupleLift};
use crate::coords::{CoordinateVector, TripleRatios};
use crate::flag::{double_ratio, triple_indices, triple_ratio, Flag, FlagError};
use crate::lamination::{End, Lamination, LaminationError};
use crate::polytope::{check_membership, MembershipReport};
use crate::representation::{positive_eigendata, EigenData, RepError, Representation, Word};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InvariantError {
    #[error(transparent)]
    Representation(#[from] RepError),
    #[error(transparent)]
    Flag(#[from] FlagError),
    #[error(transparent)]
    Lamination(#[from] LaminationError),
    #[error("flags at {0} are not positive")]
    NotPositive(String),
    #[error("atlas has no annotation for {0}")]
    MissingAnnotation(String),
    #[error("atlas does not match the lamination: {0}")]
    AtlasMismatch(String),
    #[error("coordinates violate the closed leaf conditions")]
    NotHitchinCompatible(Box<MembershipReport>),
}

/// Evaluates invariants for one representation, caching eigendata per word.
pub struct Invariants<'a> {
    rep: &'a Representation,
    lam: &'a Lamination,
    atlas: &'a LiftAtlas,
    precision: u32,
    lift: usize,
    cache: RefCell<HashMap<Word, EigenData>>,
}

impl<'a> Invariants<'a> {
    pub fn new(rep: &'a Representation, lam: &'a Lamination, atlas: &'a LiftAtlas, precision: u32) -> Invariants<'a> {
        Invariants { rep, lam, atlas, precision, lift: 0, cache: RefCell::new(HashMap::new()) }
    }

    /// Uses the `i`-th annotation of each site (falling back to the first when
    /// a site has fewer).
    pub fn with_lift(mut self, i: usize) -> Invariants<'a> {
        self.lift = i;
        self
    }

    pub fn n(&self) -> usize {
        self.rep.n()
    }

    pub fn eigendata(&self, w: &Word) -> Result<EigenData, InvariantError> {
        let w = w.reduced();
        if let Some(e) = self.cache.borrow().get(&w) {
            return Ok(e.clone());
        }
        let m = self.rep.eval_word(&w)?;
        let e = positive_eigendata(&m, self.precision)?;
        self.cache.borrow_mut().insert(w, e.clone());
        Ok(e)
    }

    pub fn flag(&self, p: &FixedPoint) -> Result<Flag, InvariantError> {
        let e = self.eigendata(&p.word)?;
        Ok(match p.end {
            End::Positive => e.stable,
            End::Negative => e.unstable,
        })
    }

    fn pick<'b, T>(&self, lifts: Option<&'b Vec<T>>, site: &str) -> Result<&'b T, InvariantError> {
        let lifts =
            lifts.filter(|l| !l.is_empty()).ok_or_else(|| InvariantError::MissingAnnotation(site.to_string()))?;
        Ok(lifts.get(self.lift).unwrap_or(&lifts[0]))
    }

    /// `exp tau_abc(T, v)` for `v = v0, v1, v2`.
    pub fn triangle(&self, id: &str) -> Result<[TripleRatios; 3], InvariantError> {
        self.lam.triangle_index(id)?;
        let lift = self.pick(self.atlas.triangles.get(id), &format!("triangle {id}"))?;
        let flags = [self.flag(&lift[0])?, self.flag(&lift[1])?, self.flag(&lift[2])?];
        let mut out: [TripleRatios; 3] = Default::default();
        for (v, slot) in out.iter_mut().enumerate() {
            let (e, f, g) = (&flags[v], &flags[(v + 1) % 3], &flags[(v + 2) % 3]);
            for (a, b, c) in triple_indices(self.n()) {
                let t = triple_ratio(e, f, g, a, b, c)?;
                if !t.is_positive() {
                    return Err(InvariantError::NotPositive(format!("triangle {id}")));
                }
                slot.insert((a, b, c), t);
            }
        }
        Ok(out)
    }

    fn shear_of(&self, q: &QuadrupleLift, site: &str) -> Result<Vec<Scalar>, InvariantError> {
        let (x, y, z, zp) = (self.flag(&q.x)?, self.flag(&q.y)?, self.flag(&q.z)?, self.flag(&q.z_prime)?);
        (1..self.n())
            .map(|a| {
                let d = double_ratio(&x, &y, &z, &zp, a)?;
                if d.is_positive() {
                    Ok(d)
                } else {
                    Err(InvariantError::NotPositive(site.to_string()))
                }
            })
            .collect()
    }

    /// `exp sigma_a(g)` for an infinite leaf, `a = 1, ..., n-1`.
    pub fn shear_infinite(&self, id: &str) -> Result<Vec<Scalar>, InvariantError> {
        self.lam.leaf_index(id)?;
        let site = format!("leaf {id}");
        let q = self.pick(self.atlas.infinite_leaves.get(id), &site)?;
        self.shear_of(q, &site)
    }

    /// `exp sigma_a(c)` for a closed leaf, using its transverse arc.
    pub fn shear_closed(&self, id: &str) -> Result<Vec<Scalar>, InvariantError> {
        self.lam.closed_leaf_index(id)?;
        let site = format!("closed leaf {id}");
        let q = self.pick(self.atlas.closed_leaves.get(id), &site)?;
        self.shear_of(q, &site)
    }

    /// `exp l_a(c) = m_a / m_(a+1)` for a closed leaf.
    pub fn lengths(&self, id: &str) -> Result<Vec<Scalar>, InvariantError> {
        let w = self
            .atlas
            .closed_leaf_words
            .get(id)
            .ok_or_else(|| InvariantError::MissingAnnotation(format!("closed leaf {id}")))?;
        Ok(self.eigendata(w)?.ratios())
    }

    /// Every invariant, without checking the closed leaf conditions.
    pub fn coordinates(&self) -> Result<CoordinateVector, InvariantError> {
        if self.atlas.lamination != self.lam.name() {
            return Err(InvariantError::AtlasMismatch(format!(
                "atlas is for {:?}, lamination is {:?}",
                self.atlas.lamination,
                self.lam.name()
            )));
        }
        let mut out = CoordinateVector::new(self.n(), self.lam.name());
        // Lengths first: a closed leaf that is not loxodromic is the most
        // basic reason for a representation to fall outside the component.
        for c in self.lam.closed_leaves() {
            out.lengths.insert(c.id.clone(), self.lengths(&c.id)?);
        }
        for t in self.lam.triangles() {
            let [v0, _, _] = self.triangle(&t.id)?;
            out.triangles.insert(t.id.clone(), v0);
        }
        for g in self.lam.infinite_leaves() {
            out.shears.insert(g.id.clone(), self.shear_infinite(&g.id)?);
        }
        for c in self.lam.closed_leaves() {
            out.shears.insert(c.id.clone(), self.shear_closed(&c.id)?);
        }
        Ok(out)
    }
}

/// The full coordinate vector of `rep`, checked against the closed leaf
/// equalities and inequalities.
pub fn full_coordinates(
    rep: &Representation,
    lam: &Lamination,
    atlas: &LiftAtlas,
    precision: u32,
) -> Result<CoordinateVector, InvariantError> {
    let coords = Invariants::new(rep, lam, atlas, precision).coordinates()?;
    let report = check_membership(&coords, lam, precision);
    if !report.pass {
        return Err(InvariantError::NotHitchinCompatible(Box::new(report)));
    }
    Ok(coords)
}

/// `exp l_a` of a single word.
pub fn lengths(rep: &Representation, w: &Word, precision: u32) -> Result<Vec<Scalar>, RepError> {
    Ok(positive_eigendata(&rep.eval_word(w)?, precision)?.ratios())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::Matrix;
    use std::collections::BTreeMap;

    #[test]
    fn elliptic_and_mixed_sign_words_are_rejected() {
        let f = fixtures::load("pants").unwrap();
        let mut gens = BTreeMap::new();
        gens.insert("r".to_string(), Matrix::from_i64(&[&[1, 0, 0], &[0, 0, -1], &[0, 1, 0]]));
        gens.insert("s".to_string(), Matrix::from_i64(&[&[2, 0, 0], &[0, -1, 0], &[0, 0, -3]]));
        let rep = Representation::new(3, gens).unwrap();
        let inv = Invariants::new(&rep, &f.lamination, &f.atlas, 256);
        let err = inv.eigendata(&Word::letter("r", false)).unwrap_err();
        assert!(matches!(err, InvariantError::Representation(RepError::NotLoxodromic(_))), "{err}");
        let err = inv.eigendata(&Word::letter("s", false)).unwrap_err();
        assert!(matches!(err, InvariantError::Representation(RepError::MixedSigns)), "{err}");
    }

    #[test]
    fn lengths_are_eigenvalue_ratios() {
        let mut gens = BTreeMap::new();
        gens.insert("d".to_string(), Matrix::from_i64(&[&[9, 0, 0], &[0, 3, 0], &[0, 0, 1]]));
        let rep = Representation::new(3, gens).unwrap();
        assert_eq!(lengths(&rep, &Word::letter("d", false), 256).unwrap(), vec![Scalar::int(3), Scalar::int(3)]);
    }

    #[test]
    fn fuchsian_lengths_are_symmetric() {
        let f = fixtures::load("single-leaf").unwrap();
        let w = &f.atlas.closed_leaf_words["c"];
        let l2 = lengths(&f.fuchsian, w, 256).unwrap();
        let l4 = lengths(&f.fuchsian.symmetric_power(4).unwrap(), w, 256).unwrap();
        assert_eq!(l4, vec![l2[0].clone(); 3]);
    }
}
