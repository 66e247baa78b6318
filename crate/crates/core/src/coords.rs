//! Exponentiated triangle, shear and length coordinates.
//!
//! Triangle invariants are stored once per triangle, at vertex `v0`; values at
//! the other vertices follow from rotating the index triple.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::flag::triple_indices;
use crate::lamination::Lamination;
use crate::scalar::Scalar;

pub type TripleKey = (usize, usize, usize);

/// Triple ratios of one flag triple, keyed by `(a, b, c)`.
pub type TripleRatios = BTreeMap<TripleKey, Scalar>;

/// Rotates an index triple: the value of `(a, b, c)` at vertex `v` is stored
/// under the returned key at vertex `v0`.
pub fn rotate_to_base(vertex: usize, (a, b, c): TripleKey) -> TripleKey {
    match vertex % 3 {
        0 => (a, b, c),
        1 => (c, a, b),
        _ => (b, c, a),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoordRepr", into = "CoordRepr")]
pub struct CoordinateVector {
    pub n: usize,
    pub lamination: String,
    /// Triangle id to `exp tau_abc(T, v0)`.
    pub triangles: BTreeMap<String, TripleRatios>,
    /// Leaf id (infinite or closed) to `exp sigma_a`, `a = 1, ..., n-1`.
    pub shears: BTreeMap<String, Vec<Scalar>>,
    /// Closed leaf id to `exp l_a`; only filled when computed from a representation.
    pub lengths: BTreeMap<String, Vec<Scalar>>,
}

#[derive(Serialize, Deserialize)]
struct CoordRepr {
    n: usize,
    lamination: String,
    triangles: BTreeMap<String, BTreeMap<String, Scalar>>,
    shears: BTreeMap<String, Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    lengths: BTreeMap<String, Vec<Scalar>>,
}

fn parse_key(s: &str) -> Result<TripleKey, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad index key {s:?}: {e}"))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(format!("bad index key {s:?}")),
    }
}

impl TryFrom<CoordRepr> for CoordinateVector {
    type Error = String;
    fn try_from(r: CoordRepr) -> Result<Self, String> {
        let mut triangles = BTreeMap::new();
        for (t, vals) in r.triangles {
            let mut m = BTreeMap::new();
            for (k, v) in vals {
                m.insert(parse_key(&k)?, v);
            }
            triangles.insert(t, m);
        }
        Ok(CoordinateVector { n: r.n, lamination: r.lamination, triangles, shears: r.shears, lengths: r.lengths })
    }
}

impl From<CoordinateVector> for CoordRepr {
    fn from(c: CoordinateVector) -> CoordRepr {
        let triangles = c
            .triangles
            .into_iter()
            .map(|(t, vals)| (t, vals.into_iter().map(|((a, b, cc), v)| (format!("{a},{b},{cc}"), v)).collect()))
            .collect();
        CoordRepr { n: c.n, lamination: c.lamination, triangles, shears: c.shears, lengths: c.lengths }
    }
}

impl CoordinateVector {
    pub fn new(n: usize, lamination: &str) -> CoordinateVector {
        CoordinateVector {
            n,
            lamination: lamination.to_string(),
            triangles: BTreeMap::new(),
            shears: BTreeMap::new(),
            lengths: BTreeMap::new(),
        }
    }

    /// `exp tau_abc(T, v)`.
    pub fn tau(&self, triangle: &str, vertex: usize, key: TripleKey) -> Option<&Scalar> {
        self.triangles.get(triangle)?.get(&rotate_to_base(vertex, key))
    }

    /// All triple ratios of `T` seen from vertex `v`.
    pub fn taus_at(&self, triangle: &str, vertex: usize) -> Option<TripleRatios> {
        triple_indices(self.n).into_iter().map(|k| self.tau(triangle, vertex, k).map(|v| (k, v.clone()))).collect()
    }

    /// `exp sigma_a` for `a = 1, ..., n-1`.
    pub fn shear(&self, leaf: &str) -> Option<&[Scalar]> {
        self.shears.get(leaf).map(Vec::as_slice)
    }

    pub fn is_exact(&self) -> bool {
        self.triangles.values().flat_map(|m| m.values()).chain(self.shears.values().flatten()).all(Scalar::is_exact)
    }

    /// The same coordinates rounded to floats at `prec` bits.
    pub fn to_float(&self, prec: u32) -> CoordinateVector {
        let mut out = self.clone();
        let values = out.triangles.values_mut().flat_map(|m| m.values_mut());
        let values = values.chain(out.shears.values_mut().flatten()).chain(out.lengths.values_mut().flatten());
        for v in values {
            *v = v.clone().into_float(prec);
        }
        out
    }

    /// Checks that every coordinate the lamination needs is present, has the
    /// right arity and is strictly positive.
    pub fn check_complete(&self, lam: &Lamination) -> Result<(), String> {
        if self.n < 2 {
            return Err(format!("n = {} is below 2", self.n));
        }
        let keys = triple_indices(self.n);
        for t in lam.triangles() {
            let vals = self.triangles.get(&t.id).ok_or_else(|| format!("missing triangle {}", t.id))?;
            for k in &keys {
                let v = vals.get(k).ok_or_else(|| format!("triangle {} misses index {k:?}", t.id))?;
                if !v.is_positive() {
                    return Err(format!("triangle {} index {k:?} is not positive", t.id));
                }
            }
            if vals.len() != keys.len() {
                return Err(format!("triangle {} has unexpected indices", t.id));
            }
        }
        let leaf_ids = lam.infinite_leaves().iter().map(|g| &g.id).chain(lam.closed_leaves().iter().map(|c| &c.id));
        for id in leaf_ids {
            let vals = self.shears.get(id).ok_or_else(|| format!("missing shears of {id}"))?;
            if vals.len() != self.n - 1 {
                return Err(format!("leaf {id} has {} shears, expected {}", vals.len(), self.n - 1));
            }
            if let Some(i) = vals.iter().position(|v| !v.is_positive()) {
                return Err(format!("shear {} of leaf {id} is not positive", i + 1));
            }
        }
        Ok(())
    }

    /// Values in a fixed order: triangles, then shears, each sorted by id.
    pub fn values(&self) -> Vec<(String, &Scalar)> {
        let mut out = Vec::new();
        for (t, vals) in &self.triangles {
            for ((a, b, c), v) in vals {
                out.push((format!("tau {t} {a},{b},{c}"), v));
            }
        }
        for (l, vals) in &self.shears {
            for (i, v) in vals.iter().enumerate() {
                out.push((format!("sigma {l} {}", i + 1), v));
            }
        }
        out
    }

    /// Largest `|x - y|` over matching coordinates, or `None` when the two
    /// vectors are not indexed alike.
    pub fn max_deviation(&self, other: &CoordinateVector) -> Option<Scalar> {
        let a = self.values();
        let b = other.values();
        if a.len() != b.len() || self.n != other.n {
            return None;
        }
        let mut worst = Scalar::zero();
        for ((ka, va), (kb, vb)) in a.iter().zip(b.iter()) {
            if ka != kb {
                return None;
            }
            let d = (*va - *vb).abs();
            if d > worst {
                worst = d;
            }
        }
        Some(worst)
    }

    /// A JSON value with an extra `log` block holding natural logarithms at the
    /// given precision.
    pub fn to_json_with_logs(&self, prec: u32) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        let log = |x: &Scalar| serde_json::Value::String(x.ln(prec).to_string());
        let mut tri = serde_json::Map::new();
        for (t, vals) in &self.triangles {
            let m: serde_json::Map<_, _> = vals.iter().map(|((a, b, c), x)| (format!("{a},{b},{c}"), log(x))).collect();
            tri.insert(t.clone(), m.into());
        }
        let mut sh = serde_json::Map::new();
        for (l, vals) in &self.shears {
            sh.insert(l.clone(), vals.iter().map(log).collect::<Vec<_>>().into());
        }
        let mut block = serde_json::Map::new();
        block.insert("precision".into(), prec.into());
        block.insert("triangles".into(), tri.into());
        block.insert("shears".into(), sh.into());
        if !self.lengths.is_empty() {
            let le: serde_json::Map<_, _> = self
                .lengths
                .iter()
                .map(|(l, vals)| (l.clone(), vals.iter().map(log).collect::<Vec<_>>().into()))
                .collect();
            block.insert("lengths".into(), le.into());
        }
        v.as_object_mut().expect("object").insert("log".into(), block.into());
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_of_indices() {
        let mut c = CoordinateVector::new(4, "x");
        let mut m = BTreeMap::new();
        m.insert((2, 1, 1), Scalar::int(2));
        m.insert((1, 2, 1), Scalar::int(3));
        m.insert((1, 1, 2), Scalar::int(5));
        c.triangles.insert("T".into(), m);
        // tau_abc(v0) = tau_bca(v1) = tau_cab(v2)
        assert_eq!(c.tau("T", 1, (1, 1, 2)).unwrap(), &Scalar::int(2));
        assert_eq!(c.tau("T", 2, (1, 2, 1)).unwrap(), &Scalar::int(2));
        assert_eq!(c.tau("T", 1, (1, 2, 1)).unwrap(), &Scalar::int(5));
        assert_eq!(c.tau("T", 2, (1, 1, 2)).unwrap(), &Scalar::int(3));
    }

    #[test]
    fn json_round_trip() {
        let mut c = CoordinateVector::new(3, "lam");
        c.triangles.insert("T".into(), [((1, 1, 1), Scalar::ratio(2, 3))].into_iter().collect());
        c.shears.insert("g".into(), vec![Scalar::int(2), Scalar::ratio(1, 2)]);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"1,1,1\":\"2/3\""));
        let back: CoordinateVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
