//! Lift annotations: every lifted ideal vertex is named as a fixed point of a
//! group element, so that flags can be read off from a representation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lamination::{End, Lamination, Side};
use crate::representation::Word;

/// The attracting (`+`) or repelling (`-`) fixed point of `word`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FixedPoint {
    pub word: Word,
    pub end: End,
}

impl FixedPoint {
    pub fn new(word: Word, end: End) -> FixedPoint {
        FixedPoint { word, end }
    }

    /// The same point for the lift translated by `h`.
    pub fn conjugate_by(&self, h: &Word) -> FixedPoint {
        FixedPoint { word: self.word.conjugate_by(h), end: self.end }
    }
}

/// The four vertices used by a shear: `x` and `y` are the positive and negative
/// ends of the lifted leaf, `z` lies on its left and `z_prime` on its right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleLift {
    pub x: FixedPoint,
    pub y: FixedPoint,
    pub z: FixedPoint,
    pub z_prime: FixedPoint,
}

impl QuadrupleLift {
    pub fn conjugate_by(&self, h: &Word) -> QuadrupleLift {
        QuadrupleLift {
            x: self.x.conjugate_by(h),
            y: self.y.conjugate_by(h),
            z: self.z.conjugate_by(h),
            z_prime: self.z_prime.conjugate_by(h),
        }
    }
}

/// One move of a dual-graph path: cross side `k` of the current triangle, or
/// cross the transverse arc of the closed leaf `across` towards side `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathStep {
    Side { side: usize },
    Arc { across: String, to: Side },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftAtlas {
    pub lamination: String,
    pub generators: Vec<String>,
    pub relator: Word,
    pub base_triangle: String,
    /// `[c]` for each closed leaf, translating along the lift used by its
    /// annotations in the direction of its orientation.
    pub closed_leaf_words: BTreeMap<String, Word>,
    /// Per triangle, one or more lifts; each gives the vertices `v0, v1, v2`.
    pub triangles: BTreeMap<String, Vec<[FixedPoint; 3]>>,
    pub infinite_leaves: BTreeMap<String, Vec<QuadrupleLift>>,
    /// Closed leaf id to lifts of the leaf together with its transverse arc.
    pub closed_leaves: BTreeMap<String, Vec<QuadrupleLift>>,
    /// Per generator, a path from the base lifted triangle to its translate.
    pub generator_paths: BTreeMap<String, Vec<PathStep>>,
}

impl LiftAtlas {
    pub fn from_json(s: &str) -> Result<LiftAtlas, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Structural checks against a lamination. Returns the list of problems.
    pub fn check(&self, lam: &Lamination) -> Vec<String> {
        let mut out = Vec::new();
        let gens: BTreeSet<&str> = self.generators.iter().map(String::as_str).collect();
        let check_word = |w: &Word, ctx: &str, out: &mut Vec<String>| {
            for g in w.generators() {
                if !gens.contains(g) {
                    out.push(format!("{ctx}: undeclared generator {g:?}"));
                }
            }
        };
        check_word(&self.relator, "relator", &mut out);
        if lam.triangle_index(&self.base_triangle).is_err() {
            out.push(format!("unknown base triangle {:?}", self.base_triangle));
        }
        for t in lam.triangles() {
            match self.triangles.get(&t.id) {
                Some(lifts) if !lifts.is_empty() => {
                    for l in lifts {
                        for fp in l {
                            check_word(&fp.word, &format!("triangle {}", t.id), &mut out);
                        }
                    }
                }
                _ => out.push(format!("no lift for triangle {}", t.id)),
            }
        }
        for g in lam.infinite_leaves() {
            match self.infinite_leaves.get(&g.id) {
                Some(lifts) if !lifts.is_empty() => {
                    for l in lifts {
                        for fp in [&l.x, &l.y, &l.z, &l.z_prime] {
                            check_word(&fp.word, &format!("leaf {}", g.id), &mut out);
                        }
                    }
                }
                _ => out.push(format!("no lift for leaf {}", g.id)),
            }
        }
        for c in lam.closed_leaves() {
            let Some(word) = self.closed_leaf_words.get(&c.id) else {
                out.push(format!("no word for closed leaf {}", c.id));
                continue;
            };
            check_word(word, &format!("closed leaf {}", c.id), &mut out);
            match self.closed_leaves.get(&c.id) {
                Some(lifts) if !lifts.is_empty() => {
                    for l in lifts {
                        for fp in [&l.x, &l.y, &l.z, &l.z_prime] {
                            check_word(&fp.word, &format!("closed leaf {}", c.id), &mut out);
                        }
                        if l.x.word != l.y.word || l.x.end != End::Positive || l.y.end != End::Negative {
                            out.push(format!("closed leaf {}: x, y must be the two fixed points of one word", c.id));
                        } else if !conjugate_words(&l.x.word, word) {
                            out.push(format!("closed leaf {}: annotation is not a conjugate of its word", c.id));
                        }
                    }
                }
                _ => out.push(format!("no lift for closed leaf {}", c.id)),
            }
        }
        for g in &self.generators {
            if !self.generator_paths.contains_key(g) {
                out.push(format!("no path for generator {g}"));
            }
        }
        for (g, path) in &self.generator_paths {
            if !gens.contains(g.as_str()) {
                out.push(format!("path for undeclared generator {g}"));
            }
            if let Err(e) = trace_path(lam, &self.base_triangle, path) {
                out.push(format!("path for {g}: {e}"));
            }
        }
        out
    }
}

/// Follows a dual-graph path at the level of surface triangles and checks that
/// it is well formed and returns to the start.
pub fn trace_path(lam: &Lamination, start: &str, path: &[PathStep]) -> Result<(), String> {
    let t0 = lam.triangle_index(start).map_err(|e| e.to_string())?;
    let mut t = t0;
    for step in path {
        t = match step {
            PathStep::Side { side } => {
                if *side > 2 {
                    return Err(format!("side index {side}"));
                }
                lam.neighbor(t, *side).0
            }
            PathStep::Arc { across, to } => {
                let ci = lam.closed_leaf_index(across).map_err(|e| e.to_string())?;
                let (left, right) = lam.arc(ci);
                let (from, dest) = if *to == Side::Right { (left, right) } else { (right, left) };
                if from.0 != t {
                    return Err(format!("arc of {across} does not start at the current triangle"));
                }
                dest.0
            }
        };
    }
    if t != t0 {
        return Err("path does not return to the base triangle".into());
    }
    Ok(())
}

/// Whether two words are conjugate, decided on cyclic reductions.
pub fn conjugate_words(u: &Word, v: &Word) -> bool {
    let a = u.cyclically_reduced().0;
    let b = v.cyclically_reduced().0;
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|r| a.iter().cycle().skip(r).take(a.len()).eq(b.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugacy_on_cyclic_words() {
        let u = Word::parse("a b c").unwrap();
        assert!(conjugate_words(&u, &Word::parse("c a b").unwrap()));
        assert!(conjugate_words(&u, &u.conjugate_by(&Word::parse("d^-1 a").unwrap())));
        assert!(!conjugate_words(&u, &Word::parse("a c b").unwrap()));
    }

    #[test]
    fn path_step_json() {
        let steps: Vec<PathStep> = serde_json::from_str(r#"[{"side":1},{"across":"c1","to":"right"}]"#).unwrap();
        assert_eq!(steps[0], PathStep::Side { side: 1 });
        assert_eq!(steps[1], PathStep::Arc { across: "c1".into(), to: Side::Right });
    }
}
