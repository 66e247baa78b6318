//! Combinatorial model of a maximal geodesic lamination with finitely many
//! leaves on a closed oriented surface.
//!
//! Conventions:
//! - A triangle lists its vertices `v0, v1, v2` clockwise. Side `k` joins
//!   `v_k` to `v_(k+1)` (indices mod 3).
//! - A side record `{leaf, side}` says on which side of the oriented leaf the
//!   triangle lies. If the triangle is on the left, `v_k` is the positive end of
//!   the leaf and `v_(k+1)` the negative end; on the right it is the reverse.
//! - Every vertex is a spike: it spirals onto one side of a closed leaf, either
//!   in the direction of that leaf's orientation (`with`) or against it.
//! - Walking *forward* around a spike at `v_i` crosses side `i`. Around one
//!   side of a closed leaf `c` this closes up after `k` steps; the resulting
//!   deck transformation is `[c]` on the right side and `[c]^-1` on the left.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    With,
    Against,
}

/// Which end of an oriented leaf, or which fixed point of a group element:
/// `+` is the positive end (attracting fixed point).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl End {
    pub fn opposite(self) -> End {
        match self {
            End::Positive => End::Negative,
            End::Negative => End::Positive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpiralTarget {
    pub closed_leaf: String,
    pub side: Side,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedLeaf {
    pub id: String,
    pub arc: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpikeRef {
    pub triangle: String,
    pub vertex: usize,
}

/// A transverse arc crossing one closed leaf once, from a spike of the
/// triangle on its left to a spike of the triangle on its right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransverseArc {
    pub id: String,
    pub left: SpikeRef,
    pub right: SpikeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfiniteLeaf {
    pub id: String,
    pub positive_end: SpiralTarget,
    pub negative_end: SpiralTarget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideRef {
    pub leaf: String,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub id: String,
    pub sides: [SideRef; 3],
    pub vertices: [SpiralTarget; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpiralItem {
    Spike(SpikeRef),
    LeafEnd { leaf: String, end: End },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiralOrder {
    pub closed_leaf: String,
    pub side: Side,
    pub items: Vec<SpiralItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaminationComplex {
    pub name: String,
    pub genus: usize,
    pub closed_leaves: Vec<ClosedLeaf>,
    pub arcs: Vec<TransverseArc>,
    pub infinite_leaves: Vec<InfiniteLeaf>,
    pub triangles: Vec<Triangle>,
    pub spiral_orders: Vec<SpiralOrder>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    GenusTooSmall { genus: usize },
    Count { what: String, expected: String, found: usize },
    DuplicateId { id: String },
    DanglingReference { context: String, id: String },
    BadVertexIndex { context: String, vertex: usize },
    LeafSides { leaf: String, left: usize, right: usize },
    EndMismatch { triangle: String, side: usize, detail: String },
    ArcEndpoint { closed_leaf: String, detail: String },
    SpiralOrder { closed_leaf: String, side: Side, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GenusTooSmall { genus } => write!(f, "genus {genus} is below 2"),
            Violation::Count { what, expected, found } => write!(f, "{what}: expected {expected}, found {found}"),
            Violation::DuplicateId { id } => write!(f, "duplicate id {id:?}"),
            Violation::DanglingReference { context, id } => write!(f, "{context} refers to unknown {id:?}"),
            Violation::BadVertexIndex { context, vertex } => write!(f, "{context}: vertex index {vertex} out of range"),
            Violation::LeafSides { leaf, left, right } => {
                write!(f, "leaf {leaf:?} bounds {left} triangle sides on its left and {right} on its right")
            }
            Violation::EndMismatch { triangle, side, detail } => {
                write!(f, "triangle {triangle:?} side {side}: {detail}")
            }
            Violation::ArcEndpoint { closed_leaf, detail } => write!(f, "arc of {closed_leaf:?}: {detail}"),
            Violation::SpiralOrder { closed_leaf, side, detail } => {
                write!(f, "spiral order of {closed_leaf:?} ({side}): {detail}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideMultiplicity {
    pub closed_leaf: String,
    pub side: Side,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub closed_leaves: usize,
    pub infinite_leaves: usize,
    pub triangles: usize,
    pub multiplicities: Vec<SideMultiplicity>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaminationError {
    #[error("invalid lamination: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown leaf {0:?}")]
    UnknownLeaf(String),
    #[error("unknown triangle {0:?}")]
    UnknownTriangle(String),
    #[error("no spiraling items on side {1} of {0:?}")]
    EmptySide(String, Side),
}

/// One step of the forward walk around a side of a closed leaf: the spike of
/// `triangle` at `vertex`, followed by the leaf crossed at side `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpiralStep {
    pub triangle: usize,
    pub vertex: usize,
    pub leaf: usize,
    /// The end of `leaf` that spirals here. `Positive` means the leaf is
    /// oriented towards the closed leaf.
    pub leaf_end: End,
}

/// A validated lamination with precomputed adjacency.
#[derive(Debug, Clone)]
pub struct Lamination {
    complex: LaminationComplex,
    closed_index: HashMap<String, usize>,
    leaf_index: HashMap<String, usize>,
    triangle_index: HashMap<String, usize>,
    /// `neighbors[t][k] = (t', k')`: crossing side `k` of `t` lands on side `k'` of `t'`.
    neighbors: Vec<[(usize, usize); 3]>,
    /// Triangle side on the left and on the right of each infinite leaf.
    leaf_sides: Vec<[(usize, usize); 2]>,
    spirals: BTreeMap<(usize, Side), Vec<SpiralStep>>,
}

pub fn next(i: usize) -> usize {
    (i + 1) % 3
}

pub fn prev(i: usize) -> usize {
    (i + 2) % 3
}

/// Index of the vertex of a triangle in a fan that lies farthest from the
/// closed leaf, given the spike index and how the spike spirals.
pub fn far_vertex(spike: usize, side: Side, direction: Direction) -> usize {
    match (side, direction) {
        (Side::Right, Direction::With) | (Side::Left, Direction::Against) => next(spike),
        (Side::Right, Direction::Against) | (Side::Left, Direction::With) => prev(spike),
    }
}

/// Whether a spike at `(side, direction)` is the attracting fixed point of the
/// deck transformation obtained by walking forward once around its fan.
pub fn spike_end(side: Side, direction: Direction) -> End {
    match (side, direction) {
        (Side::Right, Direction::With) | (Side::Left, Direction::Against) => End::Positive,
        _ => End::Negative,
    }
}

impl LaminationComplex {
    pub fn from_json(s: &str) -> Result<LaminationComplex, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn validate(&self) -> ValidationReport {
        let (violations, multiplicities) = match Lamination::build(self.clone()) {
            Ok(lam) => (Vec::new(), lam.multiplicities()),
            Err(v) => (v, Vec::new()),
        };
        ValidationReport {
            valid: violations.is_empty(),
            closed_leaves: self.closed_leaves.len(),
            infinite_leaves: self.infinite_leaves.len(),
            triangles: self.triangles.len(),
            multiplicities,
            violations,
        }
    }
}

fn index_ids<'a>(
    ids: impl Iterator<Item = &'a String>,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Violation>,
) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if !seen.insert(id.clone()) {
            out.push(Violation::DuplicateId { id: id.clone() });
        }
        map.entry(id.clone()).or_insert(i);
    }
    map
}

impl Lamination {
    pub fn new(complex: LaminationComplex) -> Result<Lamination, LaminationError> {
        Lamination::build(complex).map_err(LaminationError::Invalid)
    }

    fn build(complex: LaminationComplex) -> Result<Lamination, Vec<Violation>> {
        let mut v = Vec::new();
        let g = complex.genus;
        if g < 2 {
            v.push(Violation::GenusTooSmall { genus: g });
        }
        let gm1 = g.saturating_sub(1);
        if complex.triangles.len() != 4 * gm1 {
            v.push(Violation::Count {
                what: "triangles".into(),
                expected: (4 * gm1).to_string(),
                found: complex.triangles.len(),
            });
        }
        if complex.infinite_leaves.len() != 6 * gm1 {
            v.push(Violation::Count {
                what: "infinite leaves".into(),
                expected: (6 * gm1).to_string(),
                found: complex.infinite_leaves.len(),
            });
        }
        let s = complex.closed_leaves.len();
        if s == 0 || s > 3 * gm1 {
            v.push(Violation::Count { what: "closed leaves".into(), expected: format!("1..={}", 3 * gm1), found: s });
        }

        let mut seen = BTreeSet::new();
        let closed_index = index_ids(complex.closed_leaves.iter().map(|c| &c.id), &mut seen, &mut v);
        let leaf_index = index_ids(complex.infinite_leaves.iter().map(|l| &l.id), &mut seen, &mut v);
        let triangle_index = index_ids(complex.triangles.iter().map(|t| &t.id), &mut seen, &mut v);
        let arc_index = index_ids(complex.arcs.iter().map(|a| &a.id), &mut seen, &mut v);

        let check_target = |t: &SpiralTarget, ctx: &str, v: &mut Vec<Violation>| {
            if !closed_index.contains_key(&t.closed_leaf) {
                v.push(Violation::DanglingReference { context: ctx.to_string(), id: t.closed_leaf.clone() });
            }
        };
        for l in &complex.infinite_leaves {
            check_target(&l.positive_end, &format!("leaf {}", l.id), &mut v);
            check_target(&l.negative_end, &format!("leaf {}", l.id), &mut v);
        }
        let mut sides_of_leaf: Vec<Vec<(Side, usize, usize)>> = vec![Vec::new(); complex.infinite_leaves.len()];
        for (ti, t) in complex.triangles.iter().enumerate() {
            for (k, sr) in t.sides.iter().enumerate() {
                match leaf_index.get(&sr.leaf) {
                    Some(&li) => sides_of_leaf[li].push((sr.side, ti, k)),
                    None => v.push(Violation::DanglingReference {
                        context: format!("triangle {}", t.id),
                        id: sr.leaf.clone(),
                    }),
                }
            }
            for vt in &t.vertices {
                check_target(vt, &format!("triangle {}", t.id), &mut v);
            }
        }
        if !v.is_empty() {
            return Err(v);
        }

        // Each leaf bounds one triangle side on each of its sides, and the ends
        // of the leaf agree with the spikes at the ends of those sides.
        let mut leaf_sides = vec![[(0, 0); 2]; complex.infinite_leaves.len()];
        for (li, sides) in sides_of_leaf.iter().enumerate() {
            let left: Vec<_> = sides.iter().filter(|s| s.0 == Side::Left).collect();
            let right: Vec<_> = sides.iter().filter(|s| s.0 == Side::Right).collect();
            if left.len() != 1 || right.len() != 1 {
                v.push(Violation::LeafSides {
                    leaf: complex.infinite_leaves[li].id.clone(),
                    left: left.len(),
                    right: right.len(),
                });
                continue;
            }
            leaf_sides[li] = [(left[0].1, left[0].2), (right[0].1, right[0].2)];
            let leaf = &complex.infinite_leaves[li];
            for &&(side, ti, k) in left.iter().chain(right.iter()) {
                let t = &complex.triangles[ti];
                let (pos, neg) = match side {
                    Side::Left => (&t.vertices[k], &t.vertices[next(k)]),
                    Side::Right => (&t.vertices[next(k)], &t.vertices[k]),
                };
                if *pos != leaf.positive_end || *neg != leaf.negative_end {
                    v.push(Violation::EndMismatch {
                        triangle: t.id.clone(),
                        side: k,
                        detail: format!("spikes do not match the ends of leaf {}", leaf.id),
                    });
                }
            }
        }
        if !v.is_empty() {
            return Err(v);
        }
        let mut neighbors = vec![[(0, 0); 3]; complex.triangles.len()];
        for &[(lt, lk), (rt, rk)] in &leaf_sides {
            neighbors[lt][lk] = (rt, rk);
            neighbors[rt][rk] = (lt, lk);
        }

        // Arcs.
        let mut arc_used = vec![false; complex.arcs.len()];
        for c in &complex.closed_leaves {
            let Some(&ai) = arc_index.get(&c.arc) else {
                v.push(Violation::DanglingReference { context: format!("closed leaf {}", c.id), id: c.arc.clone() });
                continue;
            };
            if arc_used[ai] {
                v.push(Violation::ArcEndpoint {
                    closed_leaf: c.id.clone(),
                    detail: "arc shared with another closed leaf".into(),
                });
            }
            arc_used[ai] = true;
            let arc = &complex.arcs[ai];
            for (end, side) in [(&arc.left, Side::Left), (&arc.right, Side::Right)] {
                let Some(&ti) = triangle_index.get(&end.triangle) else {
                    v.push(Violation::DanglingReference {
                        context: format!("arc {}", arc.id),
                        id: end.triangle.clone(),
                    });
                    continue;
                };
                if end.vertex > 2 {
                    v.push(Violation::BadVertexIndex { context: format!("arc {}", arc.id), vertex: end.vertex });
                    continue;
                }
                let target = &complex.triangles[ti].vertices[end.vertex];
                if target.closed_leaf != c.id || target.side != side {
                    v.push(Violation::ArcEndpoint {
                        closed_leaf: c.id.clone(),
                        detail: format!("{side} endpoint is not a spike on the {side} side"),
                    });
                }
            }
        }
        if let Some(ai) = arc_used.iter().position(|u| !u) {
            v.push(Violation::DanglingReference { context: "arcs".into(), id: complex.arcs[ai].id.clone() });
        }

        // Forward walks around every spike; one cycle per side of each closed leaf.
        let mut spirals: BTreeMap<(usize, Side), Vec<SpiralStep>> = BTreeMap::new();
        let mut visited = vec![[false; 3]; complex.triangles.len()];
        for ti in 0..complex.triangles.len() {
            for vi in 0..3 {
                if visited[ti][vi] {
                    continue;
                }
                let target = &complex.triangles[ti].vertices[vi];
                let key = (closed_index[&target.closed_leaf], target.side);
                let mut steps = Vec::new();
                let (mut t, mut i) = (ti, vi);
                while !visited[t][i] {
                    visited[t][i] = true;
                    let sr = &complex.triangles[t].sides[i];
                    let leaf = leaf_index[&sr.leaf];
                    let leaf_end = if sr.side == Side::Left { End::Positive } else { End::Negative };
                    steps.push(SpiralStep { triangle: t, vertex: i, leaf, leaf_end });
                    let (t2, k2) = neighbors[t][i];
                    t = t2;
                    i = next(k2);
                }
                if (t, i) != (ti, vi) {
                    v.push(Violation::SpiralOrder {
                        closed_leaf: target.closed_leaf.clone(),
                        side: target.side,
                        detail: "forward walk does not close up".into(),
                    });
                    continue;
                }
                if spirals.contains_key(&key) {
                    v.push(Violation::SpiralOrder {
                        closed_leaf: target.closed_leaf.clone(),
                        side: target.side,
                        detail: "spikes split into several cycles".into(),
                    });
                    continue;
                }
                spirals.insert(key, steps);
            }
        }
        for c in &complex.closed_leaves {
            for side in [Side::Left, Side::Right] {
                if !spirals.contains_key(&(closed_index[&c.id], side)) {
                    v.push(Violation::SpiralOrder {
                        closed_leaf: c.id.clone(),
                        side,
                        detail: "no spiraling items".into(),
                    });
                }
            }
        }

        // Declared spiral orders must agree with the forward walks.
        let mut declared = BTreeSet::new();
        for so in &complex.spiral_orders {
            let Some(&ci) = closed_index.get(&so.closed_leaf) else {
                v.push(Violation::DanglingReference { context: "spiral order".into(), id: so.closed_leaf.clone() });
                continue;
            };
            if !declared.insert((ci, so.side)) {
                v.push(Violation::SpiralOrder {
                    closed_leaf: so.closed_leaf.clone(),
                    side: so.side,
                    detail: "declared twice".into(),
                });
                continue;
            }
            let Some(steps) = spirals.get(&(ci, so.side)) else { continue };
            if let Err(detail) = check_order(&complex, &triangle_index, &leaf_index, steps, &so.items) {
                v.push(Violation::SpiralOrder { closed_leaf: so.closed_leaf.clone(), side: so.side, detail });
            }
        }
        for &(ci, side) in spirals.keys() {
            if !declared.contains(&(ci, side)) {
                v.push(Violation::SpiralOrder {
                    closed_leaf: complex.closed_leaves[ci].id.clone(),
                    side,
                    detail: "missing from spiral_orders".into(),
                });
            }
        }

        if !v.is_empty() {
            return Err(v);
        }
        Ok(Lamination { complex, closed_index, leaf_index, triangle_index, neighbors, leaf_sides, spirals })
    }

    pub fn complex(&self) -> &LaminationComplex {
        &self.complex
    }

    pub fn name(&self) -> &str {
        &self.complex.name
    }

    pub fn genus(&self) -> usize {
        self.complex.genus
    }

    pub fn closed_leaves(&self) -> &[ClosedLeaf] {
        &self.complex.closed_leaves
    }

    pub fn infinite_leaves(&self) -> &[InfiniteLeaf] {
        &self.complex.infinite_leaves
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.complex.triangles
    }

    pub fn closed_leaf_index(&self, id: &str) -> Result<usize, LaminationError> {
        self.closed_index.get(id).copied().ok_or_else(|| LaminationError::UnknownLeaf(id.to_string()))
    }

    pub fn leaf_index(&self, id: &str) -> Result<usize, LaminationError> {
        self.leaf_index.get(id).copied().ok_or_else(|| LaminationError::UnknownLeaf(id.to_string()))
    }

    pub fn triangle_index(&self, id: &str) -> Result<usize, LaminationError> {
        self.triangle_index.get(id).copied().ok_or_else(|| LaminationError::UnknownTriangle(id.to_string()))
    }

    /// The triangle and side reached by crossing side `k` of triangle `t`.
    pub fn neighbor(&self, t: usize, k: usize) -> (usize, usize) {
        self.neighbors[t][k]
    }

    /// `[(triangle, side) on the left, (triangle, side) on the right]`.
    pub fn sides_of_leaf(&self, leaf: usize) -> [(usize, usize); 2] {
        self.leaf_sides[leaf]
    }

    pub fn arc(&self, closed_leaf: usize) -> ((usize, usize), (usize, usize)) {
        let id = &self.complex.closed_leaves[closed_leaf].arc;
        let arc = self.complex.arcs.iter().find(|a| &a.id == id).expect("validated arc");
        (
            (self.triangle_index[&arc.left.triangle], arc.left.vertex),
            (self.triangle_index[&arc.right.triangle], arc.right.vertex),
        )
    }

    pub fn vertex_target(&self, t: usize, v: usize) -> &SpiralTarget {
        &self.complex.triangles[t].vertices[v]
    }

    /// The forward walk around `side` of `closed_leaf`, starting from the
    /// spike of lowest triangle index (then lowest vertex) on that side. The
    /// declared spiral order is a cyclic rotation of it.
    pub fn spiral_sequence(&self, closed_leaf: &str, side: Side) -> Result<&[SpiralStep], LaminationError> {
        let ci = self.closed_leaf_index(closed_leaf)?;
        self.spiral_steps(ci, side)
    }

    pub fn spiral_steps(&self, closed_leaf: usize, side: Side) -> Result<&[SpiralStep], LaminationError> {
        self.spirals
            .get(&(closed_leaf, side))
            .map(Vec::as_slice)
            .ok_or_else(|| LaminationError::EmptySide(self.complex.closed_leaves[closed_leaf].id.clone(), side))
    }

    /// Forward walk around the spike `(t, v)`, one full period.
    pub fn fan(&self, t: usize, v: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(t, v)];
        let (mut ct, mut cv) = (t, v);
        loop {
            let (t2, k2) = self.neighbors[ct][cv];
            ct = t2;
            cv = next(k2);
            if (ct, cv) == (t, v) {
                return out;
            }
            out.push((ct, cv));
        }
    }

    pub fn direction(&self, closed_leaf: usize, side: Side) -> Direction {
        let steps = &self.spirals[&(closed_leaf, side)];
        self.vertex_target(steps[0].triangle, steps[0].vertex).direction
    }

    pub fn multiplicities(&self) -> Vec<SideMultiplicity> {
        self.spirals
            .iter()
            .map(|(&(ci, side), steps)| SideMultiplicity {
                closed_leaf: self.complex.closed_leaves[ci].id.clone(),
                side,
                k: steps.len(),
            })
            .collect()
    }
}

fn check_order(
    complex: &LaminationComplex,
    triangle_index: &HashMap<String, usize>,
    leaf_index: &HashMap<String, usize>,
    steps: &[SpiralStep],
    items: &[SpiralItem],
) -> Result<(), String> {
    if items.len() != 2 * steps.len() {
        return Err(format!("{} items declared, the forward walk has {}", items.len(), 2 * steps.len()));
    }
    let start = items.iter().position(|it| matches!(it, SpiralItem::Spike(_))).ok_or("no spikes declared")?;
    let rotated: Vec<&SpiralItem> = items[start..].iter().chain(items[..start].iter()).collect();
    let SpiralItem::Spike(first) = rotated[0] else { unreachable!() };
    let t0 = *triangle_index.get(&first.triangle).ok_or_else(|| format!("unknown triangle {}", first.triangle))?;
    let offset = steps
        .iter()
        .position(|s| s.triangle == t0 && s.vertex == first.vertex)
        .ok_or_else(|| format!("spike {}:{} does not spiral here", first.triangle, first.vertex))?;
    for (j, pair) in rotated.chunks(2).enumerate() {
        let step = &steps[(offset + j) % steps.len()];
        match pair {
            [SpiralItem::Spike(sp), SpiralItem::LeafEnd { leaf, end }] => {
                if triangle_index.get(&sp.triangle) != Some(&step.triangle) || sp.vertex != step.vertex {
                    return Err(format!(
                        "expected spike {}:{} at position {}",
                        complex.triangles[step.triangle].id,
                        step.vertex,
                        2 * j
                    ));
                }
                if leaf_index.get(leaf) != Some(&step.leaf) || *end != step.leaf_end {
                    return Err(format!(
                        "expected leaf end of {} at position {}",
                        complex.infinite_leaves[step.leaf].id,
                        2 * j + 1
                    ));
                }
            }
            _ => return Err("items must alternate spike, leaf end".into()),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_vertex_and_spike_end() {
        assert_eq!(far_vertex(0, Side::Right, Direction::With), 1);
        assert_eq!(far_vertex(0, Side::Left, Direction::With), 2);
        assert_eq!(far_vertex(2, Side::Left, Direction::Against), 0);
        assert_eq!(spike_end(Side::Left, Direction::Against), End::Positive);
        assert_eq!(spike_end(Side::Left, Direction::With), End::Negative);
    }

    #[test]
    fn crossing_a_side_twice_comes_back() {
        for name in crate::fixtures::NAMES {
            let lam = crate::fixtures::load(name).unwrap().lamination;
            for t in 0..lam.triangles().len() {
                for k in 0..3 {
                    let (t2, k2) = lam.neighbor(t, k);
                    assert_eq!(lam.neighbor(t2, k2), (t, k));
                }
            }
        }
    }

    #[test]
    fn spiral_walks_cover_every_spike_once() {
        for name in crate::fixtures::NAMES {
            let lam = crate::fixtures::load(name).unwrap().lamination;
            let mut seen = BTreeSet::new();
            for ci in 0..lam.closed_leaves().len() {
                for side in [Side::Left, Side::Right] {
                    let steps = lam.spiral_steps(ci, side).unwrap();
                    let first = (steps[0].triangle, steps[0].vertex);
                    assert_eq!(lam.fan(first.0, first.1).len(), steps.len());
                    let lowest = steps.iter().map(|s| (s.triangle, s.vertex)).min().unwrap();
                    assert_eq!(first, lowest);
                    for s in steps {
                        assert!(seen.insert((s.triangle, s.vertex)));
                        let target = lam.vertex_target(s.triangle, s.vertex);
                        assert_eq!(target.side, side);
                    }
                }
            }
            assert_eq!(seen.len(), 3 * lam.triangles().len());
        }
    }

    #[test]
    fn a_dangling_leaf_is_reported() {
        let mut complex = crate::fixtures::load("pants").unwrap().lamination.complex().clone();
        complex.triangles[0].sides[0].leaf = "nowhere".into();
        let report = complex.validate();
        assert!(!report.valid);
        assert!(Lamination::new(complex).is_err());
    }
}
