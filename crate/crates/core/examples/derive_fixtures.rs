//! Regenerates the bundled fixtures in `data/`: laminations, lift atlases and
//! Fuchsian representations for the two genus-2 examples.
//!
//! The atlas is derived from the dual graph of the lamination (triangles, with
//! an edge per infinite leaf and per transverse arc). Non-tree edges of a BFS
//! spanning tree generate the fundamental group; each closed leaf gives the
//! relation "walk around its left side, cross the arc, walk around its right
//! side, cross back". Tietze moves reduce this to one relator.
//!
//! The Fuchsian representation is the n = 2 reconstruction from exact shears.
//!
//! Run with `cargo run -p hitchin --example derive_fixtures`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fs;
use std::path::Path;

use hitchin::atlas::{FixedPoint, LiftAtlas, PathStep, QuadrupleLift};
use hitchin::coords::CoordinateVector;
use hitchin::lamination::{
    far_vertex, next, spike_end, ClosedLeaf, Direction, End, InfiniteLeaf, Lamination, LaminationComplex, Side,
    SideRef, SpikeRef, SpiralItem, SpiralOrder, SpiralTarget, TransverseArc, Triangle,
};
use hitchin::representation::Word;
use hitchin::scalar::Scalar;
use hitchin::synthesis::reconstruct;

struct Desc {
    name: &'static str,
    /// Spike label to (closed leaf, side, direction).
    targets: Vec<(&'static str, &'static str, Side, Direction)>,
    /// (id, vertex labels clockwise, (leaf, side) per side).
    triangles: Vec<(&'static str, [&'static str; 3], [(&'static str, Side); 3])>,
    /// (closed leaf, arc endpoint on the left, arc endpoint on the right).
    closed: Vec<(&'static str, (&'static str, usize), (&'static str, usize))>,
    /// n = 2 shears of every leaf, closed leaves included.
    shears: Vec<(&'static str, i64, i64)>,
}

fn pants() -> Desc {
    use Direction::*;
    use Side::*;
    Desc {
        name: "genus2-pants",
        targets: vec![
            ("p1", "c1", Right, With),
            ("q1", "c1", Left, With),
            ("p2", "c2", Left, Against),
            ("q2", "c2", Right, Against),
            ("p3", "c3", Right, Against),
            ("q3", "c3", Left, With),
        ],
        triangles: vec![
            ("T0", ["p1", "p2", "p3"], [("g0", Left), ("g1", Left), ("g2", Left)]),
            ("T1", ["p1", "p3", "p2"], [("g2", Right), ("g1", Right), ("g0", Right)]),
            ("T2", ["q1", "q2", "q3"], [("g3", Left), ("g4", Left), ("g5", Left)]),
            ("T3", ["q1", "q3", "q2"], [("g5", Right), ("g4", Right), ("g3", Right)]),
        ],
        closed: vec![("c1", ("T2", 0), ("T0", 0)), ("c2", ("T0", 1), ("T2", 1)), ("c3", ("T2", 2), ("T0", 2))],
        shears: vec![
            ("g0", 8, 1),
            ("g1", 1, 2),
            ("g2", 1, 2),
            ("g3", 1, 2),
            ("g4", 1, 2),
            ("g5", 1, 2),
            ("c1", 1, 1),
            ("c2", 2, 1),
            ("c3", 1, 3),
        ],
    }
}

/// A torus with two holes, one at the corners of the square and one at its
/// centre, glued along a single closed leaf.
fn single_leaf() -> Desc {
    use Direction::*;
    use Side::*;
    Desc {
        name: "genus2-single-leaf",
        targets: vec![("R", "c", Right, With), ("L", "c", Left, Against)],
        triangles: vec![
            ("Tb", ["R", "L", "L"], [("s10", Left), ("h", Left), ("s00", Right)]),
            ("Tr", ["R", "L", "L"], [("s11", Left), ("v", Left), ("s10", Right)]),
            ("Tt", ["R", "L", "L"], [("s01", Left), ("h", Right), ("s11", Right)]),
            ("Tl", ["R", "L", "L"], [("s00", Left), ("v", Right), ("s01", Right)]),
        ],
        closed: vec![("c", ("Tb", 2), ("Tb", 0))],
        shears: vec![("h", 2, 1), ("v", 1, 2), ("s00", 2, 1), ("s10", 1, 1), ("s11", 2, 1), ("s01", 1, 1), ("c", 3, 2)],
    }
}

fn build_complex(d: &Desc) -> LaminationComplex {
    let target = |label: &str| {
        let (_, c, side, direction) = d.targets.iter().find(|t| t.0 == label).expect("known label");
        SpiralTarget { closed_leaf: c.to_string(), side: *side, direction: *direction }
    };
    let triangles: Vec<Triangle> = d
        .triangles
        .iter()
        .map(|(id, vs, sides)| Triangle {
            id: id.to_string(),
            sides: sides.map(|(leaf, side)| SideRef { leaf: leaf.to_string(), side }),
            vertices: vs.map(target),
        })
        .collect();
    let mut leaf_ids: Vec<String> = Vec::new();
    for t in &triangles {
        for s in &t.sides {
            if !leaf_ids.contains(&s.leaf) {
                leaf_ids.push(s.leaf.clone());
            }
        }
    }
    leaf_ids.sort();
    let mut infinite_leaves = Vec::new();
    let mut sides: HashMap<String, [(usize, usize); 2]> = HashMap::new();
    for id in &leaf_ids {
        let mut pair = [(usize::MAX, 0); 2];
        for (ti, t) in triangles.iter().enumerate() {
            for (k, s) in t.sides.iter().enumerate() {
                if &s.leaf == id {
                    pair[if s.side == Side::Left { 0 } else { 1 }] = (ti, k);
                }
            }
        }
        let (lt, lk) = pair[0];
        infinite_leaves.push(InfiniteLeaf {
            id: id.clone(),
            positive_end: triangles[lt].vertices[lk].clone(),
            negative_end: triangles[lt].vertices[next(lk)].clone(),
        });
        sides.insert(id.clone(), pair);
    }
    let neighbor = |t: usize, k: usize| {
        let pair = sides[&triangles[t].sides[k].leaf];
        if pair[0] == (t, k) {
            pair[1]
        } else {
            pair[0]
        }
    };
    let mut orders: BTreeMap<(String, Side), Vec<SpiralItem>> = BTreeMap::new();
    let mut seen = vec![[false; 3]; triangles.len()];
    for t0 in 0..triangles.len() {
        for v0 in 0..3 {
            if seen[t0][v0] {
                continue;
            }
            let tg = &triangles[t0].vertices[v0];
            let items = orders.entry((tg.closed_leaf.clone(), tg.side)).or_default();
            let (mut t, mut v) = (t0, v0);
            while !seen[t][v] {
                seen[t][v] = true;
                let s = &triangles[t].sides[v];
                items.push(SpiralItem::Spike(SpikeRef { triangle: triangles[t].id.clone(), vertex: v }));
                items.push(SpiralItem::LeafEnd {
                    leaf: s.leaf.clone(),
                    end: if s.side == Side::Left { End::Positive } else { End::Negative },
                });
                let (t2, k2) = neighbor(t, v);
                (t, v) = (t2, next(k2));
            }
        }
    }
    let spike = |(t, v): (&str, usize)| SpikeRef { triangle: t.to_string(), vertex: v };
    LaminationComplex {
        name: d.name.to_string(),
        genus: 2,
        closed_leaves: d
            .closed
            .iter()
            .map(|(c, _, _)| ClosedLeaf { id: c.to_string(), arc: format!("arc-{c}") })
            .collect(),
        arcs: d
            .closed
            .iter()
            .map(|(c, l, r)| TransverseArc { id: format!("arc-{c}"), left: spike(*l), right: spike(*r) })
            .collect(),
        infinite_leaves,
        triangles,
        spiral_orders: orders
            .into_iter()
            .map(|((closed_leaf, side), items)| SpiralOrder { closed_leaf, side, items })
            .collect(),
    }
}

/// One traversal of a dual-graph edge.
#[derive(Clone)]
struct Move {
    step: PathStep,
    edge: String,
    forward: bool,
    dest: usize,
}

struct DualGraph<'a> {
    lam: &'a Lamination,
    tree: Vec<Option<Move>>,
    in_tree: Vec<String>,
}

impl<'a> DualGraph<'a> {
    fn moves(&self, t: usize) -> Vec<Move> {
        let tri = &self.lam.triangles()[t];
        let mut out: Vec<Move> = (0..3)
            .map(|k| Move {
                step: PathStep::Side { side: k },
                edge: tri.sides[k].leaf.clone(),
                forward: tri.sides[k].side == Side::Left,
                dest: self.lam.neighbor(t, k).0,
            })
            .collect();
        for (ci, c) in self.lam.closed_leaves().iter().enumerate() {
            let (l, r) = self.lam.arc(ci);
            if l.0 == t {
                out.push(Move {
                    step: PathStep::Arc { across: c.id.clone(), to: Side::Right },
                    edge: c.id.clone(),
                    forward: true,
                    dest: r.0,
                });
            }
            if r.0 == t {
                out.push(Move {
                    step: PathStep::Arc { across: c.id.clone(), to: Side::Left },
                    edge: c.id.clone(),
                    forward: false,
                    dest: l.0,
                });
            }
        }
        out
    }

    fn new(lam: &'a Lamination) -> DualGraph<'a> {
        let mut g = DualGraph { lam, tree: vec![None; lam.triangles().len()], in_tree: Vec::new() };
        let mut visited = vec![false; lam.triangles().len()];
        visited[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(t) = queue.pop_front() {
            for m in g.moves(t) {
                if !visited[m.dest] {
                    visited[m.dest] = true;
                    g.in_tree.push(m.edge.clone());
                    g.tree[m.dest] = Some(m.clone());
                    queue.push_back(m.dest);
                }
            }
        }
        g
    }

    fn tree_path(&self, t: usize) -> Vec<Move> {
        let mut out = Vec::new();
        let mut cur = t;
        while let Some(m) = &self.tree[cur] {
            out.push(m.clone());
            cur = self.source(m);
        }
        out.reverse();
        out
    }

    fn source(&self, m: &Move) -> usize {
        // The reverse move from the destination leads back to the source.
        self.moves(m.dest)
            .into_iter()
            .find(|r| r.edge == m.edge && r.forward != m.forward && self.reverses(m, r))
            .map(|r| r.dest)
            .expect("reversible")
    }

    fn reverses(&self, m: &Move, r: &Move) -> bool {
        match (&m.step, &r.step) {
            (PathStep::Side { side: a }, PathStep::Side { side: b }) => {
                let src = r.dest;
                self.lam.neighbor(src, *a) == (m.dest, *b)
            }
            (PathStep::Arc { across: a, to: x }, PathStep::Arc { across: b, to: y }) => a == b && *x == y.opposite(),
            _ => false,
        }
    }

    /// Inverse path of a sequence of moves starting at `start`.
    fn reverse_path(&self, start: usize, path: &[Move]) -> Vec<Move> {
        let mut sources = vec![start];
        for m in path {
            sources.push(m.dest);
        }
        let mut out = Vec::new();
        for (i, m) in path.iter().enumerate().rev() {
            let src = sources[i];
            let back = self
                .moves(m.dest)
                .into_iter()
                .find(|r| r.edge == m.edge && r.dest == src && self.reverses(m, r))
                .expect("reversible move");
            out.push(back);
        }
        out
    }

    fn word(&self, path: &[Move]) -> Word {
        let mut w = Word::empty();
        for m in path {
            if !self.in_tree.contains(&m.edge) {
                w = w.concat(&Word::letter(&m.edge, !m.forward));
            }
        }
        w
    }

    /// Forward walk once around the spike `(t, v)`.
    fn fan(&self, t: usize, v: usize) -> Vec<Move> {
        let mut out = Vec::new();
        let (mut ct, mut cv) = (t, v);
        loop {
            let m = self.moves(ct).into_iter().nth(cv).expect("side move");
            out.push(m);
            let (t2, k2) = self.lam.neighbor(ct, cv);
            (ct, cv) = (t2, next(k2));
            if (ct, cv) == (t, v) {
                return out;
            }
        }
    }

    fn arc_move(&self, from: usize, across: &str, to: Side) -> Move {
        self.moves(from)
            .into_iter()
            .find(|m| matches!(&m.step, PathStep::Arc { across: a, to: s } if a == across && *s == to))
            .expect("arc move")
    }

    fn dest_of(&self, start: usize, path: &[Move]) -> usize {
        path.last().map_or(start, |m| m.dest)
    }
}

/// Reduces the relators to one by eliminating generators that occur exactly
/// once in some relator. Returns the remaining generators, the relator and the
/// substitutions for the eliminated ones.
fn tietze(mut gens: Vec<String>, mut relators: Vec<Word>) -> (Vec<String>, Word, BTreeMap<String, Word>) {
    let mut subs: BTreeMap<String, Word> = BTreeMap::new();
    while relators.len() > 1 {
        let mut found = None;
        'search: for (ri, r) in relators.iter().enumerate() {
            for g in &gens {
                if r.generators().filter(|x| x == g).count() == 1 {
                    found = Some((ri, g.clone()));
                    break 'search;
                }
            }
        }
        let (ri, g) = found.expect("a generator occurring once");
        let r = relators.remove(ri).cyclically_reduced();
        let pos = r.0.iter().position(|l| l.generator == g).expect("occurs");
        // Rotate so that g leads: g^e rest = 1.
        let rotated = Word(r.0[pos..].iter().chain(r.0[..pos].iter()).cloned().collect());
        let rest = Word(rotated.0[1..].to_vec());
        let value = if rotated.0[0].inverse { rest } else { rest.inverse() };
        for other in relators.iter_mut() {
            *other = other.substitute(&g, &value).cyclically_reduced();
        }
        for v in subs.values_mut() {
            *v = v.substitute(&g, &value);
        }
        subs.insert(g.clone(), value);
        gens.retain(|x| x != &g);
    }
    (gens, relators.pop().expect("one relator"), subs)
}

fn derive_atlas(lam: &Lamination, rename: &dyn Fn(&str) -> String) -> LiftAtlas {
    let graph = DualGraph::new(lam);
    let mut edges: Vec<String> = lam.infinite_leaves().iter().map(|g| g.id.clone()).collect();
    edges.extend(lam.closed_leaves().iter().map(|c| c.id.clone()));
    let generators: Vec<String> = edges.iter().filter(|e| !graph.in_tree.contains(e)).cloned().collect();

    let relation_loop = |ci: usize| {
        let c = &lam.closed_leaves()[ci].id;
        let ((lt, lv), (rt, rv)) = lam.arc(ci);
        let mut path = graph.tree_path(lt);
        path.extend(graph.fan(lt, lv));
        path.push(graph.arc_move(lt, c, Side::Right));
        path.extend(graph.fan(rt, rv));
        path.push(graph.arc_move(rt, c, Side::Left));
        let back = graph.reverse_path(0, &graph.tree_path(lt));
        path.extend(back);
        path
    };
    let relators: Vec<Word> = (0..lam.closed_leaves().len()).map(|ci| graph.word(&relation_loop(ci))).collect();
    let (gens, relator, subs) = tietze(generators, relators);
    let names: BTreeMap<String, String> = gens.iter().map(|g| (g.clone(), rename(g))).collect();
    let finish = |w: Word| {
        let mut w = w;
        for (g, v) in &subs {
            w = w.substitute(g, v);
        }
        Word(
            w.0.into_iter()
                .map(|mut l| {
                    l.generator = names[&l.generator].clone();
                    l
                })
                .collect(),
        )
    };

    // Vertex of the lift reached by `path` from the base triangle.
    let vertex = |path: &[Move], v: usize| {
        let t = graph.dest_of(0, path);
        let mut lp = path.to_vec();
        lp.extend(graph.fan(t, v));
        lp.extend(graph.reverse_path(0, path));
        let target = lam.vertex_target(t, v);
        FixedPoint::new(finish(graph.word(&lp)), spike_end(target.side, target.direction))
    };
    let alt = Word::letter(&names[&gens[0]], false);

    let mut triangles = BTreeMap::new();
    for (ti, t) in lam.triangles().iter().enumerate() {
        let p = graph.tree_path(ti);
        let lift = [vertex(&p, 0), vertex(&p, 1), vertex(&p, 2)];
        let other = lift.clone().map(|f| f.conjugate_by(&alt));
        triangles.insert(t.id.clone(), vec![lift, other]);
    }
    let mut infinite_leaves = BTreeMap::new();
    for (li, g) in lam.infinite_leaves().iter().enumerate() {
        let [(lt, lk), _] = lam.sides_of_leaf(li);
        let p = graph.tree_path(lt);
        let mut across = p.clone();
        across.push(graph.moves(lt).into_iter().nth(lk).expect("side move"));
        let (_, rk) = lam.neighbor(lt, lk);
        let q = QuadrupleLift {
            x: vertex(&p, lk),
            y: vertex(&p, next(lk)),
            z: vertex(&p, next(next(lk))),
            z_prime: vertex(&across, next(next(rk))),
        };
        let other = q.conjugate_by(&alt);
        infinite_leaves.insert(g.id.clone(), vec![q, other]);
    }
    let mut closed_leaf_words = BTreeMap::new();
    let mut closed_leaves = BTreeMap::new();
    for (ci, c) in lam.closed_leaves().iter().enumerate() {
        let ((lt, lv), (rt, rv)) = lam.arc(ci);
        let p = graph.tree_path(lt);
        let mut walk = p.clone();
        walk.extend(graph.fan(lt, lv));
        walk.extend(graph.reverse_path(0, &p));
        // Walking forward on the left side translates by [c]^-1.
        let word = finish(graph.word(&walk)).inverse();
        let mut across = p.clone();
        across.push(graph.arc_move(lt, &c.id, Side::Right));
        let dl = lam.vertex_target(lt, lv).direction;
        let dr = lam.vertex_target(rt, rv).direction;
        let q = QuadrupleLift {
            x: FixedPoint::new(word.clone(), End::Positive),
            y: FixedPoint::new(word.clone(), End::Negative),
            z: vertex(&p, far_vertex(lv, Side::Left, dl)),
            z_prime: vertex(&across, far_vertex(rv, Side::Right, dr)),
        };
        let other = q.conjugate_by(&alt);
        closed_leaf_words.insert(c.id.clone(), word);
        closed_leaves.insert(c.id.clone(), vec![q, other]);
    }
    let mut generator_paths = BTreeMap::new();
    for g in &gens {
        // Tree path to the edge, the edge, tree path back.
        let (src, m) = (0..lam.triangles().len())
            .flat_map(|t| graph.moves(t).into_iter().map(move |m| (t, m)))
            .find(|(_, m)| &m.edge == g && m.forward)
            .expect("edge");
        let mut path = graph.tree_path(src);
        path.push(m.clone());
        path.extend(graph.reverse_path(0, &graph.tree_path(m.dest)));
        assert_eq!(finish(graph.word(&path)), Word::letter(&names[g], false));
        generator_paths.insert(names[g].clone(), path.into_iter().map(|m| m.step).collect());
    }
    LiftAtlas {
        lamination: lam.name().to_string(),
        generators: gens.iter().map(|g| names[g].clone()).collect(),
        relator: finish(relator),
        base_triangle: lam.triangles()[0].id.clone(),
        closed_leaf_words,
        triangles,
        infinite_leaves,
        closed_leaves,
        generator_paths,
    }
}

fn shear_coordinates(d: &Desc, lam: &Lamination) -> CoordinateVector {
    let mut c = CoordinateVector::new(2, lam.name());
    for t in lam.triangles() {
        c.triangles.insert(t.id.clone(), BTreeMap::new());
    }
    for (leaf, p, q) in &d.shears {
        c.shears.insert(leaf.to_string(), vec![Scalar::ratio(*p, *q)]);
    }
    c
}

fn main() {
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (stem, d) in [("pants", pants()), ("single-leaf", single_leaf())] {
        let complex = build_complex(&d);
        let lam = Lamination::new(complex.clone()).expect("valid lamination");
        let counter = std::cell::RefCell::new(BTreeMap::<String, String>::new());
        let rename = |g: &str| {
            let mut m = counter.borrow_mut();
            let k = m.len() + 1;
            m.entry(g.to_string()).or_insert_with(|| format!("x{k}")).clone()
        };
        let atlas = derive_atlas(&lam, &rename);
        let problems = atlas.check(&lam);
        assert!(problems.is_empty(), "{problems:?}");
        let coords = shear_coordinates(&d, &lam);
        let rep = reconstruct(&coords, &lam, &atlas, 256).expect("n = 2 reconstruction");
        let write = |name: String, v: serde_json::Value| {
            fs::write(out.join(name), serde_json::to_string_pretty(&v).expect("json") + "\n").expect("write fixture");
        };
        write(format!("{stem}.lamination.json"), serde_json::to_value(&complex).expect("json"));
        write(format!("{stem}.atlas.json"), serde_json::to_value(&atlas).expect("json"));
        write(format!("{stem}.fuchsian.json"), serde_json::to_value(&rep).expect("json"));
        write(format!("{stem}.shears.json"), serde_json::to_value(&coords).expect("json"));
        println!("{stem}: relator {}", atlas.relator);
    }
}
