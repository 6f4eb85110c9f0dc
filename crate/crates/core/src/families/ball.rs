//! A finite ball of a complex, materialized as a graph.
//!
//! Nothing here uses the implicit metric, walls or medians of the family:
//! only the generator action and normal forms. Walls are recovered as
//! classes of edges under square opposition and sides by graph search, so
//! the ball serves as a brute-force reference for the implicit oracles.

use std::collections::{HashMap, VecDeque};

use super::{Element, Family};
use crate::error::{Error, Result};
use crate::pocset::CubeComplex;

/// Largest radius built without an explicit override.
pub const DEFAULT_RADIUS_CAP: usize = 6;

#[derive(Clone, Debug)]
pub struct ExplicitBall {
    pub center: Element,
    pub radius: usize,
    pub vertices: Vec<Element>,
    /// Graph distance from the center.
    pub depth: Vec<usize>,
    pub adjacency: Vec<Vec<usize>>,
    /// Edges `(u, v)` with `u < v`.
    pub edges: Vec<(usize, usize)>,
    /// 4-cycles `[v0, v1, v2, v3]`, each listed once.
    pub squares: Vec<[usize; 4]>,
    /// Wall class of each edge.
    pub edge_class: Vec<usize>,
    /// Representative edge of each class, as `(p, q)`.
    pub class_edge: Vec<(usize, usize)>,
    /// `sides[c][v]` is `true` iff `v` lies on the `q` side of class `c`.
    sides: Vec<Vec<bool>>,
    square_classes: std::collections::HashSet<(usize, usize)>,
    index: HashMap<Element, usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl ExplicitBall {
    pub fn new(family: &Family, center: &Element, radius: usize, cap: usize) -> Result<Self> {
        if radius > cap {
            return Err(Error::Resource(format!("ball radius {radius} exceeds cap {cap}")));
        }
        let mut vertices = vec![center.clone()];
        let mut depth = vec![0];
        let mut index = HashMap::from([(center.clone(), 0)]);
        let mut head = 0;
        while head < vertices.len() {
            if depth[head] < radius {
                for n in family.neighbors(&vertices[head]) {
                    if !index.contains_key(&n) {
                        index.insert(n.clone(), vertices.len());
                        vertices.push(n);
                        depth.push(depth[head] + 1);
                    }
                }
            }
            head += 1;
        }

        let mut adjacency = vec![Vec::new(); vertices.len()];
        let mut edges = Vec::new();
        let mut edge_index = HashMap::new();
        for (u, v) in vertices.iter().enumerate() {
            for n in family.neighbors(v) {
                if let Some(&w) = index.get(&n) {
                    adjacency[u].push(w);
                    if u < w {
                        edge_index.insert((u, w), edges.len());
                        edges.push((u, w));
                    }
                }
            }
        }
        for a in &mut adjacency {
            a.sort_unstable();
            a.dedup();
        }

        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut uf = UnionFind((0..edges.len()).collect());
        let mut squares = Vec::new();
        for v in 0..vertices.len() {
            let nb = &adjacency[v];
            for (i, &u) in nb.iter().enumerate() {
                for &w in &nb[i + 1..] {
                    for &x in &adjacency[u] {
                        if x == v || adjacency[w].binary_search(&x).is_err() {
                            continue;
                        }
                        uf.union(edge_index[&key(v, u)], edge_index[&key(w, x)]);
                        uf.union(edge_index[&key(v, w)], edge_index[&key(u, x)]);
                        if v < u.min(w).min(x) {
                            squares.push([v, u, x, w]);
                        }
                    }
                }
            }
        }
        squares.sort_unstable();
        squares.dedup_by(|a, b| a[0] == b[0] && a[2] == b[2] && (a[1] == b[3] && a[3] == b[1] || a == b));

        let mut class_of_root = HashMap::new();
        let mut edge_class = Vec::with_capacity(edges.len());
        let mut class_edge = Vec::new();
        for (e, &(a, b)) in edges.iter().enumerate() {
            let r = uf.find(e);
            let c = *class_of_root.entry(r).or_insert_with(|| {
                class_edge.push(if depth[a] <= depth[b] { (a, b) } else { (b, a) });
                class_edge.len() - 1
            });
            edge_class.push(c);
        }

        let mut ball = ExplicitBall {
            center: center.clone(),
            radius,
            vertices,
            depth,
            adjacency,
            edges,
            squares,
            edge_class,
            class_edge,
            sides: Vec::new(),
            square_classes: Default::default(),
            index,
            edge_index,
        };
        for s in &ball.squares {
            let a = ball.class_of_edge(s[0], s[1]).unwrap();
            let b = ball.class_of_edge(s[1], s[2]).unwrap();
            ball.square_classes.insert((a.min(b), a.max(b)));
        }
        ball.sides = (0..ball.class_edge.len()).map(|c| ball.side_table(c)).collect::<Result<_>>()?;
        Ok(ball)
    }

    fn side_table(&self, class: usize) -> Result<Vec<bool>> {
        let (p, q) = self.class_edge[class];
        let n = self.vertices.len();
        let mut label: Vec<Option<bool>> = vec![None; n];
        for (start, tag) in [(q, true), (p, false)] {
            if label[start].is_some() {
                return Err(Error::Internal("a wall class does not separate the ball".into()));
            }
            label[start] = Some(tag);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adjacency[v] {
                    if self.edge_class[self.edge_index[&(v.min(w), v.max(w))]] == class {
                        continue;
                    }
                    match label[w] {
                        None => {
                            label[w] = Some(tag);
                            queue.push_back(w);
                        }
                        Some(t) if t != tag => {
                            return Err(Error::Internal("a wall class does not separate the ball".into()));
                        }
                        _ => {}
                    }
                }
            }
        }
        label
            .into_iter()
            .map(|l| l.ok_or_else(|| Error::Internal("ball side is disconnected".into())))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_edge.len()
    }

    pub fn index_of(&self, v: &Element) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn class_of_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).map(|&e| self.edge_class[e])
    }

    /// `true` iff `v` is on the same side of `class` as the far endpoint of its representative edge.
    pub fn on_far_side(&self, class: usize, v: usize) -> bool {
        self.sides[class][v]
    }

    /// Breadth-first distances inside the ball graph.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertices.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Some square of the ball has one edge in each class.
    pub fn square_witness(&self, c1: usize, c2: usize) -> bool {
        self.square_classes.contains(&(c1.min(c2), c1.max(c2)))
    }

    /// Whether some vertex of the ball has the given far/near sides of the two classes.
    pub fn corner_occupied(&self, c1: usize, far1: bool, c2: usize, far2: bool) -> bool {
        (0..self.vertices.len()).any(|v| self.sides[c1][v] == far1 && self.sides[c2][v] == far2)
    }

    /// Check that each wall class is the set of ball edges dual to one wall of `family`.
    pub fn class_walls(&self, family: &Family) -> Result<Vec<super::Wall>> {
        let mut walls: Vec<Option<super::Wall>> = vec![None; self.class_count()];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            let w = family.halfspace_of_edge(&self.vertices[a], &self.vertices[b])?.wall;
            match &walls[self.edge_class[e]] {
                None => walls[self.edge_class[e]] = Some(w),
                Some(x) if *x != w => {
                    return Err(Error::Internal(format!("edge class mixes walls {x:?} and {w:?}")));
                }
                _ => {}
            }
        }
        Ok(walls.into_iter().map(|w| w.expect("every class has an edge")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;

    fn ball(spec: FamilySpec, r: usize) -> ExplicitBall {
        let f = Family::from_spec(&spec).unwrap();
        ExplicitBall::new(&f, &f.basepoint(), r, DEFAULT_RADIUS_CAP).unwrap()
    }

    #[test]
    fn tiny_balls() {
        let t = ball(FamilySpec::Tree { rank: 2 }, 1);
        assert_eq!((t.len(), t.edges.len(), t.class_count()), (5, 4, 4));
        let g = ball(FamilySpec::Grid { dimension: 2 }, 1);
        assert_eq!((g.len(), g.edges.len(), g.class_count()), (5, 4, 4));
        let g2 = ball(FamilySpec::Grid { dimension: 2 }, 2);
        assert_eq!(g2.squares.len(), 4);
    }

    #[test]
    fn square_merges_parallel_edges() {
        let spec = FamilySpec::Raag {
            generators: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![["a".into(), "b".into()]],
        };
        let f = Family::from_spec(&spec).unwrap();
        let b = ExplicitBall::new(&f, &f.basepoint(), 2, DEFAULT_RADIUS_CAP).unwrap();
        let e = b.index_of(&f.parse_element("e").unwrap()).unwrap();
        let a = b.index_of(&f.parse_element("a").unwrap()).unwrap();
        let bb = b.index_of(&f.parse_element("b").unwrap()).unwrap();
        let ba = b.index_of(&f.parse_element("b a").unwrap()).unwrap();
        assert_eq!(b.class_of_edge(e, a), b.class_of_edge(bb, ba));
        let walls = b.class_walls(&f).unwrap();
        assert_eq!(walls.len(), b.class_count());
    }

    #[test]
    fn cap_enforced() {
        let f = Family::from_spec(&FamilySpec::Tree { rank: 2 }).unwrap();
        assert!(matches!(
            ExplicitBall::new(&f, &f.basepoint(), 7, DEFAULT_RADIUS_CAP),
            Err(Error::Resource(_))
        ));
    }
}
