//! Half-space calculus over an abstract CAT(0) cube complex.
//!
//! A complex is presented implicitly through [`CubeComplex`]: vertices,
//! walls, a side predicate, and a group acting by left multiplication.
//! Everything in this module is written only against that trait, so the
//! same algorithms run on trees, grids, right-angled Artin groups and
//! products of those.

mod bridge;
mod relation;

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use bridge::{bridge, nested_pair, pair_distance, super_strongly_separated, Bridge, SuperSeparation};
pub use relation::{strongly_separated, wall_relation, WallRelation};

/// Orientation of a half-space relative to the canonical orientation of its wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// One side of a wall.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfSpace<W> {
    pub wall: W,
    pub sign: Sign,
}

impl<W: Clone> HalfSpace<W> {
    pub fn new(wall: W, sign: Sign) -> Self {
        HalfSpace { wall, sign }
    }

    pub fn complement(&self) -> Self {
        HalfSpace {
            wall: self.wall.clone(),
            sign: self.sign.flip(),
        }
    }
}

/// Why a pair was declared strongly separated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SeparationReason {
    /// A closed-form rule of the family rules out any common transverse wall.
    FamilyExact(&'static str),
    /// A search that is complete for this input found no common transverse wall.
    ExhaustedSearch,
}

/// Three-valued answer to "are these two walls strongly separated".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeparationVerdict<W> {
    StronglySeparated(SeparationReason),
    /// `witness` is transverse to both walls.
    NotStronglySeparated { witness: W },
    Unknown { searched_radius: usize },
}

impl<W> SeparationVerdict<W> {
    pub fn is_separated(&self) -> bool {
        matches!(self, SeparationVerdict::StronglySeparated(_))
    }
}

/// Oracle for a CAT(0) cube complex on which a group acts simply transitively
/// on vertices (the vertex set is identified with the group; the basepoint is
/// the identity).
pub trait CubeComplex {
    type Vertex: Clone + Eq + Hash + Debug;
    type Wall: Clone + Eq + Ord + Hash + Debug;

    fn basepoint(&self) -> Self::Vertex;

    /// Number of walls separating `u` from `v`.
    fn distance(&self, u: &Self::Vertex, v: &Self::Vertex) -> usize;

    fn median(&self, u: &Self::Vertex, v: &Self::Vertex, w: &Self::Vertex) -> Self::Vertex;

    /// Walls separating `u` from `v`, in the order a canonical geodesic from
    /// `u` crosses them, each oriented to contain `v`.
    fn separating_walls(&self, u: &Self::Vertex, v: &Self::Vertex) -> Vec<HalfSpace<Self::Wall>>;

    /// Canonical dual edge `(p, q)` of a wall; `q` lies on the `+` side.
    fn dual_edge(&self, wall: &Self::Wall) -> (Self::Vertex, Self::Vertex);

    /// Side of `wall` containing `v`.
    fn side(&self, wall: &Self::Wall, v: &Self::Vertex) -> Sign;

    fn transverse(&self, a: &Self::Wall, b: &Self::Wall) -> bool;

    /// The half-space containing `q` but not `p` for adjacent `p`, `q`.
    fn halfspace_of_edge(&self, p: &Self::Vertex, q: &Self::Vertex) -> Result<HalfSpace<Self::Wall>>;

    /// Nearest-point projection of `v` onto the half-space `h`.
    fn gate(&self, h: &HalfSpace<Self::Wall>, v: &Self::Vertex) -> Self::Vertex;

    fn neighbors(&self, v: &Self::Vertex) -> Vec<Self::Vertex>;

    /// Maximal number of pairwise transverse walls.
    fn dimension(&self) -> usize;

    /// Group law: `g * v`.
    fn mul(&self, g: &Self::Vertex, v: &Self::Vertex) -> Self::Vertex;

    fn inverse(&self, g: &Self::Vertex) -> Self::Vertex;

    /// Image `g·h` of a half-space.
    fn translate(&self, g: &Self::Vertex, h: &HalfSpace<Self::Wall>) -> HalfSpace<Self::Wall>
    where
        Self: Sized,
    {
        let (out, inn) = oriented_edge(self, h);
        self.halfspace_of_edge(&self.mul(g, &out), &self.mul(g, &inn))
            .expect("translates of adjacent vertices stay adjacent")
    }

    /// Family-specific strong-separation rule for two disjoint walls.
    /// `search_radius` bounds any witness search the family needs.
    fn separation_rule(
        &self,
        a: &Self::Wall,
        b: &Self::Wall,
        search_radius: usize,
    ) -> SeparationVerdict<Self::Wall>;
}

pub fn contains<C: CubeComplex>(c: &C, h: &HalfSpace<C::Wall>, v: &C::Vertex) -> bool {
    c.side(&h.wall, v) == h.sign
}

/// Dual edge of `h` ordered as `(outside, inside)`.
pub fn oriented_edge<C: CubeComplex>(c: &C, h: &HalfSpace<C::Wall>) -> (C::Vertex, C::Vertex) {
    let (p, q) = c.dual_edge(&h.wall);
    match h.sign {
        Sign::Plus => (p, q),
        Sign::Minus => (q, p),
    }
}

pub fn in_interval<C: CubeComplex>(c: &C, z: &C::Vertex, u: &C::Vertex, v: &C::Vertex) -> bool {
    c.distance(u, z) + c.distance(z, v) == c.distance(u, v)
}

/// Image `g . h` of a half-space under the group action.
pub fn act_halfspace<C: CubeComplex>(
    c: &C,
    g: &C::Vertex,
    h: &HalfSpace<C::Wall>,
) -> HalfSpace<C::Wall> {
    c.translate(g, h)
}

/// Every vertex within `radius` of `center`, in breadth-first order.
pub fn ball<C: CubeComplex>(c: &C, center: &C::Vertex, radius: usize) -> Vec<C::Vertex> {
    let mut seen = std::collections::HashSet::new();
    let mut order = vec![center.clone()];
    seen.insert(center.clone());
    let mut frontier = vec![center.clone()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &frontier {
            for w in c.neighbors(v) {
                if seen.insert(w.clone()) {
                    order.push(w.clone());
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    order
}

/// Walls having a dual edge with both endpoints within `radius` of the
/// basepoint, sorted in canonical wall order.
pub fn walls_within<C: CubeComplex>(c: &C, radius: usize) -> Vec<C::Wall> {
    let o = c.basepoint();
    let mut walls = std::collections::BTreeSet::new();
    for v in ball(c, &o, radius) {
        for w in c.neighbors(&v) {
            if c.distance(&o, &w) <= radius {
                walls.insert(c.halfspace_of_edge(&v, &w).expect("neighbors are adjacent").wall);
            }
        }
    }
    walls.into_iter().collect()
}
