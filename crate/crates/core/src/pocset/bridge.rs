use super::{oriented_edge, strongly_separated, wall_relation, CubeComplex, HalfSpace, WallRelation};
use crate::error::{Error, Result};

/// Unique closest pair between `h` and `k*` for strongly separated `h ⊂ k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge<V> {
    /// Endpoint in `h`.
    pub p1: V,
    /// Endpoint in `k*`.
    pub p2: V,
    pub length: usize,
}

/// A pair of half-spaces `(inner, outer)`.
pub type HalfSpacePair<W> = (HalfSpace<W>, HalfSpace<W>);

/// Reorders a nested pair of half-spaces as `(inner, outer)` with `inner ⊂ outer`.
pub fn nested_pair<C: CubeComplex>(
    c: &C,
    h: &HalfSpace<C::Wall>,
    k: &HalfSpace<C::Wall>,
) -> Result<HalfSpacePair<C::Wall>> {
    match wall_relation(c, h, k) {
        WallRelation::HsubK => Ok((h.clone(), k.clone())),
        WallRelation::KsubH => Ok((k.clone(), h.clone())),
        WallRelation::HsubKstar => Ok((h.clone(), k.complement())),
        WallRelation::KstarSubH => Ok((k.complement(), h.clone())),
        rel => Err(Error::Precondition(format!("half-spaces are not nested: {rel:?}"))),
    }
}

/// Alternating gate projections between `inner` and `outer*` until the pair repeats.
fn gated_pair<C: CubeComplex>(
    c: &C,
    inner: &HalfSpace<C::Wall>,
    outer: &HalfSpace<C::Wall>,
) -> Result<(C::Vertex, C::Vertex)> {
    let outer_c = outer.complement();
    let (_, x0) = oriented_edge(c, inner);
    let (y0, _) = oriented_edge(c, outer);
    let cap = 2 * c.distance(&x0, &y0) + 4;
    let mut y = y0;
    let mut last: Option<(C::Vertex, C::Vertex)> = None;
    for _ in 0..cap {
        let x = c.gate(inner, &y);
        let y2 = c.gate(&outer_c, &x);
        if let Some((lx, ly)) = &last {
            if *lx == x && *ly == y2 {
                return Ok((x, y2));
            }
        }
        last = Some((x, y2.clone()));
        y = y2;
    }
    Err(Error::Internal("gate iteration did not settle".into()))
}

/// Distance between `inner` and `outer*` for any nested pair.
pub fn pair_distance<C: CubeComplex>(c: &C, h: &HalfSpace<C::Wall>, k: &HalfSpace<C::Wall>) -> Result<usize> {
    let (inner, outer) = nested_pair(c, h, k)?;
    let (x, y) = gated_pair(c, &inner, &outer)?;
    Ok(c.distance(&x, &y))
}

/// Combinatorial bridge of strongly separated `h ⊂ k`.
pub fn bridge<C: CubeComplex>(
    c: &C,
    h: &HalfSpace<C::Wall>,
    k: &HalfSpace<C::Wall>,
) -> Result<Bridge<C::Vertex>> {
    let rel = wall_relation(c, h, k);
    if rel != WallRelation::HsubK {
        return Err(Error::Precondition(format!("bridge expects h ⊂ k, got {rel:?}")));
    }
    if !strongly_separated(c, h, k)?.is_separated() {
        return Err(Error::Precondition("bridge needs a certified strongly separated pair".into()));
    }
    let (p1, p2) = gated_pair(c, h, k)?;
    let length = c.distance(&p1, &p2);
    Ok(Bridge { p1, p2, length })
}

/// Answer of the super-strong-separation test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SuperSeparation<W> {
    /// `inner ⊂ middle ⊂ outer`, pairwise strongly separated.
    Yes {
        inner: HalfSpace<W>,
        middle: HalfSpace<W>,
        outer: HalfSpace<W>,
    },
    Unknown,
}

impl<W: Clone + Eq + Ord + std::hash::Hash + std::fmt::Debug> SuperSeparation<W> {
    /// Re-derive the certificate from scratch.
    pub fn verify<C: CubeComplex<Wall = W>>(&self, c: &C) -> bool {
        match self {
            SuperSeparation::Unknown => false,
            SuperSeparation::Yes { inner, middle, outer } => {
                wall_relation(c, inner, middle) == WallRelation::HsubK
                    && wall_relation(c, middle, outer) == WallRelation::HsubK
                    && [(inner, middle), (middle, outer), (inner, outer)]
                        .iter()
                        .all(|(a, b)| matches!(strongly_separated(c, a, b), Ok(v) if v.is_separated()))
            }
        }
    }
}

/// Looks for a middle half-space making a nested pair super strongly
/// separated. Never answers a false `Yes`.
pub fn super_strongly_separated<C: CubeComplex>(
    c: &C,
    h: &HalfSpace<C::Wall>,
    k: &HalfSpace<C::Wall>,
) -> Result<SuperSeparation<C::Wall>> {
    let (inner, outer) = nested_pair(c, h, k)?;
    if !strongly_separated(c, &inner, &outer)?.is_separated() {
        return Ok(SuperSeparation::Unknown);
    }
    let (p1, p2) = gated_pair(c, &inner, &outer)?;
    for crossing in c.separating_walls(&p1, &p2) {
        if crossing.wall == inner.wall || crossing.wall == outer.wall {
            continue;
        }
        let middle = crossing.complement();
        if wall_relation(c, &inner, &middle) != WallRelation::HsubK
            || wall_relation(c, &middle, &outer) != WallRelation::HsubK
        {
            continue;
        }
        if strongly_separated(c, &inner, &middle)?.is_separated()
            && strongly_separated(c, &middle, &outer)?.is_separated()
        {
            return Ok(SuperSeparation::Yes { inner, middle, outer });
        }
    }
    Ok(SuperSeparation::Unknown)
}
