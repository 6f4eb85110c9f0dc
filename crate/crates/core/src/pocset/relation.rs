use serde::Serialize;

use super::{bridge::pair_distance, contains, oriented_edge, CubeComplex, HalfSpace, SeparationVerdict};
use crate::error::{Error, Result};

/// Relative position of two half-spaces `h` and `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WallRelation {
    Equal,
    Complement,
    Transverse,
    /// `h ⊂ k`
    HsubK,
    /// `k ⊂ h`
    KsubH,
    /// `h ⊂ k*`
    HsubKstar,
    /// `k* ⊂ h`
    KstarSubH,
}

impl WallRelation {
    pub fn is_nesting(self) -> bool {
        matches!(
            self,
            WallRelation::HsubK | WallRelation::KsubH | WallRelation::HsubKstar | WallRelation::KstarSubH
        )
    }
}

/// Decide the relation between two half-spaces.
///
/// For distinct, non-transverse walls the four dual-edge endpoints hit exactly
/// three of the four corner regions; the region they miss is the empty one.
pub fn wall_relation<C: CubeComplex>(c: &C, h: &HalfSpace<C::Wall>, k: &HalfSpace<C::Wall>) -> WallRelation {
    if h.wall == k.wall {
        return if h.sign == k.sign {
            WallRelation::Equal
        } else {
            WallRelation::Complement
        };
    }
    if c.transverse(&h.wall, &k.wall) {
        return WallRelation::Transverse;
    }
    let (_, qh) = oriented_edge(c, h);
    let (_, qk) = oriented_edge(c, k);
    // Side of k holding the whole dual edge of h, and vice versa.
    let h_edge_in_k = contains(c, k, &qh);
    let k_edge_in_h = contains(c, h, &qk);
    // The missed region is (h-side = !k_edge_in_h, k-side = !h_edge_in_k).
    match (!k_edge_in_h, !h_edge_in_k) {
        (true, false) => WallRelation::HsubK,
        (false, true) => WallRelation::KsubH,
        (true, true) => WallRelation::HsubKstar,
        (false, false) => WallRelation::KstarSubH,
    }
}

/// Strong separation of two disjoint walls, with a re-checked certificate.
///
/// Transverse or equal walls are rejected.
pub fn strongly_separated<C: CubeComplex>(
    c: &C,
    h: &HalfSpace<C::Wall>,
    k: &HalfSpace<C::Wall>,
) -> Result<SeparationVerdict<C::Wall>> {
    let rel = wall_relation(c, h, k);
    if !rel.is_nesting() {
        return Err(Error::Precondition(format!(
            "strong separation needs disjoint walls, got {rel:?}"
        )));
    }
    let radius = pair_distance(c, h, k)? + 2;
    let verdict = c.separation_rule(&h.wall, &k.wall, radius);
    if let SeparationVerdict::NotStronglySeparated { witness } = &verdict {
        if !(c.transverse(witness, &h.wall) && c.transverse(witness, &k.wall)) {
            return Err(Error::Internal(format!(
                "separation witness {witness:?} does not cross both walls"
            )));
        }
    }
    Ok(verdict)
}
