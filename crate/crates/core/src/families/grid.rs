//! The standard cubulation of `Z^D`.

use crate::pocset::{HalfSpace, SeparationReason, SeparationVerdict, Sign};

/// The wall between `x_axis = offset - 1` and `x_axis = offset`; `+` is `x_axis >= offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridWall {
    pub axis: usize,
    pub offset: i64,
}

#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
}

impl Grid {
    pub fn new(dim: usize) -> Result<Self, String> {
        if dim == 0 {
            return Err("grid dimension must be at least 1".into());
        }
        Ok(Grid { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> Vec<i64> {
        vec![0; self.dim]
    }

    pub fn distance(u: &[i64], v: &[i64]) -> usize {
        u.iter().zip(v).map(|(a, b)| a.abs_diff(*b) as usize).sum()
    }

    pub fn median(u: &[i64], v: &[i64], w: &[i64]) -> Vec<i64> {
        u.iter()
            .zip(v)
            .zip(w)
            .map(|((&a, &b), &c)| a.max(b).min(a.min(b).max(c)))
            .collect()
    }

    pub fn separating_walls(u: &[i64], v: &[i64]) -> Vec<HalfSpace<GridWall>> {
        let mut out = Vec::new();
        for (axis, (&a, &b)) in u.iter().zip(v).enumerate() {
            if b > a {
                out.extend((a + 1..=b).map(|offset| HalfSpace::new(GridWall { axis, offset }, Sign::Plus)));
            } else {
                out.extend((b + 1..=a).rev().map(|offset| HalfSpace::new(GridWall { axis, offset }, Sign::Minus)));
            }
        }
        out
    }

    pub fn dual_edge(&self, wall: &GridWall) -> (Vec<i64>, Vec<i64>) {
        let mut p = self.origin();
        let mut q = self.origin();
        p[wall.axis] = wall.offset - 1;
        q[wall.axis] = wall.offset;
        (p, q)
    }

    pub fn side(wall: &GridWall, v: &[i64]) -> Sign {
        if v[wall.axis] >= wall.offset {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn transverse(a: &GridWall, b: &GridWall) -> bool {
        a.axis != b.axis
    }

    pub fn halfspace_of_edge(p: &[i64], q: &[i64]) -> Option<HalfSpace<GridWall>> {
        let diffs: Vec<usize> = (0..p.len()).filter(|&i| p[i] != q[i]).collect();
        match diffs.as_slice() {
            [axis] if q[*axis] == p[*axis] + 1 => Some(HalfSpace::new(GridWall { axis: *axis, offset: q[*axis] }, Sign::Plus)),
            [axis] if q[*axis] == p[*axis] - 1 => Some(HalfSpace::new(GridWall { axis: *axis, offset: p[*axis] }, Sign::Minus)),
            _ => None,
        }
    }

    pub fn gate(h: &HalfSpace<GridWall>, v: &[i64]) -> Vec<i64> {
        let mut out = v.to_vec();
        let x = &mut out[h.wall.axis];
        match h.sign {
            Sign::Plus => *x = (*x).max(h.wall.offset),
            Sign::Minus => *x = (*x).min(h.wall.offset - 1),
        }
        out
    }

    pub fn neighbors(v: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(2 * v.len());
        for i in 0..v.len() {
            for d in [1, -1] {
                let mut w = v.to_vec();
                w[i] += d;
                out.push(w);
            }
        }
        out
    }

    /// A line has no crossing walls at all; in higher dimension any wall of
    /// another axis crosses both.
    pub fn separation_rule(&self, a: &GridWall, _b: &GridWall) -> SeparationVerdict<GridWall> {
        if self.dim == 1 {
            SeparationVerdict::StronglySeparated(SeparationReason::FamilyExact("walls of a line never cross"))
        } else {
            SeparationVerdict::NotStronglySeparated {
                witness: GridWall {
                    axis: (a.axis + 1) % self.dim,
                    offset: 1,
                },
            }
        }
    }
}
