//! Right-angled Artin groups acting on the universal cover of their Salvetti
//! complex. Free groups (trees) are the edgeless case.
//!
//! Elements are reduced words; the canonical form is the lexicographically
//! least linearization of the heap of pieces, computed by a greedy
//! topological sort. A wall is named by its label `a` and the minimal
//! representative of the coset `g<lk(a)>` of its lower dual-edge endpoint;
//! its canonical dual edge is `(rep, rep·a)` with `+` on the `rep·a` side.

use std::collections::HashSet;

use super::word::{Letter, Word};
use crate::pocset::{HalfSpace, SeparationReason, SeparationVerdict, Sign};

/// Hard ceiling on parabolic-ball enumeration during witness searches.
const WITNESS_SEARCH_CAP: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RaagWall {
    pub label: u8,
    pub coset: Word,
}

#[derive(Clone, Debug)]
pub struct Raag {
    names: Vec<String>,
    /// `link[i]` has bit `j` set iff generators `i` and `j` commute (`i != j`).
    link: Vec<u64>,
    free: bool,
    dimension: usize,
}

impl Raag {
    /// `edges` are index pairs of commuting generators.
    pub fn new(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, String> {
        let n = names.len();
        if n == 0 {
            return Err("at least one generator is required".into());
        }
        if n > 64 {
            return Err("at most 64 generators are supported".into());
        }
        let distinct: HashSet<&String> = names.iter().collect();
        if distinct.len() != n {
            return Err("generator names must be distinct".into());
        }
        let mut link = vec![0u64; n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(format!("edge ({i},{j}) references a missing generator"));
            }
            if i == j {
                return Err(format!("self-loop on generator `{}`", names[i]));
            }
            link[i] |= 1 << j;
            link[j] |= 1 << i;
        }
        let free = link.iter().all(|&m| m == 0);
        let dimension = max_clique(&link);
        Ok(Raag {
            names,
            link,
            free,
            dimension,
        })
    }

    pub fn free_group(rank: usize) -> Self {
        Raag::new(default_names(rank), &[]).expect("free group of positive rank")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn link_mask(&self, g: u8) -> u64 {
        self.link[g as usize]
    }

    pub fn star_mask(&self, g: u8) -> u64 {
        self.link[g as usize] | (1 << g)
    }

    /// Distinct generators commute.
    #[inline]
    fn independent(&self, x: u8, y: u8) -> bool {
        self.link[x as usize] >> y & 1 == 1
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.rank() as u8)
            .flat_map(|g| [Letter::pos(g), Letter::neg(g)])
            .collect()
    }

    /// Right-multiplies a reduced word by one letter, cancelling if possible.
    pub fn push(&self, w: &mut Vec<Letter>, x: Letter) {
        for i in (0..w.len()).rev() {
            let y = w[i];
            if y.gen == x.gen {
                if y.inv != x.inv {
                    w.remove(i);
                    return;
                }
                break;
            }
            if !self.independent(x.gen, y.gen) {
                break;
            }
        }
        w.push(x);
    }

    pub fn reduce<I: IntoIterator<Item = Letter>>(&self, letters: I) -> Vec<Letter> {
        let mut w = Vec::new();
        for x in letters {
            self.push(&mut w, x);
        }
        w
    }

    /// Lexicographically least linearization of a reduced word.
    pub fn canonical(&self, w: Vec<Letter>) -> Word {
        if self.free || w.len() < 2 {
            return Word(w);
        }
        // A letter is heap-minimal when it heads the queue of its generator
        // and no dependent generator has an earlier letter still waiting.
        let k = self.rank();
        let mut queues: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, x) in w.iter().enumerate() {
            queues[x.gen as usize].push(i);
        }
        let mut head = vec![0usize; k];
        let front = |head: &[usize], g: usize| queues[g].get(head[g]).copied().unwrap_or(usize::MAX);
        let mut out = Vec::with_capacity(w.len());
        while out.len() < w.len() {
            let mut best: Option<usize> = None;
            for g in 0..k {
                let i = front(&head, g);
                if i == usize::MAX {
                    continue;
                }
                let blocked = (0..k).any(|y| y != g && !self.independent(g as u8, y as u8) && front(&head, y) < i);
                if !blocked && best.is_none_or(|b| w[i] < w[b]) {
                    best = Some(i);
                }
            }
            let i = best.expect("some letter is always minimal");
            out.push(w[i]);
            head[w[i].gen as usize] += 1;
        }
        Word(out)
    }

    pub fn normal_form(&self, letters: &[Letter]) -> Word {
        self.canonical(self.reduce(letters.iter().copied()))
    }

    pub fn inverse_letters(letters: &[Letter]) -> impl Iterator<Item = Letter> + '_ {
        letters.iter().rev().map(|l| l.inverse())
    }

    /// Reduced (not canonical) form of `u^-1 v`.
    pub fn quotient(&self, u: &[Letter], v: &[Letter]) -> Vec<Letter> {
        self.reduce(Self::inverse_letters(u).chain(v.iter().copied()))
    }

    pub fn mul(&self, u: &Word, v: &Word) -> Word {
        self.canonical(self.reduce(u.0.iter().chain(v.0.iter()).copied()))
    }

    pub fn inverse(&self, u: &Word) -> Word {
        self.canonical(Self::inverse_letters(&u.0).collect())
    }

    pub fn distance(&self, u: &Word, v: &Word) -> usize {
        self.quotient(&u.0, &v.0).len()
    }

    /// Indices of the heap-minimal letters of a reduced word.
    fn first_positions(&self, w: &[Letter]) -> Vec<usize> {
        let mut allowed = u64::MAX;
        let mut out = Vec::new();
        for (i, y) in w.iter().enumerate() {
            if allowed >> y.gen & 1 == 1 {
                out.push(i);
            }
            allowed &= self.link[y.gen as usize];
            if allowed == 0 {
                break;
            }
        }
        out
    }

    /// Position of `x` if it is a heap-minimal letter of the reduced word `w`.
    pub fn first_position(&self, w: &[Letter], x: Letter) -> Option<usize> {
        for (i, y) in w.iter().enumerate() {
            if y.gen == x.gen {
                return (y.inv == x.inv).then_some(i);
            }
            if !self.independent(x.gen, y.gen) {
                return None;
            }
        }
        None
    }

    /// Position of `x` if it is a heap-maximal letter of the reduced word `w`.
    pub fn last_position(&self, w: &[Letter], x: Letter) -> Option<usize> {
        for (i, y) in w.iter().enumerate().rev() {
            if y.gen == x.gen {
                return (y.inv == x.inv).then_some(i);
            }
            if !self.independent(x.gen, y.gen) {
                return None;
            }
        }
        None
    }

    /// Splits `w = p·r` with `p` the maximal prefix in `<set>`.
    pub fn prefix_split(&self, w: &[Letter], set: u64) -> (Vec<Letter>, Vec<Letter>) {
        let mut taken = Vec::new();
        let mut rest = Vec::new();
        // Generators that commute with every letter kept in `rest` so far.
        let mut allowed = set;
        for (i, &y) in w.iter().enumerate() {
            if allowed == 0 {
                rest.extend_from_slice(&w[i..]);
                break;
            }
            if allowed >> y.gen & 1 == 1 {
                taken.push(y);
            } else {
                rest.push(y);
                allowed &= self.link[y.gen as usize];
            }
        }
        (taken, rest)
    }

    /// Splits `w = r·s` with `s` the maximal suffix in `<set>`.
    pub fn suffix_split(&self, w: &[Letter], set: u64) -> (Vec<Letter>, Vec<Letter>) {
        let mut taken = Vec::new();
        let mut rest = Vec::new();
        let mut allowed = set;
        for i in (0..w.len()).rev() {
            let y = w[i];
            if allowed == 0 {
                rest.extend(w[..=i].iter().rev());
                break;
            }
            if allowed >> y.gen & 1 == 1 {
                taken.push(y);
            } else {
                rest.push(y);
                allowed &= self.link[y.gen as usize];
            }
        }
        rest.reverse();
        taken.reverse();
        (rest, taken)
    }

    /// Length of the maximal `<set>`-suffix; stops early once nothing more can move.
    pub fn suffix_strip_len(&self, w: &[Letter], set: u64) -> usize {
        let mut allowed = set;
        let mut stripped = 0;
        for y in w.iter().rev() {
            if allowed == 0 {
                break;
            }
            if allowed >> y.gen & 1 == 1 {
                stripped += 1;
            } else {
                allowed &= self.link[y.gen as usize];
            }
        }
        stripped
    }

    /// Membership of `g` in `<A><B>`: strip the maximal `<A>`-prefix, then
    /// test whether the remainder is supported on `B`.
    pub fn double_coset_member(&self, g: &[Letter], a: u64, b: u64) -> bool {
        let (_, rest) = self.prefix_split(g, a);
        rest.iter().all(|y| b >> y.gen & 1 == 1)
    }

    /// Minimal representative of `w<lk(label)>`.
    pub fn coset_rep(&self, w: &[Letter], label: u8) -> Word {
        let (rest, _) = self.suffix_split(w, self.link_mask(label));
        self.canonical(rest)
    }

    /// Half-space entered when walking from the reduced word `w` along `x`.
    pub fn wall_of_step(&self, w: &[Letter], x: Letter) -> HalfSpace<RaagWall> {
        if x.inv {
            let mut lower = w.to_vec();
            self.push(&mut lower, x);
            HalfSpace::new(
                RaagWall {
                    label: x.gen,
                    coset: self.coset_rep(&lower, x.gen),
                },
                Sign::Minus,
            )
        } else {
            HalfSpace::new(
                RaagWall {
                    label: x.gen,
                    coset: self.coset_rep(w, x.gen),
                },
                Sign::Plus,
            )
        }
    }

    /// Image `g·wall`; it keeps the label, and orientation is preserved.
    pub fn translate_wall(&self, g: &[Letter], wall: &RaagWall) -> RaagWall {
        let lower = self.reduce(g.iter().chain(wall.coset.0.iter()).copied());
        RaagWall {
            label: wall.label,
            coset: self.coset_rep(&lower, wall.label),
        }
    }

    pub fn dual_edge(&self, wall: &RaagWall) -> (Word, Word) {
        let mut q = wall.coset.0.clone();
        self.push(&mut q, Letter::pos(wall.label));
        (wall.coset.clone(), self.canonical(q))
    }

    /// `+` iff `v` is nearer to `rep·a` than to `rep`.
    pub fn side(&self, wall: &RaagWall, v: &[Letter]) -> Sign {
        let u = self.quotient(&wall.coset.0, v);
        if self.first_position(&u, Letter::pos(wall.label)).is_some() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn transverse(&self, w1: &RaagWall, w2: &RaagWall) -> bool {
        if w1.label == w2.label || !self.independent(w1.label, w2.label) {
            return false;
        }
        let g = self.quotient(&w2.coset.0, &w1.coset.0);
        self.double_coset_member(&g, self.star_mask(w2.label), self.star_mask(w1.label))
    }

    /// Greatest common prefix of two reduced words.
    pub fn meet(&self, mut x: Vec<Letter>, mut y: Vec<Letter>) -> Vec<Letter> {
        let mut out = Vec::new();
        'outer: loop {
            for i in self.first_positions(&x) {
                let l = x[i];
                if let Some(j) = self.first_position(&y, l) {
                    x.remove(i);
                    y.remove(j);
                    out.push(l);
                    continue 'outer;
                }
            }
            return out;
        }
    }

    pub fn median(&self, u: &Word, v: &Word, w: &Word) -> Word {
        if v == w {
            return v.clone();
        }
        if u == v || u == w {
            return u.clone();
        }
        let m = self.meet(self.quotient(&u.0, &v.0), self.quotient(&u.0, &w.0));
        self.canonical(self.reduce(u.0.iter().chain(m.iter()).copied()))
    }

    pub fn separating_walls(&self, u: &Word, v: &Word) -> Vec<HalfSpace<RaagWall>> {
        let path = self.canonical(self.quotient(&u.0, &v.0));
        let mut cur = u.0.clone();
        let mut out = Vec::with_capacity(path.len());
        for &x in path.letters() {
            out.push(self.wall_of_step(&cur, x));
            self.push(&mut cur, x);
        }
        out
    }

    pub fn gate(&self, h: &HalfSpace<RaagWall>, v: &Word) -> Word {
        if self.side(&h.wall, &v.0) == h.sign {
            return v.clone();
        }
        let (p, q) = self.dual_edge(&h.wall);
        let base = if h.sign == Sign::Plus { q } else { p };
        let u = self.quotient(&base.0, &v.0);
        let (pre, _) = self.prefix_split(&u, self.link_mask(h.wall.label));
        self.canonical(self.reduce(base.0.iter().chain(pre.iter()).copied()))
    }

    pub fn neighbors(&self, v: &Word) -> Vec<Word> {
        self.letters()
            .into_iter()
            .map(|x| {
                let mut w = v.0.clone();
                self.push(&mut w, x);
                self.canonical(w)
            })
            .collect()
    }

    /// Elements of the parabolic subgroup `<set>` within word length `radius`.
    fn parabolic_ball(&self, set: u64, radius: usize) -> Vec<Word> {
        let gens: Vec<Letter> = self.letters().into_iter().filter(|l| set >> l.gen & 1 == 1).collect();
        let mut seen = HashSet::new();
        let mut out = vec![Word::identity()];
        seen.insert(Word::identity());
        let mut frontier = out.clone();
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for &x in &gens {
                    let mut n = w.0.clone();
                    self.push(&mut n, x);
                    let n = self.canonical(n);
                    if seen.insert(n.clone()) {
                        out.push(n.clone());
                        next.push(n);
                        if out.len() >= WITNESS_SEARCH_CAP {
                            return out;
                        }
                    }
                }
            }
            frontier = next;
        }
        out
    }

    /// Labels in `lk(a) ∩ lk(a')` are the only ones that can cross both walls;
    /// when there are none the pair is strongly separated outright. Otherwise
    /// search carrier translates `g·t`, `t ∈ <lk(a)>`, `|t| ≤ radius`.
    pub fn separation_rule(&self, w1: &RaagWall, w2: &RaagWall, radius: usize) -> SeparationVerdict<RaagWall> {
        let candidates = self.link_mask(w1.label) & self.link_mask(w2.label);
        if candidates == 0 {
            return SeparationVerdict::StronglySeparated(SeparationReason::FamilyExact(
                "no generator commutes with both labels",
            ));
        }
        let translates = self.parabolic_ball(self.link_mask(w1.label), radius);
        for b in 0..self.rank() as u8 {
            if candidates >> b & 1 == 0 {
                continue;
            }
            let mut tried = HashSet::new();
            for t in &translates {
                let h = self.reduce(w1.coset.0.iter().chain(t.0.iter()).copied());
                let witness = RaagWall {
                    label: b,
                    coset: self.coset_rep(&h, b),
                };
                if !tried.insert(witness.clone()) {
                    continue;
                }
                if self.transverse(&witness, w1) && self.transverse(&witness, w2) {
                    return SeparationVerdict::NotStronglySeparated { witness };
                }
            }
        }
        SeparationVerdict::Unknown {
            searched_radius: radius,
        }
    }

    /// `w = conj · core · conj^-1` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self, w: &[Letter]) -> (Vec<Letter>, Vec<Letter>) {
        let mut core = self.reduce(w.iter().copied());
        let mut conj = Vec::new();
        'outer: loop {
            for i in self.first_positions(&core) {
                let x = core[i];
                if let Some(j) = self.last_position(&core, x.inverse()) {
                    // j > i: x^-1 sits after x in the word.
                    core.remove(j);
                    core.remove(i);
                    conj.push(x);
                    continue 'outer;
                }
            }
            return (conj, core);
        }
    }

    pub fn translation_length(&self, w: &[Letter]) -> usize {
        self.cyclic_reduce(w).1.len()
    }
}

pub fn default_names(rank: usize) -> Vec<String> {
    (0..rank)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("g{i}")
            }
        })
        .collect()
}

fn max_clique(link: &[u64]) -> usize {
    fn grow(link: &[u64], candidates: u64, size: usize, best: &mut usize) {
        if candidates == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + candidates.count_ones() as usize <= *best {
            return;
        }
        let mut rest = candidates;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            grow(link, rest & link[v], size + 1, best);
        }
    }
    let mut best = 0;
    let all = if link.len() == 64 { u64::MAX } else { (1u64 << link.len()) - 1 };
    grow(link, all, 0, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::word::parse_letters;

    fn z2_free_z() -> Raag {
        Raag::new(default_names(3), &[(0, 1)]).unwrap()
    }

    fn w(r: &Raag, s: &str) -> Word {
        r.normal_form(&parse_letters(s, r.names()).unwrap())
    }

    #[test]
    fn free_reduction_cancels() {
        let f2 = Raag::free_group(2);
        assert_eq!(w(&f2, "a a^-1 b"), w(&f2, "b"));
    }

    #[test]
    fn commuting_cancellation() {
        let r = z2_free_z();
        assert_eq!(w(&r, "b a c c^-1 a^-1"), w(&r, "b"));
        assert_eq!(w(&r, "a b a^-1 c").len(), 2);
        assert_eq!(w(&r, "a b a"), w(&r, "a a b"));
        assert_eq!(w(&r, "b a a").0, parse_letters("a a b", r.names()).unwrap());
    }

    #[test]
    fn canonical_is_lex_least() {
        let r = z2_free_z();
        // b a^-1 = a^-1 b, and a^-1 < b.
        assert_eq!(w(&r, "b a^-1").0, parse_letters("a^-1 b", r.names()).unwrap());
        // c blocks: b c a cannot be reordered across c.
        assert_eq!(w(&r, "b c a").0, parse_letters("b c a", r.names()).unwrap());
    }

    #[test]
    fn cliques() {
        assert_eq!(Raag::free_group(3).dimension(), 1);
        assert_eq!(z2_free_z().dimension(), 2);
        let z3 = Raag::new(default_names(3), &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(z3.dimension(), 3);
    }

    #[test]
    fn double_cosets() {
        let r = z2_free_z();
        let ab = 0b011;
        assert!(r.double_coset_member(&[], ab, ab));
        assert!(!r.double_coset_member(&w(&r, "c").0, ab, ab));
        assert!(r.double_coset_member(&w(&r, "a c").0, ab, 0b100));
    }

    #[test]
    fn cyclic_reduction() {
        let f2 = Raag::free_group(2);
        assert_eq!(f2.translation_length(&w(&f2, "a b a^-1").0), 1);
        let r = z2_free_z();
        assert_eq!(r.translation_length(&w(&r, "a b").0), 2);
        // c a c^-1 b: conjugating by c does not help since b blocks.
        assert_eq!(r.translation_length(&w(&r, "c a c^-1 b").0), 4);
        assert_eq!(r.translation_length(&w(&r, "b c a c^-1 b^-1").0), 1);
    }

    #[test]
    fn bad_graphs_rejected() {
        assert!(Raag::new(default_names(2), &[(0, 0)]).is_err());
        assert!(Raag::new(default_names(2), &[(0, 5)]).is_err());
        assert!(Raag::new(vec!["a".into(), "a".into()], &[]).is_err());
    }
}
