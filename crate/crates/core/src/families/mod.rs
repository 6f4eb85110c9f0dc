//! Concrete cube complexes: trees, grids, right-angled Artin groups and
//! finite products of those, all acted on simply transitively by a group.

pub mod ball;
pub mod grid;
pub mod raag;
pub mod word;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pocset::{CubeComplex, HalfSpace, SeparationVerdict, Sign};
use grid::{Grid, GridWall};
use raag::{default_names, Raag, RaagWall};
use word::{parse_letters, Letter, Word, WordDisplay};

pub use ball::ExplicitBall;

/// Declarative description of a family, as read from a config file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    /// The free group of the given rank acting on its Cayley tree.
    Tree { rank: usize },
    Grid { dimension: usize },
    Raag {
        generators: Vec<String>,
        #[serde(default)]
        edges: Vec<[String; 2]>,
    },
    Product { factors: Vec<FamilySpec> },
}

/// A group element, which is also a vertex of the complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Word(Word),
    Vector(Vec<i64>),
    Tuple(Vec<Element>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wall {
    Raag(RaagWall),
    Grid(GridWall),
    /// A wall of the `index`-th factor of a product.
    Factor(usize, Box<Wall>),
}

#[derive(Clone, Debug)]
pub enum Family {
    Raag(Raag),
    Grid(Grid),
    Product(Vec<Family>),
}

fn mismatch() -> ! {
    panic!("element does not belong to this family")
}

impl Family {
    pub fn from_spec(spec: &FamilySpec) -> Result<Family> {
        Self::build(spec, "family")
    }

    fn build(spec: &FamilySpec, path: &str) -> Result<Family> {
        match spec {
            FamilySpec::Tree { rank } => {
                if *rank < 2 {
                    return Err(Error::config(format!("{path}.rank"), "tree rank must be at least 2"));
                }
                Ok(Family::Raag(Raag::free_group(*rank)))
            }
            FamilySpec::Grid { dimension } => Grid::new(*dimension)
                .map(Family::Grid)
                .map_err(|m| Error::config(format!("{path}.dimension"), m)),
            FamilySpec::Raag { generators, edges } => {
                let mut pairs = Vec::with_capacity(edges.len());
                for (i, [x, y]) in edges.iter().enumerate() {
                    let find = |n: &String| {
                        generators.iter().position(|g| g == n).ok_or_else(|| {
                            Error::config(format!("{path}.edges[{i}]"), format!("unknown generator `{n}`"))
                        })
                    };
                    let (a, b) = (find(x)?, find(y)?);
                    if a == b {
                        return Err(Error::config(format!("{path}.edges[{i}]"), format!("self-loop on generator `{x}`")));
                    }
                    pairs.push((a, b));
                }
                if generators.iter().any(|g| g.is_empty() || g == "e" || g.contains(|c: char| c.is_whitespace() || "^@+-|()[],:".contains(c))) {
                    return Err(Error::config(format!("{path}.generators"), "generator names must be plain identifiers other than `e`"));
                }
                Raag::new(generators.clone(), &pairs)
                    .map(Family::Raag)
                    .map_err(|m| Error::config(format!("{path}.generators"), m))
            }
            FamilySpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::config(format!("{path}.factors"), "a product needs at least one factor"));
                }
                factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| Self::build(f, &format!("{path}.factors[{i}]")))
                    .collect::<Result<Vec<_>>>()
                    .map(Family::Product)
            }
        }
    }

    pub fn as_raag(&self) -> Option<&Raag> {
        match self {
            Family::Raag(r) => Some(r),
            _ => None,
        }
    }

    /// Symmetric generating set: each generator and its inverse.
    pub fn generators(&self) -> Vec<Element> {
        match self {
            Family::Raag(r) => r.letters().into_iter().map(|l| Element::Word(Word(vec![l]))).collect(),
            Family::Grid(g) => (0..g.dim())
                .flat_map(|i| {
                    [1, -1].map(|d| {
                        let mut v = g.origin();
                        v[i] = d;
                        Element::Vector(v)
                    })
                })
                .collect(),
            Family::Product(fs) => {
                let base: Vec<Element> = fs.iter().map(|f| f.basepoint()).collect();
                let mut out = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    for g in f.generators() {
                        let mut t = base.clone();
                        t[i] = g;
                        out.push(Element::Tuple(t));
                    }
                }
                out
            }
        }
    }

    /// Splits the complex into its irreducible factors. A grid of dimension
    /// `D` splits into `D` lines.
    pub fn irreducible_factors(&self) -> Vec<Family> {
        match self {
            Family::Raag(_) => vec![self.clone()],
            Family::Grid(g) => (0..g.dim()).map(|_| Family::Grid(Grid::new(1).unwrap())).collect(),
            Family::Product(fs) => fs.iter().flat_map(|f| f.irreducible_factors()).collect(),
        }
    }

    /// Coordinates of `g` in [`Family::irreducible_factors`].
    pub fn project(&self, g: &Element) -> Vec<Element> {
        match (self, g) {
            (Family::Raag(_), Element::Word(_)) => vec![g.clone()],
            (Family::Grid(_), Element::Vector(v)) => v.iter().map(|&x| Element::Vector(vec![x])).collect(),
            (Family::Product(fs), Element::Tuple(t)) => fs.iter().zip(t).flat_map(|(f, x)| f.project(x)).collect(),
            _ => mismatch(),
        }
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible_factors().len() == 1
    }

    /// Top-level factors of a product, or the family itself.
    pub fn factors(&self) -> Vec<&Family> {
        match self {
            Family::Product(fs) => fs.iter().collect(),
            _ => vec![self],
        }
    }

    /// Components of `g` along [`Family::factors`].
    pub fn components<'a>(&self, g: &'a Element) -> Vec<&'a Element> {
        match g {
            Element::Tuple(t) => t.iter().collect(),
            _ => vec![g],
        }
    }

    /// Radius of the smallest ball around the basepoint containing a dual
    /// edge of `wall`.
    pub fn reach(&self, wall: &Wall) -> usize {
        let o = self.basepoint();
        let (p, q) = self.dual_edge(wall);
        self.distance(&o, &p).max(self.distance(&o, &q))
    }

    /// Group element `g^k`, `k >= 0`, by repeated squaring.
    pub fn pow(&self, g: &Element, mut k: u64) -> Element {
        let mut acc = self.basepoint();
        let mut base = g.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Image of a wall under `g`; translations preserve orientation in
    /// every supported family.
    fn translate_wall(&self, g: &Element, wall: &Wall) -> Wall {
        match (self, g, wall) {
            (Family::Raag(r), Element::Word(x), Wall::Raag(w)) => Wall::Raag(r.translate_wall(&x.0, w)),
            (Family::Grid(_), Element::Vector(x), Wall::Grid(w)) => Wall::Grid(GridWall {
                axis: w.axis,
                offset: w.offset + x[w.axis],
            }),
            (Family::Product(fs), Element::Tuple(x), Wall::Factor(i, w)) => {
                Wall::Factor(*i, Box::new(fs[*i].translate_wall(&x[*i], w)))
            }
            _ => mismatch(),
        }
    }

    /// Generators `s_1, …, s_d` with `u s_1 ⋯ s_d = v` along the canonical
    /// geodesic, so that step `i` crosses the `i`-th wall of
    /// [`CubeComplex::separating_walls`].
    pub fn geodesic_steps(&self, u: &Element, v: &Element) -> Vec<Element> {
        match (self, u, v) {
            (Family::Raag(r), Element::Word(a), Element::Word(b)) => r
                .canonical(r.quotient(&a.0, &b.0))
                .0
                .into_iter()
                .map(|l| Element::Word(Word(vec![l])))
                .collect(),
            (Family::Grid(g), Element::Vector(a), Element::Vector(b)) => {
                let mut out = Vec::new();
                for (axis, (&x, &y)) in a.iter().zip(b).enumerate() {
                    let mut e = g.origin();
                    e[axis] = (y - x).signum();
                    out.extend(std::iter::repeat_n(Element::Vector(e), x.abs_diff(y) as usize));
                }
                out
            }
            (Family::Product(fs), Element::Tuple(a), Element::Tuple(b)) => {
                let base: Vec<Element> = fs.iter().map(|f| f.basepoint()).collect();
                let mut out = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    for s in f.geodesic_steps(&a[i], &b[i]) {
                        let mut t = base.clone();
                        t[i] = s;
                        out.push(Element::Tuple(t));
                    }
                }
                out
            }
            _ => mismatch(),
        }
    }

    /// `true` iff `g ∈ <A><B>`; only defined for right-angled Artin groups.
    pub fn parabolic_double_coset_member(&self, g: &Element, a: &[&str], b: &[&str]) -> Result<bool> {
        let (Family::Raag(r), Element::Word(w)) = (self, g) else {
            return Err(Error::Usage("parabolic double cosets need a right-angled Artin group".into()));
        };
        let mask = |set: &[&str]| -> Result<u64> {
            set.iter().try_fold(0u64, |m, name| {
                r.names()
                    .iter()
                    .position(|n| n == name)
                    .map(|i| m | 1 << i)
                    .ok_or_else(|| Error::Usage(format!("unknown generator `{name}`")))
            })
        };
        Ok(r.double_coset_member(&w.0, mask(a)?, mask(b)?))
    }

    /// Canonical form of a product of generators (or their inverses).
    pub fn normal_form(&self, letters: &[Letter]) -> Result<Element> {
        match self {
            Family::Raag(r) => {
                if let Some(l) = letters.iter().find(|l| l.gen as usize >= r.rank()) {
                    return Err(Error::Usage(format!("unknown letter index {}", l.gen)));
                }
                Ok(Element::Word(r.normal_form(letters)))
            }
            Family::Grid(g) => {
                let mut v = g.origin();
                for l in letters {
                    let x = v.get_mut(l.gen as usize).ok_or_else(|| Error::Usage(format!("unknown letter index {}", l.gen)))?;
                    *x += if l.inv { -1 } else { 1 };
                }
                Ok(Element::Vector(v))
            }
            Family::Product(_) => Err(Error::Usage("products take one word per factor".into())),
        }
    }

    /// Parses `a b^-1` (tree, RAAG, grid), `[1,-2]` (grid) or `(w1 | w2)` (product).
    pub fn parse_element(&self, text: &str) -> Result<Element> {
        let text = text.trim();
        if text == "e" {
            return Ok(self.basepoint());
        }
        match self {
            Family::Raag(r) => {
                let letters = parse_letters(text, r.names()).map_err(Error::Usage)?;
                Ok(Element::Word(r.normal_form(&letters)))
            }
            Family::Grid(g) => {
                if let Some(inner) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
                    let v = inner
                        .split(',')
                        .map(|s| s.trim().parse::<i64>().map_err(|_| Error::Usage(format!("bad coordinate `{s}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    if v.len() != g.dim() {
                        return Err(Error::Usage(format!("expected {} coordinates", g.dim())));
                    }
                    return Ok(Element::Vector(v));
                }
                let letters = parse_letters(text, &default_names(g.dim())).map_err(Error::Usage)?;
                self.normal_form(&letters)
            }
            Family::Product(fs) => {
                let inner = text
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| Error::Usage(format!("expected `(x | y ...)`, got `{text}`")))?;
                let parts: Vec<&str> = split_top(inner, '|');
                if parts.len() != fs.len() {
                    return Err(Error::Usage(format!("expected {} components, got {}", fs.len(), parts.len())));
                }
                fs.iter().zip(parts).map(|(f, p)| f.parse_element(p)).collect::<Result<Vec<_>>>().map(Element::Tuple)
            }
        }
    }

    pub fn format_element(&self, g: &Element) -> String {
        match (self, g) {
            (Family::Raag(r), Element::Word(w)) => WordDisplay { letters: w.letters(), names: r.names() }.to_string(),
            (Family::Grid(_), Element::Vector(v)) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("[{}]", parts.join(","))
            }
            (Family::Product(fs), Element::Tuple(t)) => {
                let parts: Vec<String> = fs.iter().zip(t).map(|(f, x)| f.format_element(x)).collect();
                format!("({})", parts.join(" | "))
            }
            _ => mismatch(),
        }
    }

    /// `label@coset` for RAAG walls, `a@a^2` for the grid wall `x_a >= 3`,
    /// and `i:wall` for a wall of the `i`-th product factor.
    pub fn format_wall(&self, wall: &Wall) -> String {
        match (self, wall) {
            (Family::Raag(r), Wall::Raag(w)) => format!(
                "{}@{}",
                r.names()[w.label as usize],
                WordDisplay { letters: w.coset.letters(), names: r.names() }
            ),
            (Family::Grid(g), Wall::Grid(w)) => {
                let name = &default_names(g.dim())[w.axis];
                match w.offset - 1 {
                    0 => format!("{name}@e"),
                    1 => format!("{name}@{name}"),
                    k => format!("{name}@{name}^{k}"),
                }
            }
            (Family::Product(fs), Wall::Factor(i, w)) => format!("{i}:{}", fs[*i].format_wall(w)),
            _ => mismatch(),
        }
    }

    pub fn format_halfspace(&self, h: &HalfSpace<Wall>) -> String {
        format!("{}{}", self.format_wall(&h.wall), h.sign.symbol())
    }

    pub fn parse_wall(&self, text: &str) -> Result<Wall> {
        let text = text.trim();
        match self {
            Family::Product(fs) => {
                let (i, rest) = text
                    .split_once(':')
                    .ok_or_else(|| Error::Usage(format!("expected `index:wall`, got `{text}`")))?;
                let i: usize = i.trim().parse().map_err(|_| Error::Usage(format!("bad factor index `{i}`")))?;
                let f = fs.get(i).ok_or_else(|| Error::Usage(format!("factor {i} out of range")))?;
                Ok(Wall::Factor(i, Box::new(f.parse_wall(rest)?)))
            }
            _ => {
                let (label, coset) = text
                    .split_once('@')
                    .ok_or_else(|| Error::Usage(format!("expected `label@coset`, got `{text}`")))?;
                let names = match self {
                    Family::Raag(r) => r.names().to_vec(),
                    Family::Grid(g) => default_names(g.dim()),
                    Family::Product(_) => unreachable!(),
                };
                let label = names
                    .iter()
                    .position(|n| n == label.trim())
                    .ok_or_else(|| Error::Usage(format!("unknown label `{label}`")))? as u8;
                let coset = parse_letters(coset, &names).map_err(Error::Usage)?;
                match self {
                    Family::Raag(r) => {
                        let w = r.reduce(coset);
                        Ok(Wall::Raag(RaagWall { label, coset: r.coset_rep(&w, label) }))
                    }
                    Family::Grid(_) => {
                        let offset: i64 = coset
                            .iter()
                            .filter(|l| l.gen == label)
                            .map(|l| if l.inv { -1 } else { 1 })
                            .sum::<i64>()
                            + 1;
                        Ok(Wall::Grid(GridWall { axis: label as usize, offset }))
                    }
                    Family::Product(_) => unreachable!(),
                }
            }
        }
    }

    /// Parses `wall+` or `wall-`.
    pub fn parse_halfspace(&self, text: &str) -> Result<HalfSpace<Wall>> {
        let text = text.trim();
        let sign = match text.chars().last() {
            Some('+') => Sign::Plus,
            Some('-') => Sign::Minus,
            _ => return Err(Error::Usage(format!("half-space `{text}` must end in `+` or `-`"))),
        };
        Ok(HalfSpace::new(self.parse_wall(&text[..text.len() - 1])?, sign))
    }

    /// Witness wall of factor `j` of a product: the wall of its first generator at the basepoint.
    fn factor_wall(&self, j: usize) -> Wall {
        let Family::Product(fs) = self else { unreachable!() };
        let f = &fs[j];
        let o = f.basepoint();
        let n = f.neighbors(&o).swap_remove(0);
        Wall::Factor(j, Box::new(f.halfspace_of_edge(&o, &n).expect("generator edge").wall))
    }
}

/// Splits on `sep` outside parentheses and brackets.
fn split_top(text: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn wrap(i: usize, h: HalfSpace<Wall>) -> HalfSpace<Wall> {
    HalfSpace::new(Wall::Factor(i, Box::new(h.wall)), h.sign)
}

fn raag_hs(h: HalfSpace<RaagWall>) -> HalfSpace<Wall> {
    HalfSpace::new(Wall::Raag(h.wall), h.sign)
}

fn grid_hs(h: HalfSpace<GridWall>) -> HalfSpace<Wall> {
    HalfSpace::new(Wall::Grid(h.wall), h.sign)
}

fn lift<W>(v: SeparationVerdict<W>, f: impl Fn(W) -> Wall) -> SeparationVerdict<Wall> {
    match v {
        SeparationVerdict::NotStronglySeparated { witness } => SeparationVerdict::NotStronglySeparated { witness: f(witness) },
        SeparationVerdict::StronglySeparated(why) => SeparationVerdict::StronglySeparated(why),
        SeparationVerdict::Unknown { searched_radius } => SeparationVerdict::Unknown { searched_radius },
    }
}

impl CubeComplex for Family {
    type Vertex = Element;
    type Wall = Wall;

    fn basepoint(&self) -> Element {
        match self {
            Family::Raag(_) => Element::Word(Word::identity()),
            Family::Grid(g) => Element::Vector(g.origin()),
            Family::Product(fs) => Element::Tuple(fs.iter().map(|f| f.basepoint()).collect()),
        }
    }

    fn distance(&self, u: &Element, v: &Element) -> usize {
        match (self, u, v) {
            (Family::Raag(r), Element::Word(a), Element::Word(b)) => r.distance(a, b),
            (Family::Grid(_), Element::Vector(a), Element::Vector(b)) => Grid::distance(a, b),
            (Family::Product(fs), Element::Tuple(a), Element::Tuple(b)) => {
                fs.iter().zip(a).zip(b).map(|((f, x), y)| f.distance(x, y)).sum()
            }
            _ => mismatch(),
        }
    }

    fn median(&self, u: &Element, v: &Element, w: &Element) -> Element {
        match (self, u, v, w) {
            (Family::Raag(r), Element::Word(a), Element::Word(b), Element::Word(c)) => Element::Word(r.median(a, b, c)),
            (Family::Grid(_), Element::Vector(a), Element::Vector(b), Element::Vector(c)) => {
                Element::Vector(Grid::median(a, b, c))
            }
            (Family::Product(fs), Element::Tuple(a), Element::Tuple(b), Element::Tuple(c)) => Element::Tuple(
                fs.iter()
                    .enumerate()
                    .map(|(i, f)| f.median(&a[i], &b[i], &c[i]))
                    .collect(),
            ),
            _ => mismatch(),
        }
    }

    fn separating_walls(&self, u: &Element, v: &Element) -> Vec<HalfSpace<Wall>> {
        match (self, u, v) {
            (Family::Raag(r), Element::Word(a), Element::Word(b)) => {
                r.separating_walls(a, b).into_iter().map(raag_hs).collect()
            }
            (Family::Grid(_), Element::Vector(a), Element::Vector(b)) => {
                Grid::separating_walls(a, b).into_iter().map(grid_hs).collect()
            }
            (Family::Product(fs), Element::Tuple(a), Element::Tuple(b)) => fs
                .iter()
                .enumerate()
                .flat_map(|(i, f)| f.separating_walls(&a[i], &b[i]).into_iter().map(move |h| wrap(i, h)))
                .collect(),
            _ => mismatch(),
        }
    }

    fn dual_edge(&self, wall: &Wall) -> (Element, Element) {
        match (self, wall) {
            (Family::Raag(r), Wall::Raag(w)) => {
                let (p, q) = r.dual_edge(w);
                (Element::Word(p), Element::Word(q))
            }
            (Family::Grid(g), Wall::Grid(w)) => {
                let (p, q) = g.dual_edge(w);
                (Element::Vector(p), Element::Vector(q))
            }
            (Family::Product(fs), Wall::Factor(i, w)) => {
                let (p, q) = fs[*i].dual_edge(w);
                let base: Vec<Element> = fs.iter().map(|f| f.basepoint()).collect();
                let (mut a, mut b) = (base.clone(), base);
                a[*i] = p;
                b[*i] = q;
                (Element::Tuple(a), Element::Tuple(b))
            }
            _ => mismatch(),
        }
    }

    fn side(&self, wall: &Wall, v: &Element) -> Sign {
        match (self, wall, v) {
            (Family::Raag(r), Wall::Raag(w), Element::Word(x)) => r.side(w, &x.0),
            (Family::Grid(_), Wall::Grid(w), Element::Vector(x)) => Grid::side(w, x),
            (Family::Product(fs), Wall::Factor(i, w), Element::Tuple(x)) => fs[*i].side(w, &x[*i]),
            _ => mismatch(),
        }
    }

    fn transverse(&self, a: &Wall, b: &Wall) -> bool {
        match (self, a, b) {
            (Family::Raag(r), Wall::Raag(x), Wall::Raag(y)) => r.transverse(x, y),
            (Family::Grid(_), Wall::Grid(x), Wall::Grid(y)) => Grid::transverse(x, y),
            (Family::Product(fs), Wall::Factor(i, x), Wall::Factor(j, y)) => i != j || fs[*i].transverse(x, y),
            _ => mismatch(),
        }
    }

    fn halfspace_of_edge(&self, p: &Element, q: &Element) -> Result<HalfSpace<Wall>> {
        let not_adjacent = || Error::Usage(format!("{p:?} and {q:?} are not adjacent"));
        match (self, p, q) {
            (Family::Raag(r), Element::Word(a), Element::Word(b)) => match r.quotient(&a.0, &b.0).as_slice() {
                [x] => Ok(raag_hs(r.wall_of_step(&a.0, *x))),
                _ => Err(not_adjacent()),
            },
            (Family::Grid(_), Element::Vector(a), Element::Vector(b)) => {
                Grid::halfspace_of_edge(a, b).map(grid_hs).ok_or_else(not_adjacent)
            }
            (Family::Product(fs), Element::Tuple(a), Element::Tuple(b)) => {
                let diff: Vec<usize> = (0..fs.len()).filter(|&i| a[i] != b[i]).collect();
                match diff.as_slice() {
                    [i] => Ok(wrap(*i, fs[*i].halfspace_of_edge(&a[*i], &b[*i])?)),
                    _ => Err(not_adjacent()),
                }
            }
            _ => mismatch(),
        }
    }

    fn gate(&self, h: &HalfSpace<Wall>, v: &Element) -> Element {
        match (self, &h.wall, v) {
            (Family::Raag(r), Wall::Raag(w), Element::Word(x)) => {
                Element::Word(r.gate(&HalfSpace::new(w.clone(), h.sign), x))
            }
            (Family::Grid(_), Wall::Grid(w), Element::Vector(x)) => {
                Element::Vector(Grid::gate(&HalfSpace::new(w.clone(), h.sign), x))
            }
            (Family::Product(fs), Wall::Factor(i, w), Element::Tuple(x)) => {
                let mut out = x.clone();
                out[*i] = fs[*i].gate(&HalfSpace::new((**w).clone(), h.sign), &x[*i]);
                Element::Tuple(out)
            }
            _ => mismatch(),
        }
    }

    fn neighbors(&self, v: &Element) -> Vec<Element> {
        match (self, v) {
            (Family::Raag(r), Element::Word(x)) => r.neighbors(x).into_iter().map(Element::Word).collect(),
            (Family::Grid(_), Element::Vector(x)) => Grid::neighbors(x).into_iter().map(Element::Vector).collect(),
            (Family::Product(fs), Element::Tuple(x)) => {
                let mut out = Vec::new();
                for (i, f) in fs.iter().enumerate() {
                    for n in f.neighbors(&x[i]) {
                        let mut t = x.clone();
                        t[i] = n;
                        out.push(Element::Tuple(t));
                    }
                }
                out
            }
            _ => mismatch(),
        }
    }

    fn dimension(&self) -> usize {
        match self {
            Family::Raag(r) => r.dimension(),
            Family::Grid(g) => g.dim(),
            Family::Product(fs) => fs.iter().map(|f| f.dimension()).sum(),
        }
    }

    fn mul(&self, g: &Element, v: &Element) -> Element {
        match (self, g, v) {
            (Family::Raag(r), Element::Word(a), Element::Word(b)) => Element::Word(r.mul(a, b)),
            (Family::Grid(_), Element::Vector(a), Element::Vector(b)) => {
                Element::Vector(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Family::Product(fs), Element::Tuple(a), Element::Tuple(b)) => {
                Element::Tuple(fs.iter().enumerate().map(|(i, f)| f.mul(&a[i], &b[i])).collect())
            }
            _ => mismatch(),
        }
    }

    fn inverse(&self, g: &Element) -> Element {
        match (self, g) {
            (Family::Raag(r), Element::Word(a)) => Element::Word(r.inverse(a)),
            (Family::Grid(_), Element::Vector(a)) => Element::Vector(a.iter().map(|x| -x).collect()),
            (Family::Product(fs), Element::Tuple(a)) => {
                Element::Tuple(fs.iter().zip(a).map(|(f, x)| f.inverse(x)).collect())
            }
            _ => mismatch(),
        }
    }

    fn translate(&self, g: &Element, h: &HalfSpace<Wall>) -> HalfSpace<Wall> {
        HalfSpace::new(self.translate_wall(g, &h.wall), h.sign)
    }

    fn separation_rule(&self, a: &Wall, b: &Wall, search_radius: usize) -> SeparationVerdict<Wall> {
        match (self, a, b) {
            (Family::Raag(r), Wall::Raag(x), Wall::Raag(y)) => lift(r.separation_rule(x, y, search_radius), Wall::Raag),
            (Family::Grid(g), Wall::Grid(x), Wall::Grid(y)) => lift(g.separation_rule(x, y), Wall::Grid),
            (Family::Product(fs), Wall::Factor(i, x), Wall::Factor(_, y)) => {
                if fs.len() > 1 {
                    let j = if *i == 0 { 1 } else { 0 };
                    SeparationVerdict::NotStronglySeparated { witness: self.factor_wall(j) }
                } else {
                    lift(fs[0].separation_rule(x, y, search_radius), |w| Wall::Factor(0, Box::new(w)))
                }
            }
            _ => mismatch(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(json: &str) -> Family {
        Family::from_spec(&serde_json::from_str(json).unwrap()).unwrap()
    }

    #[test]
    fn geodesic_steps_follow_separating_walls() {
        for (json, u, v) in [
            (r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#, "b c", "a c^-1 b^2"),
            (r#"{"kind":"grid","dimension":2}"#, "[1,2]", "[-1,4]"),
            (r#"{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"grid","dimension":1}]}"#, "(a | [2])", "(b^-1 | [-1])"),
        ] {
            let f = fam(json);
            let (u, v) = (f.parse_element(u).unwrap(), f.parse_element(v).unwrap());
            let walls = f.separating_walls(&u, &v);
            let mut cur = u.clone();
            for (s, h) in f.geodesic_steps(&u, &v).iter().zip(&walls) {
                let next = f.mul(&cur, s);
                assert_eq!(&f.halfspace_of_edge(&cur, &next).unwrap(), h);
                cur = next;
            }
            assert_eq!(cur, v);
            assert_eq!(f.geodesic_steps(&u, &v).len(), walls.len());
            for h in &walls {
                let (p, q) = crate::pocset::oriented_edge(&f, h);
                let slow = f.halfspace_of_edge(&f.mul(&u, &p), &f.mul(&u, &q)).unwrap();
                assert_eq!(f.translate(&u, h), slow);
            }
        }
    }

    #[test]
    fn spec_parsing_and_errors() {
        let f = fam(r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#);
        assert_eq!(f.dimension(), 2);
        let bad: FamilySpec = serde_json::from_str(r#"{"kind":"raag","generators":["a"],"edges":[["a","z"]]}"#).unwrap();
        match Family::from_spec(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "family.edges[0]"),
            other => panic!("{other:?}"),
        }
        assert!(serde_json::from_str::<FamilySpec>(r#"{"kind":"tree","rank":2,"extra":1}"#).is_err());
        let p = fam(r#"{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"grid","dimension":2}]}"#);
        assert_eq!(p.dimension(), 3);
        assert_eq!(p.irreducible_factors().len(), 3);
    }

    #[test]
    fn element_round_trip() {
        let p = fam(r#"{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"grid","dimension":2}]}"#);
        let g = p.parse_element("(a b^-1 | [2,-3])").unwrap();
        assert_eq!(p.format_element(&g), "(a b^-1 | [2,-3])");
        assert_eq!(p.parse_element(&p.format_element(&g)).unwrap(), g);
        let grid = fam(r#"{"kind":"grid","dimension":2}"#);
        assert_eq!(grid.parse_element("a a b^-1").unwrap(), Element::Vector(vec![2, -1]));
    }

    #[test]
    fn wall_round_trip() {
        let r = fam(r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#);
        let g = r.parse_element("c a c").unwrap();
        let walls = r.separating_walls(&r.basepoint(), &g);
        for h in walls {
            let s = r.format_halfspace(&h);
            assert_eq!(r.parse_halfspace(&s).unwrap(), h, "{s}");
        }
        let grid = fam(r#"{"kind":"grid","dimension":2}"#);
        let h = grid.parse_halfspace("a@a^2+").unwrap();
        assert_eq!(h.wall, Wall::Grid(GridWall { axis: 0, offset: 3 }));
        assert_eq!(grid.format_halfspace(&h), "a@a^2+");
    }

    #[test]
    fn product_walls_cross() {
        let p = fam(r#"{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"tree","rank":2}]}"#);
        let x = p.parse_halfspace("0:a@e+").unwrap();
        let y = p.parse_halfspace("1:b@e+").unwrap();
        assert!(p.transverse(&x.wall, &y.wall));
        assert_eq!(p.reach(&x.wall), 1);
    }

    #[test]
    fn double_coset_needs_raag() {
        let grid = fam(r#"{"kind":"grid","dimension":2}"#);
        assert!(matches!(
            grid.parabolic_double_coset_member(&grid.basepoint(), &["a"], &["b"]),
            Err(Error::Usage(_))
        ));
        let r = fam(r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#);
        let g = r.parse_element("a c").unwrap();
        assert!(r.parabolic_double_coset_member(&g, &["a", "b"], &["c"]).unwrap());
    }
}
