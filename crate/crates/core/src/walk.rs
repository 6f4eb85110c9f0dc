//! Seeded random walks `Z_n = g_1 ⋯ g_n` driven by a finitely supported measure.
//!
//! The generator is ChaCha8 from `rand_chacha` 0.9, seeded with
//! `seed_from_u64`; increments are drawn by an integer draw over the common
//! denominator of the exact rational weights, so a `(measure, n, seed)`
//! triple determines the trajectory on every platform.

use std::collections::HashSet;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::word::Letter;
use crate::families::{grid::GridWall, raag::RaagWall, Element, Family, Wall};
use crate::pocset::{CubeComplex, HalfSpace, Sign};

/// Name and version of the pseudo-random generator, recorded in reports.
pub const PRNG: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

pub type Weight = Ratio<u64>;

/// Parses `"1/4"`, `"3"` or `"0.25"`-free rational notation.
pub fn parse_weight(text: &str) -> std::result::Result<Weight, String> {
    text.trim()
        .parse::<Weight>()
        .map_err(|_| format!("`{text}` is not a rational weight like `1/4`"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub weight: Weight,
}

/// A finitely supported probability measure with exact rational weights.
#[derive(Clone, Debug)]
pub struct MeasureSpec {
    atoms: Vec<Atom>,
    /// Cumulative numerators over `denominator`.
    thresholds: Vec<u64>,
    denominator: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl MeasureSpec {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let field = "measure.atoms";
        if atoms.is_empty() {
            return Err(Error::config(field, "a measure needs at least one atom"));
        }
        if let Some(a) = atoms.iter().find(|a| *a.weight.numer() == 0) {
            return Err(Error::config(field, format!("atom {:?} has zero weight", a.element)));
        }
        let total = atoms.iter().fold(Weight::from_integer(0), |s, a| s + a.weight);
        if total != Weight::from_integer(1) {
            return Err(Error::config(field, format!("weights sum to {total}, not 1")));
        }
        let mut denominator = 1u64;
        for a in &atoms {
            let d = *a.weight.denom();
            denominator = (denominator / gcd(denominator, d))
                .checked_mul(d)
                .ok_or_else(|| Error::config(field, "common denominator overflows 64 bits"))?;
        }
        let mut acc = 0;
        let thresholds = atoms
            .iter()
            .map(|a| {
                acc += a.weight.numer() * (denominator / a.weight.denom());
                acc
            })
            .collect();
        Ok(MeasureSpec {
            atoms,
            thresholds,
            denominator,
        })
    }

    /// Equal weight on each generator and its inverse.
    pub fn uniform(family: &Family) -> Self {
        let gens = family.generators();
        let w = Weight::new(1, gens.len() as u64);
        Self::new(gens.into_iter().map(|element| Atom { element, weight: w }).collect())
            .expect("uniform weights sum to one")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The measure `g ↦ μ(g^-1)`.
    pub fn inverse(&self, family: &Family) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                element: family.inverse(&a.element),
                weight: a.weight,
            })
            .collect();
        Self::new(atoms).expect("same weights")
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let x = rng.random_range(0..self.denominator);
        self.thresholds.partition_point(|&t| t <= x)
    }

    /// Desk-scale admissibility: products of atoms reach every vertex of the
    /// ball of `radius` (intermediate products stay in a slightly larger ball).
    pub fn covers_ball(&self, family: &Family, radius: usize) -> bool {
        let o = family.basepoint();
        let longest = self.atoms.iter().map(|a| family.distance(&o, &a.element)).max().unwrap_or(0);
        let bound = radius + 2 * longest + 2;
        let mut seen = HashSet::new();
        let mut frontier = vec![o.clone()];
        seen.insert(o.clone());
        let mut reached = HashSet::new();
        while let Some(g) = frontier.pop() {
            for a in &self.atoms {
                let h = family.mul(&g, &a.element);
                let d = family.distance(&o, &h);
                if d <= radius {
                    reached.insert(h.clone());
                }
                if d <= bound && seen.insert(h.clone()) {
                    frontier.push(h);
                }
            }
        }
        crate::pocset::ball(family, &o, radius).iter().all(|v| reached.contains(v))
    }
}

/// Position of a walk, kept in a form that is cheap to extend by one increment.
#[derive(Clone, Debug)]
pub enum Cursor {
    /// Reduced but not canonical word.
    Word(Vec<Letter>),
    Vector(Vec<i64>),
    Tuple(Vec<Cursor>),
}

impl Cursor {
    pub fn origin(family: &Family) -> Self {
        match family {
            Family::Raag(_) => Cursor::Word(Vec::new()),
            Family::Grid(g) => Cursor::Vector(g.origin()),
            Family::Product(fs) => Cursor::Tuple(fs.iter().map(Cursor::origin).collect()),
        }
    }

    pub fn apply(&mut self, family: &Family, g: &Element) {
        match (self, family, g) {
            (Cursor::Word(w), Family::Raag(r), Element::Word(x)) => {
                for &l in x.letters() {
                    r.push(w, l);
                }
            }
            (Cursor::Vector(v), _, Element::Vector(x)) => {
                for (a, b) in v.iter_mut().zip(x) {
                    *a += b;
                }
            }
            (Cursor::Tuple(cs), Family::Product(fs), Element::Tuple(xs)) => {
                for ((c, f), x) in cs.iter_mut().zip(fs).zip(xs) {
                    c.apply(f, x);
                }
            }
            _ => panic!("increment does not belong to this family"),
        }
    }

    /// Like [`Cursor::apply`], reporting every half-space entered whose wall
    /// can have reach at most `limit + 1`; walls farther out are skipped cheaply.
    pub fn apply_tracking(
        &mut self,
        family: &Family,
        g: &Element,
        limit: usize,
        report: &mut dyn FnMut(HalfSpace<Wall>),
    ) {
        match (self, family, g) {
            (Cursor::Word(w), Family::Raag(r), Element::Word(x)) => {
                for &l in x.letters() {
                    if !l.inv {
                        let near = w.len() - r.suffix_strip_len(w, r.link_mask(l.gen)) <= limit;
                        if near {
                            let coset = r.coset_rep(w, l.gen);
                            report(HalfSpace::new(Wall::Raag(RaagWall { label: l.gen, coset }), Sign::Plus));
                        }
                        r.push(w, l);
                    } else {
                        r.push(w, l);
                        if w.len() - r.suffix_strip_len(w, r.link_mask(l.gen)) <= limit {
                            let coset = r.coset_rep(w, l.gen);
                            report(HalfSpace::new(Wall::Raag(RaagWall { label: l.gen, coset }), Sign::Minus));
                        }
                    }
                }
            }
            (Cursor::Vector(v), _, Element::Vector(x)) => {
                for (axis, (a, &b)) in v.iter_mut().zip(x).enumerate() {
                    for _ in 0..b.unsigned_abs() {
                        let (offset, sign) = if b > 0 { (*a + 1, Sign::Plus) } else { (*a, Sign::Minus) };
                        if offset.unsigned_abs() as usize <= limit + 1 {
                            report(HalfSpace::new(Wall::Grid(GridWall { axis, offset }), sign));
                        }
                        *a += b.signum();
                    }
                }
            }
            (Cursor::Tuple(cs), Family::Product(fs), Element::Tuple(xs)) => {
                for (i, ((c, f), x)) in cs.iter_mut().zip(fs).zip(xs).enumerate() {
                    c.apply_tracking(f, x, limit, &mut |h| {
                        report(HalfSpace::new(Wall::Factor(i, Box::new(h.wall)), h.sign))
                    });
                }
            }
            _ => panic!("increment does not belong to this family"),
        }
    }

    /// Distance from the basepoint.
    pub fn len(&self) -> usize {
        match self {
            Cursor::Word(w) => w.len(),
            Cursor::Vector(v) => v.iter().map(|x| x.unsigned_abs() as usize).sum(),
            Cursor::Tuple(cs) => cs.iter().map(Cursor::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distance from the basepoint in each top-level factor.
    pub fn factor_lengths(&self) -> Vec<usize> {
        match self {
            Cursor::Tuple(cs) => cs.iter().map(Cursor::len).collect(),
            other => vec![other.len()],
        }
    }

    /// Canonical form of the current position.
    pub fn element(&self, family: &Family) -> Element {
        match (self, family) {
            (Cursor::Word(w), Family::Raag(r)) => Element::Word(r.canonical(w.clone())),
            (Cursor::Vector(v), _) => Element::Vector(v.clone()),
            (Cursor::Tuple(cs), Family::Product(fs)) => {
                Element::Tuple(cs.iter().zip(fs).map(|(c, f)| c.element(f)).collect())
            }
            _ => panic!("cursor does not belong to this family"),
        }
    }
}

/// One sampled walk. Positions are not stored; [`Trajectory::replay`]
/// regenerates them from the increments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    /// Atom index of each increment `g_1, …, g_n`.
    pub increments: Vec<u32>,
    /// `d(Z_k o, o)` for `k = 1..=n`.
    pub distances: Vec<u32>,
    /// `d(Z_n o, o)` in each top-level factor.
    pub factor_distances: Vec<usize>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn terminal_distance(&self) -> usize {
        self.distances.last().copied().unwrap_or(0) as usize
    }

    /// Calls `visit(k, cursor)` for `k = 1..=n` with the cursor at `Z_k o`.
    pub fn replay(&self, family: &Family, measure: &MeasureSpec, mut visit: impl FnMut(usize, &Cursor)) {
        let mut c = Cursor::origin(family);
        for (k, &i) in self.increments.iter().enumerate() {
            c.apply(family, &measure.atoms[i as usize].element);
            visit(k + 1, &c);
        }
    }

    /// Canonical positions `Z_1 o, …, Z_n o`.
    pub fn positions(&self, family: &Family, measure: &MeasureSpec) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.steps());
        self.replay(family, measure, |_, c| out.push(c.element(family)));
        out
    }

    pub fn terminal(&self, family: &Family, measure: &MeasureSpec) -> Element {
        let mut c = Cursor::origin(family);
        for &i in &self.increments {
            c.apply(family, &measure.atoms[i as usize].element);
        }
        c.element(family)
    }
}

/// Seed of trial `t`: the splitmix64 finalizer of `base + t·φ`, a bijection
/// of 64-bit integers, so distinct trials never share a seed.
pub fn trial_seed(base: u64, t: u64) -> u64 {
    let mut z = base.wrapping_add(t.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn sample(family: &Family, measure: &MeasureSpec, n: usize, seed: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::Precondition("a walk needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cursor = Cursor::origin(family);
    let mut increments = Vec::with_capacity(n);
    let mut distances = Vec::with_capacity(n);
    for _ in 0..n {
        let i = measure.draw(&mut rng);
        cursor.apply(family, &measure.atoms[i].element);
        increments.push(i as u32);
        distances.push(cursor.len() as u32);
    }
    Ok(Trajectory {
        seed,
        increments,
        distances,
        factor_distances: cursor.factor_lengths(),
    })
}

/// Trials `0..trials`, sampled in parallel, returned in trial order.
pub fn batch(family: &Family, measure: &MeasureSpec, n: usize, trials: usize, base_seed: u64) -> Result<Vec<Trajectory>> {
    batch_range(family, measure, n, 0..trials as u64, base_seed)
}

pub fn batch_range(
    family: &Family,
    measure: &MeasureSpec,
    n: usize,
    range: std::ops::Range<u64>,
    base_seed: u64,
) -> Result<Vec<Trajectory>> {
    range
        .into_par_iter()
        .map(|t| sample(family, measure, n, trial_seed(base_seed, t)))
        .collect()
}

/// A finite-index normal subgroup, given as the kernel of a map to `Z/m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Subgroup {
    Whole,
    /// Elements of even word length.
    EvenLength,
    /// Exponent sum in `generator` divisible by `modulus`.
    ExponentSum { generator: usize, modulus: u64 },
}

impl Subgroup {
    fn modulus(&self) -> u64 {
        match self {
            Subgroup::Whole => 1,
            Subgroup::EvenLength => 2,
            Subgroup::ExponentSum { modulus, .. } => *modulus,
        }
    }

    /// Image of `g` in `Z/m`.
    fn image(&self, family: &Family, g: &Element) -> Result<u64> {
        let m = self.modulus() as i64;
        let v: i64 = match self {
            Subgroup::Whole => 0,
            Subgroup::EvenLength => family.distance(&family.basepoint(), g) as i64,
            Subgroup::ExponentSum { generator, .. } => match g {
                Element::Word(w) => w
                    .letters()
                    .iter()
                    .filter(|l| l.gen as usize == *generator)
                    .map(|l| if l.inv { -1 } else { 1 })
                    .sum(),
                Element::Vector(v) => *v
                    .get(*generator)
                    .ok_or_else(|| Error::Usage(format!("no generator {generator}")))?,
                Element::Tuple(_) => {
                    return Err(Error::Usage("exponent sums are not defined on products".into()));
                }
            },
        };
        Ok(v.rem_euclid(m) as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnTimes {
    /// Indices `k` with `Z_k ∈ Γ_0`, increasing.
    pub phi: Vec<usize>,
    /// `φ(m)/m` at the last visit `m`; withheld if there were no visits.
    pub c_hat: Option<f64>,
    /// `1/π(eΓ_0)` for the induced walk on `Γ/Γ_0`.
    pub predicted: f64,
    pub never_returned: bool,
}

pub fn return_times(family: &Family, measure: &MeasureSpec, traj: &Trajectory, subgroup: &Subgroup) -> Result<ReturnTimes> {
    let m = subgroup.modulus();
    let images: Vec<u64> = measure
        .atoms()
        .iter()
        .map(|a| subgroup.image(family, &a.element))
        .collect::<Result<_>>()?;
    // The induced walk on Z/m is uniform on the subgroup its steps generate.
    let generated = images.iter().fold(m, |g, &x| gcd(g, x));
    let predicted = (m / generated) as f64;
    let mut phi = Vec::new();
    let mut state = 0u64;
    for (k, &i) in traj.increments.iter().enumerate() {
        state = (state + images[i as usize]) % m;
        if state == 0 {
            phi.push(k + 1);
        }
    }
    let c_hat = phi.last().map(|&last| last as f64 / phi.len() as f64);
    Ok(ReturnTimes {
        never_returned: phi.is_empty(),
        phi,
        c_hat,
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;

    fn f2() -> Family {
        Family::from_spec(&FamilySpec::Tree { rank: 2 }).unwrap()
    }

    fn dirac(family: &Family, word: &str) -> MeasureSpec {
        MeasureSpec::new(vec![Atom {
            element: family.parse_element(word).unwrap(),
            weight: Weight::from_integer(1),
        }])
        .unwrap()
    }

    #[test]
    fn dirac_walk_marches() {
        let f = f2();
        let m = dirac(&f, "a");
        let t = sample(&f, &m, 5, 1).unwrap();
        let pos: Vec<String> = t.positions(&f, &m).iter().map(|p| f.format_element(p)).collect();
        assert_eq!(pos, ["a", "a a", "a a a", "a a a a", "a a a a a"]);
        assert_eq!(t.distances, [1, 2, 3, 4, 5]);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let f = f2();
        let a = f.parse_element("a").unwrap();
        let err = MeasureSpec::new(vec![Atom { element: a, weight: Weight::new(1, 3) }]).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert_eq!(parse_weight("1/4").unwrap(), Weight::new(1, 4));
        assert!(parse_weight("x").is_err());
    }

    #[test]
    fn admissibility() {
        let f = f2();
        assert!(MeasureSpec::uniform(&f).covers_ball(&f, 2));
        assert!(!dirac(&f, "a").covers_ball(&f, 2));
    }

    #[test]
    fn seeds_are_reproducible_and_distinct() {
        let f = f2();
        let m = MeasureSpec::uniform(&f);
        assert_eq!(sample(&f, &m, 50, 9).unwrap(), sample(&f, &m, 50, 9).unwrap());
        let one = batch(&f, &m, 50, 1, 9).unwrap();
        assert_eq!(one[0], sample(&f, &m, 50, trial_seed(9, 0)).unwrap());
    }

    #[test]
    fn return_times_builtins() {
        let f = f2();
        let m = MeasureSpec::uniform(&f);
        let t = sample(&f, &m, 100, 3).unwrap();
        let even = return_times(&f, &m, &t, &Subgroup::EvenLength).unwrap();
        assert_eq!(even.phi, (1..=50).map(|j| 2 * j).collect::<Vec<_>>());
        assert_eq!(even.c_hat, Some(2.0));
        assert_eq!(even.predicted, 2.0);
        let all = return_times(&f, &m, &t, &Subgroup::Whole).unwrap();
        assert_eq!(all.c_hat, Some(1.0));
        let never = return_times(&f, &dirac(&f, "a"), &sample(&f, &dirac(&f, "a"), 10, 0).unwrap(), &Subgroup::ExponentSum { generator: 0, modulus: 11 }).unwrap();
        assert!(never.never_returned && never.c_hat.is_none());
    }

    #[test]
    fn tracking_reports_each_crossing() {
        let f = Family::from_spec(&FamilySpec::Raag {
            generators: vec!["a".into(), "b".into(), "c".into()],
            edges: vec![["a".into(), "b".into()]],
        })
        .unwrap();
        let mut c = Cursor::origin(&f);
        let mut seen = Vec::new();
        for w in ["a", "b", "a^-1", "c", "c^-1"] {
            let before = c.element(&f);
            let g = f.parse_element(w).unwrap();
            c.apply_tracking(&f, &g, 10, &mut |h| seen.push(h));
            let after = c.element(&f);
            let expected = f.halfspace_of_edge(&before, &after).unwrap();
            assert_eq!(seen.last(), Some(&expected), "step {w}");
        }
    }
}
