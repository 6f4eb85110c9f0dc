//! Dynamics of single elements: translation length, contracting and regular
//! certificates, flips, double skewering, and counts along trajectories.

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{skewer_flip_classify, SkewerVerdict};
use crate::error::{Error, Result};
use crate::families::{Element, Family, Wall};
use crate::pocset::{
    act_halfspace, ball, strongly_separated, wall_relation, CubeComplex, HalfSpace, SeparationVerdict,
    WallRelation,
};
use crate::walk::{MeasureSpec, Trajectory};

/// Default bound on the power `m` in the contracting search.
pub const DEFAULT_SEARCH_RADIUS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Kind {
    Elliptic,
    HyperbolicFlat,
    Contracting,
    Regular,
    Unknown,
}

/// `g^power·outer ⊊ inner ⊊ outer` with `inner`, `outer` strongly separated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewerCertificate {
    pub outer: HalfSpace<Wall>,
    pub inner: HalfSpace<Wall>,
    pub power: u64,
}

impl SkewerCertificate {
    pub fn verify(&self, family: &Family, g: &Element) -> bool {
        if self.power == 0 || wall_relation(family, &self.inner, &self.outer) != WallRelation::HsubK {
            return false;
        }
        let pushed = act_halfspace(family, &family.pow(g, self.power), &self.outer);
        wall_relation(family, &pushed, &self.inner) == WallRelation::HsubK
            && matches!(strongly_separated(family, &self.inner, &self.outer), Ok(v) if v.is_separated())
    }
}

/// A wall crossing both members of a candidate pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatWitness {
    pub outer: HalfSpace<Wall>,
    pub inner: HalfSpace<Wall>,
    pub witness: Wall,
}

impl FlatWitness {
    pub fn verify(&self, family: &Family) -> bool {
        family.transverse(&self.witness, &self.outer.wall) && family.transverse(&self.witness, &self.inner.wall)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    None,
    Contracting(SkewerCertificate),
    /// One verdict per irreducible factor, in [`Family::irreducible_factors`] order.
    Factors(Vec<Classification>),
    Flat(Vec<FlatWitness>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub kind: Kind,
    pub translation_length: usize,
    pub certificate: Certificate,
}

impl Classification {
    /// For a failed regularity test, the first irreducible factor that is not contracting.
    pub fn failing_factor(&self) -> Option<usize> {
        match &self.certificate {
            Certificate::Factors(fs) if self.kind != Kind::Regular => {
                fs.iter().position(|c| c.kind != Kind::Contracting)
            }
            _ => None,
        }
    }

    /// Re-derives every certificate from scratch.
    pub fn verify(&self, family: &Family, g: &Element) -> bool {
        let tl = translation_length(family, g);
        if tl != self.translation_length {
            return false;
        }
        match (&self.kind, &self.certificate) {
            (Kind::Elliptic, _) => tl == 0,
            (Kind::Contracting, Certificate::Contracting(c)) => tl > 0 && c.verify(family, g),
            (Kind::HyperbolicFlat, Certificate::Flat(ws)) => tl > 0 && ws.iter().all(|w| w.verify(family)),
            (Kind::Regular, Certificate::Factors(fs)) => {
                let parts = family.irreducible_factors();
                let gs = family.project(g);
                fs.len() == parts.len()
                    && fs
                        .iter()
                        .zip(parts.iter().zip(&gs))
                        .all(|(c, (f, x))| c.kind == Kind::Contracting && c.verify(f, x))
            }
            (Kind::Unknown, _) => true,
            (_, Certificate::Factors(fs)) => {
                let parts = family.irreducible_factors();
                let gs = family.project(g);
                fs.iter().zip(parts.iter().zip(&gs)).all(|(c, (f, x))| c.verify(f, x))
            }
            _ => false,
        }
    }
}

/// Minimal displacement `min_v d(v, g v)` over vertices.
pub fn translation_length(family: &Family, g: &Element) -> usize {
    match (family, g) {
        (Family::Raag(r), Element::Word(w)) => r.translation_length(&w.0),
        (Family::Grid(_), Element::Vector(v)) => v.iter().map(|x| x.unsigned_abs() as usize).sum(),
        (Family::Product(fs), Element::Tuple(t)) => fs.iter().zip(t).map(|(f, x)| translation_length(f, x)).sum(),
        _ => panic!("element does not belong to this family"),
    }
}

/// `d(g^65 o, o) − d(g^64 o, o)`, which equals the translation length for
/// every element of the supported families.
pub fn displacement_growth(family: &Family, g: &Element) -> usize {
    let o = family.basepoint();
    let a = family.pow(g, 64);
    let b = family.mul(&a, g);
    family.distance(&o, &b) - family.distance(&o, &a)
}

/// Walls crossed by one period `[v, g·v]` of an axis of `g`, in crossing
/// order and oriented towards `g·v`. Produced lazily: for long words the
/// first few usually settle the classification.
fn axis_walls<'a>(family: &'a Family, g: &Element) -> Box<dyn Iterator<Item = HalfSpace<Wall>> + 'a> {
    match (family, g) {
        (Family::Raag(r), Element::Word(w)) => {
            let (conj, core) = r.cyclic_reduce(&w.0);
            let path = r.canonical(core).0;
            let mut cur = r.canonical(conj).0;
            Box::new(path.into_iter().map(move |x| {
                let h = r.wall_of_step(&cur, x);
                r.push(&mut cur, x);
                HalfSpace::new(Wall::Raag(h.wall), h.sign)
            }))
        }
        _ => {
            let o = family.basepoint();
            Box::new(family.separating_walls(&o, &family.mul(g, &o)).into_iter())
        }
    }
}

fn power_ramp(search_radius: usize) -> Vec<u64> {
    let mut out = vec![1];
    while (*out.last().unwrap() as usize) * 2 <= search_radius {
        out.push(out.last().unwrap() * 2);
    }
    out
}

/// Contracting test for an irreducible family via double skewering of a
/// strongly separated pair of walls crossed by an axis.
pub fn is_contracting(family: &Family, g: &Element, search_radius: usize) -> Result<Classification> {
    if !family.is_irreducible() {
        return Err(Error::Usage(
            "contracting elements are defined for irreducible complexes; use the regular test on products".into(),
        ));
    }
    let tl = translation_length(family, g);
    if tl == 0 {
        return Ok(Classification {
            kind: Kind::Elliptic,
            translation_length: 0,
            certificate: Certificate::None,
        });
    }
    let mut fresh = axis_walls(family, g);
    let mut walls: Vec<HalfSpace<Wall>> = Vec::new();
    let ramp = power_ramp(search_radius.max(1));
    let found = |outer: &HalfSpace<Wall>, m: u64| Classification {
        kind: Kind::Contracting,
        translation_length: tl,
        certificate: Certificate::Contracting(SkewerCertificate {
            inner: act_halfspace(family, &family.pow(g, m), outer),
            outer: outer.clone(),
            power: 2 * m,
        }),
    };

    // Closed-form verdicts first: they are cheap and usually decide the question.
    let mut pending = Vec::new();
    let mut witnesses = Vec::new();
    for &m in &ramp {
        let gm = &family.pow(g, m);
        for i in 0.. {
            if i == walls.len() {
                match fresh.next() {
                    Some(k) => walls.push(k),
                    None => break,
                }
            }
            let k = &walls[i];
            let inner = act_halfspace(family, gm, k);
            if wall_relation(family, &inner, k) != WallRelation::HsubK {
                pending.push((m, i, inner, false));
                continue;
            }
            match family.separation_rule(&k.wall, &inner.wall, 0) {
                SeparationVerdict::StronglySeparated(_) => return Ok(found(k, m)),
                SeparationVerdict::NotStronglySeparated { witness } => witnesses.push(FlatWitness {
                    outer: k.clone(),
                    inner,
                    witness,
                }),
                SeparationVerdict::Unknown { .. } => pending.push((m, i, inner, true)),
            }
        }
    }
    let mut open = false;
    for (m, i, inner, nested) in pending {
        let k = &walls[i];
        if !nested {
            open = true;
            continue;
        }
        match strongly_separated(family, &inner, k)? {
            SeparationVerdict::StronglySeparated(_) => return Ok(found(k, m)),
            SeparationVerdict::NotStronglySeparated { witness } => witnesses.push(FlatWitness {
                outer: k.clone(),
                inner,
                witness,
            }),
            SeparationVerdict::Unknown { .. } => open = true,
        }
    }
    Ok(if open {
        Classification {
            kind: Kind::Unknown,
            translation_length: tl,
            certificate: Certificate::None,
        }
    } else {
        Classification {
            kind: Kind::HyperbolicFlat,
            translation_length: tl,
            certificate: Certificate::Flat(witnesses),
        }
    })
}

/// Regular iff every irreducible factor sees a contracting projection.
pub fn is_regular(family: &Family, g: &Element, search_radius: usize) -> Result<Classification> {
    let verdicts = family
        .irreducible_factors()
        .iter()
        .zip(family.project(g))
        .map(|(f, x)| is_contracting(f, &x, search_radius))
        .collect::<Result<Vec<_>>>()?;
    let regular = verdicts.iter().all(|c| c.kind == Kind::Contracting);
    let unknown = verdicts.iter().any(|c| c.kind == Kind::Unknown);
    Ok(Classification {
        kind: if regular {
            Kind::Regular
        } else if unknown {
            Kind::Unknown
        } else {
            verdicts.iter().find(|c| c.kind != Kind::Contracting).map(|c| c.kind).unwrap()
        },
        translation_length: translation_length(family, g),
        certificate: Certificate::Factors(verdicts),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search {
    Found(Element),
    /// Nothing within the searched radius; inconclusive.
    NotFound { radius: usize },
}

/// Breadth-first search for `g` with `h* ⊂ g·h`.
pub fn flip_search(family: &Family, h: &HalfSpace<Wall>, radius: usize) -> Search {
    let hc = h.complement();
    ball(family, &family.basepoint(), radius)
        .into_iter()
        .find(|g| wall_relation(family, &hc, &act_halfspace(family, g, h)) == WallRelation::HsubK)
        .map_or(Search::NotFound { radius }, Search::Found)
}

/// Breadth-first search for `g` with `g·k ⊊ h` for nested `h ⊂ k`.
pub fn double_skewer_search(
    family: &Family,
    h: &HalfSpace<Wall>,
    k: &HalfSpace<Wall>,
    radius: usize,
) -> Result<Search> {
    let rel = wall_relation(family, h, k);
    if rel != WallRelation::HsubK {
        return Err(Error::Precondition(format!("double skewering needs h ⊂ k, got {rel:?}")));
    }
    Ok(ball(family, &family.basepoint(), radius)
        .into_iter()
        .find(|g| wall_relation(family, &act_halfspace(family, g, k), h) == WallRelation::HsubK)
        .map_or(Search::NotFound { radius }, Search::Found))
}

/// The property counted by [`frequency_scan`].
#[derive(Clone, Debug)]
pub enum Classifier {
    Contracting { search_radius: usize },
    Regular { search_radius: usize },
    /// Skewering of the chain `s2 ⊂ s1 ⊂ s`.
    Skewering {
        s: HalfSpace<Wall>,
        s1: HalfSpace<Wall>,
        s2: HalfSpace<Wall>,
    },
}

impl Classifier {
    /// Unknown verdicts count as failures.
    pub fn holds(&self, family: &Family, g: &Element) -> Result<bool> {
        Ok(match self {
            Classifier::Contracting { search_radius } => {
                is_contracting(family, g, *search_radius)?.kind == Kind::Contracting
            }
            Classifier::Regular { search_radius } => is_regular(family, g, *search_radius)?.kind == Kind::Regular,
            Classifier::Skewering { s, s1, s2 } => {
                skewer_flip_classify(family, g, s, s1, s2)? == SkewerVerdict::Skewering
            }
        })
    }
}

/// Hits `c_k` (whether `Z_k` satisfies the classifier) and the running
/// fraction `f(n) = (c_1 + … + c_n)/n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyScan {
    pub hits: Vec<bool>,
    pub fractions: Vec<f64>,
}

impl FrequencyScan {
    pub fn final_fraction(&self) -> f64 {
        self.fractions.last().copied().unwrap_or(0.0)
    }

    /// Least-squares slope of `f(n)` against `n` over `n ∈ [from, len]`.
    pub fn slope_from(&self, from: usize) -> f64 {
        let pts: Vec<(f64, f64)> = (from.max(1)..=self.fractions.len())
            .map(|n| (n as f64, self.fractions[n - 1]))
            .collect();
        let len = pts.len() as f64;
        if len < 2.0 {
            return 0.0;
        }
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }
}

pub fn frequency_scan(
    family: &Family,
    measure: &MeasureSpec,
    traj: &Trajectory,
    classifier: &Classifier,
) -> Result<FrequencyScan> {
    let positions = traj.positions(family, measure);
    let hits = positions
        .par_iter()
        .map(|g| classifier.holds(family, g))
        .collect::<Result<Vec<bool>>>()?;
    let mut count = 0usize;
    let fractions = hits
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            count += h as usize;
            count as f64 / (i + 1) as f64
        })
        .collect();
    Ok(FrequencyScan { hits, fractions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;

    fn fam(json: &str) -> Family {
        Family::from_spec(&serde_json::from_str(json).unwrap()).unwrap()
    }

    fn f2() -> Family {
        Family::from_spec(&FamilySpec::Tree { rank: 2 }).unwrap()
    }

    fn z2z() -> Family {
        fam(r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#)
    }

    fn el(f: &Family, s: &str) -> Element {
        f.parse_element(s).unwrap()
    }

    #[test]
    fn translation_lengths() {
        let f = f2();
        assert_eq!(translation_length(&f, &el(&f, "e")), 0);
        assert_eq!(translation_length(&f, &el(&f, "a b a^-1")), 1);
        let z = z2z();
        let ab = el(&z, "a b");
        assert_eq!(translation_length(&z, &ab), 2);
        assert_eq!(displacement_growth(&z, &ab), 2);
        let o = z.basepoint();
        assert_eq!(z.distance(&o, &z.pow(&ab, 64)), 128);
    }

    #[test]
    fn contracting_examples() {
        let f = f2();
        for w in ["a", "a b", "b a^-1 b^-1 a^2", "a b a^-1"] {
            let g = el(&f, w);
            let c = is_contracting(&f, &g, DEFAULT_SEARCH_RADIUS).unwrap();
            assert_eq!(c.kind, Kind::Contracting, "{w}");
            assert!(c.verify(&f, &g));
        }
        let z = z2z();
        let flat = is_contracting(&z, &el(&z, "a b"), DEFAULT_SEARCH_RADIUS).unwrap();
        assert_eq!(flat.kind, Kind::HyperbolicFlat);
        assert!(flat.verify(&z, &el(&z, "a b")));
        let ca = el(&z, "c a");
        let c = is_contracting(&z, &ca, DEFAULT_SEARCH_RADIUS).unwrap();
        assert_eq!(c.kind, Kind::Contracting);
        assert!(c.verify(&z, &ca));
        let conj = el(&z, "b c a b^-1");
        let e = is_contracting(&z, &conj, 1).unwrap();
        assert_eq!(e.kind, Kind::Contracting);
        assert!(e.verify(&z, &conj));
        assert_eq!(is_contracting(&z, &el(&z, "c a c^-1"), 1).unwrap().kind, Kind::HyperbolicFlat);
        assert_eq!(is_contracting(&z, &el(&z, "e"), 1).unwrap().kind, Kind::Elliptic);
    }

    #[test]
    fn reducible_families_are_redirected() {
        let p = fam(r#"{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"tree","rank":2}]}"#);
        let g = el(&p, "(a | b)");
        assert!(matches!(is_contracting(&p, &g, 2), Err(Error::Usage(_))));
        let r = is_regular(&p, &g, 2).unwrap();
        assert_eq!(r.kind, Kind::Regular);
        assert!(r.verify(&p, &g));
        let half = el(&p, "(a | e)");
        let r = is_regular(&p, &half, 2).unwrap();
        assert_eq!(r.kind, Kind::Elliptic);
        assert_eq!(r.failing_factor(), Some(1));
        let f = f2();
        let g = el(&f, "a b");
        assert_eq!(is_regular(&f, &g, 2).unwrap().kind, Kind::Regular);
        let grid = fam(r#"{"kind":"grid","dimension":2}"#);
        assert_eq!(is_regular(&grid, &el(&grid, "[1,-2]"), 2).unwrap().kind, Kind::Regular);
        assert_eq!(is_regular(&grid, &el(&grid, "[1,0]"), 2).unwrap().kind, Kind::Elliptic);
    }

    #[test]
    fn flips() {
        let f = f2();
        let h = f.parse_halfspace("a@e+").unwrap();
        let Search::Found(g) = flip_search(&f, &h, 3) else { panic!("no flip") };
        assert_eq!(wall_relation(&f, &h.complement(), &act_halfspace(&f, &g, &h)), WallRelation::HsubK);
        let line = fam(r#"{"kind":"grid","dimension":1}"#);
        let x1 = line.parse_halfspace("a@e+").unwrap();
        assert_eq!(flip_search(&line, &x1, 5), Search::NotFound { radius: 5 });
    }

    #[test]
    fn double_skewering() {
        let f = f2();
        let k = f.parse_halfspace("a@e+").unwrap();
        let h = f.parse_halfspace("a@a+").unwrap();
        assert_eq!(double_skewer_search(&f, &h, &k, 3).unwrap(), Search::Found(el(&f, "a a")));
        assert!(matches!(double_skewer_search(&f, &k, &h, 3), Err(Error::Precondition(_))));

        let z = z2z();
        let k = z.parse_halfspace("c@e+").unwrap();
        let h = z.parse_halfspace("c@c a+").unwrap();
        let Search::Found(g) = double_skewer_search(&z, &h, &k, 6).unwrap() else { panic!("none") };
        assert_eq!(wall_relation(&z, &act_halfspace(&z, &g, &k), &h), WallRelation::HsubK);

        let grid = fam(r#"{"kind":"grid","dimension":2}"#);
        let k = grid.parse_halfspace("a@e+").unwrap();
        let h = grid.parse_halfspace("a@a^2+").unwrap();
        assert_eq!(double_skewer_search(&grid, &h, &k, 3).unwrap(), Search::Found(el(&grid, "[3,0]")));
    }
}
