//! Asymptotics of trajectories: side stabilization, horofunctions, drift,
//! hitting frequencies of half-spaces, skewering and squeezing.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::families::{Element, Family, Wall};
use crate::pocset::{
    act_halfspace, bridge, contains, strongly_separated, super_strongly_separated, wall_relation, CubeComplex,
    HalfSpace, SuperSeparation, WallRelation,
};
use crate::walk::{Cursor, MeasureSpec, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WallHistory {
    pub wall: String,
    /// Step `k` at which the side last changed between `Z_{k-1} o` and `Z_k o`.
    pub last_flip: Option<usize>,
    pub flips: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizationReport {
    pub steps: usize,
    pub horizon: usize,
    pub walls: Vec<WallHistory>,
    /// Share of tracked walls whose last flip happens before `horizon`.
    pub stabilized_fraction: f64,
    /// Total flips over all tracked walls up to each step.
    #[serde(skip)]
    pub cumulative_flips: Vec<usize>,
}

/// Exact flip bookkeeping for `tracked` along the trajectory, with the
/// default horizon `n/2`.
pub fn track_stabilization(
    family: &Family,
    measure: &MeasureSpec,
    traj: &Trajectory,
    tracked: &[Wall],
) -> StabilizationReport {
    let index: HashMap<&Wall, usize> = tracked.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let limit = tracked.iter().map(|w| family.reach(w)).max().unwrap_or(0);
    let mut flips = vec![0usize; tracked.len()];
    let mut last = vec![None; tracked.len()];
    let mut parity = vec![false; tracked.len()];
    let mut touched = Vec::new();
    let mut cursor = Cursor::origin(family);
    let mut cumulative_flips = Vec::with_capacity(traj.steps());
    let mut total = 0;
    for (k, &i) in traj.increments.iter().enumerate() {
        cursor.apply_tracking(family, &measure.atoms()[i as usize].element, limit, &mut |h| {
            if let Some(&j) = index.get(&h.wall) {
                parity[j] = !parity[j];
                touched.push(j);
            }
        });
        for j in touched.drain(..) {
            if parity[j] {
                parity[j] = false;
                flips[j] += 1;
                total += 1;
                last[j] = Some(k + 1);
            }
        }
        cumulative_flips.push(total);
    }
    let steps = traj.steps();
    let horizon = steps / 2;
    let stable = last.iter().filter(|l| l.unwrap_or(0) < horizon.max(1)).count();
    StabilizationReport {
        steps,
        horizon,
        cumulative_flips,
        stabilized_fraction: if tracked.is_empty() { 1.0 } else { stable as f64 / tracked.len() as f64 },
        walls: tracked
            .iter()
            .zip(flips.iter().zip(&last))
            .map(|(w, (&flips, &last_flip))| WallHistory {
                wall: family.format_wall(w),
                last_flip,
                flips,
            })
            .collect(),
    }
}

/// `h(x) = d(m, x) − d(m, o)` with `m` the median of `o`, `x` and the proxy.
pub fn horofunction_eval(family: &Family, proxy: &Element, x: &Element, o: &Element) -> i64 {
    let m = family.median(o, x, proxy);
    family.distance(&m, x) as i64 - family.distance(&m, o) as i64
}

/// The three terms of the cocycle identity at one proxy depth.
fn cocycle_terms(family: &Family, g1: &Element, g2: &Element, proxy: &Element, o: &Element) -> [i64; 3] {
    let g1i = family.inverse(g1);
    let g2i = family.inverse(g2);
    let lhs_point = family.mul(&g2i, &family.mul(&g1i, o));
    let moved = family.mul(g2, proxy);
    [
        horofunction_eval(family, proxy, &lhs_point, o),
        horofunction_eval(family, &moved, &family.mul(&g1i, o), o),
        horofunction_eval(family, proxy, &family.mul(&g2i, o), o),
    ]
}

/// Checks `h_ξ(g2⁻¹g1⁻¹o) = h_{g2ξ}(g1⁻¹o) + h_ξ(g2⁻¹o)` with `ξ` represented
/// by `proxy = Z_N o`. Every term must already agree at `next = Z_{N+1} o`;
/// otherwise the proxy is too shallow and [`Error::Retry`] is returned.
pub fn cocycle_check(
    family: &Family,
    g1: &Element,
    g2: &Element,
    proxy: &Element,
    next: &Element,
    o: &Element,
) -> Result<bool> {
    let now = cocycle_terms(family, g1, g2, proxy, o);
    if now != cocycle_terms(family, g1, g2, next, o) {
        return Err(Error::Retry("horofunction values move between N and N+1; use a deeper proxy".into()));
    }
    Ok(now[0] == now[1] + now[2])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftEstimate {
    pub lambda_hat: f64,
    pub std_error: f64,
    pub confidence: f64,
    pub ci: (f64, f64),
    /// Drift in each top-level factor; these sum to `lambda_hat`.
    pub per_factor: Vec<f64>,
    pub trials: usize,
    pub steps: usize,
}

pub fn drift(trajectories: &[Trajectory], confidence: f64) -> Result<DriftEstimate> {
    if trajectories.len() < 2 {
        return Err(Error::Precondition("a drift interval needs at least two trials".into()));
    }
    if !(0.0 < confidence && confidence < 1.0) {
        return Err(Error::config("confidence", "must lie strictly between 0 and 1"));
    }
    let steps = trajectories[0].steps();
    if trajectories.iter().any(|t| t.steps() != steps) {
        return Err(Error::Precondition("trials have different lengths".into()));
    }
    let t = trajectories.len() as f64;
    let rates: Vec<f64> = trajectories.iter().map(|x| x.terminal_distance() as f64 / steps as f64).collect();
    let mean = rates.iter().sum::<f64>() / t;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let std_error = (var / t).sqrt();
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 + confidence / 2.0);
    let factors = trajectories[0].factor_distances.len();
    let per_factor = (0..factors)
        .map(|i| trajectories.iter().map(|x| x.factor_distances[i] as f64 / steps as f64).sum::<f64>() / t)
        .collect();
    Ok(DriftEstimate {
        lambda_hat: mean,
        std_error,
        confidence,
        ci: (mean - z * std_error, mean + z * std_error),
        per_factor,
        trials: trajectories.len(),
        steps,
    })
}

/// Clopper–Pearson interval for `hits` successes out of `n`.
pub fn clopper_pearson(hits: usize, n: usize, confidence: f64) -> (f64, f64) {
    let alpha = 1.0 - confidence;
    let (k, n) = (hits as f64, n as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let hi = if hits as f64 == n {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitFrequency {
    pub halfspace: String,
    pub hits: usize,
    pub trials: usize,
    pub fraction: f64,
    pub std_error: f64,
    pub ci: (f64, f64),
}

/// Share of trials whose endpoint `Z_N·g0` lies in each half-space.
pub fn empirical_boundary_measure(
    family: &Family,
    endpoints: &[Element],
    halfspaces: &[HalfSpace<Wall>],
    g0: &Element,
    confidence: f64,
) -> Vec<HitFrequency> {
    let moved: Vec<Element> = endpoints.par_iter().map(|z| family.mul(z, g0)).collect();
    let n = moved.len();
    halfspaces
        .iter()
        .map(|h| {
            let hits = moved.iter().filter(|z| contains(family, h, z)).count();
            let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
            HitFrequency {
                halfspace: family.format_halfspace(h),
                hits,
                trials: n,
                fraction: p,
                std_error: if n == 0 { 0.0 } else { (p * (1.0 - p) / n as f64).sqrt() },
                ci: if n == 0 { (0.0, 1.0) } else { clopper_pearson(hits, n, confidence) },
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SkewerVerdict {
    Skewering,
    Flipping,
    NeitherYet,
}

/// Position of `g·s` against the certified chain `s2 ⊂ s1 ⊂ s`.
pub fn skewer_flip_classify(
    family: &Family,
    g: &Element,
    s: &HalfSpace<Wall>,
    s1: &HalfSpace<Wall>,
    s2: &HalfSpace<Wall>,
) -> Result<SkewerVerdict> {
    for (inner, outer) in [(s1, s), (s2, s1)] {
        if wall_relation(family, inner, outer) != WallRelation::HsubK
            || !strongly_separated(family, inner, outer)?.is_separated()
        {
            return Err(Error::Precondition("the chain must be nested and strongly separated".into()));
        }
    }
    Ok(classify_against_chain(family, g, s, s2))
}

/// [`skewer_flip_classify`] without re-certifying the chain.
pub fn classify_against_chain(
    family: &Family,
    g: &Element,
    s: &HalfSpace<Wall>,
    s2: &HalfSpace<Wall>,
) -> SkewerVerdict {
    let gs = act_halfspace(family, g, s);
    if wall_relation(family, &gs, s2) == WallRelation::HsubK {
        SkewerVerdict::Skewering
    } else if wall_relation(family, &s2.complement(), &gs) == WallRelation::HsubK {
        SkewerVerdict::Flipping
    } else {
        SkewerVerdict::NeitherYet
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqueezePair {
    /// Index in crossing order of the outer wall.
    pub position: usize,
    pub inner: HalfSpace<Wall>,
    pub middle: HalfSpace<Wall>,
    pub outer: HalfSpace<Wall>,
    pub bridge_length: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SqueezeCertificate {
    pub radius: usize,
    pub window: usize,
    pub pairs: Vec<SqueezePair>,
}

impl SqueezeCertificate {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    /// Re-derives each pair and checks that `o` is outside and `endpoint` inside.
    pub fn verify(&self, family: &Family, endpoint: &Element) -> bool {
        let o = family.basepoint();
        self.pairs.iter().all(|p| {
            let sss = SuperSeparation::Yes {
                inner: p.inner.clone(),
                middle: p.middle.clone(),
                outer: p.outer.clone(),
            };
            sss.verify(family)
                && matches!(bridge(family, &p.inner, &p.outer), Ok(b) if b.length == p.bridge_length && b.length <= self.radius)
                && !contains(family, &p.outer, &o)
                && contains(family, &p.inner, endpoint)
        })
    }
}

/// Nested super strongly separated pairs `h ⊂ k` with bridge length at most
/// `radius`, among the walls separating `o` from `endpoint`. Pairs are
/// looked for within `window` consecutive crossings, and tested on the
/// translate of each window to the basepoint.
pub fn squeezing_certificate(family: &Family, endpoint: &Element, radius: usize) -> Result<SqueezeCertificate> {
    let o = family.basepoint();
    let window = 4 * (radius + 1);
    let steps = family.geodesic_steps(&o, endpoint);
    let found: Vec<Vec<SqueezePair>> = (0..steps.len())
        .into_par_iter()
        .map(|i| -> Result<_> {
            let end = (i + window).min(steps.len());
            let local_end = steps[i..end].iter().fold(o.clone(), |acc, s| family.mul(&acc, s));
            let local = family.separating_walls(&o, &local_end);
            let k = &local[0];
            let mut out = Vec::new();
            for h in &local[1..] {
                if wall_relation(family, h, k) != WallRelation::HsubK {
                    continue;
                }
                if let SuperSeparation::Yes { inner, middle, outer } = super_strongly_separated(family, h, k)? {
                    let b = bridge(family, &inner, &outer)?;
                    if b.length <= radius {
                        out.push(SqueezePair {
                            position: i,
                            inner,
                            middle,
                            outer,
                            bridge_length: b.length,
                        });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    // Translate the local certificates back along the geodesic.
    let mut prefix = o.clone();
    let mut pairs = Vec::new();
    let mut next = 0;
    for local in found.into_iter().flatten() {
        while next < local.position {
            prefix = family.mul(&prefix, &steps[next]);
            next += 1;
        }
        pairs.push(SqueezePair {
            inner: act_halfspace(family, &prefix, &local.inner),
            middle: act_halfspace(family, &prefix, &local.middle),
            outer: act_halfspace(family, &prefix, &local.outer),
            ..local
        });
    }
    Ok(SqueezeCertificate { radius, window, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilySpec;
    use crate::walk::{sample, Atom, Weight};

    fn fam(json: &str) -> Family {
        Family::from_spec(&serde_json::from_str(json).unwrap()).unwrap()
    }

    fn z2z() -> Family {
        fam(r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#)
    }

    fn dirac(f: &Family, w: &str) -> MeasureSpec {
        MeasureSpec::new(vec![Atom {
            element: f.parse_element(w).unwrap(),
            weight: Weight::from_integer(1),
        }])
        .unwrap()
    }

    #[test]
    fn stabilization_on_line_and_tree() {
        let line = fam(r#"{"kind":"grid","dimension":1}"#);
        let m = dirac(&line, "[1]");
        let t = sample(&line, &m, 10, 0).unwrap();
        let w = line.parse_wall("a@e").unwrap();
        let r = track_stabilization(&line, &m, &t, &[w]);
        assert_eq!(r.walls[0].last_flip, Some(1));
        assert_eq!(r.walls[0].flips, 1);

        let f = Family::from_spec(&FamilySpec::Tree { rank: 2 }).unwrap();
        let m = dirac(&f, "a");
        let t = sample(&f, &m, 20, 0).unwrap();
        let tracked = crate::pocset::walls_within(&f, 2);
        let r = track_stabilization(&f, &m, &t, &tracked);
        assert!(r.walls.iter().all(|w| w.last_flip.unwrap_or(0) <= 2));
        assert_eq!(r.stabilized_fraction, 1.0);
    }

    #[test]
    fn stabilization_matches_positions() {
        let f = z2z();
        let m = MeasureSpec::uniform(&f);
        let t = sample(&f, &m, 300, 5).unwrap();
        let tracked = crate::pocset::walls_within(&f, 2);
        let r = track_stabilization(&f, &m, &t, &tracked);
        let mut prev = vec![f.basepoint()];
        prev.extend(t.positions(&f, &m));
        for (w, hist) in tracked.iter().zip(&r.walls) {
            let sides: Vec<_> = prev.iter().map(|p| f.side(w, p)).collect();
            let flips: Vec<usize> = (1..sides.len()).filter(|&k| sides[k] != sides[k - 1]).collect();
            assert_eq!(hist.flips, flips.len());
            assert_eq!(hist.last_flip, flips.last().copied());
        }
    }

    #[test]
    fn horofunction_examples() {
        let f = Family::from_spec(&FamilySpec::Tree { rank: 2 }).unwrap();
        let o = f.basepoint();
        let proxy = f.parse_element("a^7").unwrap();
        assert_eq!(horofunction_eval(&f, &proxy, &o, &o), 0);
        assert_eq!(horofunction_eval(&f, &proxy, &f.parse_element("b").unwrap(), &o), 1);
        let line = fam(r#"{"kind":"grid","dimension":1}"#);
        let p = line.parse_element("[50]").unwrap();
        let lo = line.basepoint();
        for k in 0..5 {
            assert_eq!(horofunction_eval(&line, &p, &Element::Vector(vec![k]), &lo), -k);
        }
    }

    #[test]
    fn cocycle_examples() {
        let line = fam(r#"{"kind":"grid","dimension":1}"#);
        let o = line.basepoint();
        let (p, q) = (Element::Vector(vec![40]), Element::Vector(vec![41]));
        assert!(cocycle_check(&line, &o, &o, &p, &q, &o).unwrap());
        let am = Element::Vector(vec![-1]);
        assert_eq!(cocycle_terms(&line, &am, &am, &p, &o), [-2, -1, -1]);
        assert!(cocycle_check(&line, &am, &am, &p, &q, &o).unwrap());
        let shallow = (Element::Vector(vec![1]), Element::Vector(vec![2]));
        assert!(matches!(
            cocycle_check(&line, &am, &am, &shallow.0, &shallow.1, &o),
            Err(Error::Retry(_))
        ));
    }

    #[test]
    fn drift_needs_two_trials() {
        let f = Family::from_spec(&FamilySpec::Tree { rank: 2 }).unwrap();
        let m = MeasureSpec::uniform(&f);
        let t = sample(&f, &m, 10, 0).unwrap();
        assert!(drift(std::slice::from_ref(&t), 0.95).is_err());
        let d = drift(&[t.clone(), t], 0.95).unwrap();
        assert_eq!(d.std_error, 0.0);
        assert_eq!(d.per_factor, vec![d.lambda_hat]);
    }

    #[test]
    fn clopper_pearson_brackets() {
        let (lo, hi) = clopper_pearson(25, 100, 0.95);
        assert!(lo < 0.25 && 0.25 < hi);
        assert!((lo - 0.1688).abs() < 1e-3 && (hi - 0.3466).abs() < 1e-3);
        assert_eq!(clopper_pearson(10, 10, 0.95).1, 1.0);
    }

    #[test]
    fn skewer_flip_examples() {
        let f = z2z();
        let s = f.parse_halfspace("c@e+").unwrap();
        let s1 = f.parse_halfspace("c@c a+").unwrap();
        let s2 = f.parse_halfspace("c@c a c a+").unwrap();
        let el = |w: &str| f.parse_element(w).unwrap();
        let cacac = el("c a c a c");
        let sq = f.mul(&cacac, &cacac);
        assert_eq!(skewer_flip_classify(&f, &sq, &s, &s1, &s2).unwrap(), SkewerVerdict::Skewering);
        assert_eq!(skewer_flip_classify(&f, &el("c a c a c a c^-1"), &s, &s1, &s2).unwrap(), SkewerVerdict::Flipping);
        assert_eq!(skewer_flip_classify(&f, &el("e"), &s, &s1, &s2).unwrap(), SkewerVerdict::NeitherYet);
        let a = f.parse_halfspace("a@e+").unwrap();
        let a2 = f.parse_halfspace("a@a+").unwrap();
        assert!(matches!(
            skewer_flip_classify(&f, &sq, &a, &a2, &s2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn squeezing_examples() {
        let f = z2z();
        let g = f.parse_element("c a c a c").unwrap();
        let mut last = 0;
        for periods in 2..6u64 {
            let z = f.pow(&g, periods);
            let cert = squeezing_certificate(&f, &z, 3).unwrap();
            assert!(cert.verify(&f, &z));
            assert!(cert.count() > last, "{periods}: {}", cert.count());
            last = cert.count();
        }
        let grid = fam(r#"{"kind":"grid","dimension":2}"#);
        let z = grid.parse_element("[7,-5]").unwrap();
        assert_eq!(squeezing_certificate(&grid, &z, 3).unwrap().count(), 0);
    }
}
