use proptest::prelude::*;

use cubelab::boundary::horofunction_eval;
use cubelab::classify::translation_length;
use cubelab::families::{Element, Family, FamilySpec};
use cubelab::pocset::{act_halfspace, contains, in_interval, CubeComplex};

const FAMILIES: [&str; 5] = [
    r#"{"kind":"tree","rank":2}"#,
    r#"{"kind":"grid","dimension":2}"#,
    r#"{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]}"#,
    r#"{"kind":"raag","generators":["a","b","c","d"],"edges":[["a","b"],["b","c"],["c","d"]]}"#,
    r#"{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"grid","dimension":1}]}"#,
];

fn family(i: usize) -> Family {
    let spec: FamilySpec = serde_json::from_str(FAMILIES[i]).unwrap();
    Family::from_spec(&spec).unwrap()
}

fn element(f: &Family, picks: &[usize]) -> Element {
    let gens = f.generators();
    picks.iter().fold(f.basepoint(), |acc, &i| f.mul(&acc, &gens[i % gens.len()]))
}

fn word() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..64, 0..14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metric_axioms(fi in 0usize..5, x in word(), y in word(), z in word()) {
        let f = family(fi);
        let (x, y, z) = (element(&f, &x), element(&f, &y), element(&f, &z));
        prop_assert_eq!(f.distance(&x, &y), f.distance(&y, &x));
        prop_assert_eq!(f.distance(&x, &y) == 0, x == y);
        prop_assert!(f.distance(&x, &z) <= f.distance(&x, &y) + f.distance(&y, &z));
        prop_assert_eq!(f.distance(&x, &y), f.separating_walls(&x, &y).len());
    }

    #[test]
    fn median_axioms(fi in 0usize..5, x in word(), y in word(), z in word()) {
        let f = family(fi);
        let (x, y, z) = (element(&f, &x), element(&f, &y), element(&f, &z));
        let m = f.median(&x, &y, &z);
        prop_assert_eq!(&m, &f.median(&y, &z, &x));
        prop_assert_eq!(&m, &f.median(&y, &x, &z));
        prop_assert_eq!(f.median(&x, &x, &y), x.clone());
        prop_assert!(in_interval(&f, &m, &x, &y));
        prop_assert!(in_interval(&f, &m, &y, &z));
        prop_assert!(in_interval(&f, &m, &x, &z));
    }

    #[test]
    fn the_group_acts_by_isometries(fi in 0usize..5, g in word(), x in word(), y in word(), z in word()) {
        let f = family(fi);
        let (g, x, y, z) = (element(&f, &g), element(&f, &x), element(&f, &y), element(&f, &z));
        let (gx, gy, gz) = (f.mul(&g, &x), f.mul(&g, &y), f.mul(&g, &z));
        prop_assert_eq!(f.distance(&gx, &gy), f.distance(&x, &y));
        prop_assert_eq!(f.median(&gx, &gy, &gz), f.mul(&g, &f.median(&x, &y, &z)));
        for h in f.separating_walls(&x, &y) {
            let gh = act_halfspace(&f, &g, &h);
            prop_assert_eq!(contains(&f, &gh, &gz), contains(&f, &h, &z));
        }
    }

    #[test]
    fn translation_length_is_a_conjugacy_invariant(fi in 0usize..5, g in word(), c in word()) {
        let f = family(fi);
        let (g, c) = (element(&f, &g), element(&f, &c));
        let conj = f.mul(&f.mul(&c, &g), &f.inverse(&c));
        prop_assert_eq!(translation_length(&f, &conj), translation_length(&f, &g));
        let g4 = f.pow(&g, 4);
        prop_assert_eq!(translation_length(&f, &g4), 4 * translation_length(&f, &g));
    }

    #[test]
    fn horofunctions_are_normalized_and_lipschitz(fi in 0usize..5, p in word(), x in word(), y in word()) {
        let f = family(fi);
        let o = f.basepoint();
        let (p, x, y) = (element(&f, &p), element(&f, &x), element(&f, &y));
        prop_assert_eq!(horofunction_eval(&f, &p, &o, &o), 0);
        let gap = horofunction_eval(&f, &p, &x, &o) - horofunction_eval(&f, &p, &y, &o);
        prop_assert!(gap.unsigned_abs() as usize <= f.distance(&x, &y));
    }
}
