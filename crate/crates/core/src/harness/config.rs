use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{ball::DEFAULT_RADIUS_CAP, Family, FamilySpec};
use crate::walk::{parse_weight, Atom, MeasureSpec, Subgroup, Weight};

/// Largest `trials × steps` accepted without `--override-caps`.
pub const WORK_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Walk,
    Drift,
    Boundary,
    Classify,
    Frequency,
    Validate,
    Bridge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub word: String,
    pub weight: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Equal weight on the symmetric generating set.
    Uniform,
    /// Weight `laziness` on the identity, the rest uniform on generators.
    Lazy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laziness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomConfig>>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            preset: Some(Preset::Uniform),
            laziness: None,
            atoms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SubgroupConfig {
    Whole,
    Even,
    /// Exponent sum of `generator` divisible by `modulus`.
    Exponent { generator: String, modulus: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClassifierConfig {
    Contracting,
    Regular,
    /// Half-spaces `s`, `s1`, `s2` with `s2 ⊂ s1 ⊂ s`.
    Skewering { chain: [String; 3] },
}

fn default_steps() -> usize {
    1000
}
fn default_trials() -> usize {
    1
}
fn default_tracked_radius() -> usize {
    2
}
fn default_confidence() -> f64 {
    0.95
}
fn default_validate_radius() -> usize {
    4
}
fn default_search_radius() -> usize {
    crate::classify::DEFAULT_SEARCH_RADIUS
}
fn default_kind() -> ExperimentKind {
    ExperimentKind::Walk
}

/// One experiment. Serialized back (with defaults filled in and without the
/// output directory) into every summary it produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default = "default_kind")]
    pub experiment: ExperimentKind,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tracked_radius")]
    pub tracked_radius: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub waive_admissibility: bool,
    #[serde(default = "default_validate_radius")]
    pub validate_radius: usize,
    #[serde(default = "default_search_radius")]
    pub search_radius: usize,
    /// Elements for `classify`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<String>,
    /// Half-spaces for `boundary` (hit frequencies) and `bridge` (taken in pairs).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub halfspaces: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<ClassifierConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<SubgroupConfig>,
    /// Bridge-length bound for squeezing certificates in `boundary`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze_radius: Option<usize>,
    /// Basepoint translate `g0` for the second hit-frequency estimate in `boundary`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint_shift: Option<String>,
    #[serde(default, skip_serializing)]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    /// Parses JSON, naming the offending field and position on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "config".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The resolved config, as embedded in reports.
    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configs serialize")
    }

    /// Range and resource checks that serde cannot express.
    pub fn check(&self, override_caps: bool) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(0.0 < self.confidence && self.confidence < 1.0) {
            return Err(Error::config("confidence", "must lie strictly between 0 and 1"));
        }
        if !override_caps {
            let work = self.trials as u64 * self.steps as u64;
            if work > WORK_CAP {
                return Err(Error::Resource(format!(
                    "trials × steps = {work} exceeds the cap {WORK_CAP}; pass --override-caps to run anyway"
                )));
            }
            for (field, r) in [("validate_radius", self.validate_radius), ("tracked_radius", self.tracked_radius)] {
                if r > DEFAULT_RADIUS_CAP {
                    return Err(Error::Resource(format!(
                        "{field} = {r} exceeds the ball cap {DEFAULT_RADIUS_CAP}; pass --override-caps to run anyway"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn build_family(&self) -> Result<Family> {
        Family::from_spec(&self.family)
    }

    pub fn build_measure(&self, family: &Family) -> Result<MeasureSpec> {
        let m = &self.measure;
        let measure = match (&m.atoms, m.preset) {
            (Some(_), Some(_)) => return Err(Error::config("measure", "give either `preset` or `atoms`, not both")),
            (None, None) => return Err(Error::config("measure", "give a `preset` or a list of `atoms`")),
            (Some(atoms), None) => {
                if m.laziness.is_some() {
                    return Err(Error::config("measure.laziness", "only the `lazy` preset takes a laziness"));
                }
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let element = family
                            .parse_element(&a.word)
                            .map_err(|e| Error::config(format!("measure.atoms[{i}].word"), e.to_string()))?;
                        let weight = parse_weight(&a.weight)
                            .map_err(|e| Error::config(format!("measure.atoms[{i}].weight"), e))?;
                        Ok(Atom { element, weight })
                    })
                    .collect::<Result<Vec<_>>>()?;
                MeasureSpec::new(atoms)?
            }
            (None, Some(Preset::Uniform)) => {
                if m.laziness.is_some() {
                    return Err(Error::config("measure.laziness", "only the `lazy` preset takes a laziness"));
                }
                MeasureSpec::uniform(family)
            }
            (None, Some(Preset::Lazy)) => {
                let text = m.laziness.as_deref().unwrap_or("1/2");
                let lazy = parse_weight(text).map_err(|e| Error::config("measure.laziness", e))?;
                if lazy >= Weight::from_integer(1) || *lazy.numer() == 0 {
                    return Err(Error::config("measure.laziness", "must lie strictly between 0 and 1"));
                }
                let gens = family.generators();
                let each = (Weight::from_integer(1) - lazy) / Weight::from_integer(gens.len() as u64);
                let mut atoms = vec![Atom {
                    element: crate::pocset::CubeComplex::basepoint(family),
                    weight: lazy,
                }];
                atoms.extend(gens.into_iter().map(|element| Atom { element, weight: each }));
                MeasureSpec::new(atoms)?
            }
        };
        if !self.waive_admissibility && !measure.covers_ball(family, 2) {
            return Err(Error::config(
                "measure",
                "the support does not generate the ball of radius 2 as a semigroup; set waive_admissibility to run anyway",
            ));
        }
        Ok(measure)
    }

    pub fn build_subgroup(&self, family: &Family) -> Result<Option<Subgroup>> {
        Ok(match &self.subgroup {
            None => None,
            Some(SubgroupConfig::Whole) => Some(Subgroup::Whole),
            Some(SubgroupConfig::Even) => Some(Subgroup::EvenLength),
            Some(SubgroupConfig::Exponent { generator, modulus }) => {
                if *modulus == 0 {
                    return Err(Error::config("subgroup.modulus", "must be positive"));
                }
                let names = match family {
                    Family::Raag(r) => r.names().to_vec(),
                    Family::Grid(g) => crate::families::raag::default_names(g.dim()),
                    Family::Product(_) => {
                        return Err(Error::config("subgroup", "exponent sums are not defined on products"));
                    }
                };
                let index = names
                    .iter()
                    .position(|n| n == generator)
                    .ok_or_else(|| Error::config("subgroup.generator", format!("unknown generator `{generator}`")))?;
                Some(Subgroup::ExponentSum {
                    generator: index,
                    modulus: *modulus,
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::from_json(r#"{"family":{"kind":"tree","rank":2},"output_dir":"x"}"#).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Walk);
        assert_eq!(c.measure, MeasureConfig::default());
        let v = c.to_value();
        assert!(v.get("output_dir").is_none());
        let back: ExperimentConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back.output_dir, None);
        assert_eq!(back.steps, c.steps);
    }

    #[test]
    fn errors_name_fields() {
        let bad = r#"{"family":{"kind":"raag","generators":["a","b"],"edges":[["a","z"]]},"steps":3}"#;
        let c = ExperimentConfig::from_json(bad).unwrap();
        let Err(Error::Config { field, .. }) = c.build_family() else { panic!() };
        assert_eq!(field, "family.edges[0]");

        let typo = "{\n  \"family\": {\"kind\": \"tree\", \"rank\": 2},\n  \"stepz\": 3\n}";
        let Err(Error::Config { field, message }) = ExperimentConfig::from_json(typo) else { panic!() };
        assert_eq!(field, "stepz");
        assert!(message.contains("stepz") && message.contains("line 3"), "{message}");

        let wrong = r#"{"family":{"kind":"raag","generators":["a"],"edges":"ab"}}"#;
        let Err(Error::Config { field, message }) = ExperimentConfig::from_json(wrong) else { panic!() };
        assert_eq!(field, "family");
        assert!(message.contains("expected a sequence at line 1"), "{message}");
    }

    #[test]
    fn measures() {
        let c = ExperimentConfig::from_json(
            r#"{"family":{"kind":"tree","rank":2},"measure":{"preset":"lazy","laziness":"1/2"}}"#,
        )
        .unwrap();
        let f = c.build_family().unwrap();
        let m = c.build_measure(&f).unwrap();
        assert_eq!(m.atoms().len(), 5);
        assert_eq!(m.atoms()[1].weight, Weight::new(1, 8));

        let c = ExperimentConfig::from_json(
            r#"{"family":{"kind":"tree","rank":2},"measure":{"atoms":[{"word":"a","weight":"1"}]}}"#,
        )
        .unwrap();
        assert!(matches!(c.build_measure(&f), Err(Error::Config { .. })));
        let mut waived = c.clone();
        waived.waive_admissibility = true;
        assert!(waived.build_measure(&f).is_ok());

        let c = ExperimentConfig::from_json(
            r#"{"family":{"kind":"tree","rank":2},"measure":{"atoms":[{"word":"a","weight":"1/3"}]},"waive_admissibility":true}"#,
        )
        .unwrap();
        let Err(Error::Config { field, .. }) = c.build_measure(&f) else { panic!() };
        assert_eq!(field, "measure.atoms");
    }

    #[test]
    fn caps() {
        let mut c = ExperimentConfig::from_json(r#"{"family":{"kind":"tree","rank":2}}"#).unwrap();
        c.trials = 100_000;
        c.steps = 100_000;
        assert!(matches!(c.check(false), Err(Error::Resource(_))));
        assert!(c.check(true).is_ok());
        c.trials = 1;
        c.validate_radius = 7;
        assert!(matches!(c.check(false), Err(Error::Resource(_))));
    }
}
