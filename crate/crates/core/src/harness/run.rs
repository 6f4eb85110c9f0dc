use std::path::Path;

use serde_json::{json, Value};

use super::config::{ClassifierConfig, ExperimentConfig, ExperimentKind};
use super::validate::validate;
use crate::boundary::{drift, empirical_boundary_measure, squeezing_certificate, track_stabilization, HitFrequency};
use crate::classify::{frequency_scan, is_contracting, is_regular, Certificate, Classification, Classifier};
use crate::error::{Error, Result};
use crate::families::{ball::DEFAULT_RADIUS_CAP, Element, Family};
use crate::pocset::{
    bridge, nested_pair, pair_distance, strongly_separated, super_strongly_separated, walls_within, wall_relation, CubeComplex,
    HalfSpace, SeparationVerdict, SuperSeparation,
};
use crate::walk::{batch, batch_range, return_times, trial_seed, MeasureSpec, Trajectory, PRNG};
use crate::families::Wall;

/// Everything an experiment produces, before it touches the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub summary: Value,
    /// CSV files as `(file name, header, rows)`.
    pub tables: Vec<(String, Vec<String>, Vec<Vec<String>>)>,
    /// `false` when the experiment ran but its checks failed.
    pub passed: bool,
}

impl Report {
    /// Writes `summary.json` and the CSV tables into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Resource(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut text = serde_json::to_string_pretty(&self.summary).expect("json values serialize");
        text.push('\n');
        std::fs::write(dir.join("summary.json"), text).map_err(io)?;
        for (name, header, rows) in &self.tables {
            let mut w = csv::Writer::from_path(dir.join(name))
                .map_err(|e| Error::Resource(format!("cannot write {name}: {e}")))?;
            let csv_err = |e: csv::Error| Error::Resource(format!("cannot write {name}: {e}"));
            w.write_record(header).map_err(csv_err)?;
            for r in rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
        Ok(())
    }
}

struct Ctx {
    config: ExperimentConfig,
    family: Family,
}

/// Runs the experiment described by `config`.
pub fn run(config: &ExperimentConfig, override_caps: bool) -> Result<Report> {
    config.check(override_caps)?;
    let ctx = Ctx {
        config: config.clone(),
        family: config.build_family()?,
    };
    let needs_measure = matches!(
        config.experiment,
        ExperimentKind::Walk | ExperimentKind::Drift | ExperimentKind::Boundary | ExperimentKind::Frequency
    );
    let measure = if needs_measure {
        Some(config.build_measure(&ctx.family)?)
    } else {
        None
    };
    let (result, tables, passed, seeds) = match config.experiment {
        ExperimentKind::Walk => ctx.walk(measure.as_ref().unwrap())?,
        ExperimentKind::Drift => ctx.drift(measure.as_ref().unwrap())?,
        ExperimentKind::Boundary => ctx.boundary(measure.as_ref().unwrap())?,
        ExperimentKind::Frequency => ctx.frequency(measure.as_ref().unwrap())?,
        ExperimentKind::Classify => ctx.classify()?,
        ExperimentKind::Validate => ctx.validate(override_caps)?,
        ExperimentKind::Bridge => ctx.bridge()?,
    };
    let summary = json!({
        "generator": format!("cubelab {}", env!("CARGO_PKG_VERSION")),
        "prng": PRNG,
        "config": config.to_value(),
        "seeds": seeds,
        "passed": passed,
        "result": result,
    });
    Ok(Report {
        summary,
        tables,
        passed,
    })
}

type Outcome = (Value, Vec<(String, Vec<String>, Vec<Vec<String>>)>, bool, Vec<u64>);

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn verdict_json<W>(family: &Family, v: &SeparationVerdict<W>, fmt: impl Fn(&Family, &W) -> String) -> Value {
    match v {
        SeparationVerdict::StronglySeparated(reason) => json!({"verdict": "strongly_separated", "reason": format!("{reason:?}")}),
        SeparationVerdict::NotStronglySeparated { witness } => {
            json!({"verdict": "not_strongly_separated", "witness": fmt(family, witness)})
        }
        SeparationVerdict::Unknown { searched_radius } => json!({"verdict": "unknown", "searched_radius": searched_radius}),
    }
}

fn hit_json(h: &HitFrequency) -> Value {
    serde_json::to_value(h).expect("serializable")
}

/// Serializes a classification with every certificate spelled out.
pub fn classification_json(family: &Family, g: &Element, c: &Classification) -> Value {
    let hs = |h: &HalfSpace<Wall>| family.format_halfspace(h);
    let certificate = match &c.certificate {
        Certificate::None => Value::Null,
        Certificate::Contracting(s) => json!({
            "outer": hs(&s.outer),
            "inner": hs(&s.inner),
            "power": s.power,
        }),
        Certificate::Flat(ws) => ws
            .iter()
            .map(|w| json!({"outer": hs(&w.outer), "inner": hs(&w.inner), "witness": family.format_wall(&w.witness)}))
            .collect(),
        Certificate::Factors(fs) => family
            .irreducible_factors()
            .iter()
            .zip(family.project(g))
            .zip(fs)
            .map(|((f, x), c)| classification_json(f, &x, c))
            .collect(),
    };
    json!({
        "element": family.format_element(g),
        "kind": c.kind,
        "translation_length": c.translation_length,
        "certificate": certificate,
        "failing_factor": c.failing_factor(),
        "verified": c.verify(family, g),
    })
}

impl Ctx {
    fn seeds(&self, range: std::ops::Range<u64>) -> Vec<u64> {
        range.map(|t| trial_seed(self.config.seed, t)).collect()
    }

    fn trajectories(&self, measure: &MeasureSpec) -> Result<Vec<Trajectory>> {
        batch(&self.family, measure, self.config.steps, self.config.trials, self.config.seed)
    }

    fn step_table(&self, measure: &MeasureSpec, t: &Trajectory) -> (String, Vec<String>, Vec<Vec<String>>) {
        let rows = t
            .increments
            .iter()
            .zip(&t.distances)
            .enumerate()
            .map(|(k, (&i, &d))| {
                vec![
                    (k + 1).to_string(),
                    self.family.format_element(&measure.atoms()[i as usize].element),
                    d.to_string(),
                ]
            })
            .collect();
        ("steps.csv".into(), header(&["step", "increment", "distance"]), rows)
    }

    fn walk(&self, measure: &MeasureSpec) -> Result<Outcome> {
        let trajs = self.trajectories(measure)?;
        let subgroup = self.config.build_subgroup(&self.family)?;
        let mut per_trial = Vec::new();
        let mut rows = Vec::new();
        for (i, t) in trajs.iter().enumerate() {
            let terminal = t.terminal(&self.family, measure);
            let returns = match &subgroup {
                Some(s) => {
                    let r = return_times(&self.family, measure, t, s)?;
                    json!({"visits": r.phi.len(), "c_hat": r.c_hat, "predicted": r.predicted, "never_returned": r.never_returned})
                }
                None => Value::Null,
            };
            rows.push(vec![i.to_string(), t.seed.to_string(), t.terminal_distance().to_string()]);
            per_trial.push(json!({
                "trial": i,
                "seed": t.seed,
                "terminal_distance": t.terminal_distance(),
                "terminal": self.family.format_element(&terminal),
                "return_times": returns,
            }));
        }
        let tables = vec![
            self.step_table(measure, &trajs[0]),
            ("trials.csv".into(), header(&["trial", "seed", "terminal_distance"]), rows),
        ];
        let seeds = trajs.iter().map(|t| t.seed).collect();
        Ok((json!({"trials": per_trial}), tables, true, seeds))
    }

    fn drift(&self, measure: &MeasureSpec) -> Result<Outcome> {
        let trajs = self.trajectories(measure)?;
        let estimate = drift(&trajs, self.config.confidence)?;
        let n = self.config.steps as f64;
        let factors = trajs[0].factor_distances.len();
        let mut cols = vec!["trial".to_string(), "seed".into(), "terminal_distance".into(), "rate".into()];
        if factors > 1 {
            cols.extend((0..factors).map(|i| format!("factor_{i}_distance")));
        }
        let rows = trajs
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut r = vec![
                    i.to_string(),
                    t.seed.to_string(),
                    t.terminal_distance().to_string(),
                    (t.terminal_distance() as f64 / n).to_string(),
                ];
                if factors > 1 {
                    r.extend(t.factor_distances.iter().map(|d| d.to_string()));
                }
                r
            })
            .collect();
        let seeds = trajs.iter().map(|t| t.seed).collect();
        let result = serde_json::to_value(&estimate).expect("serializable");
        Ok((result, vec![("trials.csv".into(), cols, rows)], true, seeds))
    }

    fn halfspaces(&self) -> Result<Vec<HalfSpace<Wall>>> {
        self.config
            .halfspaces
            .iter()
            .enumerate()
            .map(|(i, h)| {
                self.family
                    .parse_halfspace(h)
                    .map_err(|e| Error::config(format!("halfspaces[{i}]"), e.to_string()))
            })
            .collect()
    }

    fn boundary(&self, measure: &MeasureSpec) -> Result<Outcome> {
        let f = &self.family;
        let c = &self.config;
        let tracked = walls_within(f, c.tracked_radius);
        let trajs = self.trajectories(measure)?;
        let reports: Vec<_> = trajs.iter().map(|t| track_stabilization(f, measure, t, &tracked)).collect();
        let fractions: Vec<f64> = reports.iter().map(|r| r.stabilized_fraction).collect();
        let good = fractions.iter().filter(|&&x| x >= 0.99).count();

        let mut halfspaces = self.halfspaces()?;
        if halfspaces.is_empty() {
            halfspaces = tracked
                .iter()
                .map(|w| HalfSpace::new(w.clone(), crate::pocset::Sign::Plus))
                .collect();
        }
        let trials = c.trials as u64;
        let ends = |ts: &[Trajectory], m: &MeasureSpec| -> Vec<Element> { ts.iter().map(|t| t.terminal(f, m)).collect() };
        let o = f.basepoint();
        let forward = empirical_boundary_measure(f, &ends(&trajs, measure), &halfspaces, &o, c.confidence);
        let inverse_measure = measure.inverse(f);
        let inverse_trajs = batch_range(f, &inverse_measure, c.steps, trials..2 * trials, c.seed)?;
        let backward = empirical_boundary_measure(f, &ends(&inverse_trajs, &inverse_measure), &halfspaces, &o, c.confidence);
        let mut seeds = self.seeds(0..2 * trials);
        let mut shifted = None;
        if let Some(g0) = &c.basepoint_shift {
            let g0 = f
                .parse_element(g0)
                .map_err(|e| Error::config("basepoint_shift", e.to_string()))?;
            let other = batch_range(f, measure, c.steps, 2 * trials..3 * trials, c.seed)?;
            shifted = Some(empirical_boundary_measure(f, &ends(&other, measure), &halfspaces, &g0, c.confidence));
            seeds = self.seeds(0..3 * trials);
        }
        let squeeze = match c.squeeze_radius {
            Some(r) => {
                let counts = trajs
                    .iter()
                    .map(|t| squeezing_certificate(f, &t.terminal(f, measure), r).map(|s| s.count()))
                    .collect::<Result<Vec<_>>>()?;
                json!({"radius": r, "counts": counts})
            }
            None => Value::Null,
        };

        let mut freq_rows = Vec::new();
        for (label, list) in [("mu", Some(&forward)), ("mu_inverse", Some(&backward)), ("mu_shifted", shifted.as_ref())] {
            for h in list.into_iter().flatten() {
                freq_rows.push(vec![
                    label.to_string(),
                    h.halfspace.clone(),
                    h.hits.to_string(),
                    h.trials.to_string(),
                    h.fraction.to_string(),
                    h.ci.0.to_string(),
                    h.ci.1.to_string(),
                ]);
            }
        }
        let first = &reports[0];
        let step_rows = trajs[0]
            .distances
            .iter()
            .zip(&first.cumulative_flips)
            .enumerate()
            .map(|(k, (d, fl))| vec![(k + 1).to_string(), d.to_string(), fl.to_string()])
            .collect();
        let wall_rows = first
            .walls
            .iter()
            .map(|w| vec![w.wall.clone(), w.flips.to_string(), w.last_flip.map_or(String::new(), |x| x.to_string())])
            .collect();
        let result = json!({
            "tracked_walls": tracked.len(),
            "horizon": first.horizon,
            "stabilized_fraction_per_trial": fractions,
            "trials_at_least_99_percent": good,
            "share_of_trials_at_least_99_percent": good as f64 / trajs.len() as f64,
            "hit_frequencies": forward.iter().map(hit_json).collect::<Vec<_>>(),
            "hit_frequencies_inverse": backward.iter().map(hit_json).collect::<Vec<_>>(),
            "hit_frequencies_shifted": shifted.map(|s| s.iter().map(hit_json).collect::<Vec<_>>()),
            "squeezing": squeeze,
        });
        let tables = vec![
            ("steps.csv".into(), header(&["step", "distance", "flips_so_far"]), step_rows),
            ("stabilization.csv".into(), header(&["wall", "flips", "last_flip"]), wall_rows),
            (
                "frequencies.csv".into(),
                header(&["measure", "halfspace", "hits", "trials", "fraction", "ci_low", "ci_high"]),
                freq_rows,
            ),
        ];
        Ok((result, tables, true, seeds))
    }

    fn classifier(&self) -> Result<Classifier> {
        let r = self.config.search_radius;
        Ok(match &self.config.classifier {
            None => return Err(Error::config("classifier", "the frequency experiment needs a classifier")),
            Some(ClassifierConfig::Contracting) => Classifier::Contracting { search_radius: r },
            Some(ClassifierConfig::Regular) => Classifier::Regular { search_radius: r },
            Some(ClassifierConfig::Skewering { chain }) => {
                let parse = |i: usize| {
                    self.family
                        .parse_halfspace(&chain[i])
                        .map_err(|e| Error::config(format!("classifier.chain[{i}]"), e.to_string()))
                };
                let (s, s1, s2) = (parse(0)?, parse(1)?, parse(2)?);
                crate::boundary::skewer_flip_classify(&self.family, &self.family.basepoint(), &s, &s1, &s2)
                    .map_err(|e| Error::config("classifier.chain", e.to_string()))?;
                Classifier::Skewering { s, s1, s2 }
            }
        })
    }

    fn frequency(&self, measure: &MeasureSpec) -> Result<Outcome> {
        let classifier = self.classifier()?;
        if matches!(classifier, Classifier::Contracting { .. }) && !self.family.is_irreducible() {
            return Err(Error::config("classifier", "contracting needs an irreducible family; use regular"));
        }
        let trajs = self.trajectories(measure)?;
        let scans = trajs
            .iter()
            .map(|t| frequency_scan(&self.family, measure, t, &classifier))
            .collect::<Result<Vec<_>>>()?;
        let n = self.config.steps;
        let mean_curve: Vec<f64> = (0..n)
            .map(|k| scans.iter().map(|s| s.fractions[k]).sum::<f64>() / scans.len() as f64)
            .collect();
        let finals: Vec<f64> = scans.iter().map(|s| s.final_fraction()).collect();
        let slopes: Vec<f64> = scans.iter().map(|s| s.slope_from(n / 10)).collect();
        let rows = mean_curve
            .iter()
            .enumerate()
            .map(|(k, f)| vec![(k + 1).to_string(), f.to_string()])
            .collect();
        let result = json!({
            "final_fraction_per_trial": finals,
            "mean_final_fraction": finals.iter().sum::<f64>() / finals.len() as f64,
            "last_decade_slope_per_trial": slopes,
        });
        let seeds = trajs.iter().map(|t| t.seed).collect();
        Ok((result, vec![("frequency.csv".into(), header(&["step", "mean_fraction"]), rows)], true, seeds))
    }

    fn classify(&self) -> Result<Outcome> {
        if self.config.elements.is_empty() {
            return Err(Error::config("elements", "list at least one element to classify"));
        }
        let mut out = Vec::new();
        let mut rows = Vec::new();
        for (i, text) in self.config.elements.iter().enumerate() {
            let g = self
                .family
                .parse_element(text)
                .map_err(|e| Error::config(format!("elements[{i}]"), e.to_string()))?;
            let c = if self.family.is_irreducible() {
                is_contracting(&self.family, &g, self.config.search_radius)?
            } else {
                is_regular(&self.family, &g, self.config.search_radius)?
            };
            let j = classification_json(&self.family, &g, &c);
            rows.push(vec![
                self.family.format_element(&g),
                format!("{:?}", c.kind),
                c.translation_length.to_string(),
            ]);
            out.push(j);
        }
        let passed = out.iter().all(|j| j["verified"] == true);
        Ok((
            json!({"classifications": out}),
            vec![("classify.csv".into(), header(&["element", "kind", "translation_length"]), rows)],
            passed,
            Vec::new(),
        ))
    }

    fn validate(&self, override_caps: bool) -> Result<Outcome> {
        let cap = if override_caps { usize::MAX } else { DEFAULT_RADIUS_CAP };
        let report = validate(&self.family, self.config.validate_radius, cap, self.config.seed)?;
        let rows = report
            .checks
            .iter()
            .map(|c| vec![c.name.to_string(), c.assertions.to_string(), c.failures.to_string()])
            .collect();
        let passed = report.passed;
        Ok((
            serde_json::to_value(&report).expect("serializable"),
            vec![("checks.csv".into(), header(&["check", "assertions", "failures"]), rows)],
            passed,
            vec![self.config.seed],
        ))
    }

    fn bridge(&self) -> Result<Outcome> {
        let hs = self.halfspaces()?;
        if hs.is_empty() || hs.len() % 2 != 0 {
            return Err(Error::config("halfspaces", "bridge takes an even, nonempty list of half-spaces (pairs h, k)"));
        }
        let f = &self.family;
        let fmt_wall = |f: &Family, w: &Wall| f.format_wall(w);
        let mut out = Vec::new();
        let mut rows = Vec::new();
        for pair in hs.chunks(2) {
            let (h, k) = (&pair[0], &pair[1]);
            let rel = wall_relation(f, h, k);
            let mut entry = json!({
                "h": f.format_halfspace(h),
                "k": f.format_halfspace(k),
                "relation": format!("{rel:?}"),
            });
            let mut length = String::new();
            let mut sep = String::new();
            if rel.is_nesting() {
                let (inner, outer) = nested_pair(f, h, k)?;
                entry["inner"] = json!(f.format_halfspace(&inner));
                entry["outer"] = json!(f.format_halfspace(&outer));
                entry["pair_distance"] = json!(pair_distance(f, &inner, &outer)?);
                let v = strongly_separated(f, &inner, &outer)?;
                entry["separation"] = verdict_json(f, &v, fmt_wall);
                sep = entry["separation"]["verdict"].as_str().unwrap_or("").to_string();
                if v.is_separated() {
                    let b = bridge(f, &inner, &outer)?;
                    length = b.length.to_string();
                    entry["bridge"] = json!({
                        "p1": f.format_element(&b.p1),
                        "p2": f.format_element(&b.p2),
                        "length": b.length,
                    });
                }
                entry["super_strongly_separated"] = match super_strongly_separated(f, &inner, &outer)? {
                    SuperSeparation::Yes { middle, .. } => json!({"verdict": "yes", "middle": f.format_halfspace(&middle)}),
                    SuperSeparation::Unknown => json!({"verdict": "unknown"}),
                };
            }
            rows.push(vec![f.format_halfspace(h), f.format_halfspace(k), format!("{rel:?}"), sep, length]);
            out.push(entry);
        }
        Ok((
            json!({"pairs": out}),
            vec![("bridge.csv".into(), header(&["h", "k", "relation", "separation", "bridge_length"]), rows)],
            true,
            Vec::new(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn every_kind_runs() {
        let base = r#""family":{"kind":"raag","generators":["a","b","c"],"edges":[["a","b"]]},"steps":200,"trials":3,"seed":5"#;
        for extra in [
            r#""experiment":"walk","subgroup":{"kind":"even"}"#,
            r#""experiment":"drift""#,
            r#""experiment":"boundary","squeeze_radius":3,"basepoint_shift":"a b","halfspaces":["c@e+"]"#,
            r#""experiment":"frequency","classifier":{"kind":"contracting"}"#,
            r#""experiment":"frequency","classifier":{"kind":"skewering","chain":["c@e+","c@c a+","c@c a c a+"]}"#,
            r#""experiment":"classify","elements":["a b","c a","e"]"#,
            r#""experiment":"bridge","halfspaces":["c@c a+","c@e+"]"#,
            r#""experiment":"validate","validate_radius":2"#,
        ] {
            let c = cfg(&format!("{{{base},{extra}}}"));
            let r = run(&c, false).unwrap_or_else(|e| panic!("{extra}: {e}"));
            assert!(r.passed, "{extra}");
            assert_eq!(r, run(&c, false).unwrap());
        }
    }

    #[test]
    fn classify_output_shape() {
        let c = cfg(r#"{"family":{"kind":"product","factors":[{"kind":"tree","rank":2},{"kind":"tree","rank":2}]},"experiment":"classify","elements":["(a | b)","(a | e)"]}"#);
        let r = run(&c, false).unwrap();
        let cl = &r.summary["result"]["classifications"];
        assert_eq!(cl[0]["kind"], "Regular");
        assert_eq!(cl[1]["failing_factor"], 1);
        assert_eq!(cl[0]["verified"], true);
    }

    #[test]
    fn missing_pieces_are_config_errors() {
        let c = cfg(r#"{"family":{"kind":"tree","rank":2},"experiment":"frequency"}"#);
        assert!(matches!(run(&c, false), Err(Error::Config { .. })));
        let c = cfg(r#"{"family":{"kind":"tree","rank":2},"experiment":"classify","elements":["q"]}"#);
        let Err(Error::Config { field, .. }) = run(&c, false) else { panic!() };
        assert_eq!(field, "elements[0]");
    }
}
