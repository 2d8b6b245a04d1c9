//! Scenario files: a single JSON document naming the group, peripheral
//! structure, subject set, radii, metric parameters and checks to run.

use crate::error::{Error, Result};
use crate::floyd::{eps_grid, parse_rational, DistortionFunction, ScalingFunction};
use crate::groups::{GroupSpec, PeripheralSpec, SubgroupSpec, WordFamily};
use crate::qclab::Notion;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub group: String,
    /// Labels naming peripheral free factors; empty for none.
    #[serde(default)]
    pub peripheral: Vec<String>,
    #[serde(default)]
    pub thickening: u32,
    pub subject: Subject,
    /// Ascending; verdicts compare the last two.
    pub radii: Vec<u32>,
    #[serde(default)]
    pub margin: u32,
    #[serde(default = "default_scaling")]
    pub scaling: String,
    /// A distortion function or `derive-from-lift-bound`.
    #[serde(default = "default_distortion")]
    pub distortion: String,
    /// Explicit rationals; omitted means `2^-k f(1)` for `k = -2..=6`.
    #[serde(default)]
    pub eps: Option<Vec<String>>,
    #[serde(default)]
    pub notions: Vec<String>,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub expectation: Expectation,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub seed: u64,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_scaling() -> String {
    "exp(1/2)".into()
}

fn default_distortion() -> String {
    "id".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum Subject {
    /// The orbit of the identity under the subgroup with these generators.
    Subgroup(Vec<String>),
    /// `{w(n) : n <= N}`; `n_max` omitted means `N = R / 2` at each radius.
    Family { pattern: String, n_max: Option<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Positive,
    Negative,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub vertices: usize,
    pub seconds: u64,
    /// Visible-hull work cap in vertex relaxations.
    pub visible_work: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            vertices: 2_000_000,
            seconds: 900,
            visible_work: 400_000_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub karlsson: Option<SampledCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_change: Option<SampledCheck>,
    #[serde(default)]
    pub ehull: bool,
    /// Number of sampled basepoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull_locality: Option<usize>,
    #[serde(default)]
    pub horosphere_axioms: bool,
    #[serde(default)]
    pub thinness: bool,
    #[serde(default)]
    pub lifts: bool,
    #[serde(default)]
    pub dirichlet: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parabolic: Option<ParabolicCheck>,
    /// Edge sample size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_qiso: Option<usize>,
    /// Word `g`: checks the projection bound for `E = F`, `B = g F`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_bound: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledCheck {
    pub radius: u32,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicCheck {
    #[serde(default)]
    pub q: u32,
    #[serde(default = "default_ratio")]
    pub finite_index_ratio: f64,
    /// Expected overall class: `finite`, `finite-index` or `intermediate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

fn default_ratio() -> f64 {
    0.9
}

/// A scenario with every field parsed and validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub group: GroupSpec,
    pub peripheral: PeripheralSpec,
    pub subgroup: Option<SubgroupSpec>,
    pub family: Option<WordFamily>,
    pub scaling: ScalingFunction,
    /// `None` for `derive-from-lift-bound`.
    pub distortion: Option<DistortionFunction>,
    pub eps: Vec<BigRational>,
    pub notions: Vec<Notion>,
}

pub const DERIVE_ALPHA: &str = "derive-from-lift-bound";

fn config<T>(r: Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{what}: {m}")),
        other => Error::Config(format!("{what}: {other}")),
    })
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario does not match the schema: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn resolve(&self) -> Result<Resolved> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema version {}", self.schema)));
        }
        if self.name.is_empty() {
            return Err(Error::Config("scenario name is empty".into()));
        }
        if self.radii.is_empty() || self.radii.iter().any(|&r| r < 2) {
            return Err(Error::Config("radii must be nonempty and at least 2".into()));
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("radii must be strictly ascending".into()));
        }
        if self.margin >= self.radii[0] {
            return Err(Error::Config(format!(
                "margin {} leaves no trusted region at radius {}",
                self.margin, self.radii[0]
            )));
        }
        let b = &self.budgets;
        if b.vertices == 0 || b.seconds == 0 || b.visible_work == 0 {
            return Err(Error::Config("budgets must be positive".into()));
        }
        let group = config(GroupSpec::parse(&self.group), "group")?;
        let peripheral = if self.peripheral.is_empty() {
            PeripheralSpec::empty()
        } else {
            config(PeripheralSpec::new(&group, &self.peripheral), "peripheral")?
        };
        let (subgroup, family) = match &self.subject {
            Subject::Subgroup(words) => (Some(config(SubgroupSpec::new(&group, words), "subject")?), None),
            Subject::Family { pattern, .. } => (None, Some(config(WordFamily::new(&group, pattern), "subject")?)),
        };
        let scaling = config(ScalingFunction::parse(&self.scaling), "scaling")?;
        let distortion = if self.distortion == DERIVE_ALPHA {
            None
        } else {
            Some(config(DistortionFunction::parse(&self.distortion), "distortion")?)
        };
        let eps = match &self.eps {
            None => eps_grid(&scaling, -2, 6),
            Some(list) => {
                let v = list
                    .iter()
                    .map(|s| config(parse_rational(s), "eps"))
                    .collect::<Result<Vec<_>>>()?;
                if v.is_empty() || v.iter().any(|e| *e <= BigRational::from_integer(0.into())) {
                    return Err(Error::Config("eps grid must be nonempty and positive".into()));
                }
                v
            }
        };
        let mut notions = self.notions.iter().map(|n| Notion::parse(n)).collect::<Result<Vec<_>>>()?;
        notions.sort();
        notions.dedup();
        if let Some(p) = &self.checks.parabolic {
            if !(p.finite_index_ratio > 0.0 && p.finite_index_ratio <= 1.0) {
                return Err(Error::Config("finite_index_ratio must lie in (0, 1]".into()));
            }
            if subgroup.is_none() {
                return Err(Error::Config("parabolic check needs a subgroup subject".into()));
            }
            if let Some(e) = &p.expect {
                if !["finite", "finite-index", "intermediate"].contains(&e.as_str()) {
                    return Err(Error::Config(format!("unknown parabolic class '{e}'")));
                }
            }
        }
        if self.checks.dirichlet && subgroup.is_none() {
            return Err(Error::Config("dirichlet check needs a subgroup subject".into()));
        }
        for c in [&self.checks.karlsson, &self.checks.base_change].into_iter().flatten() {
            if c.radius < 2 || c.samples == 0 {
                return Err(Error::Config("sampled checks need radius >= 2 and samples > 0".into()));
            }
        }
        if let Some(g) = &self.checks.projection_bound {
            config(group.word_to_element(g), "projection_bound")?;
        }
        Ok(Resolved {
            scenario: self.clone(),
            group,
            peripheral,
            subgroup,
            family,
            scaling,
            distortion,
            eps,
            notions,
        })
    }
}

fn all_notions() -> Vec<String> {
    Notion::ALL.iter().map(|n| n.name().to_string()).collect()
}

fn base(name: &str, description: &str, group: &str, subject: Subject, radii: Vec<u32>, margin: u32) -> Scenario {
    Scenario {
        schema: SCHEMA_VERSION,
        name: name.into(),
        description: description.into(),
        group: group.into(),
        peripheral: vec![],
        thickening: 0,
        subject,
        radii,
        margin,
        scaling: default_scaling(),
        distortion: default_distortion(),
        eps: None,
        notions: all_notions(),
        checks: Checks::default(),
        expectation: Expectation::None,
        budgets: Budgets::default(),
        seed: 1,
    }
}

const F2_SPLIT: &str = "product(free(a),free(b))";
const Z2_STAR_Z: &str = "product(abelian(a,b),free(c))";

/// The built-in scenario library.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut out = Vec::new();

    let mut s = base(
        "f2-plain",
        "hyperbolic control: the b-axis in the free group of rank 2",
        "free(2)",
        Subject::Subgroup(vec!["b".into()]),
        vec![5, 6],
        2,
    );
    s.expectation = Expectation::Positive;
    s.checks = Checks {
        karlsson: Some(SampledCheck { radius: 10, samples: 1000 }),
        base_change: Some(SampledCheck { radius: 6, samples: 1000 }),
        ehull: true,
        hull_locality: Some(16),
        projection_qiso: Some(2000),
        ..Checks::default()
    };
    out.push(s);

    let mut s = base(
        "f2-rel-a--subgroup-b",
        "free group relative to <a>; subject is the <b>-orbit",
        F2_SPLIT,
        Subject::Subgroup(vec!["b".into()]),
        vec![5, 6],
        2,
    );
    s.peripheral = vec!["a".into()];
    s.distortion = DERIVE_ALPHA.into();
    // Smaller eps have visible constants beyond the trusted radius at R = 6.
    s.eps = Some(["2", "1", "1/2", "1/4"].map(String::from).to_vec());
    s.expectation = Expectation::Positive;
    s.checks = Checks {
        ehull: true,
        hull_locality: Some(16),
        horosphere_axioms: true,
        thinness: true,
        lifts: true,
        parabolic: Some(ParabolicCheck {
            q: 0,
            finite_index_ratio: default_ratio(),
            expect: Some("finite".into()),
        }),
        projection_qiso: Some(2000),
        ..Checks::default()
    };
    out.push(s);

    let mut s = base(
        "f2-plain--anbn-family",
        "negative control: the staircase {a^n b^n : n <= R/2} is not quasiconvex",
        "free(2)",
        Subject::Family {
            pattern: "a^n b^n".into(),
            n_max: None,
        },
        vec![8, 10, 12],
        0,
    );
    s.expectation = Expectation::Negative;
    s.checks = Checks {
        ehull: true,
        hull_locality: Some(4),
        projection_qiso: Some(400),
        ..Checks::default()
    };
    out.push(s);

    let mut s = base(
        "z2-star-z--peripheral-z2",
        "Z^2 * Z relative to Z^2; subject is the peripheral subgroup itself",
        Z2_STAR_Z,
        Subject::Subgroup(vec!["a".into(), "b".into()]),
        vec![5, 6],
        2,
    );
    s.peripheral = vec!["a".into()];
    s.distortion = DERIVE_ALPHA.into();
    s.notions = vec!["relative".into(), "visible".into(), "dynamical".into()];
    s.expectation = Expectation::Positive;
    s.checks = Checks {
        ehull: true,
        horosphere_axioms: true,
        parabolic: Some(ParabolicCheck {
            q: 0,
            finite_index_ratio: default_ratio(),
            expect: Some("finite-index".into()),
        }),
        projection_qiso: Some(2000),
        projection_bound: Some("c".into()),
        ..Checks::default()
    };
    out.push(s);

    let mut s = base(
        "z2-star-z--subgroup-a",
        "Z^2 * Z relative to Z^2; subject <a> meets the peripheral in an infinite-index subgroup",
        Z2_STAR_Z,
        Subject::Subgroup(vec!["a".into()]),
        vec![5, 6],
        2,
    );
    s.peripheral = vec!["a".into()];
    s.distortion = DERIVE_ALPHA.into();
    s.notions = vec!["relative".into(), "visible".into(), "dynamical".into()];
    s.expectation = Expectation::Positive;
    s.checks = Checks {
        ehull: true,
        parabolic: Some(ParabolicCheck {
            q: 0,
            finite_index_ratio: default_ratio(),
            expect: Some("intermediate".into()),
        }),
        ..Checks::default()
    };
    out.push(s);

    let mut s = base(
        "dirichlet-f2-b",
        "Dirichlet set of the <b>-orbit in the free group relative to <a>",
        F2_SPLIT,
        Subject::Subgroup(vec!["b".into()]),
        vec![7, 8],
        4,
    );
    s.peripheral = vec!["a".into()];
    s.notions = vec!["relative".into()];
    s.expectation = Expectation::Positive;
    s.checks = Checks {
        ehull: true,
        dirichlet: true,
        parabolic: Some(ParabolicCheck {
            q: 0,
            finite_index_ratio: default_ratio(),
            expect: Some("finite".into()),
        }),
        ..Checks::default()
    };
    out.push(s);

    out
}

pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_resolves_and_round_trips() {
        let lib = builtin_scenarios();
        assert!(lib.len() >= 6);
        for s in &lib {
            s.resolve().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert_eq!(&Scenario::from_json(&s.to_json()).unwrap(), s);
        }
        let mut names: Vec<&str> = lib.iter().map(|s| s.name.as_str()).collect();
        names.dedup();
        assert_eq!(names.len(), lib.len());
    }

    #[test]
    fn schema_violations_are_config_errors() {
        for text in [
            "{",
            r#"{"name": "x"}"#,
            r#"{"name": "x", "group": "free(2)", "subject": {"subgroup": ["b"]}, "radii": [3], "colour": 1}"#,
        ] {
            assert!(matches!(Scenario::from_json(text), Err(Error::Config(_))), "{text}");
        }
        let ok = r#"{"name": "x", "group": "free(2)", "subject": {"subgroup": ["b"]}, "radii": [3, 4], "margin": 1}"#;
        let s = Scenario::from_json(ok).unwrap();
        assert_eq!(s.resolve().unwrap().eps.len(), 9);
        for (field, value) in [
            ("radii", "[4, 3]"),
            ("radii", "[1]"),
            ("margin", "3"),
            ("group", "\"fre(2)\""),
            ("scaling", "\"exp(2)\""),
            ("notions", "[\"visibly\"]"),
            ("eps", "[\"0\"]"),
        ] {
            let mut v: serde_json::Value = serde_json::from_str(ok).unwrap();
            v[field] = serde_json::from_str(value).unwrap();
            let s = Scenario::from_json(&v.to_string());
            let r = s.and_then(|s| s.resolve().map(|_| ()));
            assert!(matches!(r, Err(Error::Config(_))), "{field}={value}: {r:?}");
        }
    }
}
