use super::parse::{expand, tokenize, Exponent};
use super::{Element, GroupSpec, Leaf};
use crate::error::{Error, Result};

/// Peripheral factors, each named by one of its generator labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeripheralSpec {
    leaves: Vec<Leaf>,
}

impl PeripheralSpec {
    pub fn empty() -> Self {
        PeripheralSpec { leaves: Vec::new() }
    }

    pub fn new<S: AsRef<str>>(group: &GroupSpec, labels: &[S]) -> Result<Self> {
        let mut leaves: Vec<Leaf> = Vec::new();
        for l in labels {
            let l = l.as_ref();
            let leaf = group
                .leaf_of_label(l)
                .ok_or_else(|| Error::Config(format!("peripheral `{l}` is not a generator")))?;
            if leaf.path.is_empty() {
                return Err(Error::Config(format!(
                    "peripheral `{l}` must name a factor of a free product, not the whole group"
                )));
            }
            if !leaves.contains(&leaf) {
                leaves.push(leaf);
            }
        }
        leaves.sort_by_key(|l| l.offset);
        Ok(PeripheralSpec { leaves })
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.leaves.iter().map(|l| l.labels[0].clone()).collect()
    }
}

/// A finitely generated subgroup. Generators are stored together with their
/// inverses, deduplicated and in shortlex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupSpec {
    words: Vec<String>,
    generators: Vec<Element>,
}

impl SubgroupSpec {
    pub fn new<S: AsRef<str>>(group: &GroupSpec, words: &[S]) -> Result<Self> {
        let mut generators: Vec<Element> = Vec::new();
        for w in words {
            let e = group.word_to_element(w.as_ref())?;
            if e.is_identity() {
                return Err(Error::Input(format!(
                    "subgroup generator `{}` is trivial",
                    w.as_ref()
                )));
            }
            for x in [group.invert(&e), e] {
                if !generators.contains(&x) {
                    generators.push(x);
                }
            }
        }
        if generators.is_empty() {
            return Err(Error::Input("subgroup needs at least one generator".into()));
        }
        generators.sort_by(|a, b| group.shortlex_cmp(a, b));
        Ok(SubgroupSpec {
            words: words.iter().map(|w| w.as_ref().to_string()).collect(),
            generators,
        })
    }

    /// The subgroup generated by a leaf factor.
    pub fn from_leaf(group: &GroupSpec, leaf: &Leaf) -> Result<Self> {
        SubgroupSpec::new(group, &leaf.labels)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn symmetric_generators(&self) -> &[Element] {
        &self.generators
    }
}

/// Words `w(n)` for `n = 0..=N`, e.g. `a^n b^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordFamily {
    pattern: String,
    tokens: Vec<(usize, Exponent)>,
}

impl WordFamily {
    pub fn new(group: &GroupSpec, pattern: &str) -> Result<Self> {
        let tokens = tokenize(group, pattern)?;
        if !tokens.iter().any(|(_, e)| matches!(e, Exponent::Param(_))) {
            return Err(Error::Config(format!(
                "family pattern `{pattern}` does not mention `n`"
            )));
        }
        Ok(WordFamily {
            pattern: pattern.to_string(),
            tokens,
        })
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    pub fn member(&self, group: &GroupSpec, n: u32) -> Element {
        group.symbols_to_element(&expand(&self.tokens, n as i64))
    }

    pub fn members(&self, group: &GroupSpec, n_max: u32) -> Vec<Element> {
        let mut v: Vec<Element> = Vec::new();
        for n in 0..=n_max {
            let e = self.member(group, n);
            if !v.contains(&e) {
                v.push(e);
            }
        }
        v
    }
}
