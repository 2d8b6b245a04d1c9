//! Finitely generated groups built from free and free abelian leaves by
//! binary free products, together with exact normal forms.
//!
//! Generators are ordered by declaration (left to right through the spec
//! tree). The symbol alphabet interleaves each generator with its inverse,
//! `a < a^-1 < b < b^-1 < ...`, and every ordering of elements used by the
//! crate is derived from the canonical words over this alphabet.

mod element;
mod parse;
mod subgroup;

pub use element::{Element, Side, Syllable};
pub use subgroup::{PeripheralSpec, SubgroupSpec, WordFamily};

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;

/// A letter of the symmetric generating set, encoded as `2 * gen + inv`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Symbol(2 * generator as u32 + inverse as u32)
    }

    pub fn generator(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Symbol(self.0 ^ 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LeafKind {
    Free,
    FreeAbelian,
}

/// A leaf factor of a spec tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub kind: LeafKind,
    /// Global index of the first generator of this leaf.
    pub offset: usize,
    pub labels: Vec<String>,
    /// Sides taken from the root to reach this leaf.
    pub path: Vec<Side>,
}

impl Leaf {
    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn contains_generator(&self, generator: usize) -> bool {
        generator >= self.offset && generator < self.offset + self.rank()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Free { labels: Vec<String> },
    FreeAbelian { labels: Vec<String> },
    FreeProduct(Box<GroupSpec>, Box<GroupSpec>),
}

impl GroupSpec {
    pub fn free<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let g = GroupSpec::Free {
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn free_abelian<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let g = GroupSpec::FreeAbelian {
            labels: labels.iter().map(|s| s.as_ref().to_string()).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn free_product(left: GroupSpec, right: GroupSpec) -> Result<Self> {
        let g = GroupSpec::FreeProduct(Box::new(left), Box::new(right));
        g.validate()?;
        Ok(g)
    }

    /// Parses the compact form, e.g. `product(abelian(a,b),free(c))` or `free(2)`.
    pub fn parse(text: &str) -> Result<Self> {
        let g = parse::parse_group(text)?;
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let labels = self.labels();
        for (i, l) in labels.iter().enumerate() {
            if !parse::is_label(l) {
                return Err(Error::Config(format!("invalid generator label `{l}`")));
            }
            if labels[..i].contains(l) {
                return Err(Error::Config(format!("duplicate generator label `{l}`")));
            }
        }
        for leaf in self.leaves() {
            if leaf.rank() == 0 {
                return Err(Error::Config("leaf factors need rank at least 1".into()));
            }
        }
        Ok(())
    }

    /// Generator labels in declaration order.
    pub fn labels(&self) -> Vec<String> {
        match self {
            GroupSpec::Free { labels } | GroupSpec::FreeAbelian { labels } => labels.clone(),
            GroupSpec::FreeProduct(l, r) => {
                let mut v = l.labels();
                v.extend(r.labels());
                v
            }
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            GroupSpec::Free { labels } | GroupSpec::FreeAbelian { labels } => labels.len(),
            GroupSpec::FreeProduct(l, r) => l.rank() + r.rank(),
        }
    }

    pub fn symbol_count(&self) -> usize {
        2 * self.rank()
    }

    /// All symbols in alphabet order.
    pub fn symbols(&self) -> Vec<Symbol> {
        (0..self.symbol_count() as u32).map(Symbol).collect()
    }

    pub fn symbol_label(&self, s: Symbol) -> String {
        let base = &self.labels()[s.generator()];
        if s.is_inverse() {
            format!("{base}^-1")
        } else {
            base.clone()
        }
    }

    pub fn generator_index(&self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| l == label)
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, GroupSpec::FreeProduct(..))
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(0, &mut Vec::new(), &mut out);
        out
    }

    fn collect_leaves(&self, offset: usize, path: &mut Vec<Side>, out: &mut Vec<Leaf>) {
        match self {
            GroupSpec::Free { labels } | GroupSpec::FreeAbelian { labels } => out.push(Leaf {
                kind: if matches!(self, GroupSpec::Free { .. }) {
                    LeafKind::Free
                } else {
                    LeafKind::FreeAbelian
                },
                offset,
                labels: labels.clone(),
                path: path.clone(),
            }),
            GroupSpec::FreeProduct(l, r) => {
                path.push(Side::Left);
                l.collect_leaves(offset, path, out);
                path.pop();
                path.push(Side::Right);
                r.collect_leaves(offset + l.rank(), path, out);
                path.pop();
            }
        }
    }

    /// The leaf containing a generator label.
    pub fn leaf_of_label(&self, label: &str) -> Option<Leaf> {
        let g = self.generator_index(label)?;
        self.leaves().into_iter().find(|l| l.contains_generator(g))
    }

    pub fn factor(&self, side: Side) -> &GroupSpec {
        match (self, side) {
            (GroupSpec::FreeProduct(l, _), Side::Left) => l,
            (GroupSpec::FreeProduct(_, r), Side::Right) => r,
            _ => panic!("factor() called on a leaf"),
        }
    }

    pub fn identity(&self) -> Element {
        match self {
            GroupSpec::Free { .. } => Element::Free(Vec::new()),
            GroupSpec::FreeAbelian { labels } => {
                Element::Abelian(vec![num_bigint::BigInt::from(0); labels.len()])
            }
            GroupSpec::FreeProduct(..) => Element::Product(Vec::new()),
        }
    }

    /// The element represented by a single symbol.
    pub fn symbol_element(&self, s: Symbol) -> Element {
        self.symbol_element_at(s.generator(), s.is_inverse())
    }

    fn symbol_element_at(&self, generator: usize, inverse: bool) -> Element {
        match self {
            GroupSpec::Free { .. } => {
                Element::Free(vec![Symbol::new(generator, inverse)])
            }
            GroupSpec::FreeAbelian { labels } => {
                let mut v = vec![num_bigint::BigInt::from(0); labels.len()];
                v[generator] = if inverse { (-1).into() } else { 1.into() };
                Element::Abelian(v)
            }
            GroupSpec::FreeProduct(l, r) => {
                let (side, spec, local) = if generator < l.rank() {
                    (Side::Left, l, generator)
                } else {
                    (Side::Right, r, generator - l.rank())
                };
                Element::Product(vec![Syllable {
                    side,
                    element: spec.symbol_element_at(local, inverse),
                }])
            }
        }
    }

    /// Checks that `e` is a well-formed normal form for this spec.
    pub fn check(&self, e: &Element) -> Result<()> {
        match (self, e) {
            (GroupSpec::Free { labels }, Element::Free(w)) => {
                for (i, s) in w.iter().enumerate() {
                    if s.generator() >= labels.len() {
                        return Err(Error::Structural("letter outside the generating set".into()));
                    }
                    if i > 0 && w[i - 1] == s.inverse() {
                        return Err(Error::Structural("free word is not reduced".into()));
                    }
                }
                Ok(())
            }
            (GroupSpec::FreeAbelian { labels }, Element::Abelian(v)) if v.len() == labels.len() => {
                Ok(())
            }
            (GroupSpec::FreeProduct(l, r), Element::Product(syls)) => {
                for (i, syl) in syls.iter().enumerate() {
                    if i > 0 && syls[i - 1].side == syl.side {
                        return Err(Error::Structural(
                            "adjacent syllables from the same factor".into(),
                        ));
                    }
                    let f = if syl.side == Side::Left { l } else { r };
                    f.check(&syl.element)?;
                    if syl.element.is_identity() {
                        return Err(Error::Structural("trivial syllable".into()));
                    }
                }
                Ok(())
            }
            _ => Err(Error::Structural("element shape does not match the spec".into())),
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        element::multiply(self, a, b)
    }

    pub fn invert(&self, a: &Element) -> Element {
        element::invert(a)
    }

    /// Right multiplication by a single symbol.
    pub fn mul_symbol(&self, a: &Element, s: Symbol) -> Element {
        element::multiply(self, a, &self.symbol_element(s))
    }

    /// Parses a word such as `a b^-1 a^3` and reduces it.
    pub fn word_to_element(&self, word: &str) -> Result<Element> {
        let syms = parse::parse_word(self, word)?;
        Ok(self.symbols_to_element(&syms))
    }

    pub fn symbols_to_element(&self, syms: &[Symbol]) -> Element {
        let mut e = self.identity();
        for &s in syms {
            e = self.mul_symbol(&e, s);
        }
        e
    }

    /// The canonical word of a normal form, in global symbols.
    pub fn canonical_word(&self, e: &Element) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.push_word(e, 0, &mut out);
        out
    }

    fn push_word(&self, e: &Element, offset: usize, out: &mut Vec<Symbol>) {
        match e {
            Element::Free(w) => {
                out.extend(w.iter().map(|s| Symbol::new(s.generator() + offset, s.is_inverse())))
            }
            Element::Abelian(v) => {
                for (i, x) in v.iter().enumerate() {
                    let n = num_traits::ToPrimitive::to_u64(&x.magnitude().clone()).unwrap_or(u64::MAX);
                    let s = Symbol::new(offset + i, x.sign() == num_bigint::Sign::Minus);
                    out.extend(std::iter::repeat(s).take(n as usize));
                }
            }
            Element::Product(syls) => {
                let left_rank = match self {
                    GroupSpec::FreeProduct(l, _) => l.rank(),
                    _ => 0,
                };
                for syl in syls {
                    let (spec, off) = match syl.side {
                        Side::Left => (self.factor(Side::Left), offset),
                        Side::Right => (self.factor(Side::Right), offset + left_rank),
                    };
                    spec.push_word(&syl.element, off, out);
                }
            }
        }
    }

    /// Word length of the normal form, which is the distance to the identity.
    pub fn word_length(&self, e: &Element) -> usize {
        element::length(e)
    }

    /// Lexicographic order on canonical words.
    pub fn lex_cmp(&self, a: &Element, b: &Element) -> Ordering {
        self.canonical_word(a).cmp(&self.canonical_word(b))
    }

    /// Shortlex order on canonical words.
    pub fn shortlex_cmp(&self, a: &Element, b: &Element) -> Ordering {
        let (wa, wb) = (self.canonical_word(a), self.canonical_word(b));
        wa.len().cmp(&wb.len()).then_with(|| wa.cmp(&wb))
    }

    /// Renders a normal form with powers collapsed, e.g. `a^2 b^-1`. The
    /// identity renders as `1`.
    pub fn format_element(&self, e: &Element) -> String {
        self.format_word(&self.canonical_word(e))
    }

    pub fn format_word(&self, w: &[Symbol]) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        let labels = self.labels();
        let mut parts = Vec::new();
        let mut i = 0;
        while i < w.len() {
            let mut j = i;
            while j < w.len() && w[j] == w[i] {
                j += 1;
            }
            let n = (j - i) as i64 * if w[i].is_inverse() { -1 } else { 1 };
            let l = &labels[w[i].generator()];
            parts.push(if n == 1 { l.clone() } else { format!("{l}^{n}") });
            i = j;
        }
        parts.join(" ")
    }

    /// Splits `e = rep * tail` where `tail` is the longest suffix lying in the
    /// given leaf. `rep` is then the shortlex-least element of `e * Leaf`.
    pub fn split_leaf_suffix(&self, e: &Element, leaf: &Leaf) -> (Element, Element) {
        element::split_suffix(self, e, &leaf.path)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Free { labels } => write!(f, "free({})", labels.join(",")),
            GroupSpec::FreeAbelian { labels } => write!(f, "abelian({})", labels.join(",")),
            GroupSpec::FreeProduct(l, r) => write!(f, "product({l},{r})"),
        }
    }
}

impl serde::Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GroupSpec::parse(&s).map_err(serde::de::Error::custom)
    }
}
