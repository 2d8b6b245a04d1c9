use super::{GroupSpec, Symbol};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A nontrivial element of one factor of a free product.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Syllable {
    pub side: Side,
    pub element: Element,
}

/// Normal form of a group element. Letters of a free word use symbols local
/// to their leaf.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Free(Vec<Symbol>),
    Abelian(Vec<BigInt>),
    Product(Vec<Syllable>),
}

impl Element {
    pub fn is_identity(&self) -> bool {
        match self {
            Element::Free(w) => w.is_empty(),
            Element::Abelian(v) => v.iter().all(Zero::is_zero),
            Element::Product(s) => s.is_empty(),
        }
    }
}

pub(super) fn length(e: &Element) -> usize {
    match e {
        Element::Free(w) => w.len(),
        Element::Abelian(v) => v
            .iter()
            .map(|x| x.abs().to_usize().unwrap_or(usize::MAX))
            .fold(0usize, |a, b| a.saturating_add(b)),
        Element::Product(s) => s.iter().map(|y| length(&y.element)).sum(),
    }
}

pub(super) fn multiply(spec: &GroupSpec, a: &Element, b: &Element) -> Element {
    match (a, b) {
        (Element::Free(x), Element::Free(y)) => {
            let mut out = x.clone();
            for &s in y {
                if out.last() == Some(&s.inverse()) {
                    out.pop();
                } else {
                    out.push(s);
                }
            }
            Element::Free(out)
        }
        (Element::Abelian(x), Element::Abelian(y)) => {
            Element::Abelian(x.iter().zip(y).map(|(p, q)| p + q).collect())
        }
        (Element::Product(x), Element::Product(y)) => {
            let mut out = x.clone();
            let mut i = 0;
            while i < y.len() {
                match out.last() {
                    Some(last) if last.side == y[i].side => {
                        let last = out.pop().expect("checked above");
                        let merged = multiply(spec.factor(last.side), &last.element, &y[i].element);
                        i += 1;
                        if !merged.is_identity() {
                            out.push(Syllable {
                                side: last.side,
                                element: merged,
                            });
                            break;
                        }
                    }
                    _ => break,
                }
            }
            out.extend(y[i..].iter().cloned());
            Element::Product(out)
        }
        _ => panic!("multiplying elements of different shapes"),
    }
}

pub(super) fn invert(a: &Element) -> Element {
    match a {
        Element::Free(w) => Element::Free(w.iter().rev().map(|s| s.inverse()).collect()),
        Element::Abelian(v) => Element::Abelian(v.iter().map(|x| -x).collect()),
        Element::Product(s) => Element::Product(
            s.iter()
                .rev()
                .map(|y| Syllable {
                    side: y.side,
                    element: invert(&y.element),
                })
                .collect(),
        ),
    }
}

pub(super) fn split_suffix(spec: &GroupSpec, e: &Element, path: &[Side]) -> (Element, Element) {
    let Some((&first, rest)) = path.split_first() else {
        return (spec.identity(), e.clone());
    };
    let factor = spec.factor(first);
    match e {
        Element::Product(syls) => match syls.last() {
            Some(last) if last.side == first => {
                let (inner_rep, tail) = split_suffix(factor, &last.element, rest);
                let mut rep = syls[..syls.len() - 1].to_vec();
                if !inner_rep.is_identity() {
                    rep.push(Syllable {
                        side: first,
                        element: inner_rep,
                    });
                }
                (Element::Product(rep), tail)
            }
            _ => (e.clone(), leaf_identity(factor, rest)),
        },
        _ => panic!("split_suffix path does not match the element"),
    }
}

fn leaf_identity(spec: &GroupSpec, path: &[Side]) -> Element {
    match path.split_first() {
        None => spec.identity(),
        Some((&s, rest)) => leaf_identity(spec.factor(s), rest),
    }
}
