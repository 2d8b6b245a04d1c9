use super::{GroupSpec, Symbol};
use crate::error::{Error, Result};

pub(super) fn is_label(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

enum RawLabels {
    Named(Vec<String>),
    Rank(usize),
}

enum Raw {
    Free(RawLabels),
    Abelian(RawLabels),
    Product(Box<Raw>, Box<Raw>),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn error(&self, what: &str) -> Error {
        Error::Config(format!("group spec: {what} at byte {}", self.pos))
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len()
            && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an identifier"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.pos]).into_owned())
    }

    fn group(&mut self) -> Result<Raw> {
        let head = self.ident()?;
        self.expect(b'(')?;
        let raw = match head.as_str() {
            "free" | "F" => Raw::Free(self.labels()?),
            "abelian" | "Z" => Raw::Abelian(self.labels()?),
            "product" => {
                let l = self.group()?;
                self.expect(b',')?;
                let r = self.group()?;
                Raw::Product(Box::new(l), Box::new(r))
            }
            other => return Err(self.error(&format!("unknown constructor `{other}`"))),
        };
        self.expect(b')')?;
        Ok(raw)
    }

    fn labels(&mut self) -> Result<RawLabels> {
        let first = self.ident()?;
        if let Ok(n) = first.parse::<usize>() {
            return Ok(RawLabels::Rank(n));
        }
        let mut v = vec![first];
        loop {
            self.skip_ws();
            if self.s.get(self.pos) == Some(&b',') {
                self.pos += 1;
                v.push(self.ident()?);
            } else {
                return Ok(RawLabels::Named(v));
            }
        }
    }
}

fn explicit_labels(raw: &Raw, out: &mut Vec<String>) {
    match raw {
        Raw::Free(RawLabels::Named(v)) | Raw::Abelian(RawLabels::Named(v)) => {
            out.extend(v.iter().cloned())
        }
        Raw::Product(l, r) => {
            explicit_labels(l, out);
            explicit_labels(r, out);
        }
        _ => {}
    }
}

fn fresh_labels(n: usize, taken: &mut Vec<String>) -> Vec<String> {
    let mut v = Vec::with_capacity(n);
    let mut k = 0usize;
    while v.len() < n {
        let candidate = if k < 26 {
            ((b'a' + k as u8) as char).to_string()
        } else {
            format!("x{}", k - 26)
        };
        k += 1;
        if !taken.contains(&candidate) {
            taken.push(candidate.clone());
            v.push(candidate);
        }
    }
    v
}

fn build(raw: Raw, taken: &mut Vec<String>) -> GroupSpec {
    let resolve = |l: RawLabels, taken: &mut Vec<String>| match l {
        RawLabels::Named(v) => v,
        RawLabels::Rank(n) => fresh_labels(n, taken),
    };
    match raw {
        Raw::Free(l) => GroupSpec::Free {
            labels: resolve(l, taken),
        },
        Raw::Abelian(l) => GroupSpec::FreeAbelian {
            labels: resolve(l, taken),
        },
        Raw::Product(l, r) => {
            let l = build(*l, taken);
            let r = build(*r, taken);
            GroupSpec::FreeProduct(Box::new(l), Box::new(r))
        }
    }
}

/// Leaves given by rank receive fresh single-letter labels in declaration
/// order, skipping labels that are spelled out elsewhere.
pub(super) fn parse_group(text: &str) -> Result<GroupSpec> {
    let mut p = Parser {
        s: text.as_bytes(),
        pos: 0,
    };
    let raw = p.group()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error("trailing input"));
    }
    let mut taken = Vec::new();
    explicit_labels(&raw, &mut taken);
    Ok(build(raw, &mut taken))
}

/// Exponent of a pattern token: a literal power or a multiple of the family
/// parameter `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Exponent {
    Fixed(i64),
    Param(i64),
}

pub(crate) fn tokenize(spec: &GroupSpec, text: &str) -> Result<Vec<(usize, Exponent)>> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let tok = tok.replace('⁻', "^-").replace('¹', "1");
        let (label, exp) = match tok.split_once('^') {
            None => (tok.as_str(), Exponent::Fixed(1)),
            Some((l, e)) => (l, parse_exponent(e)?),
        };
        let g = spec
            .generator_index(label)
            .ok_or_else(|| Error::Input(format!("unknown generator `{label}`")))?;
        out.push((g, exp));
    }
    Ok(out)
}

fn parse_exponent(e: &str) -> Result<Exponent> {
    let bad = || Error::Input(format!("bad exponent `{e}`"));
    if let Ok(k) = e.parse::<i64>() {
        return Ok(Exponent::Fixed(k));
    }
    let (sign, body) = match e.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, e),
    };
    let coeff = body.strip_suffix('n').ok_or_else(bad)?;
    let c = if coeff.is_empty() {
        1
    } else {
        coeff.parse::<i64>().map_err(|_| bad())?
    };
    Ok(Exponent::Param(sign * c))
}

pub(crate) fn expand(tokens: &[(usize, Exponent)], n: i64) -> Vec<Symbol> {
    let mut out = Vec::new();
    for &(g, e) in tokens {
        let k = match e {
            Exponent::Fixed(k) => k,
            Exponent::Param(c) => c * n,
        };
        out.extend(std::iter::repeat(Symbol::new(g, k < 0)).take(k.unsigned_abs() as usize));
    }
    out
}

pub(super) fn parse_word(spec: &GroupSpec, text: &str) -> Result<Vec<Symbol>> {
    let tokens = tokenize(spec, text)?;
    if tokens.iter().any(|(_, e)| matches!(e, Exponent::Param(_))) {
        return Err(Error::Input("word contains the family parameter `n`".into()));
    }
    Ok(expand(&tokens, 0))
}
