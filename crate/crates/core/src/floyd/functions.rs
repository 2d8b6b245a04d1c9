use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Parses `3`, `-2`, `3/4` or a finite decimal such as `1.5`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("`{s}` is not a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((i, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{i}{frac}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(digits, scale));
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

/// Renders as `p/q` with `q >= 1`, including integers (`2/1`).
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn parse_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let s = s.trim();
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(str::trim).collect()
    };
    Some((s[..open].trim(), args))
}

/// Scaling functions `f` with `f_n` exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalingFunction {
    /// `f_n = mu^n` with `0 < mu < 1`.
    Exponential { mu: BigRational },
    /// `f_n = (n + 1)^(-exponent)` with an integer exponent above 3.
    Polynomial { exponent: u32 },
}

impl ScalingFunction {
    pub fn exponential(mu: BigRational) -> Result<Self> {
        if !(mu.is_positive() && mu < BigRational::one()) {
            return Err(Error::Config(format!(
                "exponential scaling needs 0 < mu < 1, got {mu}"
            )));
        }
        Ok(ScalingFunction::Exponential { mu })
    }

    pub fn polynomial(exponent: u32) -> Result<Self> {
        if exponent <= 3 {
            return Err(Error::Config(format!(
                "polynomial scaling needs an exponent above 3, got {exponent}"
            )));
        }
        Ok(ScalingFunction::Polynomial { exponent })
    }

    /// `exp(1/2)` or `poly(4)`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad scaling function `{s}`"));
        let (head, args) = parse_call(s).ok_or_else(bad)?;
        match (head, args.as_slice()) {
            ("exp", [mu]) => ScalingFunction::exponential(parse_rational(mu)?),
            ("poly", [k]) => {
                let q = parse_rational(k)?;
                if !q.is_integer() {
                    return Err(Error::Config(format!(
                        "polynomial scaling exponent must be an integer, got {k}"
                    )));
                }
                ScalingFunction::polynomial(q.to_integer().to_u32().ok_or_else(bad)?)
            }
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, n: u64) -> BigRational {
        match self {
            ScalingFunction::Exponential { mu } => num_traits::pow(mu.clone(), n as usize),
            ScalingFunction::Polynomial { exponent } => BigRational::new(
                BigInt::one(),
                num_traits::pow(BigInt::from(n + 1), *exponent as usize),
            ),
        }
    }

    /// The constant `lambda` with `f_{n+1} >= lambda f_n`.
    pub fn decay(&self) -> BigRational {
        match self {
            ScalingFunction::Exponential { mu } => mu.clone(),
            ScalingFunction::Polynomial { exponent } => {
                BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(2), *exponent as usize))
            }
        }
    }
}

impl fmt::Display for ScalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingFunction::Exponential { mu } => write!(f, "exp({mu})"),
            ScalingFunction::Polynomial { exponent } => write!(f, "poly({exponent})"),
        }
    }
}

/// Distortion functions: nondecreasing with `alpha_n >= n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistortionFunction {
    Identity,
    /// `C n + D`.
    Affine { c: BigRational, d: BigRational },
    /// `a n^2 + b n + c`.
    Quadratic { a: BigRational, b: BigRational, c: BigRational },
    /// `base^n`.
    Exponential { base: BigRational },
}

impl DistortionFunction {
    pub fn affine(c: BigRational, d: BigRational) -> Result<Self> {
        if c < BigRational::one() || d.is_negative() {
            return Err(Error::Config(format!(
                "affine distortion {c} n + {d} needs C >= 1 and D >= 0"
            )));
        }
        Ok(DistortionFunction::Affine { c, d })
    }

    pub fn quadratic(a: BigRational, b: BigRational, c: BigRational) -> Result<Self> {
        let bad = |why: &str| {
            Err(Error::Config(format!(
                "quadratic distortion {a} n^2 + {b} n + {c}: {why}"
            )))
        };
        if !a.is_positive() {
            return bad("leading coefficient must be positive");
        }
        if c.is_negative() {
            return bad("alpha_0 must be nonnegative");
        }
        if &a + &b < BigRational::zero() {
            return bad("not nondecreasing on the naturals");
        }
        // a n^2 + (b - 1) n + c >= 0 on the naturals: test around the vertex.
        let one = BigRational::one();
        let vertex = (&one - &b) / (int(2) * &a);
        let mut probes = vec![0i64, 1];
        if vertex.is_positive() {
            let fl = vertex.floor().to_integer().to_i64().unwrap_or(i64::MAX - 1);
            probes.extend([fl, fl + 1]);
        }
        for n in probes {
            let n = int(n);
            if &a * &n * &n + (&b - &one) * &n + &c < BigRational::zero() {
                return bad("alpha_n < n somewhere");
            }
        }
        Ok(DistortionFunction::Quadratic { a, b, c })
    }

    pub fn exponential(base: BigRational) -> Result<Self> {
        let one = BigRational::one();
        if base <= one {
            return Err(Error::Config(format!("exponential distortion needs base > 1, got {base}")));
        }
        // Once base^n >= n and base^n (base - 1) >= 1, the gap only grows.
        let mut p = one.clone();
        let mut n = 0i64;
        loop {
            if p < int(n) {
                return Err(Error::Config(format!(
                    "exponential distortion {base}^n drops below n at n = {n}"
                )));
            }
            if &p * (&base - &one) >= one {
                break;
            }
            p = &p * &base;
            n += 1;
        }
        Ok(DistortionFunction::Exponential { base })
    }

    /// `id`, `affine(C,D)`, `quadratic(a,b,c)` or `exp(base)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "id" || s == "identity" {
            return Ok(DistortionFunction::Identity);
        }
        let bad = || Error::Config(format!("bad distortion function `{s}`"));
        let (head, args) = parse_call(s).ok_or_else(bad)?;
        let nums: Vec<BigRational> = args.iter().map(|a| parse_rational(a)).collect::<Result<_>>()?;
        match (head, nums.as_slice()) {
            ("affine", [c, d]) => DistortionFunction::affine(c.clone(), d.clone()),
            ("quadratic", [a, b, c]) => DistortionFunction::quadratic(a.clone(), b.clone(), c.clone()),
            ("exp", [base]) => DistortionFunction::exponential(base.clone()),
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, n: u64) -> BigRational {
        let x = int(n as i64);
        match self {
            DistortionFunction::Identity => x,
            DistortionFunction::Affine { c, d } => c * x + d,
            DistortionFunction::Quadratic { a, b, c } => a * &x * &x + b * &x + c,
            DistortionFunction::Exponential { base } => num_traits::pow(base.clone(), n as usize),
        }
    }

    /// `floor(alpha_n)`, saturating at `u64::MAX`.
    pub fn floor_at(&self, n: u64) -> u64 {
        match self {
            DistortionFunction::Identity => n,
            DistortionFunction::Exponential { .. } if n > 4096 => u64::MAX,
            _ => self.eval(n).floor().to_integer().to_u64().unwrap_or(u64::MAX),
        }
    }

    /// `floor(alpha_n)` for `n = 0..=max`.
    pub fn floor_table(&self, max: u64) -> Vec<u64> {
        (0..=max).map(|n| self.floor_at(n)).collect()
    }

    /// Degree for polynomial families, `None` for exponential distortion.
    pub fn degree(&self) -> Option<u32> {
        match self {
            DistortionFunction::Identity | DistortionFunction::Affine { .. } => Some(1),
            DistortionFunction::Quadratic { .. } => Some(2),
            DistortionFunction::Exponential { .. } => None,
        }
    }

    /// Coefficients of `s -> alpha_{2s+1}` as a polynomial in `s`, lowest
    /// degree first.
    pub(crate) fn odd_polynomial(&self) -> Option<[BigRational; 3]> {
        let z = BigRational::zero;
        match self {
            DistortionFunction::Identity => Some([int(1), int(2), z()]),
            DistortionFunction::Affine { c, d } => Some([c + d, c * int(2), z()]),
            DistortionFunction::Quadratic { a, b, c } => {
                Some([a + b + c, a * int(4) + b * int(2), a * int(4)])
            }
            DistortionFunction::Exponential { .. } => None,
        }
    }
}

impl fmt::Display for DistortionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistortionFunction::Identity => write!(f, "id"),
            DistortionFunction::Affine { c, d } => write!(f, "affine({c},{d})"),
            DistortionFunction::Quadratic { a, b, c } => write!(f, "quadratic({a},{b},{c})"),
            DistortionFunction::Exponential { base } => write!(f, "exp({base})"),
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl serde::Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }
        impl<'de> serde::Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <$t>::parse(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(ScalingFunction);
string_serde!(DistortionFunction);
