use super::functions::{int, to_f64, DistortionFunction, ScalingFunction};
use crate::error::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

/// Which convergence test settled `sum alpha_{2n+1} f_n < inf`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "test", rename_all = "kebab-case")]
pub enum AppropriatenessTest {
    /// Polynomial distortion against geometric decay: ratio tends to `mu < 1`.
    PolynomialVsGeometric { degree: u32, mu: String },
    /// Exponential distortion against geometric decay: ratio is exactly
    /// `base^2 mu`.
    RatioTest { ratio: String },
    /// Polynomial distortion against polynomial decay: a p-series with
    /// `p = exponent - degree`.
    PSeries { p: u32 },
    /// Exponential distortion against polynomial decay: terms diverge.
    ExponentialDominates,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppropriatenessCertificate {
    pub appropriate: bool,
    #[serde(flatten)]
    pub test: AppropriatenessTest,
}

pub fn is_appropriate(f: &ScalingFunction, alpha: &DistortionFunction) -> AppropriatenessCertificate {
    use AppropriatenessTest::*;
    let (appropriate, test) = match (f, alpha) {
        (ScalingFunction::Exponential { mu }, DistortionFunction::Exponential { base }) => {
            let ratio = base * base * mu;
            (ratio < BigRational::one(), RatioTest { ratio: ratio.to_string() })
        }
        (ScalingFunction::Exponential { mu }, a) => (
            true,
            PolynomialVsGeometric {
                degree: a.degree().expect("polynomial family"),
                mu: mu.to_string(),
            },
        ),
        (ScalingFunction::Polynomial { .. }, DistortionFunction::Exponential { .. }) => {
            (false, ExponentialDominates)
        }
        (ScalingFunction::Polynomial { exponent }, a) => {
            let p = exponent - a.degree().expect("polynomial family");
            (p >= 2, PSeries { p })
        }
    };
    AppropriatenessCertificate { appropriate, test }
}

/// The supremum of bases `lambda` with `(mu^n, lambda^n)` appropriate,
/// `mu^(-1/2)`. It is not attained.
pub fn lambda0(f: &ScalingFunction) -> Result<f64> {
    match f {
        ScalingFunction::Exponential { mu } => Ok(to_f64(mu).powf(-0.5)),
        ScalingFunction::Polynomial { .. } => Err(Error::Input(
            "lambda0 is defined for exponential scaling only".into(),
        )),
    }
}

/// A value of the tail `sum_{s >= r} alpha_{2s+1} f_s`: exact, or a certified
/// upper bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Tail {
    Exact(BigRational),
    UpperBound(f64),
}

impl Tail {
    fn at_most(&self, x: &BigRational) -> bool {
        match self {
            Tail::Exact(t) => t <= x,
            Tail::UpperBound(u) => *u <= to_f64(x) * (1.0 - 4.0 * f64::EPSILON),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Tail::Exact(t) => to_f64(t),
            Tail::UpperBound(u) => *u,
        }
    }
}

enum Form {
    /// `mu^r * sum_t P(t + r) mu^t` in closed form.
    GeometricPolynomial { mu: BigRational, p: [BigRational; 3] },
    /// `base (base^2 mu)^r / (1 - base^2 mu)`.
    GeometricExponential { base: BigRational, ratio: BigRational },
    /// Terms `P(s) / (s + 1)^k`, bounded by `A (s + 1)^(d - k)`.
    PolynomialDecay { p: [f64; 3], a: f64, d: u32, k: u32 },
}

/// The Karlsson function `eps -> min { r : tail(r) <= eps / 2 }`.
pub struct Karlsson {
    f: ScalingFunction,
    alpha: DistortionFunction,
    form: Form,
}

impl Karlsson {
    pub fn new(f: &ScalingFunction, alpha: &DistortionFunction) -> Result<Self> {
        let cert = is_appropriate(f, alpha);
        if !cert.appropriate {
            return Err(Error::Input(format!("({f}, {alpha}) is not appropriate")));
        }
        let form = match (f, alpha) {
            (ScalingFunction::Exponential { mu }, DistortionFunction::Exponential { base }) => {
                Form::GeometricExponential {
                    base: base.clone(),
                    ratio: base * base * mu,
                }
            }
            (ScalingFunction::Exponential { mu }, a) => Form::GeometricPolynomial {
                mu: mu.clone(),
                p: a.odd_polynomial().expect("polynomial family"),
            },
            (ScalingFunction::Polynomial { exponent }, a) => {
                let p = a.odd_polynomial().expect("polynomial family");
                let d = a.degree().expect("polynomial family");
                // P(s) <= A (s + 1)^d once A dominates p_j / binom(d, j).
                let binom = |j: usize| if d == 2 && j == 1 { 2.0 } else { 1.0 };
                let pf: [f64; 3] = [to_f64(&p[0]), to_f64(&p[1]), to_f64(&p[2])];
                let a = (0..=d as usize)
                    .map(|j| pf[j] / binom(j))
                    .fold(0.0f64, f64::max)
                    * (1.0 + 1e-12);
                Form::PolynomialDecay { p: pf, a, d, k: *exponent }
            }
        };
        Ok(Karlsson {
            f: f.clone(),
            alpha: alpha.clone(),
            form,
        })
    }

    pub fn scaling(&self) -> &ScalingFunction {
        &self.f
    }

    pub fn distortion(&self) -> &DistortionFunction {
        &self.alpha
    }

    /// `sum_{s >= r} alpha_{2s+1} f_s`.
    pub fn tail(&self, r: u64) -> Tail {
        match &self.form {
            Form::GeometricPolynomial { mu, p } => {
                let one = BigRational::one();
                let q = &one - mu;
                let s0 = &one / &q;
                let s1 = mu / (&q * &q);
                let s2 = mu * (&one + mu) / (&q * &q * &q);
                let r = int(r as i64);
                // P(t + r) = c0 + c1 t + c2 t^2
                let c2 = p[2].clone();
                let c1 = &p[1] + int(2) * &p[2] * &r;
                let c0 = &p[0] + &p[1] * &r + &p[2] * &r * &r;
                let rr = r.to_integer().to_usize().expect("small r");
                Tail::Exact(num_traits::pow(mu.clone(), rr) * (c0 * s0 + c1 * s1 + c2 * s2))
            }
            Form::GeometricExponential { base, ratio } => {
                let rr = r as usize;
                Tail::Exact(base * num_traits::pow(ratio.clone(), rr) / (BigRational::one() - ratio))
            }
            Form::PolynomialDecay { .. } => Tail::UpperBound(self.poly_tail_upper(r, self.poly_cutoff(r))),
        }
    }

    fn poly_term(&self, s: u64) -> f64 {
        let Form::PolynomialDecay { p, k, .. } = &self.form else {
            unreachable!()
        };
        let x = s as f64;
        (p[0] + p[1] * x + p[2] * x * x) / (x + 1.0).powi(*k as i32)
    }

    /// Integral bound on `sum_{s >= n} A (s + 1)^(d - k)`, valid for `n >= 1`.
    fn poly_remainder(&self, n: u64) -> f64 {
        let Form::PolynomialDecay { a, d, k, .. } = &self.form else {
            unreachable!()
        };
        let e = (k - d) as f64;
        a * (n as f64).powf(1.0 - e) / (e - 1.0) * (1.0 + 1e-12)
    }

    fn poly_cutoff(&self, r: u64) -> u64 {
        (r.max(1) * 64).max(1024)
    }

    fn poly_tail_upper(&self, r: u64, n: u64) -> f64 {
        let mut sum = 0.0f64;
        for s in (r..n).rev() {
            sum += self.poly_term(s);
        }
        let slack = 1.0 + (n - r + 16) as f64 * f64::EPSILON * 4.0;
        (sum + self.poly_remainder(n)) * slack
    }

    /// `K(eps)`.
    pub fn eval(&self, eps: &BigRational) -> Result<u64> {
        if !eps.is_positive() {
            return Err(Error::Input(format!("Karlsson function needs eps > 0, got {eps}")));
        }
        let half = eps / int(2);
        match &self.form {
            Form::PolynomialDecay { .. } => self.eval_certified(&half),
            _ => {
                let mut r = 0u64;
                while !self.tail(r).at_most(&half) {
                    r += 1;
                }
                Ok(r)
            }
        }
    }

    /// Sums terms until the remainder bound is below `eps / 4`, then picks the
    /// least `r` whose certified tail fits under `eps / 2`.
    fn eval_certified(&self, half: &BigRational) -> Result<u64> {
        let quarter = to_f64(half) / 2.0;
        let mut n = 16u64;
        while self.poly_remainder(n) > quarter {
            n *= 2;
            if n > 1 << 26 {
                return Err(Error::resource(
                    "karlsson-terms",
                    format!("tail of ({}, {}) too slow for eps = {}", self.f, self.alpha, half * int(2)),
                ));
            }
        }
        let mut suffix = vec![0.0f64; n as usize + 1];
        for s in (0..n).rev() {
            suffix[s as usize] = suffix[s as usize + 1] + self.poly_term(s);
        }
        let rem = self.poly_remainder(n);
        let target = to_f64(half) * (1.0 - 4.0 * f64::EPSILON);
        for r in 0..=n {
            let slack = 1.0 + (n - r + 16) as f64 * f64::EPSILON * 4.0;
            if (suffix[r as usize] + rem) * slack <= target {
                return Ok(r);
            }
        }
        Ok(n)
    }

    /// Total sum `tail(0)`.
    pub fn total(&self) -> Tail {
        self.tail(0)
    }
}

pub fn karlsson(f: &ScalingFunction, alpha: &DistortionFunction, eps: &BigRational) -> Result<u64> {
    Karlsson::new(f, alpha)?.eval(eps)
}

/// Rows `(eps, K(eps))` for `eps = 2^-k`, `k` in the given range.
pub fn karlsson_table(
    f: &ScalingFunction,
    alpha: &DistortionFunction,
    ks: std::ops::RangeInclusive<i32>,
) -> Result<Vec<(BigRational, u64)>> {
    let k = Karlsson::new(f, alpha)?;
    ks.map(|j| {
        let eps = if j >= 0 {
            BigRational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), j as usize))
        } else {
            int(1i64 << (-j))
        };
        let v = k.eval(&eps)?;
        Ok((eps, v))
    })
    .collect()
}
