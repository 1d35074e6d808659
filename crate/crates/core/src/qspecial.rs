//! q-gamma and q-polygamma functions evaluated from their product and
//! Lambert-type series representations, with certified truncation bounds.
//!
//! For `0 < q < 1` the digamma analogue is
//! `psi_q(x) = -ln(1-q) + ln q * sum_{n>=1} q^{nx} / (1 - q^n)` and for `q > 1`
//! it is `-ln(q-1) + ln q * (x - 1/2 - sum_{n>=1} q^{-nx} / (1 - q^{-n}))`.
//! Every series here has the shape `sum n^m p^{nx} / (1 - p^n)` with
//! `0 < p < 1`, whose successive-term ratio is bounded by `((n+1)/n)^m p^x`,
//! which yields a rigorous geometric tail bound.

use std::sync::OnceLock;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Error, Result};

/// Evaluators refuse `|q - 1|` below this distance.
pub const Q_GUARD: f64 = 1e-4;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Accuracy and cost limits shared by every analytic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBudget {
    /// Target relative error of returned values.
    pub rel_tol: f64,
    /// Requested working precision in decimal digits.
    pub digits: u32,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        PrecisionBudget {
            rel_tol: 1e-20,
            digits: 50,
            max_terms: 100_000,
        }
    }
}

impl PrecisionBudget {
    pub fn new(rel_tol: f64, digits: u32, max_terms: usize) -> Result<Self> {
        let b = PrecisionBudget {
            rel_tol,
            digits,
            max_terms,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::from(DomainError::Budget(msg)));
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad(format!("rel_tol must lie in (0, 1), got {:e}", self.rel_tol));
        }
        if self.digits < 15 {
            return bad(format!("digits must be at least 15, got {}", self.digits));
        }
        if self.max_terms == 0 || self.max_terms > u32::MAX as usize {
            return bad(format!("max_terms must be in [1, 2^32), got {}", self.max_terms));
        }
        Ok(())
    }

    /// Decimal digits actually carried: `max(digits, 2*ceil(-log10 rel_tol) + 10)`.
    pub fn working_digits(&self) -> u32 {
        let needed = 2 * (-self.rel_tol.log10()).ceil().max(0.0) as u32 + 10;
        self.digits.max(needed)
    }

    /// Working precision in bits.
    pub fn prec(&self) -> u32 {
        (f64::from(self.working_digits()) * LOG2_10).ceil() as u32 + 8
    }

    pub fn tol(&self) -> Float {
        Float::with_val(self.prec(), self.rel_tol)
    }
}

/// Evaluation point `(q, x)` with `q > 0`, `|q - 1| >= Q_GUARD`, `x > 0`.
///
/// Both coordinates are kept as MPFR values so that `1/q` can be formed to
/// working precision (`0.1` is not an `f64`).
#[derive(Debug, Clone, PartialEq)]
pub struct QPoint {
    q: Float,
    x: Float,
}

impl QPoint {
    pub fn new(q: f64, x: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(DomainError::QNotPositive(q.to_string()).into());
        }
        if !x.is_finite() {
            return Err(DomainError::XNotPositive(x.to_string()).into());
        }
        Self::from_floats(Float::with_val(53, q), Float::with_val(53, x))
    }

    pub fn from_floats(q: Float, x: Float) -> Result<Self> {
        check_q(&q)?;
        if !(x.is_finite() && x > 0) {
            return Err(DomainError::XNotPositive(x.to_string()).into());
        }
        Ok(QPoint { q, x })
    }

    pub fn q(&self) -> &Float {
        &self.q
    }

    pub fn x(&self) -> &Float {
        &self.x
    }

    pub fn below_one(&self) -> bool {
        self.q < 1
    }

    /// Same `x`, base `1/q` computed at `prec` bits.
    pub fn reflected(&self, prec: u32) -> QPoint {
        let q = Float::with_val(prec.max(self.q.prec()), self.q.recip_ref());
        QPoint { q, x: self.x.clone() }
    }

    pub fn with_x(&self, x: Float) -> Result<QPoint> {
        QPoint::from_floats(self.q.clone(), x)
    }
}

/// Validates a base `q`: positive, finite, outside the guard band around 1.
pub fn check_q(q: &Float) -> Result<()> {
    if !(q.is_finite() && *q > 0) {
        return Err(DomainError::QNotPositive(q.to_string()).into());
    }
    // The guard is compared with a relative slack of 1e-12 so that decimal
    // inputs such as 0.9999, whose binary value sits a hair inside the band,
    // are accepted.
    let dist = Float::with_val(q.prec().max(64), q - 1u32).abs();
    if dist.to_f64() < Q_GUARD * (1.0 - 1e-12) {
        return Err(DomainError::QNearOne {
            q: q.to_string(),
            guard: Q_GUARD,
        }
        .into());
    }
    Ok(())
}

/// A series result: value, certified bound on the truncation error, and the
/// number of terms summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub value: Float,
    pub tail_bound: Float,
    pub terms_used: usize,
}

/// Per-evaluation constants: working precision, `ln q`, and the geometric
/// base `p = min(q, 1/q)` of the series.
pub(crate) struct QSetup {
    pub prec: u32,
    pub ln_q: Float,
    pub p: Float,
    pub above_one: bool,
}

impl QSetup {
    pub fn new(q: &Float, b: &PrecisionBudget) -> Result<Self> {
        b.validate()?;
        check_q(q)?;
        let prec = b.prec();
        let q = Float::with_val(prec, q);
        let ln_q = Float::with_val(prec, q.ln_ref());
        let above_one = q > 1;
        let p = if above_one { q.recip() } else { q };
        Ok(QSetup {
            prec,
            ln_q,
            p,
            above_one,
        })
    }
}

/// Sums `offset + scale * sum_{n>=1} n^m p^{nx} / (1 - p^n)` and stops at the
/// first `n` whose certified tail, scaled, is below `rel_tol * |partial value|`.
pub(crate) fn lambert_sum(
    p: &Float,
    x: &Float,
    m: u32,
    offset: &Float,
    scale: &Float,
    b: &PrecisionBudget,
) -> Result<SeriesValue> {
    let prec = b.prec();
    let tol = b.tol();
    let px = Float::with_val(prec, p.pow(x));
    let abs_scale = Float::with_val(prec, scale.abs_ref());
    let mut pn = Float::with_val(prec, p);
    let mut pnx = px.clone();
    let mut sum = Float::new(prec);
    let mut last_tail = Float::with_val(prec, rug::float::Special::Infinity);
    for n in 1..=b.max_terms {
        let n32 = n as u32;
        let denom = Float::with_val(prec, 1u32 - &pn);
        let mut term = Float::with_val(prec, &pnx / &denom);
        if m > 0 {
            term *= Float::with_val(prec, Float::u_pow_u(n32, m));
        }
        sum += &term;

        // Ratio of every later term to its predecessor is at most rho.
        let mut rho = Float::with_val(prec, n32 + 1) / n32;
        if m > 0 {
            rho = rho.pow(m);
        }
        rho *= &px;
        if rho < 1 {
            let tail = Float::with_val(prec, &term * &rho) / Float::with_val(prec, 1u32 - &rho);
            let scaled_tail = Float::with_val(prec, &abs_scale * &tail);
            let value = Float::with_val(prec, scale * &sum) + offset;
            if scaled_tail <= Float::with_val(prec, value.abs_ref()) * &tol {
                return Ok(SeriesValue {
                    value,
                    tail_bound: scaled_tail,
                    terms_used: n,
                });
            }
            last_tail = scaled_tail;
        }
        pn *= p;
        pnx *= &px;
    }
    Err(Error::NonConvergence {
        max_terms: b.max_terms,
        tail_bound: last_tail.to_string_radix(10, Some(6)),
    })
}

/// `Gamma_q(x)` from the infinite-product definition, summed in log form.
pub fn gamma_q(p: &QPoint, b: &PrecisionBudget) -> Result<SeriesValue> {
    let setup = QSetup::new(p.q(), b)?;
    let prec = setup.prec;
    let base = &setup.p;
    let x = Float::with_val(prec, p.x());
    let one_minus_x = Float::with_val(prec, 1u32 - &x);

    let mut log_value = if setup.above_one {
        // (q-1)^{1-x} q^{x(x-1)/2}
        let q = Float::with_val(prec, base.recip_ref());
        let lq1 = Float::with_val(prec, &q - 1u32).ln();
        let half = Float::with_val(prec, &x * Float::with_val(prec, &x - 1u32)) / 2u32;
        lq1 * &one_minus_x + half * &setup.ln_q
    } else {
        // (1-q)^{1-x}
        Float::with_val(prec, 1u32 - base).ln() * &one_minus_x
    };

    let px = Float::with_val(prec, base.pow(&x));
    let gap = Float::with_val(prec, base - &px).abs();
    let one_minus_base = Float::with_val(prec, 1u32 - base);
    let min_exp = if x < 1 { x.clone() } else { Float::with_val(prec, 1u32) };
    let tol = b.tol();

    // n-th factor is (1 - p^{n+1}) / (1 - p^{n+x}); pn tracks p^n.
    let mut pn = Float::with_val(prec, 1u32);
    let mut last = Float::with_val(prec, rug::float::Special::Infinity);
    for n in 0..b.max_terms {
        let a = Float::with_val(prec, &pn * base);
        let c = Float::with_val(prec, &pn * &px);
        let la = Float::with_val(prec, -&a).ln_1p();
        let lc = Float::with_val(prec, -&c).ln_1p();
        log_value += la - lc;

        // sum_{k>n} |log factor_k| <= p^{n+1} |p - p^x| / ((1-p)(1 - p^{n+1+min(1,x)}))
        let next = Float::with_val(prec, &a);
        let mut expo = Float::with_val(prec, &min_exp + (n as u32 + 1));
        expo = Float::with_val(prec, base.pow(&expo));
        let delta = Float::with_val(prec, &next * &gap)
            / (Float::with_val(prec, &one_minus_base * Float::with_val(prec, 1u32 - &expo)));
        let rel = Float::with_val(prec, delta.exp_m1_ref());
        if rel <= tol {
            let value = log_value.exp();
            let tail_bound = Float::with_val(prec, value.abs_ref()) * rel;
            return Ok(SeriesValue {
                value,
                tail_bound,
                terms_used: n + 1,
            });
        }
        last = rel;
        pn *= base;
    }
    Err(Error::NonConvergence {
        max_terms: b.max_terms,
        tail_bound: last.to_string_radix(10, Some(6)),
    })
}

/// The q-digamma function `psi_q(x) = d/dx ln Gamma_q(x)`.
pub fn psi_q(p: &QPoint, b: &PrecisionBudget) -> Result<SeriesValue> {
    let setup = QSetup::new(p.q(), b)?;
    let prec = setup.prec;
    let x = Float::with_val(prec, p.x());
    if setup.above_one {
        let q = Float::with_val(prec, setup.p.recip_ref());
        let lead = Float::with_val(prec, &x - 0.5f64) * &setup.ln_q;
        let offset = lead - Float::with_val(prec, &q - 1u32).ln();
        let scale = Float::with_val(prec, -&setup.ln_q);
        lambert_sum(&setup.p, &x, 0, &offset, &scale, b)
    } else {
        let offset = -Float::with_val(prec, 1u32 - &setup.p).ln();
        lambert_sum(&setup.p, &x, 0, &offset, &setup.ln_q, b)
    }
}

/// The q-polygamma function `psi_q^{(m)}(x)`, `m >= 1`.
pub fn psi_q_deriv(p: &QPoint, m: u32, b: &PrecisionBudget) -> Result<SeriesValue> {
    if m == 0 {
        return Err(DomainError::Argument("derivative order must be at least 1".into()).into());
    }
    let setup = QSetup::new(p.q(), b)?;
    let prec = setup.prec;
    let x = Float::with_val(prec, p.x());
    let lm1 = Float::with_val(prec, (&setup.ln_q).pow(m + 1));
    if setup.above_one {
        let offset = if m == 1 {
            setup.ln_q.clone()
        } else {
            Float::new(prec)
        };
        let scale = if m % 2 == 1 { lm1 } else { -lm1 };
        lambert_sum(&setup.p, &x, m, &offset, &scale, b)
    } else {
        lambert_sum(&setup.p, &x, m, &Float::new(prec), &lm1, b)
    }
}

/// `psi_q^{(order)}` for `order >= 0`, with order 0 the digamma analogue.
pub fn polygamma_q(p: &QPoint, order: u32, b: &PrecisionBudget) -> Result<SeriesValue> {
    if order == 0 {
        psi_q(p, b)
    } else {
        psi_q_deriv(p, order, b)
    }
}

const CLASSICAL_PREC: u32 = 192;
const ASYMPTOTIC_TERMS: usize = 28;

fn bernoulli_even() -> &'static [Rational] {
    static TABLE: OnceLock<Vec<Rational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // sum_{k=0}^{n} C(n+1, k) B_k = 0
        let top = 2 * ASYMPTOTIC_TERMS + 1;
        let mut bern: Vec<Rational> = vec![Rational::from(1)];
        for n in 1..=top {
            let mut acc = Rational::new();
            for (k, bk) in bern.iter().enumerate() {
                let binom = Integer::from(Integer::binomial_u(n as u32 + 1, k as u32));
                acc += Rational::from(binom) * bk;
            }
            bern.push(-acc / Rational::from(n as u32 + 1));
        }
        (1..=ASYMPTOTIC_TERMS).map(|k| bern[2 * k].clone()).collect()
    })
}

/// Classical `psi^{(m)}(x)` (digamma for `m = 0`) by upward recurrence to
/// `x >= 40 + m` followed by the Bernoulli asymptotic expansion.
/// Accurate to well beyond 30 digits; used as the `q -> 1` reference.
pub fn psi_classical_deriv(x: f64, m: u32) -> Result<Float> {
    if !(x.is_finite() && x > 0.0) {
        return Err(DomainError::XNotPositive(x.to_string()).into());
    }
    let prec = CLASSICAL_PREC;
    let threshold = 40.0 + f64::from(m);
    let m_fact = Float::with_val(prec, Integer::from(Integer::factorial(m)));
    let mut y = Float::with_val(prec, x);
    // psi^{(m)}(x) = psi^{(m)}(x+1) - (-1)^m m! / x^{m+1}
    let mut shift = Float::new(prec);
    while y < threshold {
        shift += Float::with_val(prec, (&y).pow(m + 1)).recip();
        y += 1u32;
    }
    shift *= &m_fact;
    if m.is_multiple_of(2) {
        shift = -shift;
    }

    let inv = Float::with_val(prec, y.recip_ref());
    let inv2 = Float::with_val(prec, inv.square_ref());
    let asym = if m == 0 {
        let mut v = Float::with_val(prec, y.ln_ref()) - Float::with_val(prec, &inv / 2u32);
        let mut pw = inv2.clone();
        for (k, b2k) in bernoulli_even().iter().enumerate() {
            let two_k = 2 * (k as u32 + 1);
            v -= Float::with_val(prec, b2k) * &pw / two_k;
            pw *= &inv2;
        }
        v
    } else {
        let m_minus_fact = Float::with_val(prec, Integer::from(Integer::factorial(m - 1)));
        let inv_m = Float::with_val(prec, (&inv).pow(m));
        let mut v = m_minus_fact * &inv_m + Float::with_val(prec, &m_fact * &inv_m) * &inv / 2u32;
        let mut pw = Float::with_val(prec, &inv_m * &inv2);
        for (k, b2k) in bernoulli_even().iter().enumerate() {
            let two_k = 2 * (k as u32 + 1);
            // (2k+m-1)! / (2k)!
            let mut ratio = Integer::from(1);
            for f in (two_k + 1)..(two_k + m) {
                ratio *= f;
            }
            v += Float::with_val(prec, b2k) * Float::with_val(prec, &ratio) * &pw;
            pw *= &inv2;
        }
        if m.is_multiple_of(2) {
            -v
        } else {
            v
        }
    };
    Ok(asym + shift)
}
