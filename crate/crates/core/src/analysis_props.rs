//! Analytic inequalities behind the coefficient positivity of `G_m`.
//!
//! With `0 < y < 1`:
//!
//! ```text
//! h(z; y, c)   = ln((1 - y^{zc}) / (1 - y^z))
//! h''(z; y, c) = (ln y)^2 y^z / (1 - y^z)^2 - (c ln y)^2 y^{zc} / (1 - y^{zc})^2
//! u(ln u)^2 / (1 - u)^2   increasing on (0, 1)
//! ```
//!
//! and the weight-ratio inequality, for `q > 1` and `1 <= j <= n-1`,
//!
//! ```text
//! (1 - q^{-jc})(1 - q^{-(n-j)c}) / ((1 - q^{-j})(1 - q^{-(n-j)}))  >=  c (1 - q^{-nc}) / (1 - q^{-n})
//! ```
//!
//! for `0 < c < 1`, reversed for `c > 1`.

use rug::Float;

use crate::combinatorics::{LemmaReport, Regime, Witness, WitnessValue};
use crate::error::{DomainError, Result};
use crate::qspecial::{check_q, PrecisionBudget};

impl From<&Float> for WitnessValue {
    fn from(v: &Float) -> Self {
        WitnessValue::Decimal {
            decimal: v.to_string_radix(10, Some(25)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioParams {
    y: f64,
    c: f64,
}

impl RatioParams {
    pub fn new(y: f64, c: f64) -> Result<Self> {
        if !(y > 0.0 && y < 1.0) {
            return Err(DomainError::Argument(format!("y must lie in (0,1), got {y}")).into());
        }
        if !(c > 0.0 && c.is_finite()) || c == 1.0 {
            return Err(DomainError::Argument(format!("c must be positive and != 1, got {c}")).into());
        }
        Ok(RatioParams { y, c })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

fn weight_at(u: &Float) -> Float {
    let prec = u.prec();
    let ln = Float::with_val(prec, u.ln_ref());
    let den = Float::with_val(prec, 1u32 - u).square();
    Float::with_val(prec, u * ln.square()) / den
}

/// `h(z; y, c)` and `h''(z; y, c)`.
pub fn h_second_deriv(z: f64, pr: &RatioParams, b: &PrecisionBudget) -> Result<(Float, Float)> {
    b.validate()?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(DomainError::XNotPositive(z.to_string()).into());
    }
    let prec = b.prec();
    let ln_y = Float::with_val(prec, pr.y).ln();
    let zf = Float::with_val(prec, z);
    let yz = Float::with_val(prec, &ln_y * &zf).exp();
    let yzc = (Float::with_val(prec, &ln_y * &zf) * pr.c).exp();
    let num = Float::with_val(prec, 1u32 - &yzc);
    let den = Float::with_val(prec, 1u32 - &yz);
    let h = (num / den).ln();
    // (ln y)^2 y^z/(1-y^z)^2 = weight(y^z)/z^2
    let z2 = Float::with_val(prec, zf.square_ref());
    let h_dd = (weight_at(&yz) - weight_at(&yzc)) / z2;
    Ok((h, h_dd))
}

/// `u (ln u)^2 / (1 - u)^2` at the default working precision.
pub fn weight_u(u: f64) -> Result<Float> {
    if !(u > 0.0 && u < 1.0) {
        return Err(DomainError::Argument(format!("u must lie in (0,1), got {u}")).into());
    }
    let prec = PrecisionBudget::default().prec();
    Ok(weight_at(&Float::with_val(prec, u)))
}

fn push(rep: &mut LemmaReport, holds: bool, check: &str, params: String, k: Option<u64>, lhs: &Float, rhs: &Float) {
    rep.checked += 1;
    if !holds {
        rep.violations.push(Witness {
            check: check.to_string(),
            params,
            k,
            lhs: lhs.into(),
            rhs: rhs.into(),
            regime: Regime::ProvenTheorem1,
        });
    }
}

/// Ratio weights `W(j) = w_j w_{n-j}` for `j = 1..n-1` and the right side
/// `c w_n`, with `w_j = (1 - p^{jc}) / (1 - p^j)` and `p = min(q, 1/q)`.
fn ratio_sides(n: u32, q: f64, c: f64, prec: u32) -> (Vec<Float>, Float) {
    let qf = Float::with_val(prec, q);
    let p = if qf > 1 { qf.recip() } else { qf };
    let ln_p = Float::with_val(prec, p.ln_ref());
    let w: Vec<Float> = (0..=n)
        .map(|j| {
            if j == 0 {
                return Float::new(prec);
            }
            let a = Float::with_val(prec, &ln_p * j);
            let num = Float::with_val(prec, 1u32 - (Float::with_val(prec, &a * c)).exp());
            let den = Float::with_val(prec, 1u32 - a.exp());
            num / den
        })
        .collect();
    let lhs = (1..n).map(|j| Float::with_val(prec, &w[j as usize] * &w[(n - j) as usize])).collect();
    let rhs = Float::with_val(prec, &w[n as usize] * c);
    (lhs, rhs)
}

/// Checks the weight-ratio inequality (reversed for `c > 1`) for every
/// `1 <= j <= n-1`, the `j <-> n-j` symmetry of its left side, and the
/// monotonicity of the left side over `j = 1..n/2` (nondecreasing for
/// `c < 1`, nonincreasing for `c > 1`). `0 < q < 1` is mapped to `1/q`.
pub fn verify_ratio_ineq(n: u32, q: f64, c: f64, b: &PrecisionBudget) -> Result<LemmaReport> {
    b.validate()?;
    check_q(&Float::with_val(64, q))?;
    if n < 2 {
        return Err(DomainError::Argument(format!("ratio inequality needs n >= 2, got {n}")).into());
    }
    if !(c > 0.0 && c.is_finite()) || c == 1.0 {
        return Err(DomainError::Argument(format!("c must be positive and != 1, got {c}")).into());
    }
    let prec = b.prec();
    let tol = b.tol();
    let (lhs, rhs) = ratio_sides(n, q, c, prec);
    let below = c < 1.0;
    let params = format!("n={n},q={q},c={c}");
    let mut rep = LemmaReport::new("ratio_inequality")
        .with_range("n", n)
        .with_range("q", q)
        .with_range("c", c);
    let slack = Float::with_val(prec, &rhs * &tol).abs();

    for (i, l) in lhs.iter().enumerate() {
        let j = i as u64 + 1;
        let holds = if below {
            Float::with_val(prec, l + &slack) >= rhs
        } else {
            Float::with_val(prec, &rhs + &slack) >= *l
        };
        push(&mut rep, holds, "ratio", params.clone(), Some(j), l, &rhs);
        let mirror = &lhs[lhs.len() - 1 - i];
        push(&mut rep, l == mirror, "symmetry", params.clone(), Some(j), l, mirror);
    }
    let half = (n / 2) as usize;
    for i in 1..half {
        let (prev, cur) = (&lhs[i - 1], &lhs[i]);
        let step_slack = Float::with_val(prec, cur * &tol).abs();
        let holds = if below {
            Float::with_val(prec, cur + &step_slack) >= *prev
        } else {
            Float::with_val(prec, prev + &step_slack) >= *cur
        };
        push(&mut rep, holds, "weight_monotone", params.clone(), Some(i as u64 + 1), cur, prev);
    }
    Ok(rep.finish())
}

/// At `c = 1` both sides of the ratio inequality are exactly 1.
pub fn ratio_tie_case(n: u32, q: f64, b: &PrecisionBudget) -> Result<LemmaReport> {
    b.validate()?;
    check_q(&Float::with_val(64, q))?;
    if n < 2 {
        return Err(DomainError::Argument(format!("ratio inequality needs n >= 2, got {n}")).into());
    }
    let prec = b.prec();
    let (lhs, rhs) = ratio_sides(n, q, 1.0, prec);
    let one = Float::with_val(prec, 1u32);
    let params = format!("n={n},q={q},c=1");
    let mut rep = LemmaReport::new("ratio_tie").with_range("n", n).with_range("q", q);
    push(&mut rep, rhs == one, "rhs_is_one", params.clone(), None, &rhs, &one);
    for (i, l) in lhs.iter().enumerate() {
        push(&mut rep, *l == one, "lhs_is_one", params.clone(), Some(i as u64 + 1), l, &one);
    }
    Ok(rep.finish())
}

/// `h'' <= 0` for `c < 1` and `h'' >= 0` for `c > 1` on every grid point.
pub fn verify_h_dd_dichotomy(ys: &[f64], cs: &[f64], zs: &[f64], b: &PrecisionBudget) -> Result<LemmaReport> {
    let mut rep = LemmaReport::new("h_second_derivative_sign")
        .with_range("y", format!("{ys:?}"))
        .with_range("c", format!("{cs:?}"))
        .with_range("z", format!("{zs:?}"));
    let zero = Float::new(b.prec());
    for &y in ys {
        for &c in cs {
            let pr = RatioParams::new(y, c)?;
            for &z in zs {
                let (_, h_dd) = h_second_deriv(z, &pr, b)?;
                let holds = if c < 1.0 { h_dd <= 0 } else { h_dd >= 0 };
                push(&mut rep, holds, "h_dd_sign", format!("y={y},c={c},z={z}"), None, &h_dd, &zero);
            }
        }
    }
    Ok(rep.finish())
}

/// Strict increase of `weight_u` on `points` equally spaced interior points
/// of `(0, 1)`.
pub fn verify_weight_u_monotone(points: usize) -> Result<LemmaReport> {
    if points < 2 {
        return Err(DomainError::Argument(format!("need at least 2 grid points, got {points}")).into());
    }
    let mut rep = LemmaReport::new("weight_u_increasing").with_range("points", points);
    let mut prev: Option<Float> = None;
    for i in 1..=points {
        let u = i as f64 / (points + 1) as f64;
        let w = weight_u(u)?;
        if let Some(p) = &prev {
            push(&mut rep, w > *p, "strict_increase", format!("u={u}"), Some(i as u64), &w, p);
        }
        prev = Some(w);
    }
    Ok(rep.finish())
}
