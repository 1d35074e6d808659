//! Complete-monotonicity certification.
//!
//! Both functionals expand as Dirichlet-type series in `p^{kx}` with
//! `p = min(q, 1/q)`:
//!
//! ```text
//! G_m(x; q, c)            = (ln Q)^{m+1} / c^2 * sum_{n>=1} H(m,n,Q,c) p^{nx}     (Q = max(q, 1/q))
//! F_{r,m,n,s}(x; q, c)    = (-ln q)^{m+n} / c^2 * sum_{k>=2} inner_k q^{kx}      (0 < q < 1)
//! ```
//!
//! so nonnegative coefficients certify complete monotonicity. The weights are
//! `w_j = (1 - p^{jc}) / (1 - p^j)`.
//!
//! Independently, [`check_cm_grid`] tests the sign pattern of alternating
//! forward differences of any function on a lattice.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Result};
use crate::functionals::{structure_constants, IndexQuad};
use crate::qspecial::{check_q, PrecisionBudget};

/// Absolute slack under which a coefficient still counts as nonnegative.
pub const ABS_SLACK: f64 = 1e-30;
/// Relative slack of the grid checker.
pub const GRID_SLACK: f64 = 1e-9;
pub const SERIES_K_MAX: usize = 200;
pub const GRID_K_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoeffKind {
    #[serde(rename = "G_of_m")]
    GOfM(u32),
    #[serde(rename = "F_of_quad")]
    FOfQuad(IndexQuad),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffTarget {
    pub kind: CoeffKind,
    pub q: f64,
    pub c: f64,
}

impl CoeffTarget {
    pub fn g(m: u32, q: f64, c: f64) -> Result<Self> {
        let t = CoeffTarget {
            kind: CoeffKind::GOfM(m),
            q,
            c,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn f(idx: IndexQuad, q: f64, c: f64) -> Result<Self> {
        let t = CoeffTarget {
            kind: CoeffKind::FOfQuad(idx),
            q,
            c,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        check_q(&Float::with_val(64, self.q))?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(DomainError::BadStep(self.c).into());
        }
        match self.kind {
            CoeffKind::GOfM(0) => Err(DomainError::Argument("G_m needs m >= 1".into()).into()),
            CoeffKind::GOfM(_) => Ok(()),
            CoeffKind::FOfQuad(idx) => {
                IndexQuad::balanced(idx.r, idx.m, idx.n, idx.s)?;
                if idx.s == 0 {
                    return Err(DomainError::Argument(format!("F targets need s >= 1, got {idx}")).into());
                }
                Ok(())
            }
        }
    }

    /// Which theorem, if any, covers this target.
    pub fn regime(&self) -> CmRegime {
        let c = self.c;
        match self.kind {
            CoeffKind::GOfM(m) => {
                if c < 1.0 {
                    CmRegime::Theorem1
                } else if c > 1.0 && m <= 2 {
                    CmRegime::Theorem1Reversed
                } else {
                    CmRegime::UnprovenRegime
                }
            }
            CoeffKind::FOfQuad(idx) => {
                let covered = matches!((idx.s, idx.n), (1, _) | (2, _) | (3, 4));
                let q_ok = self.q < 1.0 || idx.s >= 2;
                if covered && q_ok && c < 1.0 {
                    CmRegime::Theorem2
                } else {
                    CmRegime::UnprovenRegime
                }
            }
        }
    }
}

impl fmt::Display for CoeffTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CoeffKind::GOfM(m) => write!(f, "G_{m}(x; q={}, c={})", self.q, self.c),
            CoeffKind::FOfQuad(idx) => write!(f, "F_{idx}(x; q={}, c={})", self.q, self.c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmRegime {
    /// `G_m` for `0 < c < 1`.
    Theorem1,
    /// `-G_m` for `c > 1`, `m` in `{1, 2}`.
    Theorem1Reversed,
    /// `F` with `s = 1` (`0 < q < 1`), `s = 2`, or `s = 3, n = 4`, and `0 < c < 1`.
    Theorem2,
    UnprovenRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertStatus {
    Certified,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

/// What a report certifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TargetDescriptor {
    Series {
        #[serde(flatten)]
        target: CoeffTarget,
        regime: CmRegime,
        /// Base of the expansion actually summed.
        base: f64,
        /// `-1` when the negated coefficients are certified.
        sign: i8,
    },
    Grid {
        label: String,
        x_lo: f64,
        x_hi: f64,
        grid_points: usize,
        h: f64,
        slack: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub target: TargetDescriptor,
    pub k_range: (usize, usize),
    pub min_margin: f64,
    pub first_violation: Option<Violation>,
    pub status: CertStatus,
}

/// One swept coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffRow {
    pub k: usize,
    pub coefficient: Float,
    /// `sign * coefficient`, the quantity required to be nonnegative.
    pub margin: Float,
}

/// `w_j = (1 - p^{jc}) / (1 - p^j)` for `j = 0..=len` (with `w_0 = 0` unused).
fn weights(p: &Float, c: f64, len: usize, prec: u32) -> Vec<Float> {
    let ln_p = Float::with_val(prec, p.ln_ref());
    let cf = Float::with_val(prec, c);
    let mut out = Vec::with_capacity(len + 1);
    out.push(Float::new(prec));
    let mut pj = Float::with_val(prec, p);
    for j in 1..=len {
        let pjc = (Float::with_val(prec, &ln_p * &cf) * j as u32).exp();
        let num = Float::with_val(prec, 1u32 - pjc);
        let den = Float::with_val(prec, 1u32 - &pj);
        out.push(num / den);
        pj *= p;
    }
    out
}

/// `j^e` as a Float, `0^0 = 1`.
fn ipow(j: usize, e: u32, prec: u32) -> Float {
    Float::with_val(prec, Integer::from(Integer::u_pow_u(j as u32, e)))
}

fn base_of(q: f64, prec: u32) -> Float {
    let q = Float::with_val(prec, q);
    if q > 1 {
        q.recip()
    } else {
        q
    }
}

fn h_from_weights(m: u32, n: usize, c: f64, w: &[Float], prec: u32) -> Float {
    let cf = Float::with_val(prec, c);
    if n == 1 {
        if m == 1 {
            return Float::new(prec);
        }
        return cf * (m as i64 - 2) * &w[1];
    }
    let mut sum = Float::new(prec);
    for j in 1..n {
        let t = Float::with_val(prec, &w[j] * &w[n - j]) * ipow(n - j, m - 1, prec);
        sum += t;
    }
    sum *= m;
    let delta = u32::from(m == 1);
    let poly = Float::with_val(
        prec,
        Integer::from(Integer::u_pow_u(n as u32, m))
            - Integer::from(m - 1) * Integer::from(Integer::u_pow_u(n as u32, m - 1))
            - delta,
    );
    sum - cf * &w[n] * poly
}

/// Coefficient of `q^{-nx}` in the expansion of `G_m(x; q, c)`, `q > 1`,
/// without the prefactor `(ln q)^{m+1}/c^2`. The `n = 1` coefficient is the
/// standalone `c (1 - [m=1]) (m-2) w_1`.
#[allow(non_snake_case)]
pub fn H_coeff(m: u32, n: usize, q: f64, c: f64, b: &PrecisionBudget) -> Result<Float> {
    b.validate()?;
    check_q(&Float::with_val(64, q))?;
    if q <= 1.0 {
        return Err(DomainError::QOutOfRange {
            expected: "q > 1",
            got: q.to_string(),
        }
        .into());
    }
    if m == 0 || n == 0 {
        return Err(DomainError::Argument(format!("H(m,n) needs m,n >= 1, got ({m},{n})")).into());
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(DomainError::BadStep(c).into());
    }
    let prec = b.prec();
    let w = weights(&base_of(q, prec), c, n, prec);
    Ok(h_from_weights(m, n, c, &w, prec))
}

/// Per-target data reused across every coefficient of a sweep.
struct FTables {
    w: Vec<Float>,
    alpha: Float,
    idx: IndexQuad,
}

impl FTables {
    fn new(idx: &IndexQuad, p: &Float, c: f64, len: usize, prec: u32) -> Result<Self> {
        let alpha = structure_constants(idx)?.alpha;
        Ok(FTables {
            w: weights(p, c, len, prec),
            alpha: Float::with_val(prec, &alpha),
            idx: *idx,
        })
    }

    fn inner(&self, k: usize, prec: u32) -> Float {
        let IndexQuad { r, m, n, s } = self.idx;
        let mut sum = Float::new(prec);
        for j in 1..k {
            let i = k - j;
            let lead = ipow(j, m - 1, prec) * ipow(i, n - 1, prec);
            let sub = ipow(j, r - 1, prec) * ipow(i, s - 1, prec) * &self.alpha;
            let ww = Float::with_val(prec, &self.w[j] * &self.w[i]);
            sum += ww * (lead - sub);
        }
        sum
    }
}

/// Coefficient of `q^{kx}` in the expansion of `F_{r,m,n,s}(x; q, c)` for
/// `0 < q < 1`, without the prefactor `(-ln q)^{m+n}/c^2`.
#[allow(non_snake_case)]
pub fn F_inner_coeff(idx: &IndexQuad, k: usize, q: f64, c: f64, b: &PrecisionBudget) -> Result<Float> {
    b.validate()?;
    check_q(&Float::with_val(64, q))?;
    if q >= 1.0 {
        return Err(DomainError::QOutOfRange {
            expected: "0 < q < 1",
            got: q.to_string(),
        }
        .into());
    }
    CoeffTarget::f(*idx, q, c)?;
    if k < 2 {
        return Err(DomainError::Argument(format!("inner coefficients start at k = 2, got {k}")).into());
    }
    let prec = b.prec();
    let tables = FTables::new(idx, &base_of(q, prec), c, k, prec)?;
    Ok(tables.inner(k, prec))
}

/// The weights `w_j w_{k-j}` for `j = 1..=k/2`.
pub fn convolution_weights(q: f64, c: f64, k: usize, b: &PrecisionBudget) -> Result<Vec<Float>> {
    b.validate()?;
    check_q(&Float::with_val(64, q))?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(DomainError::BadStep(c).into());
    }
    let prec = b.prec();
    let w = weights(&base_of(q, prec), c, k, prec);
    Ok((1..=k / 2).map(|j| Float::with_val(prec, &w[j] * &w[k - j])).collect())
}

/// Sweeps the expansion coefficients of a target and reports the smallest
/// (sign-adjusted) one.
pub fn certify_cm_series(target: &CoeffTarget, k_max: usize, b: &PrecisionBudget) -> Result<CertReport> {
    certify_cm_series_rows(target, k_max, b, ABS_SLACK).map(|(rep, _)| rep)
}

/// As [`certify_cm_series`], with an explicit slack, also returning every
/// coefficient.
pub fn certify_cm_series_rows(
    target: &CoeffTarget,
    k_max: usize,
    b: &PrecisionBudget,
    abs_slack: f64,
) -> Result<(CertReport, Vec<CoeffRow>)> {
    target.validate()?;
    b.validate()?;
    if k_max < 2 {
        return Err(DomainError::Argument(format!("k_max must be at least 2, got {k_max}")).into());
    }
    if abs_slack.is_nan() || abs_slack < 0.0 {
        return Err(DomainError::Argument(format!("slack must be nonnegative, got {abs_slack}")).into());
    }
    let prec = b.prec();
    let regime = target.regime();
    let sign: i8 = if regime == CmRegime::Theorem1Reversed { -1 } else { 1 };
    let p = base_of(target.q, prec);
    let c = target.c;

    let (k_lo, coeffs): (usize, Vec<Float>) = match target.kind {
        CoeffKind::GOfM(m) => {
            // H(m,1) vanishes identically for m <= 2 and carries no information.
            let k_lo = if m <= 2 { 2 } else { 1 };
            let w = weights(&p, c, k_max, prec);
            let coeffs = (k_lo..=k_max)
                .into_par_iter()
                .map(|n| h_from_weights(m, n, c, &w, prec))
                .collect();
            (k_lo, coeffs)
        }
        CoeffKind::FOfQuad(idx) => {
            let tables = FTables::new(&idx, &p, c, k_max, prec)?;
            if target.q > 1.0 && idx.s == 1 {
                // Dpsi^{(0)} carries an extra constant for q > 1, adding
                // -alpha c k^{r-1} w_k to every coefficient.
                let cf = Float::with_val(prec, c);
                let coeffs = (1..=k_max)
                    .into_par_iter()
                    .map(|k| {
                        let extra = Float::with_val(prec, &tables.alpha * &cf) * &tables.w[k] * ipow(k, idx.r - 1, prec);
                        tables.inner(k, prec) - extra
                    })
                    .collect();
                (1, coeffs)
            } else {
                let coeffs = (2..=k_max).into_par_iter().map(|k| tables.inner(k, prec)).collect();
                (2, coeffs)
            }
        }
    };

    let mut rows = Vec::with_capacity(coeffs.len());
    let mut min_margin: Option<Float> = None;
    let mut first_violation = None;
    let slack = Float::with_val(prec, -abs_slack);
    for (off, coefficient) in coeffs.into_iter().enumerate() {
        let k = k_lo + off;
        let margin = Float::with_val(prec, &coefficient * sign as i32);
        if first_violation.is_none() && margin < slack {
            first_violation = Some(Violation {
                index: k,
                value: margin.to_f64(),
                x: None,
            });
        }
        if min_margin.as_ref().is_none_or(|mm| margin < *mm) {
            min_margin = Some(margin.clone());
        }
        rows.push(CoeffRow { k, coefficient, margin });
    }

    let status = match (regime, &first_violation) {
        (CmRegime::UnprovenRegime, _) => CertStatus::Inconclusive,
        (_, Some(_)) => CertStatus::Violated,
        (_, None) => CertStatus::Certified,
    };
    let report = CertReport {
        target: TargetDescriptor::Series {
            target: *target,
            regime,
            base: p.to_f64(),
            sign,
        },
        k_range: (k_lo, k_max),
        min_margin: min_margin.map_or(f64::NAN, |m| m.to_f64()),
        first_violation,
        status,
    };
    Ok((report, rows))
}

/// Rebuilds a target's value at `x` from its first `terms` coefficients.
pub fn reconstruct_value(target: &CoeffTarget, x: f64, terms: usize, b: &PrecisionBudget) -> Result<Float> {
    let (_, rows) = certify_cm_series_rows(target, terms.max(2), b, ABS_SLACK)?;
    let prec = b.prec();
    let p = base_of(target.q, prec);
    let ln_p = Float::with_val(prec, p.ln_ref());
    let c2 = Float::with_val(prec, target.c) * target.c;
    // |ln q|^{m+1} for G, |ln q|^{m+n} for F, over c^2.
    let power = match target.kind {
        CoeffKind::GOfM(m) => m + 1,
        CoeffKind::FOfQuad(idx) => idx.m + idx.n,
    };
    let pref = Float::with_val(prec, -&ln_p).pow(power) / c2;
    let xf = Float::with_val(prec, x);
    let mut sum = Float::new(prec);
    for row in &rows {
        let pk = (Float::with_val(prec, &ln_p * &xf) * row.k as u32).exp();
        sum += pk * &row.coefficient;
    }
    Ok(sum * pref)
}

/// Checks `(-1)^k Delta_h^k f(x) >= -slack * scale` for `0 <= k <= k_max` at
/// `grid_points` base points of `[x_lo, x_hi]`, snapped to the lattice
/// `x_lo + j h`. `Delta_h` is the plain forward difference
/// `f(x+h) - f(x)` and `scale` is `max |f|` over the stencil (at least
/// `1e-30`). `min_margin` is the smallest `(-1)^k Delta_h^k f / scale`.
pub fn check_cm_grid<F>(
    f: F,
    x_lo: f64,
    x_hi: f64,
    grid_points: usize,
    h: f64,
    k_max: usize,
    slack: f64,
) -> Result<CertReport>
where
    F: Fn(f64) -> Result<Float> + Sync,
{
    if !(x_lo.is_finite() && x_hi.is_finite() && x_hi >= x_lo) {
        return Err(DomainError::Argument(format!("bad grid interval [{x_lo}, {x_hi}]")).into());
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(DomainError::BadStep(h).into());
    }
    if grid_points == 0 {
        return Err(DomainError::Argument("grid needs at least one point".into()).into());
    }
    if slack.is_nan() || slack < 0.0 {
        return Err(DomainError::Argument(format!("slack must be nonnegative, got {slack}")).into());
    }
    let span = ((x_hi - x_lo) / h).round() as usize;
    let bases: Vec<usize> = if grid_points == 1 {
        vec![0]
    } else {
        let mut v: Vec<usize> = (0..grid_points)
            .map(|i| ((i as f64) * span as f64 / (grid_points - 1) as f64).round() as usize)
            .collect();
        v.dedup();
        v
    };
    let mut needed: Vec<usize> = bases.iter().flat_map(|&j| j..=j + k_max).collect();
    needed.sort_unstable();
    needed.dedup();
    let at = |j: usize| x_lo + j as f64 * h;
    let values: Vec<Float> = needed.par_iter().map(|&j| f(at(j))).collect::<Result<_>>()?;
    let cache: BTreeMap<usize, Float> = needed.into_iter().zip(values).collect();
    let prec = cache.values().map(|v| v.prec()).max().unwrap_or(53);

    let tiny = Float::with_val(prec, 1e-30);
    let mut min_margin: Option<Float> = None;
    let mut first_violation: Option<Violation> = None;
    for &j in &bases {
        let stencil: Vec<&Float> = (j..=j + k_max).map(|i| &cache[&i]).collect();
        // diffs[i] holds Delta^k f at x_{j+i}; k advances each round.
        let mut diffs: Vec<Float> = stencil.iter().map(|v| Float::with_val(prec, *v)).collect();
        for k in 0..=k_max {
            let mut scale = tiny.clone();
            for v in &stencil[..=k] {
                let a = Float::with_val(prec, v.abs_ref());
                if a > scale {
                    scale = a;
                }
            }
            let signed = if k % 2 == 0 {
                diffs[0].clone()
            } else {
                Float::with_val(prec, -&diffs[0])
            };
            let margin = signed / &scale;
            if first_violation.is_none() && margin < -slack {
                first_violation = Some(Violation {
                    index: k,
                    value: margin.to_f64(),
                    x: Some(at(j)),
                });
            }
            if min_margin.as_ref().is_none_or(|mm| margin < *mm) {
                min_margin = Some(margin);
            }
            if k < k_max {
                diffs = diffs.windows(2).map(|w| Float::with_val(prec, &w[1] - &w[0])).collect();
            }
        }
    }
    let status = if first_violation.is_some() {
        CertStatus::Violated
    } else {
        CertStatus::Certified
    };
    Ok(CertReport {
        target: TargetDescriptor::Grid {
            label: String::new(),
            x_lo,
            x_hi,
            grid_points: bases.len(),
            h,
            slack,
        },
        k_range: (0, k_max),
        min_margin: min_margin.map_or(f64::NAN, |m| m.to_f64()),
        first_violation,
        status,
    })
}

/// Number of lattice points `x_lo + j h` in `[x_lo, x_hi]`.
pub fn lattice_points(x_lo: f64, x_hi: f64, h: f64) -> usize {
    ((x_hi - x_lo) / h).round() as usize + 1
}

impl CertReport {
    pub fn with_label(mut self, text: impl Into<String>) -> Self {
        if let TargetDescriptor::Grid { label, .. } = &mut self.target {
            *label = text.into();
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{f_q_fd, g_q_fd, FDStep};
    use crate::qspecial::QPoint;
    use crate::combinatorics::{seq_a, seq_b};
    use proptest::prelude::*;

    fn budget() -> PrecisionBudget {
        PrecisionBudget::default()
    }

    fn quad(r: u32, m: u32, n: u32, s: u32) -> IndexQuad {
        IndexQuad::balanced(r, m, n, s).unwrap()
    }

    fn rel(a: &Float, b: &Float) -> f64 {
        (Float::with_val(a.prec(), a - b) / b).abs().to_f64()
    }

    #[test]
    fn h_examples() {
        let b = budget();
        let h = H_coeff(1, 2, 2.0, 0.5, &b).unwrap();
        // (1-2^{-1/2})^2/(1/2)^2 - 0.5 (1/2)/(3/4), evaluated independently
        let s = 2f64.sqrt().recip();
        let expected = (1.0 - s).powi(2) / 0.25 - 0.5 * 0.5 / 0.75;
        assert!((h.to_f64() - expected).abs() < 1e-15);
        assert!((h.to_f64() - 0.0098).abs() < 1e-4);
        assert_eq!(H_coeff(1, 1, 3.0, 0.4, &b).unwrap(), 0);
        assert_eq!(H_coeff(2, 1, 3.0, 0.4, &b).unwrap(), 0);
        assert!(H_coeff(3, 1, 3.0, 0.4, &b).unwrap() > 0);
        assert!(H_coeff(1, 2, 0.5, 0.5, &b).is_err());
        assert!(H_coeff(0, 2, 2.0, 0.5, &b).is_err());
    }

    #[test]
    fn f_inner_examples() {
        let b = budget();
        let idx = quad(3, 2, 2, 1);
        for &(q, c) in &[(0.5, 0.5), (0.3, 0.75), (0.9, 2.0)] {
            let v = F_inner_coeff(&idx, 2, q, c, &b).unwrap();
            let w1 = (1.0 - f64::powf(q, c)) / (1.0 - q);
            assert!((v.to_f64() - 0.5 * w1 * w1).abs() < 1e-14);
        }
        // three-term sum at q = c = 1/2, k = 4
        let w = |j: i32| (1.0 - 0.5f64.powf(0.5 * j as f64)) / (1.0 - 0.5f64.powi(j));
        let direct: f64 = (1..4)
            .map(|j| w(j) * w(4 - j) * ((j * (4 - j)) as f64 - 0.5 * (j * j) as f64))
            .sum();
        let v = F_inner_coeff(&idx, 4, 0.5, 0.5, &b).unwrap().to_f64();
        assert!(v > 0.0);
        assert!((v - direct).abs() < 1e-14);
        assert!(F_inner_coeff(&idx, 1, 0.5, 0.5, &b).is_err());
        assert!(F_inner_coeff(&idx, 4, 2.0, 0.5, &b).is_err());
        assert!(F_inner_coeff(&quad(2, 1, 1, 0), 4, 0.5, 0.5, &b).is_err());
    }

    #[test]
    fn unit_weights_recover_a_minus_b() {
        // c = 1 makes every weight 1, leaving sum_j (j^{m-1}(k-j)^{n-1} - alpha j^{r-1}(k-j)^{s-1})
        let b = budget();
        let idx = quad(3, 2, 2, 1);
        let v = F_inner_coeff(&idx, 4, 0.5, 1.0, &b).unwrap();
        let exact = rug::Rational::from(seq_a(2, 2, 4).unwrap()) - seq_b(&idx, 4).unwrap();
        assert_eq!(exact, 3);
        // The j = k term of a - b is zero here, so the two agree.
        assert!((v.to_f64() - 3.0).abs() < 1e-30);
    }

    #[test]
    fn certify_examples() {
        let b = budget();
        let rep = certify_cm_series(&CoeffTarget::g(3, 2.0, 0.5).unwrap(), 200, &b).unwrap();
        assert_eq!(rep.status, CertStatus::Certified);
        assert!(rep.min_margin > 0.0);
        assert_eq!(rep.k_range, (1, 200));

        let rep = certify_cm_series(&CoeffTarget::f(quad(4, 3, 3, 2), 0.5, 0.75).unwrap(), 200, &b).unwrap();
        assert_eq!(rep.status, CertStatus::Certified);

        let rep = certify_cm_series(&CoeffTarget::g(1, 2.0, 2.0).unwrap(), 200, &b).unwrap();
        assert_eq!(rep.status, CertStatus::Certified);
        assert!(matches!(rep.target, TargetDescriptor::Series { sign: -1, regime: CmRegime::Theorem1Reversed, .. }));
        assert_eq!(rep.k_range, (2, 200));
    }

    #[test]
    fn unproven_targets_are_inconclusive() {
        let b = budget();
        let s1_above = certify_cm_series(&CoeffTarget::f(quad(3, 2, 2, 1), 2.0, 0.5).unwrap(), 30, &b).unwrap();
        assert_eq!(s1_above.status, CertStatus::Inconclusive);
        assert_eq!(s1_above.first_violation.as_ref().unwrap().index, 1);
        let g_big_c = certify_cm_series(&CoeffTarget::g(3, 2.0, 2.0).unwrap(), 30, &b).unwrap();
        assert_eq!(g_big_c.status, CertStatus::Inconclusive);
        let wide = certify_cm_series(&CoeffTarget::f(quad(7, 5, 5, 3), 0.5, 0.5).unwrap(), 30, &b).unwrap();
        assert_eq!(wide.status, CertStatus::Inconclusive);
    }

    #[test]
    fn report_json_fields() {
        let b = budget();
        let rep = certify_cm_series(&CoeffTarget::g(2, 0.5, 0.25).unwrap(), 10, &b).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 5);
        for k in ["target", "k_range", "min_margin", "first_violation", "status"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["status"], "Certified");
        assert_eq!(v["target"]["kind"]["G_of_m"], 2);
    }

    #[test]
    fn bad_targets_rejected() {
        assert!(CoeffTarget::g(0, 2.0, 0.5).is_err());
        assert!(CoeffTarget::g(1, 1.0, 0.5).is_err());
        assert!(CoeffTarget::g(1, 2.0, -0.5).is_err());
        assert!(CoeffTarget::f(quad(2, 1, 1, 0), 0.5, 0.5).is_err());
        let b = budget();
        assert!(certify_cm_series(&CoeffTarget::g(1, 2.0, 0.5).unwrap(), 1, &b).is_err());
    }

    #[test]
    fn g_reconstruction() {
        let b = budget();
        for m in [1u32, 3] {
            let t = CoeffTarget::g(m, 2.0, 0.5).unwrap();
            let rebuilt = reconstruct_value(&t, 1.0, 120, &b).unwrap();
            let direct = g_q_fd(m, &QPoint::new(2.0, 1.0).unwrap(), &FDStep::new(0.5).unwrap(), &b).unwrap();
            assert!(rel(&rebuilt, &direct) < 1e-8, "m={m}: {rebuilt} vs {direct}");
        }
        // q < 1 shares the expansion of 1/q
        let t = CoeffTarget::g(2, 0.5, 0.25).unwrap();
        let rebuilt = reconstruct_value(&t, 1.5, 150, &b).unwrap();
        let direct = g_q_fd(2, &QPoint::new(0.5, 1.5).unwrap(), &FDStep::new(0.25).unwrap(), &b).unwrap();
        assert!(rel(&rebuilt, &direct) < 1e-8);
    }

    #[test]
    fn f_reconstruction() {
        let b = budget();
        let idx = quad(4, 3, 3, 2);
        let t = CoeffTarget::f(idx, 0.5, 0.5).unwrap();
        let rebuilt = reconstruct_value(&t, 1.0, 120, &b).unwrap();
        let direct = f_q_fd(&idx, &QPoint::new(0.5, 1.0).unwrap(), &FDStep::new(0.5).unwrap(), &b).unwrap();
        assert!(rel(&rebuilt, &direct) < 1e-8, "{rebuilt} vs {direct}");

        // s = 1 above one, extra linear term included
        let idx = quad(3, 2, 2, 1);
        let t = CoeffTarget::f(idx, 2.0, 0.5).unwrap();
        let rebuilt = reconstruct_value(&t, 1.0, 120, &b).unwrap();
        let direct = f_q_fd(&idx, &QPoint::new(2.0, 1.0).unwrap(), &FDStep::new(0.5).unwrap(), &b).unwrap();
        assert!(rel(&rebuilt, &direct) < 1e-8, "{rebuilt} vs {direct}");
    }

    #[test]
    fn grid_examples() {
        let exp = |x: f64| Ok(Float::with_val(128, -x).exp());
        let rep = check_cm_grid(exp, 0.0, 3.0, 31, 0.1, 12, 0.0).unwrap();
        assert_eq!(rep.status, CertStatus::Certified);
        assert!(rep.min_margin > 0.0);

        let id = |x: f64| Ok(Float::with_val(64, x));
        let rep = check_cm_grid(id, 0.5, 2.0, 4, 0.25, 3, 1e-9).unwrap();
        assert_eq!(rep.status, CertStatus::Violated);
        let v = rep.first_violation.unwrap();
        assert_eq!(v.index, 1);
        assert_eq!(v.x, Some(0.5));

        let b = budget();
        let step = FDStep::new(0.5).unwrap();
        let g = |x: f64| g_q_fd(2, &QPoint::new(0.5, x)?, &step, &b);
        let rep = check_cm_grid(g, 0.1, 5.0, 25, 0.05, 8, GRID_SLACK).unwrap();
        assert_eq!(rep.status, CertStatus::Certified, "{:?}", rep.first_violation);
    }

    #[test]
    fn grid_rejects_bad_input() {
        let f = |x: f64| Ok(Float::with_val(64, x));
        assert!(check_cm_grid(f, 1.0, 0.0, 3, 0.1, 2, 0.0).is_err());
        assert!(check_cm_grid(f, 0.0, 1.0, 3, 0.0, 2, 0.0).is_err());
        assert!(check_cm_grid(f, 0.0, 1.0, 0, 0.1, 2, 0.0).is_err());
        assert_eq!(lattice_points(0.1, 5.0, 0.05), 99);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn weights_monotone(q in 0.05f64..0.95, c in 0.05f64..0.95, k in 2usize..60) {
            let w = convolution_weights(q, c, k, &budget()).unwrap();
            for pair in w.windows(2) {
                prop_assert!(pair[0] > 0);
                prop_assert!(pair[1] >= pair[0]);
            }
        }

        #[test]
        fn weights_reverse_above_one(q in 0.05f64..0.95, c in 1.05f64..4.0, k in 2usize..60) {
            let w = convolution_weights(q, c, k, &budget()).unwrap();
            for pair in w.windows(2) {
                prop_assert!(pair[1] <= pair[0]);
            }
        }

        #[test]
        fn reflection_shares_coefficients(m in 1u32..6, q in 1.2f64..8.0, c in 0.1f64..0.9) {
            let b = PrecisionBudget::new(1e-12, 30, 10_000).unwrap();
            let up = certify_cm_series_rows(&CoeffTarget::g(m, q, c).unwrap(), 12, &b, ABS_SLACK).unwrap().1;
            let down = certify_cm_series_rows(&CoeffTarget::g(m, 1.0 / q, c).unwrap(), 12, &b, ABS_SLACK).unwrap().1;
            for (a, d) in up.iter().zip(&down) {
                prop_assert!(rel(&a.coefficient, &d.coefficient) < 1e-10 || (a.coefficient.is_zero() && d.coefficient.is_zero()));
            }
        }
    }
}
