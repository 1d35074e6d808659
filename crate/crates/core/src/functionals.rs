//! Finite-difference functionals built from q-polygamma functions.
//!
//! With `Delta f(x; c) = (f(x + c) - f(x)) / c` and the order conventions
//! `psi_q^{(0)} = psi_q`, `psi_q^{(-1)}(x) = -x`:
//!
//! ```text
//! F_{r,m,n,s}(x; q, c) = (-1)^{m+n} Dpsi^{(m-1)} Dpsi^{(n-1)}
//!                        - alpha_{r,m,n,s} (-1)^{r+s} Dpsi^{(r-1)} Dpsi^{(s-1)}
//! G_m(x; q, c)         = m F_{m+1,m,1,0}(x; q, c) - (-1)^{m+1} d_{m,q} ln q Dpsi^{(m-1)}
//! ```
//!
//! The `c -> 0` limits replace every `Dpsi^{(k-1)}` by `psi_q^{(k)}`.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Error, Result};
use crate::qspecial::{polygamma_q, psi_classical_deriv, PrecisionBudget, QPoint, SeriesValue};

/// Integer indices `r >= m >= n >= s >= 0`, `r >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexQuad {
    pub r: u32,
    pub m: u32,
    pub n: u32,
    pub s: u32,
}

impl IndexQuad {
    pub fn new(r: u32, m: u32, n: u32, s: u32) -> Result<Self> {
        if !(r >= m && m >= n && n >= s && r >= 1) {
            return Err(DomainError::IndexOrder { r, m, n, s }.into());
        }
        Ok(IndexQuad { r, m, n, s })
    }

    /// Ordered and satisfying `r + s = m + n`.
    pub fn balanced(r: u32, m: u32, n: u32, s: u32) -> Result<Self> {
        let idx = Self::new(r, m, n, s)?;
        idx.require_balanced()?;
        Ok(idx)
    }

    pub fn is_balanced(&self) -> bool {
        self.r + self.s == self.m + self.n
    }

    pub fn require_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            let IndexQuad { r, m, n, s } = *self;
            Err(DomainError::Unbalanced { r, m, n, s }.into())
        }
    }

    /// Every balanced quadruple with `r <= r_max` and `s >= s_min`, in
    /// lexicographic order.
    pub fn enumerate_balanced(r_max: u32, s_min: u32) -> Vec<IndexQuad> {
        let mut out = Vec::new();
        for r in 1..=r_max {
            for m in 1..=r {
                for n in 1..=m {
                    if r + s_min > m + n {
                        continue;
                    }
                    let s = m + n - r;
                    if s <= n {
                        out.push(IndexQuad { r, m, n, s });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for IndexQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.r, self.m, self.n, self.s)
    }
}

/// Finite-difference step `c != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FDStep {
    c: f64,
}

impl FDStep {
    pub fn new(c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(DomainError::BadStep(c).into());
        }
        Ok(FDStep { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn below_one(&self) -> bool {
        self.c > 0.0 && self.c < 1.0
    }

    pub fn above_one(&self) -> bool {
        self.c > 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureConstants {
    pub alpha: Rational,
    /// Only defined for `s >= 1`.
    pub beta: Option<Rational>,
}

fn fact(k: u32) -> Integer {
    Integer::from(Integer::factorial(k))
}

/// `alpha = (m-1)!(n-1)! / ((r-1)!(s-1)!)` (denominator `(r-1)!` when
/// `s = 0`) and `beta = m! n! / (r! s!)`.
pub fn structure_constants(idx: &IndexQuad) -> Result<StructureConstants> {
    let IndexQuad { r, m, n, s } = IndexQuad::new(idx.r, idx.m, idx.n, idx.s)?;
    if n == 0 {
        return Err(DomainError::Argument(format!("alpha needs n >= 1, got quadruple {idx}")).into());
    }
    let num = fact(m - 1) * fact(n - 1);
    let (alpha, beta) = if s == 0 {
        (Rational::from((num, fact(r - 1))), None)
    } else {
        let alpha = Rational::from((num, fact(r - 1) * fact(s - 1)));
        let beta = Rational::from((fact(m) * fact(n), fact(r) * fact(s)));
        (alpha, Some(beta))
    };
    Ok(StructureConstants { alpha, beta })
}

/// `d_{m,q}`: `m - 1` when `0 < q < 1` and `m >= 2`, otherwise 1.
pub fn d_const(m: u32, q: f64) -> Result<u32> {
    if m == 0 {
        return Err(DomainError::Argument("d_{m,q} needs m >= 1".into()).into());
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(DomainError::QNotPositive(q.to_string()).into());
    }
    if q == 1.0 {
        return Err(DomainError::QOutOfRange {
            expected: "q != 1",
            got: q.to_string(),
        }
        .into());
    }
    Ok(if q < 1.0 && m >= 2 { m - 1 } else { 1 })
}

/// `(f(x + c) - f(x)) / c` evaluated at `prec` bits.
pub fn fwd_diff<F>(f: F, x: &Float, step: &FDStep, prec: u32) -> Result<Float>
where
    F: Fn(&Float) -> Result<Float>,
{
    let c = Float::with_val(prec, step.c());
    let x0 = Float::with_val(prec, x);
    let x1 = Float::with_val(prec, &x0 + &c);
    let f1 = f(&x1)?;
    let f0 = f(&x0)?;
    Ok(Float::with_val(prec, &f1 - &f0) / c)
}

fn sign(e: u32) -> i32 {
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `psi_q^{(order)}(x)` with `order = -1` meaning `-x`.
pub fn psi_q_order(p: &QPoint, order: i32, b: &PrecisionBudget) -> Result<Float> {
    match order {
        -1 => Ok(Float::with_val(b.prec(), -p.x())),
        k if k >= 0 => Ok(polygamma_q(p, k as u32, b)?.value),
        _ => Err(DomainError::Argument(format!("polygamma order {order} < -1")).into()),
    }
}

/// A value together with a bound on its absolute error.
#[derive(Debug, Clone)]
struct Bounded {
    value: Float,
    err: Float,
}

impl Bounded {
    fn exact(value: Float) -> Self {
        let err = Float::new(value.prec());
        Bounded { value, err }
    }

    fn from_series(v: SeriesValue) -> Self {
        // Series tail plus a generous allowance for rounding at working precision.
        let prec = v.value.prec();
        let round = Float::with_val(prec, v.value.abs_ref()) >> (prec as i32 - 16);
        Bounded {
            err: v.tail_bound + round,
            value: v.value,
        }
    }

    fn sub(&self, other: &Bounded) -> Bounded {
        let prec = self.value.prec();
        Bounded {
            value: Float::with_val(prec, &self.value - &other.value),
            err: Float::with_val(prec, &self.err + &other.err),
        }
    }

    fn mul(&self, other: &Bounded) -> Bounded {
        let prec = self.value.prec();
        let value = Float::with_val(prec, &self.value * &other.value);
        let err = Float::with_val(prec, self.value.abs_ref()) * &other.err
            + Float::with_val(prec, other.value.abs_ref()) * &self.err
            + Float::with_val(prec, &self.err * &other.err);
        Bounded { value, err }
    }

    fn scale(&self, k: &Float) -> Bounded {
        let prec = self.value.prec();
        Bounded {
            value: Float::with_val(prec, &self.value * k),
            err: Float::with_val(prec, &self.err * k).abs(),
        }
    }
}

const MAX_REFINEMENTS: usize = 5;

/// Re-runs `eval` with a tighter inner series tolerance until the propagated
/// error bound is within `rel_tol` of the result. Cancellation between the
/// polygamma products can cost many digits, so the inner budget adapts.
fn refine<F>(b: &PrecisionBudget, mut eval: F) -> Result<Float>
where
    F: FnMut(&PrecisionBudget) -> Result<Bounded>,
{
    b.validate()?;
    let mut inner = *b;
    let mut best = eval(&inner)?;
    for _ in 0..MAX_REFINEMENTS {
        let prec = best.value.prec();
        let allowed = Float::with_val(prec, best.value.abs_ref()) * b.rel_tol;
        if best.err <= allowed {
            break;
        }
        let factor = if allowed.is_zero() {
            1e12
        } else {
            Float::with_val(prec, &best.err / &allowed).to_f64().clamp(10.0, 1e40) * 100.0
        };
        inner.rel_tol = (inner.rel_tol / factor).max(1e-200);
        best = eval(&inner)?;
    }
    Ok(Float::with_val(b.prec(), &best.value))
}

/// Forward differences of `psi_q^{(k)}` at one `(p, c)`, memoized by order.
struct DeltaTable<'a> {
    p: &'a QPoint,
    shifted: QPoint,
    c: Float,
    b: &'a PrecisionBudget,
    cache: Vec<(i32, Bounded)>,
}

impl<'a> DeltaTable<'a> {
    fn new(p: &'a QPoint, step: &FDStep, b: &'a PrecisionBudget) -> Result<Self> {
        let prec = b.prec();
        let c = Float::with_val(prec, step.c());
        let shifted = p.with_x(Float::with_val(prec, p.x() + &c))?;
        Ok(DeltaTable {
            p,
            shifted,
            c,
            b,
            cache: Vec::new(),
        })
    }

    fn get(&mut self, order: i32) -> Result<Bounded> {
        if let Some((_, v)) = self.cache.iter().find(|(k, _)| *k == order) {
            return Ok(v.clone());
        }
        let prec = self.b.prec();
        let v = match order {
            -1 => Bounded::exact(Float::with_val(prec, -1)),
            k if k >= 0 => {
                let hi = Bounded::from_series(polygamma_q(&self.shifted, k as u32, self.b)?);
                let lo = Bounded::from_series(polygamma_q(self.p, k as u32, self.b)?);
                let inv = Float::with_val(prec, self.c.recip_ref());
                hi.sub(&lo).scale(&inv)
            }
            _ => return Err(DomainError::Argument(format!("polygamma order {order} < -1")).into()),
        };
        self.cache.push((order, v.clone()));
        Ok(v)
    }
}

fn product_form<E>(idx: &IndexQuad, alpha: &Float, mut term: E) -> Result<Bounded>
where
    E: FnMut(u32) -> Result<Bounded>,
{
    let IndexQuad { r, m, n, s } = *idx;
    let prec = alpha.prec();
    let sgn = |e: u32| Float::with_val(prec, sign(e));
    let lead = term(m)?.mul(&term(n)?).scale(&sgn(m + n));
    let sub = term(r)?.mul(&term(s)?).scale(&sgn(r + s)).scale(alpha);
    Ok(lead.sub(&sub))
}

/// The finite-difference functional `F_{r,m,n,s}(x; q, c)`; needs a balanced
/// quadruple and accepts `s = 0`.
pub fn f_q_fd(idx: &IndexQuad, p: &QPoint, step: &FDStep, b: &PrecisionBudget) -> Result<Float> {
    idx.require_balanced()?;
    let alpha = structure_constants(idx)?.alpha;
    refine(b, |inner| {
        let alpha = Float::with_val(inner.prec(), &alpha);
        let mut table = DeltaTable::new(p, step, inner)?;
        product_form(idx, &alpha, |k| table.get(k as i32 - 1))
    })
}

/// `G_m(x; q, c)`.
pub fn g_q_fd(m: u32, p: &QPoint, step: &FDStep, b: &PrecisionBudget) -> Result<Float> {
    if m == 0 {
        return Err(DomainError::Argument("G_m needs m >= 1".into()).into());
    }
    let idx = IndexQuad::balanced(m + 1, m, 1, 0)?;
    let alpha = structure_constants(&idx)?.alpha;
    let d = d_for(m, p);
    refine(b, |inner| {
        let prec = inner.prec();
        let alpha = Float::with_val(prec, &alpha);
        let mut table = DeltaTable::new(p, step, inner)?;
        let f = product_form(&idx, &alpha, |k| table.get(k as i32 - 1))?;
        let ln_q = Float::with_val(prec, p.q().ln_ref()) * (d as i32 * sign(m + 1));
        let tail = table.get(m as i32 - 1)?.scale(&ln_q);
        Ok(f.scale(&Float::with_val(prec, m)).sub(&tail))
    })
}

fn d_for(m: u32, p: &QPoint) -> u32 {
    if p.below_one() && m >= 2 {
        m - 1
    } else {
        1
    }
}

/// The `c -> 0` limit of `G_m`:
/// `m (-1)^{m+1} psi' psi^{(m)} + (-1)^{m+1} psi^{(m+1)} - (-1)^{m+1} d ln q psi^{(m)}`.
pub fn g_q_deriv(m: u32, p: &QPoint, b: &PrecisionBudget) -> Result<Float> {
    if m == 0 {
        return Err(DomainError::Argument("G_m needs m >= 1".into()).into());
    }
    let d = d_for(m, p);
    refine(b, |inner| {
        let prec = inner.prec();
        let d1 = Bounded::from_series(polygamma_q(p, 1, inner)?);
        let dm = Bounded::from_series(polygamma_q(p, m, inner)?);
        let dm1 = Bounded::from_series(polygamma_q(p, m + 1, inner)?);
        let ln_q = Float::with_val(prec, p.q().ln_ref()) * d;
        let lead = d1.mul(&dm).scale(&Float::with_val(prec, m));
        let inner_sum = Bounded {
            value: Float::with_val(prec, &lead.value + &dm1.value),
            err: Float::with_val(prec, &lead.err + &dm1.err),
        };
        Ok(inner_sum.sub(&dm.scale(&ln_q)).scale(&Float::with_val(prec, sign(m + 1))))
    })
}

/// The `c -> 0` limit of `F_{r,m,n,s}` for `s >= 1`.
pub fn f_q_deriv(idx: &IndexQuad, p: &QPoint, b: &PrecisionBudget) -> Result<Float> {
    idx.require_balanced()?;
    if idx.s == 0 {
        return Err(DomainError::Argument("derivative form of F needs s >= 1".into()).into());
    }
    let alpha = structure_constants(idx)?.alpha;
    refine(b, |inner| {
        let alpha = Float::with_val(inner.prec(), &alpha);
        let mut cache: Vec<(u32, Bounded)> = Vec::new();
        product_form(idx, &alpha, |k| {
            if let Some((_, v)) = cache.iter().find(|(o, _)| *o == k) {
                return Ok(v.clone());
            }
            let v = Bounded::from_series(polygamma_q(p, k, inner)?);
            cache.push((k, v.clone()));
            Ok(v)
        })
    })
}

/// Classical `F_{r,m,n,s}(x; t) = (-1)^{m+n} psi^{(m)} psi^{(n)} - t (-1)^{r+s} psi^{(r)} psi^{(s)}`
/// with `psi^{(0)} = -1`. Balance is not required.
pub fn f_classic(idx: &IndexQuad, x: f64, t: f64) -> Result<Float> {
    let idx = IndexQuad::new(idx.r, idx.m, idx.n, idx.s)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(DomainError::XNotPositive(x.to_string()).into());
    }
    let prec = 192;
    let term = |k: u32| -> Result<Bounded> {
        if k == 0 {
            Ok(Bounded::exact(Float::with_val(prec, -1)))
        } else {
            Ok(Bounded::exact(psi_classical_deriv(x, k)?))
        }
    };
    let tf = Float::with_val(prec, t);
    Ok(product_form(&idx, &tf, term)?.value)
}

/// The three members of the chain
/// `(1-q)/(1-q^c) D^2  >  q^x (psi_q'(x) - psi_q'(x+c))  >  D^2`,
/// `D = psi_q(x+c) - psi_q(x)`, which holds for `0 < q < 1, 0 < c < 1` and
/// reverses for `c > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceChain {
    pub upper: Float,
    pub middle: Float,
    pub lower: Float,
}

impl DifferenceChain {
    pub fn strictly_decreasing(&self) -> bool {
        self.upper > self.middle && self.middle > self.lower
    }

    pub fn strictly_increasing(&self) -> bool {
        self.upper < self.middle && self.middle < self.lower
    }
}

pub fn psi_difference_chain(p: &QPoint, step: &FDStep, b: &PrecisionBudget) -> Result<DifferenceChain> {
    if !p.below_one() || step.c() <= 0.0 {
        return Err(Error::from(DomainError::Argument(
            "difference chain is defined for 0 < q < 1 and c > 0".into(),
        )));
    }
    let prec = b.prec();
    let c = Float::with_val(prec, step.c());
    let shifted = p.with_x(Float::with_val(prec, p.x() + &c))?;
    let d0 = Float::with_val(prec, &polygamma_q(&shifted, 0, b)?.value - &polygamma_q(p, 0, b)?.value);
    let lower = Float::with_val(prec, d0.square_ref());
    let q = Float::with_val(prec, p.q());
    let qc = Float::with_val(prec, (&q).pow(&c));
    let ratio = Float::with_val(prec, 1u32 - &q) / Float::with_val(prec, 1u32 - &qc);
    let upper = Float::with_val(prec, &ratio * &lower);
    let qx = Float::with_val(prec, (&q).pow(p.x()));
    let dpsi = Float::with_val(prec, &polygamma_q(p, 1, b)?.value - &polygamma_q(&shifted, 1, b)?.value);
    let middle = qx * dpsi;
    Ok(DifferenceChain {
        upper,
        middle,
        lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(q: f64, x: f64) -> QPoint {
        QPoint::new(q, x).unwrap()
    }

    fn step(c: f64) -> FDStep {
        FDStep::new(c).unwrap()
    }

    fn rel(a: &Float, b: &Float) -> f64 {
        let d = Float::with_val(a.prec(), a - b).abs();
        (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
    }

    fn quad(r: u32, m: u32, n: u32, s: u32) -> IndexQuad {
        IndexQuad::new(r, m, n, s).unwrap()
    }

    #[test]
    fn index_quad_validation() {
        assert!(IndexQuad::new(2, 3, 1, 0).is_err());
        assert!(IndexQuad::new(0, 0, 0, 0).is_err());
        assert!(IndexQuad::balanced(4, 3, 2, 2).is_err());
        assert!(IndexQuad::balanced(4, 3, 3, 2).is_ok());
        let all = IndexQuad::enumerate_balanced(4, 1);
        assert!(all.iter().all(|q| q.is_balanced() && q.s >= 1));
        assert!(all.contains(&quad(3, 2, 2, 1)));
        assert!(all.contains(&quad(4, 3, 3, 2)));
    }

    #[test]
    fn structure_constant_examples() {
        let k = structure_constants(&quad(3, 2, 2, 1)).unwrap();
        assert_eq!(k.alpha, Rational::from((1, 2)));
        assert_eq!(k.beta, Some(Rational::from((2, 3))));
        for m in 1..8u32 {
            let k = structure_constants(&quad(m + 1, m, 1, 0)).unwrap();
            assert_eq!(k.alpha, Rational::from((1, m)));
            assert!(k.beta.is_none());
        }
        assert!(structure_constants(&quad(1, 0, 0, 0)).is_err());
    }

    #[test]
    fn alpha_strictly_inside_unit_interval() {
        for idx in IndexQuad::enumerate_balanced(10, 1) {
            if idx.r > idx.m && idx.n > idx.s {
                let a = structure_constants(&idx).unwrap().alpha;
                assert!(a > 0 && a < 1, "{idx}");
            }
        }
    }

    #[test]
    fn d_const_cases() {
        assert_eq!(d_const(3, 0.5).unwrap(), 2);
        assert_eq!(d_const(3, 2.0).unwrap(), 1);
        assert_eq!(d_const(1, 0.5).unwrap(), 1);
        assert!(d_const(2, 1.0).is_err());
        assert!(d_const(0, 0.5).is_err());
    }

    #[test]
    fn fwd_diff_examples() {
        let prec = 128;
        let x = Float::with_val(prec, 1);
        let neg = |x: &Float| Ok(Float::with_val(prec, -x));
        for &c in &[0.5, -0.25, 3.0] {
            assert_eq!(fwd_diff(neg, &x, &step(c), prec).unwrap(), -1);
        }
        let sq = |x: &Float| Ok(Float::with_val(prec, x.square_ref()));
        assert_eq!(fwd_diff(sq, &x, &step(0.5), prec).unwrap(), 2.5);
        assert!(FDStep::new(0.0).is_err());
        assert!(FDStep::new(f64::NAN).is_err());
    }

    #[test]
    fn fwd_diff_of_digamma() {
        let b = PrecisionBudget::default();
        let hi = PrecisionBudget::new(1e-40, 100, 100_000).unwrap();
        let p = pt(0.5, 1.0);
        let got = fwd_diff(
            |x| Ok(polygamma_q(&p.with_x(x.clone())?, 0, &b)?.value),
            p.x(),
            &step(0.5),
            b.prec(),
        )
        .unwrap();
        let a = polygamma_q(&pt(0.5, 1.5), 0, &hi).unwrap().value;
        let c = polygamma_q(&pt(0.5, 1.0), 0, &hi).unwrap().value;
        let expect = Float::with_val(hi.prec(), &a - &c) * 2u32;
        assert!(rel(&got, &expect) < 1e-19);
    }

    #[test]
    fn f_fd_sign_examples() {
        let b = PrecisionBudget::default();
        for &x in &[0.5, 1.0, 2.0] {
            let v = f_q_fd(&quad(3, 2, 2, 1), &pt(0.5, x), &step(0.5), &b).unwrap();
            assert!(v >= 0, "x={x}");
        }
        let v = f_q_fd(&quad(4, 3, 3, 2), &pt(2.0, 1.0), &step(0.25), &b).unwrap();
        assert!(v >= 0);
        assert!(f_q_fd(&quad(4, 3, 2, 2), &pt(2.0, 1.0), &step(0.25), &b).is_err());
    }

    #[test]
    fn f_fd_reflection_for_s_at_least_two() {
        let b = PrecisionBudget::default();
        for idx in [quad(4, 3, 3, 2), quad(5, 4, 3, 2), quad(6, 5, 4, 3)] {
            for &(x, c) in &[(1.0, 0.25), (0.3, 0.75), (2.5, 1.5)] {
                let a = f_q_fd(&idx, &pt(2.0, x), &step(c), &b).unwrap();
                let r = f_q_fd(&idx, &pt(0.5, x), &step(c), &b).unwrap();
                assert!(rel(&a, &r) <= 10.0 * b.rel_tol, "{idx} x={x} c={c}");
            }
        }
    }

    #[test]
    fn g_fd_sign_examples() {
        let b = PrecisionBudget::default();
        assert!(g_q_fd(1, &pt(0.5, 1.0), &step(0.5), &b).unwrap() >= 0);
        assert!(g_q_fd(2, &pt(2.0, 1.0), &step(2.0), &b).unwrap() <= 0);
        assert!(g_q_fd(0, &pt(2.0, 1.0), &step(2.0), &b).is_err());
    }

    #[test]
    fn g_fd_reflection() {
        let b = PrecisionBudget::default();
        for m in 1..=3 {
            for &(x, c) in &[(1.0, 0.5), (0.2, 0.25), (3.0, 2.0)] {
                let a = g_q_fd(m, &pt(3.0, x), &step(c), &b).unwrap();
                let r = g_q_fd(m, &pt(3.0, x).reflected(b.prec()), &step(c), &b).unwrap();
                assert!(rel(&a, &r) < 1e-17, "m={m} x={x} c={c}: {a} vs {r}");
            }
        }
    }

    #[test]
    fn g_deriv_first_order_matches_closed_form() {
        let b = PrecisionBudget::default();
        let tight = PrecisionBudget::new(1e-40, 50, 100_000).unwrap();
        let p = pt(2.0, 1.0);
        let d1 = polygamma_q(&p, 1, &tight).unwrap().value;
        let d2 = polygamma_q(&p, 2, &tight).unwrap().value;
        let ln_q = Float::with_val(b.prec(), 2u32).ln();
        let base = Float::with_val(b.prec(), d1.square_ref()) + &d2;
        let expect = Float::with_val(b.prec(), &base - Float::with_val(b.prec(), &ln_q * &d1));
        let got = g_q_deriv(1, &p, &b).unwrap();
        assert!(rel(&got, &expect) < 1e-19, "{got} {expect}");
        assert!(got >= 0);
        // for q > 1 the ln q term is subtracted: 0 <= G'_1 <= (psi')^2 + psi''
        assert!(got <= base);
        let below = g_q_deriv(1, &pt(0.5, 1.0), &b).unwrap();
        let d1 = polygamma_q(&pt(0.5, 1.0), 1, &b).unwrap().value;
        let d2 = polygamma_q(&pt(0.5, 1.0), 2, &b).unwrap().value;
        assert!(below >= Float::with_val(b.prec(), d1.square_ref()) + d2);
    }

    fn richardson<F: Fn(f64) -> Float>(f: F, c: f64) -> Float {
        let half = f(c / 2.0);
        let full = f(c);
        Float::with_val(half.prec(), &half * 2u32) - full
    }

    #[test]
    fn g_fd_tends_to_derivative_form() {
        let b = PrecisionBudget::default();
        let p = pt(0.5, 1.0);
        let limit = g_q_deriv(1, &p, &b).unwrap();
        let near = g_q_fd(1, &p, &step(1e-4), &b).unwrap();
        assert!(rel(&near, &limit) <= 1e-3);
        let extrap = richardson(|c| g_q_fd(1, &p, &step(c), &b).unwrap(), 1e-4);
        assert!(rel(&extrap, &limit) <= 1e-6);
        for m in 2..=4 {
            let limit = g_q_deriv(m, &pt(2.0, 0.7), &b).unwrap();
            let extrap = richardson(|c| g_q_fd(m, &pt(2.0, 0.7), &step(c), &b).unwrap(), 1e-4);
            assert!(rel(&extrap, &limit) <= 1e-5, "m={m}");
        }
    }

    #[test]
    fn g1_matches_independent_reference() {
        // mpmath at 50 digits, direct Lambert sums, c = f64 nearest to 1e-3
        let b = PrecisionBudget::default();
        let got = g_q_fd(1, &pt(0.5, 1.0), &step(1e-3), &b).unwrap();
        let expect = Float::with_val(b.prec(), Float::parse("0.28702906839050694761961480948077636106338004601603").unwrap());
        assert!(rel(&got, &expect) < 1e-20, "{got} {}", rel(&got, &expect));
    }

    #[test]
    fn f_deriv_examples() {
        let b = PrecisionBudget::default();
        for &x in &[0.5, 1.0, 2.0] {
            assert!(f_q_deriv(&quad(3, 2, 2, 1), &pt(0.5, x), &b).unwrap() >= 0);
        }
        assert!(f_q_deriv(&quad(5, 4, 4, 3), &pt(2.0, 1.0), &b).unwrap() >= 0);
        assert!(f_q_deriv(&quad(2, 1, 1, 0), &pt(2.0, 1.0), &b).is_err());

        let idx = quad(4, 3, 3, 2);
        let p = pt(0.5, 1.0);
        let limit = f_q_deriv(&idx, &p, &b).unwrap();
        let near = f_q_fd(&idx, &p, &step(1e-4), &b).unwrap();
        assert!(rel(&near, &limit) <= 1e-2);
        let extrap = richardson(|c| f_q_fd(&idx, &p, &step(c), &b).unwrap(), 1e-3);
        assert!(rel(&extrap, &limit) <= 1e-5);
    }

    #[test]
    fn g2_is_minus_derivative_of_g1() {
        let b = PrecisionBudget::default();
        let h = 1e-5;
        for &(q, x, c) in &[(0.5, 1.0, 0.5), (2.0, 0.8, 0.25), (3.0, 2.0, 1.5)] {
            let g1 = |x: f64| g_q_fd(1, &pt(q, x), &step(c), &b).unwrap();
            let num = Float::with_val(b.prec(), &g1(x + h) - &g1(x - h)) / (2.0 * h);
            let g2 = g_q_fd(2, &pt(q, x), &step(c), &b).unwrap();
            let neg = Float::with_val(b.prec(), -&g2);
            assert!(rel(&num, &neg) <= 1e-6, "q={q} x={x} c={c}");
        }
    }

    #[test]
    fn classical_examples() {
        let v = f_classic(&quad(2, 1, 1, 0), 1.0, 1.0).unwrap();
        let t1 = psi_classical_deriv(1.0, 1).unwrap();
        let t2 = psi_classical_deriv(1.0, 2).unwrap();
        let expect = Float::with_val(192, t1.square_ref()) + t2;
        assert!(rel(&v, &expect) < 1e-40);
        assert!(v >= 0);
        for &x in &[0.5, 1.0, 3.0] {
            assert!(f_classic(&quad(3, 2, 2, 1), x, 0.5).unwrap() >= 0);
        }
        for idx in [quad(3, 2, 2, 1), quad(5, 3, 2, 1), quad(4, 4, 4, 4)] {
            assert!(f_classic(&idx, 1.3, 0.0).unwrap() > 0, "{idx}");
        }
        assert!(f_classic(&quad(3, 2, 2, 1), 0.0, 0.5).is_err());
    }

    #[test]
    fn classical_is_affine_in_t() {
        let idx = quad(3, 2, 2, 1);
        for &x in &[0.4, 2.0] {
            for &(t1, t2) in &[(0.25, 0.75), (-1.0, 2.0)] {
                let a = f_classic(&idx, x, t1).unwrap() + f_classic(&idx, x, t2).unwrap();
                let m = f_classic(&idx, x, (t1 + t2) / 2.0).unwrap() * 2u32;
                assert!(rel(&a, &m) < 1e-40);
            }
            // decreasing in t since psi'' psi''' ... product carries a positive sign
            let lo = f_classic(&idx, x, 0.1).unwrap();
            let hi = f_classic(&idx, x, 0.9).unwrap();
            assert!(lo > hi);
        }
    }

    #[test]
    fn difference_chain_direction() {
        let b = PrecisionBudget::default();
        for &x in &[0.1, 1.0, 4.0] {
            let ch = psi_difference_chain(&pt(0.7, x), &step(0.5), &b).unwrap();
            assert!(ch.strictly_decreasing(), "x={x}");
            let ch = psi_difference_chain(&pt(0.7, x), &step(2.0), &b).unwrap();
            assert!(ch.strictly_increasing(), "x={x}");
        }
        assert!(psi_difference_chain(&pt(2.0, 1.0), &step(0.5), &b).is_err());
    }

    #[test]
    fn classical_finite_difference_inequality() {
        // (psi(x+c) - psi(x))^2 / c > psi'(x) - psi'(x+c) for 0 < c < 1
        for &x in &[0.2, 1.0, 5.0] {
            for &c in &[0.1, 0.5, 0.9] {
                let d = psi_classical_deriv(x + c, 0).unwrap() - psi_classical_deriv(x, 0).unwrap();
                let lhs = Float::with_val(192, d.square_ref()) / c;
                let rhs = psi_classical_deriv(x, 1).unwrap() - psi_classical_deriv(x + c, 1).unwrap();
                assert!(lhs > rhs, "x={x} c={c}");
            }
        }
    }
}
