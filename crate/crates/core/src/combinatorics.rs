//! Exact power-convolution sequences and the inequalities built on them.
//!
//! ```text
//! a(m,n)_k     = sum_{j=1}^{k}   j^{m-1} (k-j)^{n-1}
//! b(r,m,n,s)_k = alpha_{r,m,n,s} sum_{j=1}^{k} (k-j)^{r-1} j^{s-1}
//! c(t,s)_k     = sum_{j=0}^{k-1} j^t (k-j)^s
//! ```
//!
//! Everything here is big-integer / big-rational arithmetic. `0^0 = 1`
//! throughout and empty sums are zero.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{DomainError, Error, Result};
use crate::functionals::{structure_constants, IndexQuad};

/// `base^exp` with `0^0 = 1`.
pub fn pow0(base: u64, exp: u32) -> Integer {
    Integer::from(Integer::u_pow_u(base as u32, exp))
}

fn fact(k: u32) -> Integer {
    Integer::from(Integer::factorial(k))
}

fn binom(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

/// `(M-1)!(N-1)!/((R-1)!(S-1)!)` without ordering requirements, for the
/// shifted-index families of the induction where `M < N` can occur.
fn alpha_raw(r: u32, m: u32, n: u32, s: u32) -> Rational {
    debug_assert!(r >= 1 && m >= 1 && n >= 1 && s >= 1);
    Rational::from((fact(m - 1) * fact(n - 1), fact(r - 1) * fact(s - 1)))
}

/// Powers `j^e` for `0 <= j <= max_base`, `0 <= e <= max_exp`.
struct PowerTable {
    rows: Vec<Vec<Integer>>,
}

impl PowerTable {
    fn new(max_base: usize, max_exp: u32) -> Self {
        let rows = (0..=max_exp)
            .map(|e| (0..=max_base).map(|j| pow0(j as u64, e)).collect())
            .collect();
        PowerTable { rows }
    }

    fn get(&self, base: usize, exp: u32) -> &Integer {
        &self.rows[exp as usize][base]
    }
}

/// `sum_{j=lo}^{hi} j^e1 (k-j)^e2` for every `k` in `1..=len`.
fn conv_series(len: usize, e1: u32, e2: u32, j_from_zero: bool, table: &PowerTable) -> Vec<Integer> {
    (1..=len)
        .map(|k| {
            let (lo, hi) = if j_from_zero { (0, k - 1) } else { (1, k) };
            let mut acc = Integer::new();
            for j in lo..=hi {
                acc += table.get(j, e1) * table.get(k - j, e2);
            }
            acc
        })
        .collect()
}

pub fn seq_a(m: u32, n: u32, k: u64) -> Result<Integer> {
    if m == 0 || n == 0 || k == 0 {
        return Err(DomainError::Argument(format!("a(m,n)_k needs m,n,k >= 1, got ({m},{n},{k})")).into());
    }
    let mut acc = Integer::new();
    for j in 1..=k {
        acc += pow0(j, m - 1) * pow0(k - j, n - 1);
    }
    Ok(acc)
}

pub fn seq_b(idx: &IndexQuad, k: u64) -> Result<Rational> {
    idx.require_balanced()?;
    if idx.s == 0 || k == 0 {
        return Err(DomainError::Argument(format!("b{idx}_k needs s >= 1 and k >= 1")).into());
    }
    let alpha = structure_constants(idx)?.alpha;
    let mut acc = Integer::new();
    for j in 1..=k {
        acc += pow0(k - j, idx.r - 1) * pow0(j, idx.s - 1);
    }
    Ok(alpha * acc)
}

pub fn seq_c(t: u32, s: u32, k: u64) -> Result<Integer> {
    if s == 0 || k == 0 {
        return Err(DomainError::Argument(format!("c(t,s)_k needs s,k >= 1, got ({t},{s},{k})")).into());
    }
    let mut acc = Integer::new();
    for j in 0..k {
        acc += pow0(j, t) * pow0(k - j, s);
    }
    Ok(acc)
}

/// `T(j;k) = j^{m-1}(k-j)^{n-1} + (k-j)^{m-1} j^{n-1} - alpha (j^{r-1}(k-j)^{s-1} + (k-j)^{r-1} j^{s-1})`
/// for `1 <= j <= k/2`.
pub fn t_term(idx: &IndexQuad, j: u64, k: u64) -> Result<Rational> {
    idx.require_balanced()?;
    if idx.s == 0 {
        return Err(DomainError::Argument("T-terms need s >= 1".into()).into());
    }
    if j == 0 || 2 * j > k {
        return Err(DomainError::Argument(format!("T-term index j={j} outside 1..=k/2 for k={k}")).into());
    }
    let IndexQuad { r, m, n, s } = *idx;
    let i = k - j;
    let lead = pow0(j, m - 1) * pow0(i, n - 1) + pow0(i, m - 1) * pow0(j, n - 1);
    let sub = pow0(j, r - 1) * pow0(i, s - 1) + pow0(i, r - 1) * pow0(j, s - 1);
    Ok(Rational::from(lead) - structure_constants(idx)?.alpha * sub)
}

/// `sum_{j=1}^{floor(k/2)} T(j;k) (1 - [2j = k]/2)`.
pub fn symmetrized_t_sum(idx: &IndexQuad, k: u64) -> Result<Rational> {
    let mut acc = Rational::new();
    for j in 1..=k / 2 {
        let t = t_term(idx, j, k)?;
        if 2 * j == k {
            acc += t / 2u32;
        } else {
            acc += t;
        }
    }
    Ok(acc)
}

/// Which family a materialized sequence belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SeqKind {
    A { m: u32, n: u32 },
    B { r: u32, m: u32, n: u32, s: u32 },
    C { t: u32, s: u32 },
    Custom { label: String },
    Diff { order: usize, of: Box<SeqKind> },
}

impl fmt::Display for SeqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqKind::A { m, n } => write!(f, "a({m},{n})"),
            SeqKind::B { r, m, n, s } => write!(f, "b({r},{m},{n},{s})"),
            SeqKind::C { t, s } => write!(f, "c({t},{s})"),
            SeqKind::Custom { label } => f.write_str(label),
            SeqKind::Diff { order, of } => write!(f, "D^{order} {of}"),
        }
    }
}

/// A finite prefix `x_1, ..., x_len` of an exact sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSeq {
    values: Vec<Rational>,
    kind: SeqKind,
}

impl ExactSeq {
    pub fn from_values(values: Vec<Rational>, kind: SeqKind) -> Self {
        ExactSeq { values, kind }
    }

    pub fn a(m: u32, n: u32, len: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(DomainError::Argument(format!("a({m},{n}) needs m,n >= 1")).into());
        }
        let table = PowerTable::new(len, m.max(n));
        Ok(Self::a_with(m, n, len, &table))
    }

    fn a_with(m: u32, n: u32, len: usize, table: &PowerTable) -> Self {
        let values = conv_series(len, m - 1, n - 1, false, table)
            .into_iter()
            .map(Rational::from)
            .collect();
        ExactSeq {
            values,
            kind: SeqKind::A { m, n },
        }
    }

    pub fn b(idx: &IndexQuad, len: usize) -> Result<Self> {
        idx.require_balanced()?;
        if idx.s == 0 {
            return Err(DomainError::Argument(format!("b{idx} needs s >= 1")).into());
        }
        let table = PowerTable::new(len, idx.r);
        Ok(Self::b_raw(idx.r, idx.m, idx.n, idx.s, len, &table))
    }

    /// `b(r,m,n,s)` by formula, with only `r, m, n, s >= 1` required.
    fn b_raw(r: u32, m: u32, n: u32, s: u32, len: usize, table: &PowerTable) -> Self {
        let alpha = alpha_raw(r, m, n, s);
        let values = conv_series(len, s - 1, r - 1, false, table)
            .into_iter()
            .map(|v| Rational::from(v) * &alpha)
            .collect();
        ExactSeq {
            values,
            kind: SeqKind::B { r, m, n, s },
        }
    }

    pub fn c(t: u32, s: u32, len: usize) -> Result<Self> {
        let table = PowerTable::new(len, t.max(s));
        Ok(Self::c_with(t, s, len, &table))
    }

    fn c_with(t: u32, s: u32, len: usize, table: &PowerTable) -> Self {
        let values = conv_series(len, t, s, true, table)
            .into_iter()
            .map(Rational::from)
            .collect();
        ExactSeq {
            values,
            kind: SeqKind::C { t, s },
        }
    }

    pub fn kind(&self) -> &SeqKind {
        &self.kind
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 1-based access, `x_k`.
    pub fn get(&self, k: usize) -> Option<&Rational> {
        k.checked_sub(1).and_then(|i| self.values.get(i))
    }

    fn at(&self, k: usize) -> &Rational {
        &self.values[k - 1]
    }

    /// `Delta^{(order)} x`, with `(Delta x)_k = x_{k+1} - x_k`.
    pub fn forward_diff(&self, order: usize) -> Result<ExactSeq> {
        if order == 0 || self.values.len() <= order {
            return Err(Error::Length {
                len: self.values.len(),
                order,
            });
        }
        let mut cur = self.values.clone();
        for _ in 0..order {
            cur = cur.windows(2).map(|w| Rational::from(&w[1] - &w[0])).collect();
        }
        Ok(ExactSeq {
            values: cur,
            kind: SeqKind::Diff {
                order,
                of: Box::new(self.kind.clone()),
            },
        })
    }

    /// `order = 0` returns a copy.
    fn diff_or_self(&self, order: usize) -> ExactSeq {
        if order == 0 {
            self.clone()
        } else {
            self.forward_diff(order).expect("sequence materialized long enough")
        }
    }
}

pub fn seq_forward_diff(seq: &ExactSeq, order: usize) -> Result<ExactSeq> {
    seq.forward_diff(order)
}

/// Which result, if any, covers a parameter combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Regime {
    ProvenLemma1,
    ProvenLemma2,
    ProvenTheorem1,
    Identity,
    Empirical,
}

impl Regime {
    pub fn is_proven(&self) -> bool {
        !matches!(self, Regime::Empirical)
    }
}

/// Which regime covers `a(m,n)_k >= b(r,m,n,s)_k` for a balanced quadruple.
pub fn conv_regime(idx: &IndexQuad) -> Regime {
    match (idx.s, idx.n) {
        (1, _) => Regime::ProvenLemma1,
        (2, _) => Regime::ProvenLemma2,
        (3, 4) => Regime::ProvenLemma2,
        _ => Regime::Empirical,
    }
}

/// An exact value as numerator/denominator strings, or a decimal rendering
/// for checks done in floating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WitnessValue {
    Exact { num: String, den: String },
    Decimal { decimal: String },
}

impl From<&Rational> for WitnessValue {
    fn from(v: &Rational) -> Self {
        WitnessValue::Exact {
            num: v.numer().to_string(),
            den: v.denom().to_string(),
        }
    }
}

impl From<&Integer> for WitnessValue {
    fn from(v: &Integer) -> Self {
        WitnessValue::Exact {
            num: v.to_string(),
            den: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub check: String,
    pub params: String,
    pub k: Option<u64>,
    pub lhs: WitnessValue,
    pub rhs: WitnessValue,
    pub regime: Regime,
}

/// Outcome of an exact (or high-precision) inequality sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub ranges: BTreeMap<String, String>,
    pub checked: u64,
    /// Failures inside proven regimes or of exact identities.
    pub violations: Vec<Witness>,
    pub equalities: Vec<Witness>,
    /// Failures observed where no result is claimed.
    pub empirical_violations: Vec<Witness>,
    pub pass: bool,
}

impl LemmaReport {
    pub fn new(lemma: &str) -> Self {
        LemmaReport {
            lemma: lemma.to_string(),
            ranges: BTreeMap::new(),
            checked: 0,
            violations: Vec::new(),
            equalities: Vec::new(),
            empirical_violations: Vec::new(),
            pass: true,
        }
    }

    pub fn with_range(mut self, key: &str, value: impl ToString) -> Self {
        self.ranges.insert(key.to_string(), value.to_string());
        self
    }

    /// Records `lhs >= rhs`.
    pub fn check_ge<T>(&mut self, check: &str, params: &str, k: Option<u64>, lhs: &T, rhs: &T, regime: Regime)
    where
        T: PartialOrd,
        for<'a> WitnessValue: From<&'a T>,
    {
        self.checked += 1;
        let w = || Witness {
            check: check.to_string(),
            params: params.to_string(),
            k,
            lhs: lhs.into(),
            rhs: rhs.into(),
            regime,
        };
        if lhs < rhs {
            if regime.is_proven() {
                self.violations.push(w());
            } else {
                self.empirical_violations.push(w());
            }
        } else if lhs == rhs {
            self.equalities.push(w());
        }
    }

    /// Records an exact identity `lhs == rhs`; mismatches are violations.
    pub fn check_eq<T>(&mut self, check: &str, params: &str, k: Option<u64>, lhs: &T, rhs: &T)
    where
        T: PartialEq,
        for<'a> WitnessValue: From<&'a T>,
    {
        self.checked += 1;
        if lhs != rhs {
            self.violations.push(Witness {
                check: check.to_string(),
                params: params.to_string(),
                k,
                lhs: lhs.into(),
                rhs: rhs.into(),
                regime: Regime::Identity,
            });
        }
    }

    pub fn merge(&mut self, other: LemmaReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
        self.equalities.extend(other.equalities);
        self.empirical_violations.extend(other.empirical_violations);
    }

    pub fn finish(mut self) -> Self {
        self.pass = self.violations.is_empty();
        self
    }
}

fn conv_sweep(quads: &[IndexQuad], k_max: usize, name: &str) -> Vec<LemmaReport> {
    let max_exp = quads.iter().map(|q| q.r).max().unwrap_or(1);
    let table = PowerTable::new(k_max, max_exp);
    quads
        .par_iter()
        .map(|idx| {
            let regime = conv_regime(idx);
            let a = ExactSeq::a_with(idx.m, idx.n, k_max, &table);
            let b = ExactSeq::b_raw(idx.r, idx.m, idx.n, idx.s, k_max, &table);
            let params = format!("quad={idx}");
            let mut rep = LemmaReport::new(name);
            for k in 1..=k_max {
                rep.check_ge("a>=b", &params, Some(k as u64), a.at(k), b.at(k), regime);
            }
            rep
        })
        .collect()
}

/// Checks `a(m,n)_k >= b(r,m,n,s)_k` for every balanced quadruple with
/// `r <= r_max` in the proven regimes (`s = 1`, `s = 2`, `s = 3` with
/// `n = 4`) and every `k <= k_max`.
pub fn verify_conv_inequality(r_max: u32, k_max: u64) -> LemmaReport {
    let quads: Vec<IndexQuad> = IndexQuad::enumerate_balanced(r_max, 1)
        .into_iter()
        .filter(|q| conv_regime(q).is_proven())
        .collect();
    let mut rep = LemmaReport::new("convolution_inequality")
        .with_range("r_max", r_max)
        .with_range("k_max", k_max)
        .with_range("quadruples", quads.len());
    for part in conv_sweep(&quads, k_max as usize, "convolution_inequality") {
        rep.merge(part);
    }
    rep.finish()
}

/// The same sweep over quadruples no result covers; failures land in
/// `empirical_violations` and never fail the report.
pub fn sweep_conv_empirical(r_max: u32, k_max: u64) -> LemmaReport {
    let quads: Vec<IndexQuad> = IndexQuad::enumerate_balanced(r_max, 1)
        .into_iter()
        .filter(|q| !conv_regime(q).is_proven())
        .collect();
    let mut rep = LemmaReport::new("convolution_inequality_empirical")
        .with_range("r_max", r_max)
        .with_range("k_max", k_max)
        .with_range("quadruples", quads.len());
    for part in conv_sweep(&quads, k_max as usize, "convolution_inequality_empirical") {
        rep.merge(part);
    }
    rep.finish()
}

/// Checks `sum_{j <= k/2} T(j;k)(1 - [2j=k]/2) == a(m,n)_k - b(r,m,n,s)_k`
/// for balanced quadruples with `r <= r_max`, `s >= 1`, `n >= 2`.
pub fn verify_t_sum_identity(r_max: u32, k_max: u64) -> Result<LemmaReport> {
    let quads: Vec<IndexQuad> = IndexQuad::enumerate_balanced(r_max, 1)
        .into_iter()
        .filter(|q| q.n >= 2)
        .collect();
    let parts: Result<Vec<LemmaReport>> = quads
        .par_iter()
        .map(|idx| {
            let mut rep = LemmaReport::new("t_sum_identity");
            let params = format!("quad={idx}");
            for k in 1..=k_max {
                let lhs = symmetrized_t_sum(idx, k)?;
                let rhs = Rational::from(seq_a(idx.m, idx.n, k)?) - seq_b(idx, k)?;
                rep.check_eq("t_sum=a-b", &params, Some(k), &lhs, &rhs);
            }
            Ok(rep)
        })
        .collect();
    let mut rep = LemmaReport::new("t_sum_identity")
        .with_range("r_max", r_max)
        .with_range("k_max", k_max)
        .with_range("quadruples", quads.len());
    for part in parts? {
        rep.merge(part);
    }
    Ok(rep.finish())
}

/// Regime of an induction-step check in shifted notation, where
/// `a(r+1,t+1)` is compared with `b(r+t-s+1, r+1, t+1, s+1)`.
fn step_regime(s: u32, big_t: u32) -> Regime {
    match (s, big_t) {
        (0, _) => Regime::ProvenLemma1,
        (1, _) => Regime::ProvenLemma2,
        (2, 2) | (2, 3) => Regime::ProvenLemma2,
        _ => Regime::Empirical,
    }
}

/// Verifies, exactly and for `k <= k_max`, the difference-operator
/// inequalities and identities an induction over `t` rests on, in shifted
/// notation `A_t = a(r+1, t+1)`, `B_t = b(r+t-s+1, r+1, t+1, s+1)`:
///
/// * `(Delta^{s+1} A_T)_k >= (Delta^{s+1} B_T)_k`;
/// * initial values `(Delta^i A_T)_1 >= (Delta^i B_T)_1`, `0 <= i <= s+1`;
/// * the binomial recursions for `Delta A_T` and `Delta B_T` (exact);
/// * for `s >= 1` the reduced inequality
///   `sum_{t<s} C(T,t) Delta^{s+1} A_t >= alpha_T sum_{t<r} C(r+T-s,t) Delta^{s+1} c(t,s)`;
/// * the closed forms these reduce to for `s = 0, T = 1`, for `s = 1`, and
///   for `s = 2, T = 3`.
pub fn verify_proof_steps(s: u32, big_t: u32, r: u32, k_max: u64) -> Result<LemmaReport> {
    if r < s || big_t < s || r == 0 || k_max == 0 {
        return Err(DomainError::Argument(format!(
            "proof steps need r >= s, T >= s, r >= 1, k_max >= 1; got s={s} T={big_t} r={r} k_max={k_max}"
        ))
        .into());
    }
    let regime = step_regime(s, big_t);
    let k_max = k_max as usize;
    let su = s as usize;
    // Delta^{s+2} at k = k_max needs k_max + s + 2 entries.
    let len = k_max + su + 3;
    let table = PowerTable::new(len + 2, r + big_t + 2);
    let params = format!("s={s},T={big_t},r={r}");
    let mut rep = LemmaReport::new("proof_steps")
        .with_range("s", s)
        .with_range("T", big_t)
        .with_range("r", r)
        .with_range("k_max", k_max);

    let a_t = |t: u32| ExactSeq::a_with(r + 1, t + 1, len, &table);
    let b_t = |t: u32| ExactSeq::b_raw(r + t - s + 1, r + 1, t + 1, s + 1, len, &table);
    let alpha_top = alpha_raw(r + big_t - s + 1, r + 1, big_t + 1, s + 1);

    let a_top = a_t(big_t);
    let b_top = b_t(big_t);

    // Top-order inequality.
    let da = a_top.diff_or_self(su + 1);
    let db = b_top.diff_or_self(su + 1);
    for k in 1..=k_max {
        rep.check_ge("top_difference", &params, Some(k as u64), da.at(k), db.at(k), regime);
    }

    // Initial values.
    for i in 0..=su + 1 {
        let da = a_top.diff_or_self(i);
        let db = b_top.diff_or_self(i);
        rep.check_ge(&format!("initial_value_order_{i}"), &params, Some(1), da.at(1), db.at(1), regime);
    }

    // Binomial recursion for a: Delta^{i+1} A_T = sum_{t<T} C(T,t) Delta^i A_t.
    if big_t >= 1 {
        let lower: Vec<ExactSeq> = (0..big_t).map(a_t).collect();
        for i in 0..=su + 1 {
            let lhs = a_top.diff_or_self(i + 1);
            let parts: Vec<ExactSeq> = lower.iter().map(|x| x.diff_or_self(i)).collect();
            for k in 1..=k_max {
                let mut rhs = Rational::new();
                for (t, part) in parts.iter().enumerate() {
                    rhs += Rational::from(binom(big_t, t as u32)) * part.at(k);
                }
                rep.check_eq(&format!("binomial_a_order_{i}"), &params, Some(k as u64), lhs.at(k), &rhs);
            }
        }
    }

    // Split recursion for b: Delta B_T = sum_{s<=t<T} C(T,t) B_t + alpha_T sum_{t<r} C(r+T-s,t) c(t,s).
    let c_seqs: Vec<ExactSeq> = (0..r).map(|t| ExactSeq::c_with(t, s, len, &table)).collect();
    {
        let lhs = b_top.diff_or_self(1);
        let upper: Vec<ExactSeq> = (s..big_t).map(b_t).collect();
        for k in 1..=k_max {
            let mut rhs = Rational::new();
            for (off, part) in upper.iter().enumerate() {
                rhs += Rational::from(binom(big_t, s + off as u32)) * part.at(k);
            }
            let mut tail = Rational::new();
            for (t, cs) in c_seqs.iter().enumerate() {
                tail += Rational::from(binom(r + big_t - s, t as u32)) * cs.at(k);
            }
            rhs += tail * &alpha_top;
            rep.check_eq("binomial_b_split", &params, Some(k as u64), lhs.at(k), &rhs);
        }
    }

    // Reduced inequality for s >= 1.
    let mut reduced: Vec<(Rational, Rational)> = Vec::new();
    if s >= 1 {
        let lows: Vec<ExactSeq> = (0..s).map(|t| a_t(t).diff_or_self(su + 1)).collect();
        let cds: Vec<ExactSeq> = c_seqs.iter().map(|c| c.diff_or_self(su + 1)).collect();
        for k in 1..=k_max {
            let mut lhs = Rational::new();
            for (t, d) in lows.iter().enumerate() {
                lhs += Rational::from(binom(big_t, t as u32)) * d.at(k);
            }
            let mut rhs = Rational::new();
            for (t, d) in cds.iter().enumerate() {
                rhs += Rational::from(binom(r + big_t - s, t as u32)) * d.at(k);
            }
            rhs *= &alpha_top;
            rep.check_ge("reduced_step", &params, Some(k as u64), &lhs, &rhs, regime);
            reduced.push((lhs, rhs));
        }
    }

    let kk = |k: usize, shift: u64, e: u32| pow0(k as u64 + shift, e);

    if s == 0 && big_t == 1 {
        // Delta A_1 = sum_{j<=k} j^r and Delta B_1 = k^{r+1}/(r+1).
        let da = a_top.diff_or_self(1);
        let db = b_top.diff_or_self(1);
        let mut power_sum = Integer::new();
        for k in 1..=k_max {
            power_sum += pow0(k as u64, r);
            let lhs = Rational::from(power_sum.clone());
            let rhs = Rational::from((kk(k, 0, r + 1), Integer::from(r + 1)));
            rep.check_ge("power_sum_vs_integral", &params, Some(k as u64), &lhs, &rhs, regime);
            rep.check_eq("power_sum_form_lhs", &params, Some(k as u64), da.at(k), &lhs);
            rep.check_eq("power_sum_form_rhs", &params, Some(k as u64), db.at(k), &rhs);
        }
    }

    if s == 1 {
        // (k+2)^r - (k+1)^r >= alpha_T sum_{t<r} C(r+T-1,t) (k+1)^t
        for (i, (lhs, rhs)) in reduced.iter().enumerate() {
            let k = i + 1;
            let closed_lhs = Rational::from(kk(k, 2, r) - kk(k, 1, r));
            let mut closed_rhs = Rational::new();
            for t in 0..r {
                closed_rhs += Rational::from(binom(r + big_t - 1, t) * kk(k, 1, t));
            }
            closed_rhs *= &alpha_top;
            rep.check_eq("reduced_closed_lhs", &params, Some(k as u64), lhs, &closed_lhs);
            rep.check_eq("reduced_closed_rhs", &params, Some(k as u64), rhs, &closed_rhs);
        }
        // Second-order initial value equals D(r, T).
        if big_t >= 1 {
            let d2 = Rational::from(a_top.diff_or_self(2).at(1) - b_top.diff_or_self(2).at(1));
            rep.check_eq("initial_value_is_d", &params, Some(1), &d2, &d_rt(r, big_t));
        }
    }

    if s == 2 && big_t == 3 {
        // (k+3)^r + 4(k+2)^r + (k+1)^r >= 3((k+3)^{r+1} - (k+1)^{r+1})/(r+1)
        for (i, (lhs, rhs)) in reduced.iter().enumerate() {
            let k = i + 1;
            let disp_lhs = Rational::from(kk(k, 3, r) + kk(k, 2, r) * 4u32 + kk(k, 1, r));
            let disp_rhs = Rational::from((
                (kk(k, 3, r + 1) - kk(k, 1, r + 1)) * 3u32,
                Integer::from(r + 1),
            ));
            rep.check_ge("cubic_display", &params, Some(k as u64), &disp_lhs, &disp_rhs, regime);
            let gap_display = Rational::from(&disp_lhs - &disp_rhs);
            let gap_reduced = Rational::from(lhs - rhs);
            rep.check_eq("cubic_display_equivalence", &params, Some(k as u64), &gap_display, &gap_reduced);
        }
        // Coefficient comparison 4(r+1-i) >= (5+i-r) 2^{r-i}, 0 <= i < r.
        for i in 0..r {
            let lhs = Integer::from(4 * (r + 1 - i));
            let rhs = Integer::from(5 + i as i64 - r as i64) * pow0(2, r - i);
            rep.check_ge(
                "cubic_coefficients",
                &format!("{params},i={i}"),
                None,
                &lhs,
                &rhs,
                regime,
            );
        }
    }

    Ok(rep.finish())
}

/// `D(r,t) = 2^r + 2^t - 2 - r! t! / (r+t-1)! * 2^{r+t-1}`.
pub fn d_rt(r: u32, t: u32) -> Rational {
    assert!(r >= 1 && t >= 1, "D(r,t) needs r,t >= 1");
    let lead = Rational::from(pow0(2, r) + pow0(2, t) - 2u32);
    let sub = Rational::from((fact(r) * fact(t) * pow0(2, r + t - 1), fact(r + t - 1)));
    lead - sub
}

/// Exact sweeps of the power-sum bounds:
///
/// * `m sum_{j=1}^{n-1} (n-j)^{m-1} >= n^m - (m-1) n^{m-1} - [m=1]`, `n >= 2`
///   (equality for `m = 1, 2`);
/// * `(r+1) sum_{i=1}^{n} i^r >= (n+1)^{r+1} - r (n+1)^r`;
/// * `D(r,t) >= 0` (zero at `t = 1`) and its increment formula;
/// * `((n+1)^{r+1} - n^{r+1})/(r+1) <= (n^r + (n+1)^r)/2 <= (r (n+1)^r + n^r)/(r+1)`.
pub fn verify_power_sum_bounds(m_max: u32, n_max: u32) -> LemmaReport {
    let mut rep = LemmaReport::new("power_sum_bounds")
        .with_range("m_max", m_max)
        .with_range("n_max", n_max);
    let nm = n_max as u64;

    for m in 1..=m_max {
        let params = format!("m={m}");
        let mut acc = Integer::new();
        // acc = sum_{i=1}^{n-1} i^{m-1}
        for n in 2..=nm {
            acc += pow0(n - 1, m - 1);
            let lhs = Integer::from(&acc * m);
            let delta = u32::from(m == 1);
            let rhs = pow0(n, m) - Integer::from(m - 1) * pow0(n, m - 1) - delta;
            rep.check_ge("power_sum_bound", &params, Some(n), &lhs, &rhs, Regime::ProvenTheorem1);
        }
    }

    for r in 1..m_max.max(2) {
        let params = format!("r={r}");
        let mut acc = Integer::new();
        for n in 1..=nm {
            acc += pow0(n, r);
            let lhs = Integer::from(&acc * (r + 1));
            let rhs = pow0(n + 1, r + 1) - Integer::from(r) * pow0(n + 1, r);
            rep.check_ge("shifted_power_sum", &params, Some(n), &lhs, &rhs, Regime::ProvenTheorem1);
        }
    }

    let d_max = m_max.max(2);
    for r in 1..=d_max {
        for t in 1..=d_max {
            let params = format!("r={r},t={t}");
            rep.check_ge("d_nonnegative", &params, None, &d_rt(r, t), &Rational::new(), Regime::ProvenLemma2);
            let inc = Rational::from(&d_rt(r, t + 1) - &d_rt(r, t));
            let formula = Rational::from(pow0(2, t))
                - Rational::from((fact(r) * fact(t) * pow0(2, r + t - 1), fact(r + t)))
                    * Rational::from(t as i64 + 2 - r as i64);
            rep.check_eq("d_increment", &params, None, &inc, &formula);
        }
    }

    for r in 1..=m_max {
        let params = format!("r={r}");
        for n in 1..=nm {
            let integral = Rational::from((pow0(n + 1, r + 1) - pow0(n, r + 1), Integer::from(r + 1)));
            let mid = Rational::from((pow0(n, r) + pow0(n + 1, r), Integer::from(2)));
            let weighted = Rational::from((
                pow0(n + 1, r) * r + pow0(n, r),
                Integer::from(r + 1),
            ));
            rep.check_ge("hadamard_left", &params, Some(n), &mid, &integral, Regime::ProvenTheorem1);
            rep.check_ge("hadamard_right", &params, Some(n), &weighted, &mid, Regime::ProvenTheorem1);
        }
    }

    rep.finish()
}
