//! Max-CSP instances over `Z_q`, brute-force values, `rho_min`, and the
//! randomized-mask stream sampler with its `clean` projection.
//!
//! Truth tables list `Z_q^k` in lexicographic order with the first
//! coordinate most significant, so DICUT is `[0, 1, 0, 0]` and CUT is
//! `[0, 1, 1, 0]`.
//!
//! File formats (variables 1-indexed, predicate ids 0-based):
//!
//! - predicate file: one or more blocks `q k` followed by `q^k` bits;
//! - instance file: header `q k n m`, then `m` lines `pred_id j_1 .. j_k`;
//! - stream file: as an instance file, each line followed by `z_1 .. z_k`;
//! - assignment file: one line of `n` values in `Z_q`.

use std::fmt::Write as _;

use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng as _;
use thiserror::Error;

use crate::seeding::{rng_from_seed, Rng};

/// Default cap on `q^n` for [`brute_force_val`].
pub const DEFAULT_ASSIGNMENT_LIMIT: u64 = 1 << 24;

pub type Value = Ratio<u64>;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CspError {
    #[error("q = {0} must be at least 2")]
    Alphabet(u32),
    #[error("arity must be at least 1")]
    Arity,
    #[error("truth table has {got} entries, expected {want}")]
    TableSize { got: usize, want: usize },
    #[error("predicates disagree on (q, k)")]
    MixedSignature,
    #[error("constraint {index}: {msg}")]
    BadConstraint { index: usize, msg: String },
    #[error("instance has no constraints")]
    Empty,
    #[error("assignment has {got} values, expected {want}, all below q")]
    BadAssignment { got: usize, want: usize },
    #[error("q^n = {q}^{n} exceeds the enumeration limit {limit}")]
    TooLarge { q: u32, n: usize, limit: u64 },
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("invalid stream parameters: {0}")]
    Stream(String),
    #[error("grid resolution {0} is below 10")]
    Grid(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

fn pow_usize(q: u32, k: usize) -> Option<usize> {
    (q as usize).checked_pow(k as u32)
}

/// Lexicographic index of `a` in `Z_q^k`, first coordinate most significant.
pub fn tuple_index(q: u32, a: &[u32]) -> usize {
    a.iter().fold(0usize, |acc, &x| acc * q as usize + x as usize)
}

/// Inverse of [`tuple_index`].
pub fn index_tuple(q: u32, k: usize, mut idx: usize) -> Vec<u32> {
    let mut a = vec![0u32; k];
    for slot in a.iter_mut().rev() {
        *slot = (idx % q as usize) as u32;
        idx /= q as usize;
    }
    a
}

/// A predicate `Z_q^k -> {0, 1}` given by its truth table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Predicate {
    q: u32,
    k: usize,
    table: Vec<bool>,
}

impl Predicate {
    pub fn new(q: u32, k: usize, table: Vec<bool>) -> Result<Self, CspError> {
        if q < 2 {
            return Err(CspError::Alphabet(q));
        }
        if k == 0 {
            return Err(CspError::Arity);
        }
        let want = pow_usize(q, k).ok_or(CspError::TableSize { got: table.len(), want: usize::MAX })?;
        if table.len() != want {
            return Err(CspError::TableSize { got: table.len(), want });
        }
        Ok(Predicate { q, k, table })
    }

    /// `(1 - x) y` on bits: true only at `(0, 1)`.
    pub fn dicut() -> Self {
        Predicate { q: 2, k: 2, table: vec![false, true, false, false] }
    }

    /// `x + y mod 2`.
    pub fn cut() -> Self {
        Predicate { q: 2, k: 2, table: vec![false, true, true, false] }
    }

    pub fn constant(q: u32, k: usize, value: bool) -> Result<Self, CspError> {
        let size = pow_usize(q, k).ok_or(CspError::Arity)?;
        Self::new(q, k, vec![value; size])
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, a: &[u32]) -> bool {
        self.table[tuple_index(self.q, a)]
    }

    /// `f^{-1}(1)` in lexicographic order.
    pub fn satisfying(&self) -> Vec<Vec<u32>> {
        (0..self.table.len())
            .filter(|&i| self.table[i])
            .map(|i| index_tuple(self.q, self.k, i))
            .collect()
    }
}

/// A predicate applied to `k` distinct variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub pred: usize,
    pub vars: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspInstance {
    q: u32,
    k: usize,
    n: usize,
    predicates: Vec<Predicate>,
    constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new(n: usize, predicates: Vec<Predicate>, constraints: Vec<Constraint>) -> Result<Self, CspError> {
        let first = predicates.first().ok_or(CspError::MixedSignature)?;
        let (q, k) = (first.q, first.k);
        if predicates.iter().any(|p| p.q != q || p.k != k) {
            return Err(CspError::MixedSignature);
        }
        for (index, c) in constraints.iter().enumerate() {
            let bad = |msg: String| CspError::BadConstraint { index, msg };
            if c.pred >= predicates.len() {
                return Err(bad(format!("predicate id {} out of range", c.pred)));
            }
            if c.vars.len() != k {
                return Err(bad(format!("{} variables, expected {k}", c.vars.len())));
            }
            if let Some(v) = c.vars.iter().find(|&&v| v as usize >= n) {
                return Err(bad(format!("variable {v} outside [0, {n})")));
            }
            if (1..k).any(|i| c.vars[..i].contains(&c.vars[i])) {
                return Err(bad("repeated variable".into()));
            }
        }
        Ok(CspInstance { q, k, n, predicates, constraints })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn satisfied(&self, x: &[u32], buf: &mut Vec<u32>) -> u64 {
        self.constraints
            .iter()
            .filter(|c| {
                buf.clear();
                buf.extend(c.vars.iter().map(|&v| x[v as usize]));
                self.predicates[c.pred].eval(buf)
            })
            .count() as u64
    }
}

/// Fraction of constraints of `psi` satisfied by `x`.
pub fn val_at(psi: &CspInstance, x: &[u32]) -> Result<Value, CspError> {
    if psi.m() == 0 {
        return Err(CspError::Empty);
    }
    if x.len() != psi.n || x.iter().any(|&a| a >= psi.q) {
        return Err(CspError::BadAssignment { got: x.len(), want: psi.n });
    }
    Ok(Value::new(psi.satisfied(x, &mut Vec::new()), psi.m() as u64))
}

pub fn brute_force_val(psi: &CspInstance) -> Result<Value, CspError> {
    brute_force_val_with_limit(psi, DEFAULT_ASSIGNMENT_LIMIT)
}

/// Maximum of [`val_at`] over all `q^n` assignments.
pub fn brute_force_val_with_limit(psi: &CspInstance, limit: u64) -> Result<Value, CspError> {
    if psi.m() == 0 {
        return Err(CspError::Empty);
    }
    let too_large = CspError::TooLarge { q: psi.q, n: psi.n, limit };
    let total = (psi.q as u64).checked_pow(psi.n as u32).ok_or(too_large.clone())?;
    if total > limit {
        return Err(too_large);
    }
    let mut x = vec![0u32; psi.n];
    let mut buf = Vec::with_capacity(psi.k);
    let mut best = 0;
    for _ in 0..total {
        best = best.max(psi.satisfied(&x, &mut buf));
        if best == psi.m() as u64 {
            break;
        }
        // mixed-radix increment, last variable fastest
        for slot in x.iter_mut().rev() {
            *slot += 1;
            if *slot < psi.q {
                break;
            }
            *slot = 0;
        }
    }
    Ok(Value::new(best, psi.m() as u64))
}

/// A distribution on `Z_q^k` with exact rational probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskDistribution {
    q: u32,
    k: usize,
    support: Vec<(Vec<u32>, Value)>,
}

impl MaskDistribution {
    pub fn new(q: u32, k: usize, support: Vec<(Vec<u32>, Value)>) -> Result<Self, CspError> {
        let bad = |m: &str| CspError::Distribution(m.to_string());
        if q < 2 {
            return Err(CspError::Alphabet(q));
        }
        if support.is_empty() {
            return Err(bad("empty support"));
        }
        for (i, (a, p)) in support.iter().enumerate() {
            if a.len() != k || a.iter().any(|&x| x >= q) {
                return Err(bad("support point outside Z_q^k"));
            }
            if *p == Value::from_integer(0) {
                return Err(bad("zero-probability support point"));
            }
            if support[..i].iter().any(|(b, _)| b == a) {
                return Err(bad("repeated support point"));
            }
        }
        let total: Value = support.iter().map(|(_, p)| *p).sum();
        if total != Value::from_integer(1) {
            return Err(CspError::Distribution(format!("probabilities sum to {total}")));
        }
        Ok(MaskDistribution { q, k, support })
    }

    /// A distribution whose every coordinate marginal is uniform on `Z_q`.
    pub fn onewise(q: u32, k: usize, support: Vec<(Vec<u32>, Value)>) -> Result<Self, CspError> {
        let d = Self::new(q, k, support)?;
        if !d.is_onewise() {
            return Err(CspError::Distribution("coordinate marginals are not uniform".into()));
        }
        Ok(d)
    }

    /// Uniform on all of `Z_q^k`.
    pub fn uniform(q: u32, k: usize) -> Result<Self, CspError> {
        let size = pow_usize(q, k).ok_or(CspError::Arity)?;
        let p = Value::new(1, size as u64);
        Self::new(q, k, (0..size).map(|i| (index_tuple(q, k, i), p)).collect())
    }

    /// Uniform on `f^{-1}(1)`.
    pub fn uniform_on(f: &Predicate) -> Result<Self, CspError> {
        let sat = f.satisfying();
        let p = Value::new(1, sat.len().max(1) as u64);
        Self::new(f.q, f.k, sat.into_iter().map(|a| (a, p)).collect())
    }

    pub fn support(&self) -> &[(Vec<u32>, Value)] {
        &self.support
    }

    /// Exact `Pr[a_i = x]`.
    pub fn marginal(&self, i: usize, x: u32) -> Value {
        self.support.iter().filter(|(a, _)| a[i] == x).map(|(_, p)| *p).sum()
    }

    pub fn is_onewise(&self) -> bool {
        let u = Value::new(1, self.q as u64);
        (0..self.k).all(|i| (0..self.q).all(|x| self.marginal(i, x) == u))
    }

    pub fn supported_by(&self, f: &Predicate) -> bool {
        f.q == self.q && f.k == self.k && self.support.iter().all(|(a, _)| f.eval(a))
    }

    /// Exact sampling: draw an integer below the common denominator.
    pub fn sample(&self, rng: &mut Rng) -> &[u32] {
        let l = self.support.iter().fold(1u64, |acc, (_, p)| acc.lcm(p.denom()));
        let mut u = rng.gen_range(0..l);
        for (a, p) in &self.support {
            let w = p.numer() * (l / p.denom());
            if u < w {
                return a;
            }
            u -= w;
        }
        unreachable!("probabilities sum to 1")
    }
}

/// One member `(f, D_f)` of the predicate family, with an integer weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmdMember {
    pub predicate: Predicate,
    pub dist: MaskDistribution,
    pub weight: u64,
}

/// Weighted family of `(f, D_f)` pairs sharing `(q, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmdFamily {
    q: u32,
    k: usize,
    members: Vec<RmdMember>,
}

impl RmdFamily {
    /// Every `D_f` must be one-wise uniform and supported on `f^{-1}(1)`.
    pub fn new(members: Vec<RmdMember>) -> Result<Self, CspError> {
        if let Some(m) = members.iter().find(|m| !m.dist.is_onewise()) {
            return Err(CspError::Distribution(format!(
                "mask distribution for {:?} is not one-wise uniform",
                m.predicate.table
            )));
        }
        Self::new_unchecked_marginals(members)
    }

    /// Like [`RmdFamily::new`] but without the marginal condition. Needed
    /// for predicates such as DICUT whose satisfying set admits no one-wise
    /// distribution at all.
    pub fn new_unchecked_marginals(members: Vec<RmdMember>) -> Result<Self, CspError> {
        let first = members.first().ok_or(CspError::Distribution("empty family".into()))?;
        let (q, k) = (first.predicate.q, first.predicate.k);
        for m in &members {
            if m.predicate.q != q || m.predicate.k != k {
                return Err(CspError::MixedSignature);
            }
            if !m.dist.supported_by(&m.predicate) {
                return Err(CspError::Distribution("mask support outside the satisfying set".into()));
            }
            if m.weight == 0 {
                return Err(CspError::Distribution("zero weight".into()));
            }
        }
        Ok(RmdFamily { q, k, members })
    }

    /// `{DICUT}` with its only satisfying point `(0, 1)` as the mask.
    pub fn dicut() -> Self {
        let dist = MaskDistribution::new(2, 2, vec![(vec![0, 1], Value::from_integer(1))]).expect("valid");
        Self::new_unchecked_marginals(vec![RmdMember { predicate: Predicate::dicut(), dist, weight: 1 }])
            .expect("valid")
    }

    /// `{CUT}` with the uniform, one-wise distribution on `{(0,1), (1,0)}`.
    pub fn cut() -> Self {
        let f = Predicate::cut();
        let dist = MaskDistribution::uniform_on(&f).expect("valid");
        Self::new(vec![RmdMember { predicate: f, dist, weight: 1 }]).expect("valid")
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn members(&self) -> &[RmdMember] {
        &self.members
    }

    pub fn predicates(&self) -> Vec<Predicate> {
        self.members.iter().map(|m| m.predicate.clone()).collect()
    }

    fn pick(&self, rng: &mut Rng) -> usize {
        let total: u64 = self.members.iter().map(|m| m.weight).sum();
        let mut u = rng.gen_range(0..total);
        for (i, m) in self.members.iter().enumerate() {
            if u < m.weight {
                return i;
            }
            u -= m.weight;
        }
        unreachable!()
    }
}

/// `(f_i, j(i), z(i))`; `pred` indexes the family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmdSymbol {
    pub pred: usize,
    pub vars: Vec<u32>,
    pub z: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmdSample {
    pub q: u32,
    pub k: usize,
    pub n: usize,
    pub x_star: Vec<u32>,
    pub symbols: Vec<RmdSymbol>,
}

/// Sample `x*` and a stream of `alpha_n` symbols. Masks of the first `t`
/// symbols come from `D_{f_i}`, the rest are uniform, so `t = alpha_n` is the
/// YES distribution and `t = 0` the NO distribution.
pub fn sample_rmd_stream(
    family: &RmdFamily,
    n: usize,
    alpha_n: usize,
    t: usize,
    seed: u64,
) -> Result<RmdSample, CspError> {
    let (q, k) = (family.q, family.k);
    if k > n {
        return Err(CspError::Stream(format!("arity {k} exceeds n = {n}")));
    }
    if t > alpha_n {
        return Err(CspError::Stream(format!("hybrid index {t} exceeds stream length {alpha_n}")));
    }
    let mut rng = rng_from_seed(seed);
    let x_star: Vec<u32> = (0..n).map(|_| rng.gen_range(0..q)).collect();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    let mut symbols = Vec::with_capacity(alpha_n);
    for i in 0..alpha_n {
        // partial Fisher-Yates: perm[..k] becomes a uniform distinct k-tuple
        for j in 0..k {
            let r = rng.gen_range(j..n);
            perm.swap(j, r);
        }
        let vars = perm[..k].to_vec();
        let pred = family.pick(&mut rng);
        let b: Vec<u32> = if i < t {
            family.members[pred].dist.sample(&mut rng).to_vec()
        } else {
            (0..k).map(|_| rng.gen_range(0..q)).collect()
        };
        let z = vars.iter().zip(&b).map(|(&v, &bj)| (x_star[v as usize] + q - bj) % q).collect();
        symbols.push(RmdSymbol { pred, vars, z });
    }
    Ok(RmdSample { q, k, n, x_star, symbols })
}

/// Keep, in order, the constraints whose `z` is all zero.
pub fn clean(symbols: &[RmdSymbol], n: usize, predicates: &[Predicate]) -> Result<CspInstance, CspError> {
    let constraints = symbols
        .iter()
        .filter(|s| s.z.iter().all(|&z| z == 0))
        .map(|s| Constraint { pred: s.pred, vars: s.vars.clone() })
        .collect();
    CspInstance::new(n, predicates.to_vec(), constraints)
}

/// Maximiser of the inner problem of `rho_min`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoMin {
    pub value: f64,
    /// The distribution on `Z_q` attaining `value`.
    pub argmax: Vec<f64>,
}

/// `E_{f ~ D, a ~ p^k}[f(a)]` for a product distribution `p` on `Z_q`.
fn product_value(family: &[(Predicate, f64)], p: &[f64]) -> f64 {
    family
        .iter()
        .map(|(f, w)| {
            let sat: f64 = (0..f.table.len())
                .filter(|&i| f.table[i])
                .map(|i| index_tuple(f.q, f.k, i).iter().map(|&a| p[a as usize]).product::<f64>())
                .sum();
            w * sat
        })
        .sum()
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if parts == 1 {
        prefix.push(total);
        out(prefix);
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Golden-section maximisation of a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    (lo + hi) / 2.0
}

/// Inner problem of `rho_min` for a fixed weighted family: the maximum over
/// distributions `p` on `Z_q` of `E_{f, a ~ p^k}[f(a)]`.
///
/// Searched on the simplex grid `{c / grid}` and then refined locally by
/// golden-section search along coordinate directions (the last coordinate
/// absorbs the change). The refinement only ever replaces the grid optimum
/// with a better point.
pub fn rho_min(family: &[(Predicate, f64)], grid: usize) -> Result<RhoMin, CspError> {
    if grid < 10 {
        return Err(CspError::Grid(grid));
    }
    let (first, _) = family.first().ok_or(CspError::MixedSignature)?;
    let q = first.q as usize;
    if family.iter().any(|(f, _)| f.q != first.q || f.k != first.k) {
        return Err(CspError::MixedSignature);
    }
    let total_w: f64 = family.iter().map(|(_, w)| *w).sum();
    if family.iter().any(|(_, w)| *w < 0.0) || !(total_w > 0.0) {
        return Err(CspError::Distribution("family weights must be nonnegative with positive sum".into()));
    }
    let family: Vec<(Predicate, f64)> = family.iter().map(|(f, w)| (f.clone(), w / total_w)).collect();

    let mut best = RhoMin { value: f64::NEG_INFINITY, argmax: vec![] };
    compositions(grid, q, &mut Vec::with_capacity(q), &mut |c| {
        let p: Vec<f64> = c.iter().map(|&x| x as f64 / grid as f64).collect();
        let v = product_value(&family, &p);
        if v > best.value {
            best = RhoMin { value: v, argmax: p };
        }
    });

    let step = 1.0 / grid as f64;
    for _round in 0..3 {
        for i in 0..q - 1 {
            let p0 = best.argmax.clone();
            let last = q - 1;
            let pool = p0[i] + p0[last];
            let along = |x: f64| {
                let mut p = p0.clone();
                p[i] = x;
                p[last] = pool - x;
                product_value(&family, &p)
            };
            let lo = (p0[i] - step).max(0.0);
            let hi = (p0[i] + step).min(pool);
            let x = golden_max(along, lo, hi);
            let v = along(x);
            if v > best.value {
                let mut p = p0;
                p[i] = x;
                p[last] = pool - x;
                best = RhoMin { value: v, argmax: p };
            }
        }
    }
    Ok(best)
}

/// Outer minimisation over family weights on a simplex grid (`|F| <= 3`).
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRhoMin {
    pub value: f64,
    pub weights: Vec<f64>,
    pub inner: RhoMin,
}

pub fn rho_min_over_families(
    predicates: &[Predicate],
    outer_grid: usize,
    inner_grid: usize,
) -> Result<FamilyRhoMin, CspError> {
    if predicates.is_empty() || predicates.len() > 3 {
        return Err(CspError::Distribution(format!("family size {} outside 1..=3", predicates.len())));
    }
    if outer_grid < 1 {
        return Err(CspError::Grid(outer_grid));
    }
    let mut best: Option<FamilyRhoMin> = None;
    let mut err = None;
    compositions(outer_grid, predicates.len(), &mut Vec::new(), &mut |c| {
        if err.is_some() {
            return;
        }
        let w: Vec<f64> = c.iter().map(|&x| x as f64 / outer_grid as f64).collect();
        let fam: Vec<(Predicate, f64)> = predicates.iter().cloned().zip(w.iter().copied()).collect();
        match rho_min(&fam, inner_grid) {
            Ok(inner) => {
                if best.as_ref().is_none_or(|b| inner.value < b.value) {
                    best = Some(FamilyRhoMin { value: inner.value, weights: w, inner });
                }
            }
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best.expect("at least one grid point")),
    }
}

// ---- text formats ----

struct Tokens<'a> {
    it: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Tokens { it: text.split_whitespace().peekable() }
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, CspError>
    where
        T::Err: std::fmt::Display,
    {
        let tok = self.it.next().ok_or_else(|| CspError::Parse(format!("missing {what}")))?;
        tok.parse().map_err(|e| CspError::Parse(format!("bad {what} {tok:?}: {e}")))
    }

    fn done(&mut self) -> bool {
        self.it.peek().is_none()
    }
}

fn strip_comments(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n")
}

pub fn parse_predicates(text: &str) -> Result<Vec<Predicate>, CspError> {
    let text = strip_comments(text);
    let mut toks = Tokens::new(&text);
    let mut out = Vec::new();
    while !toks.done() {
        let q: u32 = toks.next("q")?;
        let k: usize = toks.next("k")?;
        let size = pow_usize(q, k).filter(|&s| s <= 1 << 24).ok_or(CspError::Parse("table too large".into()))?;
        let mut table = Vec::with_capacity(size);
        for _ in 0..size {
            match toks.next::<u8>("truth-table bit")? {
                0 => table.push(false),
                1 => table.push(true),
                b => return Err(CspError::Parse(format!("truth-table entry {b} is not a bit"))),
            }
        }
        out.push(Predicate::new(q, k, table)?);
    }
    Ok(out)
}

pub fn write_predicates(preds: &[Predicate]) -> String {
    let mut s = String::new();
    for p in preds {
        let bits: Vec<&str> = p.table.iter().map(|&b| if b { "1" } else { "0" }).collect();
        writeln!(s, "{} {}\n{}", p.q, p.k, bits.join(" ")).unwrap();
    }
    s
}

fn parse_header(toks: &mut Tokens<'_>) -> Result<(u32, usize, usize, usize), CspError> {
    Ok((toks.next("q")?, toks.next("k")?, toks.next("n")?, toks.next("m")?))
}

fn parse_vars(toks: &mut Tokens<'_>, k: usize) -> Result<Vec<u32>, CspError> {
    (0..k)
        .map(|_| {
            let j: u32 = toks.next("variable")?;
            j.checked_sub(1).ok_or(CspError::Parse("variables are 1-indexed".into()))
        })
        .collect()
}

/// Instance file; `predicates` resolves the predicate ids.
pub fn parse_instance(text: &str, predicates: &[Predicate]) -> Result<CspInstance, CspError> {
    let text = strip_comments(text);
    let mut toks = Tokens::new(&text);
    let (q, k, n, m) = parse_header(&mut toks)?;
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let pred = toks.next("predicate id")?;
        constraints.push(Constraint { pred, vars: parse_vars(&mut toks, k)? });
    }
    if !toks.done() {
        return Err(CspError::Parse(format!("more than {m} constraints")));
    }
    let psi = CspInstance::new(n, predicates.to_vec(), constraints)?;
    if psi.q != q || psi.k != k {
        return Err(CspError::MixedSignature);
    }
    Ok(psi)
}

pub fn write_instance(psi: &CspInstance) -> String {
    let mut s = format!("{} {} {} {}\n", psi.q, psi.k, psi.n, psi.m());
    for c in &psi.constraints {
        write!(s, "{}", c.pred).unwrap();
        for v in &c.vars {
            write!(s, " {}", v + 1).unwrap();
        }
        s.push('\n');
    }
    s
}

/// Stream file: `(q, k, n, symbols)`.
pub fn parse_rmd_stream(text: &str) -> Result<(u32, usize, usize, Vec<RmdSymbol>), CspError> {
    let text = strip_comments(text);
    let mut toks = Tokens::new(&text);
    let (q, k, n, m) = parse_header(&mut toks)?;
    let mut symbols = Vec::with_capacity(m);
    for _ in 0..m {
        let pred = toks.next("predicate id")?;
        let vars = parse_vars(&mut toks, k)?;
        let z = (0..k).map(|_| toks.next::<u32>("z")).collect::<Result<Vec<_>, _>>()?;
        if z.iter().any(|&x| x >= q) || vars.iter().any(|&v| v as usize >= n) {
            return Err(CspError::Parse("symbol out of range".into()));
        }
        symbols.push(RmdSymbol { pred, vars, z });
    }
    if !toks.done() {
        return Err(CspError::Parse(format!("more than {m} symbols")));
    }
    Ok((q, k, n, symbols))
}

pub fn write_rmd_stream(sample: &RmdSample) -> String {
    let mut s = format!("{} {} {} {}\n", sample.q, sample.k, sample.n, sample.symbols.len());
    for sym in &sample.symbols {
        write!(s, "{}", sym.pred).unwrap();
        for v in &sym.vars {
            write!(s, " {}", v + 1).unwrap();
        }
        for z in &sym.z {
            write!(s, " {z}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_assignment(x: &[u32]) -> String {
    let vals: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("{}\n", vals.join(" "))
}

pub fn parse_assignment(text: &str) -> Result<Vec<u32>, CspError> {
    let text = strip_comments(text);
    text.split_whitespace()
        .map(|t| t.parse().map_err(|e| CspError::Parse(format!("bad value {t:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn r(a: u64, b: u64) -> Value {
        Value::new(a, b)
    }

    fn dicut_instance(n: usize, edges: &[(u32, u32)]) -> CspInstance {
        let cs = edges.iter().map(|&(u, v)| Constraint { pred: 0, vars: vec![u, v] }).collect();
        CspInstance::new(n, vec![Predicate::dicut()], cs).unwrap()
    }

    #[test]
    fn tuple_indexing() {
        assert_eq!(tuple_index(2, &[0, 1]), 1);
        assert_eq!(tuple_index(3, &[2, 0, 1]), 19);
        assert_eq!(index_tuple(3, 3, 19), vec![2, 0, 1]);
        assert_eq!(Predicate::dicut().satisfying(), vec![vec![0, 1]]);
    }

    #[test]
    fn val_at_examples() {
        let one = dicut_instance(2, &[(0, 1)]);
        assert_eq!(val_at(&one, &[0, 1]).unwrap(), r(1, 1));
        assert_eq!(val_at(&one, &[1, 1]).unwrap(), r(0, 1));
        let two = dicut_instance(3, &[(0, 1), (1, 2)]);
        assert_eq!(val_at(&two, &[0, 1, 1]).unwrap(), r(1, 2));
        assert_eq!(val_at(&dicut_instance(2, &[]), &[0, 0]), Err(CspError::Empty));
        assert!(val_at(&one, &[0, 2]).is_err());
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_val(&dicut_instance(3, &[(0, 1), (1, 2), (2, 0)])).unwrap(), r(1, 3));
        let top = Predicate::constant(3, 2, true).unwrap();
        let psi = CspInstance::new(4, vec![top], vec![Constraint { pred: 0, vars: vec![2, 0] }]).unwrap();
        assert_eq!(brute_force_val(&psi).unwrap(), r(1, 1));
        let cut = CspInstance::new(2, vec![Predicate::cut()], vec![Constraint { pred: 0, vars: vec![0, 1] }]).unwrap();
        assert_eq!(brute_force_val(&cut).unwrap(), r(1, 1));
        let big = dicut_instance(25, &[(0, 1)]);
        assert!(matches!(brute_force_val(&big), Err(CspError::TooLarge { .. })));
    }

    #[test]
    fn instance_validation() {
        let p = vec![Predicate::dicut()];
        assert!(CspInstance::new(3, p.clone(), vec![Constraint { pred: 0, vars: vec![1, 1] }]).is_err());
        assert!(CspInstance::new(3, p.clone(), vec![Constraint { pred: 0, vars: vec![1, 3] }]).is_err());
        assert!(CspInstance::new(3, p.clone(), vec![Constraint { pred: 1, vars: vec![0, 1] }]).is_err());
        let mixed = vec![Predicate::dicut(), Predicate::constant(3, 2, true).unwrap()];
        assert_eq!(CspInstance::new(3, mixed, vec![]), Err(CspError::MixedSignature));
        assert!(Predicate::new(2, 2, vec![true; 3]).is_err());
    }

    #[test]
    fn rho_min_examples() {
        let d = rho_min(&[(Predicate::dicut(), 1.0)], 10).unwrap();
        assert!((d.value - 0.25).abs() < 1e-9, "{d:?}");
        let c = rho_min(&[(Predicate::cut(), 1.0)], 10).unwrap();
        assert!((c.value - 0.5).abs() < 1e-9);
        let one = rho_min(&[(Predicate::constant(3, 2, true).unwrap(), 1.0)], 12).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        assert!(rho_min(&[(Predicate::dicut(), 1.0)], 9).is_err());
        let mixed = [(Predicate::dicut(), 1.0), (Predicate::constant(3, 2, true).unwrap(), 1.0)];
        assert_eq!(rho_min(&mixed, 10), Err(CspError::MixedSignature));
    }

    #[test]
    fn rho_min_refinement_beats_coarse_grid() {
        // p^2 (1 - p) peaks at p = 2/3, off any grid of resolution 10
        let f = Predicate::new(2, 3, vec![false, false, false, false, false, false, true, false]).unwrap();
        let res = rho_min(&[(f, 1.0)], 10).unwrap();
        assert!((res.value - 4.0 / 27.0).abs() < 1e-9, "{res:?}");
    }

    #[test]
    fn rho_min_three_letters() {
        // Pr[a_1 != a_2] for q = 3 is maximised by the uniform distribution: 2/3
        let table = (0..9).map(|i| i / 3 != i % 3).collect();
        let f = Predicate::new(3, 2, table).unwrap();
        let res = rho_min(&[(f, 1.0)], 12).unwrap();
        assert!((res.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rho_min_monotone_under_constant_one() {
        let top = Predicate::constant(2, 2, true).unwrap();
        let base = rho_min(&[(Predicate::dicut(), 1.0)], 20).unwrap().value;
        for w in [0.01, 0.1, 0.5, 2.0] {
            let with = rho_min(&[(Predicate::dicut(), 1.0), (top.clone(), w)], 20).unwrap().value;
            assert!(with >= base - 1e-12);
        }
    }

    #[test]
    fn family_minimum() {
        let res = rho_min_over_families(&[Predicate::dicut(), Predicate::cut()], 10, 20).unwrap();
        // the DICUT vertex of the simplex is the minimiser
        assert!((res.value - 0.25).abs() < 1e-9);
        assert_eq!(res.weights, vec![1.0, 0.0]);
    }

    #[test]
    fn onewise_is_exact() {
        let half = r(1, 2);
        assert!(MaskDistribution::onewise(2, 2, vec![(vec![0, 1], half), (vec![1, 0], half)]).is_ok());
        let off = vec![(vec![0, 1], r(1, 2) + r(1, 1_000_000)), (vec![1, 0], r(1, 2) - r(1, 1_000_000))];
        assert!(MaskDistribution::onewise(2, 2, off).is_err());
        assert!(MaskDistribution::new(2, 2, vec![(vec![0, 1], half)]).is_err());
        assert!(MaskDistribution::uniform(3, 2).unwrap().is_onewise());
        assert!(!MaskDistribution::uniform_on(&Predicate::dicut()).unwrap().is_onewise());
    }

    #[test]
    fn family_validation() {
        let f = Predicate::dicut();
        let dist = MaskDistribution::uniform_on(&f).unwrap();
        assert!(RmdFamily::new(vec![RmdMember { predicate: f.clone(), dist: dist.clone(), weight: 1 }]).is_err());
        let wrong = MaskDistribution::uniform(2, 2).unwrap();
        assert!(RmdFamily::new_unchecked_marginals(vec![RmdMember { predicate: f, dist: wrong, weight: 1 }]).is_err());
        assert_eq!(RmdFamily::cut().members().len(), 1);
    }

    #[test]
    fn mask_sampling_is_exact_in_distribution() {
        let d = MaskDistribution::new(2, 2, vec![(vec![0, 0], r(1, 3)), (vec![1, 1], r(2, 3))]).unwrap();
        let mut rng = rng_from_seed(1);
        let hits = (0..30_000).filter(|_| d.sample(&mut rng) == [1, 1]).count();
        assert!((hits as f64 / 30_000.0 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn stream_shape() {
        let s = sample_rmd_stream(&RmdFamily::cut(), 4, 1, 1, 3).unwrap();
        assert_eq!(s.symbols.len(), 1);
        assert_eq!(s.x_star.len(), 4);
        let s = sample_rmd_stream(&RmdFamily::dicut(), 10, 50, 25, 3).unwrap();
        for sym in &s.symbols {
            assert!(sym.vars[0] != sym.vars[1] && sym.vars.iter().all(|&v| v < 10));
        }
        assert!(sample_rmd_stream(&RmdFamily::cut(), 4, 2, 3, 1).is_err());
        assert!(sample_rmd_stream(&RmdFamily::cut(), 1, 2, 0, 1).is_err());
        assert_eq!(sample_rmd_stream(&RmdFamily::cut(), 6, 9, 4, 8), sample_rmd_stream(&RmdFamily::cut(), 6, 9, 4, 8));
    }

    #[test]
    fn yes_masks_satisfy_their_predicates() {
        for family in [RmdFamily::dicut(), RmdFamily::cut()] {
            for seed in 0..50 {
                let s = sample_rmd_stream(&family, 10, 20, 20, seed).unwrap();
                for sym in &s.symbols {
                    // b(i) = M_i x* - z(i)
                    let b: Vec<u32> = sym.vars.iter().zip(&sym.z).map(|(&v, &z)| (s.x_star[v as usize] + 2 - z) % 2).collect();
                    assert!(family.members()[sym.pred].predicate.eval(&b));
                }
                let psi = clean(&s.symbols, 10, &family.predicates()).unwrap();
                if psi.m() > 0 {
                    assert_eq!(val_at(&psi, &s.x_star).unwrap(), r(1, 1));
                }
            }
        }
    }

    #[test]
    fn no_stream_z_is_uniform() {
        let s = sample_rmd_stream(&RmdFamily::dicut(), 12, 100_000, 0, 17).unwrap();
        let mut counts = [0f64; 4];
        for sym in &s.symbols {
            counts[tuple_index(2, &sym.z)] += 1.0;
        }
        let e = 100_000.0 / 4.0;
        let stat: f64 = counts.iter().map(|c| (c - e) * (c - e) / e).sum();
        let crit = ChiSquared::new(3.0).unwrap().inverse_cdf(0.999);
        assert!(stat < crit, "chi2 = {stat}, counts {counts:?}");
    }

    #[test]
    fn clean_examples() {
        let preds = vec![Predicate::dicut()];
        let sym = |z: Vec<u32>| RmdSymbol { pred: 0, vars: vec![0, 1], z };
        assert_eq!(clean(&[sym(vec![1, 0]), sym(vec![0, 1])], 2, &preds).unwrap().m(), 0);
        let psi = clean(&[sym(vec![0, 0]), sym(vec![1, 1])], 2, &preds).unwrap();
        assert_eq!(psi.constraints(), &[Constraint { pred: 0, vars: vec![0, 1] }]);
    }

    #[test]
    fn formats_round_trip() {
        let preds = vec![Predicate::dicut(), Predicate::cut()];
        let text = write_predicates(&preds);
        assert_eq!(text, "2 2\n0 1 0 0\n2 2\n0 1 1 0\n");
        assert_eq!(parse_predicates(&text).unwrap(), preds);
        let psi = CspInstance::new(
            5,
            preds.clone(),
            vec![Constraint { pred: 1, vars: vec![4, 0] }, Constraint { pred: 0, vars: vec![2, 3] }],
        )
        .unwrap();
        let text = write_instance(&psi);
        assert_eq!(text, "2 2 5 2\n1 5 1\n0 3 4\n");
        assert_eq!(parse_instance(&text, &preds).unwrap(), psi);
        let s = sample_rmd_stream(&RmdFamily::cut(), 8, 4, 4, 2).unwrap();
        let (q, k, n, symbols) = parse_rmd_stream(&write_rmd_stream(&s)).unwrap();
        assert_eq!((q, k, n), (2, 2, 8));
        assert_eq!(symbols, s.symbols);
        assert_eq!(parse_assignment(&write_assignment(&s.x_star)).unwrap(), s.x_star);
        assert!(parse_predicates("2 2\n0 1 0").is_err());
        assert!(parse_predicates("2 2\n0 1 0 2").is_err());
        assert!(parse_instance("2 2 3 1\n0 0 1\n", &preds).is_err());
    }
}
