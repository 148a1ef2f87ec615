//! Lace-graph expansion of the interaction weight.
//!
//! A graph on `[a, b]` is a set of time pairs `s < t`; it is connected when
//! its open intervals cover `(a, b)`. The lace of a connected graph is picked
//! greedily (longest edge from `a`, then the farthest-reaching edge starting
//! before the current right end, taking its leftmost start). `J[a,b]` sums
//! `∏(βU)` over connected graphs, regrouped by lace:
//!
//! `J[a,b] = Σ_L ∏_{st∈L} βU_st ∏_{st∈C(L)} (1 + βU_st)`,
//!
//! where `C(L)` holds the edges whose addition leaves the lace unchanged.
//! Only intersecting pairs have `U_st ≠ 0`, so laces are drawn from the
//! contact set of the walk.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::MAX_ENUMERATION_LENGTH;
use crate::error::{Error, Result};
use crate::lattice::{site_key, torus_rep, Step, MAX_DIM};
use crate::params::ModelParams;
use crate::walk::Walk;

/// Largest interval length accepted by [`enumerate_laces`].
pub const MAX_LACE_INTERVAL: usize = 24;

/// Default cap on the number of laces [`enumerate_laces`] may return.
pub const DEFAULT_LACE_BUDGET: usize = 5_000_000;

pub type Edge = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub a: usize,
    pub b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Result<Interval> {
        if a > b {
            return Err(Error::Precondition(format!("interval needs a <= b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn len(&self) -> usize {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.a == self.b
    }

    /// Whether the interval may appear in the expansion around marked time `m`.
    pub fn admissible_for(&self, m: usize) -> bool {
        (self.a < m && m < self.b) || (self.a == m && self.b == m)
    }
}

/// A minimally connected graph on an interval, edges sorted by start time.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lace {
    edges: Vec<Edge>,
}

impl Lace {
    /// Wraps the edges if they form a lace on `interval`.
    pub fn new(edges: Vec<Edge>, interval: Interval) -> Result<Lace> {
        if !is_lace(&edges, interval) {
            return Err(Error::InvalidParameter(format!("{edges:?} is not a lace on [{}, {}]", interval.a, interval.b)));
        }
        Ok(Lace { edges })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// `s_1 = a`, `t_N = b`, strictly increasing starts and ends, and
/// `s_{i+1} < t_i <= s_{i+2}`.
pub fn is_lace(edges: &[Edge], interval: Interval) -> bool {
    let (Some(first), Some(last)) = (edges.first(), edges.last()) else {
        return false;
    };
    if first.0 != interval.a || last.1 != interval.b || edges.iter().any(|&(s, t)| s >= t) {
        return false;
    }
    for i in 0..edges.len() - 1 {
        let (s, t) = edges[i];
        let (s1, t1) = edges[i + 1];
        if !(s < s1 && t < t1 && s1 < t) {
            return false;
        }
        if i + 2 < edges.len() && edges[i + 2].0 < t {
            return false;
        }
    }
    true
}

/// Selects the lace of a graph on `interval`, or `None` when the graph is
/// not connected there. Edges outside the interval are ignored.
pub fn lace_of(edges: &[Edge], interval: Interval) -> Option<Lace> {
    let Interval { a, b } = interval;
    if a == b {
        return None;
    }
    let inside = |&&(s, t): &&Edge| a <= s && s < t && t <= b;
    let t1 = edges.iter().filter(inside).filter(|e| e.0 == a).map(|e| e.1).max()?;
    let mut lace = vec![(a, t1)];
    let mut cur = t1;
    while cur < b {
        let next = edges.iter().filter(inside).filter(|e| e.0 < cur).map(|e| e.1).max()?;
        if next <= cur {
            return None;
        }
        let s = edges.iter().filter(inside).filter(|e| e.1 == next).map(|e| e.0).min()?;
        lace.push((s, next));
        cur = next;
    }
    Some(Lace { edges: lace })
}

/// Connectedness on `interval`: the open edge intervals cover `(a, b)`.
pub fn is_connected(edges: &[Edge], interval: Interval) -> bool {
    lace_of(edges, interval).is_some()
}

/// An edge not in the lace is compatible when adding it leaves the lace unchanged.
pub fn is_compatible(lace: &Lace, edge: Edge, interval: Interval) -> bool {
    if lace.edges.contains(&edge) {
        return false;
    }
    let mut g = lace.edges.clone();
    g.push(edge);
    lace_of(&g, interval).as_ref() == Some(lace)
}

/// All laces on `interval` with at most `max_edges` edges.
pub fn enumerate_laces(interval: Interval, max_edges: usize) -> Result<Vec<Lace>> {
    enumerate_laces_with_budget(interval, max_edges, DEFAULT_LACE_BUDGET)
}

pub fn enumerate_laces_with_budget(interval: Interval, max_edges: usize, budget: usize) -> Result<Vec<Lace>> {
    if interval.len() > MAX_LACE_INTERVAL {
        return Err(Error::BudgetExceeded {
            what: "lace interval length",
            needed: interval.len() as u128,
            limit: MAX_LACE_INTERVAL as u128,
        });
    }
    let all = |_: usize, _: usize| true;
    let mut out = Vec::new();
    let mut overflow = false;
    build_laces(interval, &all, max_edges, &mut |edges| {
        if out.len() >= budget {
            overflow = true;
            return false;
        }
        out.push(Lace { edges: edges.to_vec() });
        true
    });
    if overflow {
        return Err(Error::BudgetExceeded {
            what: "laces",
            needed: budget as u128 + 1,
            limit: budget as u128,
        });
    }
    Ok(out)
}

/// Depth-first construction of laces whose edges satisfy `allowed`.
/// `visit` returns false to stop early.
fn build_laces<F, V>(interval: Interval, allowed: &F, max_edges: usize, visit: &mut V)
where
    F: Fn(usize, usize) -> bool,
    V: FnMut(&[Edge]) -> bool,
{
    let Interval { a, b } = interval;
    if a == b || max_edges == 0 {
        return;
    }
    let mut lace = Vec::with_capacity(max_edges.min(b - a));
    for t1 in a + 1..=b {
        if !allowed(a, t1) {
            continue;
        }
        lace.push((a, t1));
        if !extend_lace(&mut lace, None, b, allowed, max_edges, visit) {
            return;
        }
        lace.pop();
    }
}

fn extend_lace<F, V>(lace: &mut Vec<Edge>, prev_t: Option<usize>, b: usize, allowed: &F, max_edges: usize, visit: &mut V) -> bool
where
    F: Fn(usize, usize) -> bool,
    V: FnMut(&[Edge]) -> bool,
{
    let (s, t) = *lace.last().expect("nonempty lace");
    if t == b {
        return visit(lace);
    }
    if lace.len() == max_edges {
        return true;
    }
    let lo = prev_t.unwrap_or(0).max(s + 1);
    for s_next in lo..t {
        for t_next in t + 1..=b {
            if !allowed(s_next, t_next) {
                continue;
            }
            lace.push((s_next, t_next));
            let keep_going = extend_lace(lace, Some(t), b, allowed, max_edges, visit);
            lace.pop();
            if !keep_going {
                return false;
            }
        }
    }
    true
}

/// Arithmetic needed to evaluate lace sums, in floating point or exactly.
pub trait Scalar: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {}

impl<T> Scalar for T where T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T> {}

/// Intersection structure of one walk: which time pairs coincide, and the
/// number of coincidences inside every interval.
pub struct ContactStructure {
    n: usize,
    coincide: Vec<bool>,
    counts: Vec<u32>,
}

impl ContactStructure {
    pub fn new(w: &Walk) -> Self {
        let keys: Vec<u128> = w.positions().map(site_key).collect();
        Self::from_keys(&keys)
    }

    /// From site keys (equal keys mean the positions coincide).
    pub fn from_keys(keys: &[u128]) -> Self {
        let n = keys.len() - 1;
        let size = n + 1;
        let mut coincide = vec![false; size * size];
        for s in 0..size {
            for t in s + 1..size {
                coincide[s * size + t] = keys[s] == keys[t];
            }
        }
        // counts[a][b] = # coinciding pairs inside [a, b]
        let mut counts = vec![0u32; size * size];
        for a in 0..size {
            let mut acc = 0u32;
            for b in a..size {
                for s in a..b {
                    acc += coincide[s * size + b] as u32;
                }
                counts[a * size + b] = acc;
            }
        }
        ContactStructure { n, coincide, counts }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn coincide(&self, s: usize, t: usize) -> bool {
        self.coincide[s * (self.n + 1) + t]
    }

    #[inline]
    pub fn contacts(&self, a: usize, b: usize) -> u32 {
        self.counts[a * (self.n + 1) + b]
    }

    fn check(&self, interval: Interval) -> Result<()> {
        if interval.b > self.n {
            return Err(Error::Precondition(format!(
                "interval [{}, {}] exceeds walk length {}",
                interval.a, interval.b, self.n
            )));
        }
        Ok(())
    }

    /// `K[a,b]`.
    pub fn k_value<T: Scalar>(&self, a: usize, b: usize, one_minus_beta: &T) -> T {
        num_traits::pow(one_minus_beta.clone(), self.contacts(a, b) as usize)
    }

    /// `J[a,b]`.
    pub fn j_value<T: Scalar>(&self, interval: Interval, beta: &T) -> T {
        let Interval { a, b } = interval;
        if a == b {
            return T::one();
        }
        // J vanishes unless ω(a) and ω(b) are both revisited inside [a, b]
        if !(a + 1..=b).any(|t| self.coincide(a, t)) || !(a..b).any(|s| self.coincide(s, b)) {
            return T::zero();
        }
        let one_minus_beta = T::one() - beta.clone();
        let neg_beta = -beta.clone();
        let contact_edges: Vec<Edge> = (a..=b)
            .flat_map(|s| (s + 1..=b).map(move |t| (s, t)))
            .filter(|&(s, t)| self.coincide(s, t))
            .collect();
        let mut total = T::zero();
        let allowed = |s: usize, t: usize| self.coincide(s, t);
        build_laces(interval, &allowed, usize::MAX, &mut |lace: &[Edge]| {
            let lace = Lace { edges: lace.to_vec() };
            let compatible = contact_edges.iter().filter(|&&e| is_compatible(&lace, e, interval)).count();
            let term = num_traits::pow(neg_beta.clone(), lace.len()) * num_traits::pow(one_minus_beta.clone(), compatible);
            total = total.clone() + term;
            true
        });
        total
    }

    /// `K[0,n] - Σ_{I∋m} K[0,I_1] J[I_1,I_2] K[I_2,n]`.
    pub fn kjk_difference<T: Scalar>(&self, m: usize, beta: &T, j_cache: &mut JCache<T>) -> T {
        let n = self.n;
        let omb = T::one() - beta.clone();
        let mut sum = self.k_value(0, m, &omb) * self.k_value(m, n, &omb);
        for i1 in 0..m {
            for i2 in m + 1..=n {
                let j = j_cache.get_or_insert(self, Interval { a: i1, b: i2 }, beta);
                if j.is_zero() {
                    continue;
                }
                sum = sum + self.k_value(0, i1, &omb) * j * self.k_value(i2, n, &omb);
            }
        }
        self.k_value(0, n, &omb) - sum
    }
}

/// Memo of `J[a,b]` values for one walk.
pub struct JCache<T> {
    size: usize,
    values: Vec<Option<T>>,
}

impl<T: Scalar> JCache<T> {
    pub fn new(n: usize) -> Self {
        JCache {
            size: n + 1,
            values: vec![None; (n + 1) * (n + 1)],
        }
    }

    fn get_or_insert(&mut self, cs: &ContactStructure, interval: Interval, beta: &T) -> T {
        let idx = interval.a * self.size + interval.b;
        if let Some(v) = &self.values[idx] {
            return v.clone();
        }
        let v = cs.j_value(interval, beta);
        self.values[idx] = Some(v.clone());
        v
    }
}

fn check_interval(w: &Walk, interval: Interval) -> Result<()> {
    if interval.a > interval.b || interval.b > w.len() {
        return Err(Error::Precondition(format!(
            "interval [{}, {}] not inside [0, {}]",
            interval.a,
            interval.b,
            w.len()
        )));
    }
    Ok(())
}

/// `J[a,b](ω)` in floating point.
pub fn j_value(w: &Walk, interval: Interval, beta: f64) -> Result<f64> {
    check_interval(w, interval)?;
    let cs = ContactStructure::new(w);
    cs.check(interval)?;
    Ok(cs.j_value(interval, &beta))
}

/// `J[a,b](ω)` in exact rational arithmetic.
pub fn j_value_exact(w: &Walk, interval: Interval, beta: &BigRational) -> Result<BigRational> {
    check_interval(w, interval)?;
    Ok(ContactStructure::new(w).j_value(interval, beta))
}

fn check_marked(w: &Walk, m: usize) -> Result<()> {
    if m > w.len() {
        return Err(Error::Precondition(format!("marked time {m} exceeds walk length {}", w.len())));
    }
    Ok(())
}

/// Residual `|K[0,n] - Σ_{I∋m} K[0,I_1] J[I_1,I_2] K[I_2,n]|`.
pub fn kjk_check(w: &Walk, m: usize, beta: f64) -> Result<f64> {
    check_marked(w, m)?;
    let cs = ContactStructure::new(w);
    let mut cache = JCache::new(w.len());
    Ok(cs.kjk_difference(m, &beta, &mut cache).abs())
}

/// Exact residual; zero whenever the expansion is right.
pub fn kjk_check_exact(w: &Walk, m: usize, beta: &BigRational) -> Result<BigRational> {
    check_marked(w, m)?;
    let cs = ContactStructure::new(w);
    let mut cache = JCache::new(w.len());
    Ok(cs.kjk_difference(m, beta, &mut cache).abs())
}

/// Largest residual over every marked time `0..=n`, sharing the J values.
pub fn kjk_max_residual(w: &Walk, beta: f64) -> f64 {
    let cs = ContactStructure::new(w);
    let mut cache = JCache::new(w.len());
    (0..=w.len()).map(|m| cs.kjk_difference(m, &beta, &mut cache).abs()).fold(0.0, f64::max)
}

/// Exact residuals for every marked time.
pub fn kjk_residuals_exact(w: &Walk, beta: &BigRational) -> Vec<BigRational> {
    let cs = ContactStructure::new(w);
    let mut cache = JCache::new(w.len());
    (0..=w.len()).map(|m| cs.kjk_difference(m, beta, &mut cache).abs()).collect()
}

/// Largest KJK residual over every Z^d walk of one length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KjkSweepRow {
    pub n: usize,
    pub walks: u64,
    pub max_residual: f64,
}

/// Checks the KJK identity on every walk with `n <= params.n` in `params.dim`
/// dimensions, at every marked time.
pub fn kjk_sweep(params: &ModelParams, node_budget: u128) -> Result<Vec<KjkSweepRow>> {
    params.validate()?;
    if params.torus.is_some() {
        return Err(Error::Precondition("the KJK sweep runs on Z^d".into()));
    }
    let q = 2 * params.dim;
    let nodes: u128 = (0..=params.n as u32)
        .map(|k| (q as u128).saturating_pow(k))
        .fold(0u128, |a, b| a.saturating_add(b));
    if nodes > node_budget {
        return Err(Error::BudgetExceeded {
            what: "KJK sweep walks",
            needed: nodes,
            limit: node_budget,
        });
    }
    let steps: Vec<Step> = Step::all(params.dim).collect();
    let mut rows = Vec::with_capacity(params.n + 1);
    for n in 0..=params.n {
        let walks = (q as u64).pow(n as u32);
        let max_residual = (0..walks)
            .into_par_iter()
            .map(|mut code| {
                let mut seq = Vec::with_capacity(n);
                for _ in 0..n {
                    seq.push(steps[(code % q as u64) as usize]);
                    code /= q as u64;
                }
                let w = Walk::from_steps(params.dim, crate::lattice::Ambient::Lattice, seq).expect("valid steps");
                kjk_max_residual(&w, params.beta)
            })
            .reduce(|| 0.0, f64::max);
        rows.push(KjkSweepRow { n, walks, max_residual });
    }
    Ok(rows)
}

/// β = p/q as an exact rational.
pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_abs(x: &BigRational) -> BigRational {
    x.abs()
}

/// Per-length sums of `J[0,n]` over all walks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JSums {
    /// `Σ_{ω∈W_n} J[0,n]`.
    pub signed: Vec<f64>,
    /// `Σ_{ω∈W_n} |J[0,n]|`.
    pub absolute: Vec<f64>,
}

/// Exhaustive `Σ_ω J[0,n]` and `Σ_ω |J[0,n]|` for `n <= n_max`.
pub fn j_sums(params: &ModelParams, n_max: usize, node_budget: u128) -> Result<JSums> {
    params.validate()?;
    if n_max > MAX_ENUMERATION_LENGTH {
        return Err(Error::BudgetExceeded {
            what: "enumeration length",
            needed: n_max as u128,
            limit: MAX_ENUMERATION_LENGTH as u128,
        });
    }
    let q = 2 * params.dim as u128;
    let nodes: u128 = (0..=n_max as u32).map(|k| q.saturating_pow(k)).fold(0u128, |a, b| a.saturating_add(b));
    if nodes > node_budget {
        return Err(Error::BudgetExceeded {
            what: "enumeration nodes",
            needed: nodes,
            limit: node_budget,
        });
    }
    let dim = params.dim;
    let first: Vec<Step> = Step::all(dim).collect();
    let tasks: Vec<Option<Step>> = if n_max == 0 { vec![None] } else { first.into_iter().map(Some).collect() };
    let partials: Vec<(Vec<f64>, Vec<f64>)> = tasks
        .par_iter()
        .map(|&first| {
            let mut signed = vec![0.0; n_max + 1];
            let mut absolute = vec![0.0; n_max + 1];
            let mut dfs = JDfs {
                params,
                n_max,
                coords: vec![[0i32; MAX_DIM]],
                keys: vec![site_key(&[0; MAX_DIM][..dim])],
                signed: &mut signed,
                absolute: &mut absolute,
            };
            match first {
                None => dfs.run(),
                Some(s) => {
                    dfs.push(s);
                    dfs.run();
                }
            }
            (signed, absolute)
        })
        .collect();
    let mut out = JSums {
        signed: vec![0.0; n_max + 1],
        absolute: vec![0.0; n_max + 1],
    };
    out.signed[0] = 1.0;
    out.absolute[0] = 1.0;
    for (s, a) in partials {
        for k in 1..=n_max {
            out.signed[k] += s[k];
            out.absolute[k] += a[k];
        }
    }
    Ok(out)
}

struct JDfs<'a> {
    params: &'a ModelParams,
    n_max: usize,
    coords: Vec<[i32; MAX_DIM]>,
    keys: Vec<u128>,
    signed: &'a mut Vec<f64>,
    absolute: &'a mut Vec<f64>,
}

impl JDfs<'_> {
    fn push(&mut self, s: Step) {
        let mut c = *self.coords.last().unwrap();
        c[s.axis()] += s.sign();
        if let Some(r) = self.params.torus {
            c[s.axis()] = torus_rep(c[s.axis()], r);
        }
        self.keys.push(site_key(&c[..self.params.dim]));
        self.coords.push(c);
    }

    fn pop(&mut self) {
        self.coords.pop();
        self.keys.pop();
    }

    fn run(&mut self) {
        let k = self.keys.len() - 1;
        if k >= 1 {
            let last = self.keys[k];
            // J[0,k] needs ω(k) to revisit an earlier site and ω(0) to be revisited
            if self.keys[..k].contains(&last) && self.keys[1..].contains(&self.keys[0]) {
                let cs = ContactStructure::from_keys(&self.keys);
                let j = cs.j_value(Interval { a: 0, b: k }, &self.params.beta);
                self.signed[k] += j;
                self.absolute[k] += j.abs();
            }
        }
        if k == self.n_max {
            return;
        }
        for code in 0..2 * self.params.dim as u8 {
            self.push(Step(code));
            self.run();
            self.pop();
        }
    }
}

/// Partial sums of `Σ_n n z^n Σ_ω |J[0,n]|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiSeries {
    pub z: f64,
    /// `n z^n Σ_ω |J[0,n]|`, indexed by n.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl PiSeries {
    /// Whether the terms decrease strictly on `lo..=hi`.
    pub fn strictly_decreasing_on(&self, lo: usize, hi: usize) -> bool {
        (lo..hi).all(|n| self.terms[n + 1] < self.terms[n])
    }
}

pub fn pi_series_partial(params: &ModelParams, z: f64, n_max: usize) -> Result<PiSeries> {
    pi_series_with_budget(params, z, n_max, crate::enumeration::DEFAULT_NODE_BUDGET)
}

pub fn pi_series_with_budget(params: &ModelParams, z: f64, n_max: usize, node_budget: u128) -> Result<PiSeries> {
    let sums = j_sums(params, n_max, node_budget)?;
    Ok(pi_series_from_sums(&sums, z))
}

pub fn pi_series_from_sums(sums: &JSums, z: f64) -> PiSeries {
    let terms: Vec<f64> = sums
        .absolute
        .iter()
        .enumerate()
        .map(|(n, &a)| if n == 0 { 0.0 } else { n as f64 * z.powi(n as i32) * a })
        .collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    PiSeries { z, terms, partial_sums }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Ambient;

    fn walk2(points: &[[i32; 2]]) -> Walk {
        let pts: Vec<Vec<i32>> = points.iter().map(|p| p.to_vec()).collect();
        Walk::from_positions(2, Ambient::Lattice, &pts).unwrap()
    }

    fn iv(a: usize, b: usize) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn small_interval_laces() {
        assert_eq!(enumerate_laces(iv(0, 1), 8).unwrap(), vec![Lace { edges: vec![(0, 1)] }]);
        // [0,2]: only the single edge; two edges would need s_2 < t_1 = 1 with s_2 > 0
        assert_eq!(enumerate_laces(iv(0, 2), 8).unwrap(), vec![Lace { edges: vec![(0, 2)] }]);
        // [0,3]: {03}, {02,13}
        let l3 = enumerate_laces(iv(0, 3), 8).unwrap();
        assert_eq!(l3.len(), 2);
        assert!(l3.iter().all(|l| is_lace(l.edges(), iv(0, 3))));
        assert!(enumerate_laces(iv(2, 2), 8).unwrap().is_empty());
        assert_eq!(enumerate_laces(iv(0, 5), 1).unwrap().len(), 1);
    }

    #[test]
    fn lace_selection_examples() {
        let i = iv(0, 4);
        assert_eq!(lace_of(&[(0, 2), (1, 4)], i).unwrap().edges(), &[(0, 2), (1, 4)]);
        assert_eq!(lace_of(&[(0, 2), (1, 4), (0, 1), (1, 3)], i).unwrap().edges(), &[(0, 2), (1, 4)]);
        assert_eq!(lace_of(&[(0, 2), (0, 4)], i).unwrap().edges(), &[(0, 4)]);
        // gap at time 2
        assert!(lace_of(&[(0, 2), (2, 4)], i).is_none());
        assert!(lace_of(&[(1, 4)], i).is_none());
        assert!(!is_lace(&[(0, 2), (2, 4)], i));
        assert!(Lace::new(vec![(0, 3), (1, 4)], i).is_ok());
        assert!(Lace::new(vec![(0, 3), (0, 4)], i).is_err());
    }

    #[test]
    fn compatibility() {
        let i = iv(0, 4);
        let lace = Lace::new(vec![(0, 2), (1, 4)], i).unwrap();
        assert!(is_compatible(&lace, (0, 1), i));
        assert!(is_compatible(&lace, (2, 4), i));
        assert!(is_compatible(&lace, (2, 3), i));
        // (0,3) would replace (0,2) as the first edge
        assert!(!is_compatible(&lace, (0, 3), i));
        // (0,4) spans everything
        assert!(!is_compatible(&lace, (0, 4), i));
        assert!(!is_compatible(&lace, (1, 4), i));
    }

    #[test]
    fn j_trivial_values() {
        let w = walk2(&[[0, 0], [1, 0], [0, 0], [0, 1], [0, 0]]);
        for m in 0..=4 {
            assert_eq!(j_value(&w, iv(m, m), 0.4).unwrap(), 1.0);
        }
        for a in 0..4 {
            assert_eq!(j_value(&w, iv(a, a + 1), 0.4).unwrap(), 0.0);
        }
        // β = 0 kills every edge
        assert_eq!(j_value(&w, iv(0, 4), 0.0).unwrap(), 0.0);
        assert!(j_value(&w, iv(0, 5), 0.4).is_err());
    }

    #[test]
    fn j_of_a_single_return() {
        // one contact (0,2): J[0,2] = -β
        let w = walk2(&[[0, 0], [1, 0], [0, 0]]);
        assert!((j_value(&w, iv(0, 2), 0.3).unwrap() + 0.3).abs() < 1e-15);
        for m in 0..=2 {
            assert!(kjk_check(&w, m, 0.3).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn kjk_on_the_unit_square_loop() {
        let w = walk2(&[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]);
        let beta = 0.45;
        assert!(j_value(&w, iv(0, 4), beta).unwrap() != 0.0);
        for m in 0..=4 {
            assert!(kjk_check(&w, m, beta).unwrap() <= 1e-12);
        }
        let exact = rational(9, 20);
        for m in 0..=4 {
            assert!(kjk_check_exact(&w, m, &exact).unwrap().is_zero());
        }
    }

    #[test]
    fn self_avoiding_walk_has_trivial_expansion() {
        let w = walk2(&[[0, 0], [1, 0], [1, 1], [2, 1], [2, 2]]);
        for a in 0..=4 {
            for b in a + 1..=4 {
                assert_eq!(j_value(&w, iv(a, b), 0.9).unwrap(), 0.0);
            }
        }
        for m in 0..=4 {
            assert_eq!(kjk_check(&w, m, 0.9).unwrap(), 0.0);
        }
    }

    #[test]
    fn pi_series_trivial_terms() {
        let p = ModelParams::lattice(2, 0.0, 0).unwrap();
        let s = pi_series_partial(&p, 0.3, 5).unwrap();
        assert!(s.terms.iter().all(|&t| t == 0.0));
        let p = ModelParams::lattice(2, 0.5, 0).unwrap();
        let s = pi_series_partial(&p, 0.3, 5).unwrap();
        assert_eq!(s.terms[0], 0.0);
        assert_eq!(s.terms[1], 0.0);
        assert!(s.terms[2] > 0.0);
    }
}
