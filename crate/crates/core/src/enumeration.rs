//! Exhaustive depth-first enumeration of n-step walks.
//!
//! Every walk is reached by extending its (n-1)-step prefix; the contact
//! count is carried along by a site-multiplicity table, so extending by one
//! step adds the multiplicity of the new site. Accumulators are integers
//! (contact histograms, fixed-point endpoint weights), which makes the
//! parallel reduction exact and independent of scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{site_key, torus_rep, LatticePoint, Step, MAX_DIM};
use crate::params::ModelParams;
use crate::walk::weight_from_contacts;

/// Default cap on the number of enumeration nodes (all prefixes of all lengths).
pub const DEFAULT_NODE_BUDGET: u128 = 4_000_000_000;

/// Longest walk the enumerator accepts, whatever the budget.
pub const MAX_ENUMERATION_LENGTH: usize = 40;

const FIXED_SCALE: f64 = 79_228_162_514_264_337_593_543_950_336.0; // 2^96

/// Which endpoint tables to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointTables {
    None,
    Final,
    AllLengths,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    pub node_budget: u128,
    pub endpoints: EndpointTables,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            endpoints: EndpointTables::Final,
        }
    }
}

impl EnumerationOptions {
    pub fn counts_only() -> Self {
        EnumerationOptions {
            endpoints: EndpointTables::None,
            ..Default::default()
        }
    }
}

/// Exact finite-n quantities for one walk length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationSummary {
    pub n: usize,
    pub beta: f64,
    /// Weighted walk count `c_n` (or `c_n^T`).
    pub c_n: f64,
    /// `Σ_ω |ω(n)|² K[0,n]`.
    pub sum_sq_disp: f64,
    /// Weighted number of walks ending at each point. Empty when endpoint
    /// tables were not requested.
    pub endpoint_weights: BTreeMap<LatticePoint, f64>,
    /// Number of walks with exactly `k` intersecting pairs, indexed by `k`.
    pub contact_histogram: Vec<u64>,
    /// `Σ |ω(n)|²` over walks with exactly `k` intersecting pairs.
    pub sq_disp_histogram: Vec<u128>,
}

impl EnumerationSummary {
    /// Unweighted number of walks, `(2d)^n`.
    pub fn walk_count(&self) -> u128 {
        self.contact_histogram.iter().map(|&h| h as u128).sum()
    }

    /// Mean-square displacement `E_{β,n} |ω(n)|²`.
    pub fn msd(&self) -> f64 {
        self.sum_sq_disp / self.c_n
    }

    /// `c_n` at another β, from the same contact histogram.
    pub fn partition_at(&self, beta: f64) -> f64 {
        self.contact_histogram
            .iter()
            .enumerate()
            .map(|(k, &h)| h as f64 * weight_from_contacts(beta, k as u64))
            .sum()
    }

    /// Number of strictly self-avoiding walks.
    pub fn self_avoiding_count(&self) -> u64 {
        self.contact_histogram.first().copied().unwrap_or(0)
    }
}

/// Truncated two-point function `Σ_{n<=N} z^n Σ_{ω: 0→x} K[0,n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointTable {
    pub z: f64,
    pub n_max: usize,
    pub values: BTreeMap<LatticePoint, f64>,
    /// `Σ_{n<=N} z^n c_n`.
    pub susceptibility_partial: f64,
    /// Magnitude of the last included term `z^N c_N`.
    pub truncation_error: f64,
}

impl TwoPointTable {
    pub fn value(&self, x: &LatticePoint) -> f64 {
        self.values.get(x).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Z^d positions; coincidence is equality.
    Lattice,
    /// Torus representatives; coincidence is equality of representatives.
    TorusDirect(u32),
    /// Z^d positions of lifted walks; coincidence is equality modulo r.
    TorusLift(u32),
}

#[derive(Clone, Copy)]
struct Node {
    coords: [i32; MAX_DIM],
    /// Dense occupancy index (unused by sparse occupancy).
    occ: isize,
    nsq: i64,
}

#[derive(Clone, Copy)]
struct Geometry {
    dim: usize,
    mode: Mode,
    max_depth: usize,
    occ_strides: [isize; MAX_DIM],
    occ_origin: isize,
    occ_len: usize,
}

const DENSE_OCCUPANCY_LIMIT: u128 = 1 << 26;

impl Geometry {
    fn new(dim: usize, mode: Mode, max_depth: usize) -> Self {
        let side = match mode {
            Mode::Lattice => 2 * max_depth as u128 + 1,
            Mode::TorusDirect(r) | Mode::TorusLift(r) => r as u128,
        };
        let len = side.checked_pow(dim as u32).unwrap_or(u128::MAX);
        let mut occ_strides = [0isize; MAX_DIM];
        let mut stride = 1isize;
        let mut origin = 0isize;
        let dense = len <= DENSE_OCCUPANCY_LIMIT;
        if dense {
            for s in occ_strides.iter_mut().take(dim) {
                *s = stride;
                origin += stride
                    * match mode {
                        Mode::Lattice => max_depth as isize,
                        Mode::TorusDirect(r) => (r / 2) as isize,
                        Mode::TorusLift(_) => 0,
                    };
                stride *= side as isize;
            }
        }
        Geometry {
            dim,
            mode,
            max_depth,
            occ_strides,
            occ_origin: origin,
            occ_len: if dense { len as usize } else { 0 },
        }
    }

    fn dense(&self) -> bool {
        self.occ_len > 0
    }

    fn origin(&self) -> Node {
        Node {
            coords: [0; MAX_DIM],
            occ: self.occ_origin,
            nsq: 0,
        }
    }

    #[inline(always)]
    fn advance(&self, node: &Node, step: Step) -> Node {
        let a = step.axis();
        let s = step.sign();
        let mut next = *node;
        let old = node.coords[a];
        let mut new = old + s;
        match self.mode {
            Mode::Lattice => {
                next.occ += s as isize * self.occ_strides[a];
            }
            Mode::TorusDirect(r) => {
                new = torus_rep(new, r);
                next.occ += (new - old) as isize * self.occ_strides[a];
            }
            Mode::TorusLift(r) => {
                let r = r as i32;
                let (o, n) = (old.rem_euclid(r), new.rem_euclid(r));
                next.occ += (n - o) as isize * self.occ_strides[a];
            }
        }
        next.coords[a] = new;
        next.nsq += (new as i64) * (new as i64) - (old as i64) * (old as i64);
        next
    }

    #[inline]
    fn sparse_key(&self, node: &Node) -> u128 {
        match self.mode {
            Mode::TorusLift(r) => {
                let mut buf = [0i32; MAX_DIM];
                for i in 0..self.dim {
                    buf[i] = torus_rep(node.coords[i], r);
                }
                site_key(&buf[..self.dim])
            }
            _ => site_key(&node.coords[..self.dim]),
        }
    }
}

trait Occupancy {
    /// Marks the node's site as visited once more, returning the prior multiplicity.
    fn enter(&mut self, geo: &Geometry, node: &Node) -> u32;
    fn leave(&mut self, geo: &Geometry, node: &Node);
}

struct DenseOccupancy(Vec<u16>);

impl Occupancy for DenseOccupancy {
    #[inline(always)]
    fn enter(&mut self, _geo: &Geometry, node: &Node) -> u32 {
        let c = &mut self.0[node.occ as usize];
        *c += 1;
        (*c - 1) as u32
    }

    #[inline(always)]
    fn leave(&mut self, _geo: &Geometry, node: &Node) {
        self.0[node.occ as usize] -= 1;
    }
}

struct SparseOccupancy(FxHashMap<u128, u32>);

impl Occupancy for SparseOccupancy {
    fn enter(&mut self, geo: &Geometry, node: &Node) -> u32 {
        let e = self.0.entry(geo.sparse_key(node)).or_insert(0);
        *e += 1;
        *e - 1
    }

    fn leave(&mut self, geo: &Geometry, node: &Node) {
        let k = geo.sparse_key(node);
        let e = self.0.get_mut(&k).expect("visited site");
        *e -= 1;
        if *e == 0 {
            self.0.remove(&k);
        }
    }
}

/// Integer accumulators for every depth.
#[derive(Clone)]
struct Accumulator {
    histogram: Vec<Vec<u64>>,
    sq_disp: Vec<Vec<u128>>,
    endpoints: Vec<Option<FxHashMap<u128, u128>>>,
}

impl Accumulator {
    fn new(max_depth: usize, tables: EndpointTables) -> Self {
        let histogram = (0..=max_depth).map(|k| vec![0u64; k * (k + 1) / 2 + 1]).collect();
        let sq_disp = (0..=max_depth).map(|k| vec![0u128; k * (k + 1) / 2 + 1]).collect();
        let endpoints = (0..=max_depth)
            .map(|k| match tables {
                EndpointTables::AllLengths => Some(FxHashMap::default()),
                EndpointTables::Final if k == max_depth => Some(FxHashMap::default()),
                _ => None,
            })
            .collect();
        Accumulator { histogram, sq_disp, endpoints }
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.sq_disp.iter_mut().zip(other.sq_disp) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.endpoints.iter_mut().zip(other.endpoints) {
            if let (Some(a), Some(b)) = (a.as_mut(), b) {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
        }
        self
    }
}

struct Dfs<'a, O: Occupancy> {
    geo: &'a Geometry,
    occ: O,
    acc: Accumulator,
    fixed_weights: &'a [u128],
    min_record: usize,
}

impl<O: Occupancy> Dfs<'_, O> {
    #[inline(always)]
    fn record(&mut self, depth: usize, contacts: usize, node: &Node) {
        if depth < self.min_record {
            return;
        }
        self.acc.histogram[depth][contacts] += 1;
        self.acc.sq_disp[depth][contacts] += node.nsq as u128;
        if let Some(table) = self.acc.endpoints[depth].as_mut() {
            *table.entry(site_key(&node.coords[..self.geo.dim])).or_insert(0) += self.fixed_weights[contacts];
        }
    }

    fn run(&mut self, node: Node, depth: usize, contacts: usize) {
        self.record(depth, contacts, &node);
        if depth == self.geo.max_depth {
            return;
        }
        for code in 0..2 * self.geo.dim as u8 {
            let child = self.geo.advance(&node, Step(code));
            let m = self.occ.enter(self.geo, &child) as usize;
            self.run(child, depth + 1, contacts + m);
            self.occ.leave(self.geo, &child);
        }
    }
}

fn walk_nodes(dim: usize, n: usize) -> u128 {
    let q = 2 * dim as u128;
    let mut total = 0u128;
    let mut level = 1u128;
    for _ in 0..=n {
        total = total.saturating_add(level);
        level = level.saturating_mul(q);
    }
    total
}

fn check_budget(params: &ModelParams, opts: &EnumerationOptions) -> Result<()> {
    params.validate()?;
    if params.n > MAX_ENUMERATION_LENGTH {
        return Err(Error::BudgetExceeded {
            what: "enumeration length",
            needed: params.n as u128,
            limit: MAX_ENUMERATION_LENGTH as u128,
        });
    }
    let nodes = walk_nodes(params.dim, params.n);
    if nodes > opts.node_budget {
        return Err(Error::BudgetExceeded {
            what: "enumeration nodes",
            needed: nodes,
            limit: opts.node_budget,
        });
    }
    Ok(())
}

fn all_prefixes(dim: usize, len: usize) -> Vec<Vec<Step>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| Step::all(dim).map(move |s| [p.clone(), vec![s]].concat()))
            .collect();
    }
    out
}

fn run_mode(params: &ModelParams, mode: Mode, opts: &EnumerationOptions) -> Result<Vec<EnumerationSummary>> {
    check_budget(params, opts)?;
    let n = params.n;
    let geo = Geometry::new(params.dim, mode, n);
    let max_contacts = n * (n + 1) / 2;
    let fixed_weights: Vec<u128> = (0..=max_contacts)
        .map(|k| (weight_from_contacts(params.beta, k as u64) * FIXED_SCALE) as u128)
        .collect();

    let prefix_len = n.min(2);
    let prefixes = all_prefixes(params.dim, prefix_len);

    let run_task = |prefix: Option<&Vec<Step>>| -> Accumulator {
        let acc = Accumulator::new(n, opts.endpoints);
        if geo.dense() {
            let occ = DenseOccupancy(vec![0u16; geo.occ_len]);
            drive(&geo, occ, acc, &fixed_weights, prefix, prefix_len)
        } else {
            let occ = SparseOccupancy(FxHashMap::default());
            drive(&geo, occ, acc, &fixed_weights, prefix, prefix_len)
        }
    };

    // Lengths shorter than the prefix are handled by one small serial pass.
    let head = run_task(None);
    let body = prefixes
        .par_iter()
        .map(|p| run_task(Some(p)))
        .reduce(|| Accumulator::new(n, opts.endpoints), Accumulator::merge);
    let acc = head.merge(body);
    Ok(summaries(params, &acc))
}

fn drive<O: Occupancy>(geo: &Geometry, mut occ: O, acc: Accumulator, fixed_weights: &[u128], prefix: Option<&Vec<Step>>, prefix_len: usize) -> Accumulator {
    let mut node = geo.origin();
    occ.enter(geo, &node);
    match prefix {
        None => {
            let limited = Geometry {
                max_depth: prefix_len.saturating_sub(1),
                ..*geo
            };
            if prefix_len == 0 {
                return acc;
            }
            let mut dfs = Dfs {
                geo: &limited,
                occ,
                acc,
                fixed_weights,
                min_record: 0,
            };
            dfs.run(node, 0, 0);
            dfs.acc
        }
        Some(steps) => {
            let mut contacts = 0usize;
            for &s in steps {
                node = geo.advance(&node, s);
                contacts += occ.enter(geo, &node) as usize;
            }
            let mut dfs = Dfs {
                geo,
                occ,
                acc,
                fixed_weights,
                min_record: prefix_len,
            };
            dfs.run(node, steps.len(), contacts);
            dfs.acc
        }
    }
}

fn decode_key(key: u128, dim: usize) -> LatticePoint {
    let mut coords = vec![0i32; dim];
    for i in (0..dim).rev() {
        let shift = 16 * (dim - 1 - i);
        coords[i] = ((key >> shift) & 0xffff) as i32 - (1 << 15);
    }
    LatticePoint(coords)
}

fn summaries(params: &ModelParams, acc: &Accumulator) -> Vec<EnumerationSummary> {
    (0..=params.n)
        .map(|k| {
            let hist = &acc.histogram[k];
            let sq = &acc.sq_disp[k];
            let c_n = hist
                .iter()
                .enumerate()
                .map(|(c, &h)| h as f64 * weight_from_contacts(params.beta, c as u64))
                .sum();
            let sum_sq_disp = sq
                .iter()
                .enumerate()
                .map(|(c, &h)| h as f64 * weight_from_contacts(params.beta, c as u64))
                .sum();
            let endpoint_weights = acc.endpoints[k]
                .as_ref()
                .map(|t| t.iter().map(|(&key, &v)| (decode_key(key, params.dim), v as f64 / FIXED_SCALE)).collect())
                .unwrap_or_default();
            let last = hist.iter().rposition(|&h| h > 0).map_or(0, |i| i + 1);
            EnumerationSummary {
                n: k,
                beta: params.beta,
                c_n,
                sum_sq_disp,
                endpoint_weights,
                contact_histogram: hist[..last].to_vec(),
                sq_disp_histogram: sq[..last].to_vec(),
            }
        })
        .collect()
}

fn direct_mode(params: &ModelParams) -> Mode {
    match params.torus {
        None => Mode::Lattice,
        Some(r) => Mode::TorusDirect(r),
    }
}

/// Exact `c_n`, weighted second moment and endpoint distribution of n-step
/// walks (on the torus when `params.torus` is set), with default options.
pub fn enumerate(params: &ModelParams) -> Result<EnumerationSummary> {
    enumerate_with(params, &EnumerationOptions::default())
}

pub fn enumerate_with(params: &ModelParams, opts: &EnumerationOptions) -> Result<EnumerationSummary> {
    Ok(enumerate_all_lengths(params, opts)?.pop().expect("at least length zero"))
}

/// Summaries for every length `0..=params.n`, from a single pass.
pub fn enumerate_all_lengths(params: &ModelParams, opts: &EnumerationOptions) -> Result<Vec<EnumerationSummary>> {
    run_mode(params, direct_mode(params), opts)
}

/// `c_n^T` as a sum of `K^T[0,n]` over Z^d walks (the lift picture). The
/// second moment and the endpoint table refer to the lifted, unwrapped walk.
pub fn enumerate_torus_via_lift(params: &ModelParams) -> Result<EnumerationSummary> {
    enumerate_torus_via_lift_with(params, &EnumerationOptions::default())
}

pub fn enumerate_torus_via_lift_with(params: &ModelParams, opts: &EnumerationOptions) -> Result<EnumerationSummary> {
    Ok(enumerate_torus_via_lift_all_lengths(params, opts)?.pop().expect("at least length zero"))
}

pub fn enumerate_torus_via_lift_all_lengths(params: &ModelParams, opts: &EnumerationOptions) -> Result<Vec<EnumerationSummary>> {
    let r = params
        .torus
        .ok_or_else(|| Error::Precondition("torus side required for the lift enumeration".into()))?;
    run_mode(params, Mode::TorusLift(r), opts)
}

/// `(c_{n+1} / c_n)` for `n < n_max`.
pub fn connective_ratio_sequence(params: &ModelParams, n_max: usize) -> Result<Vec<f64>> {
    let all = enumerate_all_lengths(&params.with_n(n_max), &EnumerationOptions::counts_only())?;
    Ok(all.windows(2).map(|w| w[1].c_n / w[0].c_n).collect())
}

/// Truncated two-point function and susceptibility at activity `z`.
pub fn two_point_series(params: &ModelParams, z: f64, n_max: usize) -> Result<TwoPointTable> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("activity must be non-negative, got {z}")));
    }
    let opts = EnumerationOptions {
        endpoints: EndpointTables::AllLengths,
        ..Default::default()
    };
    let all = enumerate_all_lengths(&params.with_n(n_max), &opts)?;
    let mut values: BTreeMap<LatticePoint, f64> = BTreeMap::new();
    let mut chi = 0.0;
    let mut last = 0.0;
    for s in &all {
        let zn = if s.n == 0 { 1.0 } else { z.powi(s.n as i32) };
        if zn == 0.0 {
            continue;
        }
        for (x, w) in &s.endpoint_weights {
            *values.entry(x.clone()).or_insert(0.0) += zn * w;
        }
        last = zn * s.c_n;
        chi += last;
    }
    Ok(TwoPointTable {
        z,
        n_max,
        values,
        susceptibility_partial: chi,
        truncation_error: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let s = enumerate(&ModelParams::lattice(5, 0.0, 3).unwrap()).unwrap();
        assert_eq!(s.c_n, 1000.0);
        assert_eq!(s.walk_count(), 1000);

        for d in 1..=4 {
            for &beta in &[0.0, 0.4, 1.0] {
                let s = enumerate(&ModelParams::lattice(d, beta, 1).unwrap()).unwrap();
                assert_eq!(s.c_n, 2.0 * d as f64);
                assert_eq!(s.sum_sq_disp, 2.0 * d as f64);
            }
        }
    }

    #[test]
    fn two_step_count_by_hand() {
        // of the (2d)^2 two-step walks, 2d return to the origin
        for d in 1..=3 {
            for &beta in &[0.0, 0.25, 0.7, 1.0] {
                let s = enumerate(&ModelParams::lattice(d, beta, 2).unwrap()).unwrap();
                let q = 2.0 * d as f64;
                assert!((s.c_n - (q * q - q * beta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_length() {
        let s = enumerate(&ModelParams::lattice(3, 0.5, 0).unwrap()).unwrap();
        assert_eq!(s.c_n, 1.0);
        assert_eq!(s.sum_sq_disp, 0.0);
        assert_eq!(s.endpoint_weights.len(), 1);
    }

    #[test]
    fn strict_saw_counts_in_two_dimensions() {
        // 4, 12, 36, 100, 284, 780 self-avoiding walks of length 1..6 on Z^2
        let all = enumerate_all_lengths(&ModelParams::lattice(2, 1.0, 6).unwrap(), &EnumerationOptions::counts_only()).unwrap();
        let counts: Vec<f64> = all.iter().map(|s| s.c_n).collect();
        assert_eq!(counts, vec![1.0, 4.0, 12.0, 36.0, 100.0, 284.0, 780.0]);
        assert_eq!(all[6].self_avoiding_count(), 780);
    }

    #[test]
    fn endpoint_weights_sum_to_partition() {
        let s = enumerate(&ModelParams::lattice(3, 0.3, 5).unwrap()).unwrap();
        let total: f64 = s.endpoint_weights.values().sum();
        assert!((total - s.c_n).abs() <= 1e-9 * s.c_n);
    }

    #[test]
    fn budget_guard() {
        let opts = EnumerationOptions {
            node_budget: 1000,
            ..Default::default()
        };
        let err = enumerate_with(&ModelParams::lattice(5, 0.1, 4).unwrap(), &opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn torus_agrees_with_lattice_below_wrap_scale() {
        let p = ModelParams::lattice(2, 0.35, 6).unwrap();
        let z = enumerate(&p).unwrap();
        let t = enumerate(&p.with_torus(Some(13))).unwrap();
        let l = enumerate_torus_via_lift(&p.with_torus(Some(13))).unwrap();
        assert_eq!(z.c_n, t.c_n);
        assert_eq!(z.c_n, l.c_n);
        assert_eq!(z.contact_histogram, t.contact_histogram);
    }

    #[test]
    fn connective_ratios_at_zero_beta() {
        let ratios = connective_ratio_sequence(&ModelParams::lattice(3, 0.0, 0).unwrap(), 5).unwrap();
        assert_eq!(ratios, vec![6.0; 5]);
    }

    #[test]
    fn two_point_trivial_cases() {
        let p = ModelParams::lattice(2, 0.3, 0).unwrap();
        let t = two_point_series(&p, 0.0, 4).unwrap();
        assert_eq!(t.values.len(), 1);
        assert_eq!(t.value(&LatticePoint::origin(2)), 1.0);

        let p0 = ModelParams::lattice(2, 0.0, 0).unwrap();
        let z = 0.2;
        let t = two_point_series(&p0, z, 5).unwrap();
        let geometric: f64 = (0..=5).map(|n| (4.0 * z).powi(n)).sum();
        let total: f64 = t.values.values().sum();
        assert!((total - geometric).abs() < 1e-12);
        assert!((t.susceptibility_partial - geometric).abs() < 1e-12);
        assert!(t.value(&LatticePoint::origin(2)) >= 1.0);
    }
}
