//! Independent reference computations for the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Positions of the walk with the given step codes (`2i` is `+e_i`, `2i+1` is `-e_i`),
/// reduced to `[0, r)` when `r` is given.
pub fn positions(dim: usize, codes: &[usize], r: Option<i32>) -> Vec<Vec<i32>> {
    let mut cur = vec![0i32; dim];
    let mut out = vec![cur.clone()];
    for &c in codes {
        cur[c / 2] += if c % 2 == 0 { 1 } else { -1 };
        if let Some(r) = r {
            cur[c / 2] = cur[c / 2].rem_euclid(r);
        }
        out.push(cur.clone());
    }
    out
}

/// Number of pairs `s < t` with `ω(s) = ω(t)`.
pub fn naive_contacts(pos: &[Vec<i32>]) -> usize {
    let mut c = 0;
    for s in 0..pos.len() {
        for t in s + 1..pos.len() {
            if pos[s] == pos[t] {
                c += 1;
            }
        }
    }
    c
}

/// `Π_{s<t} (1 - β·1[ω(s)=ω(t)])`, one factor per pair.
pub fn all_pairs_product(pos: &[Vec<i32>], beta: f64) -> f64 {
    let mut k = 1.0;
    for s in 0..pos.len() {
        for t in s + 1..pos.len() {
            if pos[s] == pos[t] {
                k *= 1.0 - beta;
            }
        }
    }
    k
}

/// Calls `f` with the step codes of every n-step walk, in lexicographic order.
pub fn for_each_walk<F: FnMut(&[usize])>(dim: usize, n: usize, mut f: F) {
    let q = 2 * dim;
    let mut codes = vec![0usize; n];
    loop {
        f(&codes);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            codes[i] += 1;
            if codes[i] < q {
                break;
            }
            codes[i] = 0;
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct NaiveSummary {
    pub c_n: f64,
    pub sum_sq_disp: f64,
    pub endpoint_weights: BTreeMap<Vec<i32>, f64>,
    pub contact_histogram: Vec<u64>,
}

/// All-pairs enumeration of every n-step walk on Z^d, or on the torus of side `r`
/// with positions taken in `[0, r)`.
pub fn naive_enumerate(dim: usize, beta: f64, n: usize, r: Option<i32>) -> NaiveSummary {
    let mut c = CompensatedSum::default();
    let mut m = CompensatedSum::default();
    let mut ends: BTreeMap<Vec<i32>, CompensatedSum> = BTreeMap::new();
    let mut hist = Vec::new();
    for_each_walk(dim, n, |codes| {
        let pos = positions(dim, codes, r);
        let k = all_pairs_product(&pos, beta);
        let end = pos.last().unwrap();
        c.add(k);
        m.add(k * end.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>());
        ends.entry(end.clone()).or_default().add(k);
        let nc = naive_contacts(&pos);
        if hist.len() <= nc {
            hist.resize(nc + 1, 0);
        }
        hist[nc] += 1;
    });
    NaiveSummary {
        c_n: c.value(),
        sum_sq_disp: m.value(),
        endpoint_weights: ends.into_iter().map(|(x, s)| (x, s.value())).collect(),
        contact_histogram: hist,
    }
}

/// `J[a,b]` as the sum over connected graphs on `{a..b}` built from coincident
/// pairs, each edge carrying `-β`.
pub fn connected_graph_j(pos: &[Vec<i32>], a: usize, b: usize, beta: f64) -> f64 {
    if a == b {
        return 1.0;
    }
    let edges: Vec<(usize, usize)> = (a..=b)
        .flat_map(|s| (s + 1..=b).map(move |t| (s, t)))
        .filter(|&(s, t)| pos[s] == pos[t])
        .collect();
    assert!(edges.len() <= 20, "too many contact edges for the brute-force oracle");
    let mut total = 0.0;
    for mask in 1u32..(1 << edges.len()) {
        let chosen: Vec<(usize, usize)> = (0..edges.len()).filter(|i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
        if covers_interval(&chosen, a, b) {
            total += (-beta).powi(chosen.len() as i32);
        }
    }
    total
}

/// Connectivity in the sense of the expansion: `a` and `b` are endpoints and
/// every time strictly between them lies strictly inside some edge.
fn covers_interval(edges: &[(usize, usize)], a: usize, b: usize) -> bool {
    edges.iter().any(|&(s, _)| s == a) && edges.iter().any(|&(_, t)| t == b) && (a + 1..b).all(|c| edges.iter().any(|&(s, t)| s < c && c < t))
}

/// `E exp(i u·ω(m)/√k)` for simple random walk: `((1/d) Σ_c cos(u_c/√k))^m`.
pub fn srw_characteristic(u: &[f64], k: f64, m: usize) -> f64 {
    let d = u.len() as f64;
    (u.iter().map(|c| (c / k.sqrt()).cos()).sum::<f64>() / d).powi(m as i32)
}
