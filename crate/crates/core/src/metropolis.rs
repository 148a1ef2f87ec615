//! Fixed-length Metropolis sampling of the weighted walk measure.
//!
//! Target: `π(ω) ∝ (1-β)^{contacts(ω)}` on n-step walks (or on torus walks,
//! where contacts are coincidences modulo r). Moves:
//! - pivot: random time k and random non-identity lattice symmetry; the
//!   shorter side of the walk is rotated about `ω(k)`
//! - end: redraw the last step
//! - kink: swap two consecutive steps
//! - crankshaft: `(a, b, -a) -> (g, b, -g)` with `g ⟂ b`, `g ≠ a`
//!
//! All proposals are symmetric, so acceptance is `min(1, (1-β)^Δ)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{site_key, torus_rep, Ambient, SiteTable, Step, Symmetry, MAX_COORD, MAX_DIM};
use crate::params::ModelParams;
use crate::stats::{batch_means, integrated_autocorrelation_time, EstimateWithError};
use crate::walk::Walk;

/// Internal coordinates are recentred once the start drifts this far.
const RECENTER_BOUND: i32 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetropolisConfig {
    pub sweeps: usize,
    /// Probability that an attempted move is a pivot. Ignored (all moves
    /// are pivots) when `local_moves` is false.
    pub pivot_fraction: f64,
    /// Sweeps discarded before measuring.
    pub thermalization: usize,
    pub seed: u64,
    /// Attempted moves per sweep.
    pub moves_per_sweep: usize,
    pub local_moves: bool,
    /// Independent chains, merged by averaging.
    pub chains: usize,
}

impl Default for MetropolisConfig {
    fn default() -> Self {
        MetropolisConfig {
            sweeps: 10_000,
            pivot_fraction: 0.5,
            thermalization: 1000,
            seed: 0,
            moves_per_sweep: 10,
            local_moves: true,
            chains: 1,
        }
    }
}

impl MetropolisConfig {
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pivot_fraction) {
            return Err(Error::InvalidParameter(format!(
                "pivot_fraction must lie in [0, 1], got {}",
                self.pivot_fraction
            )));
        }
        if self.thermalization >= self.sweeps {
            return Err(Error::InvalidParameter(format!(
                "thermalization ({}) must be smaller than sweeps ({})",
                self.thermalization, self.sweeps
            )));
        }
        if self.moves_per_sweep == 0 || self.chains == 0 {
            return Err(Error::InvalidParameter("moves_per_sweep and chains must be positive".into()));
        }
        if self.pivot_fraction == 0.0 && !self.local_moves {
            return Err(Error::InvalidParameter(
                "non-ergodic move set: pivot_fraction = 0 with local moves disabled".into(),
            ));
        }
        if self.pivot_fraction == 0.0 && params.beta == 1.0 {
            return Err(Error::InvalidParameter("non-ergodic move set: local moves alone at beta = 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    Pivot,
    End,
    Kink,
    Crankshaft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MoveOutcome {
    pub kind: MoveKind,
    /// False when the proposal did not apply (no change) or was rejected.
    pub accepted: bool,
    /// False when the move had no valid proposal in the current state.
    pub proposed: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveCounts {
    pub pivot_attempted: u64,
    pub pivot_accepted: u64,
    pub local_attempted: u64,
    pub local_accepted: u64,
}

impl MoveCounts {
    pub fn acceptance(&self) -> f64 {
        let a = self.pivot_attempted + self.local_attempted;
        if a == 0 {
            return 1.0;
        }
        (self.pivot_accepted + self.local_accepted) as f64 / a as f64
    }

    fn merge(&mut self, o: &MoveCounts) {
        self.pivot_attempted += o.pivot_attempted;
        self.pivot_accepted += o.pivot_accepted;
        self.local_attempted += o.local_attempted;
        self.local_accepted += o.local_accepted;
    }
}

/// One Markov chain on n-step walks.
pub struct MetropolisChain {
    dim: usize,
    torus: Option<u32>,
    one_minus_beta: f64,
    pivot_fraction: f64,
    local_moves: bool,
    steps: Vec<Step>,
    /// Unreduced positions; `ω(k) = pos[k] - pos[0]`.
    pos: Vec<[i32; MAX_DIM]>,
    sites: SiteTable,
    contacts: u64,
    buf: Vec<[i32; MAX_DIM]>,
    rng: ChaCha8Rng,
    counts: MoveCounts,
}

impl MetropolisChain {
    /// Starts from a straight rod.
    pub fn new(params: &ModelParams, pivot_fraction: f64, local_moves: bool, rng: ChaCha8Rng) -> Result<Self> {
        let w = Walk::straight(params.dim, params.ambient(), params.n)?;
        Self::from_walk(params, &w, pivot_fraction, local_moves, rng)
    }

    pub fn from_walk(params: &ModelParams, start: &Walk, pivot_fraction: f64, local_moves: bool, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        if start.len() != params.n || start.dim() != params.dim {
            return Err(Error::Precondition(format!(
                "start walk has shape (d={}, n={}), expected (d={}, n={})",
                start.dim(),
                start.len(),
                params.dim,
                params.n
            )));
        }
        if params.n > MAX_COORD as usize - RECENTER_BOUND as usize {
            return Err(Error::InvalidParameter(format!("walk length {} too large for the sampler", params.n)));
        }
        let mut chain = MetropolisChain {
            dim: params.dim,
            torus: params.torus,
            one_minus_beta: 1.0 - params.beta,
            pivot_fraction,
            local_moves,
            steps: start.steps().to_vec(),
            pos: Vec::new(),
            sites: SiteTable::with_capacity(params.n + 1),
            contacts: 0,
            buf: Vec::with_capacity(params.n + 1),
            rng,
            counts: MoveCounts::default(),
        };
        chain.rebuild([0; MAX_DIM]);
        Ok(chain)
    }

    fn key(&self, x: &[i32; MAX_DIM]) -> u128 {
        match self.torus {
            None => site_key(&x[..self.dim]),
            Some(r) => {
                let mut y = [0i32; MAX_DIM];
                for i in 0..self.dim {
                    y[i] = torus_rep(x[i], r);
                }
                site_key(&y[..self.dim])
            }
        }
    }

    /// Positions from the steps, starting at `origin`.
    fn rebuild(&mut self, origin: [i32; MAX_DIM]) {
        self.pos.clear();
        self.sites.clear();
        self.contacts = 0;
        let mut cur = origin;
        self.pos.push(cur);
        for &s in &self.steps {
            cur[s.axis()] += s.sign();
            self.pos.push(cur);
        }
        for k in 0..self.pos.len() {
            let key = self.key(&self.pos[k]);
            self.contacts += self.sites.insert(key) as u64;
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn contacts(&self) -> u64 {
        self.contacts
    }

    pub fn counts(&self) -> MoveCounts {
        self.counts
    }

    /// `ω(k)` relative to `ω(0)`, unreduced (the lift on the torus).
    #[inline]
    pub fn relative_position(&self, k: usize) -> [i32; MAX_DIM] {
        let mut x = self.pos[k];
        for i in 0..self.dim {
            x[i] -= self.pos[0][i];
        }
        x
    }

    pub fn endpoint_norm_sq(&self) -> i64 {
        let x = self.relative_position(self.len());
        x[..self.dim].iter().map(|&c| c as i64 * c as i64).sum()
    }

    /// The current state as a walk in the chain's ambient space.
    pub fn walk(&self) -> Walk {
        let ambient = self.torus.map(Ambient::Torus).unwrap_or(Ambient::Lattice);
        Walk::from_steps(self.dim, ambient, self.steps.clone()).expect("chain state is a valid walk")
    }

    /// The current step sequence read as a walk on Z^d (the lift on the torus).
    pub fn lifted_walk(&self) -> Walk {
        Walk::from_steps(self.dim, Ambient::Lattice, self.steps.clone()).expect("chain state is a valid walk")
    }

    pub fn attempt_move(&mut self) -> MoveOutcome {
        let n = self.len();
        if n == 0 {
            return MoveOutcome {
                kind: MoveKind::Pivot,
                accepted: false,
                proposed: false,
            };
        }
        let pivot = !self.local_moves || self.rng.gen::<f64>() < self.pivot_fraction;
        let outcome = if pivot {
            self.pivot()
        } else {
            match self.rng.gen_range(0..3) {
                0 => self.end_move(),
                1 => self.kink_move(),
                _ => self.crankshaft_move(),
            }
        };
        if outcome.kind == MoveKind::Pivot {
            self.counts.pivot_attempted += 1;
            self.counts.pivot_accepted += outcome.accepted as u64;
        } else {
            self.counts.local_attempted += 1;
            self.counts.local_accepted += outcome.accepted as u64;
        }
        outcome
    }

    pub fn sweep(&mut self, moves: usize) {
        for _ in 0..moves {
            self.attempt_move();
        }
    }

    /// Replaces positions `start..start + buf.len()` by `buf` with the
    /// Metropolis rule. Returns whether the change was accepted.
    fn try_replace(&mut self, start: usize) -> bool {
        let len = self.buf.len();
        let mut lost = 0i64;
        for k in start..start + len {
            let key = self.key(&self.pos[k]);
            lost += self.sites.remove(key) as i64;
        }
        let mut gained = 0i64;
        for j in 0..len {
            let key = self.key(&self.buf[j]);
            gained += self.sites.insert(key) as i64;
        }
        let delta = gained - lost;
        let accept = delta <= 0 || self.rng.gen::<f64>() < self.one_minus_beta.powi(delta as i32);
        if accept {
            self.pos[start..start + len].copy_from_slice(&self.buf);
            self.contacts = (self.contacts as i64 + delta) as u64;
        } else {
            for j in 0..len {
                let key = self.key(&self.buf[j]);
                self.sites.remove(key);
            }
            for k in start..start + len {
                let key = self.key(&self.pos[k]);
                self.sites.insert(key);
            }
        }
        accept
    }

    fn pivot(&mut self) -> MoveOutcome {
        let n = self.len();
        let k = self.rng.gen_range(0..n);
        let g = Symmetry::random_non_identity(self.dim, &mut self.rng);
        let center = self.pos[k];
        let rotate = |g: &Symmetry, x: &[i32; MAX_DIM]| {
            let mut d = *x;
            for i in 0..MAX_DIM {
                d[i] -= center[i];
            }
            let mut y = g.apply_array(&d);
            for i in 0..MAX_DIM {
                y[i] += center[i];
            }
            y
        };
        // rotating the suffix by g and the prefix by g^{-1} give congruent walks
        let accepted = if n - k <= k {
            self.buf.clear();
            for j in k + 1..=n {
                self.buf.push(rotate(&g, &self.pos[j]));
            }
            let ok = self.try_replace(k + 1);
            if ok {
                for s in &mut self.steps[k..] {
                    *s = g.apply_step(*s);
                }
            }
            ok
        } else {
            let h = g.inverse();
            self.buf.clear();
            for j in 0..k {
                self.buf.push(rotate(&h, &self.pos[j]));
            }
            let ok = self.try_replace(0);
            if ok {
                for s in &mut self.steps[..k] {
                    *s = h.apply_step(*s);
                }
                if self.pos[0][..self.dim].iter().any(|c| c.abs() > RECENTER_BOUND) {
                    self.rebuild([0; MAX_DIM]);
                }
            }
            ok
        };
        MoveOutcome {
            kind: MoveKind::Pivot,
            accepted,
            proposed: true,
        }
    }

    fn end_move(&mut self) -> MoveOutcome {
        let n = self.len();
        let s = Step(self.rng.gen_range(0..2 * self.dim as u8));
        if s == self.steps[n - 1] {
            return MoveOutcome {
                kind: MoveKind::End,
                accepted: false,
                proposed: true,
            };
        }
        let mut x = self.pos[n - 1];
        x[s.axis()] += s.sign();
        self.buf.clear();
        self.buf.push(x);
        let accepted = self.try_replace(n);
        if accepted {
            self.steps[n - 1] = s;
        }
        MoveOutcome {
            kind: MoveKind::End,
            accepted,
            proposed: true,
        }
    }

    fn kink_move(&mut self) -> MoveOutcome {
        let n = self.len();
        if n < 2 {
            return MoveOutcome {
                kind: MoveKind::Kink,
                accepted: false,
                proposed: false,
            };
        }
        let i = self.rng.gen_range(0..n - 1);
        let (a, b) = (self.steps[i], self.steps[i + 1]);
        if a == b {
            return MoveOutcome {
                kind: MoveKind::Kink,
                accepted: false,
                proposed: true,
            };
        }
        let mut x = self.pos[i];
        x[b.axis()] += b.sign();
        self.buf.clear();
        self.buf.push(x);
        let accepted = self.try_replace(i + 1);
        if accepted {
            self.steps.swap(i, i + 1);
        }
        MoveOutcome {
            kind: MoveKind::Kink,
            accepted,
            proposed: true,
        }
    }

    fn crankshaft_move(&mut self) -> MoveOutcome {
        let n = self.len();
        if n < 3 || self.dim < 2 {
            return MoveOutcome {
                kind: MoveKind::Crankshaft,
                accepted: false,
                proposed: false,
            };
        }
        let i = self.rng.gen_range(0..n - 2);
        let (a, b, c) = (self.steps[i], self.steps[i + 1], self.steps[i + 2]);
        if c != a.reversed() || a.axis() == b.axis() {
            return MoveOutcome {
                kind: MoveKind::Crankshaft,
                accepted: false,
                proposed: false,
            };
        }
        // 2d - 3 choices: not along b's axis, not a itself
        let choices: Vec<Step> = Step::all(self.dim).filter(|g| g.axis() != b.axis() && *g != a).collect();
        let g = choices[self.rng.gen_range(0..choices.len())];
        let mut x1 = self.pos[i];
        x1[g.axis()] += g.sign();
        let mut x2 = x1;
        x2[b.axis()] += b.sign();
        self.buf.clear();
        self.buf.push(x1);
        self.buf.push(x2);
        let accepted = self.try_replace(i + 1);
        if accepted {
            self.steps[i] = g;
            self.steps[i + 2] = g.reversed();
        }
        MoveOutcome {
            kind: MoveKind::Crankshaft,
            accepted,
            proposed: true,
        }
    }
}

pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Quantities recorded once per sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    EndpointNormSq,
    Contacts,
    /// `ω(to) - ω(from)`, one series per coordinate.
    Increment {
        from: usize,
        to: usize,
    },
}

impl Observable {
    fn width(&self, dim: usize) -> usize {
        match self {
            Observable::Increment { .. } => dim,
            _ => 1,
        }
    }

    pub fn names(&self, dim: usize) -> Vec<String> {
        match self {
            Observable::EndpointNormSq => vec!["endpoint_norm_sq".into()],
            Observable::Contacts => vec!["contacts".into()],
            Observable::Increment { from, to } => (1..=dim).map(|i| format!("increment_{from}_{to}_x{i}")).collect(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if let Observable::Increment { from, to } = self {
            if from > to || *to > n {
                return Err(Error::Precondition(format!("increment times {from}..{to} not inside [0, {n}]")));
            }
        }
        Ok(())
    }

    fn record(&self, chain: &MetropolisChain, out: &mut Vec<f64>) {
        match self {
            Observable::EndpointNormSq => out.push(chain.endpoint_norm_sq() as f64),
            Observable::Contacts => out.push(chain.contacts() as f64),
            Observable::Increment { from, to } => {
                let a = chain.relative_position(*from);
                let b = chain.relative_position(*to);
                out.extend((0..chain.dim).map(|i| (b[i] - a[i]) as f64));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub name: String,
    pub estimate: EstimateWithError,
    /// Integrated autocorrelation time in sweeps, averaged over chains.
    pub tau_int: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetropolisResult {
    pub params: ModelParams,
    pub config: MetropolisConfig,
    pub estimates: Vec<ObservableEstimate>,
    pub moves: MoveCounts,
    /// Per-chain traces after thermalization: `traces[chain][column][sweep]`.
    #[serde(skip)]
    pub traces: Vec<Vec<Vec<f64>>>,
}

impl MetropolisResult {
    pub fn get(&self, name: &str) -> Option<&ObservableEstimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    /// CSV with columns `chain, sweep, <observables...>`.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["chain".to_string(), "sweep".to_string()];
        header.extend(self.estimates.iter().map(|e| e.name.clone()));
        w.write_record(&header)?;
        for (c, trace) in self.traces.iter().enumerate() {
            let len = trace.first().map_or(0, |t| t.len());
            for s in 0..len {
                let mut row = vec![c.to_string(), (self.config.thermalization + s).to_string()];
                row.extend(trace.iter().map(|col| format!("{}", col[s])));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `cfg.chains` independent chains and reports batch-means estimates of
/// each observable. Chain means are averaged with equal weights.
pub fn metropolis_sample(params: &ModelParams, cfg: &MetropolisConfig, observables: &[Observable]) -> Result<MetropolisResult> {
    params.validate()?;
    cfg.validate(params)?;
    if params.n == 0 {
        return Err(Error::Precondition("Metropolis sampling needs n >= 1".into()));
    }
    for o in observables {
        o.check(params.n)?;
    }
    let names: Vec<String> = observables.iter().flat_map(|o| o.names(params.dim)).collect();
    let width: usize = observables.iter().map(|o| o.width(params.dim)).sum();
    let runs: Vec<Result<(Vec<Vec<f64>>, MoveCounts)>> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| {
            let mut chain = MetropolisChain::new(params, cfg.pivot_fraction, cfg.local_moves, chain_rng(cfg.seed, c as u64))?;
            for _ in 0..cfg.thermalization {
                chain.sweep(cfg.moves_per_sweep);
            }
            let measured = cfg.sweeps - cfg.thermalization;
            let mut cols = vec![Vec::with_capacity(measured); width];
            let mut row = Vec::with_capacity(width);
            for _ in 0..measured {
                chain.sweep(cfg.moves_per_sweep);
                row.clear();
                for o in observables {
                    o.record(&chain, &mut row);
                }
                for (col, v) in cols.iter_mut().zip(&row) {
                    col.push(*v);
                }
            }
            Ok((cols, chain.counts()))
        })
        .collect();
    let mut traces = Vec::with_capacity(cfg.chains);
    let mut moves = MoveCounts::default();
    for r in runs {
        let (cols, counts) = r?;
        moves.merge(&counts);
        traces.push(cols);
    }
    let mut estimates = Vec::with_capacity(width);
    for (j, name) in names.into_iter().enumerate() {
        let per_chain: Vec<EstimateWithError> = traces.iter().map(|t| batch_means(&t[j])).collect::<Result<_>>()?;
        let c = per_chain.len() as f64;
        let mean = per_chain.iter().map(|e| e.mean).sum::<f64>() / c;
        let se = per_chain.iter().map(|e| e.std_error * e.std_error).sum::<f64>().sqrt() / c;
        let n_effective = per_chain.iter().map(|e| e.n_effective).sum();
        let tau_int = traces.iter().map(|t| integrated_autocorrelation_time(&t[j])).sum::<f64>() / c;
        estimates.push(ObservableEstimate {
            name,
            estimate: EstimateWithError {
                mean,
                std_error: se,
                n_effective,
            },
            tau_int,
        });
    }
    Ok(MetropolisResult {
        params: *params,
        config: cfg.clone(),
        estimates,
        moves,
        traces,
    })
}

/// Yields decorrelated states of one chain, `spacing` sweeps apart.
pub struct PathSampler {
    chain: MetropolisChain,
    moves_per_sweep: usize,
    spacing: usize,
}

impl PathSampler {
    /// Thermalizes, then fixes the spacing at `ceil(2 τ_int)` sweeps with
    /// `τ_int` measured on the endpoint norm over the remaining sweeps of `cfg`.
    pub fn new(params: &ModelParams, cfg: &MetropolisConfig, stream: u64) -> Result<Self> {
        params.validate()?;
        cfg.validate(params)?;
        if params.n == 0 {
            return Err(Error::Precondition("path sampling needs n >= 1".into()));
        }
        let mut chain = MetropolisChain::new(params, cfg.pivot_fraction, cfg.local_moves, chain_rng(cfg.seed, stream))?;
        for _ in 0..cfg.thermalization {
            chain.sweep(cfg.moves_per_sweep);
        }
        let pilot: Vec<f64> = (0..cfg.sweeps - cfg.thermalization)
            .map(|_| {
                chain.sweep(cfg.moves_per_sweep);
                chain.endpoint_norm_sq() as f64
            })
            .collect();
        let tau = integrated_autocorrelation_time(&pilot);
        let spacing = (2.0 * tau).ceil().max(1.0) as usize;
        Ok(PathSampler {
            chain,
            moves_per_sweep: cfg.moves_per_sweep,
            spacing,
        })
    }

    pub fn spacing(&self) -> usize {
        self.spacing
    }

    /// Advances to the next snapshot and exposes the chain.
    pub fn advance(&mut self) -> &MetropolisChain {
        for _ in 0..self.spacing {
            self.chain.sweep(self.moves_per_sweep);
        }
        &self.chain
    }
}

impl Iterator for PathSampler {
    type Item = Walk;

    fn next(&mut self) -> Option<Walk> {
        Some(self.advance().walk())
    }
}

/// `count` decorrelated walks from `cfg.chains` chains.
pub fn sample_paths(params: &ModelParams, cfg: &MetropolisConfig, count: usize) -> Result<Vec<Walk>> {
    params.validate()?;
    cfg.validate(params)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let chains = cfg.chains.min(count);
    let parts: Vec<Result<Vec<Walk>>> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let share = count / chains + usize::from(c < count % chains);
            Ok(PathSampler::new(params, cfg, c as u64)?.take(share).collect())
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::contact_count;

    fn recount(chain: &MetropolisChain) -> u64 {
        let w = chain.walk();
        match chain.torus {
            None => contact_count(&w, 0, w.len()).unwrap(),
            Some(r) => crate::walk::torus_contact_count(&w, r, 0, w.len()).unwrap(),
        }
    }

    #[test]
    fn validation() {
        let p = ModelParams::lattice(2, 0.3, 10).unwrap();
        let ok = MetropolisConfig::default();
        assert!(ok.validate(&p).is_ok());
        let bad = [
            MetropolisConfig {
                pivot_fraction: 0.0,
                local_moves: false,
                ..ok.clone()
            },
            MetropolisConfig {
                pivot_fraction: 1.5,
                ..ok.clone()
            },
            MetropolisConfig {
                thermalization: 10_000,
                ..ok.clone()
            },
            MetropolisConfig { chains: 0, ..ok.clone() },
        ];
        for c in bad {
            assert!(matches!(c.validate(&p), Err(Error::InvalidParameter(_))), "{c:?}");
        }
        let saw = ModelParams::lattice(2, 1.0, 10).unwrap();
        assert!(MetropolisConfig {
            pivot_fraction: 0.0,
            ..ok.clone()
        }
        .validate(&saw)
        .is_err());
        assert!(metropolis_sample(&p.with_n(0), &ok, &[]).is_err());
        assert!(metropolis_sample(&p, &ok, &[Observable::Increment { from: 3, to: 11 }]).is_err());
    }

    #[test]
    fn moves_keep_contact_count_and_walk_valid() {
        for params in [
            ModelParams::lattice(2, 0.4, 30).unwrap(),
            ModelParams::torus(3, 0.2, 4, 40).unwrap(),
            ModelParams::lattice(1, 0.5, 12).unwrap(),
        ] {
            let mut chain = MetropolisChain::new(&params, 0.4, true, chain_rng(5, 0)).unwrap();
            for _ in 0..3000 {
                chain.attempt_move();
                assert_eq!(chain.relative_position(0), [0; MAX_DIM]);
            }
            assert_eq!(chain.contacts(), recount(&chain));
            let w = chain.walk();
            assert_eq!(w.len(), params.n);
            for k in 0..=params.n {
                let x = chain.relative_position(k);
                let expect: Vec<i32> = match params.torus {
                    None => x[..params.dim].to_vec(),
                    Some(r) => x[..params.dim].iter().map(|&c| torus_rep(c, r)).collect(),
                };
                assert_eq!(w.position(k), &expect[..]);
            }
        }
    }

    #[test]
    fn free_walk_accepts_everything() {
        let p = ModelParams::lattice(3, 0.0, 20).unwrap();
        let cfg = MetropolisConfig {
            sweeps: 200,
            thermalization: 10,
            ..Default::default()
        };
        let r = metropolis_sample(&p, &cfg, &[Observable::EndpointNormSq]).unwrap();
        assert_eq!(r.moves.pivot_accepted, r.moves.pivot_attempted);
    }

    #[test]
    fn seeded_determinism() {
        let p = ModelParams::lattice(2, 0.3, 15).unwrap();
        let cfg = MetropolisConfig {
            sweeps: 500,
            thermalization: 50,
            chains: 2,
            seed: 9,
            ..Default::default()
        };
        let obs = [Observable::EndpointNormSq, Observable::Increment { from: 2, to: 9 }];
        let a = metropolis_sample(&p, &cfg, &obs).unwrap();
        let b = metropolis_sample(&p, &cfg, &obs).unwrap();
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.estimates.len(), 3);
        let mut csv = Vec::new();
        a.write_trace(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("chain,sweep,endpoint_norm_sq,increment_2_9_x1,increment_2_9_x2\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 450);
    }

    #[test]
    fn sample_paths_basics() {
        let p = ModelParams::lattice(2, 0.2, 10).unwrap();
        let cfg = MetropolisConfig {
            sweeps: 300,
            thermalization: 50,
            ..Default::default()
        };
        assert!(sample_paths(&p, &cfg, 0).unwrap().is_empty());
        let ws = sample_paths(&p, &cfg, 25).unwrap();
        assert_eq!(ws.len(), 25);
        assert!(ws.iter().all(|w| w.len() == 10 && w.position(0) == [0, 0]));
    }
}
