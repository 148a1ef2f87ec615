use std::collections::BTreeMap;

use wsaw_core::enumeration::{connective_ratio_sequence, enumerate_all_lengths, EndpointTables};
use wsaw_core::lace::{j_sums, kjk_sweep, pi_series_from_sums};
use wsaw_core::metropolis::Observable;
use wsaw_core::scaling::{fdd_sampled, uniform_time_pairs, DiluteConfig, FddEstimator};
use wsaw_core::{
    degenerate_regime_check, diffusion_fit, dilute_ratio_experiment, metropolis_sample, perm_run, sample_paths, standard_frequency_grid, tightness_check,
    two_point_series, EnumerationOptions, Error, ModelParams, Result,
};

use crate::config::{Command, ExperimentConfig};
use crate::output::{f, join, Table};

/// Tables produced by a run plus a short human-readable summary.
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: String,
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.command {
        Command::Enumerate => enumerate(cfg),
        Command::LaceCheck => lace_check(cfg),
        Command::Perm => perm(cfg),
        Command::Metropolis => metropolis(cfg),
        Command::Fdd => fdd(cfg),
        Command::Tightness => tightness(cfg),
        Command::DiluteRatio => dilute(cfg),
        Command::Degenerate => degenerate(cfg),
        Command::Plateau => plateau(cfg),
    }
}

fn check_nodes(dim: usize, n: usize, limit: u64, what: &'static str) -> Result<()> {
    let q = 2 * dim as u128;
    let needed = (0..=n as u32).map(|k| q.saturating_pow(k)).fold(0u128, |a, b| a.saturating_add(b));
    if needed > limit as u128 {
        return Err(Error::BudgetExceeded {
            what,
            needed,
            limit: limit as u128,
        });
    }
    Ok(())
}

fn opts(cfg: &ExperimentConfig, endpoints: EndpointTables) -> EnumerationOptions {
    EnumerationOptions {
        node_budget: cfg.node_budget as u128,
        endpoints,
    }
}

/// `0.9 / μ̂` with `μ̂ = c_{n+1} / c_n` on Z^d, unless `--z` was given.
fn activity(cfg: &ExperimentConfig, n: usize) -> Result<f64> {
    if let Some(z) = cfg.z {
        return Ok(z);
    }
    let lattice = cfg.params.with_torus(None);
    check_nodes(lattice.dim, n + 1, cfg.node_budget, "enumeration nodes")?;
    let mu = *connective_ratio_sequence(&lattice, n + 1)?.last().expect("n + 1 >= 1");
    Ok(0.9 / mu)
}

fn enumerate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let all = enumerate_all_lengths(&cfg.params, &opts(cfg, EndpointTables::Final))?;
    let mut t = Table::new("enumerate", &["n", "c_n", "msd", "self_avoiding_walks"]);
    for s in &all {
        t.push([s.n.to_string(), f(s.c_n), f(s.msd()), s.self_avoiding_count().to_string()]);
    }
    let last = all.last().expect("n >= 0");
    let mut e = Table::new("endpoints", &["x", "weight"]);
    for (x, w) in &last.endpoint_weights {
        e.push([join(x.coords(), " "), f(*w)]);
    }
    Ok(RunOutput {
        summary: format!("c_{} = {}", last.n, last.c_n),
        tables: vec![t, e],
    })
}

fn lace_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let rows = kjk_sweep(&cfg.params, cfg.node_budget as u128)?;
    let mut t = Table::new("lace_check", &["n", "walks", "max_residual"]);
    for r in &rows {
        t.push([r.n.to_string(), r.walks.to_string(), f(r.max_residual)]);
    }
    let worst = rows.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let z = activity(cfg, cfg.params.n)?;
    let sums = j_sums(&cfg.params, cfg.params.n, cfg.node_budget as u128)?;
    let series = pi_series_from_sums(&sums, z);
    let mut p = Table::new("pi_series", &["n", "z", "signed_j_sum", "abs_j_sum", "term", "partial_sum"]);
    for n in 0..sums.absolute.len() {
        p.push([
            n.to_string(),
            f(z),
            f(sums.signed[n]),
            f(sums.absolute[n]),
            f(series.terms[n]),
            f(series.partial_sums[n]),
        ]);
    }
    Ok(RunOutput {
        summary: format!("max residual {worst:e}"),
        tables: vec![t, p],
    })
}

fn perm(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let res = perm_run(&cfg.params, &cfg.perm)?;
    let mut t = Table::new("perm", &["n", "log_c", "log_c_error", "msd", "msd_error"]);
    for k in 0..=res.n() {
        let lc = res.log_partition(k);
        t.push([k.to_string(), f(lc.mean), f(lc.std_error), f(res.msd[k].mean), f(res.msd[k].std_error)]);
    }
    let lc = res.log_partition(res.n());
    Ok(RunOutput {
        summary: format!("ln c_{} = {} +- {}", res.n(), lc.mean, lc.std_error),
        tables: vec![t],
    })
}

fn metropolis(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let res = metropolis_sample(&cfg.params, &cfg.metropolis, &[Observable::EndpointNormSq, Observable::Contacts])?;
    let mut t = Table::new("metropolis", &["observable", "mean", "std_error", "n_effective", "tau_int"]);
    for e in &res.estimates {
        t.push([
            e.name.clone(),
            f(e.estimate.mean),
            f(e.estimate.std_error),
            f(e.estimate.n_effective),
            f(e.tau_int),
        ]);
    }
    let mut buf = Vec::new();
    res.write_trace(&mut buf)?;
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.iter().map(str::to_string).collect();
    let mut trace = Table::new("trace", &header);
    for rec in rdr.records() {
        trace.push(rec.map_err(|e| Error::Io(e.to_string()))?.iter().map(str::to_string));
    }
    let msd = &res.estimates[0].estimate;
    Ok(RunOutput {
        summary: format!("E|w(n)|^2 = {} +- {}, acceptance {:.3}", msd.mean, msd.std_error, res.moves.acceptance()),
        tables: vec![t, trace],
    })
}

fn msd_table(params: &ModelParams, cfg: &ExperimentConfig) -> Result<BTreeMap<usize, f64>> {
    let res = perm_run(params, &cfg.perm)?;
    Ok(res.msd.iter().enumerate().map(|(k, e)| (k, e.mean)).collect())
}

fn fdd(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n = cfg.params.n;
    let fit = diffusion_fit(&msd_table(&cfg.params, cfg)?, (n / 2, n))?;
    let grid = standard_frequency_grid(cfg.params.dim, cfg.grid_blocks, n as f64)?;
    let estimator = if cfg.symmetrized { FddEstimator::Symmetrized } else { FddEstimator::Plain };
    let res = fdd_sampled(&cfg.params, &cfg.metropolis, cfg.samples, &grid, fit.d_hat, estimator)?;
    let mut t = Table::new("fdd", &["times", "frequencies", "mean_re", "mean_im", "std_error", "reference", "deviation"]);
    for (i, spec) in grid.iter().enumerate() {
        let freqs: Vec<String> = spec.frequencies.iter().map(|u| join(u, " ")).collect();
        t.push([
            join(&spec.times, " "),
            freqs.join(";"),
            f(res.means[i].re),
            f(res.means[i].im),
            f(res.std_errors[i]),
            f(res.references[i]),
            f(res.deviations[i]),
        ]);
    }
    let mut s = Table::new("fdd_summary", &["n", "d_hat", "samples", "deviation", "max_std_error"]);
    let se = res.std_errors.iter().copied().fold(0.0, f64::max);
    s.push([n.to_string(), f(fit.d_hat), res.samples.to_string(), f(res.deviation), f(se)]);
    Ok(RunOutput {
        summary: format!("D_hat = {}, deviation {} (max s.e. {se})", fit.d_hat, res.deviation),
        tables: vec![s, t],
    })
}

fn tightness(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n = cfg.params.n;
    let r = cfg.radii.first().copied().unwrap_or_else(|| ((n as f64).sqrt().floor() as u32).max(1));
    let paths = sample_paths(&cfg.params, &cfg.metropolis, cfg.samples)?;
    let horizon = (n as f64 / (r as f64 * r as f64)).min(1.0);
    let res = tightness_check(&paths, r, &uniform_time_pairs(horizon, 8))?;
    let mut t = Table::new("tightness", &["n", "r", "s", "t", "mean_sq", "ratio", "same_cell"]);
    for p in &res.pairs {
        t.push([n.to_string(), r.to_string(), f(p.s), f(p.t), f(p.mean_sq), f(p.ratio), p.same_cell.to_string()]);
    }
    Ok(RunOutput {
        summary: format!("A_hat = {} (n = {n}, r = {r})", res.a_hat),
        tables: vec![t],
    })
}

fn dilute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = &cfg.params;
    let q = 2.0 * p.dim as f64;
    let exact_max_n = (0..=p.n).take_while(|&k| q.powi(k as i32) <= cfg.node_budget as f64).last().unwrap_or(0);
    let dc = DiluteConfig {
        dim: p.dim,
        beta: p.beta,
        r: p.torus.expect("validated"),
        lengths: (1..=p.n).collect(),
        exact_max_n,
        perm: cfg.perm.clone(),
    };
    let res = dilute_ratio_experiment(&dc)?;
    let mut t = Table::new("dilute_ratio", &["n", "r", "ratio", "std_error", "shape", "exact"]);
    for row in &res.rows {
        t.push([
            row.n.to_string(),
            row.r.to_string(),
            f(row.ratio),
            f(row.std_error),
            f(row.shape),
            row.exact.to_string(),
        ]);
    }
    Ok(RunOutput {
        summary: format!("C = {}", res.c_fit),
        tables: vec![t],
    })
}

fn degenerate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = &cfg.params;
    let pairs: Vec<(usize, u32)> = cfg.radii.iter().map(|&r| (p.n, r)).collect();
    let rows = degenerate_regime_check(p.dim, p.beta, &pairs, cfg.epsilon, cfg.samples, &cfg.metropolis)?;
    let mut t = Table::new("degenerate", &["n", "r", "epsilon", "probability", "std_error", "samples"]);
    for row in &rows {
        t.push([
            row.n.to_string(),
            row.r.to_string(),
            f(cfg.epsilon),
            f(row.probability),
            f(row.std_error),
            row.samples.to_string(),
        ]);
    }
    Ok(RunOutput {
        summary: join(&rows.iter().map(|r| format!("P(r={}) = {}", r.r, r.probability)).collect::<Vec<_>>(), ", "),
        tables: vec![t],
    })
}

fn plateau(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = &cfg.params;
    check_nodes(p.dim, p.n, cfg.node_budget, "enumeration nodes")?;
    let z = activity(cfg, p.n)?;
    let torus = two_point_series(p, z, p.n)?;
    let lattice = two_point_series(&p.with_torus(None), z, p.n)?;
    let mut rows: Vec<(i64, Vec<i32>, f64, f64)> = torus
        .values
        .iter()
        .map(|(x, g)| (x.norm_sq(), x.coords().to_vec(), *g, lattice.value(x)))
        .collect();
    rows.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut t = Table::new("plateau", &["x", "norm", "g_torus", "g_lattice"]);
    for (nsq, x, gt, g) in &rows {
        t.push([join(x, " "), f((*nsq as f64).sqrt()), f(*gt), f(*g)]);
    }
    let volume = p.volume().expect("validated torus");
    Ok(RunOutput {
        summary: format!(
            "z = {z}, chi_T = {}, chi = {}, V^(-1/2) = {}",
            torus.susceptibility_partial,
            lattice.susceptibility_partial,
            volume.powf(-0.5)
        ),
        tables: vec![t],
    })
}
