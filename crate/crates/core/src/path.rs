//! Piecewise-linear rescaled paths in R^d and on the unit torus, and the
//! lift/projection pair relating them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{unit_rep, Ambient};
use crate::walk::Walk;

/// Threshold of the stopping sequence used by [`lift_path`].
pub const LIFT_THRESHOLD: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathAmbient {
    Euclidean,
    /// `(R/Z)^d`, points stored as representatives in `[-1/2, 1/2)^d`.
    Torus,
}

/// Knots `(t_i, p_i)` with `t_0 = 0`, `p_0 = 0`, linear in between and constant
/// after the last knot. On the torus each segment follows the shortest
/// displacement between its endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledPath {
    dim: usize,
    ambient: PathAmbient,
    times: Vec<f64>,
    points: Vec<f64>,
    /// `None` means the path extends to infinity.
    horizon: Option<f64>,
}

impl RescaledPath {
    pub fn new(dim: usize, ambient: PathAmbient, times: Vec<f64>, points: Vec<f64>, horizon: Option<f64>) -> Result<Self> {
        if dim == 0 || times.is_empty() || points.len() != dim * times.len() {
            return Err(Error::InvalidParameter(format!("path needs at least one knot with {dim} coordinates each")));
        }
        if times[0] != 0.0 || points[..dim].iter().any(|&c| c != 0.0) {
            return Err(Error::InvalidParameter("path must start at the origin at time 0".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("knot times must be strictly increasing".into()));
        }
        if points.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("path points must be finite".into()));
        }
        if ambient == PathAmbient::Torus && points.iter().any(|&c| !(-0.5..0.5).contains(&c)) {
            return Err(Error::InvalidParameter("torus points must lie in [-1/2, 1/2)".into()));
        }
        if let Some(h) = horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter(format!("horizon must be positive and finite, got {h}")));
            }
        }
        Ok(RescaledPath {
            dim,
            ambient,
            times,
            points,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient(&self) -> PathAmbient {
        self.ambient
    }

    pub fn horizon(&self) -> Option<f64> {
        self.horizon
    }

    /// Restricts evaluation to `[0, horizon]`.
    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive and finite, got {horizon}")));
        }
        self.horizon = Some(horizon);
        Ok(self)
    }

    pub fn knots(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Displacement along segment `i -> i + 1`.
    fn segment(&self, i: usize) -> Vec<f64> {
        let (a, b) = (self.point(i), self.point(i + 1));
        match self.ambient {
            PathAmbient::Euclidean => b.iter().zip(a).map(|(b, a)| b - a).collect(),
            PathAmbient::Torus => b.iter().zip(a).map(|(b, a)| unit_rep(b - a)).collect(),
        }
    }

    /// Value at time `t >= 0` (within the horizon).
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) || self.horizon.is_some_and(|h| t > h) {
            return Err(Error::Precondition(format!("time {t} outside the path's domain")));
        }
        let last = self.times.len() - 1;
        if t >= self.times[last] {
            return Ok(self.point(last).to_vec());
        }
        // first knot strictly after t
        let j = self.times.partition_point(|&s| s <= t);
        let i = j - 1;
        let frac = (t - self.times[i]) / (self.times[j] - self.times[i]);
        let delta = self.segment(i);
        let p = self.point(i);
        Ok(match self.ambient {
            PathAmbient::Euclidean => p.iter().zip(&delta).map(|(p, d)| p + frac * d).collect(),
            PathAmbient::Torus => p.iter().zip(&delta).map(|(p, d)| unit_rep(p + frac * d)).collect(),
        })
    }

    /// Largest componentwise distance between the paths, taken over the
    /// union of both knot sets (on the torus, distance modulo 1).
    pub fn distance(&self, other: &RescaledPath) -> Result<f64> {
        if self.dim != other.dim || self.ambient != other.ambient {
            return Err(Error::Precondition("paths live in different spaces".into()));
        }
        let mut ts: Vec<f64> = self.times.iter().chain(&other.times).copied().collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut worst = 0.0f64;
        for t in ts {
            let (a, b) = (self.evaluate(t)?, other.evaluate(t)?);
            for (x, y) in a.iter().zip(&b) {
                let d = match self.ambient {
                    PathAmbient::Euclidean => (x - y).abs(),
                    PathAmbient::Torus => unit_rep(x - y).abs(),
                };
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    pub fn sup_norm(&self) -> f64 {
        self.points
            .chunks_exact(self.dim)
            .map(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Knots at `k / r²` with values `ω(k) / r`; torus walks land on `[-1/2, 1/2)^d`.
pub fn rescale(w: &Walk, r: u32) -> Result<RescaledPath> {
    if r == 0 {
        return Err(Error::InvalidParameter("scale r must be at least 1".into()));
    }
    let rf = r as f64;
    let r2 = rf * rf;
    let times = (0..=w.len()).map(|k| k as f64 / r2).collect();
    let ambient = match w.ambient() {
        Ambient::Lattice => PathAmbient::Euclidean,
        Ambient::Torus(_) => PathAmbient::Torus,
    };
    let points = w.positions().flat_map(|p| p.iter().map(move |&c| c as f64 / rf)).collect();
    RescaledPath::new(w.dim(), ambient, times, points, None)
}

/// The continuous R^d path projecting onto `x`, built from the stopping
/// times at which the representative displacement from the last stopping
/// point reaches norm 1/8.
pub fn lift_path(x: &RescaledPath) -> Result<RescaledPath> {
    if x.ambient != PathAmbient::Torus {
        return Err(Error::Precondition("lift_path expects a torus path".into()));
    }
    let d = x.dim;
    let mut out = Vec::with_capacity(x.points.len());
    out.extend_from_slice(x.point(0));
    let mut anchor_x = x.point(0).to_vec();
    let mut anchor_y = vec![0.0; d];
    let limit = LIFT_THRESHOLD * LIFT_THRESHOLD;
    for i in 0..x.knots() - 1 {
        let delta = x.segment(i);
        if delta.iter().any(|c| c.abs() >= 0.5) {
            return Err(Error::Precondition(format!("segment {i} has torus displacement of at least 1/2")));
        }
        let start = x.point(i);
        let a: f64 = delta.iter().map(|c| c * c).sum();
        let mut s = 0.0;
        loop {
            // representative displacement from the anchor at fraction s
            let d0: Vec<f64> = (0..d).map(|c| unit_rep(start[c] + s * delta[c] - anchor_x[c])).collect();
            let b: f64 = 2.0 * d0.iter().zip(&delta).map(|(p, q)| p * q).sum::<f64>();
            let cq: f64 = d0.iter().map(|c| c * c).sum::<f64>() - limit;
            let tau = if cq >= 0.0 {
                // already on the threshold (round-off): stop here
                0.0
            } else if a > 0.0 {
                (-b + (b * b - 4.0 * a * cq).sqrt()) / (2.0 * a)
            } else {
                f64::INFINITY
            };
            if tau <= 1.0 - s {
                for c in 0..d {
                    anchor_y[c] += d0[c] + tau * delta[c];
                    anchor_x[c] = unit_rep(start[c] + (s + tau) * delta[c]);
                }
                s += tau;
            } else {
                out.extend((0..d).map(|c| anchor_y[c] + d0[c] + (1.0 - s) * delta[c]));
                break;
            }
        }
    }
    RescaledPath::new(d, PathAmbient::Euclidean, x.times.clone(), out, x.horizon)
}

/// Pointwise reduction modulo 1, refining segments so each moves less than
/// 1/2 per coordinate.
pub fn project_path(y: &RescaledPath) -> RescaledPath {
    if y.ambient == PathAmbient::Torus {
        return y.clone();
    }
    let d = y.dim;
    let mut times = vec![0.0];
    let mut points = vec![0.0; d];
    for i in 0..y.knots() - 1 {
        let delta = y.segment(i);
        let widest = delta.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let pieces = (2.0 * widest).floor() as usize + 1;
        let (t0, t1) = (y.times[i], y.times[i + 1]);
        let p = y.point(i);
        for m in 1..=pieces {
            let f = m as f64 / pieces as f64;
            times.push(if m == pieces { t1 } else { t0 + f * (t1 - t0) });
            points.extend((0..d).map(|c| unit_rep(p[c] + f * delta[c])));
        }
    }
    RescaledPath {
        dim: d,
        ambient: PathAmbient::Torus,
        times,
        points,
        horizon: y.horizon,
    }
}
