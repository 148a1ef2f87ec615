//! Nearest-neighbour walks on Z^d and on the discrete torus, their
//! interaction weights, and the lift bijection between the two.

use crate::error::{Error, Result};
use crate::lattice::{norm_sq, site_key, torus_rep, Ambient, LatticePoint, SiteTable, Step, MAX_COORD, MAX_DIM};

/// An n-step walk started at the origin. Positions are stored flat; on the
/// torus they are the representatives in `[-r/2, r/2)^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    dim: usize,
    ambient: Ambient,
    steps: Vec<Step>,
    positions: Vec<i32>,
}

fn check_shape(dim: usize, ambient: Ambient, n: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidParameter(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    if let Ambient::Torus(r) = ambient {
        if r < 3 {
            return Err(Error::InvalidParameter(format!("torus side must be at least 3, got {r}")));
        }
    }
    if n > MAX_COORD as usize {
        return Err(Error::InvalidParameter(format!("walk length {n} exceeds {MAX_COORD}")));
    }
    Ok(())
}

impl Walk {
    pub fn from_steps(dim: usize, ambient: Ambient, steps: Vec<Step>) -> Result<Walk> {
        check_shape(dim, ambient, steps.len())?;
        let mut positions = Vec::with_capacity(dim * (steps.len() + 1));
        positions.resize(dim, 0);
        let mut cur = vec![0i32; dim];
        for &s in &steps {
            if s.axis() >= dim {
                return Err(Error::InvalidParameter(format!("step {s} does not exist in dimension {dim}")));
            }
            let c = &mut cur[s.axis()];
            *c += s.sign();
            if let Ambient::Torus(r) = ambient {
                *c = torus_rep(*c, r);
            }
            positions.extend_from_slice(&cur);
        }
        Ok(Walk {
            dim,
            ambient,
            steps,
            positions,
        })
    }

    /// Builds a walk from explicit positions, checking `ω(0) = 0`, the
    /// nearest-neighbour constraint (modulo r on the torus) and, on the
    /// torus, that every position is a representative.
    pub fn from_positions(dim: usize, ambient: Ambient, points: &[Vec<i32>]) -> Result<Walk> {
        let n = points
            .len()
            .checked_sub(1)
            .ok_or_else(|| Error::InvalidParameter("a walk needs at least one position".into()))?;
        check_shape(dim, ambient, n)?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidParameter(format!("positions must have {dim} coordinates")));
        }
        if points[0].iter().any(|&c| c != 0) {
            return Err(Error::InvalidParameter("walk must start at the origin".into()));
        }
        let mut steps = Vec::with_capacity(n);
        for (i, pair) in points.windows(2).enumerate() {
            let delta: Vec<i32> = match ambient {
                Ambient::Lattice => pair[1].iter().zip(&pair[0]).map(|(a, b)| a - b).collect(),
                Ambient::Torus(r) => {
                    if pair[1].iter().any(|&c| torus_rep(c, r) != c) {
                        return Err(Error::InvalidParameter(format!("position {} is not a torus representative", i + 1)));
                    }
                    pair[1].iter().zip(&pair[0]).map(|(a, b)| torus_rep(a - b, r)).collect()
                }
            };
            let step = Step::from_delta(&delta).ok_or_else(|| Error::InvalidParameter(format!("positions {i} and {} are not nearest neighbours", i + 1)))?;
            steps.push(step);
        }
        Walk::from_steps(dim, ambient, steps)
    }

    /// The zero-step walk.
    pub fn empty(dim: usize, ambient: Ambient) -> Walk {
        Walk::from_steps(dim, ambient, Vec::new()).expect("valid shape")
    }

    /// n steps in the +e_0 direction.
    pub fn straight(dim: usize, ambient: Ambient, n: usize) -> Result<Walk> {
        Walk::from_steps(dim, ambient, vec![Step(0); n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    /// Number of steps n.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    #[inline]
    pub fn position(&self, k: usize) -> &[i32] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = &[i32]> {
        self.positions.chunks_exact(self.dim)
    }

    pub fn point(&self, k: usize) -> LatticePoint {
        LatticePoint(self.position(k).to_vec())
    }

    pub fn endpoint(&self) -> &[i32] {
        self.position(self.len())
    }

    pub fn endpoint_norm_sq(&self) -> i64 {
        norm_sq(self.endpoint())
    }

    /// Same step sequence reinterpreted in another ambient space.
    pub fn with_ambient(&self, ambient: Ambient) -> Result<Walk> {
        Walk::from_steps(self.dim, ambient, self.steps.clone())
    }

    fn check_pair(&self, s: usize, t: usize) -> Result<()> {
        if s >= t || t > self.len() {
            return Err(Error::Precondition(format!("need 0 <= s < t <= {}, got s={s}, t={t}", self.len())));
        }
        Ok(())
    }

    fn check_interval(&self, a: usize, b: usize) -> Result<()> {
        if a > b || b > self.len() {
            return Err(Error::Precondition(format!("need 0 <= a <= b <= {}, got a={a}, b={b}", self.len())));
        }
        Ok(())
    }

    #[inline]
    fn coincide(&self, s: usize, t: usize, modulus: Option<u32>) -> bool {
        match modulus {
            None => self.position(s) == self.position(t),
            Some(r) => self.position(s).iter().zip(self.position(t)).all(|(&x, &y)| torus_rep(x - y, r) == 0),
        }
    }

    /// Site key under the given coincidence rule.
    #[inline]
    fn key_at(&self, k: usize, modulus: Option<u32>) -> u128 {
        match modulus {
            None => site_key(self.position(k)),
            Some(r) => {
                let mut buf = [0i32; MAX_DIM];
                for (b, &c) in buf.iter_mut().zip(self.position(k)) {
                    *b = torus_rep(c, r);
                }
                site_key(&buf[..self.dim])
            }
        }
    }

    /// Pairs `a <= s < t <= b` with ω(s) = ω(t) under the given rule, counted
    /// incrementally from a multiplicity table.
    fn contacts_with(&self, a: usize, b: usize, modulus: Option<u32>) -> u64 {
        let mut table = SiteTable::with_capacity(b - a + 1);
        (a..=b).map(|k| table.insert(self.key_at(k, modulus)) as u64).sum()
    }

    fn own_modulus(&self) -> Option<u32> {
        // torus positions are already representatives, so plain equality suffices
        None
    }
}

/// `U_st`: -1 when ω(s) = ω(t) (on the torus: equal modulo r), else 0.
pub fn pair_interaction(w: &Walk, s: usize, t: usize) -> Result<i8> {
    w.check_pair(s, t)?;
    Ok(if w.coincide(s, t, w.own_modulus()) { -1 } else { 0 })
}

/// `U^T_st` for a Z^d walk: -1 when ω(s) = ω(t) mod r in every coordinate.
pub fn torus_pair_interaction(w: &Walk, r: u32, s: usize, t: usize) -> Result<i8> {
    w.check_pair(s, t)?;
    Ok(if w.coincide(s, t, Some(r)) { -1 } else { 0 })
}

/// Number of intersecting pairs `a <= s < t <= b`.
pub fn contact_count(w: &Walk, a: usize, b: usize) -> Result<u64> {
    w.check_interval(a, b)?;
    Ok(w.contacts_with(a, b, w.own_modulus()))
}

/// Number of pairs in `[a, b]` that coincide modulo r. For a lifted walk this
/// is the contact count of the torus walk it came from.
pub fn torus_contact_count(w: &Walk, r: u32, a: usize, b: usize) -> Result<u64> {
    w.check_interval(a, b)?;
    if r < 3 {
        return Err(Error::InvalidParameter(format!("torus side must be at least 3, got {r}")));
    }
    Ok(w.contacts_with(a, b, Some(r)))
}

/// `(1 - β)^contacts`, with `0^0 = 1`.
#[inline]
pub fn weight_from_contacts(beta: f64, contacts: u64) -> f64 {
    if contacts == 0 {
        1.0
    } else {
        (1.0 - beta).powi(contacts.min(i32::MAX as u64) as i32)
    }
}

/// `K[a,b] = ∏_{a<=s<t<=b} (1 + β U_st)`, evaluated as `(1-β)^contacts`.
pub fn interaction_weight(w: &Walk, beta: f64, a: usize, b: usize) -> Result<f64> {
    Ok(weight_from_contacts(beta, contact_count(w, a, b)?))
}

/// `K^T[a,b]` for a Z^d walk, counting coincidences modulo r.
pub fn torus_interaction_weight(w: &Walk, beta: f64, r: u32, a: usize, b: usize) -> Result<f64> {
    Ok(weight_from_contacts(beta, torus_contact_count(w, r, a, b)?))
}

/// `ln K[a,b]`; `-inf` when β = 1 and the segment intersects itself.
pub fn log_interaction_weight(w: &Walk, beta: f64, a: usize, b: usize) -> Result<f64> {
    let c = contact_count(w, a, b)?;
    Ok(if c == 0 { 0.0 } else { c as f64 * (1.0 - beta).ln() })
}

/// Unwraps a torus walk to Z^d: `ω̂(k) = ω̂(k-1) + (ω(k) - ω(k-1))_r`.
pub fn lift_walk(w: &Walk) -> Result<Walk> {
    let r = match w.ambient {
        Ambient::Torus(r) => r,
        Ambient::Lattice => return Err(Error::Precondition("lift_walk needs a torus walk".into())),
    };
    if r < 3 {
        return Err(Error::InvalidParameter(format!("the lift is a bijection only for r >= 3, got {r}")));
    }
    let d = w.dim;
    let mut points = Vec::with_capacity(w.len() + 1);
    let mut cur = vec![0i32; d];
    points.push(cur.clone());
    for k in 1..=w.len() {
        for i in 0..d {
            cur[i] += torus_rep(w.position(k)[i] - w.position(k - 1)[i], r);
        }
        points.push(cur.clone());
    }
    Walk::from_positions(d, Ambient::Lattice, &points)
}

/// Componentwise reduction modulo r of every position of a Z^d walk.
pub fn project_walk(w: &Walk, r: u32) -> Result<Walk> {
    if r < 3 {
        return Err(Error::InvalidParameter(format!("torus side must be at least 3, got {r}")));
    }
    if w.ambient.is_torus() {
        return Err(Error::Precondition("project_walk needs a Z^d walk".into()));
    }
    let points: Vec<Vec<i32>> = w.positions().map(|p| p.iter().map(|&c| torus_rep(c, r)).collect()).collect();
    Walk::from_positions(w.dim, Ambient::Torus(r), &points)
}
