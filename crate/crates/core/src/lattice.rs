//! Lattice geometry: unit steps, torus representatives, the hyperoctahedral
//! symmetry group and packed site keys for occupancy tables.

use std::fmt;

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

/// Largest supported dimension. Site keys pack 16 bits per coordinate into a u128.
pub const MAX_DIM: usize = 8;

/// Largest absolute coordinate a packed site key can hold.
pub const MAX_COORD: i32 = (1 << 15) - 1;

/// Where a walk lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ambient {
    Lattice,
    Torus(u32),
}

impl Ambient {
    pub fn side(&self) -> Option<u32> {
        match *self {
            Ambient::Lattice => None,
            Ambient::Torus(r) => Some(r),
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Ambient::Torus(_))
    }
}

/// A unit step `±e_axis`, encoded as `2 * axis + (negative as u8)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step(pub u8);

impl Step {
    pub fn new(axis: usize, negative: bool) -> Self {
        Step((2 * axis + negative as usize) as u8)
    }

    #[inline]
    pub fn axis(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn sign(self) -> i32 {
        if self.0 & 1 == 0 {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn reversed(self) -> Step {
        Step(self.0 ^ 1)
    }

    /// All 2d steps of the d-dimensional lattice.
    pub fn all(dim: usize) -> impl Iterator<Item = Step> {
        (0..2 * dim as u8).map(Step)
    }

    /// Recover the step from a displacement that must be a unit vector.
    pub fn from_delta(delta: &[i32]) -> Option<Step> {
        let mut found = None;
        for (axis, &c) in delta.iter().enumerate() {
            match c {
                0 => {}
                1 | -1 if found.is_none() => found = Some(Step::new(axis, c < 0)),
                _ => return None,
            }
        }
        found
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign() > 0 { '+' } else { '-' };
        write!(f, "{s}e{}", self.axis())
    }
}

/// A point of Z^d, or a torus representative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i32>);

impl LatticePoint {
    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn norm_sq(&self) -> i64 {
        norm_sq(&self.0)
    }

    /// Componentwise torus representative.
    pub fn reduced(&self, r: u32) -> Self {
        LatticePoint(self.0.iter().map(|&c| torus_rep(c, r)).collect())
    }
}

impl From<Vec<i32>> for LatticePoint {
    fn from(v: Vec<i32>) -> Self {
        LatticePoint(v)
    }
}

#[inline]
pub fn norm_sq(x: &[i32]) -> i64 {
    x.iter().map(|&c| (c as i64) * (c as i64)).sum()
}

/// Representative of `x mod r` in `[-r/2, r/2)`, i.e. in `[-⌊r/2⌋, ⌊(r-1)/2⌋]`.
#[inline]
pub fn torus_rep(x: i32, r: u32) -> i32 {
    let r = r as i32;
    let half = r / 2;
    (x + half).rem_euclid(r) - half
}

/// Representative of a real number modulo 1 in `[-1/2, 1/2)`.
#[inline]
pub fn unit_rep(x: f64) -> f64 {
    let y = x - (x + 0.5).floor();
    // floating rounding can land exactly on the excluded endpoint
    if y >= 0.5 {
        y - 1.0
    } else {
        y
    }
}

/// A signed coordinate permutation: `(g x)[perm[i]] = ±x[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Symmetry {
    dim: usize,
    perm: [u8; MAX_DIM],
    flips: u8,
}

impl Symmetry {
    pub fn identity(dim: usize) -> Self {
        let mut perm = [0u8; MAX_DIM];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i as u8;
        }
        Symmetry { dim, perm, flips: 0 }
    }

    pub fn new(perm: &[usize], flips: u8) -> Self {
        let mut s = Symmetry::identity(perm.len());
        for (i, &p) in perm.iter().enumerate() {
            s.perm[i] = p as u8;
        }
        s.flips = flips & ((1u16 << perm.len()) - 1) as u8;
        s
    }

    /// Uniform element of the hyperoctahedral group.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut s = Symmetry::identity(dim);
        for i in (1..dim).rev() {
            let j = rng.gen_range(0..=i);
            s.perm.swap(i, j);
        }
        s.flips = (rng.gen::<u16>() & ((1u16 << dim) - 1)) as u8;
        s
    }

    /// Uniform element of the group minus the identity.
    pub fn random_non_identity<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        loop {
            let s = Symmetry::random(dim, rng);
            if !s.is_identity() {
                return s;
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.flips == 0 && (0..self.dim).all(|i| self.perm[i] as usize == i)
    }

    #[inline]
    pub fn apply_step(&self, s: Step) -> Step {
        let a = s.axis();
        let neg = (s.0 & 1) ^ ((self.flips >> a) & 1);
        Step::new(self.perm[a] as usize, neg == 1)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = Symmetry::identity(self.dim);
        inv.flips = 0;
        for i in 0..self.dim {
            let p = self.perm[i] as usize;
            inv.perm[p] = i as u8;
            inv.flips |= ((self.flips >> i) & 1) << p;
        }
        inv
    }

    #[inline]
    pub fn apply_array(&self, x: &[i32; MAX_DIM]) -> [i32; MAX_DIM] {
        let mut y = [0; MAX_DIM];
        for i in 0..self.dim {
            let c = x[i];
            y[self.perm[i] as usize] = if (self.flips >> i) & 1 == 1 { -c } else { c };
        }
        y
    }

    pub fn apply(&self, x: &[i32]) -> Vec<i32> {
        let mut y = vec![0; x.len()];
        for (i, &c) in x.iter().enumerate() {
            let v = if (self.flips >> i) & 1 == 1 { -c } else { c };
            y[self.perm[i] as usize] = v;
        }
        y
    }

    /// Size of the group, `2^d d!`.
    pub fn order(dim: usize) -> u64 {
        (1..=dim as u64).product::<u64>() << dim
    }
}

/// Packs up to eight coordinates with `|c| <= MAX_COORD` into one hashable key.
#[inline]
pub fn site_key(x: &[i32]) -> u128 {
    let mut key = 0u128;
    for &c in x {
        key = (key << 16) | ((c + (1 << 15)) as u16 as u128);
    }
    key
}

/// Site multiplicities of a walk, keyed by packed coordinates.
#[derive(Clone, Debug, Default)]
pub struct SiteTable {
    counts: FxHashMap<u128, u32>,
}

impl SiteTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut counts = FxHashMap::default();
        counts.reserve(n);
        SiteTable { counts }
    }

    #[inline]
    pub fn get(&self, key: u128) -> u32 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Adds one visit, returning the multiplicity before the visit.
    #[inline]
    pub fn insert(&mut self, key: u128) -> u32 {
        let e = self.counts.entry(key).or_insert(0);
        *e += 1;
        *e - 1
    }

    /// Removes one visit, returning the multiplicity left afterwards.
    #[inline]
    pub fn remove(&mut self, key: u128) -> u32 {
        match self.counts.get_mut(&key) {
            Some(e) if *e > 1 => {
                *e -= 1;
                *e
            }
            Some(_) => {
                self.counts.remove(&key);
                0
            }
            None => panic!("removing a site that was never visited"),
        }
    }

    pub fn clear(&mut self) {
        self.counts.clear();
    }

    pub fn distinct_sites(&self) -> usize {
        self.counts.len()
    }
}
