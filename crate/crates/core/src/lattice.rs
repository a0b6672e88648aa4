//! The momentum lattice 2πZ³ of the unit torus, grouped into shells of
//! constant |n|².
//!
//! Momenta are carried as integer vectors `n` with `p = 2πn`. Every energy
//! is evaluated from the integer norm `|n|²`, so shell identity and
//! degeneracy counting never depend on floating-point comparison.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, Neg, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::summation::NeumaierSum;

/// (2π)², the kinetic energy of the lowest nonzero momentum.
pub const TWO_PI_SQ: f64 = 4.0 * PI * PI;

/// Shells with `|n|²` up to this value keep their member list in memory.
pub const REPRESENTATIVE_NORM_CAP: u64 = 1000;

/// A point `n` of Z³, standing for the momentum `p = 2πn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector(pub [i32; 3]);

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector([0, 0, 0]);

    pub fn new(x: i32, y: i32, z: i32) -> Self {
        LatticeVector([x, y, z])
    }

    /// Exact integer `|n|²`.
    pub fn norm_sq(&self) -> u64 {
        self.0.iter().map(|&c| (c as i64 * c as i64) as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// p² = (2π)²|n|².
    pub fn momentum_sq(&self) -> f64 {
        TWO_PI_SQ * self.norm_sq() as f64
    }

    /// |p| = 2π|n|.
    pub fn momentum_abs(&self) -> f64 {
        2.0 * PI * (self.norm_sq() as f64).sqrt()
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> Self {
        LatticeVector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, o: Self) -> Self {
        LatticeVector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// All lattice vectors sharing one value of `|n|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub norm_sq_int: u64,
    pub degeneracy: u64,
    /// Member vectors, kept only for `norm_sq_int <= REPRESENTATIVE_NORM_CAP`.
    pub representatives: Option<Vec<LatticeVector>>,
}

impl Shell {
    pub fn momentum_sq(&self) -> f64 {
        TWO_PI_SQ * self.norm_sq_int as f64
    }

    pub fn momentum_abs(&self) -> f64 {
        2.0 * PI * (self.norm_sq_int as f64).sqrt()
    }

    /// Member vectors in lexicographic order, from the cache or enumerated.
    pub fn members(&self) -> Vec<LatticeVector> {
        match &self.representatives {
            Some(v) => v.clone(),
            None => vectors_with_norm(self.norm_sq_int),
        }
    }
}

fn isqrt(k: u64) -> u64 {
    let mut r = (k as f64).sqrt() as u64;
    while r * r > k {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    r
}

/// Every `n` with `|n|² = k`, lexicographically sorted.
pub fn vectors_with_norm(k: u64) -> Vec<LatticeVector> {
    let m = isqrt(k) as i64;
    let mut out = Vec::new();
    for x in -m..=m {
        let rx = k as i64 - x * x;
        let my = isqrt(rx as u64) as i64;
        for y in -my..=my {
            let rz = rx - y * y;
            let z = isqrt(rz as u64) as i64;
            if z * z == rz {
                if z == 0 {
                    out.push(LatticeVector::new(x as i32, y as i32, 0));
                } else {
                    out.push(LatticeVector::new(x as i32, y as i32, -z as i32));
                    out.push(LatticeVector::new(x as i32, y as i32, z as i32));
                }
            }
        }
    }
    out
}

/// Complete, immutable table of shells `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellTable {
    n_max: u64,
    shells: Vec<Shell>,
}

/// Builds the shell table for `1 <= |n|² <= n_max`.
///
/// Degeneracies are the three-square counts r₃(k), obtained by convolving
/// the two-square counts with the one-dimensional ones; shells of the form
/// 4ᵃ(8b+7) appear with degeneracy 0.
pub fn enumerate_shells(n_max: u64) -> Result<ShellTable> {
    if n_max < 1 {
        return invalid(format!("n_max must be >= 1, got {n_max}"));
    }
    if n_max > 100_000_000 {
        return Err(Error::Resource(format!("n_max {n_max} exceeds 1e8")));
    }
    let len = n_max as usize + 1;
    let root = isqrt(n_max) as i64;

    // r2[m] = #{(x, y) : x² + y² = m}
    let mut r2 = vec![0u64; len];
    for x in -root..=root {
        let rest = n_max as i64 - x * x;
        let my = isqrt(rest as u64) as i64;
        for y in -my..=my {
            r2[(x * x + y * y) as usize] += 1;
        }
    }

    let degeneracy: Vec<u64> = (1..len)
        .into_par_iter()
        .map(|k| {
            let mut total = r2[k];
            let mut z = 1usize;
            while z * z <= k {
                total += 2 * r2[k - z * z];
                z += 1;
            }
            total
        })
        .collect();

    let shells = degeneracy
        .into_par_iter()
        .enumerate()
        .map(|(i, d)| {
            let k = i as u64 + 1;
            let representatives = (k <= REPRESENTATIVE_NORM_CAP && d > 0).then(|| vectors_with_norm(k));
            Shell { norm_sq_int: k, degeneracy: d, representatives }
        })
        .collect();

    Ok(ShellTable { n_max, shells })
}

impl ShellTable {
    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// All shells in ascending norm order, including empty ones.
    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn shell(&self, norm_sq_int: u64) -> Option<&Shell> {
        if norm_sq_int == 0 || norm_sq_int > self.n_max {
            return None;
        }
        self.shells.get(norm_sq_int as usize - 1)
    }

    /// Shells with at least one lattice vector.
    pub fn occupied(&self) -> impl Iterator<Item = &Shell> {
        self.shells.iter().filter(|s| s.degeneracy > 0)
    }

    /// Number of nonzero lattice vectors with `|n|² <= n_max`.
    pub fn vector_count(&self) -> u64 {
        self.shells.iter().map(|s| s.degeneracy).sum()
    }

    /// Restriction to `|n|² <= n_max` (no recomputation).
    pub fn truncated(&self, n_max: u64) -> Result<ShellTable> {
        if n_max < 1 || n_max > self.n_max {
            return invalid(format!("cannot truncate table of depth {} to {n_max}", self.n_max));
        }
        Ok(ShellTable { n_max, shells: self.shells[..n_max as usize].to_vec() })
    }

    /// CSV with columns `norm_sq_int,degeneracy`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "norm_sq_int,degeneracy")?;
        for s in &self.shells {
            writeln!(w, "{},{}", s.norm_sq_int, s.degeneracy)?;
        }
        Ok(())
    }
}

/// Result of a shell-ordered lattice reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSum {
    pub value: f64,
    /// Running totals after each shell `1..=n_max`.
    pub partial_sums: Vec<f64>,
}

/// Σ over shells `|n|² <= n_max` of `degeneracy · summand(shell)`.
///
/// Summands are evaluated in parallel; accumulation is compensated and runs
/// in ascending-norm order, so the value does not depend on the thread count.
/// Empty shells are skipped without evaluating the summand.
pub fn lattice_sum<F>(summand: F, table: &ShellTable, n_max: u64) -> Result<LatticeSum>
where
    F: Fn(&Shell) -> f64 + Sync,
{
    if n_max < 1 || n_max > table.n_max {
        return invalid(format!("n_max {n_max} outside table depth 1..={}", table.n_max));
    }
    let shells = &table.shells[..n_max as usize];
    let values: Vec<f64> = shells.par_iter().map(|s| if s.degeneracy == 0 { 0.0 } else { summand(s) }).collect();

    let mut acc = NeumaierSum::new();
    let mut partial_sums = Vec::with_capacity(values.len());
    for (s, v) in shells.iter().zip(values) {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("non-finite summand {v} on shell |n|^2 = {}", s.norm_sq_int)));
        }
        if s.degeneracy > 0 {
            acc.add(s.degeneracy as f64 * v);
        }
        partial_sums.push(acc.value());
    }
    Ok(LatticeSum { value: acc.value(), partial_sums })
}

/// Upper bound on Σ_{n ∈ Z³, |n|² > n_max} |n|⁻⁴.
///
/// Each lattice point is dominated by the integral of (|y| − √3/2)⁻⁴ over its
/// unit cell, which lies outside the ball of radius √n_max − √3/2.
pub fn inverse_quartic_tail(n_max: u64) -> f64 {
    let c = 3f64.sqrt() / 2.0;
    let t0 = (n_max as f64).sqrt() - 2.0 * c;
    if t0 <= 0.0 {
        return f64::INFINITY;
    }
    4.0 * PI * (1.0 / t0 + c / (t0 * t0) + c * c / (3.0 * t0 * t0 * t0))
}
