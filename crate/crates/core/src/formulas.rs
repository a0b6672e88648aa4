//! Closed-form Bogoliubov quantities: dispersion laws, the two-mode
//! Bogoliubov rotation, the finite-box constant e_Λ, the order-one
//! correction sum and the assembled ground-state energy.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{inverse_quartic_tail, lattice_sum, Shell, ShellTable, TWO_PI_SQ};
use crate::potential::PotentialSpec;
use crate::summation::NeumaierSum;

/// Single-excitation energy law E(p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DispersionModel {
    /// E(p) = p².
    Free,
    /// E(p) = √(p⁴ + 16πa p²).
    GrossPitaevskii { a: f64 },
    /// E(p) = √(p⁴ + 2V̂(p) p²).
    MeanField { potential: PotentialSpec },
}

impl DispersionModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            DispersionModel::Free => Ok(()),
            DispersionModel::GrossPitaevskii { a } => {
                if a.is_finite() && *a >= 0.0 {
                    Ok(())
                } else {
                    invalid(format!("scattering length must be finite and >= 0, got {a}"))
                }
            }
            DispersionModel::MeanField { potential } => potential.validate(),
        }
    }

    /// E at integer norm |n|², with p² = (2π)²|n|².
    pub fn energy_for_norm(&self, norm_sq_int: u64) -> Result<f64> {
        if norm_sq_int == 0 {
            return invalid("dispersion is only defined on nonzero momenta");
        }
        let p2 = TWO_PI_SQ * norm_sq_int as f64;
        match self {
            DispersionModel::Free => Ok(p2),
            DispersionModel::GrossPitaevskii { a } => Ok((p2 * p2 + 16.0 * PI * a * p2).sqrt()),
            DispersionModel::MeanField { potential } => {
                let vh = potential.fourier_transform(p2.sqrt());
                let rad = p2 * p2 + 2.0 * vh * p2;
                if rad < 0.0 {
                    return Err(Error::Domain(format!("negative radicand {rad} at |n|^2 = {norm_sq_int} (V̂ = {vh})")));
                }
                Ok(rad.sqrt())
            }
        }
    }

    /// True when every energy is an integer multiple of (2π)², so sums of
    /// energies can be compared through integer norms.
    pub fn has_integer_spectrum(&self) -> bool {
        match self {
            DispersionModel::Free => true,
            DispersionModel::GrossPitaevskii { a } => *a == 0.0,
            DispersionModel::MeanField { potential } => potential.is_zero(),
        }
    }
}

/// E(p) on a shell.
pub fn dispersion(model: &DispersionModel, shell: &Shell) -> Result<f64> {
    model.energy_for_norm(shell.norm_sq_int)
}

/// Bogoliubov rotation of A(a†₊a₊ + a†₋a₋) + B(a†₊a†₋ + a₊a₋).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadDiagonalization {
    pub a: f64,
    pub b: f64,
    /// Rotation angle with tanh(2τ) = −B/A.
    pub tau: f64,
    /// Quasi-particle energy √(A² − B²).
    pub eps: f64,
    /// Ground-state shift ε − A of one (p, −p) pair.
    pub ground_shift: f64,
}

pub fn quad_diagonalize(a: f64, b: f64) -> Result<QuadDiagonalization> {
    if !(a.is_finite() && b.is_finite()) {
        return invalid("quadratic coefficients must be finite");
    }
    if a <= b.abs() {
        return Err(Error::Domain(format!("no Bogoliubov rotation for A = {a} <= |B| = {}", b.abs())));
    }
    let eps = ((a - b) * (a + b)).sqrt();
    Ok(QuadDiagonalization {
        a,
        b,
        tau: 0.5 * (-b / a).atanh(),
        eps,
        // ε − A = −B²/(A + ε) without cancellation
        ground_shift: -b * b / (a + eps),
    })
}

/// How a cube-sum limit is accelerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ELambdaScheme {
    /// Smooth-window average of consecutive cube partial sums.
    CubeCutoffAverage,
    /// Richardson extrapolation of Hann-window means at M and M/2.
    Richardson,
}

/// e_Λ with both acceleration schemes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ELambda {
    pub m_max: usize,
    pub scheme: ELambdaScheme,
    pub value: f64,
    /// Spread between the two schemes.
    pub error_estimate: f64,
    pub average: f64,
    pub average_error: f64,
    pub richardson: f64,
    pub richardson_error: f64,
}

/// Cube partial sums S_M = Σ_{0 ≠ n ∈ Z³, |n_i| <= M} cos(|n|)/|n|² for
/// M = 0..=m_max (S_0 = 0).
pub fn cube_partial_sums(m_max: usize) -> Vec<f64> {
    let kmax = 3 * m_max * m_max;
    let table: Vec<f64> =
        (0..=kmax).into_par_iter().map(|k| if k == 0 { 0.0 } else { (k as f64).sqrt().cos() / k as f64 }).collect();

    // contribution of the cube surface max|n_i| = M
    let increments: Vec<f64> = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let mi = m as i64;
            let mm = (mi * mi) as usize;
            let mut acc = NeumaierSum::new();
            for x in -mi..=mi {
                let xx = (x * x) as usize;
                for y in -mi..=mi {
                    let yy = (y * y) as usize;
                    // faces z = ±M
                    acc.add(2.0 * table[xx + yy + mm]);
                }
            }
            for x in -mi..=mi {
                let xx = (x * x) as usize;
                for z in -(mi - 1)..=(mi - 1) {
                    let zz = (z * z) as usize;
                    // faces y = ±M, |z| < M
                    acc.add(2.0 * table[xx + zz + mm]);
                }
            }
            for y in -(mi - 1)..=(mi - 1) {
                let yy = (y * y) as usize;
                for z in -(mi - 1)..=(mi - 1) {
                    let zz = (z * z) as usize;
                    // faces x = ±M, |y|, |z| < M
                    acc.add(2.0 * table[yy + zz + mm]);
                }
            }
            acc.value()
        })
        .collect();

    let mut out = Vec::with_capacity(m_max + 1);
    out.push(0.0);
    let mut acc = NeumaierSum::new();
    for inc in increments {
        acc.add(inc);
        out.push(acc.value());
    }
    out
}

#[derive(Clone, Copy)]
enum Window {
    Bump,
    Hann,
}

/// Weighted mean of S_m over m ∈ [⌈M/2⌉, M].
fn window_mean(partial: &[f64], m: usize, window: Window) -> f64 {
    let lo = m.div_ceil(2);
    let width = (m - lo) as f64;
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for j in lo..=m {
        let t = (j - lo) as f64 / width;
        let w = match window {
            Window::Bump => {
                if t <= 0.0 || t >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (t * (1.0 - t))).exp()
                }
            }
            Window::Hann => (PI * t).sin().powi(2),
        };
        num.add(w * partial[j]);
        den.add(w);
    }
    num.value() / den.value()
}

fn richardson_at(partial: &[f64], m: usize) -> f64 {
    (4.0 * window_mean(partial, m, Window::Hann) - window_mean(partial, m / 2, Window::Hann)) / 3.0
}

/// e_Λ = 2 − lim_M S_M, with the cube cutoffs of the definition.
///
/// Both schemes are always evaluated; their spread is the error estimate,
/// and a spread larger than ten times either scheme's own error estimate is
/// reported as non-convergence.
pub fn e_lambda(m_max: usize, scheme: ELambdaScheme) -> Result<ELambda> {
    if m_max < 20 {
        return invalid(format!("e_lambda needs m_max >= 20, got {m_max}"));
    }
    let partial = cube_partial_sums(m_max);
    e_lambda_from_partial_sums(&partial, m_max, scheme)
}

/// Same as [`e_lambda`] on precomputed partial sums (`partial[m] = S_m`).
pub fn e_lambda_from_partial_sums(partial: &[f64], m_max: usize, scheme: ELambdaScheme) -> Result<ELambda> {
    if m_max < 20 || partial.len() <= m_max {
        return invalid("partial sums must cover 0..=m_max with m_max >= 20");
    }
    let average = window_mean(partial, m_max, Window::Bump);
    let average_error = (average - window_mean(partial, 3 * m_max / 4, Window::Bump)).abs();
    let richardson = richardson_at(partial, m_max);
    let richardson_error = (richardson - richardson_at(partial, m_max / 2))
        .abs()
        .max((richardson - window_mean(partial, m_max, Window::Hann)).abs());
    let spread = (average - richardson).abs();
    if spread > 10.0 * average_error.max(richardson_error) {
        return Err(Error::Numeric(format!(
            "e_lambda schemes disagree: spread {spread:e} vs own estimates {average_error:e}, {richardson_error:e}"
        )));
    }
    let limit = match scheme {
        ELambdaScheme::CubeCutoffAverage => average,
        ELambdaScheme::Richardson => richardson,
    };
    Ok(ELambda {
        m_max,
        scheme,
        value: 2.0 - limit,
        error_estimate: spread,
        average: 2.0 - average,
        average_error,
        richardson: 2.0 - richardson,
        richardson_error,
    })
}

/// p² + 8πa − √(p⁴ + 16πa p²) − (8πa)²/(2p²) for one lattice vector,
/// rewritten without cancellation.
pub fn correction_summand(a: f64, norm_sq_int: u64) -> f64 {
    let x = 8.0 * PI * a;
    let p2 = TWO_PI_SQ * norm_sq_int as f64;
    let root = (p2 * p2 + 2.0 * x * p2).sqrt();
    -x * x * x * (1.0 + 2.0 * p2 / (p2 + root)) / (2.0 * p2 * (p2 + x + root))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSum {
    /// −½ Σ_p summand(p) over the table.
    pub value: f64,
    /// Bound on the omitted tail beyond the table depth.
    pub tail_bound: f64,
    #[serde(skip)]
    pub partial_sums: Vec<f64>,
}

/// −½ Σ_{p ∈ Λ*₊} [p² + 8πa − √(p⁴ + 16πa p²) − (8πa)²/(2p²)].
///
/// Every summand is negative with magnitude at most (8πa)³/(2p⁴), which gives
/// the tail bound; the partial sums increase with the cutoff.
pub fn correction_sum(a: f64, shells: &ShellTable) -> Result<CorrectionSum> {
    if !(a.is_finite() && a >= 0.0) {
        return invalid(format!("scattering length must be finite and >= 0, got {a}"));
    }
    let s = lattice_sum(|sh| -0.5 * correction_summand(a, sh.norm_sq_int), shells, shells.n_max())?;
    let x = 8.0 * PI * a;
    let tail_bound = 0.25 * x * x * x / (TWO_PI_SQ * TWO_PI_SQ) * inverse_quartic_tail(shells.n_max());
    Ok(CorrectionSum { value: s.value, tail_bound, partial_sums: s.partial_sums })
}

/// Terms of 4π(N−1)a + e_Λa² + correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub n: u64,
    pub a: f64,
    pub term_main: f64,
    pub term_boundary: f64,
    pub term_correction: f64,
    pub total: f64,
    pub tail_bound: f64,
}

pub fn ground_state_energy(n: u64, a: f64, e_lambda_value: f64, correction: &CorrectionSum) -> Result<EnergyBreakdown> {
    if n < 2 {
        return invalid(format!("N must be >= 2, got {n}"));
    }
    if !(a.is_finite() && a >= 0.0) {
        return invalid(format!("scattering length must be finite and >= 0, got {a}"));
    }
    let term_main = 4.0 * PI * (n - 1) as f64 * a;
    let term_boundary = e_lambda_value * a * a;
    let term_correction = correction.value;
    Ok(EnergyBreakdown {
        n,
        a,
        term_main,
        term_boundary,
        term_correction,
        total: term_main + term_boundary + term_correction,
        tail_bound: correction.tail_bound,
    })
}

/// Ground-state energy of the quadratic Hamiltonian obtained by replacing
/// the condensate operators by √N and dropping cubic and quartic terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticEnergy {
    pub n: u64,
    /// (N−1)V̂(0)/2.
    pub constant: f64,
    /// ½ Σ_p (ε_p − A_p) with A_p = p² + V̂(p/N), B_p = V̂(p/N).
    pub pair_sum: f64,
    pub total: f64,
    pub tail_bound: f64,
}

pub fn quadratic_bogoliubov_energy(potential: &PotentialSpec, n: u64, shells: &ShellTable) -> Result<QuadraticEnergy> {
    potential.validate()?;
    if n < 2 {
        return invalid(format!("N must be >= 2, got {n}"));
    }
    let nf = n as f64;
    let coeffs: Vec<(u64, f64)> =
        shells.occupied().map(|s| (s.norm_sq_int, potential.fourier_transform(s.momentum_abs() / nf))).collect();
    for &(k, vh) in &coeffs {
        quad_diagonalize(TWO_PI_SQ * k as f64 + vh, vh)?;
    }
    let s = lattice_sum(
        |sh| {
            let vh = potential.fourier_transform(sh.momentum_abs() / nf);
            // validated above
            0.5 * quad_diagonalize(sh.momentum_sq() + vh, vh).map(|q| q.ground_shift).unwrap_or(f64::NAN)
        },
        shells,
        shells.n_max(),
    )?;
    let constant = 0.5 * (nf - 1.0) * potential.fourier_transform(0.0);
    let c = potential.fourier_decay_constant() * nf;
    Ok(QuadraticEnergy {
        n,
        constant,
        pair_sum: s.value,
        total: constant + s.value,
        tail_bound: 0.5 * c * c / (TWO_PI_SQ * TWO_PI_SQ) * inverse_quartic_tail(shells.n_max()),
    })
}
