//! Zero-energy scattering for radial potentials.
//!
//! The radial equation −u'' + ½V u = 0 for u = r·f is integrated from the
//! origin with u(0) = 0, u'(0) = 1 and rescaled so that u(r) = r − a outside
//! the support. The scattering length is read off twice: from the integral
//! 8πa = ∫V f (integrated alongside the solution) and from a straight-line
//! fit to the exterior solution.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{invalid, numeric, Error, Result};
use crate::lattice::{inverse_quartic_tail, lattice_sum, ShellTable, TWO_PI_SQ};
use crate::potential::PotentialSpec;
use crate::quadrature;

/// Radial solution of the zero-energy scattering equation.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    /// Radial nodes 0 = r₀ < … < r_K = r_max.
    pub grid: Vec<f64>,
    /// u(r) = r·f(r), normalized to r − a outside the support.
    pub u: Vec<f64>,
    /// u'(r) at the nodes.
    pub du: Vec<f64>,
    /// Scattering length from 8πa = ∫ V f.
    pub a_integral: f64,
    /// Scattering length from the exterior fit u ≈ c(r − a).
    pub a_asymptotic: f64,
    /// Largest accepted local error estimate of the integrator.
    pub residual: f64,
    support: f64,
    // u'' at the left and right end of each interval [grid[i], grid[i+1]]
    ddu_start: Vec<f64>,
    ddu_end: Vec<f64>,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

const MAX_STEPS: usize = 2_000_000;
const RESCALE_ABOVE: f64 = 1e150;

type State = [f64; 3];

/// State (u, u', I) with I' = ½ r V u.
fn rhs(r: f64, y: &State, v: f64) -> State {
    let half_vu = 0.5 * v * y[0];
    [y[1], half_vu, r * half_vu]
}

struct Trace {
    grid: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    dd_start: Vec<f64>,
    dd_end: Vec<f64>,
    max_err: f64,
}

impl Trace {
    fn scale(&mut self, s: f64) {
        for x in self.u.iter_mut().chain(&mut self.du).chain(&mut self.dd_start).chain(&mut self.dd_end) {
            *x *= s;
        }
    }
}

/// Integrates one smooth segment [a, b] starting from `y`.
fn integrate_segment<V: Fn(f64) -> f64>(
    v: V,
    a: f64,
    b: f64,
    y: &mut State,
    tol: f64,
    trace: &mut Trace,
) -> Result<()> {
    let len = b - a;
    let h_max = len / 32.0;
    let mut h = h_max.min(0.01 * len.max(1e-3));
    let mut r = a;
    let mut steps = 0usize;
    let mut k = [[0.0; 3]; 7];
    k[0] = rhs(r, y, v(r));
    while r < b {
        steps += 1;
        if steps > MAX_STEPS {
            return numeric(format!("scattering integrator exceeded {MAX_STEPS} steps near r = {r}"));
        }
        if h < 1e-14 * (1.0 + r.abs()) {
            return numeric(format!("scattering integrator step underflow at r = {r}"));
        }
        let last = r + h >= b;
        if last {
            h = b - r;
        }
        for s in 1..7 {
            let mut ys = *y;
            for j in 0..s {
                for c in 0..3 {
                    ys[c] += h * A[s][j] * k[j][c];
                }
            }
            let rs = r + C[s] * h;
            k[s] = rhs(rs, &ys, v(rs.min(b)));
        }
        let mut y5 = *y;
        let mut err = 0.0f64;
        for c in 0..3 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][c];
                d4 += B4[s] * k[s][c];
            }
            y5[c] += h * d5;
            // quadrature component follows the controlled solution
            if c < 2 {
                let sc = tol * (1.0 + y[c].abs().max(y5[c].abs()));
                err = err.max((h * (d5 - d4)).abs() / sc);
            }
        }
        if err <= 1.0 {
            let r_new = if last { b } else { r + h };
            trace.dd_start.push(k[0][1]);
            trace.dd_end.push(k[6][1]);
            trace.grid.push(r_new);
            trace.u.push(y5[0]);
            trace.du.push(y5[1]);
            trace.max_err = trace.max_err.max(err * tol);
            *y = y5;
            r = r_new;
            k[0] = k[6];
            if y[0].abs() > RESCALE_ABOVE {
                let s = 1.0 / RESCALE_ABOVE;
                for c in y.iter_mut() {
                    *c *= s;
                }
                for c in k[0].iter_mut() {
                    *c *= s;
                }
                trace.scale(s);
            }
            if last {
                break;
            }
        } else if !err.is_finite() {
            return numeric(format!("non-finite scattering solution near r = {r}"));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(h_max);
    }
    Ok(())
}

/// Solves −u'' + ½V u = 0 on [0, r_max].
///
/// `tol` bounds the integrator's local error relative to 1 + |u|.
pub fn solve_zero_energy(potential: &PotentialSpec, r_max: f64, tol: f64) -> Result<ScatteringSolution> {
    potential.validate()?;
    let support = potential.support_radius();
    if !(r_max > support) {
        return invalid(format!("r_max = {r_max} must exceed the support radius {support}"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }

    let mut trace =
        Trace { grid: vec![0.0], u: vec![0.0], du: vec![1.0], dd_start: Vec::new(), dd_end: Vec::new(), max_err: 0.0 };
    let mut y: State = [0.0, 1.0, 0.0];
    for seg in potential.breakpoints().windows(2) {
        integrate_segment(|r| potential.value(r), seg[0], seg[1], &mut y, tol, &mut trace)?;
    }
    let slope = y[1];
    if !(slope > 0.0 && slope.is_finite()) {
        return numeric(format!("degenerate interior solution, u'(R) = {slope}"));
    }
    let norm = 1.0 / slope;
    trace.scale(norm);
    let interior_nodes = trace.grid.len();
    let a_integral = y[2] * norm;
    let mut y_ext: State = [y[0] * norm, 1.0, a_integral];
    integrate_segment(|_| 0.0, support, r_max, &mut y_ext, tol, &mut trace)?;

    // least-squares line through the exterior nodes
    let ext = interior_nodes - 1..trace.grid.len();
    let n = ext.len() as f64;
    let r_mean = trace.grid[ext.clone()].iter().sum::<f64>() / n;
    let u_mean = trace.u[ext.clone()].iter().sum::<f64>() / n;
    let (mut srr, mut sru) = (0.0, 0.0);
    for i in ext {
        let (dr, du) = (trace.grid[i] - r_mean, trace.u[i] - u_mean);
        srr += dr * dr;
        sru += dr * du;
    }
    let fit_slope = sru / srr;
    let intercept = u_mean - fit_slope * r_mean;
    let a_asymptotic = -intercept / fit_slope;
    if !(a_integral.is_finite() && a_asymptotic.is_finite()) {
        return numeric("scattering length is not finite");
    }

    Ok(ScatteringSolution {
        grid: trace.grid,
        u: trace.u,
        du: trace.du,
        a_integral,
        a_asymptotic,
        residual: trace.max_err,
        support,
        ddu_start: trace.dd_start,
        ddu_end: trace.dd_end,
    })
}

fn hermite5(h: f64, y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * t3 - t4 + 0.5 * t5;
    y0 * h0 + h * d0 * h1 + h * h * s0 * h2 + y1 * h3 + h * d1 * h4 + h * h * s1 * h5
}

impl ScatteringSolution {
    pub fn support_radius(&self) -> f64 {
        self.support
    }

    /// f = u/r at the nodes, with f(0) = u'(0).
    pub fn f(&self) -> Vec<f64> {
        self.grid.iter().zip(&self.u).zip(&self.du).map(|((&r, &u), &du)| if r == 0.0 { du } else { u / r }).collect()
    }

    /// Intercept a = R − u(R) of the normalized exterior line.
    pub fn matching_length(&self) -> f64 {
        let i = self.grid.partition_point(|&r| r < self.support);
        self.support - self.u[i]
    }

    /// Quintic Hermite interpolation of u; exact line beyond the grid.
    pub fn u_at(&self, r: f64) -> f64 {
        let last = *self.grid.last().unwrap();
        if r >= last {
            return r - self.matching_length();
        }
        let i = self.grid.partition_point(|&x| x <= r).saturating_sub(1).min(self.grid.len() - 2);
        self.interp(i, r)
    }

    fn interp(&self, i: usize, r: f64) -> f64 {
        let (r0, r1) = (self.grid[i], self.grid[i + 1]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        hermite5(h, self.u[i], self.du[i], self.ddu_start[i], self.u[i + 1], self.du[i + 1], self.ddu_end[i], t)
    }

    /// ∫₀^R (r − u(r)) sin(kr) dr over the interior grid.
    fn interior_sine_moment(&self, k: f64) -> f64 {
        let mut acc = crate::summation::NeumaierSum::new();
        for i in 0..self.grid.len() - 1 {
            let (r0, r1) = (self.grid[i], self.grid[i + 1]);
            if r0 >= self.support {
                break;
            }
            let panels = ((r1 - r0) * k / 2.0).ceil().max(1.0) as usize;
            for (r, w) in quadrature::panel_nodes(r0, r1, panels) {
                acc.add(w * (r - self.interp(i, r)) * (k * r).sin());
            }
        }
        acc.value()
    }

    /// Fourier transform of w = 1 − f at |k| > 0, with the a/r tail
    /// continued by its Abel limit a·cos(kR)/k.
    pub fn correlation_transform(&self, k: f64) -> f64 {
        let a = self.matching_length();
        4.0 * PI / k * (self.interior_sine_moment(k) + a * (k * self.support).cos() / k)
    }

    /// CSV with columns `r,u,f`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "r,u,f")?;
        for ((r, u), f) in self.grid.iter().zip(&self.u).zip(self.f()) {
            writeln!(w, "{r:.17e},{u:.17e},{f:.17e}")?;
        }
        Ok(())
    }
}

/// First two Born approximations of the scattering length.
#[derive(Debug, Clone, PartialEq)]
pub struct BornTerms {
    /// V̂(0)/8π.
    pub a0: f64,
    /// −(16πN)⁻¹ Σ_{p ∈ 2πZ³∖0} V̂(p/N)²/p², truncated at the table depth.
    pub a1: f64,
    /// Rigorous bound on the omitted tail of `a1`.
    pub a1_tail_bound: f64,
    /// False when the tail bound exceeds the requested tolerance.
    pub tail_converged: bool,
    /// The continuum second Born coefficient, i.e. the N → ∞ limit of `a1`.
    pub a1_continuum: f64,
    /// Scaling N used in `a1` (1 = unscaled lattice sum).
    pub scale: u64,
}

/// Born terms with lattice sum over the whole table.
///
/// `scale` = 1 evaluates the torus sum with the unscaled transform V̂(p);
/// larger values use V̂(p/N) with the 1/N prefactor of the Gross–Pitaevskii
/// scaling, which converges to `a1_continuum`.
pub fn born_terms(
    potential: &PotentialSpec,
    shells: &ShellTable,
    scale: u64,
    tail_tolerance: f64,
) -> Result<BornTerms> {
    potential.validate()?;
    if scale < 1 {
        return invalid("Born scaling N must be >= 1");
    }
    let n = scale as f64;
    let a0 = potential.fourier_transform(0.0) / (8.0 * PI);
    let sum = lattice_sum(
        |s| {
            let vh = potential.fourier_transform(s.momentum_abs() / n);
            vh * vh / s.momentum_sq()
        },
        shells,
        shells.n_max(),
    )?;
    let a1 = -sum.value / (16.0 * PI * n);
    let c = potential.fourier_decay_constant();
    let a1_tail_bound = c * c * n / (16.0 * PI * TWO_PI_SQ * TWO_PI_SQ) * inverse_quartic_tail(shells.n_max());
    Ok(BornTerms {
        a0,
        a1,
        a1_tail_bound,
        tail_converged: a1_tail_bound <= tail_tolerance,
        a1_continuum: born_continuum_a1(potential),
        scale,
    })
}

/// −(16π)⁻¹(2π)⁻³∫V̂(p)²/p² d³p, evaluated in position space as
/// −½∫₀^R r V(r) Q(r) dr with Q(r) = ∫₀^r s²V(s) ds.
pub fn born_continuum_a1(potential: &PotentialSpec) -> f64 {
    let b = potential.breakpoints();
    let mut acc = crate::summation::NeumaierSum::new();
    let mut q_start = 0.0;
    for w in b.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for (r, wt) in quadrature::panel_nodes(lo, hi, 2) {
            let q = q_start + quadrature::integrate(|s| s * s * potential.value(s), lo, r, 1);
            acc.add(wt * r * potential.value(r) * q);
        }
        q_start += quadrature::integrate(|s| s * s * potential.value(s), lo, hi, 2);
    }
    -0.5 * acc.value()
}

/// Correlation coefficients η_p of the generalized Bogoliubov transform.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub n: u64,
    /// η per shell norm |n|².
    pub values: BTreeMap<u64, f64>,
    /// max |η_p|·p² over the table.
    pub decay_constant: f64,
}

impl EtaTable {
    pub fn get(&self, norm_sq_int: u64) -> Option<f64> {
        self.values.get(&norm_sq_int).copied()
    }
}

/// Residual above which a solution is not trusted for η.
pub const ETA_RESIDUAL_LIMIT: f64 = 1e-6;

/// η_p = −N·ŵ(p) with w(x) = 1 − f(Nx) on the torus, i.e.
/// η_p = −N⁻² ŵ₁(|p|/N) where ŵ₁ is the continuum transform of 1 − f.
pub fn eta_coefficients(solution: &ScatteringSolution, n: u64, shells: &ShellTable) -> Result<EtaTable> {
    if n < 1 {
        return invalid("particle number must be >= 1");
    }
    if !(solution.residual <= ETA_RESIDUAL_LIMIT) {
        return Err(Error::InvalidArgument(format!(
            "scattering residual {} exceeds {ETA_RESIDUAL_LIMIT}",
            solution.residual
        )));
    }
    let nf = n as f64;
    let entries: Vec<(u64, f64, f64)> = shells
        .occupied()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|s| {
            let eta = -solution.correlation_transform(s.momentum_abs() / nf) / (nf * nf);
            (s.norm_sq_int, eta, eta.abs() * s.momentum_sq())
        })
        .collect();
    let mut values = BTreeMap::new();
    let mut decay_constant = 0.0f64;
    for (k, eta, scaled) in entries {
        if !eta.is_finite() {
            return numeric(format!("non-finite eta on shell {k}"));
        }
        values.insert(k, eta);
        decay_constant = decay_constant.max(scaled);
    }
    Ok(EtaTable { n, values, decay_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_shells;

    fn well() -> PotentialSpec {
        PotentialSpec::square_well(2.0, 1.0).unwrap()
    }

    #[test]
    fn free_equation() {
        let s = solve_zero_energy(&PotentialSpec::zero(), 3.0, 1e-10).unwrap();
        assert_eq!(s.a_integral, 0.0);
        assert!(s.a_asymptotic.abs() < 1e-14);
        assert!(s.f().iter().all(|f| (f - 1.0).abs() < 1e-14));
    }

    #[test]
    fn square_well_closed_form() {
        let exact = 1.0 - 1f64.tanh();
        let s = solve_zero_energy(&well(), 4.0, 1e-12).unwrap();
        assert!(((s.a_integral - exact) / exact).abs() < 1e-10);
        assert!(((s.a_asymptotic - exact) / exact).abs() < 1e-10);
        // interior profile u = sinh(r)/cosh(1)
        for r in [0.1, 0.37, 0.8, 1.0] {
            assert!((s.u_at(r) - r.sinh() / 1f64.cosh()).abs() < 1e-11, "r={r}");
        }
        assert!((s.u_at(2.5) - (2.5 - exact)).abs() < 1e-11);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn profile_between_zero_and_one() {
        let s = solve_zero_energy(&PotentialSpec::square_well(50.0, 0.7).unwrap(), 3.0, 1e-10).unwrap();
        assert!(s.f().iter().all(|&f| (0.0..=1.0 + 1e-12).contains(&f)));
    }

    #[test]
    fn hard_core_limit() {
        let mut prev = 0.0;
        for depth in [10.0, 1e3, 1e5, 1e7] {
            let s = solve_zero_energy(&PotentialSpec::square_well(depth, 1.0).unwrap(), 2.0, 1e-10).unwrap();
            let k = (depth / 2.0f64).sqrt();
            let exact = 1.0 - k.tanh() / k;
            assert!((s.a_integral - exact).abs() < 1e-8 * exact, "depth {depth}");
            assert!(s.a_integral > prev && s.a_integral < 1.0);
            prev = s.a_integral;
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(solve_zero_energy(&well(), 1.0, 1e-8), Err(Error::InvalidArgument(_))));
        assert!(matches!(solve_zero_energy(&well(), 2.0, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tabulated_linear_ramp_against_quadrature_identity() {
        let v = PotentialSpec::tabulated(vec![0.0, 0.5, 1.0, 1.5], vec![4.0, 3.0, 1.0, 0.0], 1.0).unwrap();
        let s = solve_zero_energy(&v, 3.0, 1e-12).unwrap();
        assert!((s.a_integral - s.a_asymptotic).abs() < 1e-10);
        assert!(s.a_integral > 0.0 && s.a_integral < v.fourier_transform(0.0) / (8.0 * PI));
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + 0.3 * x.powi(5);
        let dp = |x: f64| -2.0 + 1.5 * x * x + 1.5 * x.powi(4);
        let ddp = |x: f64| 3.0 * x + 6.0 * x.powi(3);
        let (a, b) = (0.3, 1.1);
        for t in [0.0, 0.25, 0.6, 1.0] {
            let x = a + t * (b - a);
            let v = hermite5(b - a, p(a), dp(a), ddp(a), p(b), dp(b), ddp(b), t);
            assert!((v - p(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn born_terms_zero_potential() {
        let t = enumerate_shells(50).unwrap();
        let b = born_terms(&PotentialSpec::zero(), &t, 1, 1e-6).unwrap();
        assert_eq!((b.a0, b.a1, b.a1_continuum), (0.0, 0.0, 0.0));
    }

    #[test]
    fn born_terms_square_well() {
        let t = enumerate_shells(40_000).unwrap();
        let b = born_terms(&well(), &t, 1, 1e-3).unwrap();
        assert!((b.a0 - 1.0 / 3.0).abs() < 1e-14);
        // frozen from an independent numpy lattice sum with Richardson in the cutoff
        assert!((b.a1 - (-0.001543983086144385)).abs() < 1e-15, "{}", b.a1);
        assert!((b.a1 - (-0.001543983139716667)).abs() <= b.a1_tail_bound);
        assert!(b.a1 < 0.0 && b.tail_converged);
        assert!((b.a1_continuum + 2.0 / 15.0).abs() < 1e-14);
        // the true scattering length sits below the first Born term
        assert!(1.0 - 1f64.tanh() < b.a0);
    }

    #[test]
    fn born_tail_bound_is_honest() {
        let deep = enumerate_shells(20_000).unwrap();
        let full = born_terms(&well(), &deep, 1, 1.0).unwrap();
        for cut in [100u64, 1000, 5000] {
            let part = born_terms(&well(), &deep.truncated(cut).unwrap(), 1, 1.0).unwrap();
            assert!((full.a1 - part.a1).abs() <= part.a1_tail_bound, "cut {cut}");
        }
        let shallow = born_terms(&well(), &deep.truncated(4).unwrap(), 1, 1e-9).unwrap();
        assert!(!shallow.tail_converged);
    }

    #[test]
    fn scaled_born_term_approaches_continuum() {
        let t = enumerate_shells(20_000).unwrap();
        let gaps: Vec<f64> =
            [1u64, 2, 4].iter().map(|&n| (born_terms(&well(), &t, n, 1.0).unwrap().a1 - (-2.0 / 15.0)).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn eta_examples() {
        let t = enumerate_shells(3).unwrap();
        let zero = solve_zero_energy(&PotentialSpec::zero(), 3.0, 1e-10).unwrap();
        let e0 = eta_coefficients(&zero, 10, &t).unwrap();
        assert!(e0.values.values().all(|&v| v.abs() < 1e-14));

        let s = solve_zero_energy(&well(), 4.0, 1e-12).unwrap();
        let e = eta_coefficients(&s, 10, &t).unwrap();
        // frozen from mpmath quadrature of the closed-form profile
        let oracle = [(1u64, -0.07287952039178325), (2, -0.03497854534954840), (3, -0.02237259383157066)];
        for (k, want) in oracle {
            let got = e.get(k).unwrap();
            assert!(((got - want) / want).abs() < 1e-8, "shell {k}: {got} vs {want}");
        }
        let e1 = eta_coefficients(&s, 1, &t).unwrap();
        assert!((e1.get(1).unwrap() - 0.005988943329504640).abs() < 1e-10);
        assert!((e1.get(2).unwrap() - -0.001416004929589559).abs() < 1e-10);
    }

    #[test]
    fn eta_decay_constant_stabilizes() {
        let s = solve_zero_energy(&well(), 4.0, 1e-12).unwrap();
        let small = eta_coefficients(&s, 10, &enumerate_shells(100).unwrap()).unwrap();
        let large = eta_coefficients(&s, 10, &enumerate_shells(1000).unwrap()).unwrap();
        assert!(large.decay_constant < 4.0 * PI * 0.25);
        assert!((large.decay_constant - small.decay_constant).abs() < 1e-12);
        assert!(small.values.values().take(5).all(|&v| v < 0.0));
    }
}
