//! The five commands and their reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use bose_core::fock::{
    self, ConjugationMethod, FockBasis, GeneratorKind, GeneratorSpec, ModeSet, OperatorMatrix, Sector,
};
use bose_core::formulas::{self, DispersionModel};
use bose_core::lattice::{enumerate_shells, TWO_PI_SQ};
use bose_core::scattering::{self, ScatteringSolution};
use bose_core::spectrum::{self, SpectrumRequest};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Boundary, ConjugationChoice, DispersionVariant, RunConfig, Substitution};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scattering,
    Constants,
    Energy,
    Spectrum,
    Simulate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scattering => "scattering",
            Command::Constants => "constants",
            Command::Energy => "energy",
            Command::Spectrum => "spectrum",
            Command::Simulate => "simulate",
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Output {
    /// JSON report without the wall-time field.
    pub report: Value,
    /// Table emitted with `--csv`.
    pub csv: String,
    /// Side files (plot data, operator exports) relative to their directories.
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    /// Pretty JSON with `wall_time_seconds` appended last.
    pub fn json_with_time(&self, seconds: f64) -> String {
        let mut text = serde_json::to_string_pretty(&self.report).expect("report serializes");
        // keep the timing on its own final line so reports can be compared without it
        text.truncate(text.len() - 2);
        let _ = write!(text, ",\n  \"wall_time_seconds\": {seconds}\n}}\n");
        text
    }
}

struct Results {
    map: Map<String, Value>,
    csv: String,
}

impl Results {
    fn new() -> Self {
        Results { map: Map::new(), csv: "quantity,value,error_estimate,formula\n".into() }
    }

    fn quantity(&mut self, name: &str, value: f64, error: Option<f64>, formula: &str) {
        self.map.insert(name.into(), json!({ "value": value, "error_estimate": error, "formula": formula }));
        let err = error.map_or(String::new(), |e| format!("{e:.17e}"));
        let _ = writeln!(self.csv, "{name},{value:.17e},{err},\"{formula}\"");
    }

    fn extra<T: Serialize>(&mut self, name: &str, value: T) {
        self.map.insert(name.into(), serde_json::to_value(value).expect("serializable"));
    }
}

const F_A_INTEGRAL: &str = "8πa = ∫ V f d³x, f the zero-energy scattering solution";
const F_A_ASYMPTOTIC: &str = "u(r) = r·f(r) = r − a outside the support of V";
const F_A0: &str = "first Born term a⁽⁰⁾ = V̂(0)/8π";
const F_A1: &str = "second Born term a⁽¹⁾ = −(16π)⁻¹ Σ_{p ∈ 2πZ³∖0} V̂(p)²/p²";
const F_A1_CONT: &str = "continuum second Born term −(16π)⁻¹(2π)⁻³ ∫ V̂(p)²/p² d³p";
const F_A1_N: &str = "Gross–Pitaevskii scaled second Born term −(16πN)⁻¹ Σ_{p ∈ 2πZ³∖0} V̂(p/N)²/p²";
const F_E_LAMBDA: &str = "e_Λ = 2 − lim_M Σ_{0 ≠ n ∈ Z³, |n_i| ≤ M} cos|n|/|n|²";
const F_MAIN: &str = "4π(N−1)a";
const F_BOUNDARY: &str = "e_Λ a²";
const F_CORRECTION: &str = "−½ Σ_{p ∈ Λ*₊} [p² + 8πa − √(p⁴ + 16πa p²) − (8πa)²/(2p²)]";
const F_TOTAL: &str = "E_N = 4π(N−1)a + e_Λa² − ½ Σ_p [p² + 8πa − √(p⁴ + 16πa p²) − (8πa)²/(2p²)]";
const F_QUAD_CONST: &str = "(N−1)V̂(0)/2";
const F_QUAD_PAIRS: &str = "½ Σ_{p ∈ Λ*₊} [√(p⁴ + 2p²V̂(p/N)) − p² − V̂(p/N)]";
const F_QUAD_TOTAL: &str = "quadratic Bogoliubov energy (N−1)V̂(0)/2 + ½ Σ_p [√(p⁴ + 2p²V̂(p/N)) − p² − V̂(p/N)]";

pub fn run(command: Command, cfg: &RunConfig, seed: u64) -> Result<Output, CliError> {
    cfg.validate()?;
    let mut files = Vec::new();
    let (results, csv_override) = match command {
        Command::Scattering => (scattering_cmd(cfg, &mut files)?, None),
        Command::Constants => (constants_cmd(cfg, &mut files)?, None),
        Command::Energy => (energy_cmd(cfg)?, None),
        Command::Spectrum => {
            let (r, csv) = spectrum_cmd(cfg, &mut files)?;
            (r, Some(csv))
        }
        Command::Simulate => (simulate_cmd(cfg, seed, &mut files)?, None),
    };
    let report = json!({
        "tool": { "name": "boselab", "version": env!("CARGO_PKG_VERSION") },
        "command": command.name(),
        "seed": seed,
        "inputs": serde_json::to_value(cfg).expect("config serializes"),
        "results": Value::Object(results.map),
    });
    Ok(Output { report, csv: csv_override.unwrap_or(results.csv), files })
}

fn solve(cfg: &RunConfig) -> Result<ScatteringSolution, CliError> {
    let r_max = cfg.scattering.r_max.unwrap_or(4.0 * cfg.potential.support_radius());
    Ok(scattering::solve_zero_energy(&cfg.potential, r_max, cfg.scattering.tolerance)?)
}

fn scattering_cmd(cfg: &RunConfig, files: &mut Vec<(PathBuf, String)>) -> Result<Results, CliError> {
    let sol = solve(cfg)?;
    let table = enumerate_shells(cfg.lattice.born_n_max)?;
    let born = scattering::born_terms(&cfg.potential, &table, 1, cfg.lattice.tail_tolerance)?;
    let spread = (sol.a_integral - sol.a_asymptotic).abs();
    let mut r = Results::new();
    r.quantity("a_integral", sol.a_integral, Some(spread.max(sol.residual)), F_A_INTEGRAL);
    r.quantity("a_asymptotic", sol.a_asymptotic, Some(spread.max(sol.residual)), F_A_ASYMPTOTIC);
    r.quantity("a0", born.a0, None, F_A0);
    r.quantity("a1", born.a1, Some(born.a1_tail_bound), F_A1);
    r.quantity("a1_continuum", born.a1_continuum, None, F_A1_CONT);
    r.extra("a1_tail_converged", born.tail_converged);
    r.extra("integrator_residual", sol.residual);
    r.extra("grid_points", sol.grid.len());
    let mut data = Vec::new();
    sol.write_csv(&mut data)?;
    files.push(("scattering.csv".into(), String::from_utf8(data).expect("utf-8")));
    Ok(r)
}

fn constants_cmd(cfg: &RunConfig, files: &mut Vec<(PathBuf, String)>) -> Result<Results, CliError> {
    let m = cfg.constants.m_max;
    let partial = formulas::cube_partial_sums(m);
    let e = formulas::e_lambda_from_partial_sums(&partial, m, cfg.constants.scheme)?;
    let mut r = Results::new();
    r.quantity("e_lambda", e.value, Some(e.error_estimate), F_E_LAMBDA);
    r.quantity("e_lambda_cube_cutoff_average", e.average, Some(e.average_error), F_E_LAMBDA);
    r.quantity("e_lambda_richardson", e.richardson, Some(e.richardson_error), F_E_LAMBDA);
    r.extra("scheme", e.scheme);
    r.extra("m_max", m);
    let mut data = String::from("m,partial_sum\n");
    for (i, s) in partial.iter().enumerate().skip(1) {
        let _ = writeln!(data, "{i},{s:.17e}");
    }
    files.push(("cube_sums.csv".into(), data));
    Ok(r)
}

/// The scattering-length surrogate selected by the substitution toggle,
/// with its error estimate and a label.
fn effective_a(cfg: &RunConfig) -> Result<(f64, f64, &'static str), CliError> {
    match cfg.substitution {
        Substitution::ScatteringLength => {
            let sol = solve(cfg)?;
            Ok((sol.a_integral, (sol.a_integral - sol.a_asymptotic).abs().max(sol.residual), F_A_INTEGRAL))
        }
        Substitution::Born => {
            let table = enumerate_shells(cfg.lattice.born_n_max)?;
            let b = scattering::born_terms(&cfg.potential, &table, cfg.n, cfg.lattice.tail_tolerance)?;
            Ok((b.a0 + b.a1, b.a1_tail_bound, "a⁽⁰⁾ + a⁽¹⁾ with the Gross–Pitaevskii scaled second Born term"))
        }
        Substitution::Fourier => Err(CliError::Validation("the fourier substitution has no scattering length".into())),
    }
}

fn energy_cmd(cfg: &RunConfig) -> Result<Results, CliError> {
    if cfg.n < 2 {
        return Err(CliError::Validation("energy needs n >= 2".into()));
    }
    let table = enumerate_shells(cfg.lattice.correction_n_max)?;
    let mut r = Results::new();
    r.extra("substitution", cfg.substitution);
    if cfg.substitution == Substitution::Fourier {
        let q = formulas::quadratic_bogoliubov_energy(&cfg.potential, cfg.n, &table)?;
        r.quantity("constant", q.constant, None, F_QUAD_CONST);
        r.quantity("pair_sum", q.pair_sum, Some(q.tail_bound), F_QUAD_PAIRS);
        r.quantity("total", q.total, Some(q.tail_bound), F_QUAD_TOTAL);
        return Ok(r);
    }
    let (a, a_err, a_label) = effective_a(cfg)?;
    let e = formulas::e_lambda(cfg.constants.m_max, cfg.constants.scheme)?;
    let corr = formulas::correction_sum(a, &table)?;
    let b = formulas::ground_state_energy(cfg.n, a, e.value, &corr)?;
    r.quantity("a", a, Some(a_err), a_label);
    if cfg.substitution == Substitution::Born {
        let born = scattering::born_terms(&cfg.potential, &table.truncated(1)?, cfg.n, cfg.lattice.tail_tolerance)?;
        r.quantity("a0", born.a0, None, F_A0);
        r.extra("a1_formula", F_A1_N);
    }
    r.quantity("e_lambda", e.value, Some(e.error_estimate), F_E_LAMBDA);
    r.quantity("term_main", b.term_main, Some(4.0 * std::f64::consts::PI * (cfg.n - 1) as f64 * a_err), F_MAIN);
    r.quantity("term_boundary", b.term_boundary, Some(e.error_estimate * a * a), F_BOUNDARY);
    r.quantity("term_correction", b.term_correction, Some(b.tail_bound), F_CORRECTION);
    r.quantity("total", b.total, Some(b.tail_bound + e.error_estimate * a * a), F_TOTAL);
    Ok(r)
}

fn spectrum_model(cfg: &RunConfig) -> Result<(DispersionModel, String), CliError> {
    Ok(match cfg.spectrum.dispersion {
        DispersionVariant::Free => (DispersionModel::Free, "E(p) = p²".into()),
        DispersionVariant::MeanField => {
            (DispersionModel::MeanField { potential: cfg.potential.clone() }, "E(p) = √(p⁴ + 2V̂(p)p²)".into())
        }
        DispersionVariant::GrossPitaevskii => {
            let (a, _, label) = effective_a(cfg)?;
            (DispersionModel::GrossPitaevskii { a }, format!("E(p) = √(p⁴ + 16πa p²), a from {label}"))
        }
    })
}

/// Smallest shell depth that covers every single-quantum energy <= ζ.
fn covering_depth(model: &DispersionModel, zeta: f64) -> u64 {
    let p2 = match model {
        DispersionModel::MeanField { potential } => {
            let v0 = potential.fourier_transform(0.0).abs();
            v0 + (v0 * v0 + zeta * zeta).sqrt()
        }
        _ => zeta,
    };
    (p2 / TWO_PI_SQ).floor() as u64 + 1
}

fn spectrum_cmd(cfg: &RunConfig, files: &mut Vec<(PathBuf, String)>) -> Result<(Results, String), CliError> {
    let (model, label) = spectrum_model(cfg)?;
    let zeta = cfg.spectrum.zeta;
    let depth = cfg.spectrum.n_max.unwrap_or_else(|| covering_depth(&model, zeta));
    let table = enumerate_shells(depth)?;
    let mut req = SpectrumRequest::new(model.clone(), zeta, &table)?;
    if cfg.spectrum.boundary == Boundary::Exclusive {
        req = req.exclusive();
    }
    let lines = spectrum::enumerate_spectrum(&req)?;
    let mult = |m: u128| -> Value { u64::try_from(m).map_or_else(|_| Value::String(m.to_string()), Value::from) };
    let table_json: Vec<Value> = lines
        .iter()
        .map(|l| json!({ "energy": l.energy, "multiplicity": mult(l.multiplicity), "composition": l.witness }))
        .collect();
    let total: u128 = lines.iter().map(|l| l.multiplicity).sum();
    let mut r = Results::new();
    r.extra("formula", format!("Σ_p n_p E(p) <= ζ with {label}"));
    r.extra("zeta", zeta);
    r.extra("boundary", cfg.spectrum.boundary);
    r.extra("shell_depth", depth);
    r.extra("line_count", lines.len());
    r.extra("state_count", mult(total));
    r.extra("proximity_warnings", spectrum::proximity_warnings(&lines));
    r.extra("lines", table_json);

    let mut csv = Vec::new();
    spectrum::write_csv(&lines, &mut csv)?;

    let mut staircase = String::from("energy,cumulative_states\n");
    let mut acc = 0u128;
    for l in &lines {
        acc += l.multiplicity;
        let _ = writeln!(staircase, "{:.17e},{acc}", l.energy);
    }
    files.push(("staircase.csv".into(), staircase));
    let mut disp = String::from("momentum,energy\n");
    for s in table.occupied() {
        let _ = writeln!(disp, "{:.17e},{:.17e}", s.momentum_abs(), model.energy_for_norm(s.norm_sq_int)?);
    }
    files.push(("dispersion.csv".into(), disp));
    Ok((r, String::from_utf8(csv).expect("utf-8")))
}

fn max_drift(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn export(files: &mut Vec<(PathBuf, String)>, name: &str, op: &OperatorMatrix) -> Result<(), CliError> {
    let mut data = Vec::new();
    op.write_triplets(&mut data)?;
    files.push((format!("{name}.triplets").into(), String::from_utf8(data).expect("utf-8")));
    let header = serde_json::to_string_pretty(&op.header()).expect("header serializes");
    files.push((format!("{name}.json").into(), header + "\n"));
    Ok(())
}

fn simulate_cmd(cfg: &RunConfig, seed: u64, files: &mut Vec<(PathBuf, String)>) -> Result<Results, CliError> {
    let s = &cfg.simulate;
    let n = s.n;
    let modes = ModeSet::from_shells(&s.shells, true)?;
    let fixed = Arc::new(FockBasis::build(modes.clone(), Sector::FixedTotal(n))?);
    let plus = Arc::new(FockBasis::build(modes.without_zero(), Sector::ExcitationTruncated(n))?);
    let h = fock::build_hamiltonian(&cfg.potential, n, &fixed)?;
    let map = fock::ExcitationMap::new(&fixed, &plus)?;
    let l = map.conjugate(&h);
    let mut r = Results::new();
    r.extra("formula", "H_N = Σ p² a†ₚaₚ + (2N)⁻¹ Σ V̂(r/N) a†_{p+r} a†_q a_p a_{q+r}, L_N = U_N H_N U_N*");
    r.extra("basis_dimension", plus.dim());
    r.extra("mode_count", plus.modes().len());
    r.extra("hamiltonian_dropped_terms", h.dropped_terms());
    r.quantity("hamiltonian_hermiticity_defect", h.hermiticity_defect(), None, "‖H − H†‖ bound");
    r.extra("substitution_rule_defects", map.substitution_defects());

    let omega = plus.index_of(&vec![0; plus.modes().len()]).expect("vacuum is in the basis");
    let vac = l.get(omega, omega);
    let vac_exact = f64::from(n - 1) * cfg.potential.fourier_transform(0.0) / 2.0;
    r.quantity("vacuum_energy", vac, Some((vac - vac_exact).abs()), "⟨Ω, L_N Ω⟩ = (N−1)V̂(0)/2");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_plus = fock::excitation_number(&plus);
    let n0 = fock::hopping(&fixed, &bose_core::lattice::LatticeVector::ZERO, &bose_core::lattice::LatticeVector::ZERO)?;
    let mut depletion_defect = 0.0f64;
    for _ in 0..s.random_states {
        let mut psi = DVector::from_fn(fixed.dim(), |_, _| rng.random_range(-1.0..1.0));
        psi /= psi.norm();
        let up = map.apply(&psi);
        let lhs = up.dot(&n_plus.apply(&up));
        let rhs = f64::from(n) - psi.dot(&n0.apply(&psi));
        depletion_defect = depletion_defect.max((lhs - rhs).abs());
    }
    r.quantity(
        "depletion_identity_defect",
        depletion_defect,
        None,
        "⟨ψ, U* N₊ U ψ⟩ = N(1 − ⟨φ₀, γ φ₀⟩) on random states",
    );

    let k = s.eigenvalues.min(plus.dim());
    let base = fock::exact_spectrum(&l, k)?;
    let hspec = fock::exact_spectrum(&h, k)?;
    r.extra("eigenvalues", &base.values);
    r.extra("eigen_residuals", &base.residuals);
    r.quantity("excitation_map_spectral_drift", max_drift(&base.values, &hspec.values), None, "spec U H U* = spec H");

    let sol = solve(cfg)?;
    let max_norm = s.shells.iter().copied().max().unwrap_or(1);
    let shells = enumerate_shells(max_norm)?;
    let eta = scattering::eta_coefficients(&sol, u64::from(n), &shells)?;
    let norms: Vec<u64> = s.shells.clone();
    let tau = fock::default_tau(sol.a_integral, &norms);
    r.extra("eta", &eta.values);
    r.extra("tau", &tau);

    let method = match s.conjugation {
        ConjugationChoice::ExactExpm => ConjugationMethod::ExactExpm,
        ConjugationChoice::TruncatedBch => ConjugationMethod::TruncatedBch { order: s.bch_order },
    };
    let mut gens = BTreeMap::new();
    for kind in &s.generators {
        let coeffs = if *kind == GeneratorKind::BTau { tau.clone() } else { eta.values.clone() };
        let spec = GeneratorSpec::new(*kind, coeffs)
            .with_cutoffs(s.high_min_norm, s.low_max_norm)
            .with_normalization(s.b_normalization);
        let g = fock::build_generator(&spec, &plus, n)?;
        let c = fock::conjugate(&l, &g, method)?;
        let after = fock::exact_spectrum(&c.operator, k)?;
        let name = serde_json::to_value(kind).expect("kind").as_str().unwrap_or("generator").to_string();
        gens.insert(
            name.clone(),
            json!({
                "antihermiticity_defect": g.antihermiticity_defect(),
                "norm_bound": g.norm_bound(),
                "dropped_terms": g.dropped_terms(),
                "out_of_sector_amplitudes": g.leaked_amplitudes(),
                "spectral_drift": max_drift(&base.values, &after.values),
                "orthogonality_defect": c.orthogonality_defect,
                "bch_remainder_norm": c.remainder_norm,
                "formula": "e^{−G} L_N e^{G}",
            }),
        );
        if cfg.output.operator_dir.is_some() {
            export(files, &format!("generator_{name}"), &g)?;
        }
    }
    r.extra("generators", gens);

    let cn = fock::build_cubic_cn(&plus, n, &cfg.potential, &eta.values, s.b_normalization)?;
    r.extra(
        "cubic_term",
        json!({
            "hermiticity_defect": cn.hermiticity_defect(),
            "norm_bound": cn.norm_bound(),
            "dropped_terms": cn.dropped_terms(),
            "formula": "C_N = N^{-1/2} Σ V̂(p/N)[b†_{p+q} b†_{−p}(cosh η_q b_q + sinh η_q b†_{−q}) + h.c.]",
        }),
    );

    let m = s.localization_m.unwrap_or(f64::from(n) / 2.0);
    let (f, g) = fock::localization_ops(&fock::SmoothStepProfile, m, &plus)?;
    let unity = f.mul(&f).add(&g.mul(&g)).sub(&OperatorMatrix::identity(&plus)).norm_bound();
    r.quantity("localization_partition_defect", unity, None, "f_M² + g_M² = 1 with f_M = f(N₊/M)");
    r.extra("localization_m", m);

    if cfg.output.operator_dir.is_some() {
        export(files, "hamiltonian", &h)?;
        export(files, "excitation_hamiltonian", &l)?;
        export(files, "cubic_term", &cn)?;
    }
    Ok(r)
}

/// Whether a generated file belongs in the operator directory rather than the plot directory.
pub fn is_operator_file(path: &std::path::Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("triplets") | Some("json"))
}
