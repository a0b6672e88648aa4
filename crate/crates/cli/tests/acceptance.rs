use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{self, Command};
use std::sync::Arc;
use std::time::Instant;

use bose_core::fock::*;
use bose_core::formulas::{self, quad_diagonalize, DispersionModel, ELambdaScheme};
use bose_core::lattice::{enumerate_shells, LatticeVector, TWO_PI_SQ};
use bose_core::potential::PotentialSpec;
use bose_core::scattering::{born_continuum_a1, born_terms, solve_zero_energy};
use bose_core::spectrum::{brute_force_spectrum, enumerate_spectrum, LineKey, SpectrumLine, SpectrumRequest};

type Outcome = (bool, String);

fn well() -> PotentialSpec {
    PotentialSpec::square_well(2.0, 1.0).unwrap()
}

fn v(x: i32, y: i32, z: i32) -> LatticeVector {
    LatticeVector::new(x, y, z)
}

fn scattering_length() -> Outcome {
    let start = Instant::now();
    let sol = solve_zero_energy(&well(), 4.0, 1e-12).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let exact = 1.0 - 1f64.tanh();
    let e_int = (sol.a_integral - exact).abs() / exact;
    let e_asy = (sol.a_asymptotic - exact).abs() / exact;
    let agree = (sol.a_integral - sol.a_asymptotic).abs();
    let ok = e_int <= 1e-8 && e_asy <= 1e-8 && agree <= 1e-6 && secs < 1.0;
    (ok, format!("rel err integral {e_int:.2e}, asymptotic {e_asy:.2e}, agreement {agree:.2e}, {secs:.3} s"))
}

fn born_series() -> Outcome {
    let start = Instant::now();
    let table = enumerate_shells(1).unwrap();
    let a0 = born_terms(&well(), &table, 1, 1.0).unwrap().a0;
    let a1 = born_continuum_a1(&well());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 4..=10 {
        let lambda = 2f64.powi(-k);
        let pot = PotentialSpec::scaled(lambda, well()).unwrap();
        let a = solve_zero_energy(&pot, 4.0, 1e-13).unwrap().a_integral;
        let r = (a - lambda * a0 - lambda * lambda * a1).abs();
        xs.push(lambda.ln());
        ys.push(r.ln());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let secs = start.elapsed().as_secs_f64();
    let a0_err = (a0 - 1.0 / 3.0).abs();
    let ok = slope >= 2.7 && a0_err <= 1e-15 && secs < 10.0;
    (ok, format!("log-log slope {slope:.4}, |a0 - 1/3| = {a0_err:.1e}, {secs:.2} s"))
}

fn e_lambda() -> Outcome {
    let start = Instant::now();
    let e = formulas::e_lambda(200, ELambdaScheme::Richardson).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let spread = (e.average - e.richardson).abs();
    let pinned = (e.richardson - 10.413640581719854).abs();
    let ok = spread <= 1e-3 && pinned <= 1e-9 && secs < 60.0;
    (ok, format!("e_lambda {:.9}, scheme spread {spread:.2e}, drift from pinned {pinned:.1e}, {secs:.2} s", e.value))
}

fn correction_sum() -> Outcome {
    let a = 1.0 - 1f64.tanh();
    let x = 8.0 * PI * a;
    let mut worst = 0.0f64;
    for k in 51..=20_000u64 {
        let p2 = TWO_PI_SQ * k as f64;
        let asym = -x.powi(3) / (2.0 * p2 * p2);
        worst = worst.max((formulas::correction_summand(a, k) / asym - 1.0).abs());
    }
    let reference = formulas::correction_sum(a, &enumerate_shells(40_000).unwrap()).unwrap();
    let mut tails_ok = true;
    let mut cut = 25;
    while cut <= 20_000 {
        let c = formulas::correction_sum(a, &enumerate_shells(cut).unwrap()).unwrap();
        tails_ok &= (reference.value - c.value).abs() <= c.tail_bound;
        cut *= 2;
    }
    (
        worst <= 0.01 && tails_ok,
        format!("worst asymptote deviation {worst:.2e} beyond shell 50, nested tail bounds hold: {tails_ok}"),
    )
}

fn pairing() -> Outcome {
    let p = v(1, 0, 0);
    let q = quad_diagonalize(2.0, 1.0).unwrap();
    let mut rows = Vec::new();
    for cap in [20, 40] {
        let b = Arc::new(FockBasis::build(ModeSet::new(vec![p, -p]).unwrap(), Sector::PerModeCap(cap)).unwrap());
        let h = pairing_hamiltonian(&b, &p, 2.0, 1.0).unwrap();
        let e = exact_spectrum(&h, 2).unwrap().values;
        rows.push((e[0], e[1] - e[0]));
    }
    let want = (3f64.sqrt() - 2.0, 3f64.sqrt());
    let err = |r: (f64, f64)| (r.0 - want.0).abs().max((r.1 - want.1).abs());
    let (e20, e40) = (err(rows[0]), err(rows[1]));
    let quad = (q.ground_shift - want.0).abs().max((q.eps - want.1).abs());
    let doubling = (rows[0].0 - rows[1].0).abs().max((rows[0].1 - rows[1].1).abs());
    let ok = e20 <= 1e-6 && e40 <= 1e-6 && doubling <= 1e-6 && quad <= 1e-14;
    (ok, format!("cap 20 err {e20:.1e}, cap 40 err {e40:.1e}, change under doubling {doubling:.1e}, closed form err {quad:.1e}"))
}

fn multiset(lines: &[SpectrumLine]) -> Vec<(LineKey, u128)> {
    let mut v: Vec<_> = lines.iter().map(|l| (l.key.clone(), l.multiplicity)).collect();
    v.sort();
    v
}

fn spectrum_oracle() -> Outcome {
    let table = enumerate_shells(4).unwrap();
    let norms = [1u64, 2, 3, 4];
    let mut subsets = Vec::new();
    for mask in 1u32..16 {
        if mask.count_ones() <= 3 {
            subsets.push(
                norms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, k)| *k).collect::<Vec<_>>(),
            );
        }
    }
    let models = [DispersionModel::Free, DispersionModel::GrossPitaevskii { a: 1.0 - 1f64.tanh() }];
    let (mut configs, mut lines, mut mismatches) = (0, 0, 0);
    for model in &models {
        for sub in &subsets {
            let shells: Vec<_> = sub.iter().map(|k| table.shell(*k).unwrap().clone()).collect();
            let e_min = model.energy_for_norm(sub[0]).unwrap();
            for quanta in 1..=5 {
                let zeta = (quanta as f64 + 0.5) * e_min;
                let fast =
                    enumerate_spectrum(&SpectrumRequest::restricted(model.clone(), zeta, shells.clone()).unwrap())
                        .unwrap();
                let modes: Vec<_> = shells.iter().flat_map(|s| s.members()).collect();
                let slow = brute_force_spectrum(model, &modes, zeta).unwrap();
                configs += 1;
                lines += fast.len();
                if multiset(&fast) != multiset(&slow) {
                    mismatches += 1;
                }
            }
        }
    }
    let sh = vec![table.shell(1).unwrap().clone(), table.shell(2).unwrap().clone()];
    let collision =
        enumerate_spectrum(&SpectrumRequest::restricted(DispersionModel::Free, 2.0 * TWO_PI_SQ, sh).unwrap())
            .unwrap()
            .into_iter()
            .find(|l| l.key == LineKey::IntegerNorm(2))
            .map(|l| l.multiplicity);
    let ok = mismatches == 0 && collision == Some(33);
    (
        ok,
        format!(
            "{configs} configurations, {lines} lines, {mismatches} mismatches, multiplicity at 2(2π)^2: {collision:?}"
        ),
    )
}

fn excitation_identities() -> Outcome {
    let modes = ModeSet::new(vec![LatticeVector::ZERO, v(1, 0, 0), v(-1, 0, 0)]).unwrap();
    let fixed = Arc::new(FockBasis::build(modes.clone(), Sector::FixedTotal(4)).unwrap());
    let plus = Arc::new(FockBasis::build(modes.without_zero(), Sector::ExcitationTruncated(4)).unwrap());
    let u = ExcitationMap::new(&fixed, &plus).unwrap();
    let d = u.substitution_defects().max();
    let l = u.conjugate(&build_hamiltonian(&well(), 4, &fixed).unwrap());
    let omega = plus.index_of(&[0, 0]).unwrap();
    let vac = (l.get(omega, omega) - 4.0 * PI).abs();
    (d <= 1e-12 && vac <= 1e-10, format!("max substitution defect {d:.1e}, vacuum energy error {vac:.1e}"))
}

fn unitary_pipeline() -> Outcome {
    let nz = vec![v(1, 0, 0), v(-1, 0, 0), v(1, 1, 0), v(-1, -1, 0), v(2, 1, 0), v(-2, -1, 0)];
    let mut all = vec![LatticeVector::ZERO];
    all.extend(nz.iter().copied());
    let n = 3;
    let fixed = Arc::new(FockBasis::build(ModeSet::new(all).unwrap(), Sector::FixedTotal(n)).unwrap());
    let plus = Arc::new(FockBasis::build(ModeSet::new(nz).unwrap(), Sector::ExcitationTruncated(n)).unwrap());
    let u = ExcitationMap::new(&fixed, &plus).unwrap();
    let l = u.conjugate(&build_hamiltonian(&well(), n, &fixed).unwrap());
    let before = exact_spectrum(&l, plus.dim()).unwrap().values;
    let eta = BTreeMap::from([(1, -0.21), (2, 0.13), (5, -0.08)]);
    let mut drift = 0.0f64;
    let mut leaked = 0;
    let mut trivial = Vec::new();
    for kind in [GeneratorKind::BEta, GeneratorKind::BTau, GeneratorKind::CubicA, GeneratorKind::CubicAtilde] {
        let spec = GeneratorSpec::new(kind, eta.clone()).with_cutoffs(Some(2), Some(1));
        let g = build_generator(&spec, &plus, n).unwrap();
        if g.nnz() == 0 {
            trivial.push(kind);
        }
        leaked += g.leaked_amplitudes();
        let c = conjugate(&l, &g, ConjugationMethod::ExactExpm).unwrap();
        assert!(Arc::ptr_eq(c.operator.basis(), &plus));
        let after = exact_spectrum(&c.operator, plus.dim()).unwrap().values;
        drift = before.iter().zip(&after).fold(drift, |m, (x, y)| m.max((x - y).abs()));
    }
    let (f, g) = localization_ops(&SmoothStepProfile, 1.5, &plus).unwrap();
    let unity = f.mul(&f).add(&g.mul(&g)).sub(&OperatorMatrix::identity(&plus)).max_abs();
    let ok = drift <= 1e-8 && leaked == 0 && trivial.is_empty() && unity <= 1e-12;
    (
        ok,
        format!("dimension {}, max eigenvalue drift {drift:.1e}, leaked amplitudes {leaked}, zero generators {trivial:?}, f^2+g^2-1 {unity:.1e}", plus.dim()),
    )
}

fn phonon_limit() -> Outcome {
    // the ratio as written, E_gp(p)/(|p|√(16πa)) at the first shell with a ↓ 0
    let p = TWO_PI_SQ.sqrt();
    let ratios: Vec<f64> = (0..=24)
        .map(|i| {
            let a = 10f64.powf(-(i as f64) / 4.0);
            DispersionModel::GrossPitaevskii { a }.energy_for_norm(1).unwrap() / (p * (16.0 * PI * a).sqrt())
        })
        .collect();
    let toward_one = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    let last = *ratios.last().unwrap();
    let ok = toward_one && (last - 1.0).abs() < 1e-3;
    (
        ok,
        format!(
            "ratio {:.4} at a = 1, {last:.4e} at a = 1e-6; the ratio equals √(1 + p²/(16πa)) and tends to 1 only as p²/a → 0",
            ratios[0]
        ),
    )
}

fn run_bin(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_boselab")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn strip_time(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("wall_time_seconds"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut compared = 0;
    for cmd in ["scattering", "constants", "energy", "spectrum", "simulate"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let dir = tmp.path().join(format!("{cmd}-{threads}"));
            let cfg = format!(
                "n = 50\n[potential]\nkind = \"square_well\"\ndepth = 2.0\nradius = 1.0\n\
                 [lattice]\nborn_n_max = 4000\ncorrection_n_max = 4000\n\
                 [spectrum]\nzeta = 400.0\n\
                 [simulate]\nshells = [1, 2]\nn = 2\ngenerators = [\"b_eta\", \"b_tau\", \"cubic_atilde\"]\n\
                 [output]\nplot_dir = \"{0}/plots\"\noperator_dir = \"{0}/ops\"\n",
                dir.display()
            );
            fs::create_dir_all(&dir).unwrap();
            let path = dir.join("run.toml");
            fs::write(&path, cfg).unwrap();
            let p = path.to_str().unwrap();
            let json = strip_time(run_bin(&[cmd, "--config", p, "--threads", threads, "--seed", "11"]));
            let csv = run_bin(&[cmd, "--config", p, "--threads", threads, "--csv", "--seed", "11"]);
            let json = json.replace(&dir.display().to_string(), "DIR");
            let mut files = read_dir_sorted(&dir.join("plots"));
            if dir.join("ops").exists() {
                files.extend(read_dir_sorted(&dir.join("ops")));
            }
            outputs.push((json, csv, files));
        }
        compared += 1;
        if outputs[0] != outputs[1] {
            differing.push(cmd);
        }
    }
    (differing.is_empty(), format!("{compared} commands compared across 1 and 4 threads, differing: {differing:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("scattering length of the square well", scattering_length),
        ("Born series residual slope", born_series),
        ("e_Λ schemes agree and match the pinned value", e_lambda),
        ("correction sum asymptote and tail bounds", correction_sum),
        ("two-mode pairing diagonalization", pairing),
        ("spectrum enumeration against brute force", spectrum_oracle),
        ("excitation map substitution rules and vacuum energy", excitation_identities),
        ("unitary conjugation pipeline", unitary_pipeline),
        ("phonon ratio tends to 1 as a decreases", phonon_limit),
        ("thread-count determinism of the command line", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| (false, "panicked".into()));
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {}: {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        process::exit(1);
    }
}
