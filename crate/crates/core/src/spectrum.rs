//! Excitation spectrum Σ_p n_p E(p) below a threshold, with exact
//! multiplicities, and a brute-force oracle over explicit modes.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::formulas::DispersionModel;
use crate::lattice::{LatticeVector, Shell, ShellTable, TWO_PI_SQ};

/// Relative slack applied at the threshold.
pub const THRESHOLD_SLACK: f64 = 1e-12;
/// Relative distance below which distinct lines are flagged as near-coincident.
pub const PROXIMITY_TOLERANCE: f64 = 1e-9;
/// Node budget of [`brute_force_spectrum`].
pub const BRUTE_FORCE_NODE_CAP: u64 = 100_000_000;

/// Shell occupation totals (|n|², m_s), nonzero entries only, ascending by |n|².
pub type Composition = Vec<(u64, u32)>;

/// How lines are merged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKey {
    /// Energy is (2π)² times this integer.
    IntegerNorm(u64),
    Composition(Composition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub energy: f64,
    pub multiplicity: u128,
    pub witness: Composition,
    pub key: LineKey,
}

#[derive(Debug, Clone)]
pub struct SpectrumRequest {
    model: DispersionModel,
    zeta: f64,
    shells: Vec<Shell>,
    inclusive: bool,
}

impl SpectrumRequest {
    /// Checks that no shell beyond the table can carry a single quantum
    /// with energy <= ζ.
    pub fn new(model: DispersionModel, zeta: f64, shells: &ShellTable) -> Result<Self> {
        let req = Self::restricted(model, zeta, shells.occupied().cloned().collect())?;
        let bound = req.energy_lower_bound_beyond(shells.n_max())?;
        if bound <= zeta * (1.0 + THRESHOLD_SLACK) {
            return invalid(format!(
                "shell table with n_max = {} is too shallow for zeta = {zeta}: energies beyond it may be as low as {bound}",
                shells.n_max()
            ));
        }
        Ok(req)
    }

    /// Spectrum restricted to the given shells; no coverage check.
    pub fn restricted(model: DispersionModel, zeta: f64, shells: Vec<Shell>) -> Result<Self> {
        model.validate()?;
        if !(zeta.is_finite() && zeta > 0.0) {
            return invalid(format!("zeta must be finite and > 0, got {zeta}"));
        }
        let mut shells: Vec<Shell> = shells.into_iter().filter(|s| s.norm_sq_int > 0 && s.degeneracy > 0).collect();
        shells.sort_by_key(|s| s.norm_sq_int);
        shells.dedup_by_key(|s| s.norm_sq_int);
        Ok(SpectrumRequest { model, zeta, shells, inclusive: true })
    }

    /// Exclude lines whose energy equals ζ.
    pub fn exclusive(mut self) -> Self {
        self.inclusive = false;
        self
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn model(&self) -> &DispersionModel {
        &self.model
    }

    fn energy_lower_bound_beyond(&self, n_max: u64) -> Result<f64> {
        let k = n_max + 1;
        Ok(match &self.model {
            // both increase with |p|
            DispersionModel::Free | DispersionModel::GrossPitaevskii { .. } => self.model.energy_for_norm(k)?,
            DispersionModel::MeanField { potential } => {
                // |V̂(p)| <= V̂(0) for V >= 0
                let p2 = TWO_PI_SQ * k as f64;
                (p2 * p2 - 2.0 * potential.fourier_transform(0.0).abs() * p2).max(0.0).sqrt()
            }
        })
    }

    fn admits(&self, energy: f64) -> bool {
        let slack = THRESHOLD_SLACK * self.zeta.max(1.0);
        if self.inclusive {
            energy <= self.zeta + slack
        } else {
            energy < self.zeta - slack
        }
    }
}

/// C(m + d − 1, d − 1): ways to spread m quanta over d modes.
pub fn compositions(m: u32, d: u64) -> Result<u128> {
    if d == 0 {
        return Ok(if m == 0 { 1 } else { 0 });
    }
    let k = u128::from(m).min(u128::from(d - 1));
    let n = u128::from(m) + u128::from(d) - 1;
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul(n - k + i).ok_or_else(|| Error::Resource("multiplicity overflows u128".into()))? / i;
    }
    Ok(c)
}

struct Level {
    norm: u64,
    degeneracy: u64,
    energy: f64,
}

#[derive(Default)]
struct Accumulator {
    lines: BTreeMap<LineKey, (f64, u128, Composition)>,
}

impl Accumulator {
    fn add(&mut self, key: LineKey, energy: f64, mult: u128, comp: &Composition) -> Result<()> {
        match self.lines.get_mut(&key) {
            Some(entry) => {
                entry.1 =
                    entry.1.checked_add(mult).ok_or_else(|| Error::Resource("multiplicity overflows u128".into()))?;
            }
            None => {
                self.lines.insert(key, (energy, mult, comp.clone()));
            }
        }
        Ok(())
    }

    fn merge(&mut self, other: Accumulator) -> Result<()> {
        for (key, (e, m, w)) in other.lines {
            self.add(key, e, m, &w)?;
        }
        Ok(())
    }

    fn into_lines(self) -> Vec<SpectrumLine> {
        let mut out: Vec<SpectrumLine> = self
            .lines
            .into_iter()
            .map(|(key, (energy, multiplicity, witness))| SpectrumLine { energy, multiplicity, witness, key })
            .collect();
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.key.cmp(&b.key)));
        out
    }
}

fn line_key(integer: bool, comp: &Composition) -> LineKey {
    if integer {
        LineKey::IntegerNorm(comp.iter().map(|&(k, m)| k * u64::from(m)).sum())
    } else {
        LineKey::Composition(comp.clone())
    }
}

fn line_energy(integer: bool, levels_energy: impl Fn(u64) -> f64, comp: &Composition) -> f64 {
    if integer {
        TWO_PI_SQ * comp.iter().map(|&(k, m)| k * u64::from(m)).sum::<u64>() as f64
    } else {
        comp.iter().map(|&(k, m)| f64::from(m) * levels_energy(k)).fold(0.0, |s, e| s + e)
    }
}

/// Calls `emit(composition, energy, multiplicity)` for every admissible
/// shell composition, in depth-first order.
pub fn for_each_composition<F>(req: &SpectrumRequest, mut emit: F) -> Result<()>
where
    F: FnMut(&Composition, f64, u128) -> Result<()>,
{
    let levels = levels(req)?;
    let mut comp = Composition::new();
    dfs(req, &levels, 0, 0.0, 1, &mut comp, &mut emit)
}

fn levels(req: &SpectrumRequest) -> Result<Vec<Level>> {
    let mut levels = Vec::new();
    for s in &req.shells {
        let energy = req.model.energy_for_norm(s.norm_sq_int)?;
        if energy <= 0.0 {
            return Err(Error::Domain(format!("non-positive excitation energy at |n|^2 = {}", s.norm_sq_int)));
        }
        if req.admits(energy) {
            levels.push(Level { norm: s.norm_sq_int, degeneracy: s.degeneracy, energy });
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.norm.cmp(&b.norm)));
    Ok(levels)
}

fn dfs<F>(
    req: &SpectrumRequest,
    levels: &[Level],
    i: usize,
    energy: f64,
    mult: u128,
    comp: &mut Composition,
    emit: &mut F,
) -> Result<()>
where
    F: FnMut(&Composition, f64, u128) -> Result<()>,
{
    if i == levels.len() {
        let mut sorted = comp.clone();
        sorted.sort_unstable();
        return emit(&sorted, energy, mult);
    }
    let lv = &levels[i];
    let mut m = 0u32;
    loop {
        let e = energy + f64::from(m) * lv.energy;
        if !req.admits(e) {
            break;
        }
        let c = compositions(m, lv.degeneracy)?;
        let total = mult.checked_mul(c).ok_or_else(|| Error::Resource("multiplicity overflows u128".into()))?;
        if m > 0 {
            comp.push((lv.norm, m));
        }
        dfs(req, levels, i + 1, e, total, comp, emit)?;
        if m > 0 {
            comp.pop();
        }
        m += 1;
    }
    Ok(())
}

/// All lines with energy <= ζ, ascending.
///
/// Integer-spectrum models (free, or zero interaction) merge lines by the
/// integer Σ m_s|n_s|²; other models keep one line per shell composition.
pub fn enumerate_spectrum(req: &SpectrumRequest) -> Result<Vec<SpectrumLine>> {
    let levels = levels(req)?;
    let integer = req.model.has_integer_spectrum();
    let energy_of = |k: u64| levels.iter().find(|l| l.norm == k).map_or(f64::NAN, |l| l.energy);

    let branch = |first: Option<u32>| -> Result<Accumulator> {
        let mut acc = Accumulator::default();
        let mut emit = |comp: &Composition, _e: f64, mult: u128| {
            let energy = line_energy(integer, energy_of, comp);
            acc.add(line_key(integer, comp), energy, mult, comp)
        };
        let mut comp = Composition::new();
        match first {
            None => dfs(req, &levels, 0, 0.0, 1, &mut comp, &mut emit)?,
            Some(m) => {
                let lv = &levels[0];
                if m > 0 {
                    comp.push((lv.norm, m));
                }
                let c = compositions(m, lv.degeneracy)?;
                dfs(req, &levels, 1, f64::from(m) * lv.energy, c, &mut comp, &mut emit)?;
            }
        }
        Ok(acc)
    };

    let parts: Vec<Result<Accumulator>> = if levels.is_empty() {
        vec![branch(None)]
    } else {
        let top = (0u32..).take_while(|&m| req.admits(f64::from(m) * levels[0].energy)).collect::<Vec<_>>();
        top.into_par_iter().map(|m| branch(Some(m))).collect()
    };
    let mut acc = Accumulator::default();
    for p in parts {
        acc.merge(p?)?;
    }
    Ok(acc.into_lines())
}

/// Index pairs of adjacent lines whose energies agree to
/// [`PROXIMITY_TOLERANCE`] although their keys differ.
pub fn proximity_warnings(lines: &[SpectrumLine]) -> Vec<(usize, usize)> {
    lines
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[1].energy - w[0].energy).abs() <= PROXIMITY_TOLERANCE * w[1].energy.abs().max(1.0))
        .map(|(i, _)| (i, i + 1))
        .collect()
}

/// Direct enumeration of occupation vectors over explicit modes, grouped
/// by the same keys as [`enumerate_spectrum`].
pub fn brute_force_spectrum(model: &DispersionModel, modes: &[LatticeVector], zeta: f64) -> Result<Vec<SpectrumLine>> {
    model.validate()?;
    if !(zeta.is_finite() && zeta > 0.0) {
        return invalid(format!("zeta must be finite and > 0, got {zeta}"));
    }
    let mut sorted = modes.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return invalid("mode list contains duplicates");
    }
    if sorted.iter().any(|v| v.is_zero()) {
        return invalid("the zero momentum is not an excitation mode");
    }
    let energies: Vec<f64> = modes.iter().map(|v| model.energy_for_norm(v.norm_sq())).collect::<Result<_>>()?;
    let slack = THRESHOLD_SLACK * zeta.max(1.0);
    let integer = model.has_integer_spectrum();

    let mut occupation = vec![0u32; modes.len()];
    let mut acc = Accumulator::default();
    let mut nodes = 0u64;

    #[allow(clippy::too_many_arguments)]
    fn visit(
        i: usize,
        energy: f64,
        modes: &[LatticeVector],
        energies: &[f64],
        limit: f64,
        integer: bool,
        occupation: &mut [u32],
        acc: &mut Accumulator,
        nodes: &mut u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > BRUTE_FORCE_NODE_CAP {
            return Err(Error::Resource(format!("brute-force search exceeds {BRUTE_FORCE_NODE_CAP} nodes")));
        }
        if i == modes.len() {
            let mut per_shell: BTreeMap<u64, u32> = BTreeMap::new();
            for (v, &n) in modes.iter().zip(occupation.iter()) {
                if n > 0 {
                    *per_shell.entry(v.norm_sq()).or_default() += n;
                }
            }
            let comp: Composition = per_shell.into_iter().collect();
            let e = if integer { line_energy(true, |_| 0.0, &comp) } else { energy };
            return acc.add(line_key(integer, &comp), e, 1, &comp);
        }
        let mut n = 0u32;
        loop {
            let e = energy + f64::from(n) * energies[i];
            if e > limit {
                break;
            }
            occupation[i] = n;
            visit(i + 1, e, modes, energies, limit, integer, occupation, acc, nodes)?;
            n += 1;
        }
        occupation[i] = 0;
        Ok(())
    }

    visit(0, 0.0, modes, &energies, zeta + slack, integer, &mut occupation, &mut acc, &mut nodes)?;
    let mut lines = acc.into_lines();
    if !integer {
        // recompute energies in shell order so they match enumerate_spectrum bit for bit
        for l in &mut lines {
            l.energy = l
                .witness
                .iter()
                .map(|&(k, m)| f64::from(m) * model.energy_for_norm(k).unwrap_or(f64::NAN))
                .fold(0.0, |s, e| s + e);
        }
        lines.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.key.cmp(&b.key)));
    }
    Ok(lines)
}

/// CSV with columns energy, multiplicity, composition ("k:m;k:m").
pub fn write_csv<W: Write>(lines: &[SpectrumLine], mut w: W) -> io::Result<()> {
    writeln!(w, "energy,multiplicity,composition")?;
    for l in lines {
        let comp: Vec<String> = l.witness.iter().map(|(k, m)| format!("{k}:{m}")).collect();
        writeln!(w, "{:.17e},{},{}", l.energy, l.multiplicity, comp.join(";"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_shells;

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(0, 6).unwrap(), 1);
        assert_eq!(compositions(1, 6).unwrap(), 6);
        assert_eq!(compositions(2, 6).unwrap(), 21);
        assert_eq!(compositions(3, 1).unwrap(), 1);
        assert_eq!(compositions(5, 0).unwrap(), 0);
        assert!(compositions(u32::MAX, u64::MAX).is_err());
    }

    #[test]
    fn free_model_low_lines() {
        let t = enumerate_shells(10).unwrap();
        let req = SpectrumRequest::new(DispersionModel::Free, 40.0, &t).unwrap();
        let lines = enumerate_spectrum(&req).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!((lines[0].energy, lines[0].multiplicity), (0.0, 1));
        assert_eq!(lines[1].multiplicity, 6);
        assert!((lines[1].energy - 39.47841760435743).abs() < 1e-12);

        let req = SpectrumRequest::new(DispersionModel::Free, 80.0, &t).unwrap();
        let lines = enumerate_spectrum(&req).unwrap();
        let two = lines.iter().find(|l| l.key == LineKey::IntegerNorm(2)).unwrap();
        assert_eq!(two.multiplicity, 33);
    }

    #[test]
    fn below_first_shell_is_vacuum() {
        let t = enumerate_shells(5).unwrap();
        let gp = DispersionModel::GrossPitaevskii { a: 0.3 };
        let req = SpectrumRequest::new(gp, 10.0, &t).unwrap();
        let lines = enumerate_spectrum(&req).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!((lines[0].energy, lines[0].multiplicity), (0.0, 1));
    }

    #[test]
    fn shallow_table_rejected() {
        let t = enumerate_shells(1).unwrap();
        assert!(matches!(SpectrumRequest::new(DispersionModel::Free, 80.0, &t), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn boundary_flag() {
        let t = enumerate_shells(3).unwrap();
        let zeta = TWO_PI_SQ;
        let inc = enumerate_spectrum(&SpectrumRequest::new(DispersionModel::Free, zeta, &t).unwrap()).unwrap();
        let exc =
            enumerate_spectrum(&SpectrumRequest::new(DispersionModel::Free, zeta, &t).unwrap().exclusive()).unwrap();
        assert_eq!(inc.len(), 2);
        assert_eq!(exc.len(), 1);
    }

    #[test]
    fn brute_force_empty_and_errors() {
        let lines = brute_force_spectrum(&DispersionModel::Free, &[], 10.0).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].multiplicity, 1);
        let v = LatticeVector::new(1, 0, 0);
        assert!(brute_force_spectrum(&DispersionModel::Free, &[v, v], 10.0).is_err());
        assert!(brute_force_spectrum(&DispersionModel::Free, &[LatticeVector::ZERO], 10.0).is_err());
    }

    #[test]
    fn brute_force_budget() {
        let modes: Vec<LatticeVector> = enumerate_shells(3).unwrap().occupied().flat_map(|s| s.members()).collect();
        let r = brute_force_spectrum(&DispersionModel::Free, &modes, 40.0 * TWO_PI_SQ);
        assert!(matches!(r, Err(Error::Resource(_))));
    }
}
