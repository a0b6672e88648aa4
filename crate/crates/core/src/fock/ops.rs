use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::basis::{FockBasis, Sector};
use super::operator::{Factor, OperatorMatrix, Term};
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeVector, TWO_PI_SQ};
use crate::potential::PotentialSpec;

/// Prefactor c in b_p = c·(N − N₊)^{1/2} a_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BNormalization {
    /// c = N^{-1/2}, so b_p ≈ a_p on states with few excitations.
    #[default]
    InverseSqrtN,
    /// c = N^{-1}.
    InverseN,
}

impl BNormalization {
    pub fn prefactor(self, n: u32) -> f64 {
        match self {
            BNormalization::InverseSqrtN => 1.0 / f64::from(n).sqrt(),
            BNormalization::InverseN => 1.0 / f64::from(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    A,
    ADag,
    B,
    BDag,
}

fn mode_index(basis: &FockBasis, v: &LatticeVector) -> Result<usize> {
    basis.modes().index_of(v).ok_or_else(|| Error::InvalidArgument(format!("mode {v} is not in the basis")))
}

fn excitation_n(basis: &FockBasis) -> Result<u32> {
    match basis.sector() {
        Sector::ExcitationTruncated(n) => Ok(n),
        _ => invalid("b operators need an excitation_truncated basis"),
    }
}

/// b_p as a word, including its prefactor.
fn b_word(i: usize) -> Vec<Factor> {
    vec![Factor::Depletion, Factor::Annihilate(i)]
}

fn b_dag_word(i: usize) -> Vec<Factor> {
    vec![Factor::Create(i), Factor::Depletion]
}

fn concat(parts: &[Vec<Factor>]) -> Vec<Factor> {
    parts.iter().flatten().copied().collect()
}

pub fn ladder_ops(
    basis: &Arc<FockBasis>,
    mode: &LatticeVector,
    flavor: Flavor,
    norm: BNormalization,
) -> Result<OperatorMatrix> {
    let i = mode_index(basis, mode)?;
    let term = match flavor {
        Flavor::A => Term::new(1.0, vec![Factor::Annihilate(i)]),
        Flavor::ADag => Term::new(1.0, vec![Factor::Create(i)]),
        Flavor::B => Term::new(norm.prefactor(excitation_n(basis)?), b_word(i)),
        Flavor::BDag => Term::new(norm.prefactor(excitation_n(basis)?), b_dag_word(i)),
    };
    Ok(OperatorMatrix::from_terms(basis, &[term]))
}

/// a†_p a_q.
pub fn hopping(basis: &Arc<FockBasis>, p: &LatticeVector, q: &LatticeVector) -> Result<OperatorMatrix> {
    let (i, j) = (mode_index(basis, p)?, mode_index(basis, q)?);
    Ok(OperatorMatrix::from_terms(basis, &[Term::new(1.0, vec![Factor::Create(i), Factor::Annihilate(j)])]))
}

/// N₊, diagonal.
pub fn excitation_number(basis: &Arc<FockBasis>) -> OperatorMatrix {
    let b = basis.clone();
    OperatorMatrix::diagonal(basis, move |s| f64::from(b.excitation_count(s)))
}

/// H = Σ p² a†ₚaₚ + (2N)⁻¹ Σ V̂(r/N) a†_{p+r} a†_q a_p a_{q+r} on a
/// fixed-total basis.
///
/// r runs over differences of modes; a term whose created momenta p+r or q
/// fall outside the set is dropped and counted.
pub fn build_hamiltonian(potential: &PotentialSpec, n: u32, basis: &Arc<FockBasis>) -> Result<OperatorMatrix> {
    potential.validate()?;
    if basis.sector() != Sector::FixedTotal(n) {
        return invalid(format!("Hamiltonian needs a fixed_total({n}) basis"));
    }
    let modes = basis.modes().modes();
    let nf = f64::from(n);
    let mut terms: Vec<Term> = modes
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.is_zero())
        .map(|(i, p)| Term::new(p.momentum_sq(), vec![Factor::Create(i), Factor::Annihilate(i)]))
        .collect();

    let shifts: BTreeSet<LatticeVector> = modes.iter().flat_map(|a| modes.iter().map(move |b| *a - *b)).collect();
    let mut dropped = 0u64;
    for r in &shifts {
        let vr = potential.fourier_transform(r.momentum_abs() / nf);
        if vr == 0.0 {
            continue;
        }
        let c = vr / (2.0 * nf);
        for (ip, p) in modes.iter().enumerate() {
            for (is, s) in modes.iter().enumerate() {
                // s = q + r
                let created = (basis.modes().index_of(&(*p + *r)), basis.modes().index_of(&(*s - *r)));
                match created {
                    (Some(ipr), Some(iq)) => terms.push(Term::new(
                        c,
                        vec![Factor::Create(ipr), Factor::Create(iq), Factor::Annihilate(ip), Factor::Annihilate(is)],
                    )),
                    _ => dropped += 1,
                }
            }
        }
    }
    Ok(OperatorMatrix::from_terms(basis, &terms).with_dropped_terms(dropped))
}

/// Maximal defects of the four substitution rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionDefects {
    /// U a†₀a₀ U* = N − N₊.
    pub condensate_number: f64,
    /// U a†ₚa₀ U* = a†ₚ(N − N₊)^{1/2}.
    pub creation: f64,
    /// U a†₀aₚ U* = (N − N₊)^{1/2} aₚ.
    pub annihilation: f64,
    /// U a†ₚa_q U* = a†ₚa_q.
    pub hopping: f64,
}

impl SubstitutionDefects {
    pub fn max(&self) -> f64 {
        self.condensate_number.max(self.creation).max(self.annihilation).max(self.hopping)
    }
}

/// U_N: fixed-total states (n₀, n₁, …) ↦ excitation states (n₁, …).
#[derive(Debug, Clone)]
pub struct ExcitationMap {
    fixed: Arc<FockBasis>,
    plus: Arc<FockBasis>,
    zero: usize,
    to_plus: Vec<usize>,
    from_plus: Vec<usize>,
}

impl ExcitationMap {
    pub fn new(fixed: &Arc<FockBasis>, plus: &Arc<FockBasis>) -> Result<Self> {
        let (Sector::FixedTotal(n), Sector::ExcitationTruncated(m)) = (fixed.sector(), plus.sector()) else {
            return invalid("excitation map goes from fixed_total(N) to excitation_truncated(N)");
        };
        if n != m {
            return invalid(format!("particle numbers differ: {n} vs {m}"));
        }
        let zero = fixed.modes().zero_index().expect("fixed_total basis has the zero mode");
        if fixed.modes().without_zero() != *plus.modes() {
            return invalid("bases must share the nonzero modes in the same order");
        }
        let mut to_plus = Vec::with_capacity(fixed.dim());
        let mut from_plus = vec![usize::MAX; plus.dim()];
        for (j, s) in fixed.states().iter().enumerate() {
            let excited: Vec<u32> = s.iter().enumerate().filter(|(i, _)| *i != zero).map(|(_, v)| *v).collect();
            let i = plus.index_of(&excited).ok_or_else(|| Error::InvalidArgument("bases are not isomorphic".into()))?;
            to_plus.push(i);
            from_plus[i] = j;
        }
        if from_plus.contains(&usize::MAX) {
            return invalid("bases are not isomorphic");
        }
        Ok(ExcitationMap { fixed: fixed.clone(), plus: plus.clone(), zero, to_plus, from_plus })
    }

    pub fn fixed_basis(&self) -> &Arc<FockBasis> {
        &self.fixed
    }

    pub fn excitation_basis(&self) -> &Arc<FockBasis> {
        &self.plus
    }

    /// U ψ.
    pub fn apply(&self, psi: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.plus.dim(), |i, _| psi[self.from_plus[i]])
    }

    /// U* φ.
    pub fn apply_adjoint(&self, phi: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.fixed.dim(), |j, _| phi[self.to_plus[j]])
    }

    /// U O U*.
    pub fn conjugate(&self, op: &OperatorMatrix) -> OperatorMatrix {
        let dim = self.plus.dim();
        let mut coo = nalgebra_sparse::CooMatrix::new(dim, dim);
        for (i, j, v) in op.csr().triplet_iter() {
            coo.push(self.to_plus[i], self.to_plus[j], *v);
        }
        OperatorMatrix::from_csr(&self.plus, nalgebra_sparse::CsrMatrix::from(&coo))
            .with_dropped_terms(op.dropped_terms())
    }

    /// Checks the substitution rules as matrix identities on the whole basis.
    pub fn substitution_defects(&self) -> SubstitutionDefects {
        let n = f64::from(self.plus.particle_number().expect("sector has N"));
        let fixed_index = |k: usize| if k < self.zero { k } else { k + 1 };
        let z = self.zero;
        let m = self.plus.modes().len();
        let diff = |lhs: &[Factor], rhs: Vec<Factor>| {
            let l = self.conjugate(&OperatorMatrix::from_terms(&self.fixed, &[Term::new(1.0, lhs.to_vec())]));
            let r = OperatorMatrix::from_terms(&self.plus, &[Term::new(1.0, rhs)]);
            l.sub(&r).norm_bound()
        };

        let cond = {
            let l = self.conjugate(&OperatorMatrix::from_terms(
                &self.fixed,
                &[Term::new(1.0, vec![Factor::Create(z), Factor::Annihilate(z)])],
            ));
            let b = self.plus.clone();
            let r = OperatorMatrix::diagonal(&self.plus, move |s| n - f64::from(b.excitation_count(s)));
            l.sub(&r).norm_bound()
        };
        let mut creation = 0.0f64;
        let mut annihilation = 0.0f64;
        let mut hop = 0.0f64;
        for p in 0..m {
            let fp = fixed_index(p);
            creation = creation
                .max(diff(&[Factor::Create(fp), Factor::Annihilate(z)], vec![Factor::Create(p), Factor::Depletion]));
            annihilation = annihilation.max(diff(
                &[Factor::Create(z), Factor::Annihilate(fp)],
                vec![Factor::Depletion, Factor::Annihilate(p)],
            ));
            for q in 0..m {
                hop = hop.max(diff(
                    &[Factor::Create(fp), Factor::Annihilate(fixed_index(q))],
                    vec![Factor::Create(p), Factor::Annihilate(q)],
                ));
            }
        }
        SubstitutionDefects { condensate_number: cond, creation, annihilation, hopping: hop }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// ½Σ_{q ∈ P_H} η_q (b†_q b†_{−q} − h.c.).
    BEta,
    /// ½Σ_p τ_p (b†_p b†_{−p} − h.c.), or with a-operators.
    BTau,
    /// N^{-1/2} Σ_{r ∈ P_H, v ∈ P_L} η_r (b†_{r+v} a†_{−r} a_v − h.c.).
    CubicA,
    /// N^{-1/2} Σ_{r ∈ P̃_H, v ∈ P̃_L} η_r b†_{r+v} b†_{−r}(sinh η_v b†_{−v} + cosh η_v b_v) − h.c.
    CubicAtilde,
}

/// Ladder operators used in the quadratic generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderLevel {
    A,
    #[default]
    B,
}

/// Momentum sets as integer shell thresholds: high momenta have
/// |n|² >= `high_min_norm`, low momenta |n|² <= `low_max_norm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumCutoffs {
    pub high_min_norm: Option<u64>,
    pub low_max_norm: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// η or τ per shell norm |n|².
    pub coefficients: BTreeMap<u64, f64>,
    #[serde(default)]
    pub cutoffs: MomentumCutoffs,
    #[serde(default)]
    pub level: LadderLevel,
    #[serde(default)]
    pub normalization: BNormalization,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, coefficients: BTreeMap<u64, f64>) -> Self {
        GeneratorSpec {
            kind,
            coefficients,
            cutoffs: MomentumCutoffs::default(),
            level: LadderLevel::default(),
            normalization: BNormalization::default(),
        }
    }

    pub fn with_cutoffs(mut self, high_min_norm: Option<u64>, low_max_norm: Option<u64>) -> Self {
        self.cutoffs = MomentumCutoffs { high_min_norm, low_max_norm };
        self
    }

    pub fn with_level(mut self, level: LadderLevel) -> Self {
        self.level = level;
        self
    }

    pub fn with_normalization(mut self, normalization: BNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    fn coefficient(&self, v: &LatticeVector) -> Result<f64> {
        let c = self
            .coefficients
            .get(&v.norm_sq())
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("no coefficient for shell |n|^2 = {}", v.norm_sq())))?;
        if !c.is_finite() {
            return invalid(format!("coefficient for shell |n|^2 = {} is not finite", v.norm_sq()));
        }
        Ok(c)
    }
}

/// Largest shell norm with (2π)²|n|² <= N, the default low set of Ã.
pub fn low_momentum_norm(n: u32) -> u64 {
    (f64::from(n) / TWO_PI_SQ).floor() as u64
}

/// τ_p with tanh(2τ_p) = −8πa/(p² + 8πa) for each shell norm.
pub fn default_tau(a: f64, norms: &[u64]) -> BTreeMap<u64, f64> {
    let x = 8.0 * PI * a;
    norms.iter().map(|&k| (k, 0.5 * (-x / (TWO_PI_SQ * k as f64 + x)).atanh())).collect()
}

/// Anti-hermitian generator X − X† on an excitation basis.
pub fn build_generator(spec: &GeneratorSpec, basis: &Arc<FockBasis>, n: u32) -> Result<OperatorMatrix> {
    let needs_b = !(matches!(spec.kind, GeneratorKind::BEta | GeneratorKind::BTau) && spec.level == LadderLevel::A);
    let nb = excitation_n(basis);
    if needs_b {
        let nb = nb?;
        if nb != n {
            return invalid(format!("basis has N = {nb}, generator asked for N = {n}"));
        }
    } else if n < 1 {
        return invalid("N must be >= 1");
    }
    if !basis.modes().is_pairing_closed() {
        return invalid("generators need a mode set closed under p -> -p");
    }
    let modes = basis.modes();
    let c = spec.normalization.prefactor(n);
    let idx = |v: &LatticeVector| modes.index_of(v);
    let in_high = |v: &LatticeVector, default: bool| spec.cutoffs.high_min_norm.map_or(default, |h| v.norm_sq() >= h);

    let mut x: Vec<Term> = Vec::new();
    let mut dropped = 0u64;
    match spec.kind {
        GeneratorKind::BEta | GeneratorKind::BTau => {
            for (iq, q) in modes.modes().iter().enumerate() {
                if !in_high(q, true) {
                    continue;
                }
                let coef = spec.coefficient(q)?;
                let imq = idx(&-*q).expect("pairing closed");
                let word = match spec.level {
                    LadderLevel::A => Term::new(0.5 * coef, vec![Factor::Create(iq), Factor::Create(imq)]),
                    LadderLevel::B => Term::new(0.5 * coef * c * c, concat(&[b_dag_word(iq), b_dag_word(imq)])),
                };
                x.push(word);
            }
        }
        GeneratorKind::CubicA => {
            let (Some(high), Some(low)) = (spec.cutoffs.high_min_norm, spec.cutoffs.low_max_norm) else {
                return invalid("cubic_A needs both momentum cutoffs");
            };
            let pref = c / f64::from(n).sqrt();
            for r in modes.modes().iter().filter(|r| r.norm_sq() >= high) {
                let eta_r = spec.coefficient(r)?;
                for (iv, v) in modes.modes().iter().enumerate().filter(|(_, v)| v.norm_sq() <= low) {
                    match (idx(&(*r + *v)), idx(&-*r)) {
                        (Some(irv), Some(imr)) => x.push(Term::new(
                            pref * eta_r,
                            concat(&[b_dag_word(irv), vec![Factor::Create(imr), Factor::Annihilate(iv)]]),
                        )),
                        _ => dropped += 1,
                    }
                }
            }
        }
        GeneratorKind::CubicAtilde => {
            let low = spec.cutoffs.low_max_norm.unwrap_or_else(|| low_momentum_norm(n));
            let high = spec.cutoffs.high_min_norm.unwrap_or(low + 1);
            let pref = c * c * c / f64::from(n).sqrt();
            for r in modes.modes().iter().filter(|r| r.norm_sq() >= high) {
                let eta_r = spec.coefficient(r)?;
                for (iv, v) in modes.modes().iter().enumerate().filter(|(_, v)| v.norm_sq() <= low) {
                    let eta_v = spec.coefficient(v)?;
                    match (idx(&(*r + *v)), idx(&-*r), idx(&-*v)) {
                        (Some(irv), Some(imr), Some(imv)) => {
                            let head = concat(&[b_dag_word(irv), b_dag_word(imr)]);
                            x.push(Term::new(pref * eta_r * eta_v.sinh(), concat(&[head.clone(), b_dag_word(imv)])));
                            x.push(Term::new(pref * eta_r * eta_v.cosh(), concat(&[head, b_word(iv)])));
                        }
                        _ => dropped += 1,
                    }
                }
            }
        }
    }
    let mut terms = x.clone();
    terms.extend(x.iter().map(|t| {
        let mut a = t.adjoint();
        a.coefficient = -a.coefficient;
        a
    }));
    let g = OperatorMatrix::from_terms(basis, &terms).with_dropped_terms(dropped);
    let defect = g.antihermiticity_defect();
    if defect > 1e-12 * g.norm_bound().max(1.0) {
        return Err(Error::Numeric(format!("generator is not anti-hermitian: defect {defect:e}")));
    }
    Ok(g)
}

/// C_N = N^{-1/2} Σ_{p,q, q ≠ −p} V̂(p/N)[b†_{p+q} b†_{−p}(cosh η_q b_q + sinh η_q b†_{−q}) + h.c.].
pub fn build_cubic_cn(
    basis: &Arc<FockBasis>,
    n: u32,
    potential: &PotentialSpec,
    eta: &BTreeMap<u64, f64>,
    norm: BNormalization,
) -> Result<OperatorMatrix> {
    potential.validate()?;
    let nb = excitation_n(basis)?;
    if nb != n {
        return invalid(format!("basis has N = {nb}, operator asked for N = {n}"));
    }
    if !basis.modes().is_pairing_closed() {
        return invalid("C_N needs a mode set closed under p -> -p");
    }
    let modes = basis.modes();
    let c = norm.prefactor(n);
    let pref = c * c * c / f64::from(n).sqrt();
    let nf = f64::from(n);
    let mut x = Vec::new();
    let mut dropped = 0u64;
    for p in modes.modes() {
        let vp = potential.fourier_transform(p.momentum_abs() / nf);
        if vp == 0.0 {
            continue;
        }
        let imp = modes.index_of(&-*p).expect("pairing closed");
        for (iq, q) in modes.modes().iter().enumerate() {
            if *q == -*p {
                continue;
            }
            let eta_q = eta
                .get(&q.norm_sq())
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("no eta for shell |n|^2 = {}", q.norm_sq())))?;
            let imq = modes.index_of(&-*q).expect("pairing closed");
            match modes.index_of(&(*p + *q)) {
                Some(ipq) => {
                    let head = concat(&[b_dag_word(ipq), b_dag_word(imp)]);
                    x.push(Term::new(pref * vp * eta_q.cosh(), concat(&[head.clone(), b_word(iq)])));
                    x.push(Term::new(pref * vp * eta_q.sinh(), concat(&[head, b_dag_word(imq)])));
                }
                None => dropped += 1,
            }
        }
    }
    let mut terms = x.clone();
    terms.extend(x.iter().map(Term::adjoint));
    Ok(OperatorMatrix::from_terms(basis, &terms).with_dropped_terms(dropped))
}

/// Smooth partition f² + g² = 1 with f = 1 below ½ and f = 0 above 1.
pub trait LocalizationProfile {
    fn f(&self, x: f64) -> f64;
    fn g(&self, x: f64) -> f64;
}

/// f = cos(πs/2), g = sin(πs/2) with s a C^∞ step from ½ to 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothStepProfile;

impl SmoothStepProfile {
    fn step(x: f64) -> f64 {
        let t = 2.0 * x - 1.0;
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            let a = (-1.0 / t).exp();
            let b = (-1.0 / (1.0 - t)).exp();
            a / (a + b)
        }
    }
}

impl LocalizationProfile for SmoothStepProfile {
    fn f(&self, x: f64) -> f64 {
        (0.5 * PI * Self::step(x)).cos()
    }

    fn g(&self, x: f64) -> f64 {
        (0.5 * PI * Self::step(x)).sin()
    }
}

/// f(N₊/M) and g(N₊/M).
pub fn localization_ops<P: LocalizationProfile>(
    profile: &P,
    m: f64,
    basis: &Arc<FockBasis>,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if !(m.is_finite() && m > 0.0) {
        return invalid(format!("localization scale must be > 0, got {m}"));
    }
    let b = basis.clone();
    let f = OperatorMatrix::diagonal(basis, |s| profile.f(f64::from(b.excitation_count(s)) / m));
    let g = OperatorMatrix::diagonal(basis, |s| profile.g(f64::from(b.excitation_count(s)) / m));
    Ok((f, g))
}

/// A(a†ₚaₚ + a†₋ₚa₋ₚ) + B(a†ₚa†₋ₚ + a₋ₚaₚ).
pub fn pairing_hamiltonian(basis: &Arc<FockBasis>, p: &LatticeVector, a: f64, b: f64) -> Result<OperatorMatrix> {
    if p.is_zero() {
        return invalid("pairing needs a nonzero momentum");
    }
    let (i, j) = (mode_index(basis, p)?, mode_index(basis, &-*p)?);
    let pair = Term::new(b, vec![Factor::Create(i), Factor::Create(j)]);
    let terms = vec![
        Term::new(a, vec![Factor::Create(i), Factor::Annihilate(i)]),
        Term::new(a, vec![Factor::Create(j), Factor::Annihilate(j)]),
        pair.adjoint(),
        pair,
    ];
    Ok(OperatorMatrix::from_terms(basis, &terms))
}
