//! Truncated bosonic Fock spaces over a finite set of torus momenta, the
//! second-quantized Hamiltonian, the excitation map, quadratic and cubic
//! generators, unitary conjugation and exact diagonalization.

mod basis;
mod linalg;
mod operator;
mod ops;

pub use basis::{sector_dimension, FockBasis, ModeSet, Sector, DEFAULT_DIMENSION_CAP};
pub use linalg::{conjugate, exact_spectrum, expm, Conjugated, ConjugationMethod, Eigenpairs, DENSE_DIMENSION_CAP};
pub use operator::{Factor, OperatorHeader, OperatorMatrix, Term};
pub use ops::{
    build_cubic_cn, build_generator, build_hamiltonian, default_tau, excitation_number, hopping, ladder_ops,
    localization_ops, low_momentum_norm, pairing_hamiltonian, BNormalization, ExcitationMap, Flavor, GeneratorKind,
    GeneratorSpec, LadderLevel, LocalizationProfile, MomentumCutoffs, SmoothStepProfile, SubstitutionDefects,
};
