use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::operator::OperatorMatrix;
use crate::error::{invalid, Error, Result};

/// Largest dimension handled with dense matrices.
pub const DENSE_DIMENSION_CAP: usize = 4096;

fn dense_checked(op: &OperatorMatrix, what: &str) -> Result<DMatrix<f64>> {
    if op.dim() > DENSE_DIMENSION_CAP {
        return Err(Error::Resource(format!(
            "{what} needs dense storage; dimension {} exceeds {DENSE_DIMENSION_CAP}",
            op.dim()
        )));
    }
    Ok(op.to_dense())
}

/// e^G by scaling and squaring with a Padé approximant.
pub fn expm(g: &OperatorMatrix) -> Result<DMatrix<f64>> {
    let e = dense_checked(g, "expm")?.exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ConjugationMethod {
    ExactExpm,
    /// Σ_{k <= order} ad_G^k(H)/k!.
    TruncatedBch {
        order: usize,
    },
}

#[derive(Debug, Clone)]
pub struct Conjugated {
    pub operator: OperatorMatrix,
    /// ‖e^Gᵀe^G − 1‖ bound for the exact path.
    pub orthogonality_defect: Option<f64>,
    /// Norm bound of the first omitted series term.
    pub remainder_norm: Option<f64>,
}

/// e^{−G} H e^{G} for anti-hermitian G.
pub fn conjugate(h: &OperatorMatrix, g: &OperatorMatrix, method: ConjugationMethod) -> Result<Conjugated> {
    if h.dim() != g.dim() {
        return invalid("H and G act on different bases");
    }
    let defect = g.antihermiticity_defect();
    if defect > 1e-10 * g.norm_bound().max(1.0) {
        return invalid(format!("generator is not anti-hermitian (defect {defect:e})"));
    }
    match method {
        ConjugationMethod::ExactExpm => {
            let u = expm(g)?;
            let hd = dense_checked(h, "exact conjugation")?;
            let out = u.transpose() * hd * &u;
            let ortho = (u.transpose() * &u - DMatrix::identity(u.nrows(), u.ncols())).abs().max();
            Ok(Conjugated {
                operator: OperatorMatrix::from_dense(h.basis(), &out, 0.0),
                orthogonality_defect: Some(ortho),
                remainder_norm: None,
            })
        }
        ConjugationMethod::TruncatedBch { order } => {
            let mut term = h.clone();
            let mut acc = h.clone();
            for k in 1..=order {
                term = term.commutator(g).scale(1.0 / k as f64);
                acc = acc.add(&term);
            }
            let next = term.commutator(g).scale(1.0 / (order + 1) as f64);
            Ok(Conjugated { operator: acc, orthogonality_defect: None, remainder_norm: Some(next.norm_bound()) })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// ‖Hv − λv‖ for each returned pair.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<nalgebra::DVector<f64>>,
}

/// The k lowest eigenvalues of a hermitian operator.
pub fn exact_spectrum(h: &OperatorMatrix, k: usize) -> Result<Eigenpairs> {
    if k > h.dim() {
        return invalid(format!("asked for {k} eigenvalues of a {}-dimensional operator", h.dim()));
    }
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.norm_bound().max(1.0) {
        return invalid(format!("operator is not hermitian (defect {defect:e})"));
    }
    let hd = dense_checked(h, "exact_spectrum")?;
    let eig = SymmetricEigen::try_new(hd.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let lambda = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i).into_owned();
        residuals.push((&hd * &v - &v * lambda).norm());
        values.push(lambda);
        vectors.push(v);
    }
    Ok(Eigenpairs { values, residuals, vectors })
}
