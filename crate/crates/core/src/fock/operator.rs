use std::io::{self, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CscMatrix, CsrMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{FockBasis, Sector};

/// One factor of an operator word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// a† on the mode with this index.
    Create(usize),
    /// a on the mode with this index.
    Annihilate(usize),
    /// (N − N₊)^{1/2}, with N taken from the basis sector.
    Depletion,
}

/// coefficient × product of factors, the rightmost applied first.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub factors: Vec<Factor>,
}

impl Term {
    pub fn new(coefficient: f64, factors: Vec<Factor>) -> Self {
        Term { coefficient, factors }
    }

    pub fn adjoint(&self) -> Term {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|f| match *f {
                Factor::Create(i) => Factor::Annihilate(i),
                Factor::Annihilate(i) => Factor::Create(i),
                Factor::Depletion => Factor::Depletion,
            })
            .collect();
        Term { coefficient: self.coefficient, factors }
    }

    fn apply(&self, state: &[u32], n_total: f64, zero: Option<usize>) -> Option<(Vec<u32>, f64)> {
        let mut occ = state.to_vec();
        let mut amp = self.coefficient;
        for f in self.factors.iter().rev() {
            match *f {
                Factor::Annihilate(i) => {
                    if occ[i] == 0 {
                        return None;
                    }
                    amp *= f64::from(occ[i]).sqrt();
                    occ[i] -= 1;
                }
                Factor::Create(i) => {
                    occ[i] += 1;
                    amp *= f64::from(occ[i]).sqrt();
                }
                Factor::Depletion => {
                    let n_plus: u32 = occ.iter().enumerate().filter(|(j, _)| Some(*j) != zero).map(|(_, n)| n).sum();
                    let d = n_total - f64::from(n_plus);
                    if d <= 0.0 {
                        return None;
                    }
                    amp *= d.sqrt();
                }
            }
        }
        (amp != 0.0).then_some((occ, amp))
    }
}

/// Real operator on a [`FockBasis`], stored sparse (CSR).
///
/// Operators built from words are compressions P·O·P of the full Fock-space
/// operator to the basis: amplitudes landing outside it are discarded and
/// counted in `leaked_amplitudes`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    basis: Arc<FockBasis>,
    matrix: CsrMatrix<f64>,
    dropped_terms: u64,
    leaked_amplitudes: u64,
}

/// Metadata written next to a triplet export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorHeader {
    pub basis: String,
    pub sector: Sector,
    pub dimension: usize,
    pub nonzeros: usize,
    pub hermiticity_defect: f64,
    pub dropped_terms: u64,
    pub leaked_amplitudes: u64,
    pub format: String,
}

impl OperatorMatrix {
    /// Σ terms, assembled column by column.
    pub fn from_terms(basis: &Arc<FockBasis>, terms: &[Term]) -> Self {
        let dim = basis.dim();
        let n_total = f64::from(basis.particle_number().unwrap_or(0));
        let zero = basis.modes().zero_index();
        let columns: Vec<(Vec<(usize, f64)>, u64)> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut col = Vec::new();
                let mut leaked = 0;
                for t in terms {
                    if let Some((occ, amp)) = t.apply(basis.state(j), n_total, zero) {
                        match basis.index_of(&occ) {
                            Some(i) => col.push((i, amp)),
                            None => leaked += 1,
                        }
                    }
                }
                col.sort_by_key(|&(i, _)| i);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
                for (i, v) in col {
                    match merged.last_mut() {
                        Some(last) if last.0 == i => last.1 += v,
                        _ => merged.push((i, v)),
                    }
                }
                merged.retain(|&(_, v)| v != 0.0);
                (merged, leaked)
            })
            .collect();
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut rows = Vec::new();
        let mut values = Vec::new();
        let mut leaked = 0;
        offsets.push(0);
        for (col, l) in columns {
            leaked += l;
            for (i, v) in col {
                rows.push(i);
                values.push(v);
            }
            offsets.push(rows.len());
        }
        let csc = CscMatrix::try_from_csc_data(dim, dim, offsets, rows, values).expect("sorted column data");
        OperatorMatrix {
            basis: basis.clone(),
            matrix: CsrMatrix::from(&csc),
            dropped_terms: 0,
            leaked_amplitudes: leaked,
        }
    }

    pub fn from_csr(basis: &Arc<FockBasis>, matrix: CsrMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), basis.dim());
        assert_eq!(matrix.ncols(), basis.dim());
        OperatorMatrix { basis: basis.clone(), matrix, dropped_terms: 0, leaked_amplitudes: 0 }
    }

    /// Entries with |x| <= `drop_below` are not stored.
    pub fn from_dense(basis: &Arc<FockBasis>, dense: &DMatrix<f64>, drop_below: f64) -> Self {
        let dim = basis.dim();
        assert_eq!(dense.shape(), (dim, dim));
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = dense[(i, j)];
                if v.abs() > drop_below {
                    cols.push(j);
                    values.push(v);
                }
            }
            offsets.push(cols.len());
        }
        let m = CsrMatrix::try_from_csr_data(dim, dim, offsets, cols, values).expect("row-major data");
        Self::from_csr(basis, m)
    }

    /// Diagonal operator with entries `f(state)`.
    pub fn diagonal<F: Fn(&[u32]) -> f64>(basis: &Arc<FockBasis>, f: F) -> Self {
        let dim = basis.dim();
        let d: Vec<f64> = basis.states().iter().map(|s| f(s)).collect();
        let m = CsrMatrix::try_from_csr_data(dim, dim, (0..=dim).collect(), (0..dim).collect(), d).expect("diagonal");
        Self::from_csr(basis, m)
    }

    pub fn zeros(basis: &Arc<FockBasis>) -> Self {
        Self::from_csr(basis, CsrMatrix::zeros(basis.dim(), basis.dim()))
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        Self::diagonal(basis, |_| 1.0)
    }

    pub(crate) fn with_dropped_terms(mut self, dropped: u64) -> Self {
        self.dropped_terms = dropped;
        self
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn csr(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    /// Interaction or generator terms left out because a momentum fell
    /// outside the mode set.
    pub fn dropped_terms(&self) -> u64 {
        self.dropped_terms
    }

    pub fn leaked_amplitudes(&self) -> u64 {
        self.leaked_amplitudes
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get_entry(i, j).map_or(0.0, |e| e.into_value())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim(), self.dim());
        for (i, j, v) in self.matrix.triplet_iter() {
            d[(i, j)] = *v;
        }
        d
    }

    fn same(&self, m: CsrMatrix<f64>) -> Self {
        OperatorMatrix { basis: self.basis.clone(), matrix: m, dropped_terms: 0, leaked_amplitudes: 0 }
    }

    fn check_basis(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis,
            "operators act on different bases"
        );
    }

    pub fn transpose(&self) -> Self {
        self.same(self.matrix.transpose())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_basis(other);
        self.same(&self.matrix + &other.matrix)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_basis(other);
        self.same(&self.matrix - &other.matrix)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.same(&self.matrix * c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_basis(other);
        self.same(&self.matrix * &other.matrix)
    }

    /// [self, other].
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// √(‖A‖₁‖A‖∞), an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let mut col = vec![0.0; self.dim()];
        let mut row = vec![0.0; self.dim()];
        for (i, j, v) in self.matrix.triplet_iter() {
            row[i] += v.abs();
            col[j] += v.abs();
        }
        let one = col.iter().fold(0.0f64, |m, v| m.max(*v));
        let inf = row.iter().fold(0.0f64, |m, v| m.max(*v));
        (one * inf).sqrt()
    }

    /// Norm bound of A − Aᵀ.
    pub fn hermiticity_defect(&self) -> f64 {
        self.sub(&self.transpose()).norm_bound()
    }

    /// Norm bound of A + Aᵀ.
    pub fn antihermiticity_defect(&self) -> f64 {
        self.add(&self.transpose()).norm_bound()
    }

    pub fn header(&self) -> OperatorHeader {
        OperatorHeader {
            basis: self.basis.descriptor(),
            sector: self.basis.sector(),
            dimension: self.dim(),
            nonzeros: self.nnz(),
            hermiticity_defect: self.hermiticity_defect(),
            dropped_terms: self.dropped_terms,
            leaked_amplitudes: self.leaked_amplitudes,
            format: "row col value, zero-based, one entry per line, row-major".into(),
        }
    }

    /// Sparse triplets `row col value`, row-major.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (i, j, v) in self.matrix.triplet_iter() {
            writeln!(w, "{i} {j} {v:.17e}")?;
        }
        Ok(())
    }
}
