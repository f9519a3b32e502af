//! Sparse direct solve with symmetric diagonal scaling.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, NumericLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Par};

use crate::dgspace::DgTriple;
use crate::error::{Error, Result};

use super::LinearSystem;

/// Largest accepted relative residual `||A x - b|| / ||b||`.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

/// Discrete solution and the relative residual of the unscaled system.
#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub solution: DgTriple,
    pub residual: f64,
}

/// Solves `A x = b` via `D^{-1/2} A D^{-1/2} y = D^{-1/2} b`, `x = D^{-1/2} y`.
///
/// Factorization and triangular solves run single-threaded so repeated runs
/// give bit-identical results.
pub fn solve(system: &LinearSystem) -> Result<SolveOutput> {
    let dim = system.dim();
    let inv_sqrt: Vec<f64> = system.scaling.iter().map(|d| 1.0 / d.sqrt()).collect();

    let sym = system.matrix.symbolic();
    let col_ptr = sym.col_ptr();
    let row_idx = sym.row_idx();
    let val = system.matrix.val();
    let mut trips = Vec::with_capacity(val.len());
    for c in 0..dim {
        for p in col_ptr[c]..col_ptr[c + 1] {
            let r = row_idx[p];
            trips.push(Triplet::new(r, c, val[p] * inv_sqrt[r] * inv_sqrt[c]));
        }
    }
    let scaled = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &trips)
        .map_err(|e| Error::SingularMatrix(format!("could not build scaled matrix: {e:?}")))?;

    let symbolic = factorize_symbolic_lu(scaled.symbolic(), Default::default())
        .map_err(|e| Error::SingularMatrix(format!("symbolic factorization failed: {e:?}")))?;
    let mut numeric = NumericLu::<usize, f64>::new();
    let lu = {
        let mut buf = MemBuffer::new(
            symbolic.factorize_numeric_lu_scratch::<f64>(Par::Seq, Default::default()),
        );
        symbolic
            .factorize_numeric_lu(
                &mut numeric,
                scaled.as_ref(),
                Par::Seq,
                MemStack::new(&mut buf),
                Default::default(),
            )
            .map_err(|e| Error::SingularMatrix(format!("numeric factorization failed: {e:?}")))?
    };

    let mut rhs = Mat::<f64>::from_fn(dim, 1, |r, _| system.rhs[r] * inv_sqrt[r]);
    {
        let mut buf = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
        lu.solve_in_place_with_conj(Conj::No, rhs.as_mut(), Par::Seq, MemStack::new(&mut buf));
    }
    let x: Vec<f64> = (0..dim).map(|r| rhs[(r, 0)] * inv_sqrt[r]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("solution has non-finite entries".into()));
    }

    let ax = system.apply(&x)?;
    let res_norm = ax
        .iter()
        .zip(&system.rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let rhs_norm = system.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    let residual = if rhs_norm > 0.0 { res_norm / rhs_norm } else { res_norm };
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge { residual });
    }
    let solution = DgTriple::from_vector(system.mesh.clone(), system.degree, &x)?;
    Ok(SolveOutput { solution, residual })
}
