//! Dense determinants and solves (LU with partial pivoting) and a GF(2) linear solver.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::{Error, Result};

/// Default bound on matrix dimension; `ISODIMER_MAX_DIM` overrides it.
pub const DEFAULT_MAX_DIM: usize = 4096;

pub fn max_dim() -> usize {
    std::env::var("ISODIMER_MAX_DIM").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_MAX_DIM)
}

pub fn check_dim(dim: usize) -> Result<()> {
    let limit = max_dim();
    if dim > limit {
        return Err(Error::TooLarge { dim, limit });
    }
    Ok(())
}

pub fn det<T: ComplexField>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::one();
    }
    m.clone().lu().determinant()
}

/// LU factorization reused for several right-hand sides.
pub struct Lu<T: ComplexField> {
    lu: nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<T: ComplexField> Lu<T> {
    pub fn new(m: &DMatrix<T>) -> Self {
        Lu { lu: m.clone().lu() }
    }

    pub fn determinant(&self) -> T {
        self.lu.determinant()
    }

    /// Solves `A x = e_j`, i.e. returns column `j` of the inverse.
    pub fn inverse_column(&self, j: usize) -> Option<DVector<T>> {
        let n = self.lu.l().nrows();
        let mut e = DVector::zeros(n);
        e[j] = T::one();
        self.lu.solve(&e)
    }
}

/// Solves `A x = b` over GF(2); rows are bit vectors over `nvars` unknowns.
/// Returns one solution with free variables set to zero.
pub fn solve_gf2(rows: &[Vec<usize>], rhs: &[bool], nvars: usize) -> Option<Vec<bool>> {
    let words = nvars.div_ceil(64) + 1;
    let rhs_bit = nvars;
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut v = vec![0u64; words];
            for &c in r {
                v[c / 64] ^= 1 << (c % 64);
            }
            if b {
                v[rhs_bit / 64] ^= 1 << (rhs_bit % 64);
            }
            v
        })
        .collect();
    let get = |v: &Vec<u64>, c: usize| (v[c / 64] >> (c % 64)) & 1 == 1;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..nvars {
        let Some(p) = (row..m.len()).find(|&r| get(&m[r], col)) else { continue };
        m.swap(row, p);
        let pivot = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && get(other, col) {
                for (a, b) in other.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| get(r, rhs_bit)) {
        return None;
    }
    let mut x = vec![false; nvars];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = get(&m[r], rhs_bit);
    }
    Some(x)
}

pub fn permutation_sign(p: &[usize]) -> f64 {
    let mut seen = vec![false; p.len()];
    let mut sign = 1.0;
    for i in 0..p.len() {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            j = p[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}
