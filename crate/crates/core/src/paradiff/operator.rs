//! Operators as dense matrices over the Fourier modes `[-K, K]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cutoff::CutoffChi;
use super::symbol::Symbol;
use crate::error::{Error, Result};
use crate::spectral::{japanese, RealField};

pub type ModeVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `A = (A_{j,k})`, acting by `(Av)_j = Σ_k A_{j,k} v_k` on modes `|j|, |k| ≤ K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    k_max: usize,
    matrix: DMatrix<Complex64>,
}

impl ModeOperator {
    pub fn zeros(k_max: usize) -> Self {
        let d = 2 * k_max + 1;
        Self {
            k_max,
            matrix: DMatrix::from_element(d, d, ZERO),
        }
    }

    pub fn identity(k_max: usize) -> Self {
        let d = 2 * k_max + 1;
        Self {
            k_max,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn from_matrix(k_max: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = 2 * k_max + 1;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Band(format!(
                "matrix is {}x{}, expected {d}x{d} for K = {k_max}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { k_max, matrix })
    }

    /// Diagonal operator `m(D)`.
    pub fn multiplier(k_max: usize, m: impl Fn(i64) -> Complex64) -> Self {
        let mut op = Self::zeros(k_max);
        for j in op.modes() {
            op.set(j, j, m(j));
        }
        op
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i64> {
        -(self.k_max as i64)..=self.k_max as i64
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    fn idx(&self, j: i64) -> usize {
        (j + self.k_max as i64) as usize
    }

    pub fn entry(&self, j: i64, k: i64) -> Complex64 {
        self.matrix[(self.idx(j), self.idx(k))]
    }

    pub fn set(&mut self, j: i64, k: i64, v: Complex64) {
        let (a, b) = (self.idx(j), self.idx(k));
        self.matrix[(a, b)] = v;
    }

    pub fn apply(&self, v: &ModeVector) -> ModeVector {
        &self.matrix * v
    }

    /// Applies to a real field, returning the output modes.
    pub fn apply_field(&self, u: &RealField) -> Result<ModeVector> {
        Ok(self.apply(&modes_of(u, self.k_max)?))
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.k_max, other.k_max, "band mismatch");
        Self {
            k_max: self.k_max,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn add(&self, other: &Self, scale: Complex64) -> Self {
        assert_eq!(self.k_max, other.k_max, "band mismatch");
        Self {
            k_max: self.k_max,
            matrix: &self.matrix + &other.matrix * scale,
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            k_max: self.k_max,
            matrix: &self.matrix * a,
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).add(&other.compose(self), Complex64::new(-1.0, 0.0))
    }

    /// Transpose for the pairing `∫ u v dx`: `(A^⊺)_{j,k} = A_{-k,-j}`.
    pub fn pairing_transpose(&self) -> Self {
        let mut out = Self::zeros(self.k_max);
        for j in self.modes() {
            for k in self.modes() {
                out.set(j, k, self.entry(-k, -j));
            }
        }
        out
    }

    /// `max_{j,k} |A_{-j,-k} - conj(A_{j,k})|`; zero for real-to-real operators.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in self.modes() {
            for k in self.modes() {
                worst = worst.max((self.entry(-j, -k) - self.entry(j, k).conj()).norm());
            }
        }
        worst
    }

    /// Largest entry in row 0 or column 0.
    pub fn zero_mode_leak(&self) -> f64 {
        self.modes()
            .map(|j| self.entry(0, j).norm().max(self.entry(j, 0).norm()))
            .fold(0.0, f64::max)
    }

    /// `max_k Σ_j |A_{j,k}|`.
    pub fn max_column_norm(&self) -> f64 {
        self.matrix
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Modes `[-K, K]` of a real field (`K < N/2`).
pub fn modes_of(u: &RealField, k_max: usize) -> Result<ModeVector> {
    if k_max as i64 > u.max_mode() {
        return Err(Error::Domain(format!(
            "K = {k_max} exceeds the resolved band of an {}-point field",
            u.n_modes()
        )));
    }
    Ok(DVector::from_iterator(
        2 * k_max + 1,
        (-(k_max as i64)..=k_max as i64).map(|j| u.coeff(j)),
    ))
}

/// Unit vector `e^{ikx}`.
pub fn mode_unit(k_max: usize, k: i64) -> ModeVector {
    let mut v = DVector::from_element(2 * k_max + 1, ZERO);
    v[(k + k_max as i64) as usize] = Complex64::new(1.0, 0.0);
    v
}

/// `(Σ ⟨j⟩^{2s} |v_j|²)^{1/2}`.
pub fn hs_norm_modes(v: &ModeVector, s: f64) -> f64 {
    let k = (v.len() / 2) as i64;
    v.iter()
        .enumerate()
        .map(|(i, z)| japanese((i as i64 - k) as f64).powf(2.0 * s) * z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Random real-field modes with `‖v‖_s = 1`.
pub fn random_unit_modes(k_max: usize, s: f64, rng: &mut impl Rng) -> ModeVector {
    let mut v = DVector::from_element(2 * k_max + 1, ZERO);
    for j in 1..=k_max as i64 {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            * japanese(j as f64).powf(-s);
        v[(k_max as i64 + j) as usize] = z;
        v[(k_max as i64 - j) as usize] = z.conj();
    }
    v[k_max] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    let norm = hs_norm_modes(&v, s);
    v / Complex64::new(norm, 0.0)
}

/// Bony-Weyl quantization on modes `[-K, K]`:
/// `A_{j,k} = χ_δ((j-k)/⟨j+k⟩) â_{j-k}((j+k)/2)`.
///
/// Normalised so that `Op(1) = Id` and `Op(m(ξ)) = m(D)`.
pub fn bony_weyl(symbol: &(impl Symbol + ?Sized), k_max: usize, chi: CutoffChi) -> ModeOperator {
    let k = k_max as i64;
    let n_max = 2 * k_max;
    // one coefficient table per midpoint (j+k)/2, indexed by j+k+2K
    let tables: Vec<Vec<Complex64>> = (-2 * k..=2 * k)
        .into_par_iter()
        .map(|sum| symbol.coeffs_at(sum as f64 / 2.0, n_max))
        .collect();
    let rows: Vec<Vec<Complex64>> = (-k..=k)
        .into_par_iter()
        .map(|j| {
            (-k..=k)
                .map(|col| {
                    let weight = chi.eval((j - col) as f64 / japanese((j + col) as f64));
                    if weight == 0.0 {
                        ZERO
                    } else {
                        weight * tables[(j + col + 2 * k) as usize][(j - col + 2 * k) as usize]
                    }
                })
                .collect()
        })
        .collect();
    let d = 2 * k_max + 1;
    ModeOperator {
        k_max,
        matrix: DMatrix::from_fn(d, d, |a, b| rows[a][b]),
    }
}

/// `max ‖Av‖_{s-m} / ‖v‖_s` over `trials` random real inputs.
pub fn action_bound_probe(op: &ModeOperator, m: f64, s: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let v = random_unit_modes(op.k_max(), s, &mut rng);
            hs_norm_modes(&op.apply(&v), s - m)
        })
        .fold(0.0, f64::max)
}

/// Commutator `[Op(a), m(D)]` against its predicted principal part, on
/// single modes `k` and `2k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorReport {
    pub k: i64,
    /// `‖(C - P)e_k‖ / ‖P e_k‖`.
    pub ratio_k: f64,
    pub ratio_2k: f64,
    /// `‖C e_k‖` and `‖C e_{2k}‖` in `ℓ²`.
    pub size_k: f64,
    pub size_2k: f64,
}

impl CommutatorReport {
    /// `log₂(‖C e_{2k}‖ / ‖C e_k‖)`.
    pub fn measured_order(&self) -> f64 {
        (self.size_2k / self.size_k).log2()
    }

    /// Gain in order of the residual over the principal part.
    pub fn order_drop(&self) -> f64 {
        (self.ratio_k / self.ratio_2k).log2()
    }
}

pub fn commutator_order_check(
    symbol: &(impl Symbol + ?Sized),
    mult: impl Fn(f64) -> f64 + Sync,
    mult_derivative: impl Fn(f64) -> f64 + Sync,
    k: i64,
    k_max: usize,
    chi: CutoffChi,
) -> Result<CommutatorReport> {
    if k <= 0 || 2 * k > k_max as i64 {
        return Err(Error::Domain(format!("modes {k} and {} must lie in 1..={k_max}", 2 * k)));
    }
    let a = bony_weyl(symbol, k_max, chi);
    let m = ModeOperator::multiplier(k_max, |j| Complex64::new(mult(j as f64), 0.0));
    let exact = a.commutator(&m);
    let principal = bony_weyl(
        &super::symbol::BracketPrincipal {
            symbol,
            mult_derivative,
        },
        k_max,
        chi,
    );
    let probe = |kk: i64| {
        let e = mode_unit(k_max, kk);
        let c = exact.apply(&e);
        let p = principal.apply(&e);
        ((&c - &p).norm() / p.norm(), c.norm())
    };
    let (ratio_k, size_k) = probe(k);
    let (ratio_2k, size_2k) = probe(2 * k);
    Ok(CommutatorReport {
        k,
        ratio_k,
        ratio_2k,
        size_k,
        size_2k,
    })
}
