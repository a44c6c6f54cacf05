//! Conjugation flows: the transport flow generated by `i Op(β/(1+τβ_x) ξ)`
//! and the flow of a smoothing operator.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::cutoff::CutoffChi;
use super::operator::{bony_weyl, ModeOperator};
use super::symbol::SeparableSymbol;
use crate::error::{Error, Result};
use crate::spectral::{japanese, RealField};

/// Default number of RK4 steps in τ.
pub const TAU_STEPS: usize = 32;

/// Largest `h · ‖G‖₁` per RK4 step; finer steps are used when needed.
const STEP_BUDGET: f64 = 0.05;

/// An operator gaining `rho` derivatives, with
/// `|M_{j,k}| ≤ C ⟨min(|j-k|,|k|)⟩^μ ⟨max(|j-k|,|k|)⟩^{-ρ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingOperator {
    pub rho: f64,
    pub mu: f64,
    pub op: ModeOperator,
}

impl SmoothingOperator {
    /// Fails with [`Error::Reality`] unless `conj(M_{j,k}) = M_{-j,-k}`.
    pub fn new(rho: f64, mu: f64, op: ModeOperator) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::Parameter(format!("rho must be nonnegative, got {rho}")));
        }
        let scale = op.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let defect = op.reality_defect();
        if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Reality(format!("smoothing operator reality defect {defect:e}")));
        }
        Ok(Self { rho, mu, op })
    }

    /// Smallest `C` in the decay bound over the stored band.
    pub fn decay_constant(&self) -> f64 {
        let mut c = 0.0_f64;
        for j in self.op.modes() {
            for k in self.op.modes() {
                let (a, b) = ((j - k).abs() as f64, k.abs() as f64);
                let bound = japanese(a.min(b)).powf(self.mu) * japanese(a.max(b)).powf(-self.rho);
                c = c.max(self.op.entry(j, k).norm() / bound);
            }
        }
        c
    }
}

/// `exp(A)` by scaling and squaring of the Taylor series.
pub fn matrix_exp(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let n = a.nrows();
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        let size = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if size < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `Φ(τ) = exp(τQ)`.
pub fn flow_smoothing(q: &SmoothingOperator, tau: f64) -> Result<ModeOperator> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::Parameter(format!("tau must lie in [-1, 1], got {tau}")));
    }
    let a = q.op.matrix() * Complex64::new(tau, 0.0);
    ModeOperator::from_matrix(q.op.k_max(), matrix_exp(&a))
}

/// Time-one map of `∂_τ Φ = i Op(β/(1+τβ_x) ξ) Φ` and its inverse.
#[derive(Debug, Clone)]
pub struct TransportFlow {
    pub forward: ModeOperator,
    /// Obtained by integrating from τ = 1 back to τ = 0.
    pub inverse: ModeOperator,
    pub steps: usize,
}

impl TransportFlow {
    /// `max_k Σ_j |(Φ⁻¹Φ - Id)_{j,k}|`.
    pub fn inversion_defect(&self) -> f64 {
        self.inverse
            .compose(&self.forward)
            .add(&ModeOperator::identity(self.forward.k_max()), Complex64::new(-1.0, 0.0))
            .max_column_norm()
    }
}

/// Generator profile `β/(1+τβ_x)` on the grid of `beta`.
fn transport_profile(beta: &RealField, tau: f64) -> RealField {
    let dbeta = beta.spectral_derivative(1);
    let values: Vec<f64> = beta
        .values()
        .iter()
        .zip(dbeta.values())
        .map(|(b, db)| b / (1.0 + tau * db))
        .collect();
    RealField::analyze(&values).expect("grid already validated")
}

pub fn flow_transport(beta: &RealField, k_max: usize, tau_steps: usize, chi: CutoffChi) -> Result<TransportFlow> {
    let slope = beta.spectral_derivative(1).max_abs();
    if !(slope < 1.0) {
        return Err(Error::Generator(format!(
            "transport needs max|beta_x| < 1 for a diffeomorphism, got {slope}"
        )));
    }
    if tau_steps == 0 {
        return Err(Error::Parameter("tau_steps must be positive".into()));
    }
    let generator = |tau: f64| -> DMatrix<Complex64> {
        let sym = SeparableSymbol {
            profile: transport_profile(beta, tau),
            mult: |xi: f64| Complex64::new(0.0, xi),
        };
        bony_weyl(&sym, k_max, chi).into_matrix()
    };
    let size = |g: &DMatrix<Complex64>| {
        g.column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let g_max = size(&generator(0.0)).max(size(&generator(1.0)));
    let steps = tau_steps.max((g_max / STEP_BUDGET).ceil() as usize);
    let h = 1.0 / steps as f64;
    let gens: Vec<DMatrix<Complex64>> = (0..=2 * steps).map(|i| generator(i as f64 * h / 2.0)).collect();

    let d = 2 * k_max + 1;
    let stage = |phi: &DMatrix<Complex64>, g0: &DMatrix<Complex64>, gm: &DMatrix<Complex64>, g1: &DMatrix<Complex64>, h: f64| {
        let hc = |x: f64| Complex64::new(x, 0.0);
        let k1 = g0 * phi;
        let k2 = gm * (phi + &k1 * hc(h / 2.0));
        let k3 = gm * (phi + &k2 * hc(h / 2.0));
        let k4 = g1 * (phi + &k3 * hc(h));
        phi + (k1 + (k2 + k3) * hc(2.0) + k4) * hc(h / 6.0)
    };
    let mut forward = DMatrix::<Complex64>::identity(d, d);
    for s in 0..steps {
        forward = stage(&forward, &gens[2 * s], &gens[2 * s + 1], &gens[2 * s + 2], h);
    }
    let mut inverse = DMatrix::<Complex64>::identity(d, d);
    for s in (0..steps).rev() {
        inverse = stage(&inverse, &gens[2 * s + 2], &gens[2 * s + 1], &gens[2 * s], -h);
    }
    Ok(TransportFlow {
        forward: ModeOperator::from_matrix(k_max, forward)?,
        inverse: ModeOperator::from_matrix(k_max, inverse)?,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 3.0),
            Complex64::new(-2.0, 0.0),
        ]));
        let e = matrix_exp(&a);
        assert!((e[(0, 0)] - Complex64::new(0.0, 3.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - (-2f64).exp()).norm() < 1e-15);
        assert_eq!(e[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_generators_give_identity() {
        let beta = RealField::zeros(32).unwrap();
        let flow = flow_transport(&beta, 8, TAU_STEPS, CutoffChi::default()).unwrap();
        assert_eq!(flow.forward, ModeOperator::identity(8));
        let q = SmoothingOperator::new(2.0, 0.0, ModeOperator::zeros(8)).unwrap();
        assert_eq!(flow_smoothing(&q, 0.7).unwrap(), ModeOperator::identity(8));
    }

    #[test]
    fn steep_beta_is_rejected() {
        let beta = RealField::from_fn(32, |x| 0.5 * (3.0 * x).sin()).unwrap();
        assert!(matches!(
            flow_transport(&beta, 8, TAU_STEPS, CutoffChi::default()),
            Err(Error::Generator(_))
        ));
    }

    #[test]
    fn non_real_smoothing_is_rejected() {
        let mut op = ModeOperator::zeros(2);
        op.set(1, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(SmoothingOperator::new(1.0, 0.0, op), Err(Error::Reality(_))));
    }
}
