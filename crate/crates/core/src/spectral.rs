//! Real 2π-periodic fields held jointly as grid samples and Fourier
//! coefficients.
//!
//! Coefficients follow `u_j = (1/2π) ∫ u(x) e^{-ijx} dx`, so a field with
//! samples `u(x_m)`, `x_m = 2πm/N`, has `u_j = (1/N) Σ_m u(x_m) e^{-ijx_m}`.
//! The stored band is `j ∈ [-N/2, N/2)` with the Nyquist mode always zero.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Unnormalised in-place forward DFT.
pub(crate) fn forward_fft(buf: &mut [Complex64]) {
    forward_plan(buf.len()).process(buf);
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Smallest grid accepted by [`RealField::analyze`].
pub const MIN_MODES: usize = 8;

/// Sobolev regularity index `s ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(Self(s))
        } else {
            Err(Error::Parameter(format!("Sobolev index must be >= 0, got {s}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `⟨j⟩ = max(1, |j|)`.
#[inline]
pub fn japanese(j: f64) -> f64 {
    j.abs().max(1.0)
}

/// Index of mode `j` in FFT storage order.
#[inline]
fn slot(n: usize, j: i64) -> usize {
    j.rem_euclid(n as i64) as usize
}

/// Signed wavenumber stored at FFT slot `idx`.
#[inline]
pub fn wavenumber(n: usize, idx: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < MIN_MODES || n % 2 != 0 {
        return Err(Error::Config(format!(
            "grid size must be even and >= {MIN_MODES}, got {n}"
        )));
    }
    Ok(())
}

/// A real periodic scalar. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    coeffs: Vec<Complex64>,
    values: Vec<f64>,
}

impl RealField {
    /// Samples on the uniform grid `x_m = 2πm/N` → Fourier coefficients.
    pub fn analyze(values: &[f64]) -> Result<Self> {
        let n = values.len();
        check_size(n)?;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward_plan(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(Self::from_raw(buf))
    }

    /// Field whose grid values are `f(x_m)`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_size(n)?;
        let values: Vec<f64> = grid(n).map(f).collect();
        Self::analyze(&values)
    }

    /// Field with prescribed coefficients `j ↦ u_j` for `j ∈ [-N/2, N/2)`.
    ///
    /// Fails with [`Error::Reality`] if the data is not Hermitian.
    pub fn from_coeffs(n: usize, coeff: impl Fn(i64) -> Complex64) -> Result<Self> {
        check_size(n)?;
        let buf: Vec<Complex64> = (0..n).map(|i| coeff(wavenumber(n, i))).collect();
        let scale = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for i in 1..n / 2 {
            worst = worst.max((buf[i] - buf[n - i].conj()).norm());
        }
        worst = worst.max(buf[0].im.abs());
        if worst > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Reality(format!(
                "coefficients violate conj(u_j) = u_-j by {worst:e}"
            )));
        }
        Ok(Self::from_raw(buf))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
            values: vec![0.0; n],
        })
    }

    /// Builds from FFT-ordered coefficients, enforcing Hermitian symmetry and a
    /// zero Nyquist mode.
    pub(crate) fn from_raw(mut buf: Vec<Complex64>) -> Self {
        let n = buf.len();
        buf[0].im = 0.0;
        buf[n / 2] = Complex64::new(0.0, 0.0);
        for i in 1..n / 2 {
            let c = 0.5 * (buf[i] + buf[n - i].conj());
            buf[i] = c;
            buf[n - i] = c.conj();
        }
        let values = synthesize(&buf);
        Self { coeffs: buf, values }
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `e^{ijx}`; zero outside the stored band.
    pub fn coeff(&self, j: i64) -> Complex64 {
        let n = self.n_modes() as i64;
        if j < -n / 2 || j >= n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[slot(self.n_modes(), j)]
        }
    }

    /// Coefficients in FFT storage order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest resolved wavenumber, `N/2 - 1`.
    pub fn max_mode(&self) -> i64 {
        self.n_modes() as i64 / 2 - 1
    }

    /// `‖u‖_s = (Σ ⟨j⟩^{2s} |u_j|²)^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let n = self.n_modes();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| japanese(wavenumber(n, i) as f64).powf(2.0 * s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖u‖_{L²(T)} = (2π Σ |u_j|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Largest deviation from `coeff(-j) = conj(coeff(j))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n_modes();
        (1..n / 2)
            .map(|i| (self.coeffs[n - i] - self.coeffs[i].conj()).norm())
            .fold(self.coeffs[0].im.abs(), f64::max)
    }

    pub fn project_zero_mean(&self) -> Self {
        let mut c = self.coeffs.clone();
        c[0] = Complex64::new(0.0, 0.0);
        Self::from_raw(c)
    }

    /// `∂_x^order`: coefficient `j` is multiplied by `(ij)^order`.
    pub fn spectral_derivative(&self, order: u32) -> Self {
        let n = self.n_modes();
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::new(0.0, wavenumber(n, i) as f64).powu(order))
            .collect();
        Self::from_raw(c)
    }

    /// Fourier multiplier `m(D)`. The multiplier must satisfy
    /// `m(-j) = conj(m(j))` on the resolved band for the result to be real.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Result<Self> {
        let n = self.n_modes();
        let table: Vec<Complex64> = (0..n).map(|i| m(wavenumber(n, i) as f64)).collect();
        let scale = table.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for i in 1..n / 2 {
            let defect = (table[n - i] - table[i].conj()).norm();
            if defect > 1e-12 * scale.max(1.0) {
                return Err(Error::Reality(format!(
                    "multiplier at ξ = ±{i} breaks m(-ξ) = conj(m(ξ)) by {defect:e}"
                )));
            }
        }
        if table[0].im.abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::Reality("multiplier is not real at ξ = 0".into()));
        }
        let c = self.coeffs.iter().zip(&table).map(|(c, m)| c * m).collect();
        Ok(Self::from_raw(c))
    }

    /// Real multiplier that is even in ξ; cannot fail.
    pub fn apply_even_multiplier(&self, m: impl Fn(f64) -> f64) -> Self {
        let n = self.n_modes();
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m((wavenumber(n, i) as f64).abs()))
            .collect();
        Self::from_raw(c)
    }

    /// 2/3-rule: zero every mode with `|j| > N/3`.
    pub fn dealias(&self) -> Self {
        let n = self.n_modes();
        let cut = (n / 3) as i64;
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if wavenumber(n, i).abs() > cut {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect();
        Self::from_raw(c)
    }

    /// Same function on an `m`-point grid (zero padding or truncation).
    pub fn resample(&self, m: usize) -> Result<Self> {
        check_size(m)?;
        let half = (m.min(self.n_modes()) / 2) as i64;
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        for j in -half + 1..half {
            c[slot(m, j)] = self.coeff(j);
        }
        Ok(Self::from_raw(c))
    }

    /// `u(· + θ)`.
    pub fn shift(&self, theta: f64) -> Self {
        let n = self.n_modes();
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex64::from_polar(1.0, wavenumber(n, i) as f64 * theta))
            .collect();
        Self::from_raw(c)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.n_modes(), other.n_modes(), "grid mismatch");
        let c = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_raw(c)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_raw(self.coeffs.iter().map(|c| a * c).collect())
    }

    /// Pointwise map on grid values, re-analysed.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let v: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        Self::analyze(&v).expect("grid size already validated")
    }
}

/// Uniform grid nodes `2πm/N`.
pub fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |m| 2.0 * PI * m as f64 / n as f64)
}

/// Grid values from FFT-ordered coefficients.
pub fn synthesize(coeffs: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    inverse_plan(n).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cosine_has_two_half_modes() {
        let u = RealField::from_fn(16, f64::cos).unwrap();
        assert!((u.coeff(1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((u.coeff(-1) - c(0.5, 0.0)).norm() < 1e-15);
        for j in -8i64..8 {
            if j.abs() != 1 {
                assert!(u.coeff(j).norm() < 1e-15, "mode {j}");
            }
        }
    }

    #[test]
    fn constant_and_sine() {
        let one = RealField::from_fn(16, |_| 1.0).unwrap();
        assert!((one.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(one.coeffs()[1..].iter().all(|z| z.norm() < 1e-15));

        let s3 = RealField::from_fn(16, |x| (3.0 * x).sin()).unwrap();
        assert!((s3.coeff(3) - c(0.0, -0.5)).norm() < 1e-15);
        assert!((s3.coeff(-3) - c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(RealField::analyze(&[0.0; 7]), Err(Error::Config(_))));
        assert!(matches!(RealField::analyze(&[0.0; 6]), Err(Error::Config(_))));
        assert!(RealField::analyze(&[0.0; 8]).is_ok());
    }

    #[test]
    fn nyquist_is_dropped() {
        let v: Vec<f64> = (0..16).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let u = RealField::analyze(&v).unwrap();
        assert_eq!(u.coeff(-8), c(0.0, 0.0));
        assert!(u.max_abs() < 1e-15);
    }

    #[test]
    fn hs_norm_examples() {
        for j in 1..6 {
            let u = RealField::from_fn(32, |x| (j as f64 * x).cos()).unwrap();
            for s in [0.0, 1.0, 2.5] {
                let expect = (j as f64).powf(s) / 2f64.sqrt();
                assert!((u.hs_norm(s) - expect).abs() < 1e-13 * expect);
            }
        }
        assert_eq!(RealField::zeros(16).unwrap().hs_norm(3.0), 0.0);
        let u = RealField::from_fn(32, |x| x.cos() + (4.0 * x).cos()).unwrap();
        let expect = (0.5 + 4f64.powi(4) / 2.0).sqrt();
        assert!((u.hs_norm(2.0) - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn zero_mean_projection() {
        let k = RealField::from_fn(16, |_| 3.5).unwrap().project_zero_mean();
        assert!(k.max_abs() < 1e-15);
        let u = RealField::from_fn(16, |x| 1.0 + x.cos()).unwrap();
        let p = u.project_zero_mean();
        let cosx = RealField::from_fn(16, f64::cos).unwrap();
        assert!(p.combine(1.0, &cosx, -1.0).max_abs() < 1e-15);
        assert_eq!(p.project_zero_mean(), p);
    }

    #[test]
    fn derivatives() {
        let d = RealField::from_fn(16, f64::cos).unwrap().spectral_derivative(1);
        let minus_sin = RealField::from_fn(16, |x| -x.sin()).unwrap();
        assert!(d.combine(1.0, &minus_sin, -1.0).max_abs() < 1e-14);

        let k = RealField::from_fn(16, |_| 2.0).unwrap();
        assert!(k.spectral_derivative(3).max_abs() < 1e-15);

        let s2 = RealField::from_fn(16, |x| (2.0 * x).sin()).unwrap();
        let dd = s2.spectral_derivative(2);
        assert!(dd.combine(1.0, &s2, 4.0).max_abs() < 1e-13);
    }

    #[test]
    fn multipliers() {
        let u = RealField::from_fn(16, f64::cos).unwrap();
        assert_eq!(u.apply_multiplier(|_| c(1.0, 0.0)).unwrap(), u);
        let d = u.apply_multiplier(|xi| c(0.0, xi)).unwrap();
        let minus_sin = RealField::from_fn(16, |x| -x.sin()).unwrap();
        assert!(d.combine(1.0, &minus_sin, -1.0).max_abs() < 1e-14);

        let c4 = RealField::from_fn(16, |x| (4.0 * x).cos()).unwrap();
        let r = c4.apply_multiplier(|xi| c(xi.abs().sqrt(), 0.0)).unwrap();
        assert!(r.combine(1.0, &c4, -2.0).max_abs() < 1e-14);

        let bad = u.apply_multiplier(|xi| c(0.0, xi.abs()));
        assert!(matches!(bad, Err(Error::Reality(_))));
    }

    #[test]
    fn from_coeffs_checks_reality() {
        let bad = RealField::from_coeffs(16, |j| if j == 2 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(bad, Err(Error::Reality(_))));
        let good =
            RealField::from_coeffs(16, |j| if j.abs() == 2 { c(0.5, 0.0) } else { c(0.0, 0.0) });
        assert!(good.is_ok());
    }

    #[test]
    fn dealias_keeps_lower_two_thirds() {
        let u = RealField::from_fn(24, |x| x.cos() + (8.0 * x).cos() + (9.0 * x).cos()).unwrap();
        let d = u.dealias();
        assert!((d.coeff(8) - c(0.5, 0.0)).norm() < 1e-14);
        assert_eq!(d.coeff(9), c(0.0, 0.0));
    }

    #[test]
    fn resample_and_shift() {
        let u = RealField::from_fn(16, |x| (3.0 * x).sin() + 0.2).unwrap();
        let up = u.resample(64).unwrap();
        let direct = RealField::from_fn(64, |x| (3.0 * x).sin() + 0.2).unwrap();
        assert!(up.combine(1.0, &direct, -1.0).max_abs() < 1e-14);
        let back = up.resample(16).unwrap();
        assert!(back.combine(1.0, &u, -1.0).max_abs() < 1e-14);

        let sh = u.shift(0.7);
        let expect = RealField::from_fn(16, |x| (3.0 * (x + 0.7)).sin() + 0.2).unwrap();
        assert!(sh.combine(1.0, &expect, -1.0).max_abs() < 1e-14);
    }

    fn band_limited(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0..1.0f64, 2 * (n / 2 - 1) + 1).prop_map(move |r| {
            let half = n / 2 - 1;
            let coeffs = move |j: i64| -> Complex64 {
                let k = j.unsigned_abs() as usize;
                if k > half {
                    return Complex64::new(0.0, 0.0);
                }
                if k == 0 {
                    return Complex64::new(r[0], 0.0);
                }
                let z = Complex64::new(r[2 * k - 1], r[2 * k]);
                if j > 0 {
                    z
                } else {
                    z.conj()
                }
            };
            let f = RealField::from_coeffs(n, coeffs).unwrap();
            f.values().to_vec()
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(v in band_limited(32)) {
            let u = RealField::analyze(&v).unwrap();
            let back = synthesize(u.coeffs());
            let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
            let err = v.iter().zip(&back).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 1e-12 * scale);

            let grid_l2 = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64 * 2.0 * PI;
            let coeff_l2 = 2.0 * PI * u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
            prop_assert!((grid_l2 - coeff_l2).abs() <= 1e-12 * grid_l2.max(1e-300));
            prop_assert!(u.hermitian_defect() <= 1e-12 * u.l2_norm());
        }

        #[test]
        fn hs_norm_monotone_for_zero_mean(v in band_limited(32)) {
            let u = RealField::analyze(&v).unwrap().project_zero_mean();
            let has_high = (2..16).any(|j| u.coeff(j).norm() > 1e-9);
            prop_assume!(has_high);
            prop_assert!(u.hs_norm(1.0) < u.hs_norm(2.0));
            prop_assert!(u.hs_norm(0.0) < u.hs_norm(0.5));
        }
    }
}
