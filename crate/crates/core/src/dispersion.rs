//! Linearised multiplier `L_α`, the frequencies `ω_α`, `ω̇_α`, and the
//! three-wave small-divisor scan.
//!
//! ```text
//! c_α       = Γ(α/2) / (2^{1-α} Γ(1-α/2))
//! C_α       = c_α / (2(1-α/2)) · Γ(3-α) / ((1-α) Γ(1-α/2) Γ(α/2))
//! L_α(ξ)    = V_α - C_α Γ(α/2+|ξ|) / Γ(1-α/2+|ξ|)
//! ω_α(ξ)    = ξ L_α(ξ),     ω̇_α(ξ) = ω_α(ξ) - V_α ξ
//! ```
//!
//! The transport constant is `V_α = C_α Γ(1+α/2) / Γ(2-α/2)`, which makes
//! `L_α(1) = 0`: a mode-one perturbation is a translation of the disc and
//! does not rotate. This is the normalisation under which the contour
//! equations linearise to `-iω_α(D)` and the three-wave floor `ω_α(2)` holds.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::special::{gamma, gamma_ratio};
use crate::util::fmt_f64;

/// The fractional order α of the active-scalar kernel.
///
/// Accepted in `(0, 1) ∪ (1, 2)`; the contour evolution additionally needs
/// `α < 1` (see [`Alpha::require_evolution`]).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) || alpha == 1.0 {
            return Err(Error::Parameter(format!(
                "alpha must lie in (0,1) or (1,2); alpha = 1 (the SQG endpoint) is excluded, got {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Contour dynamics are only implemented for `α ∈ (0, 1)`.
    pub fn require_evolution(self) -> Result<Self> {
        if self.0 < 1.0 {
            Ok(self)
        } else {
            Err(Error::Parameter(format!(
                "contour evolution needs alpha in (0,1), got {}",
                self.0
            )))
        }
    }
}

/// `c_α = Γ(α/2) / (2^{1-α} Γ(1-α/2))` for `α ∈ (0, 2)`.
///
/// Unlike [`Alpha`], this accepts α = 1 where `c_1 = 1`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Parameter(format!("c_alpha needs alpha in (0,2), got {alpha}")));
    }
    Ok(gamma(alpha / 2.0) / (2f64.powf(1.0 - alpha) * gamma(1.0 - alpha / 2.0)))
}

/// Constants of the linearised problem at fixed α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    alpha: Alpha,
    c: f64,
    prefactor: f64,
    transport: f64,
}

impl Dispersion {
    pub fn new(alpha: Alpha) -> Self {
        let a = alpha.value();
        let c = c_alpha(a).expect("Alpha is validated");
        let prefactor = c / (2.0 * (1.0 - a / 2.0)) / (1.0 - a) * gamma(3.0 - a)
            / (gamma(1.0 - a / 2.0) * gamma(a / 2.0));
        let transport = c / (2.0 * (1.0 - a / 2.0)) / (1.0 - a) * a * gamma(2.0 - a)
            / gamma(1.0 - a / 2.0).powi(2);
        Self {
            alpha,
            c,
            prefactor,
            transport,
        }
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c
    }

    /// `C_α`, the coefficient in front of the Gamma ratio.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// `V_α`.
    pub fn v_alpha(&self) -> f64 {
        self.transport
    }

    fn ratio(&self, xi: f64) -> f64 {
        let a = self.alpha.value();
        gamma_ratio(xi.abs(), a / 2.0, 1.0 - a / 2.0)
    }

    fn nonzero(j: i64) -> Result<()> {
        if j == 0 {
            Err(Error::Domain("mode j = 0 is excluded".into()))
        } else {
            Ok(())
        }
    }

    /// `L_α(j)`, even in `j`.
    pub fn l_alpha(&self, j: i64) -> Result<f64> {
        Self::nonzero(j)?;
        Ok(self.transport - self.prefactor * self.ratio(j as f64))
    }

    /// `ω_α(j) = j L_α(j)`.
    pub fn omega(&self, j: i64) -> Result<f64> {
        Ok(j as f64 * self.l_alpha(j)?)
    }

    /// `ω̇_α(j) = ω_α(j) - V_α j`, evaluated as `-C_α j Γ-ratio` so that no
    /// large `V_α j` terms cancel.
    pub fn omega_dot(&self, j: i64) -> Result<f64> {
        Self::nonzero(j)?;
        Ok(self.omega_dot_real(j as f64))
    }

    /// `ω̇_α` at real `ξ` (used for symbols sampled at half-integers).
    /// Continuous through 0 but only smooth for `|ξ| > 0`.
    pub fn omega_dot_real(&self, xi: f64) -> f64 {
        -self.prefactor * xi * self.ratio(xi)
    }

    /// `∂_ξ ω̇_α(ξ)` for `ξ ≠ 0`, via the digamma difference of the ratio.
    pub fn omega_dot_derivative(&self, xi: f64) -> f64 {
        let a = self.alpha.value();
        let x = xi.abs();
        let r = self.ratio(x);
        -self.prefactor * r * (1.0 + x * (digamma(x + a / 2.0) - digamma(x + 1.0 - a / 2.0)))
    }

    /// `ω_α(k) - ω_α(j) - ω_α(n)` with `k = j + n`.
    pub fn three_wave_divisor(&self, j: i64, n: i64) -> Result<f64> {
        let k = j + n;
        if j == 0 || n == 0 || k == 0 {
            return Err(Error::Domain(format!(
                "three-wave indices must be nonzero, got j={j}, n={n}, k={k}"
            )));
        }
        Ok(self.omega_dot(k)? - (self.omega_dot(j)? + self.omega_dot(n)?))
    }

    /// Minimum `|ω(j+n) - ω(j) - ω(n)|` over `|j|, |n|, |j+n| ≤ k_max`.
    pub fn resonance_scan(&self, k_max: i64) -> Result<ResonanceReport> {
        let floor = self.omega(2)?;
        let table: Vec<f64> = (0..=k_max.max(0))
            .map(|j| if j == 0 { 0.0 } else { self.omega_dot_real(j as f64) })
            .collect();
        let w = |j: i64| -> f64 { j.signum() as f64 * table[j.unsigned_abs() as usize] };
        let mut report = scan_divisors(k_max, w)?;
        report.floor = floor;
        report.floor_ratio = report.min_abs_divisor / floor;
        Ok(report)
    }

    pub fn table(&self, j_max: usize) -> Result<DispersionTable> {
        DispersionTable::build(self.alpha, j_max)
    }
}

/// Result of a three-wave divisor scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceReport {
    pub k_max: i64,
    pub min_abs_divisor: f64,
    /// `(j, n)` attaining the minimum (first in scan order).
    pub argmin: (i64, i64),
    /// `ω_α(2)`.
    pub floor: f64,
    /// `min_abs_divisor / ω_α(2)`.
    pub floor_ratio: f64,
    pub triads_scanned: usize,
}

/// Scans `|w(j+n) - w(j) - w(n)|` for any odd frequency function `w`.
/// `floor` and `floor_ratio` are left as NaN.
pub fn scan_divisors(k_max: i64, w: impl Fn(i64) -> f64) -> Result<ResonanceReport> {
    if k_max < 2 {
        return Err(Error::Parameter(format!("resonance scan needs k_max >= 2, got {k_max}")));
    }
    let mut best = f64::INFINITY;
    let mut argmin = (0, 0);
    let mut count = 0;
    for j in -k_max..=k_max {
        if j == 0 {
            continue;
        }
        for n in -k_max..=k_max {
            let k = j + n;
            if n == 0 || k == 0 || k.abs() > k_max {
                continue;
            }
            count += 1;
            let d = (w(k) - w(j) - w(n)).abs();
            if d < best {
                best = d;
                argmin = (j, n);
            }
        }
    }
    Ok(ResonanceReport {
        k_max,
        min_abs_divisor: best,
        argmin,
        floor: f64::NAN,
        floor_ratio: f64::NAN,
        triads_scanned: count,
    })
}

/// `ψ(x) = ln Γ'(x)`, by recurrence up to x ≥ 10 and the asymptotic series.
fn digamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// Precomputed `L_α`, `ω_α`, `ω̇_α` for `j = 1..=j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    dispersion: Dispersion,
    j_max: usize,
    l_values: Vec<f64>,
    omega_values: Vec<f64>,
    omega_dot_values: Vec<f64>,
}

impl DispersionTable {
    pub fn build(alpha: Alpha, j_max: usize) -> Result<Self> {
        if j_max == 0 {
            return Err(Error::Parameter("j_max must be positive".into()));
        }
        let d = Dispersion::new(alpha);
        let mut l_values = Vec::with_capacity(j_max);
        let mut omega_values = Vec::with_capacity(j_max);
        let mut omega_dot_values = Vec::with_capacity(j_max);
        for j in 1..=j_max as i64 {
            let l = d.l_alpha(j)?;
            let wd = d.omega_dot(j)?;
            if wd == 0.0 {
                return Err(Error::Domain(format!("omega_dot vanishes at j = {j}")));
            }
            l_values.push(l);
            omega_values.push(j as f64 * l);
            omega_dot_values.push(wd);
        }
        Ok(Self {
            dispersion: d,
            j_max,
            l_values,
            omega_values,
            omega_dot_values,
        })
    }

    pub fn dispersion(&self) -> &Dispersion {
        &self.dispersion
    }

    pub fn alpha(&self) -> Alpha {
        self.dispersion.alpha
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    fn index(&self, j: i64) -> Result<usize> {
        let a = j.unsigned_abs() as usize;
        if j == 0 || a > self.j_max {
            return Err(Error::Domain(format!(
                "mode {j} outside table range 1..={}",
                self.j_max
            )));
        }
        Ok(a - 1)
    }

    pub fn l_alpha(&self, j: i64) -> Result<f64> {
        Ok(self.l_values[self.index(j)?])
    }

    pub fn omega(&self, j: i64) -> Result<f64> {
        Ok(j.signum() as f64 * self.omega_values[self.index(j)?])
    }

    pub fn omega_dot(&self, j: i64) -> Result<f64> {
        Ok(j.signum() as f64 * self.omega_dot_values[self.index(j)?])
    }

    /// Divisor `ω̇(k) - ω̇(j) - ω̇(n)` with `k = j + n`, from table entries.
    pub fn three_wave_divisor(&self, j: i64, n: i64) -> Result<f64> {
        let k = j + n;
        if j == 0 || n == 0 || k == 0 {
            return Err(Error::Domain(format!(
                "three-wave indices must be nonzero, got j={j}, n={n}, k={k}"
            )));
        }
        Ok(self.omega_dot(k)? - (self.omega_dot(j)? + self.omega_dot(n)?))
    }

    pub fn l_values(&self) -> &[f64] {
        &self.l_values
    }

    pub fn omega_values(&self) -> &[f64] {
        &self.omega_values
    }

    pub fn omega_dot_values(&self) -> &[f64] {
        &self.omega_dot_values
    }

    /// CSV with header `j,L_alpha,omega,omega_dot`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,L_alpha,omega,omega_dot\n");
        for i in 0..self.j_max {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                fmt_f64(self.l_values[i]),
                fmt_f64(self.omega_values[i]),
                fmt_f64(self.omega_dot_values[i])
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disp(a: f64) -> Dispersion {
        Dispersion::new(Alpha::new(a).unwrap())
    }

    #[test]
    fn alpha_domain() {
        assert!(Alpha::new(1.0).is_err());
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(2.0).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(Alpha::new(1.5).unwrap().require_evolution().is_err());
        assert!(c_alpha(2.5).is_err());
        assert!((c_alpha(1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_mode_is_a_domain_error() {
        let d = disp(0.5);
        assert!(matches!(d.l_alpha(0), Err(Error::Domain(_))));
        assert!(matches!(d.omega(0), Err(Error::Domain(_))));
        assert!(matches!(d.three_wave_divisor(2, -2), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetries() {
        let d = disp(0.5);
        for j in 1..40 {
            assert_eq!(d.l_alpha(j).unwrap(), d.l_alpha(-j).unwrap());
            assert_eq!(d.omega_dot(-j).unwrap(), -d.omega_dot(j).unwrap());
            assert!((d.omega(-j).unwrap() + d.omega(j).unwrap()).abs() < 1e-15);
        }
        for (j, n) in [(1, 1), (3, -7), (-4, 9), (12, 5)] {
            assert_eq!(
                d.three_wave_divisor(j, n).unwrap(),
                d.three_wave_divisor(n, j).unwrap()
            );
        }
    }

    #[test]
    fn mode_one_is_neutral() {
        for a in [0.25, 0.5, 0.75, 1.5] {
            assert!(disp(a).l_alpha(1).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn divisor_with_omega_matches_omega_dot() {
        let d = disp(0.75);
        for j in -20i64..=20 {
            for n in -20i64..=20 {
                if j == 0 || n == 0 || j + n == 0 {
                    continue;
                }
                let with_omega =
                    d.omega(j + n).unwrap() - d.omega(j).unwrap() - d.omega(n).unwrap();
                let with_dot = d.three_wave_divisor(j, n).unwrap();
                assert!((with_omega - with_dot).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn digamma_spot_values() {
        // ψ(1) = -γ, ψ(1/2) = -γ - 2 ln 2
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0) + euler).abs() < 1e-13);
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let d = disp(0.5);
        for xi in [0.5, 1.5, 7.0, 64.5] {
            let h = 1e-5;
            let fd = (d.omega_dot_real(xi + h) - d.omega_dot_real(xi - h)) / (2.0 * h);
            assert!((fd - d.omega_dot_derivative(xi)).abs() < 1e-8 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn table_matches_pointwise_and_csv_shape() {
        let a = Alpha::new(0.5).unwrap();
        let t = DispersionTable::build(a, 16).unwrap();
        let d = Dispersion::new(a);
        for j in 1..=16 {
            assert_eq!(t.omega_dot(j).unwrap(), d.omega_dot(j).unwrap());
            assert_eq!(t.omega_dot(-j).unwrap(), -d.omega_dot(j).unwrap());
            let w = t.omega(j).unwrap();
            assert!((w - j as f64 * t.l_alpha(j).unwrap()).abs() < 1e-15 * w.abs().max(1.0));
            let wd = t.omega_dot(j).unwrap();
            assert!((wd - (w - d.v_alpha() * j as f64)).abs() < 1e-13 * w.abs().max(1.0));
        }
        assert!(t.omega(17).is_err());
        let csv = t.to_csv();
        assert!(csv.starts_with("j,L_alpha,omega,omega_dot\n"));
        assert_eq!(csv.lines().count(), 17);
    }

    #[test]
    fn scan_rejects_tiny_kmax() {
        assert!(disp(0.5).resonance_scan(1).is_err());
    }
}
