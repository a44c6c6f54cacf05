//! Symbols `a(x, ξ)`, accessed through their x-Fourier coefficients `â_n(ξ)`.

use num_complex::Complex64;

use crate::spectral::RealField;

/// A symbol, seen through `n ↦ â_n(ξ)`.
pub trait Symbol: Sync {
    /// `â_n(ξ)` for `n ∈ [-n_max, n_max]`, stored at index `n + n_max`.
    fn coeffs_at(&self, xi: f64, n_max: usize) -> Vec<Complex64>;
}

fn zeros(n_max: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); 2 * n_max + 1]
}

/// x-independent symbol `m(ξ)`.
pub struct Multiplier<F>(pub F);

impl<F: Fn(f64) -> Complex64 + Sync> Symbol for Multiplier<F> {
    fn coeffs_at(&self, xi: f64, n_max: usize) -> Vec<Complex64> {
        let mut c = zeros(n_max);
        c[n_max] = (self.0)(xi);
        c
    }
}

/// Real multiplier `m(ξ)`.
pub fn real_multiplier<F: Fn(f64) -> f64 + Sync>(m: F) -> Multiplier<impl Fn(f64) -> Complex64 + Sync> {
    Multiplier(move |xi| Complex64::new(m(xi), 0.0))
}

/// `a(x, ξ) = p(x) m(ξ)`.
pub struct SeparableSymbol<F> {
    pub profile: RealField,
    pub mult: F,
}

impl<F: Fn(f64) -> Complex64 + Sync> Symbol for SeparableSymbol<F> {
    fn coeffs_at(&self, xi: f64, n_max: usize) -> Vec<Complex64> {
        let m = (self.mult)(xi);
        let top = self.profile.max_mode();
        (-(n_max as i64)..=n_max as i64)
            .map(|n| if n.abs() <= top { self.profile.coeff(n) * m } else { Complex64::new(0.0, 0.0) })
            .collect()
    }
}

/// Linear homogeneous symbol `a(u; x, ξ) = Σ_{n≠0} u_n a_n(ξ) e^{inx}`.
pub struct HomogeneousSymbol<F> {
    /// Order `m` in ξ.
    pub order: f64,
    /// Low-frequency loss exponent in `|a_n(ξ)| ≤ C |n|^μ ⟨ξ⟩^m`.
    pub mu: f64,
    pub u: RealField,
    pub coeff_fn: F,
}

impl<F: Fn(i64, f64) -> Complex64 + Sync> HomogeneousSymbol<F> {
    /// Smallest `C` with `|a_n(ξ)| ≤ C |n|^μ ⟨ξ⟩^m` on the sample lattice.
    pub fn growth_constant(&self, n_max: i64, xis: &[f64]) -> f64 {
        let mut c = 0.0_f64;
        for n in (-n_max..=n_max).filter(|&n| n != 0) {
            for &xi in xis {
                let bound = (n.abs() as f64).powf(self.mu) * xi.abs().max(1.0).powf(self.order);
                c = c.max((self.coeff_fn)(n, xi).norm() / bound);
            }
        }
        c
    }

    /// Whether `conj(a_n(ξ)) = a_{-n}(-ξ)` on the samples.
    pub fn is_real_to_real(&self, n_max: i64, xis: &[f64], tol: f64) -> bool {
        (-n_max..=n_max).filter(|&n| n != 0).all(|n| {
            xis.iter().all(|&xi| {
                let a = (self.coeff_fn)(n, xi);
                (a.conj() - (self.coeff_fn)(-n, -xi)).norm() <= tol * a.norm().max(1.0)
            })
        })
    }
}

impl<F: Fn(i64, f64) -> Complex64 + Sync> Symbol for HomogeneousSymbol<F> {
    fn coeffs_at(&self, xi: f64, n_max: usize) -> Vec<Complex64> {
        let top = self.u.max_mode();
        (-(n_max as i64)..=n_max as i64)
            .map(|n| {
                if n == 0 || n.abs() > top {
                    Complex64::new(0.0, 0.0)
                } else {
                    self.u.coeff(n) * (self.coeff_fn)(n, xi)
                }
            })
            .collect()
    }
}

/// Symbol given pointwise, `(x, ξ) ↦ a(x, ξ)`, analysed on an x-grid.
pub struct GeneralSymbol<F> {
    pub grid: usize,
    pub eval: F,
}

impl<F: Fn(f64, f64) -> Complex64 + Sync> GeneralSymbol<F> {
    /// Whether `conj(a(x, ξ)) = a(x, -ξ)` at the grid nodes for each sample ξ.
    pub fn is_real_to_real(&self, xis: &[f64], tol: f64) -> bool {
        crate::spectral::grid(self.grid).all(|x| {
            xis.iter().all(|&xi| {
                let a = (self.eval)(x, xi);
                (a.conj() - (self.eval)(x, -xi)).norm() <= tol * a.norm().max(1.0)
            })
        })
    }
}

impl<F: Fn(f64, f64) -> Complex64 + Sync> Symbol for GeneralSymbol<F> {
    fn coeffs_at(&self, xi: f64, n_max: usize) -> Vec<Complex64> {
        let n = self.grid;
        let mut buf: Vec<Complex64> = crate::spectral::grid(n).map(|x| (self.eval)(x, xi)).collect();
        crate::spectral::forward_fft(&mut buf);
        let half = (n / 2) as i64;
        (-(n_max as i64)..=n_max as i64)
            .map(|k| {
                if k.abs() >= half {
                    Complex64::new(0.0, 0.0)
                } else {
                    buf[k.rem_euclid(n as i64) as usize] / n as f64
                }
            })
            .collect()
    }
}

/// Principal symbol of `[Op(a), m(D)]`: `(1/i)(-m'(ξ) ∂_x a)`, with
/// coefficients `-n m'(ξ) â_n(ξ)`.
pub struct BracketPrincipal<'a, S: ?Sized, D> {
    pub symbol: &'a S,
    pub mult_derivative: D,
}

impl<S: Symbol + ?Sized, D: Fn(f64) -> f64 + Sync> Symbol for BracketPrincipal<'_, S, D> {
    fn coeffs_at(&self, xi: f64, n_max: usize) -> Vec<Complex64> {
        let d = (self.mult_derivative)(xi);
        let mut c = self.symbol.coeffs_at(xi, n_max);
        for (i, v) in c.iter_mut().enumerate() {
            *v *= -(i as f64 - n_max as f64) * d;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_matches_separable() {
        let u = RealField::from_fn(16, |x| x.cos() + 0.5 * (2.0 * x).sin()).unwrap();
        let sep = SeparableSymbol {
            profile: u.clone(),
            mult: |xi: f64| Complex64::new(xi * xi, 0.0),
        };
        let gen = GeneralSymbol {
            grid: 16,
            eval: |x: f64, xi: f64| Complex64::new((x.cos() + 0.5 * (2.0 * x).sin()) * xi * xi, 0.0),
        };
        let a = sep.coeffs_at(1.5, 5);
        let b = gen.coeffs_at(1.5, 5);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn homogeneous_reality_and_growth() {
        let u = RealField::from_fn(16, |x| x.cos()).unwrap();
        let sym = HomogeneousSymbol {
            order: 1.0,
            mu: 0.0,
            u,
            coeff_fn: |_n: i64, xi: f64| Complex64::new(0.0, xi),
        };
        let xis = [-3.5, -1.0, 0.5, 2.0, 7.5];
        assert!(sym.is_real_to_real(4, &xis, 1e-15));
        assert!((sym.growth_constant(4, &xis) - 1.0).abs() < 1e-15);
        let bad = HomogeneousSymbol {
            order: 1.0,
            mu: 0.0,
            u: RealField::zeros(16).unwrap(),
            coeff_fn: |_n: i64, xi: f64| Complex64::new(xi, 1.0),
        };
        assert!(!bad.is_real_to_real(4, &xis, 1e-15));
    }
}
