//! Frequency cutoffs.

use crate::error::{Error, Result};

/// Even cutoff `χ_δ(r) = χ(r/δ)` where `χ = 1` on `|r| ≤ 1.1`, `χ = 0` on
/// `|r| ≥ 1.9`, joined by a quintic smoothstep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffChi {
    delta: f64,
}

impl Default for CutoffChi {
    fn default() -> Self {
        Self { delta: 0.3 }
    }
}

impl CutoffChi {
    pub const INNER: f64 = 1.1;
    pub const OUTER: f64 = 1.9;

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("cutoff delta must lie in (0,1), got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The unscaled profile `χ(r)`.
    pub fn profile(r: f64) -> f64 {
        let r = r.abs();
        if r <= Self::INNER {
            1.0
        } else if r >= Self::OUTER {
            0.0
        } else {
            let t = (r - Self::INNER) / (Self::OUTER - Self::INNER);
            1.0 - t * t * t * (10.0 - t * (15.0 - 6.0 * t))
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        Self::profile(r / self.delta)
    }
}

/// Smooth `ψ` with `ψ = 0` on `|ξ| ≤ 1/8` and `ψ = 1` on `|ξ| ≥ 1/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CutoffPsi;

impl CutoffPsi {
    pub fn eval(&self, xi: f64) -> f64 {
        fn bump(t: f64) -> f64 {
            if t > 0.0 {
                (-1.0 / t).exp()
            } else {
                0.0
            }
        }
        let t = (xi.abs() - 0.125) / 0.125;
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            bump(t) / (bump(t) + bump(1.0 - t))
        }
    }

    /// `ξ ↦ ψ(ξ) m(ξ)`, a smooth version of a multiplier singular at 0.
    pub fn smooth<F: Fn(f64) -> f64>(self, m: F) -> impl Fn(f64) -> f64 {
        move |xi| {
            let p = self.eval(xi);
            if p == 0.0 {
                0.0
            } else {
                p * m(xi)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_shape() {
        assert_eq!(CutoffChi::profile(0.0), 1.0);
        assert_eq!(CutoffChi::profile(1.1), 1.0);
        assert_eq!(CutoffChi::profile(-1.9), 0.0);
        assert!((CutoffChi::profile(1.5) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for i in 0..=80 {
            let v = CutoffChi::profile(1.1 + 0.01 * i as f64);
            assert!(v <= last);
            last = v;
        }
        let chi = CutoffChi::default();
        assert_eq!(chi.eval(0.33), 1.0);
        assert_eq!(chi.eval(0.57), 0.0);
        assert!(CutoffChi::new(1.0).is_err());
    }

    #[test]
    fn psi_shape() {
        let psi = CutoffPsi;
        assert_eq!(psi.eval(0.125), 0.0);
        assert_eq!(psi.eval(-0.1), 0.0);
        assert_eq!(psi.eval(0.25), 1.0);
        assert_eq!(psi.eval(3.0), 1.0);
        let mut last = 0.0;
        // strictly increasing until it saturates to 1.0 in double precision
        for i in 1..90 {
            let v = psi.eval(0.125 + 0.00125 * i as f64);
            assert!(v > last);
            last = v;
        }
        let s = psi.smooth(|x: f64| x.abs().powf(-0.5));
        assert_eq!(s(0.0), 0.0);
        assert_eq!(s(4.0), 0.5);
    }
}
