//! Nonlinear contour dynamics of a patch `r = 1 + h(x)` by singular quadrature.
//!
//! Two equivalent formulations are provided. The radial form evolves `h`
//! directly; the Hamiltonian form evolves `f = h + h²/2` through
//! `f_t = ∂_x(∇E(f) + Ω f)`. With `R = √(1+2f) = 1+h` and
//! `D(x,y) = R(x)² + R(y)² - 2R(x)R(y)cos(x-y)`:
//!
//! ```text
//! R(x) h_t(x) = c_α ⨍ [cos(x-y)(R(x)h'(y) - R(y)h'(x)) + sin(x-y)(R(x)R(y) + h'(x)h'(y))] D^{-α/2} dy
//! ∇E(f)(x)   = c_α/(2-α) ⨍ [R(y)² + R(x)(R'(y) sin(x-y) - R(y) cos(x-y))] D^{-α/2} dy
//! E(f)       = -c_α/(2-α)²/2 ⨍⨍ ∂_x∂_y[R(x)R(y)cos(x-y)] D^{1-α/2} dx dy
//! ```
//!
//! `⨍` is `(1/2π)∫` over a period. The `y` integrals use the periodic
//! trapezoid rule on `M` nodes containing the `N` state nodes, with the
//! diagonal node set to its limit 0.

use rayon::prelude::*;

use crate::dispersion::{Alpha, Dispersion};
use crate::error::{Error, Result};
use crate::spectral::RealField;
use num_complex::Complex64;

/// Smallest admissible `D(x, y)` before the kernel power; smaller values off
/// the diagonal are reported as a self-intersection.
pub const DENOMINATOR_GUARD: f64 = 1e-30;

/// Number of `y` nodes used for the singular integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nodes {
    /// `M = factor · N`.
    Oversample(usize),
    /// Fixed `M`, must be a multiple of `N`.
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureConfig {
    pub nodes: Nodes,
    /// Distribute the x-node loop over the rayon pool.
    pub parallel: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: Nodes::Oversample(2),
            parallel: true,
        }
    }
}

impl QuadratureConfig {
    pub fn oversample(factor: usize) -> Self {
        Self {
            nodes: Nodes::Oversample(factor),
            ..Self::default()
        }
    }

    pub fn fixed(m: usize) -> Self {
        Self {
            nodes: Nodes::Fixed(m),
            ..Self::default()
        }
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }

    /// Quadrature node count for an `n`-point state.
    pub fn resolve(&self, n: usize) -> Result<usize> {
        let m = match self.nodes {
            Nodes::Oversample(0) => {
                return Err(Error::Config("oversampling factor must be positive".into()))
            }
            Nodes::Oversample(k) => k * n,
            Nodes::Fixed(m) => m,
        };
        if m < n || m % n != 0 {
            return Err(Error::Config(format!(
                "quadrature nodes M = {m} must be a multiple of N = {n}"
            )));
        }
        Ok(m)
    }
}

/// A patch in radial form.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchState {
    pub h: RealField,
    pub t: f64,
}

impl PatchState {
    pub fn new(h: RealField, t: f64) -> Result<Self> {
        let worst = h.values().iter().fold(f64::INFINITY, |m, &v| m.min(1.0 + v));
        if !(worst > 0.0) {
            return Err(Error::Degenerate(format!("min(1+h) = {worst:e}")));
        }
        Ok(Self { h, t })
    }
}

/// A patch in Hamiltonian form `f = h + h²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianState {
    pub f: RealField,
    pub t: f64,
}

impl HamiltonianState {
    pub fn new(f: RealField, t: f64) -> Result<Self> {
        check_hamiltonian(f.values())?;
        Ok(Self { f, t })
    }
}

fn check_hamiltonian(values: &[f64]) -> Result<()> {
    let worst = values.iter().fold(f64::INFINITY, |m, &v| m.min(1.0 + 2.0 * v));
    if !(worst > 0.0) {
        return Err(Error::Degenerate(format!("min(1+2f) = {worst:e}")));
    }
    Ok(())
}

/// Energy, angular momentum `½∫f²` and area `∫f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet {
    pub energy: f64,
    pub momentum: f64,
    pub area: f64,
}

pub fn h_to_f(p: &PatchState) -> HamiltonianState {
    HamiltonianState {
        f: p.h.map_values(|h| h + 0.5 * h * h),
        t: p.t,
    }
}

pub fn f_to_h(q: &HamiltonianState) -> Result<PatchState> {
    check_hamiltonian(q.f.values())?;
    Ok(PatchState {
        h: q.f.map_values(|f| (1.0 + 2.0 * f).sqrt() - 1.0),
        t: q.t,
    })
}

/// Evaluates `D^{-α/2}` and `D^{1-α/2}`; α = 1/2 avoids `powf`.
#[derive(Debug, Clone, Copy)]
enum KernelPower {
    Half,
    General(f64),
}

impl KernelPower {
    fn new(alpha: f64) -> Self {
        if alpha == 0.5 {
            Self::Half
        } else {
            Self::General(alpha)
        }
    }

    #[inline]
    fn singular(self, d: f64) -> f64 {
        match self {
            Self::Half => 1.0 / d.sqrt().sqrt(),
            Self::General(a) => d.powf(-0.5 * a),
        }
    }

    #[inline]
    fn regular(self, d: f64) -> f64 {
        match self {
            Self::Half => {
                let q = d.sqrt();
                q * q.sqrt()
            }
            Self::General(a) => d.powf(1.0 - 0.5 * a),
        }
    }
}

/// Trig tables on the quadrature grid and the x-node stride.
struct Grid {
    n: usize,
    m: usize,
    stride: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Grid {
    fn new(n: usize, m: usize) -> Self {
        let step = 2.0 * std::f64::consts::PI / m as f64;
        let (sin, cos) = (0..m).map(|k| (k as f64 * step).sin_cos()).unzip();
        Self {
            n,
            m,
            stride: m / n,
            cos,
            sin,
        }
    }

    /// Applies `row(i, x_index)` to every x-node.
    fn rows<F>(&self, parallel: bool, row: F) -> Result<Vec<f64>>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        if parallel {
            (0..self.n)
                .into_par_iter()
                .map(|i| row(i, i * self.stride))
                .collect()
        } else {
            (0..self.n).map(|i| row(i, i * self.stride)).collect()
        }
    }

    /// Index of `x_i - y_k` on the table, for `x_i` at table index `xi`.
    #[inline]
    fn offset(&self, xi: usize, k: usize) -> usize {
        if xi >= k {
            xi - k
        } else {
            xi + self.m - k
        }
    }
}

#[inline]
fn guarded(d: f64, node: usize) -> Result<f64> {
    if d < DENOMINATOR_GUARD {
        Err(Error::Geometry { node, value: d })
    } else {
        Ok(d)
    }
}

/// Contour dynamics at fixed α with a fixed quadrature rule.
#[derive(Debug, Clone, Copy)]
pub struct ContourModel {
    alpha: Alpha,
    c: f64,
    power: KernelPower,
    pub quad: QuadratureConfig,
}

impl ContourModel {
    pub fn new(alpha: Alpha, quad: QuadratureConfig) -> Result<Self> {
        let alpha = alpha.require_evolution()?;
        Ok(Self {
            alpha,
            c: Dispersion::new(alpha).c_alpha(),
            power: KernelPower::new(alpha.value()),
            quad,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// `h_t` from the radial equation.
    pub fn rhs_h(&self, p: &PatchState) -> Result<RealField> {
        let n = p.h.n_modes();
        let m = self.quad.resolve(n)?;
        let grid = Grid::new(n, m);
        let h = p.h.resample(m)?;
        let dh = p.h.spectral_derivative(1).resample(m)?;
        let (h, dh) = (h.values(), dh.values());
        if let Some(v) = h.iter().find(|&&v| !(1.0 + v > 0.0)) {
            return Err(Error::Degenerate(format!("min(1+h) = {:e}", 1.0 + v)));
        }
        let power = self.power;
        let out = grid.rows(self.quad.parallel, |i, xi| {
            let rx = 1.0 + h[xi];
            let dx = dh[xi];
            let mut acc = 0.0;
            for k in 0..m {
                if k == xi {
                    continue;
                }
                let o = grid.offset(xi, k);
                let (cs, sn) = (grid.cos[o], grid.sin[o]);
                let ry = 1.0 + h[k];
                let d = guarded(rx * rx + ry * ry - 2.0 * rx * ry * cs, i)?;
                let num = cs * (rx * dh[k] - ry * dx) + sn * (rx * ry + dx * dh[k]);
                acc += num * power.singular(d);
            }
            Ok(self.c * acc / (m as f64 * rx))
        })?;
        RealField::analyze(&out)
    }

    /// Radius `√(1+2f)` and its derivative on the `m`-point grid.
    fn radius(&self, f: &RealField, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let fm = f.resample(m)?;
        check_hamiltonian(fm.values())?;
        let r = fm.map_values(|v| (1.0 + 2.0 * v).sqrt());
        let dr = r.spectral_derivative(1);
        Ok((r.values().to_vec(), dr.values().to_vec()))
    }

    /// The energy gradient `∇E(f)` under the averaged pairing.
    pub fn grad_e(&self, q: &HamiltonianState) -> Result<RealField> {
        let n = q.f.n_modes();
        let m = self.quad.resolve(n)?;
        let grid = Grid::new(n, m);
        let (r, dr) = self.radius(&q.f, m)?;
        let power = self.power;
        let scale = self.c / (2.0 - self.alpha.value()) / m as f64;
        let out = grid.rows(self.quad.parallel, |i, xi| {
            let rx = r[xi];
            let mut acc = 0.0;
            for k in 0..m {
                if k == xi {
                    continue;
                }
                let o = grid.offset(xi, k);
                let (cs, sn) = (grid.cos[o], grid.sin[o]);
                let ry = r[k];
                let d = guarded(rx * rx + ry * ry - 2.0 * rx * ry * cs, i)?;
                let num = ry * ry + rx * (dr[k] * sn - ry * cs);
                acc += num * power.singular(d);
            }
            Ok(scale * acc)
        })?;
        RealField::analyze(&out)
    }

    /// `f_t = ∂_x(∇E(f) + Ω f)` in a frame rotating with angular velocity Ω.
    pub fn rhs_f(&self, q: &HamiltonianState, omega_frame: f64) -> Result<RealField> {
        let g = self.grad_e(q)?;
        Ok(g.combine(1.0, &q.f, omega_frame).spectral_derivative(1))
    }

    pub fn conserved(&self, q: &HamiltonianState) -> Result<ConservedSet> {
        let n = q.f.n_modes();
        let m = self.quad.resolve(n)?;
        let grid = Grid::new(n, m);
        let (r, dr) = self.radius(&q.f, m)?;
        let power = self.power;
        let rows = grid.rows(self.quad.parallel, |_, xi| {
            let (rx, drx) = (r[xi], dr[xi]);
            let mut acc = 0.0;
            for k in 0..m {
                if k == xi {
                    continue;
                }
                let o = grid.offset(xi, k);
                let (cs, sn) = (grid.cos[o], grid.sin[o]);
                let (ry, dry) = (r[k], dr[k]);
                let d = (rx * rx + ry * ry - 2.0 * rx * ry * cs).max(0.0);
                let mixed = (drx * dry + rx * ry) * cs + (drx * ry - rx * dry) * sn;
                acc += mixed * power.regular(d);
            }
            Ok(acc)
        })?;
        let a = self.alpha.value();
        let total: f64 = rows.iter().sum::<f64>() / (n * m) as f64;
        let energy = -self.c / (2.0 * (2.0 - a) * (2.0 - a)) * total;
        let momentum = std::f64::consts::PI * q.f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>();
        let area = 2.0 * std::f64::consts::PI * q.f.coeff(0).re;
        Ok(ConservedSet {
            energy,
            momentum,
            area,
        })
    }

    /// Finite-difference linearisation of `rhs_f` at `f = 0`.
    pub fn jacobian_at_zero(&self, j_max: usize, omega_frame: f64) -> Result<JacobianReport> {
        if j_max == 0 {
            return Err(Error::Parameter("j_max must be positive".into()));
        }
        let n = (4 * j_max).next_power_of_two().max(16);
        let step = 1e-7;
        let mut entries = Vec::with_capacity(j_max);
        let mut leakage = 0.0_f64;
        for j in 1..=j_max as i64 {
            let probe = RealField::from_fn(n, |x| step * (j as f64 * x).cos())?;
            let plus = self.rhs_f(&HamiltonianState::new(probe.clone(), 0.0)?, omega_frame)?;
            let minus = self.rhs_f(&HamiltonianState::new(probe.scale(-1.0), 0.0)?, omega_frame)?;
            let diff = plus.combine(1.0, &minus, -1.0).scale(1.0 / (2.0 * step));
            // the probe carries 1/2 in each of the modes ±j
            let entry = 2.0 * diff.coeff(j);
            let off = (-(n as i64) / 2..n as i64 / 2)
                .filter(|k| k.abs() != j)
                .map(|k| diff.coeff(k).norm())
                .fold(0.0, f64::max);
            leakage = leakage.max(2.0 * off);
            entries.push(entry);
        }
        let scale = entries.iter().map(|e| e.norm()).fold(f64::MIN_POSITIVE, f64::max);
        Ok(JacobianReport {
            entries,
            leakage: leakage / scale,
        })
    }
}

/// Diagonal of the linearised `rhs_f` for modes `1..=j_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    pub entries: Vec<Complex64>,
    /// Largest off-diagonal response relative to the largest diagonal entry
    /// (mode 1 is neutral, so per-mode ratios are not meaningful).
    pub leakage: f64,
}
