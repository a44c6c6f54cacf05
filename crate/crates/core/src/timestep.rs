//! Time integration of `f_t = ∂_x(∇E(f) + Ω f)` and the experiments built on it.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::contour::{f_to_h, h_to_f, ConservedSet, ContourModel, HamiltonianState, PatchState};
use crate::dispersion::Dispersion;
use crate::error::{Error, Result};
use crate::spectral::{wavenumber, RealField, SobolevIndex};
use crate::util::{fmt_f64, linear_fit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical RK4 on the full right-hand side.
    Rk4,
    /// RK4 in Lawson form: the linear part is integrated exactly.
    IfRk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub snapshot_stride: usize,
    /// Angular velocity of the rotating frame.
    pub omega_frame: f64,
    /// Sobolev indices recorded along a trajectory.
    pub hs_indices: Vec<f64>,
    /// Evaluate the energy at each snapshot (one double quadrature each).
    pub record_conserved: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            scheme: Scheme::IfRk4,
            t_end: 1.0,
            snapshot_stride: 1,
            omega_frame: 0.0,
            hs_indices: vec![0.0],
            record_conserved: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot_stride must be positive".into()));
        }
        for &s in &self.hs_indices {
            SobolevIndex::new(s)?;
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt * (1.0 + 1e-12)).floor() as usize
    }

    /// `dt · max|ω(j)|` over the modes of an `n`-point grid, with a warning
    /// when it exceeds the stability budget of the chosen scheme.
    pub fn stability_advisory(&self, dispersion: &Dispersion, n: usize) -> (f64, Option<String>) {
        let top = (n / 2 - 1) as i64;
        let w = (1..=top)
            .map(|j| dispersion.omega(j).map(f64::abs).unwrap_or(0.0))
            .fold(0.0, f64::max);
        let product = self.dt * w;
        let budget = match self.scheme {
            Scheme::IfRk4 => 1.5,
            Scheme::Rk4 => 2.8,
        };
        let note = (product > budget).then(|| {
            format!("dt * max|omega| = {product:.3} exceeds the advisory budget {budget}")
        });
        (product, note)
    }
}

/// Integrator bound to a model, a grid size and a step configuration.
pub struct Integrator {
    model: ContourModel,
    cfg: IntegratorConfig,
    n: usize,
    /// Linear symbol `-iω(j) + ijΩ` per FFT slot.
    linear: Vec<Complex64>,
}

impl Integrator {
    pub fn new(model: ContourModel, cfg: IntegratorConfig, n: usize) -> Result<Self> {
        cfg.validate()?;
        RealField::zeros(n)?;
        let d = Dispersion::new(model.alpha());
        let linear = (0..n)
            .map(|i| {
                let j = wavenumber(n, i);
                if j == 0 || j == -(n as i64) / 2 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(Complex64::new(0.0, j as f64 * cfg.omega_frame - d.omega(j)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            cfg,
            n,
            linear,
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn model(&self) -> &ContourModel {
        &self.model
    }

    fn rhs(&self, f: &RealField, t: f64) -> Result<RealField> {
        let q = HamiltonianState::new(f.clone(), t).map_err(|e| Error::Blowup {
            t,
            reason: e.to_string(),
        })?;
        self.model.rhs_f(&q, self.cfg.omega_frame).map_err(|e| match e {
            Error::Geometry { .. } | Error::Degenerate(_) => Error::Blowup {
                t,
                reason: e.to_string(),
            },
            other => other,
        })
    }

    fn propagator(&self, dt: f64) -> Vec<Complex64> {
        self.linear.iter().map(|l| (l * dt).exp()).collect()
    }

    /// One step of signed size `dt`.
    pub fn step_by(&self, q: &HamiltonianState, dt: f64) -> Result<HamiltonianState> {
        if q.f.n_modes() != self.n {
            return Err(Error::Config(format!(
                "state has {} modes, integrator built for {}",
                q.f.n_modes(),
                self.n
            )));
        }
        let t = q.t;
        let f = &q.f;
        let next = match self.cfg.scheme {
            Scheme::Rk4 => {
                let k1 = self.rhs(f, t)?;
                let k2 = self.rhs(&f.combine(1.0, &k1, dt / 2.0), t + dt / 2.0)?;
                let k3 = self.rhs(&f.combine(1.0, &k2, dt / 2.0), t + dt / 2.0)?;
                let k4 = self.rhs(&f.combine(1.0, &k3, dt), t + dt)?;
                let incr = k1.combine(1.0, &k2, 2.0).combine(1.0, &k3, 2.0).combine(1.0, &k4, 1.0);
                f.combine(1.0, &incr, dt / 6.0)
            }
            Scheme::IfRk4 => {
                let half = self.propagator(dt / 2.0);
                let full = self.propagator(dt);
                let nonlinear = |g: &RealField, s: f64| -> Result<RealField> {
                    let r = self.rhs(g, s)?;
                    Ok(r.combine(1.0, &diag(g, &self.linear), -1.0))
                };
                let k1 = nonlinear(f, t)?;
                let k2 = nonlinear(&diag(&f.combine(1.0, &k1, dt / 2.0), &half), t + dt / 2.0)?;
                let k3 = nonlinear(&diag(f, &half).combine(1.0, &k2, dt / 2.0), t + dt / 2.0)?;
                let k4 = nonlinear(
                    &diag(f, &full).combine(1.0, &diag(&k3, &half), dt),
                    t + dt,
                )?;
                let incr = diag(&k1, &full)
                    .combine(1.0, &diag(&k2.combine(1.0, &k3, 1.0), &half), 2.0)
                    .combine(1.0, &k4, 1.0);
                diag(f, &full).combine(1.0, &incr, dt / 6.0)
            }
        };
        if next.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup {
                t: t + dt,
                reason: "non-finite state".into(),
            });
        }
        HamiltonianState::new(next, t + dt).map_err(|e| Error::Blowup {
            t: t + dt,
            reason: e.to_string(),
        })
    }

    pub fn step(&self, q: &HamiltonianState) -> Result<HamiltonianState> {
        self.step_by(q, self.cfg.dt)
    }

    /// Integrates to `t_end`, keeping every `snapshot_stride`-th state.
    pub fn evolve(&self, q0: &HamiltonianState) -> Result<Trajectory> {
        let steps = self.cfg.steps();
        let stride = self.cfg.snapshot_stride;
        let mut traj = Trajectory {
            hs_indices: self.cfg.hs_indices.clone(),
            times: Vec::new(),
            states: Vec::new(),
            hs_norms: Vec::new(),
            conserved: Vec::new(),
        };
        let mut q = q0.clone();
        self.record(&mut traj, &q)?;
        for k in 1..=steps {
            q = self.step(&q)?;
            if k % stride == 0 {
                self.record(&mut traj, &q)?;
            }
        }
        Ok(traj)
    }

    fn record(&self, traj: &mut Trajectory, q: &HamiltonianState) -> Result<()> {
        traj.times.push(q.t);
        traj.hs_norms.push(self.cfg.hs_indices.iter().map(|&s| q.f.hs_norm(s)).collect());
        traj.conserved.push(if self.cfg.record_conserved {
            self.model.conserved(q)?
        } else {
            ConservedSet {
                energy: f64::NAN,
                momentum: std::f64::consts::PI * q.f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>(),
                area: 2.0 * std::f64::consts::PI * q.f.coeff(0).re,
            }
        });
        traj.states.push(q.f.clone());
        Ok(())
    }
}

/// Multiplies FFT-ordered coefficients slot by slot.
fn diag(f: &RealField, m: &[Complex64]) -> RealField {
    RealField::from_raw(f.coeffs().iter().zip(m).map(|(a, b)| a * b).collect())
}

/// Snapshots of an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub hs_indices: Vec<f64>,
    pub times: Vec<f64>,
    pub states: Vec<RealField>,
    /// `hs_norms[k][i]` is `‖f(t_k)‖` in `H^{hs_indices[i]}`.
    pub hs_norms: Vec<Vec<f64>>,
    pub conserved: Vec<ConservedSet>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,hs_norm_<s>...,energy,momentum,area`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for s in &self.hs_indices {
            let _ = write!(out, ",hs_norm_{s}");
        }
        out.push_str(",energy,momentum,area\n");
        for k in 0..self.len() {
            out.push_str(&fmt_f64(self.times[k]));
            for v in &self.hs_norms[k] {
                let _ = write!(out, ",{}", fmt_f64(*v));
            }
            let c = self.conserved[k];
            let _ = writeln!(
                out,
                ",{},{},{}",
                fmt_f64(c.energy),
                fmt_f64(c.momentum),
                fmt_f64(c.area)
            );
        }
        out
    }
}

/// Angular frequency of mode `j` from a least-squares fit of its unwrapped phase.
pub fn modal_frequency(traj: &Trajectory, j: i64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("mode 0 has no frequency".into()));
    }
    if traj.len() < 2 {
        return Err(Error::InsufficientSignal("need at least two snapshots".into()));
    }
    let n = traj.states[0].n_modes() as i64;
    if j.abs() >= n / 2 {
        return Err(Error::Domain(format!("mode {j} not resolved on {n} points")));
    }
    let mut pts = Vec::with_capacity(traj.len());
    let mut last = f64::NAN;
    let mut turn = 0.0;
    for (t, f) in traj.times.iter().zip(&traj.states) {
        let c = f.coeff(j);
        if c.norm() < 1e-14 {
            return Err(Error::InsufficientSignal(format!(
                "|f_{j}| = {:e} at t = {t}",
                c.norm()
            )));
        }
        let mut phase = c.arg() + turn;
        if last.is_finite() {
            while phase - last > std::f64::consts::PI {
                phase -= 2.0 * std::f64::consts::PI;
                turn -= 2.0 * std::f64::consts::PI;
            }
            while phase - last < -std::f64::consts::PI {
                phase += 2.0 * std::f64::consts::PI;
                turn += 2.0 * std::f64::consts::PI;
            }
        }
        last = phase;
        pts.push((*t, phase));
    }
    Ok(linear_fit(&pts).0)
}

/// `ε (cos x + cos 2x) / ‖cos x + cos 2x‖_{H^s}` as a radial deformation.
pub fn sweep_initial_h(n: usize, eps: f64, s: SobolevIndex) -> Result<RealField> {
    let shape = RealField::from_fn(n, |x| x.cos() + (2.0 * x).cos())?;
    Ok(shape.scale(eps / shape.hs_norm(s.value())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitReason {
    /// Reached `c_budget ε^{-2}`.
    Budget,
    /// `‖h‖_{H^s} ≥ 2ε`.
    Norm,
    /// Invariant violation or `‖f‖_{H^s} > 10ε`.
    Blowup,
    /// `ε = 0`.
    Trivial,
}

impl ExitReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Budget => "budget",
            Self::Norm => "norm",
            Self::Blowup => "blowup",
            Self::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifespanRecord {
    pub eps: f64,
    pub t_budget: f64,
    pub t_observed: f64,
    pub exit_reason: ExitReason,
    /// `sup_t ‖h(t)‖_{H^s} / ε` over the run.
    pub sup_ratio: f64,
    pub detail: Option<String>,
}

/// Evolves the sweep data for each ε until `c_budget ε^{-2}` or a norm exit.
///
/// Runs execute concurrently. Failures inside a run are recorded, not raised.
pub fn lifespan_sweep(
    integrator: &Integrator,
    eps_list: &[f64],
    s: SobolevIndex,
    c_budget: f64,
) -> Result<Vec<LifespanRecord>> {
    if !(c_budget > 0.0) {
        return Err(Error::Config("c_budget must be positive".into()));
    }
    for w in eps_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
    }
    if let Some(e) = eps_list.iter().find(|&&e| !(0.0..=0.2).contains(&e)) {
        return Err(Error::Config(format!("eps must lie in [0, 0.2], got {e}")));
    }
    Ok(eps_list
        .par_iter()
        .map(|&eps| lifespan_run(integrator, eps, s, c_budget))
        .collect())
}

fn lifespan_run(integrator: &Integrator, eps: f64, s: SobolevIndex, c_budget: f64) -> LifespanRecord {
    if eps == 0.0 {
        return LifespanRecord {
            eps,
            t_budget: f64::INFINITY,
            t_observed: 0.0,
            exit_reason: ExitReason::Trivial,
            sup_ratio: 0.0,
            detail: None,
        };
    }
    let t_budget = c_budget / (eps * eps);
    let dt = integrator.config().dt;
    let steps = (t_budget / dt).ceil() as usize;
    let mut rec = LifespanRecord {
        eps,
        t_budget,
        t_observed: 0.0,
        exit_reason: ExitReason::Budget,
        sup_ratio: 1.0,
        detail: None,
    };
    let start = sweep_initial_h(integrator.n, eps, s)
        .and_then(|h| PatchState::new(h, 0.0))
        .map(|p| h_to_f(&p));
    let mut q = match start {
        Ok(q) => q,
        Err(e) => {
            rec.exit_reason = ExitReason::Blowup;
            rec.detail = Some(e.to_string());
            return rec;
        }
    };
    for _ in 0..steps {
        let next = integrator.step(&q);
        let h_norm = next
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|n| f_to_h(n).map(|p| (n.f.hs_norm(s.value()), p.h.hs_norm(s.value()))));
        match (next, h_norm) {
            (Ok(n), Ok((f_norm, h_norm))) => {
                q = n;
                rec.t_observed = q.t;
                rec.sup_ratio = rec.sup_ratio.max(h_norm / eps);
                if f_norm > 10.0 * eps {
                    rec.exit_reason = ExitReason::Blowup;
                    rec.detail = Some(format!("|f|_s = {f_norm:e} exceeds 10 eps"));
                    return rec;
                }
                if h_norm >= 2.0 * eps {
                    rec.exit_reason = ExitReason::Norm;
                    return rec;
                }
            }
            (_, Err(e)) => {
                rec.exit_reason = ExitReason::Blowup;
                rec.detail = Some(e.to_string());
                return rec;
            }
            (Err(e), _) => {
                rec.exit_reason = ExitReason::Blowup;
                rec.detail = Some(e.to_string());
                return rec;
            }
        }
    }
    rec
}

/// CSV with header `eps,T_budget,T_observed,exit_reason,sup_ratio`.
pub fn sweep_csv(records: &[LifespanRecord]) -> String {
    let mut out = String::from("eps,T_budget,T_observed,exit_reason,sup_ratio\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(r.eps),
            fmt_f64(r.t_budget),
            fmt_f64(r.t_observed),
            r.exit_reason.as_str(),
            fmt_f64(r.sup_ratio)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::QuadratureConfig;
    use crate::dispersion::Alpha;

    fn integrator(scheme: Scheme, dt: f64, t_end: f64, n: usize) -> Integrator {
        let model = ContourModel::new(Alpha::new(0.5).unwrap(), QuadratureConfig::oversample(2)).unwrap();
        let cfg = IntegratorConfig {
            dt,
            scheme,
            t_end,
            record_conserved: false,
            ..IntegratorConfig::default()
        };
        Integrator::new(model, cfg, n).unwrap()
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig {
            dt: -1.0,
            ..IntegratorConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig {
            snapshot_stride: 0,
            ..IntegratorConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn equilibrium_stays_put() {
        for scheme in [Scheme::Rk4, Scheme::IfRk4] {
            let it = integrator(scheme, 0.1, 0.5, 16);
            let tr = it.evolve(&HamiltonianState::new(RealField::zeros(16).unwrap(), 0.0).unwrap()).unwrap();
            assert!(tr.states.iter().all(|f| f.max_abs() < 1e-14));
        }
    }

    #[test]
    fn snapshot_count() {
        let mut it = integrator(Scheme::IfRk4, 0.1, 1.0, 16);
        it.cfg.snapshot_stride = 3;
        let tr = it.evolve(&HamiltonianState::new(RealField::zeros(16).unwrap(), 0.0).unwrap()).unwrap();
        assert_eq!(tr.len(), (1.0f64 / (0.1 * 3.0)).floor() as usize + 1);
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,hs_norm_0,energy,momentum,area\n"));
        assert_eq!(csv.lines().count(), tr.len() + 1);
    }

    #[test]
    fn degenerate_step_reports_time() {
        let it = integrator(Scheme::Rk4, 0.1, 1.0, 16);
        let f = RealField::from_fn(16, |x| -0.55 + 0.0 * x).unwrap();
        let worse = HamiltonianState { f, t: 2.0 };
        assert!(matches!(it.step(&worse), Err(Error::Blowup { t, .. }) if t == 2.0));
    }

    #[test]
    fn zero_eps_is_trivial() {
        let it = integrator(Scheme::IfRk4, 0.1, 1.0, 16);
        let rec = lifespan_sweep(&it, &[0.0], SobolevIndex::new(3.0).unwrap(), 1.0).unwrap();
        assert_eq!(rec[0].exit_reason, ExitReason::Trivial);
        assert_eq!(rec[0].sup_ratio, 0.0);
        assert!(lifespan_sweep(&it, &[0.05, 0.1], SobolevIndex::new(3.0).unwrap(), 1.0).is_err());
        assert!(lifespan_sweep(&it, &[0.3], SobolevIndex::new(3.0).unwrap(), 1.0).is_err());
        let csv = sweep_csv(&rec);
        assert!(csv.starts_with("eps,T_budget,T_observed,exit_reason,sup_ratio\n"));
    }

    #[test]
    fn sweep_data_has_unit_ratio() {
        let s = SobolevIndex::new(3.0).unwrap();
        let h = sweep_initial_h(32, 0.05, s).unwrap();
        assert!((h.hs_norm(3.0) - 0.05).abs() < 1e-15);
    }
}
