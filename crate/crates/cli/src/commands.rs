//! Subcommand bodies. Each returns its artifacts and the properties it checked.

use std::fmt::Write as _;

use num_complex::Complex64;
use patchlab_core::contour::{h_to_f, ContourModel, HamiltonianState, PatchState};
use patchlab_core::normal_form::{
    homological_residual, quadratic_cancellation_experiment, solve_birkhoff_generator, solve_transport_generator,
    transport_residual, BandCoefficients,
};
use patchlab_core::paradiff::{
    bony_weyl, commutator_order_check, flow_smoothing, flow_transport, random_unit_modes, real_multiplier,
    CutoffChi, CutoffPsi, GeneralSymbol, ModeOperator, SeparableSymbol, SmoothingOperator, TAU_STEPS,
};
use patchlab_core::spectral::japanese;
use patchlab_core::timestep::{lifespan_sweep, sweep_csv, sweep_initial_h, ExitReason, Integrator};
use patchlab_core::util::{fmt_f64, loglog_fit};
use patchlab_core::{Dispersion, DispersionTable, RealField, SobolevIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::output::{Artifact, Check, Outcome};
use crate::svg::{Plot, Series};
use crate::CliError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ω̇_α(j)` table with a log–log plot of `|ω̇_α|` and its fitted slope.
pub fn cmd_dispersion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let alpha = cfg.alpha()?;
    let j_max = cfg.dispersion.j_max;
    if j_max < 2 {
        return Err(CliError::Config(format!("dispersion.j_max must be >= 2, got {j_max}")));
    }
    let table = DispersionTable::build(alpha, j_max)?;
    let js: Vec<f64> = (1..=j_max).map(|j| j as f64).collect();
    let w: Vec<f64> = table.omega_dot_values().iter().map(|v| v.abs()).collect();
    let (slope, _, _) = loglog_fit(&js, &w);
    let a = alpha.value();
    let plot = Plot {
        title: format!("|omega_dot| for alpha = {a}"),
        x_label: "j".into(),
        y_label: "|omega_dot(j)|".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: "|omega_dot|".into(),
            points: js.iter().copied().zip(w.iter().copied()).collect(),
        }],
        annotation: Some(format!("fitted slope = {slope:.4}")),
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact::text("dispersion.csv", table.to_csv()),
            Artifact::text("dispersion.svg", plot.render()),
        ],
        checks: vec![Check::new(
            "log-log slope of |omega_dot| within 0.02 of alpha",
            (slope - a).abs() <= 0.02,
            format!("slope {} vs alpha {a}", fmt_f64(slope)),
        )],
    })
}

/// Three-wave divisors on `|j|, |n|, |j + n| ≤ K` against the floor `ω_α(2)`.
pub fn cmd_resonance(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let disp = Dispersion::new(cfg.alpha()?);
    let k_max = cfg.resonance.k_max as i64;
    let rep = disp.resonance_scan(k_max)?;
    let floor = rep.floor;
    let mut csv = String::from("k,min_abs_divisor,floor_ratio\n");
    let mut points = Vec::new();
    for k in 1..=k_max {
        let mut best = f64::INFINITY;
        for j in -k_max..=k_max {
            let n = k - j;
            if j != 0 && n != 0 && n.abs() <= k_max {
                best = best.min(disp.three_wave_divisor(j, n)?.abs());
            }
        }
        if best.is_finite() {
            let _ = writeln!(csv, "{k},{},{}", fmt_f64(best), fmt_f64(best / floor));
            points.push((k as f64, best));
        }
    }
    let plot = Plot {
        title: format!("min |three-wave divisor| by output mode, alpha = {}", cfg.alpha),
        x_label: "k".into(),
        y_label: "min |divisor|".into(),
        log_x: false,
        log_y: true,
        series: vec![
            Series {
                label: "min |divisor|".into(),
                points,
            },
            Series {
                label: "omega(2)".into(),
                points: vec![(1.0, floor), (k_max as f64, floor)],
            },
        ],
        annotation: Some(format!("floor ratio = {:.12}", rep.floor_ratio)),
    };
    let (j, n) = rep.argmin;
    Ok(Outcome {
        artifacts: vec![
            Artifact::text("resonance.csv", csv),
            Artifact::text("resonance.svg", plot.render()),
        ],
        checks: vec![Check::new(
            "floor_ratio >= 1 - 1e-10",
            rep.floor_ratio >= 1.0 - 1e-10,
            format!(
                "floor_ratio {} at (j, n) = ({j}, {n}); {} triads",
                fmt_f64(rep.floor_ratio),
                rep.triads_scanned
            ),
        )],
    })
}

fn model(cfg: &RunConfig) -> Result<ContourModel, CliError> {
    Ok(ContourModel::new(cfg.alpha()?, cfg.quadrature())?)
}

/// Trajectory from `ε (cos x + cos 2x)` normalised in `H^{s_list[0]}`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = model(cfg)?;
    let n = cfg.n_modes;
    let eps = cfg.simulate.eps;
    if !(eps > 0.0 && eps <= 0.2) {
        return Err(CliError::Config(format!("simulate.eps must lie in (0, 0.2], got {eps}")));
    }
    let it = Integrator::new(m, cfg.integrator_config(), n)?;
    let s = SobolevIndex::new(cfg.s_list[0])?;
    let h = sweep_initial_h(n, eps, s)?;
    let q0 = h_to_f(&PatchState::new(h, 0.0)?);
    let traj = it.evolve(&q0)?;

    let series = cfg
        .s_list
        .iter()
        .enumerate()
        .map(|(i, s)| Series {
            label: format!("H^{s} norm"),
            points: traj.times.iter().zip(&traj.hs_norms).map(|(&t, v)| (t, v[i])).collect(),
        })
        .collect();
    let plot = Plot {
        title: format!("Sobolev norms, alpha = {}, eps = {eps}", cfg.alpha),
        x_label: "t".into(),
        y_label: "norm".into(),
        log_x: false,
        log_y: false,
        series,
        annotation: None,
    };
    let mut checks = Vec::new();
    if cfg.integrator.record_conserved {
        let e_disc = m.conserved(&HamiltonianState::new(RealField::zeros(n)?, 0.0)?)?.energy;
        let c0 = traj.conserved[0];
        let (mut dj, mut da, mut de) = (0.0_f64, 0.0_f64, 0.0_f64);
        for c in &traj.conserved {
            dj = dj.max(((c.momentum - c0.momentum) / c0.momentum).abs());
            da = da.max((c.area - c0.area).abs());
            de = de.max(((c.energy - c0.energy) / (c0.energy - e_disc)).abs());
        }
        checks.push(Check::new("|dJ|/J <= 1e-6", dj <= 1e-6, format!("max {}", fmt_f64(dj))));
        checks.push(Check::new("|dA| <= 1e-12", da <= 1e-12, format!("max {}", fmt_f64(da))));
        checks.push(Check::new(
            "|dE|/|E - E(0)| <= 1e-4",
            de <= 1e-4,
            format!("max {}", fmt_f64(de)),
        ));
    }
    Ok(Outcome {
        artifacts: vec![
            Artifact::text("trajectory.csv", traj.to_csv()),
            Artifact::text("trajectory.svg", plot.render()),
        ],
        checks,
    })
}

/// Runs to `c ε^{-2}` for each ε, checking `sup ‖h‖_{H^s} ≤ 2ε`.
pub fn cmd_lifespan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut icfg = cfg.integrator_config();
    icfg.record_conserved = false;
    let it = Integrator::new(model(cfg)?, icfg, cfg.n_modes)?;
    let s = SobolevIndex::new(cfg.s_list[0])?;
    let recs = lifespan_sweep(&it, &cfg.lifespan.eps_list, s, cfg.lifespan.c_budget)?;
    let pts: Vec<(f64, f64)> = recs.iter().map(|r| (r.eps, r.t_observed)).collect();
    let (slope, _, used) = loglog_fit(
        &pts.iter().map(|p| p.0).collect::<Vec<_>>(),
        &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    let plot = Plot {
        title: format!("observed lifespan, alpha = {}, c = {}", cfg.alpha, cfg.lifespan.c_budget),
        x_label: "eps".into(),
        y_label: "T_observed".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: "T_observed".into(),
            points: pts,
        }],
        annotation: (used >= 2).then(|| format!("fitted slope = {slope:.4}")),
    };
    let checks = recs
        .iter()
        .map(|r| {
            Check::new(
                &format!("eps = {}: sup ||h||_s <= 2 eps up to c eps^-2", r.eps),
                r.exit_reason == ExitReason::Budget && r.sup_ratio <= 2.0,
                format!(
                    "exit {}, sup ratio {}, t {}{}",
                    r.exit_reason.as_str(),
                    fmt_f64(r.sup_ratio),
                    fmt_f64(r.t_observed),
                    r.detail.as_deref().map(|d| format!(", {d}")).unwrap_or_default()
                ),
            )
        })
        .collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact::text("sweep.csv", sweep_csv(&recs)),
            Artifact::text("lifespan.svg", plot.render()),
        ],
        checks,
    })
}

/// Quantization identities, the commutator order drop, and flow inversion.
pub fn cmd_paradiff_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let alpha = cfg.alpha()?;
    let chi = CutoffChi::default();
    let mut checks = Vec::new();
    let mut csv = String::from("quantity,value\n");

    let id = bony_weyl(&real_multiplier(|_| 1.0), 40, chi) == ModeOperator::identity(40);
    checks.push(Check::new("Op(1) = Id exactly", id, String::new()));
    let m = |xi: f64| japanese(xi).powf(alpha.value()) * xi.signum();
    let mult = bony_weyl(&real_multiplier(m), 40, chi) == ModeOperator::multiplier(40, |j| c(m(j as f64), 0.0));
    checks.push(Check::new("Op(m(xi)) = m(D) exactly", mult, String::new()));
    let cut = CutoffPsi.smooth(|xi: f64| japanese(xi).sqrt());
    let leak = bony_weyl(
        &SeparableSymbol {
            profile: RealField::from_fn(32, |x| 0.3 * x.cos() - 0.2 * (2.0 * x).sin())?,
            mult: move |xi: f64| c(cut(xi), 0.0),
        },
        15,
        chi,
    )
    .zero_mode_leak();
    checks.push(Check::new("zero mean preserved", leak == 0.0, format!("leak {}", fmt_f64(leak))));
    let a = |x: f64, xi: f64| c(x.cos() * xi + (2.0 * x).sin(), (3.0 * x).cos() * xi * xi);
    let lhs = bony_weyl(&GeneralSymbol { grid: 64, eval: a }, 20, chi).pairing_transpose();
    let rhs = bony_weyl(
        &GeneralSymbol {
            grid: 64,
            eval: |x: f64, xi: f64| a(x, -xi),
        },
        20,
        chi,
    );
    checks.push(Check::new("transpose = Op(a(x, -xi)) exactly", lhs == rhs, String::new()));

    let disp = Dispersion::new(alpha);
    let w = CutoffPsi.smooth(move |xi| disp.omega_dot_real(xi));
    let dw = move |xi: f64| if xi.abs() >= 0.25 { disp.omega_dot_derivative(xi) } else { 0.0 };
    let sym = SeparableSymbol {
        profile: RealField::from_fn(32, |x| 0.3 * x.cos() - 0.2 * (2.0 * x).sin() + 0.1 * (3.0 * x).cos())?,
        mult: |_xi: f64| c(1.0, 0.0),
    };
    let k = cfg.paradiff.k as i64;
    let rep = commutator_order_check(&sym, w, dw, k, cfg.paradiff.k_max, chi)?;
    let factor = rep.ratio_k / rep.ratio_2k;
    let _ = writeln!(csv, "commutator_ratio_{k},{}", fmt_f64(rep.ratio_k));
    let _ = writeln!(csv, "commutator_ratio_{},{}", 2 * k, fmt_f64(rep.ratio_2k));
    checks.push(Check::new(
        "commutator residual ratio drops by >= 2/1.5 from k to 2k",
        factor >= 2.0 / 1.5,
        format!("factor {}", fmt_f64(factor)),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let phases: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let raw = RealField::from_fn(64, |x| (1..=3).map(|j| (j as f64 * x + phases[j - 1]).cos() / (j * j) as f64).sum())?;
    let beta = raw.scale(0.2 / raw.spectral_derivative(1).max_abs());
    let flow = flow_transport(&beta, 32, TAU_STEPS, chi)?;
    let inv = flow.inversion_defect();
    let _ = writeln!(csv, "transport_inversion_defect,{}", fmt_f64(inv));
    checks.push(Check::new("transport flow inverse defect <= 1e-8", inv <= 1e-8, fmt_f64(inv)));

    let kq = 16i64;
    let mut op = ModeOperator::zeros(kq as usize);
    for j in -kq..=kq {
        for l in -kq..=kq {
            if j != 0 && l != 0 && (j - l).abs() <= 3 {
                let d = (j * j + l * l) as f64;
                op.set(j, l, c(0.1 / d, 0.05 * (j - l) as f64 / d));
            }
        }
    }
    let q = SmoothingOperator::new(2.0, 0.0, op)?;
    let group = flow_smoothing(&q, 0.8)?
        .compose(&flow_smoothing(&q, -0.8)?)
        .max_abs_diff(&ModeOperator::identity(kq as usize));
    let _ = writeln!(csv, "smoothing_group_defect,{}", fmt_f64(group));
    checks.push(Check::new("smoothing flow exp(tQ)exp(-tQ) = Id to 1e-10", group <= 1e-10, fmt_f64(group)));

    Ok(Outcome {
        artifacts: vec![Artifact::text("paradiff.csv", csv)],
        checks,
    })
}

fn random_real_band(k_max: usize, rng: &mut ChaCha8Rng) -> BandCoefficients {
    let mut b = BandCoefficients::zeros(k_max);
    let k = k_max as i64;
    for n in -k..=k {
        for j in -k..=k {
            if b.admissible(n, j) && (n, j) > (-n, -j) {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                b.set(n, j, n + j, v).expect("admissible");
                b.set(-n, -j, -n - j, v.conj()).expect("admissible");
            }
        }
    }
    b
}

fn chained_triads(k_max: usize) -> Result<BandCoefficients, CliError> {
    let one = c(1.0, 0.0);
    Ok(BandCoefficients::from_entries(
        k_max,
        [(1, 1, 2), (1, 2, 3), (2, 1, 3)]
            .into_iter()
            .flat_map(|(n, j, k)| [(n, j, k, one), (-n, -j, -k, one)]),
    )?)
}

/// Both homological solvers with independent residuals, and the
/// quadratic-cancellation experiment.
pub fn cmd_normalform_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let alpha = cfg.alpha()?;
    let k = cfg.band_k();
    if k < 3 || k > cfg.n_modes / 2 - 1 {
        return Err(CliError::Config(format!(
            "band K = {k} must lie in 3..={}",
            cfg.n_modes / 2 - 1
        )));
    }
    let table = DispersionTable::build(alpha, k)?;
    let fresh = Dispersion::new(alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (r, user_band) = match &cfg.normal_form.band_csv {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            (BandCoefficients::from_csv(k, &text)?, true)
        }
        None => (random_real_band(k, &mut rng), false),
    };
    let mut checks = Vec::new();

    let gen = solve_birkhoff_generator(&r, &table)?;
    let scale = r.max_abs();
    let res = homological_residual(&gen.q, &r, &fresh);
    checks.push(Check::new(
        "Birkhoff homological residual <= 1e-12 max|R|",
        res.max_abs <= 1e-12 * scale,
        match res.argmax {
            Some((n, j, k)) => format!("residual {} at ({n},{j},{k})", fmt_f64(res.max_abs)),
            None => "empty band".into(),
        },
    ));
    let floor = fresh.omega(2)?;
    checks.push(Check::new(
        "every divisor >= omega(2)(1 - 1e-10)",
        gen.min_divisor >= floor * (1.0 - 1e-10),
        format!("min divisor {}", fmt_f64(gen.min_divisor)),
    ));
    if r.reality_defect() == 0.0 {
        let d = gen.q.reality_defect();
        checks.push(Check::new(
            "real-to-real R gives real-to-real Q",
            d <= 1e-15 * gen.q.max_abs(),
            format!("defect {}", fmt_f64(d)),
        ));
    }

    let mut v1: Vec<Complex64> = random_unit_modes(k, 0.0, &mut rng).iter().copied().collect();
    v1[k] = c(0.0, 0.0);
    let beta = solve_transport_generator(&v1, &table)?;
    let v_scale = v1.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let t_res = transport_residual(&v1, &beta, &fresh);
    checks.push(Check::new(
        "transport homological identity to 1e-14",
        t_res <= 1e-14 * v_scale,
        format!("residual {}", fmt_f64(t_res)),
    ));

    let b = if user_band { r.clone() } else { chained_triads(k)? };
    let rep = quadratic_cancellation_experiment(&b, &cfg.normal_form.eps_list, cfg.s_list[0], &table)?;
    checks.push(Check::new(
        "growth slope before conjugation 2.00 +- 0.05",
        (rep.slope_before - 2.0).abs() <= 0.05,
        format!("slope {}", fmt_f64(rep.slope_before)),
    ));
    checks.push(Check::new(
        "after conjugation slope >= 2.9 or reduction >= 100x",
        rep.cancelled(),
        format!("slope {}, reduction {}", fmt_f64(rep.slope_after), fmt_f64(rep.reduction)),
    ));
    checks.push(Check::new(
        "conjugation inverts to 1e-10",
        rep.inversion_defect <= 1e-10,
        fmt_f64(rep.inversion_defect),
    ));

    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    let plot = Plot {
        title: format!("|d/dt ||g||_s| at t = 0, alpha = {}", cfg.alpha),
        x_label: "eps".into(),
        y_label: "growth".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series {
                label: "before".into(),
                points: rep.eps.iter().copied().zip(abs(&rep.growth_before)).collect(),
            },
            Series {
                label: "after".into(),
                points: rep.eps.iter().copied().zip(abs(&rep.growth_after)).collect(),
            },
        ],
        annotation: Some(format!(
            "slopes {:.3} -> {:.3}",
            rep.slope_before, rep.slope_after
        )),
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact::text("band_r.csv", r.to_csv()),
            Artifact::text("band_q.csv", gen.q.to_csv()),
            Artifact::text("slopes.csv", rep.to_csv()),
            Artifact::text("slopes.svg", plot.render()),
        ],
        checks,
    })
}
