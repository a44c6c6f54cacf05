//! Homological equations for the transport and Birkhoff generators, and
//! numerical experiments on the resulting conjugations.
//!
//! Band operators are bilinear: `C(f)v = Σ C_{n,j,k} f_n v_j e^{ikx}` with
//! `k = n + j` and `n, j, k` nonzero, `|n|, |j|, |k| ≤ K`. Reality means
//! `conj(C_{n,j,k}) = C_{-n,-j,-k}`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dispersion::{Dispersion, DispersionTable};
use crate::error::{Error, Result};
use crate::paradiff::{
    bony_weyl, hs_norm_modes, matrix_exp, mode_unit, modes_of, CutoffChi, CutoffPsi, HomogeneousSymbol,
    ModeOperator, ModeVector,
};
use crate::spectral::RealField;
use crate::util::{fmt_f64, loglog_fit};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coefficients `C_{n,j,k}` on the band `k = n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCoefficients {
    k_max: usize,
    data: Vec<Complex64>,
}

impl BandCoefficients {
    pub fn zeros(k_max: usize) -> Self {
        let d = 2 * k_max + 1;
        Self {
            k_max,
            data: vec![ZERO; d * d],
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Whether `(n, j, n + j)` is an admissible band index.
    pub fn admissible(&self, n: i64, j: i64) -> bool {
        let k = self.k_max as i64;
        let s = n + j;
        n != 0 && j != 0 && s != 0 && n.abs() <= k && j.abs() <= k && s.abs() <= k
    }

    fn slot(&self, n: i64, j: i64) -> usize {
        let d = 2 * self.k_max as i64 + 1;
        ((n + self.k_max as i64) * d + j + self.k_max as i64) as usize
    }

    /// `C_{n,j,n+j}`; zero off the band.
    pub fn get(&self, n: i64, j: i64) -> Complex64 {
        if self.admissible(n, j) {
            self.data[self.slot(n, j)]
        } else {
            ZERO
        }
    }

    pub fn set(&mut self, n: i64, j: i64, k: i64, v: Complex64) -> Result<()> {
        if k != n + j {
            return Err(Error::Band(format!("index ({n},{j},{k}) violates k = n + j")));
        }
        if !self.admissible(n, j) {
            return Err(Error::Band(format!(
                "index ({n},{j},{k}) excluded: zero index or outside |.| <= {}",
                self.k_max
            )));
        }
        let s = self.slot(n, j);
        self.data[s] = v;
        Ok(())
    }

    pub fn from_entries(k_max: usize, entries: impl IntoIterator<Item = (i64, i64, i64, Complex64)>) -> Result<Self> {
        let mut b = Self::zeros(k_max);
        for (n, j, k, v) in entries {
            b.set(n, j, k, v)?;
        }
        Ok(b)
    }

    /// Admissible `(n, j, k, C_{n,j,k})`, in lexicographic `(n, j)` order.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, i64, Complex64)> + '_ {
        let k = self.k_max as i64;
        (-k..=k).flat_map(move |n| {
            (-k..=k)
                .filter(move |&j| self.admissible(n, j))
                .map(move |j| (n, j, n + j, self.data[self.slot(n, j)]))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |conj(C_{n,j,k}) - C_{-n,-j,-k}|`.
    pub fn reality_defect(&self) -> f64 {
        self.entries()
            .map(|(n, j, _, v)| (v.conj() - self.get(-n, -j)).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            k_max: self.k_max,
            data: self.data.iter().map(|z| z * a).collect(),
        }
    }

    /// The matrix of `v ↦ C(f)v`: entry `(k, j)` is `Σ_n C_{n,j,k} f_n`.
    pub fn operator(&self, f: &ModeVector) -> Result<ModeOperator> {
        let k = self.k_max as i64;
        if f.len() != 2 * self.k_max + 1 {
            return Err(Error::Band(format!(
                "field has {} modes, band expects {}",
                f.len(),
                2 * self.k_max + 1
            )));
        }
        let mut op = ModeOperator::zeros(self.k_max);
        for (n, j, kk, v) in self.entries() {
            let fn_ = f[(n + k) as usize];
            let cur = op.entry(kk, j);
            op.set(kk, j, cur + v * fn_);
        }
        Ok(op)
    }

    /// CSV with header `n,j,k,re,im`, one row per admissible nonzero entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,j,k,re,im\n");
        for (n, j, k, v) in self.entries().filter(|e| e.3 != ZERO) {
            let _ = writeln!(out, "{n},{j},{k},{},{}", fmt_f64(v.re), fmt_f64(v.im));
        }
        out
    }

    pub fn from_csv(k_max: usize, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "n,j,k,re,im" => {}
            other => return Err(Error::Data(format!("bad band header {other:?}"))),
        }
        let mut b = Self::zeros(k_max);
        for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(Error::Data(format!("row {}: expected 5 columns", row + 2)));
            }
            let int = |s: &str| s.parse::<i64>().map_err(|e| Error::Data(format!("row {}: {e}", row + 2)));
            let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Data(format!("row {}: {e}", row + 2)));
            b.set(int(cols[0])?, int(cols[1])?, int(cols[2])?, Complex64::new(real(cols[3])?, real(cols[4])?))?;
        }
        Ok(b)
    }
}

/// `β(f; x) = Σ β_j f_j e^{ijx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportGenerator {
    k_max: usize,
    /// `β_j` at index `j + K`; `β_0 = 0`.
    pub beta: Vec<Complex64>,
}

impl TransportGenerator {
    pub fn coeff(&self, j: i64) -> Complex64 {
        if j.unsigned_abs() as usize > self.k_max {
            ZERO
        } else {
            self.beta[(j + self.k_max as i64) as usize]
        }
    }

    /// `β(f; ·)` as a real field on the grid of `f`.
    pub fn apply(&self, f: &RealField) -> Result<RealField> {
        let k = self.k_max as i64;
        RealField::from_coeffs(f.n_modes(), |j| if j.abs() <= k { self.coeff(j) * f.coeff(j) } else { ZERO })
    }
}

fn check_mode_reality(v: &[Complex64], what: &str) -> Result<()> {
    let k = v.len() / 2;
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for j in 0..=k {
        let d = (v[k + j].conj() - v[k - j]).norm();
        if d > 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Data(format!("{what} violates reality at mode {j} by {d:e}")));
        }
    }
    Ok(())
}

/// `β_j = -(V₁)_j / (i ω̇(j))` for `v1` given on modes `[-K, K]`.
pub fn solve_transport_generator(v1: &[Complex64], disp: &DispersionTable) -> Result<TransportGenerator> {
    if v1.len() % 2 == 0 {
        return Err(Error::Data("transport data needs modes -K..=K".into()));
    }
    let k_max = v1.len() / 2;
    if k_max > disp.j_max() {
        return Err(Error::Config(format!(
            "band K = {k_max} exceeds dispersion table j_max = {}",
            disp.j_max()
        )));
    }
    check_mode_reality(v1, "V1")?;
    if v1[k_max] != ZERO {
        return Err(Error::Data("V1 has a mean component, which no generator removes".into()));
    }
    let beta = (-(k_max as i64)..=k_max as i64)
        .map(|j| {
            if j == 0 {
                Ok(ZERO)
            } else {
                Ok(-v1[(j + k_max as i64) as usize] / (I * disp.omega_dot(j)?))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransportGenerator { k_max, beta })
}

/// `max_j |(V₁)_j - β_j (-i ω̇(j))|`, with ω̇ evaluated afresh.
pub fn transport_residual(v1: &[Complex64], beta: &TransportGenerator, disp: &Dispersion) -> f64 {
    let k = (v1.len() / 2) as i64;
    (-k..=k)
        .filter(|&j| j != 0)
        .map(|j| {
            let wd = disp.omega_dot(j).unwrap();
            (v1[(j + k) as usize] - beta.coeff(j) * Complex64::new(0.0, -wd)).norm()
        })
        .fold(0.0, f64::max)
}

/// Solution `Q` of `Q(-iω̇f) + [Q(f), -iω̇(D)] + R(f) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffGenerator {
    pub q: BandCoefficients,
    /// Smallest `|ω̇(k) - ω̇(j) - ω̇(n)|` used.
    pub min_divisor: f64,
}

/// `Q_{n,j,k} = -R_{n,j,k} / (i (ω̇(k) - ω̇(j) - ω̇(n)))`.
pub fn solve_birkhoff_generator(r: &BandCoefficients, disp: &DispersionTable) -> Result<BirkhoffGenerator> {
    if r.k_max() > disp.j_max() {
        return Err(Error::Config(format!(
            "band K = {} exceeds dispersion table j_max = {}",
            r.k_max(),
            disp.j_max()
        )));
    }
    let floor = disp.omega(2)? * (1.0 - 1e-10);
    let mut q = BandCoefficients::zeros(r.k_max());
    let mut min_divisor = f64::INFINITY;
    for (n, j, k, v) in r.entries() {
        let div = disp.three_wave_divisor(j, n)?;
        if div.abs() < floor {
            return Err(Error::Generator(format!(
                "divisor {div:e} at ({n},{j},{k}) below the three-wave floor"
            )));
        }
        min_divisor = min_divisor.min(div.abs());
        q.set(n, j, k, -v / (I * div))?;
    }
    Ok(BirkhoffGenerator { q, min_divisor })
}

/// Largest residual entry of the homological equation and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub argmax: Option<(i64, i64, i64)>,
}

/// `q_{n,j,k} i (ω(k) - ω(j) - ω(n)) + r_{n,j,k}` over the band, with ω
/// taken from a fresh [`Dispersion`] rather than the solver's table.
pub fn homological_residual(q: &BandCoefficients, r: &BandCoefficients, disp: &Dispersion) -> ResidualReport {
    let mut rep = ResidualReport {
        max_abs: 0.0,
        argmax: None,
    };
    for (n, j, k, rv) in r.entries() {
        let div = disp.omega(k).unwrap() - disp.omega(j).unwrap() - disp.omega(n).unwrap();
        let res = (q.get(n, j) * I * div + rv).norm();
        if rep.argmax.is_none() || res > rep.max_abs {
            rep.max_abs = res;
            rep.argmax = Some((n, j, k));
        }
    }
    rep
}

/// Diagonal `-iω̇(D)` on modes `[-K, K]`.
fn dispersive_operator(k_max: usize, disp: &Dispersion) -> ModeOperator {
    ModeOperator::multiplier(k_max, |j| if j == 0 { ZERO } else { Complex64::new(0.0, -disp.omega_dot_real(j as f64)) })
}

fn dispersive_modes(f: &ModeVector, disp: &Dispersion) -> ModeVector {
    let k = (f.len() / 2) as i64;
    ModeVector::from_iterator(
        f.len(),
        f.iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::new(0.0, -disp.omega_dot_real((i as i64 - k) as f64))),
    )
}

/// `max |Q(-iω̇f) + [Q(f), -iω̇(D)] + R(f)|` as matrices, for field modes `f`.
pub fn homological_operator_residual(
    q: &BandCoefficients,
    r: &BandCoefficients,
    f: &ModeVector,
    disp: &Dispersion,
) -> Result<f64> {
    let w = dispersive_operator(q.k_max(), disp);
    let lhs = q
        .operator(&dispersive_modes(f, disp))?
        .add(&q.operator(f)?.commutator(&w), Complex64::new(1.0, 0.0))
        .add(&r.operator(f)?, Complex64::new(1.0, 0.0));
    Ok(lhs.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Growth rates of `‖g‖_s` at `t = 0` before and after conjugation.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellationReport {
    pub eps: Vec<f64>,
    pub growth_before: Vec<f64>,
    pub growth_after: Vec<f64>,
    pub slope_before: f64,
    pub slope_after: f64,
    /// `|growth_before / growth_after|` at the smallest ε.
    pub reduction: f64,
    /// `max_ε ‖Ψ⁻¹Ψf - f‖_s / ‖f‖_s`.
    pub inversion_defect: f64,
}

impl CancellationReport {
    pub fn cancelled(&self) -> bool {
        self.slope_after >= 2.9 || self.reduction >= 100.0
    }

    /// CSV with header `eps,growth_before,growth_after`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,growth_before,growth_after\n");
        for i in 0..self.eps.len() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(self.eps[i]),
                fmt_f64(self.growth_before[i]),
                fmt_f64(self.growth_after[i])
            );
        }
        out
    }
}

/// `Re⟨g, g_t⟩_s / ‖g‖_s`.
fn norm_rate(g: &ModeVector, gt: &ModeVector, s: f64) -> f64 {
    let k = (g.len() / 2) as i64;
    let inner: f64 = g
        .iter()
        .zip(gt.iter())
        .enumerate()
        .map(|(i, (a, b))| crate::spectral::japanese((i as i64 - k) as f64).powf(2.0 * s) * (a.conj() * b).re)
        .sum();
    inner / hs_norm_modes(g, s)
}

/// Synthetic model `f_t = -iω̇(D)f + B(f)f` on modes `[-K, K]`: compares the
/// growth of `‖f‖_s` with that of `‖g‖_s`, `g = exp(Q(f))f`, where `Q` solves
/// the homological equation with `R = B`. Data: `ε (cos x + cos 2x)/‖·‖_s`.
pub fn quadratic_cancellation_experiment(
    b: &BandCoefficients,
    eps_list: &[f64],
    s: f64,
    disp: &DispersionTable,
) -> Result<CancellationReport> {
    let k_max = b.k_max();
    if k_max < 2 {
        return Err(Error::Config("band must contain modes 1 and 2".into()));
    }
    if b.reality_defect() > 1e-14 * b.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Data("B must be real-to-real".into()));
    }
    let gen = solve_birkhoff_generator(b, disp)?;
    let d = disp.dispersion();
    let shape = {
        let mut v = ModeVector::from_element(2 * k_max + 1, ZERO);
        for j in [-2i64, -1, 1, 2] {
            v[(j + k_max as i64) as usize] = Complex64::new(0.5, 0.0);
        }
        let norm = hs_norm_modes(&v, s);
        v / Complex64::new(norm, 0.0)
    };
    let mut rep = CancellationReport {
        eps: eps_list.to_vec(),
        growth_before: Vec::new(),
        growth_after: Vec::new(),
        slope_before: f64::NAN,
        slope_after: f64::NAN,
        reduction: f64::NAN,
        inversion_defect: 0.0,
    };
    let dim = 2 * k_max + 1;
    for &eps in eps_list {
        let f = &shape * Complex64::new(eps, 0.0);
        let ft = dispersive_modes(&f, d) + b.operator(&f)?.apply(&f);
        rep.growth_before.push(norm_rate(&f, &ft, s));

        let qf = gen.q.operator(&f)?.into_matrix();
        let qft = gen.q.operator(&ft)?.into_matrix();
        // exp([[A, E], [0, A]]) carries D exp(A)[E] in its upper-right block
        let mut block = DMatrix::from_element(2 * dim, 2 * dim, ZERO);
        block.view_mut((0, 0), (dim, dim)).copy_from(&qf);
        block.view_mut((dim, dim), (dim, dim)).copy_from(&qf);
        block.view_mut((0, dim), (dim, dim)).copy_from(&qft);
        let e = matrix_exp(&block);
        let psi = e.view((0, 0), (dim, dim)).into_owned();
        let dpsi = e.view((0, dim), (dim, dim)).into_owned();
        let g = &psi * &f;
        let gt = &psi * &ft + &dpsi * &f;
        rep.growth_after.push(norm_rate(&g, &gt, s));

        let back = matrix_exp(&(-&qf)) * &g;
        rep.inversion_defect = rep.inversion_defect.max(hs_norm_modes(&(back - &f), s) / hs_norm_modes(&f, s));
    }
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    rep.slope_before = loglog_fit(eps_list, &abs(&rep.growth_before)).0;
    rep.slope_after = loglog_fit(eps_list, &abs(&rep.growth_after)).0;
    if let Some(i) = (0..eps_list.len()).min_by(|&a, &b| eps_list[a].total_cmp(&eps_list[b])) {
        rep.reduction = (rep.growth_before[i] / rep.growth_after[i]).abs();
    }
    Ok(rep)
}

/// Order of a paradifferential term before and after one reduction step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    pub k: i64,
    pub order_before: f64,
    pub order_after: f64,
}

/// One step of the order-reduction scheme: for the term `-i Op(a(f))` with
/// `a(f; x, ξ) = Σ f_n a_n(ξ) e^{inx}`, the generator `g_n = i a_n / ω̇(n)`
/// cancels it, leaving `[i Op(g(f)), -iω̇(D)]`. Orders are two-point slopes of
/// `‖T e_k‖` between `k` and `2k`.
pub fn reduction_step<A>(
    a: A,
    f: &RealField,
    disp: &Dispersion,
    k: i64,
    k_max: usize,
    chi: CutoffChi,
) -> Result<ReductionReport>
where
    A: Fn(i64, f64) -> Complex64 + Sync,
{
    if k <= 0 || 2 * k > k_max as i64 {
        return Err(Error::Domain(format!("modes {k} and {} must lie in 1..={k_max}", 2 * k)));
    }
    let fm = modes_of(f, k_max)?;
    let term = bony_weyl(
        &HomogeneousSymbol {
            order: 0.0,
            mu: 0.0,
            u: f.clone(),
            coeff_fn: &a,
        },
        k_max,
        chi,
    )
    .scale(-I);
    let g_coeff = |n: i64, xi: f64| I * a(n, xi) / disp.omega_dot_real(n as f64);
    let gen = |u: &RealField| {
        bony_weyl(
            &HomogeneousSymbol {
                order: 0.0,
                mu: 0.0,
                u: u.clone(),
                coeff_fn: g_coeff,
            },
            k_max,
            chi,
        )
        .scale(I)
    };
    let wf = {
        let n = f.n_modes();
        let v = dispersive_modes(&fm, disp);
        RealField::from_coeffs(n, |j| if j.unsigned_abs() as usize <= k_max { v[(j + k_max as i64) as usize] } else { ZERO })?
    };
    let w = dispersive_operator(k_max, disp);
    let residual = term
        .add(&gen(&wf), Complex64::new(1.0, 0.0))
        .add(&gen(f).commutator(&w), Complex64::new(1.0, 0.0));
    let order = |op: &ModeOperator| {
        let size = |kk: i64| op.apply(&mode_unit(k_max, kk)).norm();
        (size(2 * k) / size(k)).log2()
    };
    Ok(ReductionReport {
        k,
        order_before: order(&term),
        order_after: order(&residual),
    })
}

/// Odd, real symbol `ψ(ξ) ξ |ξ|^{δ-1}`, making `-i Op(a)` real-to-real.
pub fn odd_power_symbol(delta: f64) -> impl Fn(i64, f64) -> Complex64 + Sync {
    move |_n, xi| Complex64::new(CutoffPsi.eval(xi) * xi.signum() * xi.abs().powf(delta), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Alpha;

    fn table(a: f64, j: usize) -> DispersionTable {
        DispersionTable::build(Alpha::new(a).unwrap(), j).unwrap()
    }

    #[test]
    fn band_index_rules() {
        let mut b = BandCoefficients::zeros(4);
        assert!(b.set(1, 1, 2, Complex64::new(1.0, 0.0)).is_ok());
        assert!(matches!(b.set(1, 1, 3, ZERO), Err(Error::Band(_))));
        assert!(matches!(b.set(0, 2, 2, ZERO), Err(Error::Band(_))));
        assert!(matches!(b.set(2, -2, 0, ZERO), Err(Error::Band(_))));
        assert!(matches!(b.set(3, 3, 6, ZERO), Err(Error::Band(_))));
        assert_eq!(b.get(1, 1), Complex64::new(1.0, 0.0));
        assert_eq!(b.get(0, 1), ZERO);
    }

    #[test]
    fn csv_round_trip() {
        let b = BandCoefficients::from_entries(
            3,
            [(1, 1, 2, Complex64::new(0.25, -1.0 / 3.0)), (-1, -1, -2, Complex64::new(0.25, 1.0 / 3.0))],
        )
        .unwrap();
        let csv = b.to_csv();
        assert!(csv.starts_with("n,j,k,re,im\n"));
        assert_eq!(BandCoefficients::from_csv(3, &csv).unwrap(), b);
        assert!(matches!(BandCoefficients::from_csv(3, "a,b\n"), Err(Error::Data(_))));
        assert!(matches!(BandCoefficients::from_csv(3, "n,j,k,re,im\n0,1,1,0,0\n"), Err(Error::Band(_))));
    }

    #[test]
    fn operator_layout() {
        let b = BandCoefficients::from_entries(3, [(1, 1, 2, Complex64::new(2.0, 0.0))]).unwrap();
        let mut f = ModeVector::from_element(7, ZERO);
        f[4] = Complex64::new(0.5, 0.0);
        let op = b.operator(&f).unwrap();
        assert_eq!(op.entry(2, 1), Complex64::new(1.0, 0.0));
        assert_eq!(op.matrix().iter().filter(|z| **z != ZERO).count(), 1);
    }

    #[test]
    fn zero_data_gives_zero_generators() {
        let t = table(0.5, 8);
        let beta = solve_transport_generator(&vec![ZERO; 17], &t).unwrap();
        assert!(beta.beta.iter().all(|z| *z == ZERO));
        let q = solve_birkhoff_generator(&BandCoefficients::zeros(8), &t).unwrap();
        assert_eq!(q.q.max_abs(), 0.0);
        let rep = homological_residual(&q.q, &BandCoefficients::zeros(0), t.dispersion());
        assert_eq!(rep.max_abs, 0.0);
    }

    #[test]
    fn transport_input_checks() {
        let t = table(0.5, 8);
        let mut v = vec![ZERO; 5];
        v[3] = Complex64::new(0.0, 1.0);
        assert!(matches!(solve_transport_generator(&v, &t), Err(Error::Data(_))));
        let mut m = vec![ZERO; 5];
        m[2] = Complex64::new(1.0, 0.0);
        assert!(matches!(solve_transport_generator(&m, &t), Err(Error::Data(_))));
        assert!(matches!(solve_transport_generator(&vec![ZERO; 41], &t), Err(Error::Config(_))));
    }
}
