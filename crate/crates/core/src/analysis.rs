//! Error metrics, convergence sweeps and the auxiliary-system harnesses.
//!
//! The auxiliary system on `[−1/ε1, 1/ε1]` is
//!
//! ```text
//!     i dX̂/dt = ω v(t) (sin(2ωt) σz + cos(2ωt) σy) X̂,   X̂(−1/ε1) = I,
//!     v(t)    = ε2 ĝ(t) / √(2π)
//! ```
//!
//! and one window of the lab-frame schedule (`u ≡ ν`, `v = ε2 ĝ(t − T)/√(2π)`
//! on `[0, 2T]`, `T = 1/ε1`) reduces to it after removing the `ν ω t σx`
//! rotation. Working that change of frame through gives the interaction
//! Hamiltonian `ω v(t) (cos(2νωt) σy − sin(2νωt) σz)`, which equals the
//! auxiliary Hamiltonian at `+ω` for `ν = −1` and its σy-conjugate for
//! `ν = +1`. [`frame_check`] compares against that form and also
//! reports the distance to the `X̂(νω, T)` form for reference.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::fourier::{log_grid, DecayReport, FourierKernel, QuadratureRule};
use crate::parallel;
use crate::profile::{BumpParams, TargetProfile};
use crate::schedule::{Axis, ControlSchedule, ControlSegment, WindowKind};
use crate::simulator::{ensemble_finals, Propagator, PulseTrain, SimConfig};
use crate::su2::{PauliVector, Unitary2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `exp(−i f(ω) σ_axis)`.
pub fn target_unitary(profile: &TargetProfile, omega: f64, axis: Axis) -> Result<Unitary2> {
    let f = profile.eval_f(omega)?;
    Ok(Unitary2::pauli_exp(match axis {
        Axis::X => PauliVector::x(f),
        Axis::Y => PauliVector::y(f),
    }))
}

/// `(‖X − exp(−i f(ω) σ_axis)‖_F, 1 − |tr(X† target)|/2)`.
pub fn target_error(
    final_state: &Unitary2,
    profile: &TargetProfile,
    omega: f64,
    axis: Axis,
) -> Result<(f64, f64)> {
    let target = target_unitary(profile, omega, axis)?;
    Ok((
        final_state.frobenius_distance(&target),
        1.0 - final_state.trace_fidelity(&target),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryConfig {
    pub eps1: f64,
    pub eps2: f64,
    pub nu: i32,
}

impl AuxiliaryConfig {
    pub fn new(eps1: f64, eps2: f64, nu: i32) -> Result<Self> {
        if !(eps1.is_finite() && eps1 > 0.0) || !(eps2.is_finite() && eps2 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need eps1 > 0 and eps2 >= 0, got ({eps1}, {eps2})"
            )));
        }
        if nu != 1 && nu != -1 {
            return Err(Error::InvalidConfig(format!("nu must be ±1, got {nu}")));
        }
        Ok(Self { eps1, eps2, nu })
    }
}

fn steps_for(len: f64, dt: f64) -> usize {
    ((len / dt) - 1e-9).ceil().max(1.0) as usize
}

/// `X̂(ω, 1/ε1)` for the auxiliary system by the exponential midpoint rule.
/// `ω` may be negative.
pub fn auxiliary_propagate(
    cfg: &AuxiliaryConfig,
    kernel: &FourierKernel,
    omega: f64,
    dt: f64,
) -> Result<Unitary2> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let half = 1.0 / cfg.eps1;
    let n = steps_for(2.0 * half, dt);
    let h = 2.0 * half / n as f64;
    let taus: Vec<f64> = (0..n).map(|k| -half + (k as f64 + 0.5) * h).collect();
    let gh = kernel.ghat_table(&taus);
    let mut x = Unitary2::identity();
    for (tau, g) in taus.iter().zip(gh) {
        let a = h * omega * cfg.eps2 * INV_SQRT_2PI * g;
        let (s, c) = (2.0 * omega * tau).sin_cos();
        x = Unitary2::pauli_exp(PauliVector::new(0.0, a * c, a * s)) * x;
    }
    Ok(x)
}

/// `exp(−i ε2 ω g(2ω) σy)`.
pub fn auxiliary_target(kernel: &FourierKernel, eps2: f64, omega: f64) -> Result<Unitary2> {
    let g = kernel.profile().eval_g(2.0 * omega)?;
    Ok(Unitary2::pauli_exp(PauliVector::y(eps2 * omega * g)))
}

/// Lab-frame window on `[0, 2/ε1]` with `u ≡ ν` and window scale `ε2/√(2π)`.
pub fn single_window_train(eps1: f64, eps2: f64, nu: i32) -> PulseTrain {
    let t = 1.0 / eps1;
    PulseTrain {
        segments: vec![ControlSegment {
            t0: 0.0,
            t1: 2.0 * t,
            u: nu,
            v: WindowKind::GhatWindow {
                center: t,
                scale: eps2 * INV_SQRT_2PI,
            },
        }],
        axis: Axis::Y,
        window_half_width: t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCheck {
    pub nu: i32,
    pub omega: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub dt: f64,
    /// Lab frame vs `e^{−iνωTσx} X̂_ν e^{−iνωTσx}` with the frame-consistent
    /// interaction propagator.
    pub distance: f64,
    /// Lab frame vs the same sandwich around `X̂(νω, T)`.
    pub nu_omega_form_distance: f64,
    pub bound: f64,
}

impl FrameCheck {
    pub fn passed(&self) -> bool {
        self.distance <= self.bound
    }
}

/// Compares one lab-frame window with its auxiliary-system description,
/// both obtained by independent simulation at step `dt`. Passes when the
/// distance is at most `5 dt²`.
pub fn frame_check(
    kernel: &FourierKernel,
    eps1: f64,
    eps2: f64,
    nu: i32,
    omega: f64,
    dt: f64,
) -> Result<FrameCheck> {
    let cfg = AuxiliaryConfig::new(eps1, eps2, nu)?;
    let t = 1.0 / eps1;
    let lab = Propagator::new(&single_window_train(eps1, eps2, nu), kernel, dt)?
        .final_state(omega, Unitary2::identity());
    let outer = Unitary2::pauli_exp(PauliVector::x(nu as f64 * omega * t));

    let aux = auxiliary_propagate(&cfg, kernel, omega, dt)?;
    let interaction = if nu == 1 {
        Unitary2::sigma_y() * aux * Unitary2::sigma_y()
    } else {
        aux
    };
    let rhs = outer * interaction * outer;

    let aux_nu = auxiliary_propagate(&cfg, kernel, nu as f64 * omega, dt)?;
    let rhs_nu = outer * aux_nu * outer;

    Ok(FrameCheck {
        nu,
        omega,
        eps1,
        eps2,
        dt,
        distance: lab.frobenius_distance(&rhs),
        nu_omega_form_distance: lab.frobenius_distance(&rhs_nu),
        bound: 5.0 * dt * dt,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub eps2: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub eps1: f64,
    pub dt: f64,
    pub rows: Vec<ScalingRow>,
    pub order: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

/// Empirical ε2-order of `max_ω ‖X̂(ω, 1/ε1) − exp(−i ε2 ω g(2ω) σy)‖` at
/// fixed `ε1`, over `ω` and `−ω` for every grid point.
pub fn auxiliary_scaling_test(
    kernel: &FourierKernel,
    eps1: f64,
    eps2_list: &[f64],
    omega_grid: &[f64],
    dt: f64,
) -> Result<ScalingReport> {
    let signed: Vec<f64> = omega_grid.iter().flat_map(|w| [*w, -*w]).collect();
    let mut rows = Vec::with_capacity(eps2_list.len());
    for &eps2 in eps2_list {
        let cfg = AuxiliaryConfig::new(eps1, eps2, 1)?;
        // warm the shared ĝ table before fanning out
        auxiliary_propagate(&cfg, kernel, signed[0], dt)?;
        let errs = parallel::map(&signed, |&w| -> Result<f64> {
            let x = auxiliary_propagate(&cfg, kernel, w, dt)?;
            Ok(x.frobenius_distance(&auxiliary_target(kernel, eps2, w)?))
        });
        let mut max_error = 0.0f64;
        for e in errs {
            max_error = max_error.max(e?);
        }
        rows.push(ScalingRow { eps2, max_error });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.eps2).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_error).collect();
    let order = loglog_slope(&xs, &ys);
    let threshold = 1.9;
    Ok(ScalingReport {
        eps1,
        dt,
        passed: order.is_some_and(|p| p >= threshold),
        rows,
        order,
        threshold,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps1: f64,
    #[serde(rename = "N")]
    pub n: u32,
    pub max_frob_err: f64,
    pub max_infidelity: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Empirical order of the error in `1/N` at fixed `eps1`.
    pub fn n_order(&self, eps1: f64) -> Option<f64> {
        let rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.eps1 == eps1).collect();
        let xs: Vec<f64> = rows.iter().map(|r| 1.0 / r.n as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.max_frob_err).collect();
        loglog_slope(&xs, &ys)
    }

    /// `eps1,N,max_frob_err,max_infidelity,runtime_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps1,N,max_frob_err,max_infidelity,runtime_s\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                crate::simulator::fmt17(r.eps1),
                r.n,
                crate::simulator::fmt17(r.max_frob_err),
                crate::simulator::fmt17(r.max_infidelity),
                crate::simulator::fmt17(r.runtime_s)
            ));
        }
        out
    }
}

/// Max-over-ω errors for every `(ε1, N)` cell, rows ordered by `ε1` then
/// `N` as given. `dt_max = None` uses the per-schedule default step.
pub fn convergence_sweep(
    profile: &TargetProfile,
    eps1_list: &[f64],
    n_list: &[u32],
    omega_grid: &[f64],
    axis: Axis,
    dt_max: Option<f64>,
) -> Result<SweepReport> {
    if eps1_list.is_empty() || n_list.is_empty() || omega_grid.is_empty() {
        return Err(Error::InvalidConfig("sweep lists must be non-empty".into()));
    }
    let kernel = FourierKernel::new(profile.clone())?;
    let mut rows = Vec::with_capacity(eps1_list.len() * n_list.len());
    for &eps1 in eps1_list {
        for &n in n_list {
            let start = Instant::now();
            let sched = ControlSchedule::build(profile.clone(), eps1, n, axis)?;
            let dt = dt_max.unwrap_or_else(|| SimConfig::default_dt(&sched));
            let finals = ensemble_finals(&sched, &kernel, omega_grid, dt)?;
            let mut max_frob = 0.0f64;
            let mut max_inf = 0.0f64;
            for (x, w) in finals.iter().zip(omega_grid) {
                let (frob, inf) = target_error(x, profile, *w, axis)?;
                max_frob = max_frob.max(frob);
                max_inf = max_inf.max(inf);
            }
            rows.push(SweepRow {
                eps1,
                n,
                max_frob_err: max_frob,
                max_infidelity: max_inf,
                runtime_s: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(SweepReport { rows })
}

/// 33 Chebyshev points on `[v0 + m, v1 − m]`, `m = (v1 − v0)/20`, merged
/// with 0.5, 0.7 and 0.9 when they lie inside the support; ascending.
pub fn default_omega_grid(bump: &BumpParams) -> Vec<f64> {
    let mut grid = chebyshev_grid(bump, 33);
    for w in [0.5, 0.7, 0.9] {
        if w > bump.a && w < bump.d && !grid.contains(&w) {
            grid.push(w);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid
}

/// `count` Chebyshev points on the interior of the support.
pub fn chebyshev_grid(bump: &BumpParams, count: usize) -> Vec<f64> {
    let (v0, v1) = bump.support();
    let m = (v1 - v0) / 20.0;
    let (lo, hi) = (v0 + m, v1 - m);
    let mut g: Vec<f64> = (0..count)
        .map(|k| {
            let x = ((2 * k + 1) as f64 * PI / (2 * count) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        })
        .collect();
    g.sort_by(f64::total_cmp);
    g
}

/// Deterministic points in `[0, 1)` from the additive golden-ratio sequence.
pub fn weyl_samples(count: usize, seed: u64) -> Vec<f64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    let start = (seed as f64 * 0.754_877_666_246_692_7).fract();
    (1..=count)
        .map(|k| (start + k as f64 * PHI).fract())
        .collect()
}

/// Max, median and their ratio for a set of per-ω errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniformity {
    pub max: f64,
    pub median: f64,
    pub ratio: f64,
}

pub fn uniformity(errors: &[f64]) -> Uniformity {
    let mut v = errors.to_vec();
    v.sort_by(f64::total_cmp);
    let max = v.last().copied().unwrap_or(0.0);
    let median = match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    };
    Uniformity {
        max,
        median,
        ratio: if median > 0.0 {
            max / median
        } else {
            f64::INFINITY
        },
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerRow {
    pub omega: f64,
    #[serde(skip)]
    pub composite: Unitary2,
    /// Composite vs `exp(−iασx) exp(−iβσy) exp(−iγσx)`.
    pub frob_err: f64,
    pub infidelity: f64,
    /// Each schedule alone vs its own single-axis target, execution order.
    pub single_errs: [f64; 3],
    /// Composite vs the product of the three separately simulated finals.
    pub product_gap: f64,
}

/// Runs the three schedules from [`crate::schedule::euler_compose`]
/// back-to-back for every ω. `dt_max = None` takes the smallest default
/// step of the three.
pub fn euler_composite(
    schedules: &[ControlSchedule],
    omegas: &[f64],
    dt_max: Option<f64>,
) -> Result<Vec<EulerRow>> {
    if schedules.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "expected 3 schedules, got {}",
            schedules.len()
        )));
    }
    let dt = dt_max.unwrap_or_else(|| {
        schedules
            .iter()
            .map(SimConfig::default_dt)
            .fold(f64::INFINITY, f64::min)
    });
    let mut props = Vec::with_capacity(3);
    for s in schedules {
        let k = s.kernel()?;
        props.push(Propagator::new(&PulseTrain::from_schedule(s), &k, dt)?);
    }
    let rows = parallel::map(omegas, |&w| -> Result<EulerRow> {
        let mut x = Unitary2::identity();
        let mut singles = [Unitary2::identity(); 3];
        let mut single_errs = [0.0; 3];
        let mut targets = [Unitary2::identity(); 3];
        for (k, (p, s)) in props.iter().zip(schedules).enumerate() {
            x = p.final_state(w, x);
            singles[k] = p.final_state(w, Unitary2::identity());
            targets[k] = target_unitary(s.profile(), w, s.axis())?;
            single_errs[k] = singles[k].frobenius_distance(&targets[k]);
        }
        let target = targets[2] * targets[1] * targets[0];
        let product = singles[2] * singles[1] * singles[0];
        Ok(EulerRow {
            omega: w,
            composite: x,
            frob_err: x.frobenius_distance(&target),
            infidelity: 1.0 - x.trace_fidelity(&target),
            single_errs,
            product_gap: x.frobenius_distance(&product),
        })
    });
    rows.into_iter().collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub rule: QuadratureRule,
    pub decay_order: u32,
    pub decay_grid: (f64, f64, usize),
    pub truncation_omega: f64,
    pub truncation_eps1: Vec<f64>,
    pub odd_samples: usize,
    pub scaling_eps1: f64,
    pub scaling_eps2: Vec<f64>,
    pub frame_samples: usize,
    pub frame_eps1: f64,
    pub dt: f64,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::default(),
            decay_order: 3,
            decay_grid: (10.0, 400.0, 40),
            truncation_omega: 1.4,
            truncation_eps1: vec![0.1, 0.05, 0.025, 0.0125],
            odd_samples: 20,
            scaling_eps1: 0.01,
            scaling_eps2: vec![0.1, 0.05, 0.025],
            frame_samples: 20,
            frame_eps1: 0.05,
            dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationReport {
    pub omega: f64,
    pub rows: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OddReport {
    pub samples: Vec<(f64, f64, f64)>,
    pub max_abs: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameReport {
    pub checks: Vec<FrameCheck>,
    pub passed: bool,
}

/// Certificates for the decay of `ĝ`, truncation of the inverse transform,
/// the vanishing odd part, and the two auxiliary-system statements.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CertificateSuite {
    pub decay: Option<DecayReport>,
    pub truncation: Option<TruncationReport>,
    pub odd: Option<OddReport>,
    pub auxiliary: Option<ScalingReport>,
    pub frame: Option<FrameReport>,
}

impl CertificateSuite {
    pub fn all_passed(&self) -> bool {
        self.decay.as_ref().is_none_or(|r| r.all_bounded())
            && self.truncation.as_ref().is_none_or(|r| r.passed)
            && self.odd.as_ref().is_none_or(|r| r.passed)
            && self.auxiliary.as_ref().is_none_or(|r| r.passed)
            && self.frame.as_ref().is_none_or(|r| r.passed)
    }
}

pub fn decay_certificate(kernel: &FourierKernel, opts: &CertificateOptions) -> DecayReport {
    let (lo, hi, count) = opts.decay_grid;
    kernel.verify_decay(opts.decay_order, &log_grid(lo, hi, count))
}

pub fn truncation_certificate(
    kernel: &FourierKernel,
    opts: &CertificateOptions,
) -> TruncationReport {
    let omega = opts.truncation_omega;
    let rows: Vec<(f64, f64)> = opts
        .truncation_eps1
        .iter()
        .map(|&e| (e, kernel.truncation_error(e, omega)))
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let slope = loglog_slope(&xs, &ys);
    let threshold = 2.0;
    TruncationReport {
        omega,
        passed: slope.is_some_and(|s| s > threshold),
        rows,
        slope,
        threshold,
    }
}

pub fn odd_certificate(kernel: &FourierKernel, opts: &CertificateOptions) -> OddReport {
    let (lo, hi) = kernel.g_support();
    let us = weyl_samples(opts.odd_samples, 3);
    let vs = weyl_samples(opts.odd_samples, 11);
    let samples: Vec<(f64, f64, f64)> = us
        .iter()
        .zip(&vs)
        .map(|(a, b)| {
            let eps1 = 0.02 + 0.18 * a;
            let omega = lo + (hi - lo) * b;
            (eps1, omega, kernel.odd_integral(eps1, omega))
        })
        .collect();
    let max_abs = samples.iter().map(|s| s.2.abs()).fold(0.0, f64::max);
    let threshold = 1e-12;
    OddReport {
        samples,
        max_abs,
        threshold,
        passed: max_abs <= threshold,
    }
}

pub fn frame_certificate(kernel: &FourierKernel, opts: &CertificateOptions) -> Result<FrameReport> {
    let (v0, v1) = kernel.profile().support();
    let a = weyl_samples(opts.frame_samples, 5);
    let b = weyl_samples(opts.frame_samples, 7);
    let c = weyl_samples(opts.frame_samples, 13);
    let tuples: Vec<(i32, f64, f64)> = (0..opts.frame_samples)
        .map(|k| {
            let nu = if a[k] < 0.5 { 1 } else { -1 };
            (nu, v0 + (v1 - v0) * b[k], 0.2 * c[k])
        })
        .collect();
    let mut checks = Vec::with_capacity(tuples.len());
    for (nu, omega, eps2) in tuples {
        checks.push(frame_check(
            kernel,
            opts.frame_eps1,
            eps2,
            nu,
            omega,
            opts.dt,
        )?);
    }
    Ok(FrameReport {
        passed: checks.iter().all(|c| c.passed()),
        checks,
    })
}

/// Runs the selected certificates (`None` selects all of 1–5).
pub fn verify_certificates(
    profile: &TargetProfile,
    opts: &CertificateOptions,
    which: Option<&[u32]>,
) -> Result<CertificateSuite> {
    let kernel = FourierKernel::with_rule(profile.clone(), opts.rule)?;
    let want = |k: u32| which.is_none_or(|w| w.contains(&k));
    let mut suite = CertificateSuite::default();
    if want(1) {
        suite.decay = Some(decay_certificate(&kernel, opts));
    }
    if want(2) {
        suite.truncation = Some(truncation_certificate(&kernel, opts));
    }
    if want(3) {
        suite.odd = Some(odd_certificate(&kernel, opts));
    }
    if want(4) {
        let grid = chebyshev_grid(profile.bump(), 9);
        suite.auxiliary = Some(auxiliary_scaling_test(
            &kernel,
            opts.scaling_eps1,
            &opts.scaling_eps2,
            &grid,
            opts.dt,
        )?);
    }
    if want(5) {
        suite.frame = Some(frame_certificate(&kernel, opts)?);
    }
    Ok(suite)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex1() -> TargetProfile {
        TargetProfile::new(BumpParams::standard(), "pi/2").unwrap()
    }

    #[test]
    fn target_error_cases() {
        let p = ex1();
        let exact = target_unitary(&p, 0.7, Axis::Y).unwrap();
        assert_eq!(target_error(&exact, &p, 0.7, Axis::Y).unwrap(), (0.0, 0.0));
        let (frob, inf) = target_error(&Unitary2::identity(), &p, 0.7, Axis::Y).unwrap();
        assert!((frob - 2.0).abs() < 1e-15);
        assert!((inf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn auxiliary_zero_amplitude_is_identity() {
        let k = FourierKernel::new(ex1()).unwrap();
        let cfg = AuxiliaryConfig::new(0.05, 0.0, 1).unwrap();
        assert_eq!(
            auxiliary_propagate(&cfg, &k, 0.7, 0.01).unwrap(),
            Unitary2::identity()
        );
    }

    #[test]
    fn auxiliary_config_validation() {
        assert!(AuxiliaryConfig::new(0.0, 0.1, 1).is_err());
        assert!(AuxiliaryConfig::new(0.1, -0.1, 1).is_err());
        assert!(AuxiliaryConfig::new(0.1, 0.1, 0).is_err());
    }

    #[test]
    fn auxiliary_negative_omega_targets_opposite_rotation() {
        let k = FourierKernel::new(ex1()).unwrap();
        let cfg = AuxiliaryConfig::new(0.05, 0.05, 1).unwrap();
        let neg = auxiliary_propagate(&cfg, &k, -0.7, 0.01).unwrap();
        let g = ex1().eval_g(1.4).unwrap();
        let expected = Unitary2::pauli_exp(PauliVector::y(-0.05 * 0.7 * g));
        assert!(neg.frobenius_distance(&expected) < 1e-2);
        assert_eq!(auxiliary_target(&k, 0.05, -0.7).unwrap(), expected);
    }

    #[test]
    fn frame_check_with_zero_amplitude() {
        let k = FourierKernel::new(ex1()).unwrap();
        for nu in [1, -1] {
            let c = frame_check(&k, 0.05, 0.0, nu, 0.7, 0.01).unwrap();
            assert!(c.distance <= 1e-12, "{c:?}");
            let expected = Unitary2::pauli_exp(PauliVector::x(2.0 * nu as f64 * 0.7 * 20.0));
            let lab = Propagator::new(&single_window_train(0.05, 0.0, nu), &k, 0.01)
                .unwrap()
                .final_state(0.7, Unitary2::identity());
            assert!(lab.frobenius_distance(&expected) < 1e-12);
        }
    }

    #[test]
    fn grids() {
        let g = default_omega_grid(&BumpParams::standard());
        assert_eq!(g.len(), 36);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.contains(&0.7));
        let c = chebyshev_grid(&BumpParams::standard(), 33);
        assert!(c[0] > 0.435 && *c.last().unwrap() < 1.065);
        let w = weyl_samples(50, 1);
        assert!(w.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn uniformity_stats() {
        let u = uniformity(&[3.0, 1.0, 2.0]);
        assert_eq!((u.max, u.median, u.ratio), (3.0, 2.0, 1.5));
        assert_eq!(uniformity(&[1.0, 2.0, 3.0, 4.0]).median, 2.5);
        assert!(uniformity(&[0.0, 0.0]).ratio.is_infinite());
    }

    #[test]
    fn scaling_zero_row_is_exact_and_ignored_by_fit() {
        let k = FourierKernel::new(ex1()).unwrap();
        let r = auxiliary_scaling_test(&k, 0.1, &[0.1, 0.05, 0.025, 0.0], &[0.7], 0.02).unwrap();
        assert_eq!(r.rows[3].max_error, 0.0);
        assert!(r.order.is_some());
    }

    #[test]
    fn euler_composite_of_zero_profiles_is_identity() {
        let z = TargetProfile::new(BumpParams::standard(), "0").unwrap();
        let s = crate::schedule::euler_compose(&z, &z, &z, 0.5, 2).unwrap();
        for row in euler_composite(&s, &[0.6, 0.9], None).unwrap() {
            assert!(row.frob_err < 1e-10);
            assert!(row.product_gap < 1e-12);
        }
        assert!(euler_composite(&s[..2], &[0.6], None).is_err());
    }

    #[test]
    fn sweep_rejects_empty_lists() {
        assert!(convergence_sweep(&ex1(), &[], &[5], &[0.7], Axis::Y, None).is_err());
        assert!(convergence_sweep(&ex1(), &[0.1], &[], &[0.7], Axis::Y, None).is_err());
    }

    #[test]
    fn sweep_csv_header_and_rows() {
        let r = convergence_sweep(&ex1(), &[0.5], &[1, 2], &[0.7], Axis::Y, Some(0.05)).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "eps1,N,max_frob_err,max_infidelity,runtime_s");
        assert_eq!(lines.len(), 3);
    }
}
