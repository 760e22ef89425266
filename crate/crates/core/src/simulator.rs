//! Ensemble propagation of `i dX/dt = ω (u σx + v σy) X`.
//!
//! The integrator is the exponential midpoint rule
//!
//! ```text
//!     X_{k+1} = exp(−i h ω (u(t_k + h/2) σx + v(t_k + h/2) σy)) X_k
//! ```
//!
//! with steps that never straddle a segment join. It is exact on segments
//! where the generator is constant and second order elsewhere; every state is
//! unitary to round-off because the step exponential is evaluated in closed
//! form.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::target_unitary;
use crate::error::{Error, Result};
use crate::fourier::FourierKernel;
use crate::parallel;
use crate::profile::TargetProfile;
use crate::schedule::{Axis, ControlSchedule, ControlSegment, WindowKind};
use crate::su2::{PauliVector, Unitary2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub omega_grid: Vec<f64>,
    pub dt_max: f64,
    pub record_stride: usize,
}

impl SimConfig {
    pub fn new(omega_grid: Vec<f64>, dt_max: f64, record_stride: usize) -> Result<Self> {
        let cfg = Self {
            omega_grid,
            dt_max,
            record_stride,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `dt_max = min(0.01, 1/(100 v1), shortest segment / 4)`.
    pub fn default_dt(schedule: &ControlSchedule) -> f64 {
        let (_, v1) = schedule.profile().support();
        let shortest = schedule
            .segments()
            .iter()
            .map(|s| s.duration())
            .fold(f64::INFINITY, f64::min);
        0.01f64.min(1.0 / (100.0 * v1)).min(shortest / 4.0)
    }

    pub fn for_schedule(schedule: &ControlSchedule, omega_grid: Vec<f64>) -> Result<Self> {
        Self::new(omega_grid, Self::default_dt(schedule), 100)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_grid.is_empty() {
            return Err(Error::InvalidConfig("omega grid is empty".into()));
        }
        if let Some(w) = self
            .omega_grid
            .iter()
            .find(|w| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidConfig(format!(
                "omega must be positive, got {w}"
            )));
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig(
                "record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Segments plus the axis convention, independent of how they were built.
/// [`ControlSchedule`] converts into this; the auxiliary-system harnesses
/// construct their own.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub segments: Vec<ControlSegment>,
    pub axis: Axis,
    /// Half-width shared by every ĝ window.
    pub window_half_width: f64,
}

impl PulseTrain {
    pub fn from_schedule(s: &ControlSchedule) -> Self {
        Self {
            segments: s.segments().to_vec(),
            axis: s.axis(),
            window_half_width: s.window_half_width(),
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t1)
    }

    pub fn start(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.t0)
    }

    /// `∫` of the square channel from the start of the train to `t`.
    pub fn square_integral(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            if t <= s.t0 {
                break;
            }
            acc += s.u as f64 * (t.min(s.t1) - s.t0);
        }
        acc
    }

    /// Pauli axis driven by the square channel.
    pub fn square_axis(&self) -> Axis {
        match self.axis {
            Axis::Y => Axis::X,
            Axis::X => Axis::Y,
        }
    }
}

fn steps_for(len: f64, dt_max: f64) -> usize {
    ((len / dt_max) - 1e-9).ceil().max(1.0) as usize
}

#[derive(Debug, Clone)]
struct SegmentPlan {
    t0: f64,
    t1: f64,
    steps: usize,
    h: f64,
    square: f64,
    /// `scale · ĝ` at the step midpoints, if this is a window segment.
    window: Option<(f64, Arc<Vec<f64>>)>,
}

/// A pulse train resolved onto a step grid, with every ĝ sample the grid
/// needs precomputed. Shared read-only across ensemble members.
#[derive(Debug, Clone)]
pub struct Propagator {
    axis: Axis,
    plan: Vec<SegmentPlan>,
    total_steps: usize,
}

impl Propagator {
    pub fn new(train: &PulseTrain, kernel: &FourierKernel, dt_max: f64) -> Result<Self> {
        if !(dt_max.is_finite() && dt_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt_max must be positive, got {dt_max}"
            )));
        }
        let hw = train.window_half_width;
        let mut tables: HashMap<usize, Arc<Vec<f64>>> = HashMap::new();
        let mut plan = Vec::with_capacity(train.segments.len());
        for (i, s) in train.segments.iter().enumerate() {
            if s.t0.is_nan() || s.t1.is_nan() || s.t0 >= s.t1 {
                return Err(Error::InvalidSchedule(format!("segment {i} is empty")));
            }
            let window = match s.v {
                WindowKind::Zero => None,
                WindowKind::GhatWindow { center, scale } => {
                    let tol = 1e-9 * s.t1.abs().max(1.0);
                    if (s.t1 - s.t0 - 2.0 * hw).abs() > tol
                        || (center - 0.5 * (s.t0 + s.t1)).abs() > tol
                    {
                        return Err(Error::InvalidSchedule(format!(
                            "window segment {i} is not centred with half-width {hw}"
                        )));
                    }
                    let n = steps_for(2.0 * hw, dt_max);
                    let table = tables
                        .entry(n)
                        .or_insert_with(|| {
                            // window-centred midpoints, identical for every window
                            let h = 2.0 * hw / n as f64;
                            let taus: Vec<f64> =
                                (0..n).map(|k| -hw + (k as f64 + 0.5) * h).collect();
                            Arc::new(kernel.ghat_table(&taus))
                        })
                        .clone();
                    Some((scale, table))
                }
            };
            let steps = match &window {
                Some((_, t)) => t.len(),
                None => steps_for(s.duration(), dt_max),
            };
            plan.push(SegmentPlan {
                t0: s.t0,
                t1: s.t1,
                steps,
                h: s.duration() / steps as f64,
                square: s.u as f64,
                window,
            });
        }
        let total_steps = plan.iter().map(|p| p.steps).sum();
        Ok(Self {
            axis: train.axis,
            plan,
            total_steps,
        })
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    #[inline]
    fn generator(&self, omega_h: f64, square: f64, window: f64) -> PauliVector {
        match self.axis {
            Axis::Y => PauliVector::new(omega_h * square, omega_h * window, 0.0),
            Axis::X => PauliVector::new(omega_h * window, omega_h * square, 0.0),
        }
    }

    /// Final state only.
    pub fn final_state(&self, omega: f64, initial: Unitary2) -> Unitary2 {
        let mut x = initial;
        for seg in &self.plan {
            let wh = omega * seg.h;
            match &seg.window {
                None => {
                    // constant generator: one exponential per step, same as the
                    // recorded path
                    let step = Unitary2::pauli_exp(self.generator(wh, seg.square, 0.0));
                    for _ in 0..seg.steps {
                        x = step * x;
                    }
                }
                Some((scale, table)) => {
                    for g in table.iter() {
                        x = Unitary2::pauli_exp(self.generator(wh, seg.square, scale * g)) * x;
                    }
                }
            }
        }
        x
    }

    /// Full trajectory, storing the initial state, every `stride`-th step and
    /// the final state.
    pub fn trajectory(&self, omega: f64, initial: Unitary2, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let cap = self.total_steps / stride + 2;
        let mut times = Vec::with_capacity(cap);
        let mut states = Vec::with_capacity(cap);
        let start = self.plan.first().map_or(0.0, |p| p.t0);
        times.push(start);
        states.push(initial);
        let mut x = initial;
        let mut global = 0usize;
        for seg in &self.plan {
            let wh = omega * seg.h;
            let constant = Unitary2::pauli_exp(self.generator(wh, seg.square, 0.0));
            for k in 0..seg.steps {
                let step = match &seg.window {
                    None => constant,
                    Some((scale, table)) => {
                        Unitary2::pauli_exp(self.generator(wh, seg.square, scale * table[k]))
                    }
                };
                x = step * x;
                global += 1;
                if global.is_multiple_of(stride) || global == self.total_steps {
                    let t = if k + 1 == seg.steps {
                        seg.t1
                    } else {
                        seg.t0 + (k + 1) as f64 * seg.h
                    };
                    times.push(t);
                    states.push(x);
                }
            }
        }
        Trajectory {
            omega,
            times,
            states,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub omega: f64,
    pub times: Vec<f64>,
    pub states: Vec<Unitary2>,
}

impl Trajectory {
    pub fn final_state(&self) -> Unitary2 {
        *self
            .states
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.states
            .iter()
            .map(|s| s.unitarity_defect())
            .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }
}

/// Trajectory of one ensemble member under a schedule, from `X(0) = I`.
pub fn propagate(
    schedule: &ControlSchedule,
    kernel: &FourierKernel,
    omega: f64,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let prop = Propagator::new(&PulseTrain::from_schedule(schedule), kernel, cfg.dt_max)?;
    Ok(prop.trajectory(omega, Unitary2::identity(), cfg.record_stride))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub omega: f64,
    pub frob_err: f64,
    pub infidelity: f64,
    pub max_unitarity_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSeries {
    pub p: Vec<f64>,
    pub p_ref: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub axis: Axis,
    pub trajectories: Vec<Trajectory>,
    pub frames: Vec<Trajectory>,
    pub finals: Vec<FinalMetrics>,
    pub populations: Vec<PopulationSeries>,
}

impl EnsembleResult {
    pub fn max_unitarity_defect(&self) -> f64 {
        self.finals
            .iter()
            .map(|f| f.max_unitarity_defect)
            .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn max_frob_err(&self) -> f64 {
        self.finals.iter().map(|f| f.frob_err).fold(0.0, f64::max)
    }

    pub fn max_infidelity(&self) -> f64 {
        self.finals.iter().map(|f| f.infidelity).fold(0.0, f64::max)
    }

    /// Rows `omega, t, re00, im00, re01, im01, re10, im10, re11, im11, P,
    /// P_ref, frob_err_to_target`, grid order then time order, every float
    /// with 17 significant digits.
    pub fn write_csv<W: Write>(&self, profile: &TargetProfile, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "omega,t,re00,im00,re01,im01,re10,im10,re11,im11,P,P_ref,frob_err_to_target"
        )?;
        for ((traj, pops), _) in self
            .trajectories
            .iter()
            .zip(&self.populations)
            .zip(&self.finals)
        {
            let target = target_unitary(profile, traj.omega, self.axis).unwrap_or_default();
            for (k, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
                let m = &x.m;
                let cols = [
                    traj.omega,
                    *t,
                    m[0][0].re,
                    m[0][0].im,
                    m[0][1].re,
                    m[0][1].im,
                    m[1][0].re,
                    m[1][0].im,
                    m[1][1].re,
                    m[1][1].im,
                    pops.p[k],
                    pops.p_ref[k],
                    x.frobenius_distance(&target),
                ];
                let line: Vec<String> = cols.iter().map(|v| fmt17(*v)).collect();
                writeln!(w, "{}", line.join(","))?;
            }
        }
        Ok(())
    }
}

/// Seventeen significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Propagates every ω in the grid. Members are independent, so the result
/// is bit-identical regardless of evaluation order or worker count.
pub fn ensemble_propagate(
    schedule: &ControlSchedule,
    kernel: &FourierKernel,
    cfg: &SimConfig,
) -> Result<EnsembleResult> {
    cfg.validate()?;
    let train = PulseTrain::from_schedule(schedule);
    let prop = Propagator::new(&train, kernel, cfg.dt_max)?;
    let profile = schedule.profile();
    let members = parallel::map(&cfg.omega_grid, |&omega| -> Result<_> {
        let traj = prop.trajectory(omega, Unitary2::identity(), cfg.record_stride);
        let frame = frame_transform_train(&traj, &train);
        let pops = populations_for(&frame, schedule, profile, omega)?;
        let fin = traj.final_state();
        let target = target_unitary(profile, omega, schedule.axis())?;
        let metrics = FinalMetrics {
            omega,
            frob_err: fin.frobenius_distance(&target),
            infidelity: 1.0 - fin.trace_fidelity(&target),
            max_unitarity_defect: traj.max_unitarity_defect(),
        };
        Ok((traj, frame, pops, metrics))
    });
    let mut out = EnsembleResult {
        axis: schedule.axis(),
        trajectories: Vec::with_capacity(members.len()),
        frames: Vec::with_capacity(members.len()),
        finals: Vec::with_capacity(members.len()),
        populations: Vec::with_capacity(members.len()),
    };
    for m in members {
        let (traj, frame, pops, metrics) = m?;
        out.trajectories.push(traj);
        out.frames.push(frame);
        out.populations.push(pops);
        out.finals.push(metrics);
    }
    Ok(out)
}

/// Final states only, in grid order.
pub fn ensemble_finals(
    schedule: &ControlSchedule,
    kernel: &FourierKernel,
    omegas: &[f64],
    dt_max: f64,
) -> Result<Vec<Unitary2>> {
    let prop = Propagator::new(&PulseTrain::from_schedule(schedule), kernel, dt_max)?;
    Ok(parallel::map(omegas, |&w| {
        prop.final_state(w, Unitary2::identity())
    }))
}

fn frame_transform_train(traj: &Trajectory, train: &PulseTrain) -> Trajectory {
    let axis = train.square_axis();
    let states = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, x)| {
            let angle = -train.square_integral(*t) * traj.omega;
            let gen = match axis {
                Axis::X => PauliVector::x(angle),
                Axis::Y => PauliVector::y(angle),
            };
            Unitary2::pauli_exp(gen) * *x
        })
        .collect();
    Trajectory {
        omega: traj.omega,
        times: traj.times.clone(),
        states,
    }
}

/// `X̂(t) = exp(i (∫_0^t s) ω σ_s) X(t)` where `s` is the square-wave
/// channel and `σ_s` its Pauli axis (σx for y targets, σy for x targets).
pub fn frame_transform(traj: &Trajectory, schedule: &ControlSchedule) -> Trajectory {
    frame_transform_train(traj, &PulseTrain::from_schedule(schedule))
}

/// Staircase `r(t) = m/(2N)`, `m = ⌊t ε1 / 2⌋`, clamped to `[0, 1]`.
pub fn reference_r(schedule: &ControlSchedule, t: f64) -> f64 {
    let m = (t * schedule.eps1() / 2.0).floor().max(0.0);
    (m / (2.0 * schedule.n() as f64)).clamp(0.0, 1.0)
}

fn populations_for(
    frame: &Trajectory,
    schedule: &ControlSchedule,
    profile: &TargetProfile,
    omega: f64,
) -> Result<PopulationSeries> {
    let f = profile.eval_f(omega)?;
    let axis = schedule.axis();
    let mut p = Vec::with_capacity(frame.states.len());
    let mut p_ref = Vec::with_capacity(frame.states.len());
    for (t, x) in frame.times.iter().zip(&frame.states) {
        p.push(x.entry(1, 0).norm_sqr().clamp(0.0, 1.0));
        let angle = reference_r(schedule, *t) * f;
        let reference = Unitary2::pauli_exp(match axis {
            Axis::Y => PauliVector::y(angle),
            Axis::X => PauliVector::x(angle),
        });
        p_ref.push(reference.entry(1, 0).norm_sqr().clamp(0.0, 1.0));
    }
    Ok(PopulationSeries { p, p_ref })
}

/// `P(t) = |⟨e2, X̂ e1⟩|²` and `P_ref(t) = |⟨e2, exp(−i r(t) f(ω) σ) e1⟩|²`
/// along a frame-transformed trajectory.
pub fn populations(
    frame: &Trajectory,
    schedule: &ControlSchedule,
    omega: f64,
) -> Result<PopulationSeries> {
    populations_for(frame, schedule, schedule.profile(), omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::BumpParams;
    use std::f64::consts::PI;

    fn profile(amp: &str) -> TargetProfile {
        TargetProfile::new(BumpParams::standard(), amp).unwrap()
    }

    fn square_train(segs: &[(f64, f64, i32)]) -> PulseTrain {
        PulseTrain {
            segments: segs
                .iter()
                .map(|&(t0, t1, u)| ControlSegment {
                    t0,
                    t1,
                    u,
                    v: WindowKind::Zero,
                })
                .collect(),
            axis: Axis::Y,
            window_half_width: 1.0,
        }
    }

    #[test]
    fn constant_control_is_exact() {
        let k = FourierKernel::new(profile("0")).unwrap();
        let prop = Propagator::new(&square_train(&[(0.0, PI, 1)]), &k, 0.01).unwrap();
        let x = prop.final_state(0.5, Unitary2::identity());
        let expected = Unitary2::sigma_x().scale(num_complex::Complex64::new(0.0, -1.0));
        assert!(x.frobenius_distance(&expected) < 1e-12);
    }

    #[test]
    fn zero_profile_returns_to_identity() {
        let s = ControlSchedule::build(profile("0"), 0.05, 3, Axis::Y).unwrap();
        let k = s.kernel().unwrap();
        let cfg = SimConfig::for_schedule(&s, vec![0.5, 0.77, 1.05]).unwrap();
        for w in &cfg.omega_grid {
            let tr = propagate(&s, &k, *w, &cfg).unwrap();
            let d = tr.final_state().frobenius_distance(&Unitary2::identity());
            assert!(d < 1e-10, "{d}");
        }
    }

    #[test]
    fn trajectory_bookkeeping() {
        let s = ControlSchedule::build(profile("pi/2"), 1.0, 1, Axis::Y).unwrap();
        let k = s.kernel().unwrap();
        let cfg = SimConfig::new(vec![0.7], 0.01, 7).unwrap();
        let tr = propagate(&s, &k, 0.7, &cfg).unwrap();
        assert_eq!(tr.times[0], 0.0);
        assert_eq!(*tr.times.last().unwrap(), 6.0);
        assert!(tr.times.windows(2).all(|w| w[0] < w[1]));
        assert!(tr.max_unitarity_defect() <= 1e-10);
        let prop = Propagator::new(&PulseTrain::from_schedule(&s), &k, 0.01).unwrap();
        assert_eq!(
            prop.final_state(0.7, Unitary2::identity()),
            tr.final_state()
        );
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(vec![], 0.01, 1).is_err());
        assert!(SimConfig::new(vec![0.5, -1.0], 0.01, 1).is_err());
        assert!(SimConfig::new(vec![0.5], 0.0, 1).is_err());
        assert!(SimConfig::new(vec![0.5], 0.01, 0).is_err());
        let s = ControlSchedule::build(profile("pi/2"), 0.05, 10, Axis::Y).unwrap();
        assert!((SimConfig::default_dt(&s) - 1.0 / 110.0).abs() < 1e-15);
    }

    #[test]
    fn reference_staircase() {
        let s = ControlSchedule::build(profile("pi/2"), 1.0, 1, Axis::Y).unwrap();
        assert_eq!(reference_r(&s, 0.0), 0.0);
        assert_eq!(reference_r(&s, 6.0), 1.0);
        assert_eq!(reference_r(&s, 2.5), 0.5);
        assert_eq!(reference_r(&s, 1.5), 0.0);
    }

    #[test]
    fn frame_transform_endpoints() {
        let s = ControlSchedule::build(profile("pi/2"), 1.0, 1, Axis::Y).unwrap();
        let k = s.kernel().unwrap();
        let cfg = SimConfig::new(vec![0.7], 0.01, 1).unwrap();
        let tr = propagate(&s, &k, 0.7, &cfg).unwrap();
        let fr = frame_transform(&tr, &s);
        assert_eq!(fr.states[0], Unitary2::identity());
        assert!(fr.final_state().frobenius_distance(&tr.final_state()) < 1e-10);
        // centre of the first window: ∫u = −1 + 1 = 0, so the frames agree;
        // at t = 1.5 the square integral is −1 + 0.5 = −0.5
        let idx = tr
            .times
            .iter()
            .position(|t| (t - 1.5).abs() < 1e-9)
            .unwrap();
        let expected = Unitary2::pauli_exp(PauliVector::x(0.5 * 0.7)) * tr.states[idx];
        assert!(fr.states[idx].frobenius_distance(&expected) < 1e-12);
        let mid = tr
            .times
            .iter()
            .position(|t| (t - 2.0).abs() < 1e-9)
            .unwrap();
        assert!(fr.states[mid].frobenius_distance(&tr.states[mid]) < 1e-12);
    }

    #[test]
    fn populations_start_at_zero_and_reference_ends_at_target() {
        let s = ControlSchedule::build(profile("pi/2"), 0.5, 2, Axis::Y).unwrap();
        let k = s.kernel().unwrap();
        let cfg = SimConfig::new(vec![0.7], 0.01, 50).unwrap();
        let tr = propagate(&s, &k, 0.7, &cfg).unwrap();
        let fr = frame_transform(&tr, &s);
        let pops = populations(&fr, &s, 0.7).unwrap();
        assert_eq!(pops.p[0], 0.0);
        assert!((pops.p_ref.last().unwrap() - 1.0).abs() < 1e-15);
        assert!(pops
            .p
            .iter()
            .chain(&pops.p_ref)
            .all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn scaling_symmetry() {
        let k = FourierKernel::new(profile("0")).unwrap();
        let slow = square_train(&[(0.0, 1.3, 1), (1.3, 2.0, -1), (2.0, 3.1, 1)]);
        let fast = square_train(&[(0.0, 0.65, 1), (0.65, 1.0, -1), (1.0, 1.55, 1)]);
        let a = Propagator::new(&slow, &k, 0.01)
            .unwrap()
            .final_state(0.6, Unitary2::identity());
        let b = Propagator::new(&fast, &k, 0.01)
            .unwrap()
            .final_state(1.2, Unitary2::identity());
        assert!(a.frobenius_distance(&b) < 1e-10);
    }

    #[test]
    fn rejects_off_centre_windows() {
        let k = FourierKernel::new(profile("pi/2")).unwrap();
        let train = PulseTrain {
            segments: vec![ControlSegment {
                t0: 0.0,
                t1: 2.0,
                u: 1,
                v: WindowKind::GhatWindow {
                    center: 1.5,
                    scale: 1.0,
                },
            }],
            axis: Axis::Y,
            window_half_width: 1.0,
        };
        assert!(Propagator::new(&train, &k, 0.01).is_err());
    }
}
