//! The explicit piecewise control law.
//!
//! For `ε1 > 0` and `N ≥ 1` the schedule on `[0, (4N+2)/ε1]` is
//!
//! | interval                          | square | window                         |
//! |-----------------------------------|--------|--------------------------------|
//! | `[0, 1/ε1]`                       | −1     | 0                              |
//! | `[(4m+1)/ε1, (4m+3)/ε1]`          | +1     | `ĝ(t − (4m+2)/ε1) / (2N√(2π))` |
//! | `[(4m+3)/ε1, (4m+5)/ε1]`          | −1     | `ĝ(t − (4m+4)/ε1) / (2N√(2π))` |
//! | `[(4N+1)/ε1, (4N+2)/ε1]`          | +1     | 0                              |
//!
//! with `m = 0..N-1`. For a y-axis target the square wave drives `u` (σx)
//! and the window drives `v` (σy); for an x-axis target the roles are
//! swapped. Segments always store the square channel in `u` and the window
//! channel in `v`; [`ControlSchedule::eval_controls`] maps them onto the
//! physical `(u, v)` according to the axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierKernel;
use crate::profile::TargetProfile;

pub const SCHEDULE_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            other => Err(Error::BadSynthesisParameters(format!(
                "unknown axis '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    Zero,
    GhatWindow { center: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    pub t0: f64,
    pub t1: f64,
    /// Square-wave channel, ±1.
    pub u: i32,
    /// Window channel.
    pub v: WindowKind,
}

impl ControlSegment {
    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Window channel value at absolute time `t`.
    pub fn window_value(&self, kernel: &FourierKernel, t: f64) -> f64 {
        match self.v {
            WindowKind::Zero => 0.0,
            WindowKind::GhatWindow { center, scale } => scale * kernel.ghat(t - center),
        }
    }
}

/// `1 / (2N√(2π))`.
pub fn window_scale(n: u32) -> f64 {
    1.0 / (2.0 * n as f64 * (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct ControlSchedule {
    eps1: f64,
    n: u32,
    axis: Axis,
    profile: TargetProfile,
    segments: Vec<ControlSegment>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    version: u64,
    eps1: f64,
    #[serde(rename = "N")]
    n: u32,
    axis: Axis,
    profile: TargetProfile,
    segments: Vec<ControlSegment>,
}

impl TryFrom<RawSchedule> for ControlSchedule {
    type Error = Error;
    fn try_from(r: RawSchedule) -> Result<Self> {
        if r.version != SCHEDULE_VERSION {
            return Err(Error::UnsupportedVersion(r.version));
        }
        let s = ControlSchedule {
            eps1: r.eps1,
            n: r.n,
            axis: r.axis,
            profile: r.profile,
            segments: r.segments,
        };
        s.validate()?;
        Ok(s)
    }
}

impl From<ControlSchedule> for RawSchedule {
    fn from(s: ControlSchedule) -> Self {
        RawSchedule {
            version: SCHEDULE_VERSION,
            eps1: s.eps1,
            n: s.n,
            axis: s.axis,
            profile: s.profile,
            segments: s.segments,
        }
    }
}

fn check_params(eps1: f64, n: u32) -> Result<()> {
    if !(eps1.is_finite() && eps1 > 0.0) {
        return Err(Error::BadSynthesisParameters(format!(
            "eps1 must be positive, got {eps1}"
        )));
    }
    if n == 0 {
        return Err(Error::BadSynthesisParameters("N must be at least 1".into()));
    }
    Ok(())
}

impl ControlSchedule {
    /// Builds the schedule segment by segment; every endpoint is an integer
    /// multiple of `1/ε1` computed as `k / ε1`.
    pub fn build(profile: TargetProfile, eps1: f64, n: u32, axis: Axis) -> Result<Self> {
        check_params(eps1, n)?;
        let at = |k: u64| k as f64 / eps1;
        let scale = window_scale(n);
        let mut segments = Vec::with_capacity(2 * n as usize + 2);
        segments.push(ControlSegment {
            t0: 0.0,
            t1: at(1),
            u: -1,
            v: WindowKind::Zero,
        });
        for m in 0..n as u64 {
            segments.push(ControlSegment {
                t0: at(4 * m + 1),
                t1: at(4 * m + 3),
                u: 1,
                v: WindowKind::GhatWindow {
                    center: at(4 * m + 2),
                    scale,
                },
            });
            segments.push(ControlSegment {
                t0: at(4 * m + 3),
                t1: at(4 * m + 5),
                u: -1,
                v: WindowKind::GhatWindow {
                    center: at(4 * m + 4),
                    scale,
                },
            });
        }
        let n64 = n as u64;
        segments.push(ControlSegment {
            t0: at(4 * n64 + 1),
            t1: at(4 * n64 + 2),
            u: 1,
            v: WindowKind::Zero,
        });
        Ok(Self {
            eps1,
            n,
            axis,
            profile,
            segments,
        })
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Per-window amplitude scale `ε2 = 1/(2N)`.
    pub fn eps2(&self) -> f64 {
        1.0 / (2.0 * self.n as f64)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn profile(&self) -> &TargetProfile {
        &self.profile
    }

    pub fn segments(&self) -> &[ControlSegment] {
        &self.segments
    }

    /// `(4N+2)/ε1`.
    pub fn total_duration(&self) -> f64 {
        (4 * self.n as u64 + 2) as f64 / self.eps1
    }

    /// Half-width `1/ε1` of every ĝ window.
    pub fn window_half_width(&self) -> f64 {
        1.0 / self.eps1
    }

    pub fn kernel(&self) -> Result<FourierKernel> {
        FourierKernel::new(self.profile.clone())
    }

    /// Index of the segment owning `t` (right-continuous; `T` belongs to the
    /// last segment).
    pub fn segment_index(&self, t: f64) -> Result<usize> {
        let total = self.total_duration();
        if !(t >= 0.0 && t <= total) {
            return Err(Error::TimeOutOfSchedule { t, total });
        }
        let idx = self.segments.partition_point(|s| s.t0 <= t);
        Ok(idx.saturating_sub(1).min(self.segments.len() - 1))
    }

    /// Physical `(u, v)` at time `t`.
    pub fn eval_controls(&self, kernel: &FourierKernel, t: f64) -> Result<(f64, f64)> {
        let seg = &self.segments[self.segment_index(t)?];
        let square = seg.u as f64;
        let window = seg.window_value(kernel, t);
        Ok(match self.axis {
            Axis::Y => (square, window),
            Axis::X => (window, square),
        })
    }

    /// `∫_0^t s(τ) dτ` of the square channel, in closed form.
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

    /// `∫_0^T` of the window channel by Gauss–Legendre on each window.
    pub fn window_integral(&self, kernel: &FourierKernel) -> f64 {
        let gl = crate::quadrature::GaussLegendre::order16();
        let (_, hi) = kernel.g_support();
        let mut acc = 0.0;
        for s in &self.segments {
            if let WindowKind::GhatWindow { center, scale } = s.v {
                let panels = ((s.duration() * hi * 8.0) / (2.0 * PI)).ceil().max(8.0) as usize;
                let pts = gl.composite_points(s.t0 - center, s.t1 - center, panels);
                let taus: Vec<f64> = pts.iter().map(|p| p.0).collect();
                let gh = kernel.ghat_table(&taus);
                acc += scale * pts.iter().zip(gh).map(|(p, g)| p.1 * g).sum::<f64>();
            }
        }
        acc
    }

    /// Checks the structural invariants: segment count, exact partition of
    /// `[0, T]`, ±1 square channel, window centering and scale.
    pub fn validate(&self) -> Result<()> {
        check_params(self.eps1, self.n)?;
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        let expected = 2 * self.n as usize + 2;
        if self.segments.len() != expected {
            return bad(format!(
                "expected {expected} segments, found {}",
                self.segments.len()
            ));
        }
        let total = self.total_duration();
        let tol = 1e-12 * total.max(1.0);
        if self.segments[0].t0 != 0.0 {
            return bad("first segment must start at 0".into());
        }
        if (self.segments.last().unwrap().t1 - total).abs() > tol {
            return bad(format!("last segment must end at {total}"));
        }
        let hw = self.window_half_width();
        let scale = window_scale(self.n);
        for (i, s) in self.segments.iter().enumerate() {
            if s.t0.is_nan() || s.t1.is_nan() || s.t0 >= s.t1 {
                return bad(format!("segment {i} has t0 >= t1"));
            }
            if i > 0 && self.segments[i - 1].t1 != s.t0 {
                return bad(format!("gap or overlap before segment {i}"));
            }
            if s.u != 1 && s.u != -1 {
                return bad(format!("segment {i} has u = {}", s.u));
            }
            let expect_window = i != 0 && i + 1 != self.segments.len();
            match (s.v, expect_window) {
                (WindowKind::Zero, false) => {}
                (WindowKind::GhatWindow { center, scale: sc }, true) => {
                    if (center - 0.5 * (s.t0 + s.t1)).abs() > tol
                        || (0.5 * s.duration() - hw).abs() > tol
                    {
                        return bad(format!("window {i} is not centered with half-width 1/eps1"));
                    }
                    if (sc - scale).abs() > 1e-12 * scale {
                        return bad(format!("window {i} has scale {sc}, expected {scale}"));
                    }
                }
                _ => return bad(format!("segment {i} has the wrong window kind")),
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        // surface structural and version errors directly rather than wrapped
        // in serde's message
        let raw: RawSchedule = serde_json::from_str(s)?;
        ControlSchedule::try_from(raw)
    }

    /// Maximum of `|window|` over the window centres and edges.
    pub fn window_peak(&self, kernel: &FourierKernel) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| match s.v {
                WindowKind::GhatWindow { center, scale } => {
                    Some(scale * kernel.ghat(s.t0 - center).abs().max(kernel.ghat(0.0).abs()))
                }
                WindowKind::Zero => None,
            })
            .fold(0.0, f64::max)
    }
}

/// Three schedules realizing `exp(−iασx) exp(−iβσy) exp(−iγσx)`, in
/// execution order: γ (x axis), then β (y axis), then α (x axis). Each has
/// its own clock starting at zero.
pub fn euler_compose(
    alpha: &TargetProfile,
    beta: &TargetProfile,
    gamma: &TargetProfile,
    eps1: f64,
    n: u32,
) -> Result<Vec<ControlSchedule>> {
    if alpha.bump() != beta.bump() || beta.bump() != gamma.bump() {
        return Err(Error::IncompatibleProfiles(
            "Euler profiles must share one bump window".into(),
        ));
    }
    Ok(vec![
        ControlSchedule::build(gamma.clone(), eps1, n, Axis::X)?,
        ControlSchedule::build(beta.clone(), eps1, n, Axis::Y)?,
        ControlSchedule::build(alpha.clone(), eps1, n, Axis::X)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::BumpParams;
    use proptest::prelude::*;

    fn ex1() -> TargetProfile {
        TargetProfile::new(BumpParams::standard(), "pi/2").unwrap()
    }

    #[test]
    fn small_schedule_layout() {
        let s = ControlSchedule::build(ex1(), 1.0, 1, Axis::Y).unwrap();
        assert_eq!(s.segments().len(), 4);
        assert_eq!(s.total_duration(), 6.0);
        let sc = 1.0 / (2.0 * (2.0 * PI).sqrt());
        let segs = s.segments();
        assert_eq!(
            (segs[0].t0, segs[0].t1, segs[0].u, segs[0].v),
            (0.0, 1.0, -1, WindowKind::Zero)
        );
        assert_eq!(
            (segs[1].t0, segs[1].t1, segs[1].u, segs[1].v),
            (
                1.0,
                3.0,
                1,
                WindowKind::GhatWindow {
                    center: 2.0,
                    scale: sc
                }
            )
        );
        assert_eq!(
            (segs[2].t0, segs[2].t1, segs[2].u, segs[2].v),
            (
                3.0,
                5.0,
                -1,
                WindowKind::GhatWindow {
                    center: 4.0,
                    scale: sc
                }
            )
        );
        assert_eq!(
            (segs[3].t0, segs[3].t1, segs[3].u, segs[3].v),
            (5.0, 6.0, 1, WindowKind::Zero)
        );
    }

    #[test]
    fn bad_parameters() {
        for (eps1, n) in [(0.0, 1), (-1.0, 3), (f64::NAN, 2), (1.0, 0)] {
            let err = ControlSchedule::build(ex1(), eps1, n, Axis::Y).unwrap_err();
            assert!(err.to_string().contains("bad synthesis parameters"));
        }
    }

    #[test]
    fn controls_at_sample_times() {
        let s = ControlSchedule::build(ex1(), 1.0, 1, Axis::Y).unwrap();
        let k = s.kernel().unwrap();
        assert_eq!(s.eval_controls(&k, 0.5).unwrap(), (-1.0, 0.0));
        let (u, v) = s.eval_controls(&k, 2.0).unwrap();
        assert_eq!(u, 1.0);
        assert_eq!(v, k.ghat(0.0) / (2.0 * (2.0 * PI).sqrt()));
        assert_eq!(s.eval_controls(&k, 6.0).unwrap(), (1.0, 0.0));
        // right-continuous at joins
        assert_eq!(s.eval_controls(&k, 1.0).unwrap().0, 1.0);
        assert_eq!(s.eval_controls(&k, 5.0).unwrap(), (1.0, 0.0));
        for t in [-0.1, 6.000001, f64::NAN] {
            let err = s.eval_controls(&k, t).unwrap_err();
            assert!(err.to_string().contains("time out of schedule"));
        }
    }

    #[test]
    fn x_axis_swaps_roles() {
        let y = ControlSchedule::build(ex1(), 1.0, 1, Axis::Y).unwrap();
        let x = ControlSchedule::build(ex1(), 1.0, 1, Axis::X).unwrap();
        let k = y.kernel().unwrap();
        for t in [0.3, 1.2, 2.0, 3.7, 5.5] {
            let (uy, vy) = y.eval_controls(&k, t).unwrap();
            let (ux, vx) = x.eval_controls(&k, t).unwrap();
            assert_eq!((ux, vx), (vy, uy));
        }
    }

    #[test]
    fn example1_schedule_shape() {
        let s = ControlSchedule::build(ex1(), 0.05, 10, Axis::Y).unwrap();
        assert_eq!(s.segments().len(), 22);
        assert!((s.total_duration() - 840.0).abs() < 1e-12);
        s.validate().unwrap();
    }

    // ∫_{-T}^{T} ĝ = √(2/π) ∫ g(ω) 2 sin(Tω)/ω dω, computed on the ω side
    fn truncated_ghat_mass(p: &TargetProfile, half: f64) -> f64 {
        let gl = crate::quadrature::GaussLegendre::order16();
        let (a, d) = p.support();
        let acc: f64 = gl
            .composite_points(2.0 * a, 2.0 * d, 400)
            .iter()
            .map(|&(w, wt)| wt * p.eval_g(w).unwrap() * 2.0 * (half * w).sin() / w)
            .sum();
        (2.0 / PI).sqrt() * acc
    }

    #[test]
    fn window_integral_matches_frequency_side_and_square_integral_vanishes() {
        let mut prev = f64::INFINITY;
        for eps1 in [0.2, 0.1, 0.05] {
            let s = ControlSchedule::build(ex1(), eps1, 10, Axis::Y).unwrap();
            let k = s.kernel().unwrap();
            assert!(s.square_integral(s.total_duration()).abs() < 1e-10);
            let got = s.window_integral(&k);
            let want = truncated_ghat_mass(&ex1(), 1.0 / eps1) / (2.0 * PI).sqrt();
            assert!((got - want).abs() <= 1e-10, "eps1={eps1}: {got} vs {want}");
            prev = prev.min(got.abs());
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn window_peak_scales_with_n() {
        let k = FourierKernel::new(ex1()).unwrap();
        let a = ControlSchedule::build(ex1(), 0.05, 5, Axis::Y)
            .unwrap()
            .window_peak(&k);
        let b = ControlSchedule::build(ex1(), 0.05, 10, Axis::Y)
            .unwrap()
            .window_peak(&k);
        assert!((a / b - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn json_round_trip_and_errors() {
        let s = ControlSchedule::build(ex1(), 0.05, 3, Axis::X).unwrap();
        let back = ControlSchedule::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);

        let bumped = s.to_json().replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(
            ControlSchedule::from_json(&bumped),
            Err(Error::UnsupportedVersion(2))
        ));

        match ControlSchedule::from_json("{\"version\": 1,\n \"eps1\": oops}") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 10)),
            other => panic!("{other:?}"),
        }

        let mut tampered = s.clone();
        tampered.segments[2].t0 += 0.5;
        let json = serde_json::to_string(&RawSchedule::from(tampered)).unwrap();
        assert!(matches!(
            ControlSchedule::from_json(&json),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn hand_written_minimal_fixture() {
        let json = include_str!("../tests/fixtures/minimal_schedule.json");
        let s = ControlSchedule::from_json(json).unwrap();
        assert_eq!(s.segments().len(), 4);
        assert_eq!(s.total_duration(), 6.0);
        assert_eq!(s, ControlSchedule::build(ex1(), 1.0, 1, Axis::Y).unwrap());
    }

    #[test]
    fn euler_compose_order_and_support_check() {
        let bp = BumpParams::standard();
        let a = TargetProfile::new(bp, "0.4").unwrap();
        let b = TargetProfile::new(bp, "0.7").unwrap();
        let g = TargetProfile::new(bp, "0.3").unwrap();
        let s = euler_compose(&a, &b, &g, 0.1, 2).unwrap();
        assert_eq!(
            s.iter().map(|x| x.axis()).collect::<Vec<_>>(),
            vec![Axis::X, Axis::Y, Axis::X]
        );
        assert_eq!(s[0].profile(), &g);
        assert_eq!(s[1].profile(), &b);
        assert_eq!(s[2].profile(), &a);

        let other =
            TargetProfile::new(BumpParams::new(0.3, 0.5, 1.0, 1.1).unwrap(), "0.4").unwrap();
        let err = euler_compose(&other, &b, &g, 0.1, 2).unwrap_err();
        assert!(err.to_string().contains("incompatible profiles"));
    }

    proptest! {
        #[test]
        fn partition_invariants(eps1 in 0.01..2.0f64, n in 1u32..40, x_axis in any::<bool>()) {
            let axis = if x_axis { Axis::X } else { Axis::Y };
            let s = ControlSchedule::build(ex1(), eps1, n, axis).unwrap();
            prop_assert!(s.validate().is_ok());
            prop_assert_eq!(s.segments().len(), 2 * n as usize + 2);
            let total = s.total_duration();
            prop_assert!(s.square_integral(total).abs() <= 1e-12 * total);
            let covered: f64 = s.segments().iter().map(|g| g.duration()).sum();
            prop_assert!((covered - total).abs() <= 1e-12 * total);
            for seg in s.segments() {
                if let WindowKind::GhatWindow { center, .. } = seg.v {
                    prop_assert!((seg.t0 - center + 1.0 / eps1).abs() <= 1e-12 * total);
                    prop_assert!((seg.t1 - center - 1.0 / eps1).abs() <= 1e-12 * total);
                }
            }
        }
    }
}
