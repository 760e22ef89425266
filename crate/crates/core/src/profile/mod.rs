//! Target profiles `f(ω) = amplitude(ω) · Φ(ω)` and the even function `g`
//! with `ω g(2ω) = f(ω)`.
//!
//! The bump `Φ` is built from `p(x) = e^{-1/x}` (zero for `x ≤ 0`) and the
//! transition `q(x) = p(x) / (p(x) + p(1 − x))`; it rises on `[a, b]`, equals
//! one on `[b, c]` and falls on `[c, d]`. Every profile carries a bump, so
//! `f` always has compact support `[a, d]`.

mod expr;

pub use expr::{EvalError, Expr};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `e^{-1/x}` for `x > 0`, zero otherwise.
pub fn smooth_step_p(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth monotone transition: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
pub fn smooth_transition_q(x: f64) -> f64 {
    let p = smooth_step_p(x);
    let r = smooth_step_p(1.0 - x);
    p / (p + r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBump")]
pub struct BumpParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Deserialize)]
struct RawBump {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<RawBump> for BumpParams {
    type Error = Error;
    fn try_from(r: RawBump) -> Result<Self> {
        BumpParams::new(r.a, r.b, r.c, r.d)
    }
}

impl BumpParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let finite = [a, b, c, d].iter().all(|x| x.is_finite());
        if !finite || !(a > 0.0 && a < b && b < c && c < d) {
            return Err(Error::InvalidBump(format!(
                "need 0 < a < b < c < d, got ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Parameters used by both worked examples: `(0.4, 0.5, 1, 1.1)`.
    pub fn standard() -> Self {
        Self {
            a: 0.4,
            b: 0.5,
            c: 1.0,
            d: 1.1,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }
}

/// The smooth bump: rises on `[a, b]`, 1 on `[b, c]`, falls on `[c, d]`.
pub fn bump_phi(x: f64, bp: &BumpParams) -> f64 {
    if x <= bp.a || x >= bp.d {
        return 0.0;
    }
    smooth_transition_q((x - bp.a) / (bp.b - bp.a))
        * smooth_transition_q((bp.d - x) / (bp.d - bp.c))
}

/// `f(ω) = amplitude(ω) · Φ(ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct TargetProfile {
    bump: BumpParams,
    source: String,
    amplitude: Expr,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    bump: BumpParams,
    amplitude: String,
}

impl TryFrom<RawProfile> for TargetProfile {
    type Error = Error;
    fn try_from(r: RawProfile) -> Result<Self> {
        TargetProfile::new(r.bump, &r.amplitude)
    }
}

impl From<TargetProfile> for RawProfile {
    fn from(p: TargetProfile) -> Self {
        RawProfile {
            bump: p.bump,
            amplitude: p.source,
        }
    }
}

impl TargetProfile {
    pub fn new(bump: BumpParams, amplitude: &str) -> Result<Self> {
        let expr = Expr::parse(amplitude)?;
        Ok(Self {
            bump,
            source: amplitude.to_string(),
            amplitude: expr,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn bump(&self) -> &BumpParams {
        &self.bump
    }

    pub fn amplitude_source(&self) -> &str {
        &self.source
    }

    /// `[v0, v1]`.
    pub fn support(&self) -> (f64, f64) {
        self.bump.support()
    }

    /// Literal zero amplitude, i.e. `f ≡ 0`.
    pub fn is_trivial(&self) -> bool {
        self.amplitude.is_zero()
    }

    pub fn eval_f(&self, omega: f64) -> Result<f64> {
        let phi = bump_phi(omega, &self.bump);
        if phi == 0.0 {
            return Ok(0.0);
        }
        self.amplitude
            .eval(omega)
            .map(|a| a * phi)
            .map_err(|_| Error::ProfileSingular(omega))
    }

    /// Even extension `g(ω) = 2 f(|ω|/2) / |ω|`, with `g(0) = 0`.
    pub fn eval_g(&self, omega: f64) -> Result<f64> {
        let w = omega.abs();
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * self.eval_f(w / 2.0)? / w)
    }

    /// Evaluates `f` on a dense grid across the support; used to reject
    /// amplitudes that are singular somewhere inside it before any
    /// quadrature runs.
    pub fn check_regular(&self, samples: usize) -> Result<()> {
        let (a, d) = self.support();
        let n = samples.max(2);
        for k in 0..=n {
            let w = a + (d - a) * k as f64 / n as f64;
            self.eval_f(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn example1() -> TargetProfile {
        TargetProfile::new(BumpParams::standard(), "pi/2").unwrap()
    }

    fn example2() -> TargetProfile {
        TargetProfile::new(BumpParams::standard(), "pi/(6*w)").unwrap()
    }

    #[test]
    fn p_values() {
        assert_eq!(smooth_step_p(0.0), 0.0);
        assert_eq!(smooth_step_p(-3.0), 0.0);
        assert!((smooth_step_p(1.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn q_values() {
        assert_eq!(smooth_transition_q(-0.5), 0.0);
        assert_eq!(smooth_transition_q(2.0), 1.0);
        assert_eq!(smooth_transition_q(0.5), 0.5);
        assert_eq!(smooth_transition_q(0.0), 0.0);
        assert_eq!(smooth_transition_q(1.0), 1.0);
    }

    #[test]
    fn bump_values() {
        let bp = BumpParams::standard();
        assert_eq!(bump_phi(0.75, &bp), 1.0);
        assert_eq!(bump_phi(0.3, &bp), 0.0);
        assert!((bump_phi(0.45, &bp) - 0.5).abs() < 1e-15);
        assert_eq!(bump_phi(0.5, &bp), 1.0);
        assert_eq!(bump_phi(1.0, &bp), 1.0);
        assert_eq!(bump_phi(1.2, &bp), 0.0);
    }

    #[test]
    fn bump_params_validation() {
        assert!(BumpParams::new(0.0, 0.5, 1.0, 1.1).is_err());
        assert!(BumpParams::new(0.4, 0.4, 1.0, 1.1).is_err());
        assert!(BumpParams::new(0.4, 0.5, 1.2, 1.1).is_err());
        assert!(BumpParams::new(f64::NAN, 0.5, 1.0, 1.1).is_err());
        let err = serde_json::from_str::<BumpParams>(r#"{"a":1,"b":0.5,"c":1,"d":2}"#);
        assert!(err.is_err());
    }

    #[test]
    fn f_values() {
        assert_eq!(example1().eval_f(0.7).unwrap(), PI / 2.0);
        assert_eq!(example1().eval_f(0.2).unwrap(), 0.0);
        let phi = bump_phi(0.6, &BumpParams::standard());
        let got = example2().eval_f(0.6).unwrap();
        assert!((got - PI / 3.6 * phi).abs() < 1e-15);
    }

    #[test]
    fn singular_profile_reported() {
        let p = TargetProfile::new(BumpParams::standard(), "1/(w - 0.75)").unwrap();
        let err = p.eval_f(0.75).unwrap_err();
        assert!(err.to_string().contains("profile singular"));
        let always = TargetProfile::new(BumpParams::standard(), "1/(w - w)").unwrap();
        assert!(always.check_regular(64).is_err());
        // off support the amplitude is never evaluated
        assert_eq!(p.eval_f(2.0).unwrap(), 0.0);
    }

    #[test]
    fn g_values() {
        let p = example1();
        let g = p.eval_g(1.5).unwrap();
        assert!((g - PI / 1.5).abs() < 1e-15);
        assert_eq!(p.eval_g(-1.5).unwrap(), g);
        assert_eq!(p.eval_g(0.5).unwrap(), 0.0);
        assert_eq!(p.eval_g(0.0).unwrap(), 0.0);
    }

    #[test]
    fn json_fragment() {
        let p: TargetProfile = serde_json::from_str(
            r#"{"bump": {"a":0.4, "b":0.5, "c":1, "d":1.1}, "amplitude": "pi/(6*w)"}"#,
        )
        .unwrap();
        assert_eq!(p, example2());
        let back = TargetProfile::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert!(TargetProfile::from_json(
            r#"{"bump": {"a":0.4, "b":0.5, "c":1, "d":1.1}, "amplitude": "pi/"}"#
        )
        .is_err());
    }

    #[test]
    fn bump_has_no_jumps() {
        let bp = BumpParams::standard();
        for x in [bp.a, bp.b, bp.c, bp.d] {
            let mut prev = f64::INFINITY;
            for h in [1e-2, 3e-3, 1e-3, 3e-4, 1e-4] {
                let d2 = (bump_phi(x + h, &bp) - 2.0 * bump_phi(x, &bp) + bump_phi(x - h, &bp))
                    / (h * h);
                assert!(d2.is_finite() && d2.abs() < 1e4, "x={x} h={h} d2={d2}");
                prev = prev.min(d2.abs());
            }
            assert!(prev.is_finite());
        }
    }

    #[test]
    fn g_identity_on_dense_grid() {
        for p in [example1(), example2()] {
            let (a, d) = p.support();
            for k in 0..=2000 {
                let w = a + (d - a) * k as f64 / 2000.0;
                let f = p.eval_f(w).unwrap();
                let lhs = w * p.eval_g(2.0 * w).unwrap();
                assert!((lhs - f).abs() <= 1e-14 * f.abs().max(1e-300), "w={w}");
            }
        }
    }

    proptest! {
        #[test]
        fn bump_in_unit_interval(x in -1.0..3.0f64) {
            let v = bump_phi(x, &BumpParams::standard());
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn g_even_bitwise(w in -5.0..5.0f64) {
            let p = example2();
            prop_assert_eq!(p.eval_g(w).unwrap().to_bits(), p.eval_g(-w).unwrap().to_bits());
        }
    }
}
