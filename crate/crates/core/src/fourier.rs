//! The cosine transform
//!
//! ```text
//!     ĝ(t) = √(2/π) ∫_{2v0}^{2v1} g(ω) cos(tω) dω
//! ```
//!
//! evaluated by composite Gauss–Legendre quadrature with panels narrow
//! enough to resolve the oscillation, plus the numerical certificates built
//! on it: decay of `ĝ`, truncation error of the inverse transform, and the
//! vanishing odd part.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::parallel;
use crate::profile::TargetProfile;
use crate::quadrature::GaussLegendre;

/// Panel budget for the oscillatory integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Panels per oscillation period of the fastest cosine in the integrand.
    pub panels_per_period: f64,
    /// Lower bound on the panel count over the support of `g`.
    pub min_panels: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            order: 16,
            panels_per_period: 8.0,
            min_panels: 32,
        }
    }
}

impl QuadratureRule {
    /// Deliberately under-resolved rule for diagnostics.
    pub fn coarse() -> Self {
        Self {
            order: 4,
            panels_per_period: 0.5,
            min_panels: 1,
        }
    }

    /// Twice as many panels as `self`.
    pub fn refined(&self) -> Self {
        Self {
            order: self.order,
            panels_per_period: self.panels_per_period * 2.0,
            min_panels: self.min_panels * 2,
        }
    }

    fn panels(&self, length: f64, max_freq: f64) -> usize {
        let by_period = (length * max_freq.abs() * self.panels_per_period / TAU).ceil();
        (by_period as usize).max(self.min_panels).max(1)
    }
}

/// Tabulated `ĝ` for one profile. Values are computed on demand and cached
/// by `|t|`; the cache is safe to share across threads.
pub struct FourierKernel {
    profile: TargetProfile,
    rule: QuadratureRule,
    gl: GaussLegendre,
    cache: RwLock<HashMap<u64, f64>>,
}

impl std::fmt::Debug for FourierKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierKernel")
            .field("profile", &self.profile)
            .field("rule", &self.rule)
            .field("cached", &self.cached_len())
            .finish()
    }
}

impl Clone for FourierKernel {
    fn clone(&self) -> Self {
        Self {
            profile: self.profile.clone(),
            rule: self.rule,
            gl: self.gl.clone(),
            cache: RwLock::new(self.cache.read().expect("kernel cache poisoned").clone()),
        }
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl FourierKernel {
    pub fn new(profile: TargetProfile) -> Result<Self> {
        Self::with_rule(profile, QuadratureRule::default())
    }

    pub fn with_rule(profile: TargetProfile, rule: QuadratureRule) -> Result<Self> {
        profile.check_regular(4096)?;
        Ok(Self {
            profile,
            rule,
            gl: GaussLegendre::new(rule.order.max(1)),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn profile(&self) -> &TargetProfile {
        &self.profile
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("kernel cache poisoned").len()
    }

    /// Support `[2v0, 2v1]` of `g` on the positive axis.
    pub fn g_support(&self) -> (f64, f64) {
        let (v0, v1) = self.profile.support();
        (2.0 * v0, 2.0 * v1)
    }

    fn g(&self, w: f64) -> f64 {
        // amplitude regularity was checked at construction
        self.profile.eval_g(w).unwrap_or(f64::NAN)
    }

    fn compute(&self, t: f64) -> f64 {
        if self.profile.is_trivial() {
            return 0.0;
        }
        let (lo, hi) = self.g_support();
        let panels = self.rule.panels(hi - lo, t);
        let integral = self
            .gl
            .integrate_composite(lo, hi, panels, |w| self.g(w) * (t * w).cos());
        (2.0 / PI).sqrt() * integral
    }

    /// `ĝ(t)`. Even by construction: the value is computed and cached at `|t|`.
    pub fn ghat(&self, t: f64) -> f64 {
        let key = t.abs();
        if let Some(v) = self
            .cache
            .read()
            .expect("kernel cache poisoned")
            .get(&key.to_bits())
        {
            return *v;
        }
        let v = self.compute(key);
        self.cache
            .write()
            .expect("kernel cache poisoned")
            .insert(key.to_bits(), v);
        v
    }

    /// `ĝ` at many points; misses are computed in parallel and cached.
    pub fn ghat_table(&self, ts: &[f64]) -> Vec<f64> {
        let keys: Vec<f64> = ts.iter().map(|t| t.abs()).collect();
        let missing: Vec<f64> = {
            let cache = self.cache.read().expect("kernel cache poisoned");
            let mut seen = std::collections::HashSet::new();
            keys.iter()
                .copied()
                .filter(|k| !cache.contains_key(&k.to_bits()) && seen.insert(k.to_bits()))
                .collect()
        };
        if !missing.is_empty() {
            let values = parallel::map(&missing, |k| self.compute(*k));
            let mut cache = self.cache.write().expect("kernel cache poisoned");
            for (k, v) in missing.iter().zip(values) {
                cache.insert(k.to_bits(), v);
            }
        }
        let cache = self.cache.read().expect("kernel cache poisoned");
        keys.iter().map(|k| cache[&k.to_bits()]).collect()
    }

    /// Quadrature nodes and weights on `[-half_width, half_width]`, mirrored
    /// exactly about zero and listed in ascending order.
    fn symmetric_points(&self, half_width: f64, max_freq: f64) -> Vec<(f64, f64)> {
        let panels = self.rule.panels(half_width, max_freq);
        let right = self.gl.composite_points(0.0, half_width, panels);
        let mut pts: Vec<(f64, f64)> = right.iter().rev().map(|&(x, w)| (-x, w)).collect();
        pts.extend(right);
        pts
    }

    /// Highest frequency present in `τ ↦ ĝ(τ) cos(ωτ)`.
    fn tau_bandwidth(&self, omega: f64) -> f64 {
        omega.abs() + self.g_support().1
    }

    /// `(1/√(2π)) ∫_{-1/ε1}^{1/ε1} ĝ(τ) cos(ωτ) dτ`.
    pub fn truncated_inverse(&self, eps1: f64, omega: f64) -> f64 {
        let pts = self.symmetric_points(1.0 / eps1, self.tau_bandwidth(omega));
        let taus: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let gh = self.ghat_table(&taus);
        let acc: f64 = pts
            .iter()
            .zip(&gh)
            .map(|(&(tau, w), g)| w * g * (omega * tau).cos())
            .sum();
        INV_SQRT_2PI * acc
    }

    /// `|g(ω) − (1/√(2π)) ∫_{-1/ε1}^{1/ε1} ĝ(τ) cos(ωτ) dτ|`.
    pub fn truncation_error(&self, eps1: f64, omega: f64) -> f64 {
        (self.g(omega) - self.truncated_inverse(eps1, omega)).abs()
    }

    /// `(1/√(2π)) ∫_{-1/ε1}^{1/ε1} ĝ(τ) sin(ωτ) dτ` on a rule symmetric about
    /// zero, summed left to right. The odd integrand cancels to round-off.
    pub fn odd_integral(&self, eps1: f64, omega: f64) -> f64 {
        let pts = self.symmetric_points(1.0 / eps1, self.tau_bandwidth(omega));
        let taus: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let gh = self.ghat_table(&taus);
        let mut acc = 0.0;
        for (&(tau, w), g) in pts.iter().zip(&gh) {
            acc += w * g * (omega * tau).sin();
        }
        INV_SQRT_2PI * acc
    }

    /// `(∫_{-T}^{T} ĝ² dτ, ∫ g² dω)`; the two agree as `T → ∞`.
    pub fn parseval(&self, t_max: f64) -> (f64, f64) {
        let (lo, hi) = self.g_support();
        let pts = self.symmetric_points(t_max, 2.0 * hi);
        let taus: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let gh = self.ghat_table(&taus);
        let lhs: f64 = pts.iter().zip(&gh).map(|(&(_, w), g)| w * g * g).sum();
        let panels = self.rule.panels(hi - lo, 0.0).max(64);
        let rhs = 2.0
            * self
                .gl
                .integrate_composite(lo, hi, panels, |w| self.g(w).powi(2));
        (lhs, rhs)
    }

    /// Bounds `C_k = max_t |ĝ(t)| t^k` over `t_grid` for `k = 1..=n`.
    ///
    /// A row is flagged bounded when the weighted values on the last quarter
    /// of the grid stay below the maximum over the first three quarters, i.e.
    /// the peak is behind us. `t^k ĝ` oscillates, so comparing halves is too
    /// sensitive to where a ripple happens to land.
    pub fn verify_decay(&self, n: u32, t_grid: &[f64]) -> DecayReport {
        let values = self.ghat_table(t_grid);
        let rows = (1..=n.max(1))
            .map(|k| {
                let weighted: Vec<f64> = t_grid
                    .iter()
                    .zip(&values)
                    .map(|(t, g)| g.abs() * t.powi(k as i32))
                    .collect();
                let c_n = weighted.iter().copied().fold(0.0, f64::max);
                let mid = (3 * weighted.len()) / 4;
                let lower = weighted[..mid.max(1).min(weighted.len())]
                    .iter()
                    .copied()
                    .fold(0.0, f64::max);
                let upper = weighted[mid..].iter().copied().fold(0.0, f64::max);
                DecayRow {
                    n: k,
                    c_n,
                    lower_max: lower,
                    upper_max: upper,
                    bounded: c_n == 0.0 || (c_n.is_finite() && upper < lower),
                }
            })
            .collect();
        DecayReport {
            t_min: t_grid.first().copied().unwrap_or(0.0),
            t_max: t_grid.last().copied().unwrap_or(0.0),
            rows,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: u32,
    pub c_n: f64,
    /// Max over the first three quarters of the grid.
    pub lower_max: f64,
    /// Max over the last quarter.
    pub upper_max: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub t_min: f64,
    pub t_max: f64,
    pub rows: Vec<DecayRow>,
}

impl DecayReport {
    pub fn all_bounded(&self) -> bool {
        self.rows.iter().all(|r| r.bounded)
    }
}

/// `count` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k == 0 {
                lo
            } else if k + 1 == count {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::BumpParams;

    fn kernel(amp: &str) -> FourierKernel {
        FourierKernel::new(TargetProfile::new(BumpParams::standard(), amp).unwrap()).unwrap()
    }

    #[test]
    fn ghat_zero_matches_refined_rule() {
        let k = kernel("pi/2");
        let fine = FourierKernel::with_rule(k.profile().clone(), k.rule().refined()).unwrap();
        let a = k.ghat(0.0);
        let b = fine.ghat(0.0);
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn ghat_even() {
        let k = kernel("pi/2");
        assert_eq!(k.ghat(5.0).to_bits(), k.ghat(-5.0).to_bits());
        let k2 = kernel("pi/(6*w)");
        for t in [0.1, 1.7, 33.0, 250.0] {
            assert_eq!(k2.ghat(t), k2.ghat(-t));
        }
    }

    #[test]
    fn ghat_decays_at_large_t() {
        let k = kernel("pi/2");
        let v = k.ghat(200.0);
        assert!(v.abs() <= 1e-4, "ĝ(200) = {v}");
    }

    #[test]
    fn trivial_profile_has_zero_kernel() {
        let k = kernel("0");
        assert_eq!(k.ghat(1.0), 0.0);
        let rep = k.verify_decay(3, &log_grid(10.0, 400.0, 20));
        assert!(rep.rows.iter().all(|r| r.c_n == 0.0 && r.bounded));
        assert_eq!(k.truncation_error(0.05, 1.4), 0.0);
    }

    #[test]
    fn table_matches_pointwise() {
        let k = kernel("pi/(6*w)");
        let ts = [0.0, -3.5, 3.5, 12.25, 40.0];
        let tab = k.ghat_table(&ts);
        let fresh = kernel("pi/(6*w)");
        for (t, v) in ts.iter().zip(tab) {
            assert_eq!(v, fresh.ghat(*t));
        }
    }

    #[test]
    fn singular_amplitude_rejected() {
        let p = TargetProfile::new(BumpParams::standard(), "1/(w - w)").unwrap();
        assert!(FourierKernel::new(p).is_err());
    }

    #[test]
    fn odd_integral_vanishes_even_with_coarse_rule() {
        let p = TargetProfile::new(BumpParams::standard(), "pi/2").unwrap();
        let k = FourierKernel::with_rule(p, QuadratureRule::coarse()).unwrap();
        assert!(k.odd_integral(0.05, 1.0).abs() <= 1e-12);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(10.0, 400.0, 7);
        assert_eq!(g[0], 10.0);
        assert_eq!(g[6], 400.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
