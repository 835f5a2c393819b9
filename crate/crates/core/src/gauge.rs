//! Pure-gauge potential pulses `(A₀, A) = (∂χ/∂t, -∇χ)` switched on at `t = 0`
//! and removed abruptly at `t = t₁`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{out_of_band_fraction, pure_gauge_vector_potential, LatticeConfig, Potential};
#[cfg(test)]
use crate::lattice::Scheme;

/// Default band limit for spatial profiles, as a fraction of the Nyquist
/// wavenumber `N/2`.
pub const DEFAULT_BAND_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    /// `3s² - 2s³`
    #[default]
    Polynomial,
    /// `(1 - cos πs) / 2`
    Cosine,
    /// `s`; has a kink at `s = 0` and is rejected.
    Linear,
}

impl Ramp {
    pub fn value(self, s: f64) -> f64 {
        match self {
            Ramp::Polynomial => s * s * (3.0 - 2.0 * s),
            Ramp::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
            Ramp::Linear => s,
        }
    }

    /// `d ramp / ds`.
    pub fn slope(self, s: f64) -> f64 {
        match self {
            Ramp::Polynomial => 6.0 * s * (1.0 - s),
            Ramp::Cosine => 0.5 * std::f64::consts::PI * (std::f64::consts::PI * s).sin(),
            Ramp::Linear => 1.0,
        }
    }

    fn validate(self) -> Result<()> {
        let (v0, d0, v1) = (self.value(0.0), self.slope(0.0), self.value(1.0));
        if v0.abs() > 1e-15 || d0.abs() > 1e-15 || (v1 - 1.0).abs() > 1e-15 {
            return Err(LabError::InvalidProfile(format!(
                "ramp {self:?} has value {v0}, slope {d0} at s = 0 and value {v1} at s = 1; \
                 need χ(x,0) = 0, ∂χ/∂t(x,0) = 0 and ramp(1) = 1"
            )));
        }
        Ok(())
    }
}

/// `χ(x, t) = f · ramp(t / t₁) · g(x)` on `0 ≤ t ≤ t₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeProfile {
    pub lattice: LatticeConfig,
    pub spatial: Vec<f64>,
    pub t1: f64,
    pub ramp: Ramp,
    pub amplitude: f64,
}

pub fn build_gauge_profile(
    lattice: &LatticeConfig,
    spatial: Vec<f64>,
    t1: f64,
    ramp: Ramp,
    amplitude: f64,
) -> Result<GaugeProfile> {
    GaugeProfile::with_band_limit(lattice, spatial, t1, ramp, amplitude, Some(DEFAULT_BAND_FRACTION))
}

impl GaugeProfile {
    /// `band`: fraction of the Nyquist wavenumber the spatial profile may
    /// occupy; `None` disables the check.
    pub fn with_band_limit(
        lattice: &LatticeConfig,
        spatial: Vec<f64>,
        t1: f64,
        ramp: Ramp,
        amplitude: f64,
        band: Option<f64>,
    ) -> Result<Self> {
        lattice.validate()?;
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(LabError::InvalidProfile(format!("t1 must be positive, got {t1}")));
        }
        if spatial.len() != lattice.n_sites {
            return Err(LabError::Shape(format!(
                "spatial profile has {} samples for {} sites",
                spatial.len(),
                lattice.n_sites
            )));
        }
        if spatial.iter().any(|v| !v.is_finite()) || !amplitude.is_finite() {
            return Err(LabError::InvalidProfile("profile values must be finite".into()));
        }
        ramp.validate()?;
        if let Some(fraction) = band {
            let max_k = fraction * lattice.n_sites as f64 / 2.0;
            let leak = out_of_band_fraction(&spatial, max_k);
            if leak > 1e-10 {
                return Err(LabError::InvalidProfile(format!(
                    "spatial profile has relative content {leak:.3e} above |k| = {max_k}"
                )));
            }
        }
        Ok(GaugeProfile {
            lattice: *lattice,
            spatial,
            t1,
            ramp,
            amplitude,
        })
    }

    pub fn with_amplitude(&self, amplitude: f64) -> GaugeProfile {
        GaugeProfile {
            amplitude,
            ..self.clone()
        }
    }

    fn phase(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.ramp.value((t / self.t1).min(1.0))
        }
    }

    fn phase_rate(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.t1 {
            0.0
        } else {
            self.ramp.slope(t / self.t1) / self.t1
        }
    }

    /// `χ(x, t)`; held at `χ(x, t₁)` after the pulse.
    pub fn chi_at(&self, t: f64) -> Vec<f64> {
        let s = self.amplitude * self.phase(t);
        self.spatial.iter().map(|g| s * g).collect()
    }

    /// `χ(x, t₁)`.
    pub fn final_chi(&self) -> Vec<f64> {
        self.chi_at(self.t1)
    }

    /// `∂χ/∂t`, zero outside `[0, t₁]`.
    pub fn chi_rate_at(&self, t: f64) -> Vec<f64> {
        let s = self.amplitude * self.phase_rate(t);
        self.spatial.iter().map(|g| s * g).collect()
    }

    pub fn is_active(&self, t: f64) -> bool {
        (0.0..=self.t1).contains(&t) && self.amplitude != 0.0
    }

    fn minus_gradient(&self, chi: &[f64]) -> Result<Vec<f64>> {
        pure_gauge_vector_potential(&self.lattice, chi)
    }

    /// `(A₀, A)` at time `t`; identically zero for `t < 0` and `t > t₁`.
    pub fn potential_at(&self, t: f64) -> Result<Potential> {
        if !self.is_active(t) {
            return Ok(Potential::zero(self.lattice.n_sites));
        }
        Ok(Potential {
            scalar: self.chi_rate_at(t),
            vector: self.minus_gradient(&self.chi_at(t))?,
        })
    }

    /// `∂A/∂t`.
    pub fn vector_potential_rate(&self, t: f64) -> Result<Vec<f64>> {
        if !self.is_active(t) {
            return Ok(vec![0.0; self.lattice.n_sites]);
        }
        self.minus_gradient(&self.chi_rate_at(t))
    }

    /// Electric field `E = -∇A₀ - ∂A/∂t`, sampled where `A` lives.
    pub fn field_strength_at(&self, t: f64) -> Result<Vec<f64>> {
        let pot = self.potential_at(t)?;
        let minus_grad_a0 = self.minus_gradient(&pot.scalar)?;
        let rate = self.vector_potential_rate(t)?;
        Ok(minus_grad_a0.iter().zip(&rate).map(|(g, r)| g - r).collect())
    }
}

/// `χ = -f ∇·J` with the lattice's own derivative.
pub fn chi_from_current_divergence(lattice: &LatticeConfig, current: &[f64], amplitude: f64) -> Result<Vec<f64>> {
    Ok(lattice.gradient(current)?.into_iter().map(|d| -amplitude * d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lattice(scheme: Scheme) -> LatticeConfig {
        LatticeConfig::new(8, 4.0, 1.0, 1.0, scheme).unwrap()
    }

    fn cosine_profile(l: &LatticeConfig) -> Vec<f64> {
        l.positions().iter().map(|&x| (2.0 * PI * x / l.box_length).cos()).collect()
    }

    #[test]
    fn ramps_satisfy_initial_conditions() {
        for ramp in [Ramp::Polynomial, Ramp::Cosine] {
            assert_eq!(ramp.value(0.0), 0.0);
            assert!(ramp.slope(0.0).abs() < 1e-15);
            assert!((ramp.value(1.0) - 1.0).abs() < 1e-15);
        }
        let l = lattice(Scheme::Spectral);
        let err = build_gauge_profile(&l, cosine_profile(&l), 1.0, Ramp::Linear, 1.0);
        assert!(matches!(err, Err(LabError::InvalidProfile(_))));
        assert!(build_gauge_profile(&l, cosine_profile(&l), 0.0, Ramp::Polynomial, 1.0).is_err());
    }

    #[test]
    fn zero_amplitude_pulse_vanishes() {
        let l = lattice(Scheme::Spectral);
        let p = build_gauge_profile(&l, cosine_profile(&l), 1.0, Ramp::Polynomial, 0.0).unwrap();
        for t in [-0.5, 0.0, 0.3, 1.0, 2.0] {
            assert!(p.potential_at(t).unwrap().is_zero());
        }
    }

    #[test]
    fn pulse_schedule_and_endpoint() {
        let l = lattice(Scheme::Spectral);
        let g = cosine_profile(&l);
        let p = build_gauge_profile(&l, g.clone(), 1.5, Ramp::Polynomial, 2.0).unwrap();
        let chi1 = p.final_chi();
        for (c, g) in chi1.iter().zip(&g) {
            assert_eq!(*c, 2.0 * g);
        }
        assert!(p.chi_at(0.0).iter().all(|&v| v == 0.0));
        assert!(p.chi_rate_at(0.0).iter().all(|&v| v == 0.0));
        assert!(p.potential_at(-0.1).unwrap().is_zero());
        assert!(p.potential_at(1.6).unwrap().is_zero());
        assert!(!p.potential_at(0.7).unwrap().is_zero());
    }

    #[test]
    fn pulse_is_pure_gauge() {
        for scheme in [Scheme::Spectral, Scheme::GaugedHopping] {
            let l = lattice(scheme);
            for ramp in [Ramp::Polynomial, Ramp::Cosine] {
                let p = build_gauge_profile(&l, cosine_profile(&l), 1.0, ramp, 3.0).unwrap();
                for t in [0.1, 0.5, 0.9, 1.0] {
                    let e = p.field_strength_at(t).unwrap();
                    assert!(e.iter().all(|v| v.abs() < 1e-10), "{scheme} {ramp:?} {e:?}");
                }
            }
        }
    }

    #[test]
    fn band_limit_rejects_high_wavenumbers() {
        let l = lattice(Scheme::Spectral);
        let zigzag: Vec<f64> = (0..8).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(build_gauge_profile(&l, zigzag.clone(), 1.0, Ramp::Polynomial, 1.0).is_err());
        assert!(GaugeProfile::with_band_limit(&l, zigzag, 1.0, Ramp::Polynomial, 1.0, None).is_ok());
    }

    #[test]
    fn divergence_profile() {
        let l = lattice(Scheme::Spectral);
        assert!(chi_from_current_divergence(&l, &[0.3; 8], 5.0).unwrap().iter().all(|v| v.abs() < 1e-14));
        let j = cosine_profile(&l);
        assert!(chi_from_current_divergence(&l, &j, 0.0).unwrap().iter().all(|v| *v == 0.0));
        let chi = chi_from_current_divergence(&l, &j, 2.0).unwrap();
        assert!(chi.iter().sum::<f64>().abs() < 1e-13);
    }
}
