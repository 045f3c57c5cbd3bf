//! Physical parameter set of one emitter–cavity instance.
//!
//! All rates are angular frequencies. A parameter set may be given either in
//! s⁻¹ or in units of the cavity decay rate κ; every dimensionless output of
//! the crate is invariant under that rescaling, so the two conventions only
//! differ in how inputs are written down.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit convention for parameter input. Never guessed; always stated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Angular frequencies in s⁻¹.
    Si,
    /// Rates expressed as multiples of κ (so `kappa` itself should be 1).
    Kappa,
}

/// The five physical rates plus detuning defining one system instance.
///
/// `g` is the emitter–cavity coupling, `kappa` the cavity decay rate,
/// `gamma` the emitter spontaneous-emission rate, `p` the incoherent pump
/// strength, `delta` the cavity–emitter detuning (may be negative) and
/// `gamma_d` an optional pure-dephasing rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub p: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub gamma_d: f64,
}

/// Micropillar parameters (g, κ, Γ) = (122, 276, 113) · 10⁹ s⁻¹.
pub const SET_A: (f64, f64, f64) = (122e9, 276e9, 113e9);
/// Microdisk parameters (g, κ, Γ) = (616, 213, 427) · 10⁹ s⁻¹.
pub const SET_B: (f64, f64, f64) = (616e9, 213e9, 427e9);

impl SystemParams {
    /// Resonant (δ = 0), dephasing-free parameter set.
    pub fn new(g: f64, kappa: f64, gamma: f64, p: f64) -> Result<Self> {
        Self { g, kappa, gamma, p, delta: 0.0, gamma_d: 0.0 }.validated()
    }

    /// Micropillar preset with the pump strength as the free knob.
    pub fn set_a(p: f64) -> Self {
        let (g, kappa, gamma) = SET_A;
        Self { g, kappa, gamma, p, delta: 0.0, gamma_d: 0.0 }
    }

    /// Microdisk preset with the pump strength as the free knob.
    pub fn set_b(p: f64) -> Self {
        let (g, kappa, gamma) = SET_B;
        Self { g, kappa, gamma, p, delta: 0.0, gamma_d: 0.0 }
    }

    /// Look up a named preset (`"setA"` / `"setB"`, case-insensitive).
    pub fn preset(name: &str, p: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "seta" | "a" => Ok(Self::set_a(p)),
            "setb" | "b" => Ok(Self::set_b(p)),
            _ => Err(Error::Config(format!("unknown preset `{name}` (expected setA or setB)"))),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_dephasing(mut self, gamma_d: f64) -> Self {
        self.gamma_d = gamma_d;
        self
    }

    pub fn with_pump(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    /// Check every invariant, naming the offending field on failure.
    ///
    /// All dissipation rates and g must be finite and nonzero; κ = 0 in
    /// particular is rejected because the recurrence coefficients divide by
    /// it. p = 0 is admitted (vacuum steady state).
    pub fn validate(&self) -> Result<()> {
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam { field, value: v, reason: "must be finite" })
            }
        }
        fn positive(field: &'static str, v: f64) -> Result<()> {
            finite(field, v)?;
            if v > 0.0 {
                Ok(())
            } else if v == 0.0 {
                Err(Error::InvalidParam { field, value: v, reason: "must be nonzero" })
            } else {
                Err(Error::InvalidParam { field, value: v, reason: "must be positive" })
            }
        }
        fn nonnegative(field: &'static str, v: f64) -> Result<()> {
            finite(field, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParam { field, value: v, reason: "must be nonnegative" })
            }
        }
        positive("g", self.g)?;
        positive("kappa", self.kappa)?;
        positive("gamma", self.gamma)?;
        nonnegative("p", self.p)?;
        finite("delta", self.delta)?;
        nonnegative("gamma_d", self.gamma_d)?;
        Ok(())
    }

    /// Validate and pass through by value.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Rescale every rate by κ, so the returned set has `kappa == 1` exactly.
    ///
    /// Every dimensionless downstream quantity (moments, criteria ratios, Φ)
    /// is invariant under this map.
    pub fn normalize(&self) -> Self {
        Self {
            g: self.g / self.kappa,
            kappa: 1.0,
            gamma: self.gamma / self.kappa,
            p: self.p / self.kappa,
            delta: self.delta / self.kappa,
            gamma_d: self.gamma_d / self.kappa,
        }
    }

    /// Largest rate scale, used for regime checks.
    pub fn max_rate(&self) -> f64 {
        self.g.max(self.kappa).max(self.gamma).max(self.delta.abs()).max(self.gamma_d)
    }
}

/// On-disk parameter file: the `SystemParams` keys plus a mandatory `units`
/// key. Silent unit guessing is forbidden, so `units` has no default.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub p: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub gamma_d: f64,
    pub units: Units,
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams {
            g: self.g,
            kappa: self.kappa,
            gamma: self.gamma,
            p: self.p,
            delta: self.delta,
            gamma_d: self.gamma_d,
        }
        .validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SystemParams::set_a(1e11).validate().unwrap();
        SystemParams::set_b(1e11).validate().unwrap();
    }

    #[test]
    fn zero_kappa_rejected_with_field_name() {
        let err = SystemParams::new(1.0, 0.0, 1.0, 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("kappa"), "message should name kappa: {msg}");
        assert!(msg.contains("nonzero"));
    }

    #[test]
    fn rejects_each_bad_field() {
        assert!(SystemParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, -1.0).is_err());
        assert!(SystemParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, f64::INFINITY, 1.0, 1.0).is_err());
        let p = SystemParams::set_a(1e11).with_delta(f64::NAN);
        assert!(p.validate().is_err());
        let p = SystemParams::set_a(1e11).with_dephasing(-2.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn pump_zero_is_valid() {
        SystemParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
    }

    #[test]
    fn normalize_homogeneous_rescaling() {
        let p = SystemParams::new(2.0, 2.0, 2.0, 1.0).unwrap().normalize();
        assert_eq!(p.g, 1.0);
        assert_eq!(p.kappa, 1.0);
        assert_eq!(p.gamma, 1.0);
        assert_eq!(p.p, 0.5);
    }

    #[test]
    fn normalize_set_a() {
        let n = SystemParams::set_a(1e11).normalize();
        assert!((n.g - 0.4420289855072464).abs() < 1e-15);
        assert!((n.gamma - 0.4094202898550725).abs() < 1e-15);
        assert!((n.p - 0.36231884057971014).abs() < 1e-15);
        assert_eq!(n.kappa, 1.0);
    }

    #[test]
    fn normalize_identity_on_unit_kappa() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.normalize(), p);
    }

    #[test]
    fn config_roundtrip_and_missing_units() {
        let file = ParamsFile::parse(
            "g = 122e9\nkappa = 276e9\ngamma = 113e9\np = 1e11\nunits = \"si\"\n",
        )
        .unwrap();
        assert_eq!(file.units, Units::Si);
        assert_eq!(file.params().unwrap(), SystemParams::set_a(1e11));

        let err = ParamsFile::parse("g = 1\nkappa = 1\ngamma = 1\np = 1\n").unwrap_err();
        assert!(err.to_string().contains("units"));
    }
}
