use alloc::string::ToString;
use alloc::sync::Arc;
use core::fmt;
use core::str::FromStr;

use super::law::{GaussianLaw, InitialLaw};
use super::{Bounds, Coefficients, Dependence, ModelSpec};
use crate::error::{invalid, Error, Result};
use crate::math::{sqrt, tanh};

pub const DEFAULT_SATURATION: f64 = 10.0;

/// Entropic regularisation of the transport preset.
const EOT_REGULARIZATION: f64 = 1.0;
/// Degree of the regular tree in the local-field preset.
const TREE_DEGREE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Entropic optimal transport flow with coupling cost `-x·y`.
    EotFlow,
    /// Root/neighbour pair of a diffusion on a regular tree with quadratic
    /// pair interaction.
    LocalField,
    /// Adaptive biasing force on a double well coupled to a harmonic
    /// coordinate.
    Abf,
    /// `b^i_j(x) = tanh(x^j)`: the conditional expectation is the function
    /// itself, so the limit is an ordinary SDE.
    DecoupledOracle,
    /// `b^1_2 = tanh(x^1)`, `b^2_1 = tanh(x^2)`: conditioning on the other
    /// block. Exact only while the blocks are independent, i.e. at `t = 0`.
    FrozenIndependence,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::EotFlow,
        Preset::LocalField,
        Preset::Abf,
        Preset::DecoupledOracle,
        Preset::FrozenIndependence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::EotFlow => "eot-flow",
            Preset::LocalField => "local-field",
            Preset::Abf => "abf",
            Preset::DecoupledOracle => "decoupled-oracle",
            Preset::FrozenIndependence => "frozen-independence",
        }
    }

    pub fn build(self, options: &PresetOptions) -> Result<ModelSpec> {
        let b_sat = options.saturation;
        if !(b_sat > 0.0 && b_sat.is_finite()) {
            return Err(invalid("saturation", "must be positive and finite"));
        }
        let coeffs = Arc::new(PresetCoefficients {
            kind: self,
            sat: b_sat,
        });
        let mu0 = InitialLaw::Gaussian(GaussianLaw::standard(2));
        let (sigma, bounds) = match self {
            Preset::DecoupledOracle => (
                1.0,
                Bounds {
                    b: 1.0,
                    v: 0.0,
                    saturation: None,
                },
            ),
            Preset::FrozenIndependence => (
                1.0,
                Bounds {
                    b: 1.0,
                    v: 0.5,
                    saturation: None,
                },
            ),
            Preset::EotFlow => (
                sqrt(EOT_REGULARIZATION),
                Bounds {
                    b: b_sat,
                    v: b_sat * (1.0 + EOT_REGULARIZATION),
                    saturation: Some(b_sat),
                },
            ),
            Preset::LocalField => (
                1.0,
                Bounds {
                    b: (TREE_DEGREE - 1.0) * b_sat,
                    v: 2.0 * b_sat,
                    saturation: Some(b_sat),
                },
            ),
            Preset::Abf => (
                sqrt(0.5),
                Bounds {
                    b: b_sat,
                    v: b_sat,
                    saturation: Some(b_sat),
                },
            ),
        };
        let model = ModelSpec::new(self.as_str(), coeffs, sigma, mu0, bounds)?;
        Ok(match self {
            Preset::DecoupledOracle => {
                model.with_oracle(Arc::new(|x: &[f64], _t: f64, out: &mut [f64]| {
                    let s = tanh(x[0]) + tanh(x[1]);
                    out[0] = s;
                    out[1] = s;
                    Ok(())
                }))
            }
            Preset::FrozenIndependence => {
                model.with_oracle(Arc::new(|x: &[f64], t: f64, out: &mut [f64]| {
                    if t != 0.0 {
                        return Err(Error::NoOracle(
                            "frozen-independence is exact only at t = 0".to_string(),
                        ));
                    }
                    out[0] = -0.5 * tanh(x[0]);
                    out[1] = -0.5 * tanh(x[1]);
                    Ok(())
                }))
            }
            _ => model,
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetOptions {
    /// Level `B` of the smooth clamp `B·tanh(v/B)` applied to unbounded
    /// coefficients.
    pub saturation: f64,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            saturation: DEFAULT_SATURATION,
        }
    }
}

pub fn preset(name: &str) -> Result<ModelSpec> {
    preset_with(name, &PresetOptions::default())
}

pub fn preset_with(name: &str, options: &PresetOptions) -> Result<ModelSpec> {
    name.parse::<Preset>()?.build(options)
}

/// All presets have two scalar blocks.
struct PresetCoefficients {
    kind: Preset,
    sat: f64,
}

impl PresetCoefficients {
    fn clamp(&self, v: f64) -> f64 {
        self.sat * tanh(v / self.sat)
    }

    /// Partial derivatives of `(x1² - 1)² + ½(x2 - x1)²`.
    fn abf_gradient(x: &[f64]) -> (f64, f64) {
        let g2 = x[1] - x[0];
        (4.0 * x[0] * (x[0] * x[0] - 1.0) - g2, g2)
    }
}

impl Coefficients for PresetCoefficients {
    fn blocks(&self) -> usize {
        2
    }

    fn block_dim(&self) -> usize {
        1
    }

    fn b(&self, i: usize, j: usize, x: &[f64], out: &mut [f64]) {
        let other = 1 - i;
        out[0] = match self.kind {
            Preset::DecoupledOracle => tanh(x[j]),
            Preset::FrozenIndependence => {
                if i == j {
                    0.0
                } else {
                    tanh(x[i])
                }
            }
            // ∂_x c(x, y) = -y with y the other marginal.
            Preset::EotFlow => {
                if i == j {
                    self.clamp(-x[other])
                } else {
                    0.0
                }
            }
            Preset::LocalField => {
                if i == j {
                    -(TREE_DEGREE - 1.0) * self.clamp(x[i] - x[other])
                } else {
                    0.0
                }
            }
            Preset::Abf => {
                if i == 0 && j == 0 {
                    self.clamp(Self::abf_gradient(x).0)
                } else {
                    0.0
                }
            }
        };
    }

    fn v(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let other = 1 - i;
        out[0] = match self.kind {
            Preset::DecoupledOracle => 0.0,
            Preset::FrozenIndependence => -0.5 * tanh(x[i]),
            Preset::EotFlow => -self.clamp(-x[other]) - EOT_REGULARIZATION * self.clamp(x[i]),
            Preset::LocalField => -self.clamp(x[i] - x[other]) - self.clamp(x[i]),
            Preset::Abf => {
                let (g1, g2) = Self::abf_gradient(x);
                -self.clamp(if i == 0 { g1 } else { g2 })
            }
        };
    }

    fn dependence(&self, i: usize, j: usize) -> Dependence {
        match self.kind {
            Preset::DecoupledOracle => Dependence::QueryOnly,
            Preset::FrozenIndependence => {
                if i == j {
                    Dependence::Zero
                } else {
                    Dependence::AtomOnly
                }
            }
            Preset::EotFlow => {
                if i == j {
                    Dependence::AtomOnly
                } else {
                    Dependence::Zero
                }
            }
            Preset::LocalField => {
                if i == j {
                    Dependence::Mixed
                } else {
                    Dependence::Zero
                }
            }
            Preset::Abf => {
                if i == 0 && j == 0 {
                    Dependence::Mixed
                } else {
                    Dependence::Zero
                }
            }
        }
    }
}

#[cfg(test)]
#[path = "../../tests/unit/presets.rs"]
mod tests;
