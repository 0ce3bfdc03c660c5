//! Gauss–Legendre rule and noise distributions.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const GAUSS_NODES: usize = 64;

/// Nodes and weights on `[-1, 1]` for `n ≥ 1`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GAUSS_NODES))
}

/// `∫_a^b f` with the 64-node rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * x.iter().zip(w).map(|(&xi, &wi)| wi * f(mid + half * xi)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Degenerate,
    Logistic,
    Gaussian,
}

/// Preference noise `ξ`, independent of the advantage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub scale: f64,
}

impl NoiseSpec {
    pub const DEGENERATE: NoiseSpec = NoiseSpec { family: NoiseFamily::Degenerate, scale: 0.0 };

    pub fn new(family: NoiseFamily, scale: f64) -> Result<Self> {
        let spec = Self { family, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            NoiseFamily::Degenerate if self.scale != 0.0 => {
                Err(Error::InvalidParameter(format!("degenerate noise must have scale 0, got {}", self.scale)))
            }
            NoiseFamily::Logistic | NoiseFamily::Gaussian if !(self.scale > 0.0 && self.scale.is_finite()) => Err(
                Error::InvalidParameter(format!("{:?} noise needs a positive finite scale, got {}", self.family, self.scale)),
            ),
            _ => Ok(()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.family == NoiseFamily::Degenerate
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            NoiseFamily::Degenerate => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseFamily::Logistic => 1.0 / (1.0 + (-x / self.scale).exp()),
            NoiseFamily::Gaussian => standard_normal().cdf(x / self.scale),
        }
    }

    /// Quantile for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self.family {
            NoiseFamily::Degenerate => 0.0,
            NoiseFamily::Logistic => self.scale * (u / (1.0 - u)).ln(),
            NoiseFamily::Gaussian => self.scale * standard_normal().inverse_cdf(u),
        }
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}
