//! Seeded gradient noise.
//!
//! Every draw is addressed by `(seed, stream_id, counter)`: the generator is
//! repositioned to word `counter · 2³²` of the ChaCha stream before each
//! vector is sampled, so a draw never depends on how many words earlier
//! draws consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StudentT, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Gaussian,
    StudentT,
    BoundedUniform,
}

/// Mean-zero noise with `E‖ε‖² = σ²` (per-coordinate variance `σ²/dim`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    #[serde(default)]
    pub sigma: f64,
    /// Degrees of freedom for Student-t; must exceed 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            sigma: 0.0,
            nu: None,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        NoiseModel {
            kind: NoiseKind::Gaussian,
            sigma,
            nu: None,
        }
    }

    pub fn student_t(nu: f64, sigma: f64) -> Self {
        NoiseModel {
            kind: NoiseKind::StudentT,
            sigma,
            nu: Some(nu),
        }
    }

    /// Student-t with 3 degrees of freedom: finite variance, unbounded
    /// support, infinite fourth moment.
    pub fn heavy_tailed(sigma: f64) -> Self {
        Self::student_t(3.0, sigma)
    }

    pub fn bounded_uniform(sigma: f64) -> Self {
        NoiseModel {
            kind: NoiseKind::BoundedUniform,
            sigma,
            nu: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::param(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        match self.kind {
            NoiseKind::None if self.sigma > 0.0 => {
                Err(Error::param("noise kind 'none' cannot have sigma > 0"))
            }
            NoiseKind::StudentT => match self.nu {
                Some(nu) if nu > 2.0 && nu.is_finite() => Ok(()),
                other => Err(Error::param(format!(
                    "student_t noise needs finite nu > 2, got {other:?}"
                ))),
            },
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NoiseKind::None || self.sigma == 0.0
    }
}

/// Counter-addressed random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
    pub counter: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::at(seed, stream_id, 0)
    }

    pub fn at(seed: u64, stream_id: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            counter,
            rng,
        }
    }

    /// Generator positioned for the current counter; advances the counter.
    fn next_block(&mut self) -> &mut ChaCha8Rng {
        self.rng.set_word_pos((self.counter as u128) << 32);
        self.counter += 1;
        &mut self.rng
    }
}

pub fn sample_noise(model: &NoiseModel, rng: &mut RngStream, dim: usize) -> Result<Vec<f64>> {
    model.validate()?;
    if dim == 0 {
        return Err(Error::param("dim must be >= 1"));
    }
    if model.is_zero() {
        rng.counter += 1;
        return Ok(vec![0.0; dim]);
    }
    let per = model.sigma / (dim as f64).sqrt();
    let r = rng.next_block();
    let out = match model.kind {
        NoiseKind::None => unreachable!(),
        NoiseKind::Gaussian => {
            let d = Normal::new(0.0, per).map_err(|e| Error::param(e.to_string()))?;
            (0..dim).map(|_| d.sample(r)).collect()
        }
        NoiseKind::StudentT => {
            let nu = model.nu.unwrap();
            let d = StudentT::new(nu).map_err(|e| Error::param(e.to_string()))?;
            let s = per * ((nu - 2.0) / nu).sqrt();
            (0..dim).map(|_| s * d.sample(r)).collect()
        }
        NoiseKind::BoundedUniform => {
            let a = per * 3f64.sqrt();
            let d = Uniform::new(-a, a).map_err(|e| Error::param(e.to_string()))?;
            (0..dim).map(|_| d.sample(r)).collect()
        }
    };
    Ok(out)
}

/// `∇f(x) + ε`, returned together with `ε`.
pub fn stochastic_gradient_parts(
    obj: &Objective,
    x: &[f64],
    model: &NoiseModel,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = obj.gradient(x)?;
    let eps = sample_noise(model, rng, obj.dim)?;
    let out = g.iter().zip(&eps).map(|(a, b)| a + b).collect();
    Ok((out, eps))
}

pub fn stochastic_gradient(
    obj: &Objective,
    x: &[f64],
    model: &NoiseModel,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    Ok(stochastic_gradient_parts(obj, x, model, rng)?.0)
}
