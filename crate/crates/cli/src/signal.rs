//! Input signal generators.

use std::path::PathBuf;

use kwcseg_core::{DataFunction, GridSignal, PiecewiseConstant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::io;

fn one() -> f64 {
    1.0
}

fn one_and_half() -> f64 {
    1.5
}

fn default_breakpoints() -> Vec<f64> {
    vec![1.0 / 3.0, 2.0 / 3.0]
}

fn default_values() -> Vec<f64> {
    vec![0.2, 0.8, 0.35]
}

fn default_noise_std() -> f64 {
    0.1
}

/// How the data `g` on `(0, 1)` is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    /// `slope·x + intercept`.
    Linear {
        #[serde(default = "one")]
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// `amplitude·sin(2π·frequency·x)`; the defaults give `sin(3πx)`.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_and_half")]
        frequency: f64,
    },
    /// A step function plus seeded Gaussian noise; the defaults are [`SignalSpec::noisy_steps`].
    NoisySteps {
        #[serde(default = "default_breakpoints")]
        breakpoints: Vec<f64>,
        #[serde(default = "default_values")]
        values: Vec<f64>,
        #[serde(default = "default_noise_std")]
        noise_std: f64,
    },
    /// Samples read from an `x,value` CSV file.
    Csv { path: PathBuf },
}

impl SignalSpec {
    pub fn identity() -> Self {
        SignalSpec::Linear {
            slope: 1.0,
            intercept: 0.0,
        }
    }

    pub fn sine() -> Self {
        SignalSpec::Sine {
            amplitude: 1.0,
            frequency: 1.5,
        }
    }

    /// Plateaus 0.2, 0.8 and 0.35 on thirds of `(0, 1)` with noise of standard deviation 0.1.
    pub fn noisy_steps() -> Self {
        SignalSpec::NoisySteps {
            breakpoints: default_breakpoints(),
            values: default_values(),
            noise_std: default_noise_std(),
        }
    }

    /// The noise-free function behind the samples, when it has a closed form.
    pub fn ground_truth(&self) -> Result<Option<DataFunction>> {
        Ok(match self {
            SignalSpec::Linear { slope, intercept } => Some(DataFunction::Linear {
                slope: *slope,
                intercept: *intercept,
            }),
            SignalSpec::Sine {
                amplitude,
                frequency,
            } => Some(DataFunction::Sine {
                amplitude: *amplitude,
                frequency: *frequency,
            }),
            SignalSpec::NoisySteps {
                breakpoints,
                values,
                ..
            } => Some(DataFunction::Steps(PiecewiseConstant::new(
                (0.0, 1.0),
                breakpoints.clone(),
                values.clone(),
            )?)),
            SignalSpec::Csv { .. } => None,
        })
    }

    /// Data function for energy evaluation: the closed form for noise-free generators,
    /// the samples otherwise.
    pub fn data_function(&self, samples: &GridSignal) -> Result<DataFunction> {
        Ok(match self {
            SignalSpec::Linear { .. } | SignalSpec::Sine { .. } => {
                self.ground_truth()?.expect("closed-form generator")
            }
            _ => DataFunction::Sampled(samples.clone()),
        })
    }
}

/// Samples the signal on `n` uniform nodes of `[0, 1]`; noise is drawn from a ChaCha
/// stream seeded with `seed`, so equal seeds give bit-identical signals.
pub fn generate_signal(spec: &SignalSpec, n: usize, seed: u64) -> Result<GridSignal> {
    if n < 2 {
        return Err(HarnessError::Config(format!("a signal needs at least 2 nodes, got {n}")));
    }
    match spec {
        SignalSpec::Csv { path } => {
            let g = io::read_signal_csv(path)?;
            if g.len() != n {
                return Err(HarnessError::Config(format!(
                    "{} holds {} samples, expected {n}",
                    path.display(),
                    g.len()
                )));
            }
            Ok(g)
        }
        SignalSpec::NoisySteps { noise_std, .. } => {
            let truth = spec.ground_truth()?.expect("step generator");
            let normal = Normal::new(0.0, *noise_std)
                .map_err(|e| HarnessError::Config(format!("noise_std: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let clean = GridSignal::from_fn(0.0, 1.0, n, |x| truth.value(x))?;
            let noisy = clean
                .samples()
                .iter()
                .map(|c| c + normal.sample(&mut rng))
                .collect();
            Ok(clean.with_samples(noisy)?)
        }
        _ => {
            let f = spec.ground_truth()?.expect("closed-form generator");
            Ok(GridSignal::from_fn(0.0, 1.0, n, |x| f.value(x))?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_samples() {
        let g = generate_signal(&SignalSpec::identity(), 5, 0).unwrap();
        assert_eq!(g.samples(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn sine_range_and_zeros() {
        let g = generate_signal(&SignalSpec::sine(), 1000, 0).unwrap();
        let peak = g.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak - 1.0).abs() < 1e-4);
        let f = SignalSpec::sine().ground_truth().unwrap().unwrap();
        for z in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
            assert!(f.value(z).abs() < 1e-15);
        }
    }

    #[test]
    fn noise_is_seeded() {
        let a = generate_signal(&SignalSpec::noisy_steps(), 1000, 7).unwrap();
        let b = generate_signal(&SignalSpec::noisy_steps(), 1000, 7).unwrap();
        let c = generate_signal(&SignalSpec::noisy_steps(), 1000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unknown_generator_is_rejected() {
        let r: std::result::Result<SignalSpec, _> =
            serde_json::from_str(r#"{"generator": "chirp"}"#);
        assert!(r.is_err());
    }
}
