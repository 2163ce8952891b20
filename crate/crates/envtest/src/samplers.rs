//! Bivariate distribution generators for the size and power experiments.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sample::BivariateSample;

/// The null and alternative distributions of the simulation study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    /// Independent standard normal coordinates.
    NormalIid,
    /// Independent standard Pareto coordinates on `[1, inf)`.
    ParetoIid { shape: f64 },
    /// Bivariate normal, zero mean, unit variance, correlation `rho`.
    Binormal { rho: f64 },
    /// Equal-weight mixture of bivariate normals with correlations `rho`
    /// and `-rho`; the population correlation is zero.
    CrossMixture { rho: f64 },
    /// Equal-weight mixture of independent N(0, outer_sd^2) coordinates and
    /// a unit-variance bivariate normal with correlation `rho`.
    CenterMixture { rho: f64, outer_sd: f64 },
    /// Uniform density on the unit square distorted in two blocks: zero on
    /// (0.35, 0.65) x (0.85, 1) and doubled on (0.35, 0.65) x (0, 0.15);
    /// the population correlation is zero.
    DistortedUniform,
}

impl Generator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Generator::ParetoIid { shape } if !(shape > 0.0) => Err(Error::Config(format!(
                "pareto shape must be positive, got {shape}"
            ))),
            Generator::Binormal { rho } | Generator::CrossMixture { rho } if !(rho.abs() < 1.0) => {
                Err(Error::Config(format!("|rho| must be < 1, got {rho}")))
            }
            Generator::CenterMixture { rho, outer_sd } => {
                if !(rho.abs() < 1.0) {
                    Err(Error::Config(format!("|rho| must be < 1, got {rho}")))
                } else if !(outer_sd > 0.0) {
                    Err(Error::Config(format!(
                        "outer sd must be positive, got {outer_sd}"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::NormalIid => "null-normal",
            Generator::ParetoIid { .. } => "null-pareto",
            Generator::Binormal { .. } => "binormal",
            Generator::CrossMixture { .. } => "cross-mixture",
            Generator::CenterMixture { .. } => "center-mixture",
            Generator::DistortedUniform => "distorted-uniform",
        }
    }

    pub fn params_string(&self) -> String {
        match self {
            Generator::NormalIid | Generator::DistortedUniform => String::new(),
            Generator::ParetoIid { shape } => format!("shape={shape}"),
            Generator::Binormal { rho } | Generator::CrossMixture { rho } => format!("rho={rho}"),
            Generator::CenterMixture { rho, outer_sd } => {
                format!("rho={rho};outer_sd={outer_sd}")
            }
        }
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> BivariateSample {
        let (x, y) = match *self {
            Generator::NormalIid => {
                let x = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let y = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                (x, y)
            }
            Generator::ParetoIid { shape } => {
                let draw = |rng: &mut dyn rand::RngCore| -> f64 {
                    let u: f64 = rng.gen();
                    (1.0 - u).powf(-1.0 / shape)
                };
                let x: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
                let y: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
                (x, y)
            }
            Generator::Binormal { rho } => binormal(n, rho, rng),
            Generator::CrossMixture { rho } => {
                let mut x = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    let r = if rng.gen::<bool>() { rho } else { -rho };
                    let (a, b) = binormal_pair(r, rng);
                    x.push(a);
                    y.push(b);
                }
                (x, y)
            }
            Generator::CenterMixture { rho, outer_sd } => {
                let mut x = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    if rng.gen::<bool>() {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        x.push(outer_sd * a);
                        y.push(outer_sd * b);
                    } else {
                        let (a, b) = binormal_pair(rho, rng);
                        x.push(a);
                        y.push(b);
                    }
                }
                (x, y)
            }
            Generator::DistortedUniform => {
                let mut x = Vec::with_capacity(n);
                let mut y = Vec::with_capacity(n);
                for _ in 0..n {
                    let a: f64 = rng.gen();
                    let b: f64 = if (0.35..0.65).contains(&a) {
                        // conditional density of y: 2 on (0, 0.15), 1 on
                        // [0.15, 0.85], 0 above
                        let u: f64 = rng.gen();
                        if u < 0.3 {
                            u / 2.0
                        } else {
                            0.15 + (u - 0.3)
                        }
                    } else {
                        rng.gen()
                    };
                    x.push(a);
                    y.push(b);
                }
                (x, y)
            }
        };
        BivariateSample::continuous(x, y).expect("generators produce valid samples")
    }
}

fn binormal_pair(rho: f64, rng: &mut impl Rng) -> (f64, f64) {
    let a: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    (a, rho * a + (1.0 - rho * rho).sqrt() * z)
}

fn binormal(n: usize, rho: f64, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = binormal_pair(rho, rng);
        x.push(a);
        y.push(b);
    }
    (x, y)
}

/// `(X, rho X + sqrt(1 - rho^2) Z)` with `X, Z` independent standard normal.
pub fn sample_binormal(n: usize, rho: f64, rng: &mut impl Rng) -> BivariateSample {
    Generator::Binormal { rho }.sample(n, rng)
}

pub fn sample_cross_mixture(n: usize, rho: f64, rng: &mut impl Rng) -> BivariateSample {
    Generator::CrossMixture { rho }.sample(n, rng)
}

pub fn sample_center_mixture(
    n: usize,
    rho: f64,
    outer_sd: f64,
    rng: &mut impl Rng,
) -> BivariateSample {
    Generator::CenterMixture { rho, outer_sd }.sample(n, rng)
}

pub fn sample_distorted_uniform(n: usize, rng: &mut impl Rng) -> BivariateSample {
    Generator::DistortedUniform.sample(n, rng)
}

/// Independent standard Pareto coordinates: `X = (1 - U)^(-1/shape)`.
pub fn sample_pareto_iid(n: usize, shape: f64, rng: &mut impl Rng) -> BivariateSample {
    Generator::ParetoIid { shape }.sample(n, rng)
}
