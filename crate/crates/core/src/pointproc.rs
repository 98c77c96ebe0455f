//! Seeded point-process generators on the unit square.
//!
//! Every generator is a deterministic function of its parameters and a
//! 64-bit seed (ChaCha8 stream).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointPattern, Window};

/// Cap on redraws for conditioned generators.
pub const DEFAULT_ATTEMPT_CAP: usize = 1_000_000;

/// Baddeley-Silverman tile counts and their probabilities.
pub const BS_COUNTS: [usize; 3] = [0, 1, 10];
const BS_P0: f64 = 1.0 / 10.0;
const BS_P01: f64 = 1.0 / 10.0 + 8.0 / 9.0;

/// A point-process model, as read from run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// `n` i.i.d. uniform points (CSR).
    Binomial {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Window>,
    },
    /// Homogeneous Poisson process with the given intensity.
    Poisson {
        intensity: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<Window>,
    },
    /// Strauss process with exactly `n` points.
    Strauss {
        radius: f64,
        gamma: f64,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in: Option<usize>,
    },
    /// Matérn cluster process, optionally conditioned on `n` points.
    Matern {
        kappa: f64,
        offspring_mean: f64,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
    /// Tile process with 0, 1 or 10 points per tile, optionally conditioned on `n`.
    BaddeleySilverman {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
    },
}

impl ProcessSpec {
    /// The four models of the power study with `n` points each: CSR,
    /// Strauss(R=0.05, γ=0.5), Matérn(κ=10, m=10, r=0.02), Baddeley-Silverman.
    pub fn power_study_models(n: usize) -> Vec<ProcessSpec> {
        vec![
            ProcessSpec::Binomial { n, window: None },
            ProcessSpec::Strauss { radius: 0.05, gamma: 0.5, n, burn_in: None },
            ProcessSpec::Matern { kappa: 10.0, offspring_mean: 10.0, radius: 0.02, n: Some(n) },
            ProcessSpec::BaddeleySilverman { n: Some(n) },
        ]
    }

    /// Column heading used in power tables.
    pub fn label(&self) -> &'static str {
        match self {
            ProcessSpec::Binomial { .. } => "CSR",
            ProcessSpec::Poisson { .. } => "Poisson",
            ProcessSpec::Strauss { .. } => "Strauss",
            ProcessSpec::Matern { .. } => "Matern Cluster",
            ProcessSpec::BaddeleySilverman { .. } => "Baddeley-Silverman",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
            }
        };
        let window_ok = |w: &Option<Window>| match w {
            Some(w) => Window::new(w.min.clone(), w.max.clone()).map(|_| ()),
            None => Ok(()),
        };
        match self {
            ProcessSpec::Binomial { n, window } => {
                if *n == 0 {
                    return Err(Error::InvalidArgument("binomial needs n >= 1".into()));
                }
                window_ok(window)
            }
            ProcessSpec::Poisson { intensity, window } => {
                positive("intensity", *intensity)?;
                window_ok(window)
            }
            ProcessSpec::Strauss { radius, gamma, n, .. } => {
                positive("radius", *radius)?;
                if !(0.0..=1.0).contains(gamma) {
                    return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1], got {gamma}")));
                }
                if *n == 0 {
                    return Err(Error::InvalidArgument("strauss needs n >= 1".into()));
                }
                Ok(())
            }
            ProcessSpec::Matern { kappa, offspring_mean, radius, n } => {
                positive("kappa", *kappa)?;
                positive("offspring_mean", *offspring_mean)?;
                positive("radius", *radius)?;
                if *n == Some(0) {
                    return Err(Error::InvalidArgument("conditioning count must be >= 1".into()));
                }
                Ok(())
            }
            ProcessSpec::BaddeleySilverman { n } => {
                if *n == Some(0) {
                    return Err(Error::InvalidArgument("conditioning count must be >= 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn generate(&self, seed: u64) -> Result<PointPattern> {
        self.validate()?;
        let unit = Window::unit(2);
        match self {
            ProcessSpec::Binomial { n, window } => gen_binomial(*n, window.as_ref().unwrap_or(&unit), seed),
            ProcessSpec::Poisson { intensity, window } => {
                gen_poisson(*intensity, window.as_ref().unwrap_or(&unit), seed)
            }
            ProcessSpec::Strauss { radius, gamma, n, burn_in } => {
                gen_strauss_with_burn_in(*radius, *gamma, *n, burn_in.unwrap_or(200 * n), seed)
            }
            ProcessSpec::Matern { kappa, offspring_mean, radius, n } => {
                gen_matern(*kappa, *offspring_mean, *radius, *n, seed)
            }
            ProcessSpec::BaddeleySilverman { n } => gen_baddeley_silverman(*n, seed),
        }
    }
}

/// Seed for item `index` of stream `stream` under `base` (SplitMix64 mixing),
/// so that parallel batches draw from disjoint, order-independent seeds.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_in(rng: &mut ChaCha8Rng, window: &Window) -> Vec<f64> {
    window.min.iter().zip(&window.max).map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo)).collect()
}

fn poisson_count(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// `n` i.i.d. uniform points in `window`.
pub fn gen_binomial(n: usize, window: &Window, seed: u64) -> Result<PointPattern> {
    let window = Window::new(window.min.clone(), window.max.clone())?;
    let mut rng = rng_for(seed);
    let points = (0..n).map(|_| uniform_in(&mut rng, &window)).collect();
    PointPattern::new(points, window)
}

/// Poisson(`intensity * volume`) many uniform points in `window`; may be empty.
pub fn gen_poisson(intensity: f64, window: &Window, seed: u64) -> Result<PointPattern> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::InvalidArgument(format!("intensity must be positive, got {intensity}")));
    }
    let window = Window::new(window.min.clone(), window.max.clone())?;
    let mut rng = rng_for(seed);
    let count = poisson_count(&mut rng, intensity * window.volume());
    let points = (0..count).map(|_| uniform_in(&mut rng, &window)).collect();
    PointPattern::new(points, window)
}

/// Number of unordered pairs closer than `radius`.
pub fn pair_count(pattern: &PointPattern, radius: f64) -> usize {
    let r2 = radius * radius;
    let pts: Vec<&[f64]> = pattern.points().collect();
    let mut count = 0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if crate::geometry::squared_distance(pts[i], pts[j]) < r2 {
                count += 1;
            }
        }
    }
    count
}

/// Strauss process with `n` points on the unit square, burn-in `200 n`.
pub fn gen_strauss(radius: f64, gamma: f64, n: usize, seed: u64) -> Result<PointPattern> {
    gen_strauss_with_burn_in(radius, gamma, n, 200 * n, seed)
}

/// Fixed-`n` Metropolis sampler for the density `∝ γ^{s(x)}`: each step
/// moves one uniformly chosen point to a uniform location and accepts with
/// probability `min(1, γ^{Δs})`.
pub fn gen_strauss_with_burn_in(radius: f64, gamma: f64, n: usize, burn_in: usize, seed: u64) -> Result<PointPattern> {
    ProcessSpec::Strauss { radius, gamma, n, burn_in: Some(burn_in) }.validate()?;
    let window = Window::unit(2);
    let mut rng = rng_for(seed);
    let mut pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let r2 = radius * radius;
    let close = |pts: &[[f64; 2]], skip: usize, p: [f64; 2]| -> i32 {
        pts.iter().enumerate().filter(|(k, q)| *k != skip && (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) < r2).count()
            as i32
    };
    for _ in 0..burn_in {
        let i = rng.random_range(0..n);
        let proposal = [rng.random::<f64>(), rng.random::<f64>()];
        let u: f64 = rng.random();
        let delta = close(&pts, i, proposal) - close(&pts, i, pts[i]);
        if delta <= 0 || u < gamma.powi(delta) {
            pts[i] = proposal;
        }
    }
    PointPattern::new(pts.iter().map(|p| p.to_vec()).collect(), window)
}

/// Offspring positions tagged with the index of their parent.
type Offspring = Vec<([f64; 2], usize)>;

/// One unconditioned Matérn draw: offspring inside the unit square, plus the parents.
fn matern_draw(rng: &mut ChaCha8Rng, kappa: f64, offspring_mean: f64, radius: f64) -> (Vec<[f64; 2]>, Offspring) {
    let side = 1.0 + 2.0 * radius;
    let parents: Vec<[f64; 2]> = (0..poisson_count(rng, kappa * side * side))
        .map(|_| [rng.random::<f64>() * side - radius, rng.random::<f64>() * side - radius])
        .collect();
    let mut offspring = Vec::new();
    for (pi, parent) in parents.iter().enumerate() {
        for _ in 0..poisson_count(rng, offspring_mean) {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            let p = [parent[0] + r * theta.cos(), parent[1] + r * theta.sin()];
            if (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]) {
                offspring.push((p, pi));
            }
        }
    }
    (parents, offspring)
}

/// Matérn cluster process on the unit square; with `n`, whole draws are
/// repeated until exactly `n` offspring fall in the square.
pub fn gen_matern(kappa: f64, offspring_mean: f64, radius: f64, n: Option<usize>, seed: u64) -> Result<PointPattern> {
    gen_matern_with_cap(kappa, offspring_mean, radius, n, seed, DEFAULT_ATTEMPT_CAP)
}

pub fn gen_matern_with_cap(
    kappa: f64,
    offspring_mean: f64,
    radius: f64,
    n: Option<usize>,
    seed: u64,
    cap: usize,
) -> Result<PointPattern> {
    ProcessSpec::Matern { kappa, offspring_mean, radius, n }.validate()?;
    let mut rng = rng_for(seed);
    for _ in 0..cap {
        let (_, offspring) = matern_draw(&mut rng, kappa, offspring_mean, radius);
        if n.is_none_or(|n| offspring.len() == n) {
            return PointPattern::new(offspring.iter().map(|(p, _)| p.to_vec()).collect(), Window::unit(2));
        }
    }
    Err(Error::ConditioningTimeout(cap))
}

fn baddeley_silverman_draw(rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut counts = Vec::with_capacity(100);
    let mut points = Vec::new();
    for tile in 0..100 {
        let (tx, ty) = ((tile % 10) as f64 / 10.0, (tile / 10) as f64 / 10.0);
        let u: f64 = rng.random();
        let count = if u < BS_P0 {
            BS_COUNTS[0]
        } else if u < BS_P01 {
            BS_COUNTS[1]
        } else {
            BS_COUNTS[2]
        };
        for _ in 0..count {
            points.push(vec![tx + rng.random::<f64>() / 10.0, ty + rng.random::<f64>() / 10.0]);
        }
        counts.push(count);
    }
    (counts, points)
}

/// Baddeley-Silverman tile process on a 10 x 10 tiling of the unit square,
/// optionally redrawn until it has exactly `n` points.
pub fn gen_baddeley_silverman(n: Option<usize>, seed: u64) -> Result<PointPattern> {
    gen_baddeley_silverman_with_cap(n, seed, DEFAULT_ATTEMPT_CAP)
}

pub fn gen_baddeley_silverman_with_cap(n: Option<usize>, seed: u64, cap: usize) -> Result<PointPattern> {
    ProcessSpec::BaddeleySilverman { n }.validate()?;
    let mut rng = rng_for(seed);
    for _ in 0..cap {
        let (_, points) = baddeley_silverman_draw(&mut rng);
        if n.is_none_or(|n| points.len() == n) {
            return PointPattern::new(points, Window::unit(2));
        }
    }
    Err(Error::ConditioningTimeout(cap))
}
