use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::rng::RngStream;
use crate::types::Vector;

/// Where sampled pairs `(w, w')` live.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Both points independent and uniform in the ball of `radius`.
    Ball { radius: f64 },
    /// `w = 0`, `w'` on a uniformly random ray at uniform distance in
    /// `[0, max_radius]`.
    Ray { max_radius: f64 },
    /// `w` uniform in the ball of `radius`, `w' = w + d` with `d` uniform in
    /// the ball of `step`.
    Local { radius: f64, step: f64 },
    /// Both points uniform in `[-half_width, half_width]^d`.
    Box { half_width: f64 },
}

/// Seeded generator of point pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub dim: usize,
    pub region: Region,
    pub count: usize,
    pub seed: u64,
}

fn uniform_in_ball(rng: &mut RngStream, dim: usize, radius: f64) -> Vector {
    loop {
        let dir = Vector::from(rng.normal_vec(dim, 0.0, 1.0));
        let n = norm(&dir);
        if n > 0.0 {
            let r = radius * rng.uniform().powf(1.0 / dim as f64);
            return dir * (r / n);
        }
    }
}

impl PairSampler {
    pub fn new(dim: usize, region: Region, count: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("sampler dimension must be >= 1".into()));
        }
        let ok = match region {
            Region::Ball { radius } => radius > 0.0,
            Region::Ray { max_radius } => max_radius > 0.0,
            Region::Local { radius, step } => radius >= 0.0 && step > 0.0,
            Region::Box { half_width } => half_width > 0.0,
        };
        if !ok {
            return Err(Error::Argument(format!("invalid sampler region {region:?}")));
        }
        Ok(Self {
            dim,
            region,
            count,
            seed,
        })
    }

    pub fn ball(dim: usize, radius: f64, count: usize, seed: u64) -> Result<Self> {
        Self::new(dim, Region::Ball { radius }, count, seed)
    }

    pub fn ray(dim: usize, max_radius: f64, count: usize, seed: u64) -> Result<Self> {
        Self::new(dim, Region::Ray { max_radius }, count, seed)
    }

    pub fn local(dim: usize, radius: f64, step: f64, count: usize, seed: u64) -> Result<Self> {
        Self::new(dim, Region::Local { radius, step }, count, seed)
    }

    pub fn cube(dim: usize, half_width: f64, count: usize, seed: u64) -> Result<Self> {
        Self::new(dim, Region::Box { half_width }, count, seed)
    }

    /// Same region and size, different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn pairs(&self) -> Vec<(Vector, Vector)> {
        let mut rng = RngStream::new(self.seed, "pairs");
        let d = self.dim;
        (0..self.count)
            .map(|_| match self.region {
                Region::Ball { radius } => {
                    let w = uniform_in_ball(&mut rng, d, radius);
                    (w, uniform_in_ball(&mut rng, d, radius))
                }
                Region::Ray { max_radius } => {
                    let dir = uniform_in_ball(&mut rng, d, 1.0);
                    let n = norm(&dir).max(f64::MIN_POSITIVE);
                    let r = max_radius * rng.uniform();
                    (Vector::zeros(d), dir * (r / n))
                }
                Region::Local { radius, step } => {
                    let w = uniform_in_ball(&mut rng, d, radius);
                    let wp = &w + &uniform_in_ball(&mut rng, d, step);
                    (w, wp)
                }
                Region::Box { half_width } => {
                    let mut draw = || {
                        Vector::from_shape_fn(d, |_| half_width * (2.0 * rng.uniform() - 1.0))
                    };
                    let w = draw();
                    (w, draw())
                }
            })
            .collect()
    }

    /// Single points drawn from the region (the `w'` of each pair for rays,
    /// `w` otherwise).
    pub fn points(&self) -> Vec<Vector> {
        self.pairs()
            .into_iter()
            .map(|(w, wp)| match self.region {
                Region::Ray { .. } => wp,
                _ => w,
            })
            .collect()
    }
}

/// Anything that yields a list of pairs to test.
pub trait PairSource {
    fn pairs(&self) -> Vec<(Vector, Vector)>;

    fn seed(&self) -> Option<u64> {
        None
    }
}

impl PairSource for PairSampler {
    fn pairs(&self) -> Vec<(Vector, Vector)> {
        PairSampler::pairs(self)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

impl PairSource for [(Vector, Vector)] {
    fn pairs(&self) -> Vec<(Vector, Vector)> {
        self.to_vec()
    }
}

impl PairSource for Vec<(Vector, Vector)> {
    fn pairs(&self) -> Vec<(Vector, Vector)> {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_respect_their_bounds() {
        let ball = PairSampler::ball(3, 2.0, 200, 1).unwrap();
        assert!(ball.pairs().iter().all(|(a, b)| norm(a) <= 2.0 && norm(b) <= 2.0));
        let ray = PairSampler::ray(2, 5.0, 200, 1).unwrap();
        assert!(ray.pairs().iter().all(|(a, b)| norm(a) == 0.0 && norm(b) <= 5.0));
        let local = PairSampler::local(4, 1.0, 0.1, 200, 1).unwrap();
        assert!(local
            .pairs()
            .iter()
            .all(|(a, b)| crate::linalg::distance(a, b) <= 0.1 + 1e-12));
        let cube = PairSampler::cube(2, 3.0, 200, 1).unwrap();
        assert!(cube
            .pairs()
            .iter()
            .all(|(a, b)| a.iter().chain(b.iter()).all(|v| v.abs() <= 3.0)));
    }

    #[test]
    fn seeded_and_reproducible() {
        let s = PairSampler::ball(3, 1.0, 10, 7).unwrap();
        assert_eq!(s.pairs(), s.pairs());
        assert_ne!(s.pairs(), s.reseeded(8).pairs());
        assert!(PairSampler::ball(0, 1.0, 10, 7).is_err());
        assert!(PairSampler::ball(1, -1.0, 10, 7).is_err());
    }
}
