//! Rectangular sample regions and pointwise sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{simplify, Expr};
use crate::error::{Error, Result};

/// Supplementary seeded random points added to every grid sweep.
pub const RANDOM_SAMPLES: usize = 64;

/// Axis-aligned rectangle `[x_min, x_max] x [u_min, u_max]` with a sampling
/// grid of `grid_n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub grid_n: usize,
    pub seed: u64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, u_min: f64, u_max: f64, grid_n: usize, seed: u64) -> Result<Self> {
        let r = Region {
            x_min,
            x_max,
            u_min,
            u_max,
            grid_n,
            seed,
        };
        r.validate()?;
        Ok(r)
    }

    /// Region with the default grid (33 per axis) and seed (42).
    pub fn rect(x_min: f64, x_max: f64, u_min: f64, u_max: f64) -> Result<Self> {
        Self::new(x_min, x_max, u_min, u_max, 33, 42)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.u_min, self.u_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidRegion("bounds must be finite".into()));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::InvalidRegion(format!("x_min {} must be < x_max {}", self.x_min, self.x_max)));
        }
        if !(self.u_min < self.u_max) {
            return Err(Error::InvalidRegion(format!("u_min {} must be < u_max {}", self.u_min, self.u_max)));
        }
        if self.grid_n < 2 {
            return Err(Error::InvalidRegion("grid_n must be at least 2".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.u_max - self.u_min
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x_min + self.x_max), 0.5 * (self.u_min + self.u_max))
    }

    pub fn contains(&self, x: f64, u: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.u_min..=self.u_max).contains(&u)
    }

    /// Point at fractional position `(s, t)` in `[0, 1]^2`.
    pub fn at(&self, s: f64, t: f64) -> (f64, f64) {
        (self.x_min + s * self.width(), self.u_min + t * self.height())
    }

    /// Boundary-inclusive `grid_n x grid_n` lattice followed by
    /// [`RANDOM_SAMPLES`] seeded uniform points.
    pub fn sample_points(&self) -> Vec<(f64, f64)> {
        let n = self.grid_n;
        let mut pts = Vec::with_capacity(n * n + RANDOM_SAMPLES);
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            for j in 0..n {
                let t = j as f64 / (n - 1) as f64;
                pts.push(self.at(s, t));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..RANDOM_SAMPLES {
            let s: f64 = rng.gen();
            let t: f64 = rng.gen();
            pts.push(self.at(s, t));
        }
        pts
    }

    /// `k x k` lattice strictly inside the region (no boundary points).
    pub fn interior_points(&self, k: usize) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(k * k);
        for i in 1..=k {
            let s = i as f64 / (k + 1) as f64;
            for j in 1..=k {
                let t = j as f64 / (k + 1) as f64;
                pts.push(self.at(s, t));
            }
        }
        pts
    }
}

/// Statistics of `|e|` over a region's sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepStats {
    pub max_abs: f64,
    pub argmax: Option<(f64, f64)>,
    pub mean_abs: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

impl SweepStats {
    pub fn total(&self) -> usize {
        self.evaluated + self.skipped
    }
}

/// Evaluate `e` at every sample point of `r`, skipping domain errors.
///
/// Fails with [`Error::RegionUnusable`] when fewer than half the points
/// evaluate.
pub fn sweep(e: &Expr, r: &Region) -> Result<SweepStats> {
    r.validate()?;
    let mut stats = SweepStats {
        max_abs: 0.0,
        argmax: None,
        mean_abs: 0.0,
        evaluated: 0,
        skipped: 0,
    };
    let mut total_abs = 0.0;
    for (x, u) in r.sample_points() {
        match e.eval(x, u) {
            Ok(v) => {
                let a = v.abs();
                stats.evaluated += 1;
                total_abs += a;
                if stats.argmax.is_none() || a > stats.max_abs {
                    stats.max_abs = a;
                    stats.argmax = Some((x, u));
                }
            }
            Err(_) => stats.skipped += 1,
        }
    }
    if 2 * stats.evaluated < stats.total() {
        return Err(Error::RegionUnusable {
            what: e.to_string(),
            evaluable: stats.evaluated,
            total: stats.total(),
        });
    }
    stats.mean_abs = total_abs / stats.evaluated as f64;
    Ok(stats)
}

/// Outcome of [`is_numerically_zero`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroEvidence {
    pub is_zero: bool,
    /// The expression reduced to the literal `0` under [`simplify`].
    pub structural: bool,
    pub max_abs: f64,
    pub argmax: Option<(f64, f64)>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Decide whether `e` vanishes on `r`: simplify first, then sample the
/// simplified form on the grid plus random points and compare `max |e|`
/// against `tol`.
pub fn is_numerically_zero(e: &Expr, r: &Region, tol: f64) -> Result<ZeroEvidence> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let simplified = simplify(e);
    let stats = sweep(&simplified, r)?;
    Ok(ZeroEvidence {
        is_zero: stats.max_abs <= tol,
        structural: simplified.is_zero(),
        max_abs: stats.max_abs,
        argmax: stats.argmax,
        evaluated: stats.evaluated,
        skipped: stats.skipped,
    })
}
