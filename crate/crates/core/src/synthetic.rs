//! Procedurally rendered stand-in for the COIL-20 object image set.
//!
//! Twenty synthetic objects are photographed on a virtual turntable at 72
//! poses (5 degree steps). Each object is a star-shaped silhouette defined
//! by a few radial harmonics and carries a striped surface texture; turning
//! the table rotates the silhouette and slides the texture. Images are
//! 32x32 grey levels quantised to 1/255, one feature per pixel.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{assign_feature_names, Dataset};
use crate::matrix::Matrix;

pub const COIL_OBJECTS: usize = 20;
pub const COIL_POSES: usize = 72;
pub const COIL_SIDE: usize = 32;
pub const COIL_NAME: &str = "COIL-20 (synthetic stand-in)";

const HARMONICS: usize = 4;

struct Shape {
    base: f64,
    amp: [f64; HARMONICS],
    phase: [f64; HARMONICS],
    stripe_freq: f64,
    stripe_tilt: f64,
    shade: f64,
    aspect: f64,
}

impl Shape {
    fn for_object(object: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC011_0000 + object as u64);
        let mut amp = [0.0; HARMONICS];
        let mut phase = [0.0; HARMONICS];
        for h in 0..HARMONICS {
            amp[h] = rng.random_range(0.0..0.22) / (h as f64 + 1.0).sqrt();
            phase[h] = rng.random_range(0.0..2.0 * PI);
        }
        Self {
            base: rng.random_range(0.45..0.8),
            amp,
            phase,
            stripe_freq: rng.random_range(2.0..9.0),
            stripe_tilt: rng.random_range(0.0..PI),
            shade: rng.random_range(0.35..0.85),
            aspect: rng.random_range(0.7..1.3),
        }
    }

    fn radius(&self, theta: f64) -> f64 {
        let wobble: f64 = (0..HARMONICS)
            .map(|h| self.amp[h] * ((h as f64 + 2.0) * theta + self.phase[h]).cos())
            .sum();
        (self.base * (1.0 + wobble)).max(0.05)
    }

    fn render(&self, pose: usize) -> Vec<f64> {
        let turn = 2.0 * PI * pose as f64 / COIL_POSES as f64;
        // the turntable foreshortens the object horizontally as it turns
        let squash = 0.75 + 0.25 * (2.0 * turn).cos().abs();
        let mut px = Vec::with_capacity(COIL_SIDE * COIL_SIDE);
        for r in 0..COIL_SIDE {
            for c in 0..COIL_SIDE {
                let y = (r as f64 + 0.5) / COIL_SIDE as f64 * 2.0 - 1.0;
                let x = ((c as f64 + 0.5) / COIL_SIDE as f64 * 2.0 - 1.0) / (squash * self.aspect);
                let (s, co) = turn.sin_cos();
                let (xr, yr) = (co * x + s * y, -s * x + co * y);
                let rho = (xr * xr + yr * yr).sqrt();
                let edge = self.radius(yr.atan2(xr));
                // soft edge one pixel wide
                let inside = ((edge - rho) * COIL_SIDE as f64 / 2.0 + 0.5).clamp(0.0, 1.0);
                let along = xr * self.stripe_tilt.cos() + yr * self.stripe_tilt.sin();
                let stripe = 0.5 + 0.5 * (self.stripe_freq * PI * along + turn).sin();
                let grey = inside * (self.shade + 0.15 * stripe) * (1.0 - 0.3 * rho.min(1.0));
                px.push((grey.clamp(0.0, 1.0) * 255.0).round() / 255.0);
            }
        }
        px
    }
}

/// The full image set: `COIL_OBJECTS * COIL_POSES` rows of
/// `COIL_SIDE * COIL_SIDE` pixels, labelled `obj1` .. `obj20`.
pub fn coil_like() -> Dataset {
    let mut data = Vec::with_capacity(COIL_OBJECTS * COIL_POSES * COIL_SIDE * COIL_SIDE);
    let mut labels = Vec::with_capacity(COIL_OBJECTS * COIL_POSES);
    for object in 0..COIL_OBJECTS {
        let shape = Shape::for_object(object);
        for pose in 0..COIL_POSES {
            data.extend(shape.render(pose));
            labels.push(format!("obj{}", object + 1));
        }
    }
    let rows = Matrix::from_flat(labels.len(), COIL_SIDE * COIL_SIDE, data);
    Dataset::new(
        COIL_NAME,
        assign_feature_names(COIL_SIDE * COIL_SIDE),
        rows,
        labels,
    )
    .expect("generated data is well formed")
}
