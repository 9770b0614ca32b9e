// SPDX-License-Identifier: Apache-2.0

//! Log-distance signal strength model in raw radio units.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::model::SignalStrength;

use super::SimError;

/// `strength(d) = clamp(round(a - b * log10(max(d, d_min)) + noise), 0, 255)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    a: f64,
    b: f64,
    d_min_ft: f64,
    noise_sigma: f64,
    drop_prob: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        RadioModel {
            a: 200.0,
            b: 80.0,
            d_min_ft: 1.0,
            noise_sigma: 0.0,
            drop_prob: 0.0,
        }
    }
}

impl RadioModel {
    pub fn new(a: f64, b: f64, d_min_ft: f64, noise_sigma: f64, drop_prob: f64) -> Result<Self, SimError> {
        let bad = |m: &str| Err(SimError::Invalid(m.to_string()));
        if !a.is_finite() {
            return bad("radio reference strength must be finite");
        }
        if !(b.is_finite() && b >= 0.0) {
            return bad("radio decay must be finite and non-negative");
        }
        if !(d_min_ft.is_finite() && d_min_ft > 0.0) {
            return bad("radio near-field clamp must be positive");
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return bad("noise sigma must be non-negative");
        }
        if !(0.0..=1.0).contains(&drop_prob) {
            return bad("drop probability must lie in [0, 1]");
        }
        Ok(RadioModel {
            a,
            b,
            d_min_ft,
            noise_sigma,
            drop_prob,
        })
    }

    pub fn with_noise(self, noise_sigma: f64, drop_prob: f64) -> Result<Self, SimError> {
        RadioModel::new(self.a, self.b, self.d_min_ft, noise_sigma, drop_prob)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn d_min_ft(&self) -> f64 {
        self.d_min_ft
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn drop_prob(&self) -> f64 {
        self.drop_prob
    }

    /// Noise-free strength before rounding and clamping.
    pub fn mean_strength(&self, d_ft: f64) -> f64 {
        self.a - self.b * d_ft.max(self.d_min_ft).log10()
    }

    /// Draws one reading at distance `d_ft`. The generator is only consumed
    /// when the noise sigma is positive.
    pub fn strength_at<R: Rng + ?Sized>(&self, d_ft: f64, rng: &mut R) -> SignalStrength {
        let mut v = self.mean_strength(d_ft);
        if self.noise_sigma > 0.0 {
            let normal = Normal::new(0.0, self.noise_sigma).expect("sigma validated");
            v += normal.sample(rng);
        }
        SignalStrength(v.round().clamp(0.0, 255.0) as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_distance_gives_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = RadioModel::default();
        assert_eq!(r.strength_at(1.0, &mut rng), SignalStrength(200));
        // Inside the near-field clamp too.
        assert_eq!(r.strength_at(0.0, &mut rng), SignalStrength(200));
    }

    #[test]
    fn ten_feet_loses_one_decade() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            RadioModel::default().strength_at(10.0, &mut rng),
            SignalStrength(120)
        );
    }

    #[test]
    fn clamps_to_raw_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let hot = RadioModel::new(400.0, 80.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(hot.strength_at(1.0, &mut rng), SignalStrength(255));
        assert_eq!(
            RadioModel::default().strength_at(1e6, &mut rng),
            SignalStrength(0)
        );
    }

    #[test]
    fn noise_free_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = RadioModel::default();
        let mut prev = 255;
        for i in 0..2000 {
            let s = r.strength_at(i as f64 * 0.05, &mut rng).value();
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn noisy_readings_are_seeded() {
        let r = RadioModel::default().with_noise(5.0, 0.0).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| r.strength_at(5.0, &mut rng).value())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadioModel::new(200.0, -1.0, 1.0, 0.0, 0.0).is_err());
        assert!(RadioModel::new(200.0, 80.0, 0.0, 0.0, 0.0).is_err());
        assert!(RadioModel::new(200.0, 80.0, 1.0, -1.0, 0.0).is_err());
        assert!(RadioModel::new(200.0, 80.0, 1.0, 0.0, 1.5).is_err());
        assert!(RadioModel::new(f64::NAN, 80.0, 1.0, 0.0, 0.0).is_err());
    }
}
