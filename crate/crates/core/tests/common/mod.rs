#![allow(dead_code)]

use af_secrecy::ChannelInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gains(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.2..2.0)).collect()
}

/// Degraded instance with `h_e = u∘h_t`, `u ~ U[0.05, 0.95)`.
pub fn degraded(rng: &mut ChaCha8Rng, m: usize) -> ChannelInstance {
    let h_s = gains(rng, m);
    let h_t = gains(rng, m);
    let h_e = h_t.iter().map(|h| h * rng.random_range(0.05..0.95)).collect();
    let p_s = rng.random_range(0.5..20.0);
    let p_r = (0..m).map(|_| rng.random_range(0.5..10.0)).collect();
    ChannelInstance::new(h_s, h_t, h_e, p_s, p_r, 1.0).unwrap()
}

/// Scaled instance `h_e = α h_t`, returned with `α`.
pub fn scaled(rng: &mut ChaCha8Rng, m: usize) -> (ChannelInstance, f64) {
    let alpha = rng.random_range(0.05..0.95);
    let h_s = gains(rng, m);
    let h_t = gains(rng, m);
    let h_e = h_t.iter().map(|h| alpha * h).collect();
    let p_s = rng.random_range(0.5..20.0);
    let p_r = (0..m).map(|_| rng.random_range(0.5..10.0)).collect();
    (ChannelInstance::new(h_s, h_t, h_e, p_s, p_r, 1.0).unwrap(), alpha)
}

/// Uniform point of the individual power box.
pub fn box_point(rng: &mut ChaCha8Rng, beta_max: &[f64]) -> Vec<f64> {
    beta_max.iter().map(|b| rng.random_range(-b..=*b)).collect()
}
