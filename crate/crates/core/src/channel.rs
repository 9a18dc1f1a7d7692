//! AWGN channel.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

/// Channel output `y = codeword + ξ`, `ξ ~ N(0, 1/snr)` i.i.d.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelOutput {
    pub y: Vec<f64>,
    pub noise_seed: u64,
    pub snr: f64,
}

/// Adds white Gaussian noise of variance `1/snr`, drawn from the stream `(seed, "noise", 0)`.
pub fn transmit(codeword: &[f64], snr: f64, seed: u64) -> Result<ChannelOutput> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::Parameter(format!("snr must be positive, got {snr}")));
    }
    let sigma = snr.recip().sqrt();
    let mut rng = rng::stream(seed, "noise", 0);
    let y = codeword
        .iter()
        .map(|&c| {
            let g: f64 = rng.sample(StandardNormal);
            c + sigma * g
        })
        .collect();
    Ok(ChannelOutput { y, noise_seed: seed, snr })
}

/// Capacity `log2(1 + snr)/2` in bits per channel use.
pub fn capacity(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::Parameter(format!("snr must be non-negative, got {snr}")));
    }
    Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
}

/// Noise power in dB above the Shannon limit: how much `snr` exceeds the
/// minimum snr at which rate `r` is achievable.
pub fn gap_to_capacity_db(snr: f64, r: f64) -> f64 {
    let snr_min = (2.0 * r * std::f64::consts::LN_2).exp_m1();
    10.0 * (snr / snr_min).log10()
}
