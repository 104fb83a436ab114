//! BPSK over AWGN, LLR formation and blind SNR estimation.
//!
//! Sign convention used throughout the crate:
//!
//! | bit | symbol | LLR sign | `o = σ(u)` |
//! |-----|--------|----------|------------|
//! | 0   | −1     | negative | → 0        |
//! | 1   | +1     | positive | → 1        |
//!
//! so `llr_v = log P(c_v = 1 | y) / P(c_v = 0 | y)`.

use rand::Rng;
use rand_distr::StandardNormal;

/// Number of SNR classes (1 dB .. 8 dB) used by the embedding table.
pub const DEFAULT_MAX_SNR: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct LlrFrame {
    pub llr: Vec<f64>,
    pub truth_bits: Option<Vec<u8>>,
    pub true_snr_db: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrEstimate {
    /// Unclamped estimate in dB; `-inf` when both partitions are degenerate.
    pub raw: f64,
    /// `clamp(round(raw), 1, I)`.
    pub clamped_index: usize,
    /// Set when either sign partition had fewer than two samples.
    pub low_confidence: bool,
}

/// Noise standard deviation for a given Eb/N0 (dB) and code rate.
pub fn noise_sigma(snr_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0)).sqrt()
}

#[inline]
pub fn bpsk(bit: u8) -> f64 {
    if bit == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Transmits `bits` with an explicit standard-normal noise realisation.
pub fn transmit_with_noise(bits: &[u8], snr_db: f64, rate: f64, noise: &[f64]) -> LlrFrame {
    assert_eq!(bits.len(), noise.len());
    let sigma = noise_sigma(snr_db, rate);
    let scale = 2.0 / (sigma * sigma);
    let llr = bits
        .iter()
        .zip(noise)
        .map(|(&b, &w)| scale * (bpsk(b) + sigma * w))
        .collect();
    LlrFrame {
        llr,
        truth_bits: Some(bits.to_vec()),
        true_snr_db: Some(snr_db),
    }
}

pub fn transmit<R: Rng + ?Sized>(bits: &[u8], snr_db: f64, rate: f64, rng: &mut R) -> LlrFrame {
    let noise: Vec<f64> = (0..bits.len()).map(|_| rng.sample(StandardNormal)).collect();
    transmit_with_noise(bits, snr_db, rate, &noise)
}

fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    Some(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Estimates the SNR of a received LLR frame from the spread of each
/// hard-decision half.
pub fn estimate_snr(llr: &[f64], rate: f64, max_snr: usize) -> SnrEstimate {
    assert!(max_snr >= 1);
    let (pos, neg): (Vec<f64>, Vec<f64>) = llr.iter().partition(|&&y| y > 0.0);
    let vp = sample_variance(&pos);
    let vn = sample_variance(&neg);
    let low_confidence = vp.is_none() || vn.is_none();
    let var = 0.5 * (vp.unwrap_or(0.0) + vn.unwrap_or(0.0));
    let raw = 10.0 * (var / (8.0 * rate)).log10();
    SnrEstimate {
        raw,
        clamped_index: clamp_snr_index(raw, max_snr),
        low_confidence,
    }
}

pub fn clamp_snr_index(raw: f64, max_snr: usize) -> usize {
    if raw.is_nan() {
        return 1;
    }
    raw.round().clamp(1.0, max_snr as f64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_at_rate_half_four_db() {
        assert_abs_diff_eq!(noise_sigma(4.0, 0.5), 10f64.powf(-0.2), epsilon = 1e-12);
        assert_abs_diff_eq!(noise_sigma(4.0, 0.5), 0.63096, epsilon = 1e-5);
    }

    #[test]
    fn noiseless_llrs_follow_the_convention() {
        let sigma = noise_sigma(3.0, 0.5);
        let f = transmit_with_noise(&[0, 1, 1, 0], 3.0, 0.5, &[0.0; 4]);
        for (&l, &b) in f.llr.iter().zip(&[0u8, 1, 1, 0]) {
            assert_abs_diff_eq!(l, 2.0 * bpsk(b) / (sigma * sigma), epsilon = 1e-12);
            assert_eq!(u8::from(l > 0.0), b);
        }
        let zero = transmit_with_noise(&[0; 5], 3.0, 0.5, &[0.0; 5]);
        assert!(zero.llr.iter().all(|&l| (l + 2.0 / (sigma * sigma)).abs() < 1e-12));
    }

    #[test]
    fn degenerate_and_clamped_estimates() {
        let est = estimate_snr(&[1.0, 1.0, -1.0, -1.0], 0.5, 8);
        assert_eq!(est.raw, f64::NEG_INFINITY);
        assert_eq!(est.clamped_index, 1);
        assert!(!est.low_confidence);

        let one_sided = estimate_snr(&[1.0, 2.0, 3.0], 0.5, 8);
        assert!(one_sided.low_confidence);
        assert!(one_sided.raw.is_finite());

        assert_eq!(clamp_snr_index(12.3, 8), 8);
        assert_eq!(clamp_snr_index(-3.0, 8), 1);
        assert_eq!(clamp_snr_index(4.49, 8), 4);
        assert_eq!(clamp_snr_index(f64::NAN, 8), 1);
    }

    #[test]
    fn estimator_is_consistent_at_five_db() {
        // At rate 1/2 the sign partition truncates each half enough to bias the
        // estimate by about -0.55 dB; the high-rate code stays inside 0.5 dB.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, rate) = (63, 51.0 / 63.0);
        let mut counts = [0usize; 9];
        let mut mean = 0.0;
        let frames = 10_000;
        for _ in 0..frames {
            let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let f = transmit(&bits, 5.0, rate, &mut rng);
            let est = estimate_snr(&f.llr, rate, 8);
            mean += est.raw / frames as f64;
            counts[est.clamped_index] += 1;
        }
        assert!((mean - 5.0).abs() < 0.5, "mean estimate {mean}");
        let mode = (1..=8).max_by_key(|&i| counts[i]).unwrap();
        assert_eq!(mode, 5, "{counts:?}");
    }
}
