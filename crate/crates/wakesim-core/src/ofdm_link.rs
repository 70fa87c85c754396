//! Transmit half of the link: OFDM framing of the PDWCH spectrum, a
//! tapped-delay-line fading channel, and CFO/noise impairments.
//!
//! Sample-rate convention: the receiver operates on the extracted 1.92 MHz
//! subband (N = 128 at 15 kHz spacing), not the full carrier. The EPA power
//! delay profile collapses to two sample taps at this rate.

use crate::zc_signal::PdwchGroupConfig;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OfdmParams {
    /// FFT size.
    pub n: usize,
    /// Cyclic-prefix length in samples.
    pub n_cp: usize,
    /// Symbol body length (= n).
    pub n_b: usize,
    /// Extra CP samples on the first symbol of a frame (long-CP numerology).
    pub first_cp_extra: usize,
    pub subcarrier_spacing: f64,
    pub sample_rate: f64,
}

impl Default for OfdmParams {
    fn default() -> Self {
        OfdmParams {
            n: 128,
            n_cp: 9,
            n_b: 128,
            first_cp_extra: 0,
            subcarrier_spacing: 15e3,
            sample_rate: 1.92e6,
        }
    }
}

impl OfdmParams {
    pub fn sym_len(&self) -> usize {
        self.n_cp + self.n_b
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if self.n_b != self.n || self.n_cp >= self.n_b {
            return Err(LinkError::BadParams);
        }
        if (self.sample_rate - self.n as f64 * self.subcarrier_spacing).abs() > 1e-6 {
            return Err(LinkError::BadParams);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImpairmentSpec {
    /// Integer CFO in subcarrier units.
    pub eps_i: i32,
    /// Fractional CFO in [-0.5, 0.5).
    pub eps_f: f64,
    /// Sample timing offset (noise samples prepended to the frame).
    pub delta: usize,
    /// Per-PDWCH-subcarrier SNR in dB. `f64::INFINITY` disables noise.
    pub snr_db: f64,
    /// Which of the x symbols carries the PDWCH group signal (1-based).
    pub pdwch_symbol_index: usize,
}

impl ImpairmentSpec {
    pub fn eps_total(&self) -> f64 {
        self.eps_i as f64 + self.eps_f
    }

    /// Noise variance per complex time sample for the per-bin SNR convention:
    /// unit signal power per used bin means sigma_t^2 = 10^(-snr/10) / N.
    pub fn noise_var(&self, params: &OfdmParams) -> f64 {
        if self.snr_db.is_infinite() {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0) / params.n as f64
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error("PDWCH block plus guards exceeds the FFT grid")]
    GuardOverflow,
    #[error("inconsistent OFDM parameters")]
    BadParams,
}

/// 3GPP EPA tap table.
pub const EPA_DELAYS_NS: [f64; 7] = [0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0];
pub const EPA_POWERS_DB: [f64; 7] = [0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FadingChannel {
    /// Tap delays in seconds.
    pub tap_delays: Vec<f64>,
    /// Average tap powers in dB (normalized to unit total average gain).
    pub tap_powers: Vec<f64>,
    /// Doppler in Hz; 0 = block fading per detection window (the only mode
    /// implemented; a window spans well under a millisecond).
    pub doppler: f64,
    pub seed: u64,
    /// Scale each realization to exactly unit gain instead of unit average
    /// gain. The detection studies use this so snr_db is exact per trial.
    pub normalize_realization: bool,
}

impl FadingChannel {
    pub fn epa(seed: u64) -> Self {
        FadingChannel {
            tap_delays: EPA_DELAYS_NS.iter().map(|d| d * 1e-9).collect(),
            tap_powers: EPA_POWERS_DB.to_vec(),
            doppler: 0.0,
            seed,
            normalize_realization: false,
        }
    }

    pub fn flat(seed: u64) -> Self {
        FadingChannel {
            tap_delays: vec![0.0],
            tap_powers: vec![0.0],
            doppler: 0.0,
            seed,
            normalize_realization: false,
        }
    }

    /// Tap powers collapsed onto integer sample offsets at the configured
    /// rate, as (offset, linear power) with total power 1.
    pub fn collapsed_taps(&self, params: &OfdmParams) -> Vec<(usize, f64)> {
        let total: f64 = self.tap_powers.iter().map(|db| 10f64.powf(db / 10.0)).sum();
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (delay, db) in self.tap_delays.iter().zip(&self.tap_powers) {
            let off = (delay * params.sample_rate).round() as usize;
            let p = 10f64.powf(db / 10.0) / total;
            match out.iter_mut().find(|(o, _)| *o == off) {
                Some((_, acc)) => *acc += p,
                None => out.push((off, p)),
            }
        }
        out.sort_by_key(|(o, _)| *o);
        out
    }

    /// One block-fading realization: complex Gaussian per collapsed tap.
    pub fn draw(&self, params: &OfdmParams, rng: &mut impl Rng) -> Vec<(usize, Complex64)> {
        let mut taps: Vec<(usize, Complex64)> = self
            .collapsed_taps(params)
            .into_iter()
            .map(|(off, p)| {
                let s = (p / 2.0).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                (off, Complex64::new(re * s, im * s))
            })
            .collect();
        if self.normalize_realization {
            let g = taps.iter().map(|(_, h)| h.norm_sqr()).sum::<f64>().sqrt();
            if g > 0.0 {
                for (_, h) in &mut taps {
                    *h /= g;
                }
            }
        }
        taps
    }
}

/// Modulated frame plus the guard layout that actually fit.
#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub stream: Vec<Complex64>,
    pub guards_low: usize,
    pub guards_high: usize,
}

/// Emit x CP-prefixed OFDM symbols; symbol `imp.pdwch_symbol_index` carries
/// `y` on the PDWCH bins, the others call `filler` to write their spectrum
/// (guard-band QPSK in the standard chain). `imp.delta` zero samples are
/// prepended; noise over them comes from `apply_impairments`.
pub fn modulate_frame(
    y: &[Complex64],
    params: &OfdmParams,
    imp: &ImpairmentSpec,
    group: &PdwchGroupConfig,
    x: usize,
    filler: &mut dyn FnMut(usize, &mut [Complex64]),
) -> Result<FrameOutput, LinkError> {
    params.validate()?;
    let (lo, hi) = group.effective_guards(params.n);
    if group.freq_offset + group.k > params.n {
        return Err(LinkError::GuardOverflow);
    }
    assert_eq!(y.len(), group.k);
    assert!((1..=x).contains(&imp.pdwch_symbol_index));

    let fft = FftPlanner::new().plan_fft_inverse(params.n);
    let mut out = FrameOutput {
        stream: vec![Complex64::default(); imp.delta],
        guards_low: lo,
        guards_high: hi,
    };
    let mut bins = vec![Complex64::default(); params.n];
    for q in 1..=x {
        bins.iter_mut().for_each(|b| *b = Complex64::default());
        if q == imp.pdwch_symbol_index {
            bins[group.freq_offset..group.freq_offset + group.k].copy_from_slice(y);
        } else {
            filler(q, &mut bins);
            bins[0] = Complex64::default(); // DC stays muted
        }
        push_symbol(&mut out.stream, &bins, params, q == 1, &fft);
    }
    Ok(out)
}

fn push_symbol(
    stream: &mut Vec<Complex64>,
    bins: &[Complex64],
    params: &OfdmParams,
    first: bool,
    fft: &Arc<dyn Fft<f64>>,
) {
    let n = params.n;
    let mut body = bins.to_vec();
    fft.process(&mut body);
    let inv_n = 1.0 / n as f64;
    for v in &mut body {
        *v *= inv_n;
    }
    let cp = params.n_cp + if first { params.first_cp_extra } else { 0 };
    stream.extend_from_slice(&body[n - cp..]);
    stream.extend_from_slice(&body);
}

/// Filler generator used by the standard chain: unit-power QPSK on the
/// high-side guard bins (the only side that fits at K=117, N=128).
pub fn qpsk_guard_filler<'r, R: Rng>(
    group: PdwchGroupConfig,
    rng: &'r mut R,
) -> impl FnMut(usize, &mut [Complex64]) + 'r {
    move |_q, bins: &mut [Complex64]| {
        let n = bins.len();
        let (_, hi) = group.effective_guards(n);
        for bin in bins.iter_mut().skip(group.freq_offset + group.k).take(hi) {
            let m: u32 = rng.gen_range(0..4);
            *bin = Complex64::from_polar(1.0, m as f64 * PI / 2.0 + PI / 4.0);
        }
    }
}

/// Convolve with one realization drawn from the channel's own seed.
pub fn apply_channel(
    stream: &[Complex64],
    ch: &FadingChannel,
    params: &OfdmParams,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(ch.seed);
    let taps = ch.draw(params, &mut rng);
    convolve_taps(stream, &taps)
}

/// Linear convolution with sparse taps, truncated to the input length.
pub fn convolve_taps(stream: &[Complex64], taps: &[(usize, Complex64)]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); stream.len()];
    for &(off, h) in taps {
        for (i, s) in stream[..stream.len().saturating_sub(off)].iter().enumerate() {
            out[i + off] += s * h;
        }
    }
    out
}

/// CFO phase ramp over the stream plus circularly-symmetric white noise at
/// the per-bin-SNR-implied variance.
pub fn apply_impairments(
    stream: &[Complex64],
    imp: &ImpairmentSpec,
    params: &OfdmParams,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    let eps = imp.eps_total();
    let var = imp.noise_var(params);
    let s = (var / 2.0).sqrt();
    let step = Complex64::from_polar(1.0, 2.0 * PI * eps / params.n as f64);
    let mut ph = Complex64::new(1.0, 0.0);
    stream
        .iter()
        .map(|v| {
            let mut out = v * ph;
            ph *= step;
            if var > 0.0 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                out += Complex64::new(re * s, im * s);
            }
            out
        })
        .collect()
}

