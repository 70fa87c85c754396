//! Zadoff-Chu root sequence and the PDWCH group spectrum.
//!
//! One root sequence of odd length K carries up to M device wake indicators
//! plus an always-on anchor: device m transmits the root cyclically shifted
//! by m*K_cs samples, and shifts stay separable because the ZC periodic
//! autocorrelation is an impulse. Everything downstream (matched filter,
//! window energies) works on the K-bin spectrum, so the shift is applied as
//! a per-bin phase ramp.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct ZcSequence {
    pub root: u32,
    pub length: usize,
    pub time_samples: Vec<Complex64>,
    /// Unnormalized DFT of `time_samples`; |spectrum[k]| = sqrt(K).
    pub spectrum: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PdwchGroupConfig {
    /// Sequence length (number of PDWCH subcarriers).
    pub k: usize,
    /// Cyclic-shift stride between devices.
    pub k_cs: usize,
    /// Number of devices sharing the root.
    pub m: usize,
    pub root: u32,
    /// Subcarrier index of the first PDWCH bin relative to DC.
    pub freq_offset: usize,
    /// Guard subcarriers requested on each side of the block.
    pub n_g: usize,
}

impl Default for PdwchGroupConfig {
    fn default() -> Self {
        PdwchGroupConfig {
            k: 117,
            k_cs: 13,
            m: 7,
            root: 31,
            freq_offset: 1,
            n_g: 10,
        }
    }
}

impl PdwchGroupConfig {
    /// Shift windows that fit: anchor + devices.
    pub fn windows(&self) -> usize {
        self.k / self.k_cs
    }

    /// Guard bins that actually fit next to the block in an N-bin grid
    /// (low side, high side). DC is always muted and not counted.
    pub fn effective_guards(&self, n: usize) -> (usize, usize) {
        let low = self.n_g.min(self.freq_offset.saturating_sub(1));
        let high = self.n_g.min(n.saturating_sub(self.freq_offset + self.k));
        (low, high)
    }
}

/// Wake indicator bits, one per device (index 0 = device 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WakeIndicators {
    pub bits: u8,
    pub m: usize,
}

impl WakeIndicators {
    pub fn none(m: usize) -> Self {
        WakeIndicators { bits: 0, m }
    }

    pub fn from_bits(bits: u8, m: usize) -> Self {
        assert!(m <= 8);
        WakeIndicators { bits: bits & ((1u16 << m) - 1) as u8, m }
    }

    pub fn get(&self, device: usize) -> bool {
        debug_assert!((1..=self.m).contains(&device));
        self.bits >> (device - 1) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

/// z[n] = exp(-j pi r n (n+1) / K) for odd K, plus its DFT.
pub fn gen_root_zc(root: u32, k: usize) -> ZcSequence {
    assert!(k % 2 == 1, "odd-length root expected");
    let time_samples: Vec<Complex64> = (0..k)
        .map(|n| {
            let ph = -PI * root as f64 * (n as f64) * (n as f64 + 1.0) / k as f64;
            Complex64::from_polar(1.0, ph)
        })
        .collect();
    let mut spectrum = time_samples.clone();
    FftPlanner::new().plan_fft_forward(k).process(&mut spectrum);
    ZcSequence { root, length: k, time_samples, spectrum }
}

/// Spectrum of the root delayed by `tau` samples: Z[k] exp(-j2 pi k tau / K).
///
/// This is the plain DFT delay theorem. The printed shift convention with a
/// k-independent phase exp(-j2 pi r tau / K) does not separate shifts into
/// distinct correlation windows (it is a constant rotation), so the delay
/// form is the default; `printed_shift_phase` exposes the other reading.
pub fn shift_spectrum(seq: &ZcSequence, tau: usize) -> Vec<Complex64> {
    let k = seq.length as f64;
    seq.spectrum
        .iter()
        .enumerate()
        .map(|(bin, z)| z * Complex64::from_polar(1.0, -2.0 * PI * bin as f64 * tau as f64 / k))
        .collect()
}

/// The k-independent phase factor from the alternative shift convention.
pub fn printed_shift_phase(root: u32, tau: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * root as f64 * tau as f64 / k as f64)
}

/// Superpose the anchor (shift 0) and every flagged device shift.
///
/// Energy is (1 + popcount) * K: each shifted sequence contributes K after
/// the 1/sqrt(K) spectrum scaling, and shifts are orthogonal.
pub fn build_pdwch_spectrum(cfg: &PdwchGroupConfig, wi: &WakeIndicators) -> Vec<Complex64> {
    let seq = gen_root_zc(cfg.root, cfg.k);
    build_pdwch_spectrum_with(cfg, wi, &seq)
}

/// Same as [`build_pdwch_spectrum`] reusing a precomputed root sequence.
pub fn build_pdwch_spectrum_with(
    cfg: &PdwchGroupConfig,
    wi: &WakeIndicators,
    seq: &ZcSequence,
) -> Vec<Complex64> {
    assert_eq!(seq.length, cfg.k);
    assert!(wi.m <= cfg.m);
    let scale = 1.0 / (cfg.k as f64).sqrt();
    let mut y = vec![Complex64::default(); cfg.k];
    let mut add = |tau: usize| {
        let k = cfg.k as f64;
        for (bin, acc) in y.iter_mut().enumerate() {
            let ph = Complex64::from_polar(scale, -2.0 * PI * bin as f64 * tau as f64 / k);
            *acc += seq.spectrum[bin] * ph;
        }
    };
    add(0); // anchor
    for dev in 1..=wi.m {
        if wi.get(dev) {
            add(dev * cfg.k_cs);
        }
    }
    y
}
