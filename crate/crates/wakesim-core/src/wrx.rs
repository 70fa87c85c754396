//! Two-stage wake-up receiver.
//!
//! Stage 1 is the classic CP-redundancy ML estimator: correlate the stream
//! with itself at lag N, average over the CP span, read the fractional CFO
//! off the peak's phase. Timing candidates are gated to the first K_cs
//! lags of each symbol slot because the w-cycle grid is tracked across
//! cycles by the always-on anchor; the gate only has to absorb residual
//! drift, not find the frame cold.
//!
//! Stage 2 derotates, carves each candidate symbol on the fixed grid (two
//! samples of CP backoff), FFTs, multiplies by the conjugate root spectrum
//! under each integer-CFO hypothesis, and IFFTs into an L-times oversampled
//! power delay profile. Cell choice (symbol, integer CFO) goes to the
//! strongest anchor peak within the tracked-lag span; a wrong-CFO cell
//! relays a full-strength ZC alias into window 0, but the alias lands at
//! least two lags off the tracked position, so the narrow span is immune.
//! The fractional CFO is then refined twice from the phase drift between
//! split-symbol correlations against a lag-matched reference, and the grid
//! is recomputed once with the refined derotation.
//!
//! Wake indicators come from a CFAR test: window energies against a noise
//! floor estimated by censored averaging of the selected PDP.

use crate::ofdm_link::OfdmParams;
use crate::zc_signal::{PdwchGroupConfig, ZcSequence};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DetectorConfig {
    /// Symbols in the WI observation window.
    pub x: usize,
    /// Integer-CFO hypotheses (odd; span +-(a-1)/2 bins).
    pub a: usize,
    /// PDP oversampling factor.
    pub l: usize,
    pub p_fa_target: f64,
    /// Relative WI threshold; solves the L*K_cs-term CFAR equation.
    pub gamma_r: f64,
    /// Relative noise-floor censoring threshold, -ln(P_fa_target).
    pub upsilon_r: f64,
    /// Anchor-peak search span in PDP lags (times L), for cell selection
    /// and refinement. Nearest cross-window CFO alias sits ~1.83 lags off.
    pub sync_lags: usize,
    /// Stage-1 timing candidates per symbol slot.
    pub gate: usize,
    /// Samples of CP kept in front of the nominal body start when carving.
    pub backoff: usize,
}

impl DetectorConfig {
    pub fn new(x: usize, a: usize, l: usize, p_fa_target: f64, k_cs: usize) -> Self {
        assert!(a % 2 == 1 && l >= 1);
        DetectorConfig {
            x,
            a,
            l,
            p_fa_target,
            gamma_r: solve_gamma_r(p_fa_target, l, k_cs),
            upsilon_r: -p_fa_target.ln(),
            sync_lags: 4,
            gate: k_cs,
            backoff: 2,
        }
    }

    pub fn standard(p_fa_target: f64, l: usize) -> Self {
        Self::new(3, 5, l, p_fa_target, 13)
    }

    pub fn eps_span(&self) -> i32 {
        (self.a as i32 - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Estimated PDWCH symbol index, 1-based.
    pub s_hat: usize,
    pub eps_i_hat: i32,
    pub eps_f_hat: f64,
    /// Stage-1 timing peak (lag into the stream).
    pub delta_hat: usize,
    pub beta_hat: f64,
    /// Decoded wake indicators, device 1..=M.
    pub wi_hat: Vec<bool>,
    /// Window energies at the selected cell, m = 0 (anchor) ..= M.
    pub energies: Vec<f64>,
}

/// Experiment knobs that bypass individual receiver stages.
#[derive(Debug, Clone, Copy, Default)]
pub struct DetectOptions {
    /// Use this noise floor instead of estimating it.
    pub known_beta: Option<f64>,
    /// Pin the (symbol 1-based, integer CFO) cell: no search, no refinement.
    pub fixed_cell: Option<(usize, i32)>,
    /// Use this fractional CFO instead of the stage-1 estimate (no refinement).
    pub genie_eps_f: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum WrxError {
    #[error("stage-1 window must be exactly N_cp + 2*N_b samples, got {0}")]
    WindowLength(usize),
    #[error("stream too short for {x} symbols: {len} samples")]
    StreamLength { len: usize, x: usize },
    #[error("threshold root-finding failed to bracket ({0}, {1})")]
    NoBracket(f64, f64),
}

/// CP-redundancy ML sync over one observation interval of exactly
/// N_cp + 2 N_b samples: all lags are candidates.
pub fn stage1_sync(window: &[Complex64], params: &OfdmParams) -> Result<(usize, f64), WrxError> {
    let (n, ncp) = (params.n_b, params.n_cp);
    if window.len() != ncp + 2 * n {
        return Err(WrxError::WindowLength(window.len()));
    }
    let mut best = (0usize, Complex64::default(), 0.0f64);
    for d in 0..=n {
        let mut acc = Complex64::default();
        for i in d..d + ncp {
            acc += window[i] * window[i + n].conj();
        }
        let mag = acc.norm_sqr();
        if mag > best.2 {
            best = (d, acc, mag);
        }
    }
    Ok((best.0, -best.1.arg() / (2.0 * PI)))
}

/// Multiply sample n by exp(-j 2 pi eps_f_hat n / N).
pub fn derotate(stream: &[Complex64], eps_f_hat: f64, params: &OfdmParams) -> Vec<Complex64> {
    let step = Complex64::from_polar(1.0, -2.0 * PI * eps_f_hat / params.n as f64);
    let mut ph = Complex64::new(1.0, 0.0);
    stream
        .iter()
        .map(|v| {
            let out = v * ph;
            ph *= step;
            out
        })
        .collect()
}

/// N-point FFT of one CP-stripped symbol body, then the K PDWCH bins.
pub fn demap_pdwch(
    symbol: &[Complex64],
    params: &OfdmParams,
    group: &PdwchGroupConfig,
) -> Vec<Complex64> {
    assert_eq!(symbol.len(), params.n);
    let mut buf = symbol.to_vec();
    FftPlanner::new().plan_fft_forward(params.n).process(&mut buf);
    (0..group.k)
        .map(|i| buf[(group.freq_offset + i) % params.n])
        .collect()
}

/// Matched-filter PDP: |IFFT_{L*K}(R[k + eps] Z*[k])|^2 scaled so a
/// noiseless matched anchor peaks at K^2 and the per-lag noise floor is
/// K sigma_w^2.
pub fn compute_pdp(
    r_bins: &[Complex64],
    z_spectrum: &[Complex64],
    l: usize,
) -> Vec<f64> {
    let k = z_spectrum.len();
    assert_eq!(r_bins.len(), k);
    let lk = l * k;
    let mut buf = vec![Complex64::default(); lk];
    for i in 0..k {
        buf[i] = r_bins[i] * z_spectrum[i].conj();
    }
    FftPlanner::new().plan_fft_inverse(lk).process(&mut buf);
    let inv_k = 1.0 / k as f64;
    buf.iter().map(|v| v.norm_sqr() * inv_k).collect()
}

/// Energy of shift window m: lags m*L*K_cs .. (m+1)*L*K_cs - 1.
pub fn window_energy(psi: &[f64], m: usize, l: usize, k_cs: usize) -> f64 {
    let w = l * k_cs;
    psi[m * w..(m + 1) * w].iter().sum()
}

/// Upper regularized incomplete gamma Q(n, x) for integer shape: the
/// survival function of a sum of n unit-mean exponentials.
fn gamma_q(n: usize, x: f64) -> f64 {
    // finite series: exp(-x) sum_{j<n} x^j / j!
    let mut term = (-x).exp();
    let mut acc = term;
    for j in 1..n {
        term *= x / j as f64;
        acc += term;
    }
    acc.min(1.0)
}

/// Relative CFAR threshold: solve Q(L*K_cs, Gamma_r) = P_fa to 1e-10.
pub fn solve_gamma_r(p_fa: f64, l: usize, k_cs: usize) -> f64 {
    assert!(p_fa > 0.0 && p_fa < 1.0);
    let n = l * k_cs;
    let (mut lo, mut hi) = (0.0f64, n as f64);
    while gamma_q(n, hi) > p_fa {
        hi *= 2.0;
        assert!(hi < 1e9, "threshold bracket diverged");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_q(n, mid) > p_fa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Censored-mean noise floor: threshold at (upsilon_r / len) * sum(psi),
/// average the lags below it; exponential-median fallback if none are.
pub fn estimate_noise_floor(psi: &[f64], upsilon_r: f64) -> f64 {
    assert!(!psi.is_empty());
    let ups = upsilon_r / psi.len() as f64 * psi.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut cnt = 0usize;
    for &v in psi {
        if v < ups {
            acc += v;
            cnt += 1;
        }
    }
    if cnt > 0 {
        acc / cnt as f64
    } else {
        median(psi) / std::f64::consts::LN_2
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Reusable detector: FFT plans, root spectrum, and scratch buffers.
pub struct DetectorEngine {
    pub cfg: DetectorConfig,
    pub group: PdwchGroupConfig,
    pub params: OfdmParams,
    zspec: Vec<Complex64>,
    fft_n: Arc<dyn Fft<f64>>,
    ifft_n: Arc<dyn Fft<f64>>,
    ifft_lk: Arc<dyn Fft<f64>>,
    scratch_n: Vec<Complex64>,
    scratch_lk: Vec<Complex64>,
    // grid state: PDP and window energies per (q, e) cell
    psi: Vec<f64>,
    energies: Vec<f64>,
    ds: Vec<Complex64>,
}

impl DetectorEngine {
    pub fn new(cfg: DetectorConfig, group: PdwchGroupConfig, params: OfdmParams) -> Self {
        let seq = crate::zc_signal::gen_root_zc(group.root, group.k);
        Self::with_root(cfg, group, params, &seq)
    }

    pub fn with_root(
        cfg: DetectorConfig,
        group: PdwchGroupConfig,
        params: OfdmParams,
        seq: &ZcSequence,
    ) -> Self {
        assert_eq!(seq.length, group.k);
        let mut planner = FftPlanner::new();
        let fft_n = planner.plan_fft_forward(params.n);
        let ifft_n = planner.plan_fft_inverse(params.n);
        let lk = cfg.l * group.k;
        let ifft_lk = planner.plan_fft_inverse(lk);
        let cells = cfg.x * cfg.a;
        DetectorEngine {
            cfg,
            group,
            params,
            zspec: seq.spectrum.clone(),
            fft_n,
            ifft_n,
            ifft_lk,
            scratch_n: vec![Complex64::default(); params.n],
            scratch_lk: vec![Complex64::default(); lk],
            psi: vec![0.0; cells * lk],
            energies: vec![0.0; cells * (group.k / group.k_cs)],
            ds: Vec::new(),
        }
    }

    fn lk(&self) -> usize {
        self.cfg.l * self.group.k
    }

    fn nwin(&self) -> usize {
        self.group.k / self.group.k_cs
    }

    fn min_stream_len(&self) -> usize {
        let sym = self.params.sym_len();
        let carve_end = (self.cfg.x - 1) * sym + self.params.n_cp - self.cfg.backoff
            + self.params.n;
        let gate_end = (self.cfg.x - 1) * sym + self.cfg.gate - 1
            + self.params.n_cp + self.params.n;
        carve_end.max(gate_end)
    }

    /// Stage 1 restricted to the tracked-grid gate: candidates
    /// q*sym_len + [0, gate) for each symbol slot q.
    pub fn stage1_gated(&self, stream: &[Complex64]) -> (usize, f64) {
        let (n, ncp, sym) = (self.params.n, self.params.n_cp, self.params.sym_len());
        let mut best = (0usize, Complex64::default(), -1.0f64);
        for q in 0..self.cfg.x {
            for g in 0..self.cfg.gate {
                let d = q * sym + g;
                let mut acc = Complex64::default();
                for i in d..d + ncp {
                    acc += stream[i] * stream[i + n].conj();
                }
                let mag = acc.norm_sqr();
                if mag > best.2 {
                    best = (d, acc, mag);
                }
            }
        }
        (best.0, -best.1.arg() / (2.0 * PI))
    }

    /// PDP and window energies for every (symbol, CFO-hypothesis) cell of
    /// the derotated stream; fills the internal grid.
    fn compute_grid(&mut self) {
        let (n, ncp, sym) = (self.params.n, self.params.n_cp, self.params.sym_len());
        let k = self.group.k;
        let lk = self.lk();
        let nwin = self.nwin();
        let span = self.cfg.eps_span();
        let wlen = self.cfg.l * self.group.k_cs;
        let mut rbuf = vec![Complex64::default(); n];
        for q in 0..self.cfg.x {
            let start = q * sym + ncp - self.cfg.backoff;
            rbuf.copy_from_slice(&self.ds[start..start + n]);
            self.fft_n.process_with_scratch(&mut rbuf, &mut self.scratch_n);
            for (ei, e) in (-span..=span).enumerate() {
                let cell = q * self.cfg.a + ei;
                let buf = &mut self.scratch_lk;
                for i in 0..k {
                    let kk = (self.group.freq_offset as i64 + i as i64 + e as i64)
                        .rem_euclid(n as i64) as usize;
                    buf[i] = rbuf[kk] * self.zspec[i].conj();
                }
                buf[k..].iter_mut().for_each(|v| *v = Complex64::default());
                self.ifft_lk.process(buf);
                let inv_k = 1.0 / k as f64;
                let psi_row = &mut self.psi[cell * lk..(cell + 1) * lk];
                for (dst, v) in psi_row.iter_mut().zip(buf.iter()) {
                    *dst = v.norm_sqr() * inv_k;
                }
                for m in 0..nwin {
                    self.energies[cell * nwin + m] =
                        psi_row[m * wlen..(m + 1) * wlen].iter().sum();
                }
            }
        }
    }

    /// Strongest anchor peak within the tracked-lag span; ties prefer the
    /// earliest symbol, then the smallest |eps|, negative first.
    fn select_cell(&self) -> (usize, i32) {
        let lk = self.lk();
        let span = self.cfg.eps_span();
        let sel = self.cfg.sync_lags * self.cfg.l;
        let mut best = (0usize, 0i32, -1.0f64);
        let mut order: Vec<i32> = vec![0];
        for m in 1..=span {
            order.push(-m);
            order.push(m);
        }
        for q in 0..self.cfg.x {
            for &e in &order {
                let cell = q * self.cfg.a + (e + span) as usize;
                let peak = self.psi[cell * lk..cell * lk + sel]
                    .iter()
                    .fold(0.0f64, |a, &b| a.max(b));
                if peak > best.2 {
                    best = (q, e, peak);
                }
            }
        }
        (best.0, best.1)
    }

    /// Split-symbol phase refinement of the fractional CFO at the selected
    /// cell, against a reference rebuilt at the detected PDP lag.
    fn refine_eps_f(&mut self, stream: &[Complex64], q: usize, e: i32, eps_f: f64) -> f64 {
        let (n, ncp, sym) = (self.params.n, self.params.n_cp, self.params.sym_len());
        let k = self.group.k;
        let lk = self.lk();
        let sel = self.cfg.sync_lags * self.cfg.l;
        let mut ef = eps_f;
        let mut symwin = vec![Complex64::default(); n];
        let mut rbuf = vec![Complex64::default(); n];
        let mut refbuf = vec![Complex64::default(); n];
        for _ in 0..2 {
            let start = q * sym + ncp - self.cfg.backoff;
            symwin.copy_from_slice(&self.ds[start..start + n]);
            rbuf.copy_from_slice(&symwin);
            self.fft_n.process_with_scratch(&mut rbuf, &mut self.scratch_n);
            let buf = &mut self.scratch_lk;
            for i in 0..k {
                let kk = (self.group.freq_offset as i64 + i as i64 + e as i64)
                    .rem_euclid(n as i64) as usize;
                buf[i] = rbuf[kk] * self.zspec[i].conj();
            }
            buf[k..].iter_mut().for_each(|v| *v = Complex64::default());
            self.ifft_lk.process(buf);
            let l0 = buf[..sel]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            // reference: the root delayed by l0 PDP lags, on the hypothesis bins
            refbuf.iter_mut().for_each(|v| *v = Complex64::default());
            for i in 0..k {
                let kk = (self.group.freq_offset as i64 + i as i64 + e as i64)
                    .rem_euclid(n as i64) as usize;
                let ph = Complex64::from_polar(
                    1.0,
                    -2.0 * PI * l0 as f64 * i as f64 / lk as f64,
                );
                refbuf[kk] = self.zspec[i] * ph;
            }
            self.ifft_n.process_with_scratch(&mut refbuf, &mut self.scratch_n);
            let inv_n = 1.0 / n as f64;
            refbuf.iter_mut().for_each(|v| *v *= inv_n);
            let mut c1 = Complex64::default();
            let mut c2 = Complex64::default();
            for i in 0..n / 2 {
                c1 += symwin[i] * refbuf[i].conj();
                c2 += symwin[i + n / 2] * refbuf[i + n / 2].conj();
            }
            let dphi = (c2 * c1.conj()).arg();
            ef = wrap_half(ef + dphi / PI);
            self.ds = derotate(stream, ef, &self.params);
        }
        ef
    }

    pub fn detect(&mut self, stream: &[Complex64]) -> Result<DetectionResult, WrxError> {
        self.detect_with(stream, DetectOptions::default())
    }

    pub fn detect_with(
        &mut self,
        stream: &[Complex64],
        opts: DetectOptions,
    ) -> Result<DetectionResult, WrxError> {
        if stream.len() < self.min_stream_len() {
            return Err(WrxError::StreamLength { len: stream.len(), x: self.cfg.x });
        }
        let (d_hat, ef_stage1) = self.stage1_gated(stream);
        let mut ef = opts.genie_eps_f.unwrap_or(ef_stage1);
        self.ds = derotate(stream, ef, &self.params);
        self.compute_grid();
        let (mut q, mut e) = match opts.fixed_cell {
            Some((s, e)) => (s - 1, e),
            None => self.select_cell(),
        };
        if opts.fixed_cell.is_none() && opts.genie_eps_f.is_none() {
            ef = self.refine_eps_f(stream, q, e, ef);
            self.compute_grid();
            let sel = self.select_cell();
            q = sel.0;
            e = sel.1;
        }
        let lk = self.lk();
        let nwin = self.nwin();
        let span = self.cfg.eps_span();
        let cell = q * self.cfg.a + (e + span) as usize;
        let psi_sel = &self.psi[cell * lk..(cell + 1) * lk];
        let beta_hat = opts
            .known_beta
            .unwrap_or_else(|| estimate_noise_floor(psi_sel, self.cfg.upsilon_r));
        let thr = beta_hat * self.cfg.gamma_r;
        let e_sel = &self.energies[cell * nwin..(cell + 1) * nwin];
        let m = self.group.m;
        let wi_hat: Vec<bool> = (1..=m).map(|dev| e_sel[dev] >= thr).collect();
        Ok(DetectionResult {
            s_hat: q + 1,
            eps_i_hat: e,
            eps_f_hat: ef,
            delta_hat: d_hat,
            beta_hat,
            wi_hat,
            energies: e_sel[..=m].to_vec(),
        })
    }

    /// PDP of the currently selected grid cell (testing/diagnostics).
    pub fn psi_at(&self, q0: usize, e: i32) -> &[f64] {
        let lk = self.lk();
        let cell = q0 * self.cfg.a + (e + self.cfg.eps_span()) as usize;
        &self.psi[cell * lk..(cell + 1) * lk]
    }
}

fn wrap_half(x: f64) -> f64 {
    (x + 0.5).rem_euclid(1.0) - 0.5
}

/// One-shot detection; builds a fresh engine. Monte Carlo callers should
/// hold a [`DetectorEngine`] instead.
pub fn detect(
    stream: &[Complex64],
    cfg: &DetectorConfig,
    group: &PdwchGroupConfig,
    params: &OfdmParams,
) -> Result<DetectionResult, WrxError> {
    DetectorEngine::new(*cfg, *group, *params).detect(stream)
}
