//! Monte Carlo harness: full TX-channel-RX chain trials, reproducible
//! parallel drivers, and the named experiment runners behind the CLI.
//!
//! Conventions locked across all experiments:
//!   - the transmitted spectrum is normalized to unit average power per
//!     occupied bin, so `snr_db` is exactly the per-bin SNR;
//!   - every trial draws fresh EPA fading (unit-gain realization), a
//!     uniform symbol index, and a uniform total CFO in [-4/3, 4/3);
//!   - trial t of stream s under master seed g runs on its own RNG
//!     derived from (g, s, t), so results never depend on the worker
//!     count or scheduling.

use crate::ofdm_link::{
    apply_impairments, convolve_taps, modulate_frame, qpsk_guard_filler, FadingChannel,
    ImpairmentSpec, OfdmParams,
};
use crate::seed::{derive_seed, trial_rng};
use crate::semi_markov::{solve, PowerProfile, SemiMarkovSolution, WakeupSystemParams};
use crate::sysim::{simulate_drx, simulate_nm, DetectionMode, DrxConfig, SimConfig, WiDecider};
use crate::traffic::TrafficParams;
use crate::wrx::{DetectOptions, DetectorConfig, DetectorEngine};
use crate::zc_signal::{gen_root_zc, shift_spectrum, PdwchGroupConfig, ZcSequence};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const STREAM_CAL: u64 = 0x01;
const STREAM_DET_ABSENT: u64 = 0x10;
const STREAM_DET_PRESENT: u64 = 0x11;
const STREAM_SYNC: u64 = 0x20;
const STREAM_SIM: u64 = 0x30;

fn stream_id(tag: u64, idx: u64) -> u64 {
    (tag << 32) | idx
}

/// One detection-chain configuration (what the spec of a Monte Carlo run
/// needs beyond the receiver knobs already in [`DetectorConfig`]).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChainConfig {
    pub snr_db: f64,
    /// PDP oversampling factor of the receiver under test.
    pub l: usize,
    pub p_fa_target: f64,
    /// Anchor sequence transmitted.
    pub anchor: bool,
    /// Device WI bits on the air (bit 0 = device 1).
    pub wi_bits: u8,
    /// Hand the detector the true noise floor instead of the CFAR estimate.
    pub known_beta: bool,
    /// Pin the detector to the true (symbol, integer CFO) cell.
    pub fixed_cell: bool,
    /// Hand the detector the true fractional CFO.
    pub genie_eps_f: bool,
    /// Timing offsets drawn uniformly from 0..=delta_spread.
    pub delta_spread: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            snr_db: -4.0,
            l: 2,
            p_fa_target: 0.1,
            anchor: true,
            wi_bits: 0,
            known_beta: false,
            fixed_cell: false,
            genie_eps_f: false,
            delta_spread: 0,
        }
    }
}

impl ChainConfig {
    /// False-alarm calibration: silent channel (no anchor, no WIs), true
    /// cell and noise floor pinned so only the CFAR statistic is under test.
    pub fn calibration(snr_db: f64, p_fa_target: f64) -> Self {
        ChainConfig {
            snr_db,
            l: 1,
            p_fa_target,
            anchor: false,
            known_beta: true,
            fixed_cell: true,
            ..Default::default()
        }
    }

    /// Detection study: anchor on, one device's WI present or absent, full
    /// receiver (estimated floor, searched cell, refined CFO).
    pub fn detection(snr_db: f64, p_fa_target: f64, device: usize, present: bool) -> Self {
        ChainConfig {
            snr_db,
            p_fa_target,
            wi_bits: if present { 1 << (device - 1) } else { 0 },
            ..Default::default()
        }
    }

    /// Sync study: anchor only, full search, floor handed over (it does
    /// not influence the selected cell).
    pub fn sync(snr_db: f64) -> Self {
        ChainConfig {
            snr_db,
            known_beta: true,
            ..Default::default()
        }
    }

    /// True per-lag noise floor of the PDP under this SNR convention.
    pub fn beta_true(&self, group: &PdwchGroupConfig) -> f64 {
        group.k as f64 * 10f64.powf(-self.snr_db / 10.0)
    }
}

/// Superposition of the selected shifts, scaled to unit average power per
/// bin: total spectrum energy is exactly K whenever anything transmits.
pub fn tx_spectrum(
    group: &PdwchGroupConfig,
    seq: &ZcSequence,
    anchor: bool,
    wi_bits: u8,
) -> Vec<Complex64> {
    let mut taus: Vec<usize> = Vec::new();
    if anchor {
        taus.push(0);
    }
    for dev in 1..=group.m {
        if wi_bits >> (dev - 1) & 1 == 1 {
            taus.push(dev * group.k_cs);
        }
    }
    let mut y = vec![Complex64::default(); group.k];
    if taus.is_empty() {
        return y;
    }
    let scale = 1.0 / ((group.k * taus.len()) as f64).sqrt();
    for tau in taus {
        for (acc, v) in y.iter_mut().zip(shift_spectrum(seq, tau)) {
            *acc += v * scale;
        }
    }
    y
}

/// Everything one chain trial produced, truth next to estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// True PDWCH symbol index (1-based, like `s_hat`).
    pub s_true: usize,
    pub s_hat: usize,
    /// True total CFO in subcarriers.
    pub eps: f64,
    pub eps_i: i32,
    pub eps_i_hat: i32,
    pub ef_true: f64,
    pub ef_hat: f64,
    pub delta: usize,
    pub delta_hat: usize,
    pub beta_true: f64,
    pub beta_hat: f64,
    /// Window energies at the selected cell, m = 0 (anchor) ..= M.
    pub energies: Vec<f64>,
    pub wi_hat: Vec<bool>,
}

impl TrialResult {
    /// CFAR test statistic for one device: window energy over the floor
    /// the detector actually used.
    pub fn normalized_energy(&self, device: usize) -> f64 {
        self.energies[device] / self.beta_hat
    }
}

/// Reusable per-worker state: detector engine, channel, TX spectrum.
pub struct TrialContext {
    pub cfg: ChainConfig,
    pub group: PdwchGroupConfig,
    pub params: OfdmParams,
    pub channel: FadingChannel,
    engine: DetectorEngine,
    y_tx: Vec<Complex64>,
    beta_true: f64,
    cap: usize,
}

impl TrialContext {
    pub fn new(cfg: ChainConfig) -> Self {
        let group = PdwchGroupConfig::default();
        let params = OfdmParams::default();
        let seq = gen_root_zc(group.root, group.k);
        let det = DetectorConfig::new(3, 5, cfg.l, cfg.p_fa_target, group.k_cs);
        let engine = DetectorEngine::with_root(det, group, params, &seq);
        let y_tx = tx_spectrum(&group, &seq, cfg.anchor, cfg.wi_bits);
        let mut channel = FadingChannel::epa(0);
        channel.normalize_realization = true;
        let beta_true = cfg.beta_true(&group);
        // observation buffer: slack for timing spread, x symbols, one body
        let cap = cfg.delta_spread + det.x * params.sym_len() + params.n;
        TrialContext {
            cfg,
            group,
            params,
            channel,
            engine,
            y_tx,
            beta_true,
            cap,
        }
    }

    pub fn run_trial(&mut self, rng: &mut ChaCha8Rng) -> TrialResult {
        chain_once(
            &mut self.engine,
            &self.channel,
            &self.cfg,
            self.cap,
            self.beta_true,
            &self.y_tx,
            rng,
        )
    }

    /// Same chain with a caller-supplied TX spectrum (coupled simulation).
    pub fn run_with_y(&mut self, y: &[Complex64], rng: &mut ChaCha8Rng) -> TrialResult {
        chain_once(
            &mut self.engine,
            &self.channel,
            &self.cfg,
            self.cap,
            self.beta_true,
            y,
            rng,
        )
    }
}

fn chain_once(
    engine: &mut DetectorEngine,
    channel: &FadingChannel,
    cfg: &ChainConfig,
    cap: usize,
    beta_true: f64,
    y: &[Complex64],
    rng: &mut ChaCha8Rng,
) -> TrialResult {
    let params = engine.params;
    let group = engine.group;
    let x = engine.cfg.x;
    let s0 = rng.gen_range(0..x);
    let eps: f64 = rng.gen_range(-4.0 / 3.0..4.0 / 3.0);
    let eps_i = eps.round() as i32;
    let ef_true = eps - eps_i as f64;
    let delta = if cfg.delta_spread > 0 {
        rng.gen_range(0..=cfg.delta_spread)
    } else {
        0
    };
    let imp = ImpairmentSpec {
        eps_i,
        eps_f: ef_true,
        delta,
        snr_db: cfg.snr_db,
        pdwch_symbol_index: s0 + 1,
    };
    let mut stream = {
        let mut filler = qpsk_guard_filler(group, rng);
        modulate_frame(y, &params, &imp, &group, x, &mut filler)
            .expect("frame parameters are fixed and valid")
            .stream
    };
    stream.resize(cap, Complex64::default());
    let taps = channel.draw(&params, rng);
    let faded = convolve_taps(&stream, &taps);
    let rx = apply_impairments(&faded, &imp, &params, rng);
    let opts = DetectOptions {
        known_beta: cfg.known_beta.then_some(beta_true),
        fixed_cell: cfg.fixed_cell.then_some((s0 + 1, eps_i)),
        genie_eps_f: cfg.genie_eps_f.then_some(ef_true),
    };
    let det = engine
        .detect_with(&rx, opts)
        .expect("observation buffer covers the frame");
    TrialResult {
        s_true: s0 + 1,
        s_hat: det.s_hat,
        eps,
        eps_i,
        eps_i_hat: det.eps_i_hat,
        ef_true,
        ef_hat: det.eps_f_hat,
        delta,
        delta_hat: det.delta_hat,
        beta_true,
        beta_hat: det.beta_hat,
        energies: det.energies,
        wi_hat: det.wi_hat,
    }
}

/// Run `trials` chain trials in parallel and map each result. Output order
/// and values are independent of thread count.
pub fn run_trials_map<T, F>(cfg: &ChainConfig, trials: u64, seed: u64, stream: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&TrialResult) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map_init(
            || TrialContext::new(*cfg),
            |ctx, t| {
                let mut rng = trial_rng(seed, stream, t);
                f(&ctx.run_trial(&mut rng))
            },
        )
        .collect()
}

/// Scope a computation to a rayon pool of `workers` threads (0 = default).
pub fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("rayon pool")
            .install(f)
    }
}

/// Linear-interpolation quantile (type 7) of an unsorted sample.
pub fn quantile_type7(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty() && (0.0..=1.0).contains(&q));
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[lo] + (h - lo as f64) * (v[lo + 1] - v[lo])
}

/// Missed-detection rate when the threshold is set empirically at the
/// (1 - fa) quantile of the WI-absent statistic.
pub fn pmd_at_fa(t_absent: &[f64], t_present: &[f64], fa: f64) -> f64 {
    let thr = quantile_type7(t_absent, 1.0 - fa);
    let missed = t_present.iter().filter(|&&t| t < thr).count();
    missed as f64 / t_present.len() as f64
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

// ---------------------------------------------------------------------
// named experiment runners

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CalibrationPoint {
    pub snr_db: f64,
    pub p_fa_target: f64,
    pub trials: u64,
    pub false_alarms: u64,
    pub rate: f64,
    /// Binomial sigma at the target rate.
    pub sigma: f64,
}

/// CFAR false-alarm calibration on a silent channel, one device's WI bit
/// per trial.
pub fn run_calibration(
    points: &[(f64, f64)],
    device: usize,
    trials: u64,
    seed: u64,
) -> Vec<CalibrationPoint> {
    points
        .iter()
        .enumerate()
        .map(|(i, &(snr_db, p_fa))| {
            let cfg = ChainConfig::calibration(snr_db, p_fa);
            let hits = run_trials_map(&cfg, trials, seed, stream_id(STREAM_CAL, i as u64), |r| {
                r.wi_hat[device - 1] as u64
            });
            let false_alarms: u64 = hits.iter().sum();
            CalibrationPoint {
                snr_db,
                p_fa_target: p_fa,
                trials,
                false_alarms,
                rate: false_alarms as f64 / trials as f64,
                sigma: (p_fa * (1.0 - p_fa) / trials as f64).sqrt(),
            }
        })
        .collect()
}

/// WI-absent and WI-present samples of one device's normalized window
/// energy under the full receiver.
pub fn collect_detection_stats(
    snr_db: f64,
    p_fa_target: f64,
    device: usize,
    trials: u64,
    seed: u64,
    point: u64,
) -> (Vec<f64>, Vec<f64>) {
    let absent = ChainConfig::detection(snr_db, p_fa_target, device, false);
    let present = ChainConfig::detection(snr_db, p_fa_target, device, true);
    let t0 = run_trials_map(
        &absent,
        trials,
        seed,
        stream_id(STREAM_DET_ABSENT, point),
        |r| r.normalized_energy(device),
    );
    let t1 = run_trials_map(
        &present,
        trials,
        seed,
        stream_id(STREAM_DET_PRESENT, point),
        |r| r.normalized_energy(device),
    );
    (t0, t1)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PmdPoint {
    pub snr_db: f64,
    pub fa: f64,
    pub pmd: f64,
    pub trials: u64,
}

/// Missed-detection rate at fixed empirical false-alarm points.
pub fn run_pmd_at_fa(
    points: &[(f64, f64)],
    device: usize,
    trials: u64,
    seed: u64,
) -> Vec<PmdPoint> {
    points
        .iter()
        .enumerate()
        .map(|(i, &(snr_db, fa))| {
            let (t0, t1) = collect_detection_stats(snr_db, fa, device, trials, seed, i as u64);
            PmdPoint {
                snr_db,
                fa,
                pmd: pmd_at_fa(&t0, &t1, fa),
                trials,
            }
        })
        .collect()
}

/// ROC sweep: P_md over an SNR grid at one empirical false-alarm rate.
pub fn run_roc(
    snrs: &[f64],
    fa: f64,
    device: usize,
    trials: u64,
    seed: u64,
) -> Vec<PmdPoint> {
    snrs.iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let (t0, t1) =
                collect_detection_stats(snr_db, fa, device, trials, seed, 0x100 + i as u64);
            PmdPoint {
                snr_db,
                fa,
                pmd: pmd_at_fa(&t0, &t1, fa),
                trials,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SyncStats {
    pub snr_db: f64,
    pub trials: u64,
    pub s_correct: u64,
    pub eps_i_correct: u64,
    pub joint_correct: u64,
    pub ef_rmse: f64,
    pub ef_bias: f64,
}

impl SyncStats {
    pub fn p_symbol(&self) -> f64 {
        self.s_correct as f64 / self.trials as f64
    }

    pub fn p_eps_i(&self) -> f64 {
        self.eps_i_correct as f64 / self.trials as f64
    }

    pub fn p_joint(&self) -> f64 {
        self.joint_correct as f64 / self.trials as f64
    }
}

/// Symbol / integer-CFO identification accuracy and fractional-CFO error
/// of the full receiver, anchor only.
pub fn run_sync_stats(snr_db: f64, trials: u64, seed: u64) -> SyncStats {
    let cfg = ChainConfig::sync(snr_db);
    let rows = run_trials_map(&cfg, trials, seed, stream_id(STREAM_SYNC, 0), |r| {
        (
            (r.s_hat == r.s_true) as u64,
            (r.eps_i_hat == r.eps_i) as u64,
            (r.s_hat == r.s_true && r.eps_i_hat == r.eps_i) as u64,
            r.ef_hat - r.ef_true,
        )
    });
    let s_correct = rows.iter().map(|r| r.0).sum();
    let eps_i_correct = rows.iter().map(|r| r.1).sum();
    let joint_correct = rows.iter().map(|r| r.2).sum();
    let errs: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let (bias, _) = mean_sd(&errs);
    let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len().max(1) as f64).sqrt();
    SyncStats {
        snr_db,
        trials,
        s_correct,
        eps_i_correct,
        joint_correct,
        ef_rmse: rmse,
        ef_bias: bias,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SweepParam {
    Tc,
    Ton,
    Ti,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Tc => "t_c",
            SweepParam::Ton => "t_on",
            SweepParam::Ti => "t_i",
        }
    }
}

/// Wake cycles per forced-wake epoch at a given cycle length: the epoch is
/// held near 0.6 s across the t_c grid.
pub fn n_w_for_tc(t_c: f64) -> u32 {
    ((0.6 / t_c).round() as u32).max(1)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub n_w: u32,
    pub analytic_power: f64,
    /// System-level mean delay (over all triggers, weighted by rates).
    pub analytic_delay: f64,
    /// Mean delay conditioned on a wake trigger.
    pub analytic_delay_trigger: f64,
    pub sim_power_mean: f64,
    pub sim_power_sd: f64,
    pub sim_delay_mean: f64,
    pub sim_delay_sd: f64,
    pub sim_fa_rate: f64,
    pub sim_md_rate: f64,
    pub reps: u32,
    pub duration: f64,
}

fn sweep_sys(base: &WakeupSystemParams, param: SweepParam, v: f64) -> WakeupSystemParams {
    let mut sys = *base;
    match param {
        SweepParam::Tc => {
            sys.t_c = v;
            sys.n_w = n_w_for_tc(v);
        }
        SweepParam::Ton => sys.t_on = v,
        SweepParam::Ti => sys.t_i = v,
    }
    sys
}

/// One parameter sweep: closed-form power/delay next to repeated
/// discrete-event runs at fixed decode error rates.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    param: SweepParam,
    values: &[f64],
    base: &WakeupSystemParams,
    profile: &PowerProfile,
    traffic: &TrafficParams,
    duration: f64,
    reps: u32,
    seed: u64,
) -> Vec<SweepRow> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let sys = sweep_sys(base, param, v);
            let sol = solve(&sys, traffic, profile).expect("analytic model");
            let mut powers = Vec::with_capacity(reps as usize);
            let mut delays = Vec::with_capacity(reps as usize);
            let mut fa = (0u64, 0u64);
            let mut md = (0u64, 0u64);
            for rep in 0..reps {
                let cfg = SimConfig {
                    sys,
                    profile: *profile,
                    traffic: *traffic,
                    duration,
                    seed: derive_seed(seed, stream_id(STREAM_SIM, i as u64), rep as u64),
                    detection: DetectionMode::FixedRates,
                };
                let st = simulate_nm(&cfg);
                powers.push(st.avg_power);
                delays.push(st.avg_trigger_delay);
                let present = st.counts.detections + st.counts.missed;
                let absent = st.counts.decodes - present;
                fa = (fa.0 + st.counts.false_alarms, fa.1 + absent);
                md = (md.0 + st.counts.missed, md.1 + present);
            }
            let (pm, ps) = mean_sd(&powers);
            let (dm, ds) = mean_sd(&delays);
            SweepRow {
                value: v,
                n_w: sys.n_w,
                analytic_power: sol.avg_power,
                analytic_delay: sol.avg_delay,
                analytic_delay_trigger: sol.delay_per_trigger,
                sim_power_mean: pm,
                sim_power_sd: ps,
                sim_delay_mean: dm,
                sim_delay_sd: ds,
                sim_fa_rate: if fa.1 > 0 { fa.0 as f64 / fa.1 as f64 } else { 0.0 },
                sim_md_rate: if md.1 > 0 { md.0 as f64 / md.1 as f64 } else { 0.0 },
                reps,
                duration,
            }
        })
        .collect()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CompareRow {
    pub scheme: String,
    /// Wake cycle (NM) or short DRX cycle, seconds.
    pub cycle: f64,
    pub power: f64,
    pub power_sd: f64,
    pub trigger_delay: f64,
    pub reps: u32,
}

/// Wake-up receiver vs connected-mode DRX at matched cycle lengths, both
/// under the discrete-event simulator and the same traffic seeds.
pub fn run_compare_drx(
    cycles: &[f64],
    base: &WakeupSystemParams,
    profile: &PowerProfile,
    traffic: &TrafficParams,
    duration: f64,
    reps: u32,
    seed: u64,
) -> Vec<CompareRow> {
    let mut out = Vec::new();
    for (i, &t) in cycles.iter().enumerate() {
        let mut sys = *base;
        sys.t_c = t;
        sys.n_w = n_w_for_tc(t);
        let mut nm_p = Vec::new();
        let mut nm_d = Vec::new();
        let mut dx_p = Vec::new();
        let mut dx_d = Vec::new();
        for rep in 0..reps {
            let sim_seed = derive_seed(seed, stream_id(STREAM_SIM, 0x100 + i as u64), rep as u64);
            let cfg = SimConfig {
                sys,
                profile: *profile,
                traffic: *traffic,
                duration,
                seed: sim_seed,
                detection: DetectionMode::FixedRates,
            };
            let st = simulate_nm(&cfg);
            nm_p.push(st.avg_power);
            nm_d.push(st.avg_trigger_delay);
            let drx = DrxConfig::with_short_cycle(t);
            let sd = simulate_drx(&drx, traffic, duration, sim_seed);
            dx_p.push(sd.avg_power);
            dx_d.push(sd.avg_trigger_delay);
        }
        let (pm, ps) = mean_sd(&nm_p);
        let (dm, _) = mean_sd(&nm_d);
        out.push(CompareRow {
            scheme: "wakeup".into(),
            cycle: t,
            power: pm,
            power_sd: ps,
            trigger_delay: dm,
            reps,
        });
        let (pm, ps) = mean_sd(&dx_p);
        let (dm, _) = mean_sd(&dx_d);
        out.push(CompareRow {
            scheme: "drx".into(),
            cycle: t,
            power: pm,
            power_sd: ps,
            trigger_delay: dm,
            reps,
        });
    }
    out
}

/// Closed-form power/latency for one operating point.
pub fn run_analytic(
    sys: &WakeupSystemParams,
    traffic: &TrafficParams,
    profile: &PowerProfile,
) -> SemiMarkovSolution {
    solve(sys, traffic, profile).expect("analytic model")
}

/// WI decisions taken by running the full PHY chain once per decode.
pub struct PhyDecider {
    ctx: TrialContext,
    y_present: Vec<Complex64>,
    y_absent: Vec<Complex64>,
    pub device: usize,
}

impl PhyDecider {
    pub fn new(snr_db: f64, p_fa_target: f64, device: usize) -> Self {
        let cfg = ChainConfig::detection(snr_db, p_fa_target, device, true);
        let ctx = TrialContext::new(cfg);
        let seq = gen_root_zc(ctx.group.root, ctx.group.k);
        let y_present = tx_spectrum(&ctx.group, &seq, true, 1 << (device - 1));
        let y_absent = tx_spectrum(&ctx.group, &seq, true, 0);
        PhyDecider {
            ctx,
            y_present,
            y_absent,
            device,
        }
    }
}

impl WiDecider for PhyDecider {
    fn decide(&mut self, wi_present: bool, rng: &mut ChaCha8Rng) -> bool {
        let y = if wi_present {
            &self.y_present
        } else {
            &self.y_absent
        };
        let res = self.ctx.run_with_y(y, rng);
        res.wi_hat[self.device - 1]
    }
}
