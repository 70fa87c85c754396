use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use wakesim_core::experiments::tx_spectrum;
use wakesim_core::ofdm_link::{
    apply_impairments, modulate_frame, qpsk_guard_filler, ImpairmentSpec, OfdmParams,
};
use wakesim_core::wrx::{
    compute_pdp, estimate_noise_floor, solve_gamma_r, stage1_sync, window_energy,
    DetectOptions, DetectorConfig, DetectorEngine, WrxError,
};
use wakesim_core::zc_signal::{gen_root_zc, PdwchGroupConfig};

fn rand_bins(k: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..k)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Frame with impairments straight through the TX helpers, identity channel.
fn tx_stream(wi_bits: u8, imp: &ImpairmentSpec, pad_to: usize, seed: u64) -> Vec<Complex64> {
    let params = OfdmParams::default();
    let group = PdwchGroupConfig::default();
    let seq = gen_root_zc(group.root, group.k);
    let y = tx_spectrum(&group, &seq, true, wi_bits);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = {
        let mut filler = qpsk_guard_filler(group, &mut rng);
        modulate_frame(&y, &params, imp, &group, 3, &mut filler)
            .unwrap()
            .stream
    };
    out.resize(pad_to, Complex64::default());
    apply_impairments(&out, imp, &params, &mut rng)
}

#[test]
fn stage1_recovers_the_worked_example() {
    // delta = 40, eps_f = 0.2 over one CP-plus-two-bodies observation
    let params = OfdmParams::default();
    let imp = ImpairmentSpec {
        eps_i: 0,
        eps_f: 0.2,
        delta: 40,
        snr_db: 20.0,
        pdwch_symbol_index: 1,
    };
    let stream = tx_stream(0b0000_0101, &imp, 600, 17);
    let win = params.n_cp + 2 * params.n_b;
    let (d_hat, ef_hat) = stage1_sync(&stream[..win], &params).unwrap();
    assert!((d_hat as i64 - 40).unsigned_abs() <= 1, "d_hat {d_hat}");
    assert!((ef_hat - 0.2).abs() < 0.01, "ef_hat {ef_hat}");
}

#[test]
fn stage1_rejects_wrong_window_length() {
    let params = OfdmParams::default();
    let window = vec![Complex64::default(); 264];
    match stage1_sync(&window, &params) {
        Err(WrxError::WindowLength(264)) => {}
        other => panic!("expected WindowLength error, got {other:?}"),
    }
}

#[test]
fn threshold_solver_matches_reference_values() {
    // survival of a sum of L*K_cs unit-mean exponentials, inverted at p_fa
    let cases = [
        (0.10, 1, 17.781585635961730866),
        (0.05, 1, 19.442569329915020193),
        (0.01, 1, 22.820841333141575155),
        (0.10, 2, 32.711206707169887961),
        (0.05, 2, 34.916080169924067278),
        (0.01, 2, 39.307877857501240297),
    ];
    for (p_fa, l, want) in cases {
        let got = solve_gamma_r(p_fa, l, 13);
        assert!((got - want).abs() < 1e-10, "({p_fa},{l}): {got} vs {want}");
    }
    // the single-exponential case is just the inverse survival -ln(p_fa)
    assert!((solve_gamma_r(0.1, 1, 1) - 10f64.ln()).abs() < 1e-12);
}

#[test]
fn standard_config_wires_the_locked_constants() {
    let cfg = DetectorConfig::standard(0.1, 2);
    assert_eq!((cfg.x, cfg.a, cfg.l), (3, 5, 2));
    assert_eq!((cfg.gate, cfg.backoff, cfg.sync_lags), (13, 2, 4));
    assert_eq!(cfg.eps_span(), 2);
    assert!((cfg.upsilon_r - (-0.1f64.ln())).abs() < 1e-12);
    assert!((cfg.gamma_r - 32.711206707169887961).abs() < 1e-10);
}

#[test]
fn pdp_matches_a_direct_dft() {
    // the FFT-based profile equals the literal lag sum, window sums included
    let group = PdwchGroupConfig::default();
    let seq = gen_root_zc(group.root, group.k);
    let k = group.k;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for case in 0..100 {
        let l = 1 + case % 2;
        let r = rand_bins(k, &mut rng);
        let psi = compute_pdp(&r, &seq.spectrum, l);
        assert_eq!(psi.len(), l * k);
        for (lam, &got) in psi.iter().enumerate() {
            let mut acc = Complex64::default();
            for i in 0..k {
                let ph = 2.0 * PI * (i * lam) as f64 / (l * k) as f64;
                acc += r[i] * seq.spectrum[i].conj() * Complex64::from_polar(1.0, ph);
            }
            let want = acc.norm_sqr() / k as f64;
            assert!(
                (got - want).abs() <= 1e-6 * want.max(1.0),
                "case {case} lag {lam}: {got} vs {want}"
            );
        }
        for m in 0..group.windows() {
            let direct: f64 = psi[m * l * group.k_cs..(m + 1) * l * group.k_cs].iter().sum();
            assert!((window_energy(&psi, m, l, group.k_cs) - direct).abs() < 1e-9);
        }
    }
}

#[test]
fn detection_is_scale_invariant() {
    let imp = ImpairmentSpec {
        eps_i: -2,
        eps_f: -0.21,
        delta: 0,
        snr_db: 2.0,
        pdwch_symbol_index: 3,
    };
    let stream = tx_stream(0b0010_0110, &imp, 560, 99);
    let cfg = DetectorConfig::standard(0.1, 2);
    let group = PdwchGroupConfig::default();
    let params = OfdmParams::default();
    let mut eng = DetectorEngine::new(cfg, group, params);
    let base = eng.detect(&stream).unwrap();
    let scaled: Vec<Complex64> = stream.iter().map(|v| v * 7.3).collect();
    let res = eng.detect(&scaled).unwrap();
    assert_eq!(res.s_hat, base.s_hat);
    assert_eq!(res.eps_i_hat, base.eps_i_hat);
    assert_eq!(res.delta_hat, base.delta_hat);
    assert!((res.eps_f_hat - base.eps_f_hat).abs() < 1e-9);
    assert_eq!(res.wi_hat, base.wi_hat);
    let g = 7.3f64 * 7.3;
    assert!((res.beta_hat / base.beta_hat - g).abs() < 1e-9 * g);
    for (a, b) in res.energies.iter().zip(&base.energies) {
        assert!((a / b - g).abs() < 1e-6 * g);
    }
}

#[test]
fn zero_stream_falls_back_to_the_null_cell() {
    let cfg = DetectorConfig::standard(0.1, 2);
    let group = PdwchGroupConfig::default();
    let params = OfdmParams::default();
    let stream = vec![Complex64::default(); 549];
    let res = DetectorEngine::new(cfg, group, params).detect(&stream).unwrap();
    assert_eq!(res.s_hat, 1);
    assert_eq!(res.eps_i_hat, 0);
    assert_eq!(res.eps_f_hat, 0.0);
    assert_eq!(res.delta_hat, 0);
    assert_eq!(res.beta_hat, 0.0);
    assert!(res.energies.iter().all(|&e| e == 0.0));
}

#[test]
fn short_stream_is_a_length_error() {
    let cfg = DetectorConfig::standard(0.1, 2);
    let group = PdwchGroupConfig::default();
    let params = OfdmParams::default();
    let stream = vec![Complex64::default(); 100];
    match DetectorEngine::new(cfg, group, params).detect(&stream) {
        Err(WrxError::StreamLength { len: 100, x: 3 }) => {}
        other => panic!("expected StreamLength, got {other:?}"),
    }
}

#[test]
fn false_alarm_target_does_not_touch_sync() {
    // the CFAR threshold only gates the indicator compare; the synchronizer
    // and cell search must produce identical estimates at any target
    let imp = ImpairmentSpec {
        eps_i: 1,
        eps_f: 0.34,
        delta: 0,
        snr_db: -4.0,
        pdwch_symbol_index: 2,
    };
    let group = PdwchGroupConfig::default();
    let params = OfdmParams::default();
    for trial in 0..10 {
        let stream = tx_stream(0b0001_0000, &imp, 560, 1000 + trial);
        let get = |p_fa: f64| {
            DetectorEngine::new(DetectorConfig::standard(p_fa, 2), group, params)
                .detect(&stream)
                .unwrap()
        };
        let a = get(0.10);
        let b = get(0.05);
        let c = get(0.01);
        for other in [&b, &c] {
            assert_eq!(a.s_hat, other.s_hat);
            assert_eq!(a.eps_i_hat, other.eps_i_hat);
            assert_eq!(a.delta_hat, other.delta_hat);
            assert_eq!(a.eps_f_hat, other.eps_f_hat);
        }
    }
}

#[test]
fn noiseless_chain_is_decoded_exactly_at_unit_lag_resolution() {
    // L = 1 with the true fractional CFO handed over: the result is forced.
    // The symbol carve starts backoff+delta samples inside the CP, which the
    // K-point profile sees as a fractional lag (3 * 117/128 here), so each
    // component keeps ~99% of its mass in its window rather than all of it.
    let imp = ImpairmentSpec {
        eps_i: 0,
        eps_f: 0.3,
        delta: 1,
        snr_db: f64::INFINITY,
        pdwch_symbol_index: 2,
    };
    let wi_bits = 0b0000_0101; // devices 1 and 3
    let stream = tx_stream(wi_bits, &imp, 560, 4);
    let cfg = DetectorConfig::standard(0.1, 1);
    let group = PdwchGroupConfig::default();
    let params = OfdmParams::default();
    let mut eng = DetectorEngine::new(cfg, group, params);
    let opts = DetectOptions {
        known_beta: Some(10.0),
        genie_eps_f: Some(0.3),
        ..DetectOptions::default()
    };
    let res = eng.detect_with(&stream, opts).unwrap();
    assert_eq!(res.s_hat, 2);
    assert_eq!(res.eps_i_hat, 0);
    assert_eq!(res.eps_f_hat, 0.3);
    // strongest CP correlation sits on the (much hotter) PDWCH symbol
    assert_eq!(res.delta_hat, params.sym_len() + 1);
    for dev in 1..=7 {
        assert_eq!(res.wi_hat[dev - 1], wi_bits >> (dev - 1) & 1 == 1, "dev {dev}");
    }
    // anchor + 2 devices split the unit bin power three ways
    let k2 = (group.k * group.k) as f64;
    for m in 0..=7 {
        if m == 0 || m == 1 || m == 3 {
            assert!(
                res.energies[m] > 0.28 * k2 && res.energies[m] < 0.34 * k2,
                "window {m}: {}",
                res.energies[m] / k2
            );
        } else {
            assert!(res.energies[m] < 0.02 * k2, "window {m}: {}", res.energies[m] / k2);
        }
    }
}

#[test]
fn oversampled_noiseless_chain_recovers_the_cell() {
    let imp = ImpairmentSpec {
        eps_i: -1,
        eps_f: -0.05,
        delta: 0,
        snr_db: f64::INFINITY,
        pdwch_symbol_index: 1,
    };
    let stream = tx_stream(0b0100_0001, &imp, 560, 8);
    let cfg = DetectorConfig::standard(0.1, 2);
    let group = PdwchGroupConfig::default();
    let params = OfdmParams::default();
    let res = DetectorEngine::new(cfg, group, params).detect(&stream).unwrap();
    assert_eq!(res.s_hat, 1);
    assert_eq!(res.eps_i_hat, -1);
    // the split-symbol reference models one integer lag of the anchor only,
    // so the device components and the fractional carve offset bias the
    // refinement by a few hundredths even without noise
    assert!((res.eps_f_hat + 0.05).abs() < 0.05, "ef {}", res.eps_f_hat);
    // estimated floor: present devices must clear it either way
    assert!(res.wi_hat[0] && res.wi_hat[6]);
}

#[test]
fn noise_floor_estimate_censors_peaks_and_stays_at_noise_scale() {
    let ups = -(0.1f64.ln());
    let psi = vec![1.0, 2.0, 3.0, 4.0, 100.0];
    // cutoff = ups * mean = 2.303 * 22 = 50.66: the peak is censored
    let want = (1.0 + 2.0 + 3.0 + 4.0) / 4.0;
    assert!((estimate_noise_floor(&psi, ups) - want).abs() < 1e-12);

    // on pure exponential noise the censoring clips the upper tail, so the
    // estimate sits below the true mean; strong peaks raise the cutoff and
    // push it back toward the full mean but never to the peak scale
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let beta = 0.7;
    let mut noise: Vec<f64> = (0..4096)
        .map(|_| -beta * (1.0 - rng.gen::<f64>()).ln())
        .collect();
    let clean = estimate_noise_floor(&noise, ups);
    assert!(clean > 0.6 * beta && clean < 0.85 * beta, "clean {clean}");
    for i in 0..8 {
        noise[i * 512] = 5e3 * beta;
    }
    let spiked = estimate_noise_floor(&noise, ups);
    assert!(spiked >= clean && spiked < 1.05 * beta, "spiked {spiked}");
    let naive = noise.iter().sum::<f64>() / noise.len() as f64;
    assert!(spiked < 0.2 * naive, "estimate dragged to peak scale: {spiked} vs {naive}");
    // scale equivariance
    let doubled: Vec<f64> = noise.iter().map(|v| 2.0 * v).collect();
    let d = estimate_noise_floor(&doubled, ups);
    assert!((d / spiked - 2.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_r_orders_with_its_arguments(
        p_lo in 0.005f64..0.05,
        gap in 1.5f64..5.0,
        l in 1usize..=2,
    ) {
        let p_hi = (p_lo * gap).min(0.4);
        // stricter target or longer window both push the threshold up
        prop_assert!(solve_gamma_r(p_lo, l, 13) > solve_gamma_r(p_hi, l, 13));
        prop_assert!(solve_gamma_r(p_lo, 2, 13) > solve_gamma_r(p_lo, 1, 13));
        prop_assert!(solve_gamma_r(p_lo, l, 13) > (l * 13) as f64);
    }

    #[test]
    fn pdp_total_mass_matches_parseval(seed in 0u64..500, l in 1usize..=2) {
        // sum over lags of the profile = L * sum_k |R~ Z*|^2
        let group = PdwchGroupConfig::default();
        let seq = gen_root_zc(group.root, group.k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rand_bins(group.k, &mut rng);
        let psi = compute_pdp(&r, &seq.spectrum, l);
        let total: f64 = psi.iter().sum();
        let direct: f64 = r
            .iter()
            .zip(&seq.spectrum)
            .map(|(a, z)| (a * z.conj()).norm_sqr())
            .sum::<f64>() * l as f64;
        prop_assert!((total - direct).abs() < 1e-6 * direct.max(1.0));
    }
}
