use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wakesim_core::experiments::tx_spectrum;
use wakesim_core::ofdm_link::{apply_impairments, modulate_frame, qpsk_guard_filler, ImpairmentSpec, OfdmParams};
use wakesim_core::wrx::{DetectOptions, DetectorConfig, DetectorEngine};
use wakesim_core::zc_signal::{gen_root_zc, PdwchGroupConfig};

fn main() {
    let params = OfdmParams::default();
    let group = PdwchGroupConfig::default();
    let seq = gen_root_zc(group.root, group.k);
    let imp = ImpairmentSpec { eps_i: 2, eps_f: 0.3, delta: 1, snr_db: f64::INFINITY, pdwch_symbol_index: 2 };
    let y = tx_spectrum(&group, &seq, true, 0b0000_0101);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out = {
        let mut filler = qpsk_guard_filler(group, &mut rng);
        modulate_frame(&y, &params, &imp, &group, 3, &mut filler).unwrap().stream
    };
    out.resize(560, Complex64::default());
    let stream = apply_impairments(&out, &imp, &params, &mut rng);
    let cfg = DetectorConfig::standard(0.1, 1);
    let mut eng = DetectorEngine::new(cfg, group, params);
    let opts = DetectOptions { known_beta: Some(1e-9), genie_eps_f: Some(0.3), ..DetectOptions::default() };
    let res = eng.detect_with(&stream, opts).unwrap();
    println!("s_hat={} e={} ef={} d={}", res.s_hat, res.eps_i_hat, res.eps_f_hat, res.delta_hat);
    for q in 0..3 {
        for e in -2i32..=2 {
            let psi = eng.psi_at(q, e);
            let head: Vec<f64> = psi[..4].iter().map(|v| (v / 117.0f64.powi(2) * 1000.0).round() / 1000.0).collect();
            let (am, av) = psi.iter().enumerate().fold((0usize, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
            println!("q={q} e={e:+}: head(K^2)={head:?} argmax={am} max/K^2={:.3}", av / 117.0f64.powi(2));
        }
    }
}
