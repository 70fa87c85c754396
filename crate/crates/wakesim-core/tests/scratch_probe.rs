// temporary validation probes; removed once regression bands are frozen
use wakesim_core::experiments::*;
use wakesim_core::semi_markov::{solve, PowerProfile, WakeupSystemParams};
use wakesim_core::sysim::{simulate_drx, simulate_nm, DetectionMode, DrxConfig, SimConfig};
use wakesim_core::traffic::TrafficParams;

const SEED: u64 = 20260825;

#[test]
#[ignore]
fn probe_calibration() {
    let points = [(0.0, 0.10), (0.0, 0.05), (-4.0, 0.10), (-4.0, 0.05)];
    for p in run_calibration(&points, 4, 100_000, SEED) {
        println!(
            "cal snr={} pfa={} rate={:.5} sigma3={:.5}",
            p.snr_db,
            p.p_fa_target,
            p.rate,
            3.0 * p.sigma
        );
    }
}

#[test]
#[ignore]
fn probe_pmd() {
    let points = [(-2.6, 0.05), (-3.0, 0.10), (-3.5, 0.05), (-3.8, 0.10)];
    for p in run_pmd_at_fa(&points, 4, 20_000, SEED) {
        println!("pmd snr={} fa={} pmd={:.4}", p.snr_db, p.fa, p.pmd);
    }
}

#[test]
#[ignore]
fn probe_roc() {
    for p in run_roc(&[-10.0, -7.0, -4.0], 0.10, 4, 20_000, SEED) {
        println!("roc snr={} pmd={:.4}", p.snr_db, p.pmd);
    }
}

#[test]
#[ignore]
fn probe_sync() {
    for snr in [-10.0, -12.0] {
        let s = run_sync_stats(snr, 10_000, SEED);
        println!(
            "sync snr={} p_s={:.4} p_ei={:.4} joint={:.4} rmse={:.4} bias={:+.4}",
            snr,
            s.p_symbol(),
            s.p_eps_i(),
            s.p_joint(),
            s.ef_rmse,
            s.ef_bias
        );
    }
}

#[test]
#[ignore]
fn probe_tc_sweep() {
    let base = WakeupSystemParams::default();
    let rows = run_sweep(
        SweepParam::Tc,
        &[10e-3, 50e-3, 100e-3, 250e-3],
        &base,
        &PowerProfile::default(),
        &TrafficParams::default(),
        1_000.0,
        20,
        SEED,
    );
    for r in rows {
        println!(
            "tc={:.3} n_w={} ana_p={:.4} sim_p={:.4}+-{:.4} (r={:.4}) ana_d={:.5} sim_d={:.5}+-{:.5} (r={:.4}) fa={:.4} md={:.4}",
            r.value,
            r.n_w,
            r.analytic_power * 1e3,
            r.sim_power_mean * 1e3,
            3.0 * r.sim_power_sd / (r.reps as f64).sqrt() * 1e3,
            r.sim_power_mean / r.analytic_power,
            r.analytic_delay_trigger * 1e3,
            r.sim_delay_mean * 1e3,
            3.0 * r.sim_delay_sd / (r.reps as f64).sqrt() * 1e3,
            r.sim_delay_mean / r.analytic_delay_trigger,
            r.sim_fa_rate,
            r.sim_md_rate
        );
    }
}

#[test]
#[ignore]
fn probe_compare() {
    let rows = run_compare_drx(
        &[15e-3],
        &WakeupSystemParams::default(),
        &PowerProfile::default(),
        &TrafficParams::default(),
        2_000.0,
        10,
        SEED,
    );
    for r in rows {
        println!(
            "{} cycle={:.3} power={:.1} mW delay={:.1} ms",
            r.scheme,
            r.cycle,
            r.power * 1e3,
            r.trigger_delay * 1e3
        );
    }
}

#[test]
#[ignore]
fn probe_drx_direct() {
    let mut p = Vec::new();
    let mut d = Vec::new();
    for rep in 0..10u64 {
        let st = simulate_drx(
            &DrxConfig::with_short_cycle(15e-3),
            &TrafficParams::default(),
            2_000.0,
            5_000 + rep,
        );
        p.push(st.avg_power);
        d.push(st.avg_trigger_delay);
    }
    let (pm, _) = mean_sd(&p);
    let (dm, _) = mean_sd(&d);
    println!("drx15 power={:.1} mW delay={:.1} ms", pm * 1e3, dm * 1e3);
}

#[test]
#[ignore]
fn probe_nm15() {
    let mut sys = WakeupSystemParams::default();
    sys.t_c = 15e-3;
    sys.n_w = n_w_for_tc(15e-3);
    let sol = solve(&sys, &TrafficParams::default(), &PowerProfile::default()).unwrap();
    let mut p = Vec::new();
    let mut d = Vec::new();
    for rep in 0..10u64 {
        let st = simulate_nm(&SimConfig {
            sys,
            profile: PowerProfile::default(),
            traffic: TrafficParams::default(),
            duration: 2_000.0,
            seed: 7_000 + rep,
            detection: DetectionMode::FixedRates,
        });
        p.push(st.avg_power);
        d.push(st.avg_trigger_delay);
    }
    let (pm, _) = mean_sd(&p);
    let (dm, _) = mean_sd(&d);
    println!(
        "nm15 analytic={:.1} mW sim={:.1} mW delay={:.1} ms",
        sol.avg_power * 1e3,
        pm * 1e3,
        dm * 1e3
    );
}
