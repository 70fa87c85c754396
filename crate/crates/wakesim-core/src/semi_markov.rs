//! Closed-form semi-Markov power/latency model of the wake-up state machine.
//!
//! Four states: S0 active-on wait, S1 active service, S2 WRx on-duration,
//! S3 sleep. Wake overhead (t_of after a decoded WI, start-up after the
//! N_w timer) and power-down legs enter as transitional energy e_t over
//! time t_t rather than as extra states, so the embedded chain stays 4x4.
//!
//! Every integral here has an exponential-density closed form; a
//! quadrature oracle cross-checks them in the test suite.

use crate::traffic::{exp_cdf, TrafficParams};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WakeupSystemParams {
    /// Wake-up cycle (s).
    pub t_c: f64,
    /// WRx on-duration per cycle (s).
    pub t_on: f64,
    /// Wake overhead after a decoded WI (s), >= t_su.
    pub t_of: f64,
    /// Active-on timer: S0 waits this long for traffic (s). The BBU-side
    /// T_ON, distinct from the WRx on-duration t_on.
    pub t_on_bbu: f64,
    /// Inactivity timer T_I (s).
    pub t_i: f64,
    /// Forced wake after this many consecutive WI=0 cycles.
    pub n_w: u32,
    pub p_fa: f64,
    pub p_md: f64,
}

impl Default for WakeupSystemParams {
    fn default() -> Self {
        WakeupSystemParams {
            t_c: 10e-3,
            t_on: 1e-3,
            t_of: 15e-3,
            t_on_bbu: 1e-3,
            t_i: 12e-3,
            n_w: 60,
            p_fa: 0.1,
            p_md: 0.01,
        }
    }
}

impl WakeupSystemParams {
    /// Sleep span per cycle, t_c - t_on.
    pub fn t_sl(&self) -> f64 {
        self.t_c - self.t_on
    }

    pub fn assert_valid(&self, profile: &PowerProfile) {
        assert!(self.t_sl() > 0.0, "need t_c > t_on");
        assert!(self.t_of >= profile.t_su, "need t_of >= t_su");
        assert!(self.n_w >= 1);
        assert!((0.0..=1.0).contains(&self.p_fa) && (0.0..=1.0).contains(&self.p_md));
    }
}

/// Measured state powers and transition energies.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerProfile {
    pub pw0: f64,
    pub pw1: f64,
    pub pw2: f64,
    pub pw3: f64,
    /// Start-up energy (J) over t_su.
    pub e_su: f64,
    /// Power-down energy (J) over t_pd.
    pub e_pd: f64,
    pub t_su: f64,
    pub t_pd: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        PowerProfile {
            pw0: 0.850,
            pw1: 0.850,
            pw2: 0.057,
            pw3: 0.016,
            e_su: 4.6e-3,
            e_pd: 3.1e-3,
            t_su: 12e-3,
            t_pd: 8e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbs {
    pub p01: f64,
    pub p03: f64,
    pub p11: f64,
    pub p13: f64,
    pub p20: f64,
    pub p23: f64,
    pub p30: f64,
    pub p32: f64,
    /// Per-cycle probability of decoding WI = 0.
    pub zero: f64,
}

impl TransitionProbs {
    /// Probability of u consecutive WI=0 cycles.
    pub fn g(&self, u: u32) -> f64 {
        if self.zero > 0.0 {
            (u as f64 * self.zero.ln()).exp()
        } else if u == 0 {
            1.0
        } else {
            0.0
        }
    }

    pub fn as_matrix(&self) -> [[f64; 4]; 4] {
        let mut p = [[0.0; 4]; 4];
        p[0][1] = self.p01;
        p[0][3] = self.p03;
        p[1][1] = self.p11;
        p[1][3] = self.p13;
        p[2][0] = self.p20;
        p[2][3] = self.p23;
        p[3][0] = self.p30;
        p[3][2] = self.p32;
        p
    }
}

pub fn transition_probs(sys: &WakeupSystemParams, tr: &TrafficParams) -> TransitionProbs {
    let (p_os, p_ns) = (tr.p_os(), tr.p_ns());
    let p01 = p_os * exp_cdf(sys.t_on_bbu, tr.lambda_pc) + p_ns * exp_cdf(sys.t_on_bbu, tr.lambda_s);
    let p11 = p_os * exp_cdf(sys.t_i, tr.lambda_pc) + p_ns * exp_cdf(sys.t_i, tr.lambda_s);
    // arrival lands in the sleep span of the cycle that decodes it
    let a_pc = exp_cdf(sys.t_sl(), tr.lambda_pc);
    let a_s = exp_cdf(sys.t_sl(), tr.lambda_s);
    let p20 = ((1.0 - a_pc) * p_os + (1.0 - a_s) * p_ns) * sys.p_fa
        + (a_pc * p_os + a_s * p_ns) * (1.0 - sys.p_md);
    let zero = ((1.0 - a_pc) * (1.0 - sys.p_fa) + a_pc * sys.p_md) * p_os
        + ((1.0 - a_s) * (1.0 - sys.p_fa) + a_s * sys.p_md) * p_ns;
    let mut tp = TransitionProbs {
        p01,
        p03: 1.0 - p01,
        p11,
        p13: 1.0 - p11,
        p20,
        p23: 1.0 - p20,
        p30: 0.0,
        p32: 0.0,
        zero,
    };
    tp.p30 = tp.g(sys.n_w);
    tp.p32 = 1.0 - tp.p30;
    tp
}

/// Steady state of the embedded chain, closed form.
pub fn steady_state(tp: &TransitionProbs) -> [f64; 4] {
    let w = tp.p32 * tp.p20 + tp.p30;
    let p3 = (1.0 - tp.p11)
        / (w * (1.0 + tp.p01 - tp.p11) + (1.0 - tp.p11) * (1.0 + tp.p32));
    let p0 = p3 * w;
    let p1 = p3 * tp.p01 * w / (1.0 - tp.p11);
    let p2 = p3 * tp.p32;
    [p0, p1, p2, p3]
}

/// Steady state by solving pi P = pi, sum(pi) = 1 directly (Gaussian
/// elimination with partial pivoting on the 4x4 balance system).
pub fn steady_state_balance(tp: &TransitionProbs) -> [f64; 4] {
    let p = tp.as_matrix();
    // rows of A: (P^T - I) x = 0 for the first three, normalization last
    let mut a = [[0.0f64; 5]; 4];
    for i in 0..3 {
        for j in 0..4 {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..4 {
        a[3][j] = 1.0;
    }
    a[3][4] = 1.0;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        a.swap(col, piv);
        assert!(a[col][col] != 0.0, "singular balance system");
        for r in 0..4 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for j in col..5 {
                    a[r][j] -= f * a[col][j];
                }
            }
        }
    }
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = a[i][4] / a[i][i];
    }
    out
}

/// Mean holding times [E[w0], E[w1], w2, w3].
pub fn holding_times(sys: &WakeupSystemParams, tr: &TrafficParams) -> [f64; 4] {
    let w0 = tr.p_os() * exp_cdf(sys.t_on_bbu, tr.lambda_pc) / tr.lambda_pc
        + tr.p_ns() * exp_cdf(sys.t_on_bbu, tr.lambda_s) / tr.lambda_s;
    let ti = tr.p_os() * exp_cdf(sys.t_i, tr.lambda_pc) / tr.lambda_pc
        + tr.p_ns() * exp_cdf(sys.t_i, tr.lambda_s) / tr.lambda_s;
    let w1 = tr.eta_pc / tr.lambda_p + ti;
    [w0, w1, sys.t_on, sys.t_sl()]
}

/// int_0^T (C - t) (P_os f_pc + P_ns f_s)(t) dt for exponential densities.
pub fn integral_c_minus_t(tr: &TrafficParams, c: f64, t_up: f64) -> f64 {
    let mut out = 0.0;
    for (p_x, lam) in [(tr.p_os(), tr.lambda_pc), (tr.p_ns(), tr.lambda_s)] {
        let f = exp_cdf(t_up, lam);
        let mean_trunc = f / lam - t_up * (-lam * t_up).exp();
        out += p_x * (c * f - mean_trunc);
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum SemiMarkovError {
    #[error("closed-form steady state disagrees with balance solve by {0:e}")]
    InconsistentSteadyState(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiMarkovSolution {
    pub probs: TransitionProbs,
    pub steady: [f64; 4],
    pub holding: [f64; 4],
    /// Transitional energy (J) and time (s) per embedded step.
    pub e_t: f64,
    pub t_t: f64,
    pub avg_power: f64,
    /// System-average buffering delay weighted by (P_2 + P_3).
    pub avg_delay: f64,
    /// Mean delay per wake-triggering packet.
    pub delay_per_trigger: f64,
}

pub fn solve(
    sys: &WakeupSystemParams,
    tr: &TrafficParams,
    pw: &PowerProfile,
) -> Result<SemiMarkovSolution, SemiMarkovError> {
    sys.assert_valid(pw);
    tr.assert_valid();
    let tp = transition_probs(sys, tr);
    let steady = steady_state(&tp);
    let balance = steady_state_balance(&tp);
    let diff = steady
        .iter()
        .zip(balance.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if diff > 1e-12 {
        return Err(SemiMarkovError::InconsistentSteadyState(diff));
    }
    let holding = holding_times(sys, tr);
    let pws = [pw.pw0, pw.pw1, pw.pw2, pw.pw3];
    let e_t = steady[2] * tp.p20 * (pw.pw3 * (sys.t_of - pw.t_su) + pw.e_su)
        + steady[3] * tp.p30 * pw.e_su
        + (steady[1] * tp.p13 + steady[0] * tp.p03) * pw.e_pd;
    let t_t = steady[2] * tp.p20 * sys.t_of
        + steady[3] * tp.p30 * pw.t_su
        + (steady[1] * tp.p13 + steady[0] * tp.p03) * pw.t_pd;
    let dwell: f64 = steady
        .iter()
        .zip(holding.iter())
        .map(|(p, w)| p * w)
        .sum();
    let weighted: f64 = steady
        .iter()
        .zip(holding.iter())
        .zip(pws.iter())
        .map(|((p, w), pk)| p * w * pk)
        .sum();
    let avg_power = (e_t + weighted) / (t_t + dwell);
    let (avg_delay, delay_per_trigger) = avg_delay_parts(sys, tr, &tp, &steady);
    Ok(SemiMarkovSolution {
        probs: tp,
        steady,
        holding,
        e_t,
        t_t,
        avg_power,
        avg_delay,
        delay_per_trigger,
    })
}

pub fn avg_power(sys: &WakeupSystemParams, tr: &TrafficParams, pw: &PowerProfile) -> f64 {
    solve(sys, tr, pw).expect("steady-state solve").avg_power
}

/// (system-average delay, per-trigger-packet delay).
pub fn avg_delay(sys: &WakeupSystemParams, tr: &TrafficParams) -> (f64, f64) {
    let tp = transition_probs(sys, tr);
    let steady = steady_state(&tp);
    avg_delay_parts(sys, tr, &tp, &steady)
}

fn avg_delay_parts(
    sys: &WakeupSystemParams,
    tr: &TrafficParams,
    tp: &TransitionProbs,
    steady: &[f64; 4],
) -> (f64, f64) {
    let t_sl = sys.t_sl();
    // buffering cost of a packet that lands in the sleep span with u-1
    // empty cycles already elapsed: misdetections chain until decode or
    // the forced wake at N_w
    let d1 = |u: u32| -> f64 {
        let nrem = sys.n_w - u + 1;
        let mut acc = 0.0;
        for n in 1..=nrem {
            acc += (1.0 - sys.p_md)
                * sys.p_md.powi(n as i32 - 1)
                * integral_c_minus_t(tr, n as f64 * sys.t_c + sys.t_of, t_sl);
        }
        acc += sys.p_md.powi(nrem as i32)
            * integral_c_minus_t(tr, nrem as f64 * sys.t_c + sys.t_of, t_sl);
        acc
    };
    let d2 = integral_c_minus_t(tr, sys.t_of, sys.t_of);
    let mut num = 0.0;
    for u in 1..=sys.n_w {
        num += tp.g(u - 1) * d1(u);
    }
    num += tp.g(sys.n_w) * d2;
    let system = (steady[2] + steady[3]) * num;
    let mut den = 0.0;
    for u in 1..=sys.n_w {
        den += tp.g(u - 1) * tr.mixture_cdf(t_sl);
    }
    den += tp.g(sys.n_w) * tr.mixture_cdf(sys.t_of);
    (system, num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (WakeupSystemParams, TrafficParams, PowerProfile) {
        (
            WakeupSystemParams::default(),
            TrafficParams::default(),
            PowerProfile::default(),
        )
    }

    #[test]
    fn transition_probs_table_defaults() {
        let (sys, tr, _) = defaults();
        let tp = transition_probs(&sys, &tr);
        assert!((tp.p01 - 0.0041590450940611643).abs() < 1e-16);
        assert!((tp.p03 - 0.99584095490593882).abs() < 1e-14);
        assert!((tp.p11 - 0.048562885346681614).abs() < 1e-15);
        assert!((tp.p13 - 0.95143711465331837).abs() < 1e-14);
        assert!((tp.p20 - 0.13265744930511769).abs() < 1e-14);
        assert!((tp.p23 - 0.86734255069488231).abs() < 1e-14);
        assert!((tp.p30 - 0.00019563167350000152).abs() < 1e-15);
        assert!((tp.p32 - 0.99980436832649999).abs() < 1e-14);
        assert!((tp.zero - 0.86734255069488231).abs() < 1e-14);
    }

    #[test]
    fn steady_state_table_defaults() {
        let (sys, tr, _) = defaults();
        let p = steady_state(&transition_probs(&sys, &tr));
        let expect = [
            0.062266254353419079,
            0.00027218631237495311,
            0.46868492588845367,
            0.46877663344575238,
        ];
        for (a, b) in p.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holding_times_table_defaults() {
        let (sys, tr, _) = defaults();
        let w = holding_times(&sys, &tr);
        let expect = [0.00099791874567177496, 0.51170571108262453, 0.001, 0.009];
        for (a, b) in w.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn power_and_delay_table_defaults() {
        let (sys, tr, pw) = defaults();
        let sol = solve(&sys, &tr, &pw).unwrap();
        assert!((sol.avg_power - 0.11831421509011131).abs() < 1e-13);
        assert!((sol.avg_delay - 0.0053497658780160533).abs() < 1e-14);
        assert!((sol.delay_per_trigger - 0.02063417714328504).abs() < 1e-13);
    }

    #[test]
    fn grid_anchor_values() {
        let (_, tr, pw) = defaults();
        let cases = [
            (15e-3, 40, 0.098624134690751236, 0.023229333881339308),
            (50e-3, 12, 0.066115619481747281, 0.041917920918168636),
            (100e-3, 6, 0.054654670115497191, 0.070292009541753325),
            (250e-3, 2, 0.041767434934986976, 0.16587026654402218),
        ];
        for (t_c, n_w, pow_ref, dtr_ref) in cases {
            let sys = WakeupSystemParams {
                t_c,
                n_w,
                ..Default::default()
            };
            let sol = solve(&sys, &tr, &pw).unwrap();
            assert!(
                (sol.avg_power - pow_ref).abs() < 1e-12,
                "t_c={t_c}: {} vs {pow_ref}",
                sol.avg_power
            );
            assert!(
                (sol.delay_per_trigger - dtr_ref).abs() < 1e-12,
                "t_c={t_c}: {} vs {dtr_ref}",
                sol.delay_per_trigger
            );
        }
    }

    #[test]
    fn g_is_geometric_in_zero_prob() {
        let (sys, tr, _) = defaults();
        let tp = transition_probs(&sys, &tr);
        assert_eq!(tp.g(0), 1.0);
        assert!((tp.g(3) - tp.zero.powi(3)).abs() < 1e-16);
    }

    #[test]
    fn no_traffic_limit() {
        // P_md = P_fa = 0 and vanishing rates: never a detection, G -> 1
        let tr = TrafficParams {
            lambda_s: 1e-9,
            lambda_pc: 1e-9,
            ..Default::default()
        };
        let sys = WakeupSystemParams {
            p_fa: 0.0,
            p_md: 0.0,
            ..Default::default()
        };
        let tp = transition_probs(&sys, &tr);
        assert!(tp.p20 < 1e-8);
        assert!(tp.p30 > 1.0 - 1e-6);
    }

    #[test]
    fn w0_limit_large_timer() {
        let tr = TrafficParams::default();
        let sys = WakeupSystemParams {
            t_on_bbu: 1e6,
            ..Default::default()
        };
        let w = holding_times(&sys, &tr);
        let lim = tr.p_os() / tr.lambda_pc + tr.p_ns() / tr.lambda_s;
        assert!((w[0] - lim).abs() < 1e-9 * lim);
    }

    #[test]
    fn zero_inactivity_timer_kills_ti() {
        let tr = TrafficParams::default();
        let sys = WakeupSystemParams {
            t_i: 0.0,
            ..Default::default()
        };
        let w = holding_times(&sys, &tr);
        assert_eq!(w[1], tr.eta_pc / tr.lambda_p);
    }
}
