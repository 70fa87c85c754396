//! Discrete-event simulator of the wake-up state machine and a DRX
//! baseline, over sampled traffic timelines.
//!
//! NM semantics mirror the analytic model's state structure:
//!   - the w-cycle grid is local: every wake episode restarts the cycle
//!     phase, so each decode is preceded by a full t_sl sleep + t_on
//!     monitoring span;
//!   - a decoded WI (or the N_w forced wake) pays the wake overhead, then
//!     serves the whole buffer at once;
//!   - service holds S1 for the remainder of every served call (packets of
//!     a call the device woke into are served promptly), chaining calls
//!     whose gap is within T_I, then pays power-down;
//!   - after a wake whose last served call had already ended, the device
//!     sits in S0 for up to T_ON before powering down.
//!
//! Delay statistics: buffered packets only. The trigger statistic takes,
//! per wake caused by a non-empty buffer, the oldest buffered arrival at
//! the decode gate (the packet that started the wake attempt).

use crate::seed::derive_seed;
use crate::semi_markov::{PowerProfile, WakeupSystemParams};
use crate::traffic::{generate_timeline, PacketArrival, TrafficParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One WI decode at a w-cycle boundary; returns true when the receiver
/// reads WI = 1.
pub trait WiDecider {
    fn decide(&mut self, wi_present: bool, rng: &mut ChaCha8Rng) -> bool;
}

/// Bernoulli decode outcomes at fixed error rates.
pub struct FixedRates {
    pub p_fa: f64,
    pub p_md: f64,
}

impl WiDecider for FixedRates {
    fn decide(&mut self, wi_present: bool, rng: &mut ChaCha8Rng) -> bool {
        let u: f64 = rng.gen();
        if wi_present {
            u >= self.p_md
        } else {
            u < self.p_fa
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum DetectionMode {
    /// Sample WI outcomes from the configured P_fa / P_md.
    FixedRates,
    /// Run the full receiver chain per decode at this SNR (wire a decider
    /// via [`simulate_nm_with`]).
    CoupledPhy { snr_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub sys: WakeupSystemParams,
    pub profile: PowerProfile,
    pub traffic: TrafficParams,
    pub duration: f64,
    pub seed: u64,
    pub detection: DetectionMode,
}

/// Time fractions per power state, transitional phases included.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Occupancy {
    /// S0: waiting on the active-on timer.
    pub active_on: f64,
    /// S1: serving / inactivity timer.
    pub active: f64,
    /// S2 / DRX on-duration monitoring.
    pub monitor: f64,
    /// S3 / DRX sleep.
    pub sleep: f64,
    /// Wake overhead (t_of legs; DRX re-sync).
    pub wake: f64,
    pub startup: f64,
    pub shutdown: f64,
}

impl Occupancy {
    fn sum(&self) -> f64 {
        self.active_on + self.active + self.monitor + self.sleep + self.wake + self.startup
            + self.shutdown
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimCounts {
    pub decodes: u64,
    pub detections: u64,
    pub false_alarms: u64,
    pub missed: u64,
    pub forced_wakes: u64,
    pub packets_prompt: u64,
    pub packets_buffered: u64,
    pub triggers: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// Total energy over the configured duration.
    pub avg_power: f64,
    /// Mean gate-to-service delay of wake-triggering packets.
    pub avg_trigger_delay: f64,
    /// Mean delay over all buffered packets.
    pub avg_buffer_delay: f64,
    pub occupancy: Occupancy,
    pub counts: SimCounts,
    pub energy: f64,
    /// Trace end; the final wake episode may overrun the duration.
    pub sim_time: f64,
}

struct Tally {
    t: Occupancy,
    e: Occupancy,
}

impl Tally {
    fn new() -> Self {
        Tally {
            t: Occupancy::default(),
            e: Occupancy::default(),
        }
    }
}

struct NmSim<'a> {
    pkts: &'a [PacketArrival],
    call_last: &'a [f64],
    sys: WakeupSystemParams,
    pw: PowerProfile,
    i: usize,
    buf: Vec<usize>,
    tally: Tally,
    counts: SimCounts,
    d_all: f64,
    d_trig: f64,
    empty: u32,
}

impl<'a> NmSim<'a> {
    fn absorb(&mut self, upto: f64) {
        while self.i < self.pkts.len() && self.pkts[self.i].t <= upto {
            self.buf.push(self.i);
            self.i += 1;
        }
    }

    /// Serve the buffer at `at`; returns served call ids in arrival order.
    fn serve_all(&mut self, at: f64) -> Vec<u32> {
        let mut calls = Vec::with_capacity(self.buf.len());
        for &j in &self.buf {
            let p = &self.pkts[j];
            self.d_all += at - p.t;
            self.counts.packets_buffered += 1;
            calls.push(p.call);
        }
        self.buf.clear();
        calls
    }

    /// S1 hold from `start` over the served calls, chaining follow-ups
    /// within T_I; returns the power-down exit time.
    fn service_episode(&mut self, start: f64, calls: &[u32]) -> f64 {
        let mut active_until = start;
        for &cu in calls {
            active_until = active_until.max(self.call_last[cu as usize]);
        }
        loop {
            while self.i < self.pkts.len() && self.pkts[self.i].t <= active_until {
                let p = &self.pkts[self.i];
                active_until = active_until.max(self.call_last[p.call as usize]);
                self.counts.packets_prompt += 1;
                self.i += 1;
            }
            if self.i < self.pkts.len() && self.pkts[self.i].t <= active_until + self.sys.t_i {
                let p = &self.pkts[self.i];
                active_until = self.call_last[p.call as usize].max(p.t);
                self.counts.packets_prompt += 1;
                self.i += 1;
                continue;
            }
            break;
        }
        let pd_start = active_until + self.sys.t_i;
        self.tally.t.active += pd_start - start;
        self.tally.e.active += self.pw.pw1 * (pd_start - start);
        self.tally.t.shutdown += self.pw.t_pd;
        self.tally.e.shutdown += self.pw.e_pd;
        pd_start + self.pw.t_pd
    }

    /// S0 with an empty buffer: wait up to T_ON for traffic.
    fn idle_wait(&mut self, at: f64) -> f64 {
        if self.i < self.pkts.len() && self.pkts[self.i].t <= at + self.sys.t_on_bbu {
            let p = self.pkts[self.i];
            self.tally.t.active_on += p.t - at;
            self.tally.e.active_on += self.pw.pw0 * (p.t - at);
            self.counts.packets_prompt += 1;
            self.i += 1;
            return self.service_episode(p.t, &[p.call]);
        }
        self.tally.t.active_on += self.sys.t_on_bbu;
        self.tally.e.active_on += self.pw.pw0 * self.sys.t_on_bbu;
        self.tally.t.shutdown += self.pw.t_pd;
        self.tally.e.shutdown += self.pw.e_pd;
        at + self.sys.t_on_bbu + self.pw.t_pd
    }

    /// Wake overhead leg starting at decode instant `d`, then buffer
    /// service and re-entry.
    fn wake_leg(&mut self, d: f64, dur: f64, e_leg: f64, startup_only: bool, trigger: bool) -> f64 {
        let at = d + dur;
        if startup_only {
            self.tally.t.startup += dur;
            self.tally.e.startup += e_leg;
        } else {
            self.tally.t.wake += dur;
            self.tally.e.wake += e_leg;
        }
        if trigger && !self.buf.is_empty() {
            let t0 = self
                .buf
                .iter()
                .map(|&j| self.pkts[j].t)
                .fold(f64::INFINITY, f64::min);
            self.d_trig += at - t0;
            self.counts.triggers += 1;
        }
        self.absorb(at);
        self.empty = 0;
        let calls = self.serve_all(at);
        match calls.last() {
            // the wake landed inside the last served call: keep serving it
            Some(&cu) if self.call_last[cu as usize] > at => self.service_episode(at, &calls),
            _ => self.idle_wait(at),
        }
    }
}

/// NM simulation with WI outcomes drawn at the configured fixed rates.
pub fn simulate_nm(cfg: &SimConfig) -> SimStats {
    match cfg.detection {
        DetectionMode::FixedRates => {}
        DetectionMode::CoupledPhy { .. } => {
            panic!("coupled-PHY mode needs a PHY decider; use simulate_nm_with")
        }
    }
    let mut decider = FixedRates {
        p_fa: cfg.sys.p_fa,
        p_md: cfg.sys.p_md,
    };
    simulate_nm_with(cfg, &mut decider)
}

pub fn simulate_nm_with(cfg: &SimConfig, decider: &mut dyn WiDecider) -> SimStats {
    cfg.sys.assert_valid(&cfg.profile);
    let timeline = generate_timeline(&cfg.traffic, cfg.duration, derive_seed(cfg.seed, 0, 0));
    let call_last = timeline.call_last_times();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1, 0));
    let horizon = cfg.duration;
    let (sys, pw) = (cfg.sys, cfg.profile);
    let mut sim = NmSim {
        pkts: &timeline.packets,
        call_last: &call_last,
        sys,
        pw,
        i: 0,
        buf: Vec::new(),
        tally: Tally::new(),
        counts: SimCounts::default(),
        d_all: 0.0,
        d_trig: 0.0,
        empty: 0,
    };

    let t3 = sys.t_sl();
    let mut now = 0.0f64;
    while now < horizon {
        let d = now + sys.t_c;
        if d > horizon {
            let frac = horizon - now;
            let slp = frac.min(t3);
            sim.tally.t.sleep += slp;
            sim.tally.e.sleep += pw.pw3 * slp;
            let mon = (frac - t3).max(0.0);
            sim.tally.t.monitor += mon;
            sim.tally.e.monitor += pw.pw2 * mon;
            now = horizon;
            break;
        }
        sim.tally.t.sleep += t3;
        sim.tally.e.sleep += pw.pw3 * t3;
        sim.tally.t.monitor += sys.t_on;
        sim.tally.e.monitor += pw.pw2 * sys.t_on;
        sim.absorb(d);
        sim.counts.decodes += 1;
        let present = !sim.buf.is_empty();
        let wi = decider.decide(present, &mut rng);
        now = if present {
            if !wi {
                sim.counts.missed += 1;
                sim.empty += 1;
                if sim.empty >= sys.n_w {
                    sim.counts.forced_wakes += 1;
                    sim.wake_leg(d, pw.t_su, pw.e_su, true, true)
                } else {
                    d
                }
            } else {
                sim.counts.detections += 1;
                let e_of = pw.pw3 * (sys.t_of - pw.t_su) + pw.e_su;
                sim.wake_leg(d, sys.t_of, e_of, false, true)
            }
        } else if wi {
            sim.counts.false_alarms += 1;
            let e_of = pw.pw3 * (sys.t_of - pw.t_su) + pw.e_su;
            sim.wake_leg(d, sys.t_of, e_of, false, false)
        } else {
            sim.empty += 1;
            if sim.empty >= sys.n_w {
                sim.counts.forced_wakes += 1;
                sim.wake_leg(d, pw.t_su, pw.e_su, true, false)
            } else {
                d
            }
        };
    }

    finish_stats(sim.tally, sim.counts, sim.d_all, sim.d_trig, now, horizon)
}

fn finish_stats(
    tally: Tally,
    counts: SimCounts,
    d_all: f64,
    d_trig: f64,
    end: f64,
    horizon: f64,
) -> SimStats {
    let sim_time = tally.t.sum();
    debug_assert!(
        (sim_time - end).abs() <= 1e-9 * end.max(1.0),
        "state times {sim_time} disagree with trace end {end}"
    );
    let energy = tally.e.sum();
    let inv = if sim_time > 0.0 { 1.0 / sim_time } else { 0.0 };
    let occupancy = Occupancy {
        active_on: tally.t.active_on * inv,
        active: tally.t.active * inv,
        monitor: tally.t.monitor * inv,
        sleep: tally.t.sleep * inv,
        wake: tally.t.wake * inv,
        startup: tally.t.startup * inv,
        shutdown: tally.t.shutdown * inv,
    };
    SimStats {
        avg_power: if horizon > 0.0 { energy / horizon } else { 0.0 },
        avg_trigger_delay: if counts.triggers > 0 {
            d_trig / counts.triggers as f64
        } else {
            0.0
        },
        avg_buffer_delay: if counts.packets_buffered > 0 {
            d_all / counts.packets_buffered as f64
        } else {
            0.0
        },
        occupancy,
        counts,
        energy,
        sim_time,
    }
}

/// Per-phase DRX parameters (Table-II style).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DrxPhase {
    pub sleep_power: f64,
    pub t_su: f64,
    pub t_sync: f64,
    pub t_pd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DrxConfig {
    pub short_cycle: f64,
    /// Fixed at 4x the short cycle.
    pub long_cycle: f64,
    /// Time spent in short cycles after activity (16 ms standard).
    pub short_drx_timer: f64,
    pub on_duration: f64,
    pub inactivity_timer: f64,
    pub active_power: f64,
    pub short: DrxPhase,
    pub long_phase: DrxPhase,
}

impl DrxConfig {
    pub fn with_short_cycle(t_sc: f64) -> Self {
        DrxConfig {
            short_cycle: t_sc,
            long_cycle: 4.0 * t_sc,
            short_drx_timer: 16e-3,
            on_duration: 1e-3,
            inactivity_timer: 12e-3,
            active_power: 0.850,
            short: DrxPhase {
                sleep_power: 0.395,
                t_su: 1e-3,
                t_sync: 0.0,
                t_pd: 1e-3,
            },
            long_phase: DrxPhase {
                sleep_power: 0.0098,
                t_su: 15e-3,
                t_sync: 10e-3,
                t_pd: 10e-3,
            },
        }
    }

    pub fn assert_valid(&self) {
        assert!(
            (self.long_cycle - 4.0 * self.short_cycle).abs() <= 1e-12 * self.long_cycle,
            "long cycle must be 4x the short cycle"
        );
        assert!(self.short_cycle > self.short.t_su + self.on_duration + self.short.t_pd);
    }
}

impl Default for DrxConfig {
    fn default() -> Self {
        Self::with_short_cycle(15e-3)
    }
}

/// Connected-mode DRX baseline. Start-up ramps at the midpoint of sleep
/// and active power; power-down drops to sleep power immediately. A wake
/// that finds buffered arrivals pays the phase's re-sync time at active
/// power, serves, then chains arrivals within the inactivity timer and
/// pays a full T_I tail. Delay is measured to on-duration start.
pub fn simulate_drx(drx: &DrxConfig, tr: &TrafficParams, duration: f64, seed: u64) -> SimStats {
    drx.assert_valid();
    let timeline = generate_timeline(tr, duration, derive_seed(seed, 0, 0));
    let pkts = &timeline.packets;
    let n = pkts.len();
    let act = drx.active_power;
    let mut tally = Tally::new();
    let mut counts = SimCounts::default();
    let mut d_all = 0.0f64;
    let mut d_trig = 0.0f64;
    let mut now = 0.0f64;
    let mut i = 0usize;
    let n_short = ((drx.short_drx_timer / drx.short_cycle).round() as u64).max(1);

    while now < duration && i < n {
        // DRX phase: cycle until an on-duration finds data
        let mut k = 0u64;
        let mut woke = false;
        while !woke && now < duration && i < n {
            let (cyc, clen) = if k < n_short {
                (&drx.short, drx.short_cycle)
            } else {
                (&drx.long_phase, drx.long_cycle)
            };
            k += 1;
            let slp = (clen - cyc.t_su - drx.on_duration - cyc.t_pd).max(0.0);
            let t_on_start = now + slp + cyc.t_su;
            let su_pw = (cyc.sleep_power + act) / 2.0;
            tally.t.sleep += slp;
            tally.e.sleep += slp * cyc.sleep_power;
            tally.t.startup += cyc.t_su;
            tally.e.startup += cyc.t_su * su_pw;
            // the on-duration energy is always paid; on a served wake the
            // decode lands at the window start and the clock moves straight
            // into re-sync, so monitor time only accrues when idle
            tally.e.monitor += drx.on_duration * act;
            counts.decodes += 1;
            let mut served = false;
            while i < n && pkts[i].t <= t_on_start {
                let d = t_on_start - pkts[i].t;
                d_all += d;
                counts.packets_buffered += 1;
                if pkts[i].packet == 0 {
                    d_trig += d;
                    counts.triggers += 1;
                }
                served = true;
                i += 1;
            }
            if served {
                counts.detections += 1;
                tally.t.wake += cyc.t_sync;
                tally.e.wake += cyc.t_sync * act;
                now = t_on_start + cyc.t_sync;
                woke = true;
            } else {
                tally.t.monitor += drx.on_duration;
                tally.t.shutdown += cyc.t_pd;
                tally.e.shutdown += cyc.t_pd * cyc.sleep_power;
                now += clen;
            }
        }
        if !woke {
            break;
        }
        // active: chain arrivals with gaps <= T_I, then a T_I tail
        let a0 = now;
        while i < n && pkts[i].t <= now + drx.inactivity_timer {
            now = now.max(pkts[i].t);
            counts.packets_prompt += 1;
            i += 1;
        }
        now += drx.inactivity_timer;
        tally.t.active += now - a0;
        tally.e.active += (now - a0) * act;
    }
    if now < duration {
        let rest = duration - now;
        tally.t.sleep += rest;
        tally.e.sleep += rest * drx.long_phase.sleep_power;
        now = duration;
    }
    finish_stats(tally, counts, d_all, d_trig, now, duration)
}
