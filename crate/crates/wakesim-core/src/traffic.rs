//! ETSI bursty packet-traffic model: Poisson session arrivals, geometric
//! call/packet counts (support {1, 2, ...}), exponential gaps inside.
//!
//! Sessions renew after their last packet, so the next-session gap is
//! measured from the end of the previous burst, matching the P_os/P_ns
//! branching of the power model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrafficParams {
    /// Session arrival rate (1/s).
    pub lambda_s: f64,
    /// Packet-call arrival rate within a session (1/s).
    pub lambda_pc: f64,
    /// Packet arrival rate within a call (1/s).
    pub lambda_p: f64,
    /// Mean packet calls per session.
    pub eta_s: f64,
    /// Mean packets per call.
    pub eta_pc: f64,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            lambda_s: 1.0 / 60.0,
            lambda_pc: 5.0,
            lambda_p: 100.0,
            eta_s: 6.0,
            eta_pc: 50.0,
        }
    }
}

impl TrafficParams {
    /// Probability that the next call starts a new session.
    pub fn p_ns(&self) -> f64 {
        1.0 / self.eta_s
    }

    pub fn p_os(&self) -> f64 {
        1.0 - self.p_ns()
    }

    /// CDF of the idle gap: ongoing-session and new-session mixture.
    pub fn mixture_cdf(&self, t: f64) -> f64 {
        self.p_os() * exp_cdf(t, self.lambda_pc) + self.p_ns() * exp_cdf(t, self.lambda_s)
    }

    pub fn assert_valid(&self) {
        assert!(
            self.lambda_s > 0.0
                && self.lambda_pc > 0.0
                && self.lambda_p > 0.0
                && self.eta_s >= 1.0
                && self.eta_pc >= 1.0,
            "traffic rates must be positive and means >= 1"
        );
    }
}

/// 1 - exp(-lambda t).
pub fn exp_cdf(t: f64, lambda: f64) -> f64 {
    assert!(t >= 0.0, "exp_cdf needs t >= 0 (got {t})");
    assert!(lambda > 0.0, "exp_cdf needs lambda > 0 (got {lambda})");
    -(-lambda * t).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketArrival {
    /// Arrival time in seconds.
    pub t: f64,
    pub session: u32,
    /// Globally unique call id (monotone across sessions).
    pub call: u32,
    /// Packet index within its call.
    pub packet: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalTimeline {
    pub packets: Vec<PacketArrival>,
    pub horizon: f64,
}

impl ArrivalTimeline {
    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    /// Last arrival instant of each call, indexed by call id. Calls whose
    /// packets were all cut by the horizon get f64::NEG_INFINITY.
    pub fn call_last_times(&self) -> Vec<f64> {
        let n = self
            .packets
            .iter()
            .map(|p| p.call as usize + 1)
            .max()
            .unwrap_or(0);
        let mut last = vec![f64::NEG_INFINITY; n];
        for p in &self.packets {
            let c = p.call as usize;
            if p.t > last[c] {
                last[c] = p.t;
            }
        }
        last
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "timestamp,session_id,call_id,packet_id")?;
        for p in &self.packets {
            writeln!(w, "{:?},{},{},{}", p.t, p.session, p.call, p.packet)?;
        }
        Ok(())
    }
}

/// Geometric on {1, 2, ...} with the given mean (inverse-CDF method).
fn sample_geometric(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    let p = 1.0 / mean;
    if p >= 1.0 {
        return 1;
    }
    let mut u: f64 = rng.gen();
    while u <= 0.0 {
        u = rng.gen();
    }
    1 + (u.ln() / (1.0 - p).ln()) as u64
}

/// Sample session/call/packet arrivals on [0, duration]. Counts drawn for a
/// burst are honored until the horizon cuts it off; packets before the cut
/// are kept. Deterministic per seed.
pub fn generate_timeline(params: &TrafficParams, duration: f64, seed: u64) -> ArrivalTimeline {
    params.assert_valid();
    assert!(duration >= 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp_s = Exp::new(params.lambda_s).unwrap();
    let exp_pc = Exp::new(params.lambda_pc).unwrap();
    let exp_p = Exp::new(params.lambda_p).unwrap();

    let mut packets = Vec::new();
    let mut t = 0.0f64;
    let mut call_id: u32 = 0;
    let mut session_id: u32 = 0;
    let mut stop = false;
    while !stop {
        t += exp_s.sample(&mut rng);
        if t > duration {
            break;
        }
        let n_calls = sample_geometric(&mut rng, params.eta_s);
        for c in 0..n_calls {
            if c > 0 {
                t += exp_pc.sample(&mut rng);
            }
            if t > duration {
                stop = true;
                break;
            }
            let n_pk = sample_geometric(&mut rng, params.eta_pc);
            for k in 0..n_pk {
                if k > 0 {
                    t += exp_p.sample(&mut rng);
                }
                if t > duration {
                    stop = true;
                    break;
                }
                packets.push(PacketArrival {
                    t,
                    session: session_id,
                    call: call_id,
                    packet: k as u32,
                });
            }
            call_id += 1;
            if stop {
                break;
            }
        }
        session_id += 1;
    }
    ArrivalTimeline {
        packets,
        horizon: duration,
    }
}
