//! Delay-based congestion controller (LEDBAT, as used by uTP).
//!
//! The sender estimates queuing delay as the gap between each one-way-delay
//! sample and the minimum OWD ever observed, then steers its window so that
//! estimate sits at a fixed target: below target the window grows, above it
//! the window shrinks, proportionally to the distance. No slow-start phase —
//! the flow begins at two segments and lets the proportional controller do
//! the ramping, which is exactly what makes it yield to loss-based traffic.

#[derive(Debug, Clone)]
pub struct LedbatState {
    /// Congestion window in bytes.
    pub cwnd: f64,
    mss: f64,
    /// Queuing-delay setpoint in µs (100 ms default).
    pub target_us: f64,
    gain: f64,
    /// All-time minimum OWD (µs); virtual time has no drift or route
    /// changes, so no rolling window is needed.
    base_delay_us: f64,
    /// Most recent OWD sample (µs).
    pub last_owd_us: f64,
    /// Loss halving applies at most once per RTT: losses below this seq
    /// belong to an already-punished flight.
    halve_guard_seq: u64,
}

impl LedbatState {
    pub const INIT_CWND_MSS: f64 = 2.0;

    pub fn new(mss: u32, target_us: u64, gain: f64) -> Self {
        let mss = f64::from(mss);
        LedbatState {
            cwnd: Self::INIT_CWND_MSS * mss,
            mss,
            target_us: target_us as f64,
            gain,
            base_delay_us: f64::INFINITY,
            last_owd_us: 0.0,
            halve_guard_seq: 0,
        }
    }

    pub fn mss(&self) -> f64 {
        self.mss
    }

    /// Estimated queuing delay of the latest sample, µs.
    pub fn queuing_delay_us(&self) -> f64 {
        if self.base_delay_us.is_finite() {
            self.last_owd_us - self.base_delay_us
        } else {
            0.0
        }
    }

    pub fn base_delay_us(&self) -> f64 {
        self.base_delay_us
    }

    /// Window update on a cumulative ack of `bytes_acked` new bytes whose
    /// triggering data packet measured `owd_us` on the forward path.
    pub fn on_ack(&mut self, owd_us: f64, bytes_acked: f64) {
        debug_assert!(owd_us >= 0.0 && bytes_acked > 0.0);
        self.base_delay_us = self.base_delay_us.min(owd_us);
        self.last_owd_us = owd_us;
        let qd = owd_us - self.base_delay_us;
        let off_target = 1.0 - qd / self.target_us;
        self.cwnd += self.gain * off_target * self.mss * bytes_acked / self.cwnd;
        self.cwnd = self.cwnd.max(self.mss);
    }

    /// Multiplicative decrease on loss, at most once per RTT: returns true
    /// if this loss actually halved the window. `lost_seq` is the missing
    /// byte, `snd_nxt` the next byte to be sent; losses below the guard seq
    /// were caused by a flight sent before the previous halving.
    pub fn on_loss(&mut self, lost_seq: u64, snd_nxt: u64) -> bool {
        if lost_seq < self.halve_guard_seq {
            return false;
        }
        self.cwnd = (self.cwnd / 2.0).max(self.mss);
        self.halve_guard_seq = snd_nxt;
        true
    }

    /// Retransmission timeout: collapse to one segment.
    pub fn on_timeout(&mut self, snd_nxt: u64) {
        self.cwnd = self.mss;
        self.halve_guard_seq = snd_nxt;
    }

    /// After an idle period of at least one RTO the old window is stale;
    /// restart from the initial window (never upward).
    pub fn on_idle_restart(&mut self) {
        self.cwnd = self.cwnd.min(Self::INIT_CWND_MSS * self.mss);
    }
}
