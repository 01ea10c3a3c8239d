//! Loss-based congestion controller: NewReno AIMD, with an optional Cubic
//! window-growth mode for sensitivity experiments.
//!
//! Phase machine: SlowStart (exponential, cwnd < ssthresh) →
//! CongestionAvoidance (additive) ⇄ FastRecovery (after triple-dup, window
//! deflated to ssthresh, then inflated one segment per further duplicate ack
//! so transmission continues at roughly half rate while holes fill —
//! RFC 6582. Retransmission timeouts collapse to one segment and re-enter
//! SlowStart. The duplicate-ack counting and recovery-point bookkeeping that
//! *detect* these events live with the reliable-stream state; this type only
//! answers how the window reacts.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcpPhase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum TcpFlavor {
    #[default]
    NewReno,
    Cubic,
}

/// Cubic constants per RFC 8312: scaling C and multiplicative decrease β.
const CUBIC_C: f64 = 0.4;
const CUBIC_BETA: f64 = 0.7;

#[derive(Debug, Clone)]
pub struct TcpState {
    pub cwnd: f64,
    pub ssthresh: f64,
    pub phase: TcpPhase,
    mss: f64,
    flavor: TcpFlavor,
    // Cubic epoch: window at last reduction (in mss units), epoch start
    // (µs of virtual time), and the plateau offset K (seconds).
    w_max_mss: f64,
    epoch_start_us: Option<f64>,
    k: f64,
}

impl TcpState {
    pub const INIT_CWND_MSS: f64 = 2.0;

    pub fn new(mss: u32, flavor: TcpFlavor) -> Self {
        let mss = f64::from(mss);
        TcpState {
            cwnd: Self::INIT_CWND_MSS * mss,
            ssthresh: f64::INFINITY,
            phase: TcpPhase::SlowStart,
            mss,
            flavor,
            w_max_mss: 0.0,
            epoch_start_us: None,
            k: 0.0,
        }
    }

    pub fn mss(&self) -> f64 {
        self.mss
    }

    fn cubic_target_mss(&self, t_secs: f64) -> f64 {
        let d = t_secs - self.k;
        CUBIC_C * d * d * d + self.w_max_mss
    }

    /// Ack of `bytes_acked` new bytes. `now_us`/`srtt_us` feed the Cubic
    /// time curve and are ignored by NewReno.
    pub fn on_ack(&mut self, bytes_acked: f64, now_us: f64, srtt_us: f64) {
        debug_assert!(bytes_acked > 0.0);
        match self.phase {
            TcpPhase::FastRecovery => {
                // Window already deflated to ssthresh; no growth and no
                // inflation until recovery exits.
            }
            TcpPhase::SlowStart => {
                self.cwnd += bytes_acked;
                if self.cwnd >= self.ssthresh {
                    self.cwnd = self.ssthresh;
                    self.enter_avoidance(now_us);
                }
            }
            TcpPhase::CongestionAvoidance => match self.flavor {
                TcpFlavor::NewReno => {
                    self.cwnd += self.mss * bytes_acked / self.cwnd;
                }
                TcpFlavor::Cubic => {
                    let epoch = *self.epoch_start_us.get_or_insert(now_us);
                    let t = (now_us - epoch + srtt_us) / 1e6;
                    let target = self.cubic_target_mss(t) * self.mss;
                    if target > self.cwnd {
                        self.cwnd += (target - self.cwnd) * bytes_acked / self.cwnd;
                    } else {
                        // below the curve: probe gently, ~1 segment per 100 RTTs
                        self.cwnd += self.mss * bytes_acked / (100.0 * self.cwnd);
                    }
                }
            },
        }
    }

    fn enter_avoidance(&mut self, now_us: f64) {
        self.phase = TcpPhase::CongestionAvoidance;
        if self.flavor == TcpFlavor::Cubic {
            self.epoch_start_us = Some(now_us);
            if self.w_max_mss < self.cwnd / self.mss {
                // no prior loss reference: start the curve flat from here
                self.w_max_mss = self.cwnd / self.mss;
                self.k = 0.0;
            }
        }
    }

    fn reduce(&mut self) {
        let beta = match self.flavor {
            TcpFlavor::NewReno => 0.5,
            TcpFlavor::Cubic => CUBIC_BETA,
        };
        self.w_max_mss = self.cwnd / self.mss;
        self.ssthresh = (self.cwnd * beta).max(2.0 * self.mss);
        if self.flavor == TcpFlavor::Cubic {
            self.k = (self.w_max_mss * (1.0 - CUBIC_BETA) / CUBIC_C).cbrt();
            self.epoch_start_us = None; // restarted on next avoidance ack
        }
    }

    /// Third duplicate ack: deflate to ssthresh and hold in FastRecovery.
    pub fn on_triple_dup(&mut self) {
        self.reduce();
        self.cwnd = self.ssthresh;
        self.phase = TcpPhase::FastRecovery;
    }

    /// Further duplicate ack while recovering: one more segment has left the
    /// network, so inflate by one to let a new segment out.
    pub fn on_dup_in_recovery(&mut self) {
        debug_assert_eq!(self.phase, TcpPhase::FastRecovery);
        self.cwnd += self.mss;
    }

    /// Partial ack (cumulative ack advanced but short of the recovery
    /// point): deflate by what was acked, add back one segment.
    pub fn on_partial_ack(&mut self, bytes_acked: f64) {
        debug_assert_eq!(self.phase, TcpPhase::FastRecovery);
        self.cwnd = (self.cwnd - bytes_acked + self.mss).max(self.mss);
    }

    /// Cumulative ack covering the recovery point: deflate the window back
    /// to ssthresh and resume avoidance.
    pub fn on_recovery_exit(&mut self, now_us: f64) {
        debug_assert_eq!(self.phase, TcpPhase::FastRecovery);
        self.cwnd = self.ssthresh;
        self.enter_avoidance(now_us);
    }

    /// Retransmission timeout: collapse to one segment, back to SlowStart.
    pub fn on_timeout(&mut self) {
        self.reduce();
        self.cwnd = self.mss;
        self.phase = TcpPhase::SlowStart;
    }

    /// After an idle period of at least one RTO, restart from the initial
    /// window (never upward) and let SlowStart rebuild.
    pub fn on_idle_restart(&mut self) {
        self.cwnd = self.cwnd.min(Self::INIT_CWND_MSS * self.mss);
        if self.cwnd < self.ssthresh {
            self.phase = TcpPhase::SlowStart;
        }
    }
}
