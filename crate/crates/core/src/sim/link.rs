/// Token-bucket admission with tail drop.
///
/// Tokens refill at the link capacity up to `burst` bits. A packet is admitted
/// when the bucket holds at least its size, otherwise dropped. Queueing delay
/// is not modelled.
#[derive(Debug, Clone)]
pub struct TokenBucket {
    rate: f64,
    burst: f64,
    tokens: f64,
    last: f64,
}

impl TokenBucket {
    pub fn new(rate_bps: f64, burst_bits: f64, initial_bits: f64) -> Self {
        TokenBucket {
            rate: rate_bps,
            burst: burst_bits,
            tokens: initial_bits.min(burst_bits),
            last: 0.0,
        }
    }

    pub fn tokens(&self) -> f64 {
        self.tokens
    }

    pub fn admit(&mut self, now: f64, bits: u64) -> bool {
        if now > self.last {
            self.tokens = (self.tokens + self.rate * (now - self.last)).min(self.burst);
            self.last = now;
        }
        let need = bits as f64;
        // Absorbs rounding in the refill product when arrivals are paced at
        // exactly the link rate.
        let slack = 1e-6 + need * 1e-9;
        if self.tokens + slack >= need {
            self.tokens -= need;
            true
        } else {
            false
        }
    }
}
