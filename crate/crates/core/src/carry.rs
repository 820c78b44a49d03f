//! Carry arithmetic for fractional daily rates.
//!
//! A real-valued rate `q` per day is turned into whole units per day so that
//! the cumulative integer total after `d` days is exactly `floor(q * d)`.
//! The fractional remainder is carried whether or not the day's budget is
//! used, so long-run throughput matches the real rate.

/// Integer capacity derived from a real daily rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DailyRate {
    rate: f64,
}

impl DailyRate {
    /// `rate` must be non-negative; `f64::INFINITY` means unconstrained.
    pub fn new(rate: f64) -> Self {
        assert!(rate >= 0.0, "daily rate must be non-negative, got {rate}");
        Self { rate }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn is_unbounded(&self) -> bool {
        self.rate.is_infinite()
    }

    /// Whole units available over days `1..=day`.
    pub fn cumulative(&self, day: u64) -> u64 {
        if day == 0 {
            return 0;
        }
        if self.is_unbounded() {
            return u64::MAX;
        }
        (self.rate * day as f64).floor() as u64
    }

    /// Whole units available on `day` alone (days are 1-based).
    pub fn on_day(&self, day: u64) -> u64 {
        assert!(day >= 1, "days are numbered from 1");
        if self.is_unbounded() {
            return u64::MAX;
        }
        self.cumulative(day) - self.cumulative(day - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_rate_is_constant() {
        let r = DailyRate::new(50.0);
        assert!((1..100).all(|d| r.on_day(d) == 50));
    }

    #[test]
    fn fractional_rate_accumulates_exactly() {
        let r = DailyRate::new(0.3);
        let total: u64 = (1..=1000).map(|d| r.on_day(d)).sum();
        assert_eq!(total, 300);
        assert_eq!(r.on_day(1), 0);
        assert_eq!(r.on_day(4), 1);
    }

    #[test]
    fn zero_rate_never_yields() {
        let r = DailyRate::new(0.0);
        assert_eq!(r.cumulative(10_000), 0);
    }
}
