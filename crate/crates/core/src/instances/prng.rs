/// SplitMix64: a 64-bit state advanced by a Weyl increment and finalized
/// with two xor-shift-multiply rounds. Streams are identical across
/// platforms and implementations for a given seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prng {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` from the top 53 bits.
    pub fn next_unit(&mut self) -> f64 {
        // Below 2⁵³ the signed conversion is exact and cheaper than the
        // unsigned one.
        ((self.next_u64() >> 11) as i64) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent big-integer implementation.
    #[test]
    fn golden_stream_seed_zero() {
        let mut p = Prng::new(0);
        assert_eq!(p.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(p.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        let mut p = Prng::new(0);
        assert_eq!(p.next_unit(), 0.8833108082136426);
        assert_eq!(p.next_unit(), 0.43152799704850997);
        assert_eq!(p.next_unit(), 0.026433771592597743);
    }

    #[test]
    fn golden_seed_42() {
        let mut p = Prng::new(42);
        assert_eq!(p.next_u64(), 0xBDD7_3226_2FEB_6E95);
    }

    #[test]
    fn unit_range_and_determinism() {
        let mut a = Prng::new(7);
        let mut b = Prng::new(7);
        for _ in 0..10_000 {
            let u = a.next_unit();
            assert!((0.0..1.0).contains(&u));
            assert_eq!(u, b.next_unit());
        }
    }
}
