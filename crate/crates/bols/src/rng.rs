//! Counter-based random streams for reproducible parallel simulation.
//!
//! A stream is a (key, counter) pair; output n is a strong 64-bit mix of
//! `key + n·golden`, the splitmix64 construction. Advancing or jumping a
//! stream is O(1) and two streams with distinct keys are statistically
//! independent, so every (cell, replication, role) in a Monte Carlo run
//! can get its own stream derived by hashing — results then do not
//! depend on scheduling or worker count.
//!
//! The concrete output sequences are part of the crate contract and are
//! pinned by golden vectors in the tests below.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable counter-based pseudo-random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    key: u64,
    counter: u64,
}

impl RandomStream {
    /// Stream with the given key, starting at counter 0.
    pub fn from_key(key: u64) -> Self {
        RandomStream { key, counter: 0 }
    }

    /// Derives a stream key by folding `words` into `master` through the
    /// 64-bit mixer. Used to give every (cell, replication, role) its
    /// own independent stream.
    pub fn derive(master: u64, words: &[u64]) -> Self {
        let mut key = mix64(master ^ 0x243F_6A88_85A3_08D3);
        for &w in words {
            key = mix64(key.wrapping_add(GOLDEN) ^ w);
        }
        RandomStream::from_key(key)
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Next raw 64-bit output.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw strictly inside (0, 1); 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Bernoulli(p) event.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// N(mean, sd²) draw via the Marsaglia polar method.
    pub fn gaussian(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    /// N(0, 1) draw.
    pub fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    /// Gamma(shape, 1) draw, Marsaglia–Tsang with the shape < 1 boost.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            let u = self.uniform();
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (3.0 * d.sqrt());
        loop {
            let x = self.standard_normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Beta(alpha, beta) draw via the two-gamma ratio.
    pub fn beta(&mut self, alpha: f64, beta: f64) -> f64 {
        assert!(
            alpha > 0.0 && beta > 0.0,
            "beta parameters must be positive"
        );
        let a = self.gamma(alpha);
        let b = self.gamma(beta);
        a / (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_reproduces() {
        let mut a = RandomStream::from_key(42);
        let mut b = RandomStream::from_key(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_keys_differ() {
        let mut a = RandomStream::from_key(1);
        let mut b = RandomStream::from_key(2);
        let va: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let vb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_ne!(va, vb);
    }

    #[test]
    fn derive_is_order_sensitive() {
        let a = RandomStream::derive(7, &[1, 2]);
        let b = RandomStream::derive(7, &[2, 1]);
        assert_ne!(a.key(), b.key());
    }

    // GOLDEN_U64 pins the raw output sequence for key 42 (computed
    // independently from the splitmix64 definition); regenerate only on
    // a deliberate algorithm change.
    const GOLDEN_U64: [u64; 16] = [
        0xBDD732262FEB6E95,
        0x28EFE333B266F103,
        0x47526757130F9F52,
        0x581CE1FF0E4AE394,
        0x09BC585A244823F2,
        0xDE4431FA3C80DB06,
        0x37E9671C45376D5D,
        0xCCF635EE9E9E2FA4,
        0x5705B8770B3D7DD5,
        0x9E54D738297F77AE,
        0x3474724A775B19BF,
        0x7E348A0E451650BE,
        0x836DED897F3E46E6,
        0x851F977347ED6DB7,
        0xAA47E31C02E78EDC,
        0x341452C54D7C33F2,
    ];

    #[test]
    fn golden_sequence_key_42() {
        let mut s = RandomStream::from_key(42);
        for (i, &want) in GOLDEN_U64.iter().enumerate() {
            assert_eq!(s.next_u64(), want, "output {i}");
        }
    }

    #[test]
    fn uniform_in_open_interval() {
        let mut s = RandomStream::from_key(9);
        for _ in 0..100_000 {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut s = RandomStream::from_key(2024);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = s.gaussian(1.0, 4.0);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // 5σ/√n bounds for the mean, matching band for the sd
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 4.0).abs() < 0.02, "sd {}", var.sqrt());
    }

    #[test]
    fn beta_uniform_case() {
        let mut s = RandomStream::from_key(5);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += s.beta(1.0, 1.0);
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "Beta(1,1) mean {mean}");
    }

    #[test]
    fn beta_2_2_moments() {
        let mut s = RandomStream::from_key(6);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = s.beta(2.0, 2.0);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // Var of the sample variance ≈ (μ4 − σ⁴)/n with μ4 = 3/560.
        let mu4 = 3.0 / 560.0;
        let se = ((mu4 - 0.05f64 * 0.05) / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 5.0 * (0.05f64 / n as f64).sqrt());
        assert!((var - 0.05).abs() < 5.0 * se, "Beta(2,2) variance {var}");
    }

    #[test]
    fn beta_heavily_skewed_mean() {
        let mut s = RandomStream::from_key(7);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += s.beta(100.0, 1.0);
        }
        let mean = sum / n as f64;
        let want = 100.0 / 101.0;
        let sd = (want * (1.0 - want) / 102.0f64).sqrt();
        assert!((mean - want).abs() < 5.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn gamma_small_shape() {
        let mut s = RandomStream::from_key(8);
        let n = 200_000usize;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += s.gamma(0.5);
        }
        let mean = sum / n as f64;
        // Gamma(0.5,1) mean 0.5, var 0.5
        assert!((mean - 0.5).abs() < 5.0 * (0.5f64 / n as f64).sqrt());
    }
}
