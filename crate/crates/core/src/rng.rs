//! Counter-based random streams.
//!
//! Every uniform is a pure function of `(master_seed, replication, step, slot)`
//! computed with Philox4x32-10, so replications can be evaluated in any order
//! on any number of workers and still reproduce bit-for-bit.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
#[inline]
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

/// Maps the top 52 of 64 random bits to the open interval (0, 1), at the
/// midpoints of a 2^-52 grid.
///
/// The result never hits 0 or 1, so inverse-CDF transforms stay finite.
#[inline]
pub fn bits_to_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// SplitMix64 finalizer; used to derive auxiliary master seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent master seed for a named purpose.
pub fn derive_seed(master_seed: u64, purpose: &str) -> u64 {
    mix64(master_seed ^ mix64(crate::fnv1a(purpose.as_bytes())))
}

/// The random substream of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substream {
    key: [u32; 2],
    replication: u64,
}

impl Substream {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        Self {
            key: [master_seed as u32, (master_seed >> 32) as u32],
            replication,
        }
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    /// Fills `out` with the uniforms of step `step`.
    ///
    /// Slot `j` of a step is the same number regardless of how many slots
    /// are requested, so families that consume more draws only extend the
    /// sequence.
    pub fn fill(&self, step: u32, out: &mut [f64]) {
        let rep_lo = self.replication as u32;
        let rep_hi = (self.replication >> 32) as u32;
        for (block, chunk) in out.chunks_mut(2).enumerate() {
            let r = philox4x32([block as u32, step, rep_lo, rep_hi], self.key);
            chunk[0] = bits_to_unit(u64::from(r[0]) | (u64::from(r[1]) << 32));
            if let Some(second) = chunk.get_mut(1) {
                *second = bits_to_unit(u64::from(r[2]) | (u64::from(r[3]) << 32));
            }
        }
    }

    pub fn uniform(&self, step: u32, slot: u32) -> f64 {
        let r = philox4x32(
            [slot / 2, step, self.replication as u32, (self.replication >> 32) as u32],
            self.key,
        );
        let bits = if slot.is_multiple_of(2) {
            u64::from(r[0]) | (u64::from(r[1]) << 32)
        } else {
            u64::from(r[2]) | (u64::from(r[3]) << 32)
        };
        bits_to_unit(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    // Known-answer vectors published with the Random123 library.
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32([0; 4], [0; 2]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn unit_interval_is_open() {
        assert!(bits_to_unit(0) > 0.0);
        assert!(bits_to_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn fill_matches_single_draws() {
        let s = Substream::new(42, 7);
        let mut buf = vec![0.0; 5];
        s.fill(3, &mut buf);
        for (j, &u) in buf.iter().enumerate() {
            assert_eq!(u, s.uniform(3, j as u32));
        }
        let mut short = [0.0; 2];
        s.fill(3, &mut short);
        assert_eq!(&short, &buf[..2]);
    }

    #[test]
    fn streams_differ_by_key_components() {
        let a = Substream::new(1, 0).uniform(0, 0);
        assert_ne!(a, Substream::new(2, 0).uniform(0, 0));
        assert_ne!(a, Substream::new(1, 1).uniform(0, 0));
        assert_ne!(a, Substream::new(1, 0).uniform(1, 0));
        assert_ne!(a, Substream::new(1, 0).uniform(0, 1));
    }

    #[test]
    fn uniform_mean_and_variance() {
        let s = Substream::new(0x5EED, 0);
        let m = 200_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for k in 0..m {
            let u = s.uniform(k, 0);
            sum += u;
            sq += u * u;
        }
        let mean = sum / m as f64;
        let var = sq / m as f64 - mean * mean;
        // se(mean) = sqrt(1/12/m) ≈ 6.5e-4
        assert!((mean - 0.5).abs() < 4.0 * 6.5e-4);
        assert!((var - 1.0 / 12.0).abs() < 2e-3);
    }
}
