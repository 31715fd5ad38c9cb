use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A node in a tree of deterministic random streams.
///
/// Every stochastic operation takes a `SeedStream` (or a raw seed) and
/// derives independent child streams for its sub-tasks, so parallel
/// execution reproduces the serial result bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream(seed)
    }

    pub fn seed(&self) -> u64 {
        self.0
    }

    /// Child stream number `index`.
    pub fn child(&self, index: u64) -> SeedStream {
        SeedStream(mix(mix(self.0 ^ GOLDEN).wrapping_add(index.wrapping_mul(GOLDEN))))
    }

    /// Child stream keyed by a label, for named sub-tasks.
    pub fn named(&self, label: &str) -> SeedStream {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        SeedStream(mix(self.0 ^ mix(h)))
    }

    /// ChaCha8 generator (counter based) seeded from this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for SeedStream {
    fn from(seed: u64) -> Self {
        SeedStream(seed)
    }
}
