//! Seed splitting. Every random stream in a run is derived from the single
//! scenario seed through [`sub_seed`], so identical configs replay exactly.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of SplitMix64.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stream tags keep sub-seeds for different purposes apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    RecordSizes = 1,
    DayUpdates = 2,
    Content = 3,
    EmailDomain = 4,
    Resize = 5,
}

/// Derives the seed for `(stream, index)` from a root seed.
pub fn sub_seed(root: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(root ^ splitmix64((stream as u64).wrapping_mul(GOLDEN) ^ splitmix64(index)))
}
