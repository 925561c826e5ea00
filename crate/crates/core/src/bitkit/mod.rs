//! Bit-level GF(2) linear algebra, Gray-code enumeration and fast
//! Walsh-Hadamard transforms.
//!
//! Bit strings of length `n` are packed little-endian into `u64` words:
//! bit `i` of the string is bit `i % 64` of word `i / 64`. Where a string
//! is used as a basis-state index, qubit `i` is bit `i` of the index.

mod bits;
mod fwht;
mod gray;

pub use bits::{gf2_matvec, BitMatrix, BitVector};
pub use fwht::{fwht_all, fwht_inplace, Hadamard};
pub use gray::{gray_code, ternary_gray_code, GrayCodeIterator, GrayStep, TernaryGrayIterator, TernaryStep};
