use rand::Rng;

use crate::error::{Error, Result};

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// Packed bit string over F2.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for BitVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "BitVector({s})")
    }
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    /// Low `len` bits of `value`; `len` must be at most 64.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << r) - 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value as an integer; panics if longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut r = self.clone();
        r.xor_assign(other);
        r
    }

    /// Inner product over F2.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Dense matrix over F2, rows packed as bit strings.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows, cols, data: vec![BitVector::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        BitMatrix { rows, cols, data: (0..rows).map(|_| BitVector::random(cols, rng)).collect() }
    }

    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("row length differs from column count".into()));
        }
        Ok(BitMatrix { rows: rows.len(), cols, data: rows })
    }

    pub fn from_columns(cols: &[BitVector], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch("column length differs from row count".into()));
            }
            for i in 0..rows {
                if c.get(i) {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.data[i].set(j, b)
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut c = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// `A x` over F2.
    pub fn matvec(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                x.len()
            )));
        }
        let mut y = BitVector::zeros(self.rows);
        for (i, r) in self.data.iter().enumerate() {
            if r.dot(x) {
                y.set(i, true);
            }
        }
        Ok(y)
    }

    /// Matrix product `self * other` over F2.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch("inner dimensions differ".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let mut acc = BitVector::zeros(other.cols);
            for k in 0..self.cols {
                if self.get(i, k) {
                    acc.xor_assign(other.row(k));
                }
            }
            out.data[i] = acc;
        }
        Ok(out)
    }

    /// Rank over F2 by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else { continue };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Free-function form of [`BitMatrix::matvec`].
pub fn gf2_matvec(a: &BitMatrix, x: &BitVector) -> Result<BitVector> {
    a.matvec(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_matvec() {
        let x = BitVector::from_bits(&[true, false, true]);
        assert_eq!(gf2_matvec(&BitMatrix::identity(3), &x).unwrap(), x);
    }

    #[test]
    fn all_ones_kills_11() {
        let mut a = BitMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                a.set(i, j, true);
            }
        }
        let x = BitVector::from_u64(0b11, 2);
        assert_eq!(a.matvec(&x).unwrap(), BitVector::zeros(2));
    }

    #[test]
    fn matvec_dimension_mismatch() {
        assert!(BitMatrix::zeros(2, 3).matvec(&BitVector::zeros(2)).is_err());
    }

    #[test]
    fn random_matvec_matches_entrywise_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = BitMatrix::random(8, 4, &mut rng);
            let x = BitVector::random(4, &mut rng);
            let y = a.matvec(&x).unwrap();
            for i in 0..8 {
                let mut p = false;
                for j in 0..4 {
                    p ^= a.get(i, j) & x.get(j);
                }
                assert_eq!(y.get(i), p);
            }
        }
    }

    #[test]
    fn rank_basics() {
        assert_eq!(BitMatrix::zeros(4, 5).rank(), 0);
        assert_eq!(BitMatrix::identity(7).rank(), 7);
    }

    fn span_rank(a: &BitMatrix) -> usize {
        let r = a.rows();
        let mut span = std::collections::HashSet::new();
        for mask in 0u32..(1 << r) {
            let mut acc = BitVector::zeros(a.cols());
            for i in 0..r {
                if mask >> i & 1 == 1 {
                    acc.xor_assign(a.row(i));
                }
            }
            span.insert(acc);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn rank_matches_span_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let a = BitMatrix::random(6, 6, &mut rng);
            assert_eq!(a.rank(), span_rank(&a));
        }
    }

    #[test]
    fn multi_word_vectors() {
        let mut v = BitVector::zeros(130);
        v.set(129, true);
        v.set(64, true);
        assert_eq!(v.count_ones(), 2);
        let mut w = BitVector::zeros(130);
        w.set(129, true);
        assert!(v.dot(&w));
        v.flip(129);
        assert!(!v.dot(&w));
    }

    proptest! {
        #[test]
        fn matvec_is_linear(seed in any::<u64>(), rows in 1usize..70, cols in 1usize..70) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = BitMatrix::random(rows, cols, &mut rng);
            let x = BitVector::random(cols, &mut rng);
            let y = BitVector::random(cols, &mut rng);
            let lhs = a.matvec(&x.xor(&y)).unwrap();
            let rhs = a.matvec(&x).unwrap().xor(&a.matvec(&y).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn transpose_rank_equal(seed in any::<u64>(), rows in 1usize..12, cols in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = BitMatrix::random(rows, cols, &mut rng);
            prop_assert_eq!(a.rank(), a.transpose().rank());
        }
    }
}
