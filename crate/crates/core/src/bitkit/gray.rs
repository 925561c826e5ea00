use super::BitVector;

/// One emitted Gray-code string together with the bit that changed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrayStep {
    pub code: u64,
    /// `None` for the first string.
    pub flipped: Option<usize>,
}

/// Reflected binary Gray code of a fixed width (at most 63 bits).
#[derive(Clone, Debug)]
pub struct GrayCodeIterator {
    width: usize,
    step: u64,
    code: u64,
}

pub fn gray_code(width: usize) -> GrayCodeIterator {
    assert!(width <= 63, "Gray code width limited to 63");
    GrayCodeIterator { width, step: 0, code: 0 }
}

impl GrayCodeIterator {
    pub fn width(&self) -> usize {
        self.width
    }

    /// Current string as a bit vector.
    pub fn state(&self) -> BitVector {
        BitVector::from_u64(self.code, self.width)
    }
}

impl Iterator for GrayCodeIterator {
    type Item = GrayStep;

    fn next(&mut self) -> Option<GrayStep> {
        if self.step >= 1u64 << self.width {
            return None;
        }
        let out = if self.step == 0 {
            GrayStep { code: 0, flipped: None }
        } else {
            let bit = self.step.trailing_zeros() as usize;
            self.code ^= 1 << bit;
            GrayStep { code: self.code, flipped: Some(bit) }
        };
        self.step += 1;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = ((1u64 << self.width) - self.step) as usize;
        (left, Some(left))
    }
}

/// One emitted ternary string step: which position changed and by how much.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TernaryStep {
    pub changed: Option<usize>,
    /// `+1` or `-1`; zero for the first string.
    pub delta: i8,
}

/// Reflected Gray code over {-1, 0, +1}; starts at all -1.
#[derive(Clone, Debug)]
pub struct TernaryGrayIterator {
    digits: Vec<i8>,
    dirs: Vec<i8>,
    step: u64,
    total: u64,
}

pub fn ternary_gray_code(width: usize) -> TernaryGrayIterator {
    let total = 3u64.checked_pow(width as u32).expect("ternary width too large");
    TernaryGrayIterator { digits: vec![-1; width], dirs: vec![1; width], step: 0, total }
}

impl TernaryGrayIterator {
    pub fn digits(&self) -> &[i8] {
        &self.digits
    }

    /// Advances and reports the change; the new string is [`Self::digits`].
    pub fn advance(&mut self) -> Option<TernaryStep> {
        if self.step >= self.total {
            return None;
        }
        let out = if self.step == 0 {
            TernaryStep { changed: None, delta: 0 }
        } else {
            let mut s = self.step;
            let mut p = 0;
            while s % 3 == 0 {
                s /= 3;
                p += 1;
            }
            let delta = self.dirs[p];
            self.digits[p] += delta;
            for d in &mut self.dirs[..p] {
                *d = -*d;
            }
            TernaryStep { changed: Some(p), delta }
        };
        self.step += 1;
        Some(out)
    }
}

impl Iterator for TernaryGrayIterator {
    type Item = (Vec<i8>, Option<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        self.advance().map(|s| (self.digits.clone(), s.changed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn width_two_order() {
        let codes: Vec<u64> = gray_code(2).map(|s| s.code).collect();
        assert_eq!(codes, vec![0b00, 0b01, 0b11, 0b10]);
    }

    #[test]
    fn width_one_and_zero() {
        let codes: Vec<u64> = gray_code(1).map(|s| s.code).collect();
        assert_eq!(codes, vec![0, 1]);
        assert_eq!(gray_code(0).count(), 1);
    }

    #[test]
    fn flipped_position_reported() {
        let mut prev = 0u64;
        for s in gray_code(6) {
            if let Some(b) = s.flipped {
                assert_eq!(prev ^ s.code, 1 << b);
            }
            prev = s.code;
        }
    }

    #[test]
    fn width_five_is_a_gray_cycle() {
        let v: Vec<u64> = gray_code(5).map(|s| s.code).collect();
        assert_eq!(v.iter().collect::<HashSet<_>>().len(), 32);
        for w in v.windows(2) {
            assert_eq!((w[0] ^ w[1]).count_ones(), 1);
        }
    }

    #[test]
    fn ternary_width_one() {
        let v: Vec<Vec<i8>> = ternary_gray_code(1).map(|s| s.0).collect();
        assert_eq!(v, vec![vec![-1], vec![0], vec![1]]);
    }

    #[test]
    fn ternary_width_two_and_three() {
        assert_eq!(ternary_gray_code(2).count(), 9);
        let v: Vec<Vec<i8>> = ternary_gray_code(3).map(|s| s.0).collect();
        assert_eq!(v.iter().collect::<HashSet<_>>().len(), 27);
        for w in v.windows(2) {
            let diff: Vec<usize> = (0..3).filter(|&i| w[0][i] != w[1][i]).collect();
            assert_eq!(diff.len(), 1);
            assert_eq!((w[0][diff[0]] - w[1][diff[0]]).abs(), 1);
        }
    }

    #[test]
    fn ternary_reports_changes() {
        let mut it = ternary_gray_code(4);
        let mut prev = it.digits().to_vec();
        while let Some(s) = it.advance() {
            if let Some(p) = s.changed {
                assert_eq!(it.digits()[p] - prev[p], s.delta);
            }
            prev = it.digits().to_vec();
        }
    }
}
