//! Query-counted ±1 oracles on n-bit strings.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::mix;

/// Largest supported oracle width; inputs are packed into a `u64`.
pub const MAX_ORACLE_BITS: usize = 63;

#[derive(Clone)]
enum Source {
    /// `true` entries evaluate to -1.
    Table(Arc<Vec<bool>>),
    Seeded(u64),
    Const(i8),
    Parity(u64),
    Func(Arc<dyn Fn(u64) -> i8 + Send + Sync>),
}

/// An n-bit function with values in {-1, +1}, accessed by counted queries.
pub struct BooleanOracle {
    n: usize,
    source: Source,
    queries: AtomicU64,
}

impl Clone for BooleanOracle {
    /// The clone starts with a fresh query counter.
    fn clone(&self) -> Self {
        BooleanOracle { n: self.n, source: self.source.clone(), queries: AtomicU64::new(0) }
    }
}

impl fmt::Debug for BooleanOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Table(_) => "table".to_string(),
            Source::Seeded(s) => format!("rand:{s}"),
            Source::Const(c) => format!("const:{c:+}"),
            Source::Parity(m) => format!("parity:{m:x}"),
            Source::Func(_) => "func".to_string(),
        };
        write!(f, "BooleanOracle(n={}, {kind}, queries={})", self.n, self.queries())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_ORACLE_BITS {
        return Err(Error::CapExceeded { what: "oracle bits", value: n, cap: MAX_ORACLE_BITS });
    }
    Ok(())
}

impl BooleanOracle {
    fn with(n: usize, source: Source) -> Result<Self> {
        check_n(n)?;
        Ok(BooleanOracle { n, source, queries: AtomicU64::new(0) })
    }

    /// Truth table of length `2^n`, values ±1.
    pub fn from_table(values: &[i8]) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!("table length {} is not a power of two", values.len())));
        }
        if let Some(v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument(format!("table value {v} is not ±1")));
        }
        let n = values.len().trailing_zeros() as usize;
        Self::with(n, Source::Table(Arc::new(values.iter().map(|&v| v == -1).collect())))
    }

    /// Pseudorandom function, a pure function of `(seed, x)`.
    pub fn seeded(n: usize, seed: u64) -> Result<Self> {
        Self::with(n, Source::Seeded(seed))
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        if value != 1 && value != -1 {
            return Err(Error::InvalidArgument(format!("constant {value} is not ±1")));
        }
        Self::with(n, Source::Const(value))
    }

    /// `f(x) = (-1)^{popcount(x & mask)}`.
    pub fn parity(n: usize, mask: u64) -> Result<Self> {
        Self::with(n, Source::Parity(mask))
    }

    /// Arbitrary closure; the closure must return ±1.
    pub fn from_fn(n: usize, f: impl Fn(u64) -> i8 + Send + Sync + 'static) -> Result<Self> {
        Self::with(n, Source::Func(Arc::new(f)))
    }

    /// Parses `table:<path>`, `rand:<seed>`, `const:±1` or `parity:<hex>`.
    pub fn from_spec(spec: &str, n: usize) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("function spec '{spec}' lacks ':'")))?;
        match kind {
            "table" => {
                let text = std::fs::read_to_string(arg).map_err(|e| Error::Io(format!("{arg}: {e}")))?;
                let values = parse_table(&text)?;
                let o = Self::from_table(&values)?;
                if o.n != n {
                    return Err(Error::DimensionMismatch(format!("table has n={}, expected {n}", o.n)));
                }
                Ok(o)
            }
            "rand" => {
                let seed = arg.parse::<u64>().map_err(|e| Error::InvalidArgument(format!("seed '{arg}': {e}")))?;
                Self::seeded(n, seed)
            }
            "const" => match arg {
                "+1" | "1" => Self::constant(n, 1),
                "-1" => Self::constant(n, -1),
                _ => Err(Error::InvalidArgument(format!("constant '{arg}' is not ±1"))),
            },
            "parity" => {
                let mask = u64::from_str_radix(arg.trim_start_matches("0x"), 16)
                    .map_err(|e| Error::InvalidArgument(format!("mask '{arg}': {e}")))?;
                Self::parity(n, mask)
            }
            _ => Err(Error::InvalidArgument(format!("unknown function kind '{kind}'"))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value without touching the query counter.
    pub fn peek(&self, x: u64) -> i8 {
        debug_assert!(self.n == 64 || x >> self.n == 0);
        match &self.source {
            Source::Table(t) => {
                if t[x as usize] {
                    -1
                } else {
                    1
                }
            }
            Source::Seeded(s) => {
                if mix(*s, &[x]) & 1 == 1 {
                    -1
                } else {
                    1
                }
            }
            Source::Const(c) => *c,
            Source::Parity(m) => {
                if (x & m).count_ones() & 1 == 1 {
                    -1
                } else {
                    1
                }
            }
            Source::Func(f) => f(x),
        }
    }

    /// One counted query.
    pub fn evaluate(&self, x: u64) -> i8 {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.peek(x)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_queries(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }

    /// Full truth table using `2^n` counted queries.
    pub fn truth_table(&self) -> Vec<i8> {
        (0..1u64 << self.n).map(|x| self.evaluate(x)).collect()
    }
}

fn parse_table(text: &str) -> Result<Vec<i8>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = match t {
            "+1" | "1" => 1,
            "-1" => -1,
            _ => {
                return Err(Error::Parse { line: i + 1, col: 1, msg: format!("expected +1 or -1, found '{t}'") })
            }
        };
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_increments_once_per_query() {
        let f = BooleanOracle::seeded(5, 9).unwrap();
        for x in 0..10 {
            f.evaluate(x);
        }
        assert_eq!(f.queries(), 10);
        f.peek(3);
        assert_eq!(f.queries(), 10);
    }

    #[test]
    fn specs_parse() {
        let f = BooleanOracle::from_spec("parity:3", 3).unwrap();
        assert_eq!(f.peek(0b001), -1);
        assert_eq!(f.peek(0b011), 1);
        assert_eq!(f.peek(0b100), 1);
        assert_eq!(BooleanOracle::from_spec("const:-1", 2).unwrap().peek(1), -1);
        assert!(BooleanOracle::from_spec("const:0", 2).is_err());
        assert!(BooleanOracle::from_spec("bogus", 2).is_err());
        let a = BooleanOracle::from_spec("rand:4", 6).unwrap();
        let b = BooleanOracle::seeded(6, 4).unwrap();
        assert!((0..64).all(|x| a.peek(x) == b.peek(x)));
    }

    #[test]
    fn table_spec_round_trip() {
        let dir = std::env::temp_dir().join(format!("forrelation-table-{}", std::process::id()));
        std::fs::write(&dir, "+1\n-1\n-1\n+1\n").unwrap();
        let f = BooleanOracle::from_spec(&format!("table:{}", dir.display()), 2).unwrap();
        assert_eq!(f.truth_table(), vec![1, -1, -1, 1]);
        assert!(BooleanOracle::from_spec(&format!("table:{}", dir.display()), 3).is_err());
        std::fs::remove_file(dir).ok();
    }

    #[test]
    fn seeded_is_balanced_ish() {
        let f = BooleanOracle::seeded(12, 1).unwrap();
        let s: i64 = (0..4096).map(|x| f.peek(x) as i64).sum();
        assert!(s.abs() < 300);
    }
}
