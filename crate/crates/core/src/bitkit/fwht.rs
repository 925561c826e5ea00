use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalars the Hadamard butterflies can act on.
pub trait Hadamard: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl Hadamard for f64 {}
impl Hadamard for Complex64 {}

/// Applies `H` (normalized) to one qubit of a `2^total_qubits` vector.
pub fn fwht_inplace<T: Hadamard>(v: &mut [T], qubit: usize, total_qubits: usize) -> Result<()> {
    if !v.len().is_power_of_two() || v.len() != 1usize << total_qubits {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} is not 2^{}",
            v.len(),
            total_qubits
        )));
    }
    if qubit >= total_qubits {
        return Err(Error::InvalidArgument(format!("qubit {qubit} out of range")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = 1usize << qubit;
    for base in (0..v.len()).step_by(2 * h) {
        for i in base..base + h {
            let a = v[i];
            let b = v[i + h];
            v[i] = (a + b) * s;
            v[i + h] = (a - b) * s;
        }
    }
    Ok(())
}

/// Applies `H` to every qubit.
pub fn fwht_all<T: Hadamard>(v: &mut [T]) -> Result<()> {
    if !v.len().is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("vector length {} is not a power of two", v.len())));
    }
    let n = v.len().trailing_zeros() as usize;
    for q in 0..n {
        fwht_inplace(v, q, n)?;
    }
    Ok(())
}
