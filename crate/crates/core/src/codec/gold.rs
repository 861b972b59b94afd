//! Degree-10 Gold sequences used as user pilots.

use crate::{Error, Result};

pub const DEGREE: usize = 10;
pub const PERIOD: usize = (1 << DEGREE) - 1;
/// Largest user id with a distinct pilot (family size minus the two parents).
pub const MAX_USERS: u32 = 33;

/// Exponents (below the leading x^10) of x^10 + x^3 + 1.
const POLY_A: &[usize] = &[3, 0];
/// Exponents of x^10 + x^8 + x^3 + x^2 + 1.
const POLY_B: &[usize] = &[8, 3, 2, 0];

/// One period of the m-sequence with recurrence a[n+10] = xor of a[n+e].
pub fn m_sequence(exponents: &[usize]) -> Vec<u8> {
    let mut a = vec![1u8; PERIOD + DEGREE];
    for n in 0..PERIOD {
        a[n + DEGREE] = exponents.iter().fold(0, |acc, &e| acc ^ a[n + e]);
    }
    a.truncate(PERIOD);
    a
}

/// Member `index` of the Gold family: 0 and 1 are the parents, `k + 2` is
/// `a xor (b cyclically shifted by k)`.
pub fn gold_sequence(index: usize) -> Vec<u8> {
    let a = m_sequence(POLY_A);
    let b = m_sequence(POLY_B);
    match index {
        0 => a,
        1 => b,
        k => (0..PERIOD).map(|n| a[n] ^ b[(n + k - 2) % PERIOD]).collect(),
    }
}

/// User pilot: the first `len` chips of Gold sequence `user`, mapped 0 -> +1, 1 -> -1.
pub fn gold_pilot(user: u32, len: usize) -> Result<Vec<f64>> {
    if user == 0 || user > MAX_USERS {
        return Err(Error::Config(format!(
            "user id {user} outside 1..={MAX_USERS}"
        )));
    }
    if len > PERIOD {
        return Err(Error::Config(format!("pilot length {len} exceeds {PERIOD}")));
    }
    Ok(gold_sequence(user as usize)[..len]
        .iter()
        .map(|&c| 1.0 - 2.0 * c as f64)
        .collect())
}
