//! Sum-of-divisors primitives.
//!
//! Two independent routes to σ live here: [`divisor_sum`] walks divisor pairs
//! up to √n and serves as the oracle, while [`SigmaTable`] accumulates every
//! divisor into its multiples and backs all bulk lookups. σ(0) is taken to be
//! 0, and so is σ at any non-integer or negative argument; callers that index
//! outside `1..=limit` skip the term instead of reading the table.

use crate::error::{Error, Result};

/// Largest table limit accepted by [`SigmaTable::build`].
///
/// 2^31 entries of `u64` is 16 GiB, which is already past what a desktop
/// machine can hold; anything larger is refused before allocating.
pub const MAX_TABLE_LIMIT: u64 = 1 << 31;

/// σ(n) by trial division. Returns 0 for n = 0.
pub fn divisor_sum(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let root = n.isqrt();
    let mut total = 0u64;
    for d in 1..=root {
        if n.is_multiple_of(d) {
            let pair = n / d;
            total += d;
            if pair != d {
                total += pair;
            }
        }
    }
    total
}

/// Sum of the odd divisors of `n`.
pub fn sigma_odd(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::NonPositive("n"));
    }
    // strip the power of two: odd divisors of n are exactly the divisors of its odd part
    Ok(divisor_sum(n >> n.trailing_zeros()))
}

/// Sum of the even divisors of `n`.
pub fn sigma_even(n: u64) -> Result<u64> {
    let odd = sigma_odd(n)?;
    Ok(divisor_sum(n) - odd)
}

/// g(n) = σ(n) − 4σ(n/2), with σ(n/2) = 0 for odd n.
///
/// For even n this is also σ^o(n) − σ^e(n), since σ^e(2m) = 2σ(m).
pub fn g_value(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::NonPositive("n"));
    }
    let half = if n.is_multiple_of(2) {
        divisor_sum(n / 2)
    } else {
        0
    };
    Ok(divisor_sum(n) as i64 - 4 * half as i64)
}

/// A value of g paired with its argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GValue {
    pub n: u64,
    pub value: i64,
}

impl GValue {
    pub fn new(n: u64) -> Result<Self> {
        Ok(Self {
            n,
            value: g_value(n)?,
        })
    }
}

/// T_j = j(j+1)/2. Valid while the result fits in a u64 (j ≤ 6_074_000_999).
pub const fn triangular(j: u64) -> u64 {
    if j.is_multiple_of(2) {
        (j / 2) * (j + 1)
    } else {
        j * j.div_ceil(2)
    }
}

/// True iff `n` is a triangular number (T_0 = 0 included), i.e. 8n+1 is a square.
pub fn is_triangular(n: u64) -> bool {
    let disc = 8 * n as u128 + 1;
    let root = disc.isqrt();
    root * root == disc
}

/// Largest j with T_j ≤ bound.
pub fn max_tri_index(bound: u64) -> u64 {
    // T_j ≤ b  ⇔  j ≤ (√(8b+1) − 1)/2
    let root = (8 * bound as u128 + 1).isqrt();
    ((root - 1) / 2) as u64
}

/// The j-th triangular number together with its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TriangularIndex {
    pub j: u64,
    pub value: u64,
}

impl TriangularIndex {
    pub fn new(j: u64) -> Self {
        Self {
            j,
            value: triangular(j),
        }
    }
}

/// Iterator over T_0, T_1, ... up to and including `bound`.
pub fn triangulars_upto(bound: u64) -> impl Iterator<Item = u64> {
    (0..=max_tri_index(bound)).map(triangular)
}

/// Dense table of σ(n) for `0 ≤ n ≤ limit`, with `values[0] = 0`.
///
/// Immutable once built; share it by reference across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaTable {
    limit: u64,
    values: Vec<u64>,
}

impl SigmaTable {
    /// Divisor-accumulation sieve: every d adds itself to each multiple of d.
    /// Runs in O(limit · log limit) additions.
    pub fn build(limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(Error::NonPositive("table limit"));
        }
        if limit > MAX_TABLE_LIMIT {
            return Err(Error::LimitTooLarge {
                requested: limit,
                cap: MAX_TABLE_LIMIT,
            });
        }
        let len = limit as usize + 1;
        let mut values = Vec::new();
        values
            .try_reserve_exact(len)
            .map_err(|_| Error::Allocation(limit + 1))?;
        values.resize(len, 0u64);

        for d in 1..len {
            for m in (d..len).step_by(d) {
                values[m] += d as u64;
            }
        }
        Ok(Self { limit, values })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// σ(n), or an error if `n` is beyond the table.
    pub fn get(&self, n: u64) -> Result<u64> {
        self.values
            .get(n as usize)
            .copied()
            .ok_or(Error::OutOfRange {
                needed: n,
                limit: self.limit,
            })
    }

    /// σ(n) without a range check on the caller's side; panics past `limit`.
    #[inline]
    pub fn sigma(&self, n: u64) -> u64 {
        self.values[n as usize]
    }

    /// g(n) from table lookups. `n` must be in `1..=limit`.
    #[inline]
    pub fn g(&self, n: u64) -> i64 {
        let half = if n.is_multiple_of(2) {
            self.sigma(n / 2)
        } else {
            0
        };
        self.sigma(n) as i64 - 4 * half as i64
    }

    #[cfg(test)]
    pub(crate) fn from_values_unchecked(values: Vec<u64>) -> Self {
        Self {
            limit: values.len() as u64 - 1,
            values,
        }
    }

    pub(crate) fn require(&self, needed: u64) -> Result<()> {
        if needed > self.limit {
            Err(Error::OutOfRange {
                needed,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }
}
