//! Truncated power series with exact integer coefficients.
//!
//! A [`TruncatedSeries`] of order N stores the coefficients of q^0..=q^N and
//! is exact modulo q^(N+1). Binary operations refuse operands of different
//! orders; use [`TruncatedSeries::truncate`] to line them up first.
//!
//! The theta series ψ(q) = Σ_{k≥0} q^{k(k+1)/2} is built from its sum form,
//! which is normative here. [`psi_product_series`] expands the product
//! Π_{k≥1} (1 − q^{2k}) / (1 − q^{2k−1}) and is kept as an independent check.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::divisor::{triangular, triangulars_upto, SigmaTable};
use crate::error::{Error, Result};
use crate::recurrences::{Identity, RecurrenceReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigInt>,
}

impl TruncatedSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigInt::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// Builds a series from `coeffs`; the order is `coeffs.len() - 1`.
    ///
    /// Panics on an empty vector, which would have no order.
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a truncated series needs at least one coefficient"
        );
        Self { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&BigInt> {
        self.coeffs.get(i)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Drops every term above q^order. Raising the order is refused, since
    /// the missing coefficients are unknown.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::OrderMismatch(self.order(), order));
        }
        Ok(Self {
            coeffs: self.coeffs[..=order].to_vec(),
        })
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let order = self.order();

        // walk the nonzero terms of the sparser factor; ψ has only O(√N) of them
        let nnz = |s: &Self| s.coeffs.iter().filter(|c| !c.is_zero()).count();
        let (sparse, dense) = if nnz(self) <= nnz(other) {
            (self, other)
        } else {
            (other, self)
        };

        let mut out = vec![BigInt::zero(); order + 1];
        for (i, a) in sparse.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if a.is_one() {
                for (o, b) in out[i..].iter_mut().zip(&dense.coeffs) {
                    *o += b;
                }
            } else {
                for (o, b) in out[i..].iter_mut().zip(&dense.coeffs) {
                    if !b.is_zero() {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(Self { coeffs: out })
    }

    /// `self^k` by binary exponentiation. `k = 0` gives the constant series 1.
    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.order());
        if k == 0 {
            return result;
        }
        let mut base = self.clone();
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = result.mul(&base).expect("orders agree");
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base).expect("orders agree");
        }
        result
    }

    /// Multiplies in place by (1 − q^m).
    fn mul_one_minus_power(&mut self, m: usize) {
        for i in (m..=self.order()).rev() {
            let (lo, hi) = self.coeffs.split_at_mut(i);
            hi[0] -= &lo[i - m];
        }
    }

    /// Multiplies in place by 1/(1 − q^m) = Σ_{i≥0} q^{mi}.
    fn div_one_minus_power(&mut self, m: usize) {
        for i in m..=self.order() {
            let (lo, hi) = self.coeffs.split_at_mut(i);
            hi[0] += &lo[i - m];
        }
    }
}

/// ψ(q) = Σ_{k≥0} q^{T_k} up to q^order.
pub fn psi_series(order: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(order);
    for t in triangulars_upto(order as u64) {
        s.coeffs[t as usize] = BigInt::one();
    }
    s
}

/// Product form Π_{k≥1} (1 − q^{2k}) · (1 − q^{2k−1})^{-1} up to q^order.
pub fn psi_product_series(order: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::one(order);
    let mut k = 1;
    while 2 * k - 1 <= order {
        s.div_one_minus_power(2 * k - 1);
        if 2 * k <= order {
            s.mul_one_minus_power(2 * k);
        }
        k += 1;
    }
    s
}

/// Σ_{n=1}^{order} g(n) q^n, read from `table`.
pub fn g_series(order: usize, table: &SigmaTable) -> Result<TruncatedSeries> {
    table.require(order as u64)?;
    let mut s = TruncatedSeries::zero(order);
    for n in 1..=order {
        s.coeffs[n] = BigInt::from(table.g(n as u64));
    }
    Ok(s)
}

/// Σ_{j≥0} T_j q^{T_j} up to q^order.
pub fn weighted_triangular_series(order: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(order);
    for t in triangulars_upto(order as u64) {
        s.coeffs[t as usize] = BigInt::from(t);
    }
    s
}

/// Counts t_k(n) of ordered k-tuples of triangular numbers summing to n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TkTable {
    k: u32,
    counts: Vec<BigInt>,
}

impl TkTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn limit(&self) -> u64 {
        (self.counts.len() - 1) as u64
    }

    pub fn counts(&self) -> &[BigInt] {
        &self.counts
    }

    pub fn get(&self, n: u64) -> Result<&BigInt> {
        self.counts.get(n as usize).ok_or(Error::OutOfRange {
            needed: n,
            limit: self.limit(),
        })
    }
}

/// t_k(n) for 0 ≤ n ≤ limit, read off the coefficients of ψ(q)^k.
pub fn t_k_table(k: u32, limit: usize) -> Result<TkTable> {
    if k == 0 {
        return Err(Error::NonPositive("k"));
    }
    let counts = psi_series(limit).pow(k).into_coeffs();
    Ok(TkTable { k, counts })
}

/// Compares the coefficients of ψ(q) · Σ_{k≥1} g(k) q^k against
/// Σ_j T_j q^{T_j} for every index in `1..=limit`.
pub fn verify_gf_identity(limit: u64) -> Result<RecurrenceReport> {
    if limit == 0 {
        return Err(Error::NonPositive("limit"));
    }
    let table = SigmaTable::build(limit)?;
    verify_gf_identity_with(&table, 1, limit)
}

/// As [`verify_gf_identity`], over `lo..=hi` with a caller-supplied table.
pub fn verify_gf_identity_with(table: &SigmaTable, lo: u64, hi: u64) -> Result<RecurrenceReport> {
    let product = gf_product(table, hi)?;
    let mut report = RecurrenceReport::new(Identity::GfIdentity, lo, hi)?;
    for n in lo..=hi {
        let (lhs, rhs) = gf_sides(&product, n)?;
        report.record(n, lhs, rhs)?;
    }
    Ok(report)
}

/// ψ(q) · Σ g(k) q^k up to q^hi.
pub(crate) fn gf_product(table: &SigmaTable, hi: u64) -> Result<TruncatedSeries> {
    if hi == 0 {
        return Err(Error::NonPositive("hi"));
    }
    let order = hi as usize;
    psi_series(order).mul(&g_series(order, table)?)
}

/// Coefficient of q^n in the product, and the target (n if triangular, else 0).
pub(crate) fn gf_sides(product: &TruncatedSeries, n: u64) -> Result<(i128, i128)> {
    let lhs = product
        .coeff(n as usize)
        .ok_or(Error::OutOfRange {
            needed: n,
            limit: product.order() as u64,
        })?
        .to_i128()
        .ok_or(Error::Overflow("generating-function coefficient"))?;
    let rhs = if crate::divisor::is_triangular(n) {
        n as i128
    } else {
        0
    };
    Ok((lhs, rhs))
}

/// Number of ordered k-tuples (a_1..a_k) of triangular numbers with sum n,
/// by direct recursion over the summands. Exponential in k; for small checks.
pub fn enumerate_tk(k: u32, n: u64) -> u64 {
    if k == 0 {
        return u64::from(n == 0);
    }
    let mut total = 0;
    let mut j = 0;
    loop {
        let t = triangular(j);
        if t > n {
            break;
        }
        total += enumerate_tk(k - 1, n - t);
        j += 1;
    }
    total
}
