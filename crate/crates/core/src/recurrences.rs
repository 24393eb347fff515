//! Exact residuals for the σ recurrences and the t_k recurrence.
//!
//! Each residual is LHS − RHS evaluated in integers; zero certifies the
//! identity at that n. Sums over σ include exactly the terms whose argument
//! is positive (σ(0) = 0 makes the boundary term vanish anyway). The t_k
//! recurrence is different: its n − T_j = 0 term carries t_k(0) = 1 and must
//! be included.
//!
//! Overflow: tables are capped at 2^31 entries, so every σ argument m is
//! below 2^31 and σ(m) ≤ m·(1 + ln m) < 2^36. A coefficient 5j(j+1) − 2n is
//! at most 10n < 2^34 in size, a product is below 2^70, and no sum has more
//! than n < 2^31 terms, keeping every accumulator under 2^101 < 2^127. The
//! arithmetic is still checked so a broken bound fails loudly.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::divisor::{is_triangular, triangular, SigmaTable};
use crate::error::{Error, Result};
use crate::par::run_blocks;
use crate::qseries::{gf_product, gf_sides, TkTable, TruncatedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Identity {
    #[serde(rename = "div1")]
    #[value(name = "div1")]
    Div1,
    #[serde(rename = "div2")]
    #[value(name = "div2")]
    Div2,
    #[serde(rename = "div3")]
    #[value(name = "div3")]
    Div3,
    #[serde(rename = "tk")]
    #[value(name = "tk")]
    TkRec,
    #[serde(rename = "gf")]
    #[value(name = "gf")]
    GfIdentity,
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::Div1 => "div1",
            Identity::Div2 => "div2",
            Identity::Div3 => "div3",
            Identity::TkRec => "tk",
            Identity::GfIdentity => "gf",
        }
    }

    /// Largest σ argument needed to check this identity at every n ≤ hi.
    pub fn sigma_limit(self, hi: u64) -> u64 {
        match self {
            Identity::Div1 | Identity::Div3 => 2 * hi + 1,
            Identity::Div2 | Identity::GfIdentity | Identity::TkRec => hi,
        }
    }
}

impl std::fmt::Display for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One n at which an identity did not balance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub n: u64,
    pub lhs: i128,
    pub rhs: i128,
    pub residual: i128,
}

/// Outcome of checking one identity over `lo..=hi`.
///
/// Successes are only counted; `failures` is ordered by n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub identity: Identity,
    pub lo: u64,
    pub hi: u64,
    pub checked_count: u64,
    pub failures: Vec<Failure>,
}

impl RecurrenceReport {
    pub(crate) fn new(identity: Identity, lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        Ok(Self {
            identity,
            lo,
            hi,
            checked_count: 0,
            failures: Vec::new(),
        })
    }

    pub(crate) fn record(&mut self, n: u64, lhs: i128, rhs: i128) -> Result<()> {
        let residual = lhs.checked_sub(rhs).ok_or(Error::Overflow("residual"))?;
        if residual != 0 {
            self.failures.push(Failure {
                n,
                lhs,
                rhs,
                residual,
            });
        }
        self.checked_count += 1;
        Ok(())
    }

    /// Appends the report for the range immediately following this one.
    pub fn merge(mut self, next: RecurrenceReport) -> Result<Self> {
        if next.identity != self.identity || next.lo != self.hi + 1 {
            return Err(Error::TableMismatch(format!(
                "cannot append {} [{}, {}] to {} [{}, {}]",
                next.identity, next.lo, next.hi, self.identity, self.lo, self.hi
            )));
        }
        self.hi = next.hi;
        self.checked_count += next.checked_count;
        self.failures.extend(next.failures);
        Ok(self)
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn positive(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::NonPositive("n"))
    } else {
        Ok(())
    }
}

fn mul(a: i128, b: i128, what: &'static str) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow(what))
}

fn add(a: i128, b: i128, what: &'static str) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow(what))
}

/// (LHS, RHS) of 2n·σ(2n+1) = Σ_{j≥1} (5j(j+1) − 2n)·σ(2n+1 − j(j+1)).
pub fn div1_sides(n: u64, table: &SigmaTable) -> Result<(i128, i128)> {
    positive(n)?;
    let top = 2 * n + 1;
    table.require(top)?;
    let two_n = 2 * n as i128;
    let lhs = mul(two_n, table.sigma(top) as i128, "div1")?;
    let mut rhs = 0i128;
    let mut j = 1u64;
    while j * (j + 1) <= 2 * n {
        let jj = (j * (j + 1)) as i128;
        let term = mul(
            5 * jj - two_n,
            table.sigma(top - j * (j + 1)) as i128,
            "div1",
        )?;
        rhs = add(rhs, term, "div1")?;
        j += 1;
    }
    Ok((lhs, rhs))
}

pub fn div1_residual(n: u64, table: &SigmaTable) -> Result<i128> {
    let (lhs, rhs) = div1_sides(n, table)?;
    lhs.checked_sub(rhs).ok_or(Error::Overflow("div1"))
}

/// (LHS, RHS) of Σ_{j≥0} [σ(n − T_j) − 4σ((n − T_j)/2)] = (n if n is triangular, else 0).
pub fn div2_sides(n: u64, table: &SigmaTable) -> Result<(i128, i128)> {
    positive(n)?;
    table.require(n)?;
    let mut lhs = 0i128;
    let mut j = 0u64;
    loop {
        let t = triangular(j);
        if t > n {
            break;
        }
        let m = n - t;
        // m = 0 contributes σ(0) − 4σ(0) = 0
        if m > 0 {
            lhs = add(lhs, table.g(m) as i128, "div2")?;
        }
        j += 1;
    }
    let rhs = if is_triangular(n) { n as i128 } else { 0 };
    Ok((lhs, rhs))
}

pub fn div2_residual(n: u64, table: &SigmaTable) -> Result<i128> {
    let (lhs, rhs) = div2_sides(n, table)?;
    lhs.checked_sub(rhs).ok_or(Error::Overflow("div2"))
}

/// (LHS, RHS) of n·σ(2n+1) = 4·Σ_{j=1}^{n} g(j)·σ(2n+1−2j).
pub fn div3_sides(n: u64, table: &SigmaTable) -> Result<(i128, i128)> {
    positive(n)?;
    let top = 2 * n + 1;
    table.require(top)?;
    let lhs = mul(n as i128, table.sigma(top) as i128, "div3")?;
    let mut sum = 0i128;
    for j in 1..=n {
        let term = mul(table.g(j) as i128, table.sigma(top - 2 * j) as i128, "div3")?;
        sum = add(sum, term, "div3")?;
    }
    Ok((lhs, mul(4, sum, "div3")?))
}

pub fn div3_residual(n: u64, table: &SigmaTable) -> Result<i128> {
    let (lhs, rhs) = div3_sides(n, table)?;
    lhs.checked_sub(rhs).ok_or(Error::Overflow("div3"))
}

/// Full left-hand side n·t_k(n) + Σ_{j≥1} (n − (k+1)T_j)·t_k(n − T_j).
pub fn tk_recurrence_residual(k: u32, n: u64, tk: &TkTable) -> Result<BigInt> {
    positive(n)?;
    if tk.k() != k {
        return Err(Error::TableMismatch(format!(
            "table holds t_{} but t_{k} was requested",
            tk.k()
        )));
    }
    let mut total = BigInt::from(n) * tk.get(n)?;
    let n_signed = n as i128;
    let weight = k as i128 + 1;
    let mut j = 1u64;
    loop {
        let t = triangular(j);
        if t > n {
            break;
        }
        // t = n is kept: t_k(0) = 1
        let coeff = n_signed - weight * t as i128;
        total += BigInt::from(coeff) * tk.get(n - t)?;
        j += 1;
    }
    Ok(total)
}

/// σ(2n+1) for 0 ≤ n ≤ limit_n, generated from the div1 recurrence alone.
///
/// Every argument 2n+1 − j(j+1) is odd, so the recurrence only ever reads
/// earlier entries. Each division by 2n is checked for exactness.
pub fn sigma_odd_via_div1(limit_n: u64) -> Result<Vec<u64>> {
    let len = usize::try_from(limit_n)
        .ok()
        .and_then(|l| l.checked_add(1))
        .ok_or(Error::Allocation(limit_n))?;
    let mut out: Vec<u64> = Vec::new();
    out.try_reserve_exact(len)
        .map_err(|_| Error::Allocation(limit_n))?;
    out.push(1);
    for n in 1..=limit_n {
        let two_n = 2 * n as i128;
        let mut numerator = 0i128;
        let mut j = 1u64;
        while j * (j + 1) <= 2 * n {
            let jj = (j * (j + 1)) as i128;
            let prev = out[(n - j * (j + 1) / 2) as usize] as i128;
            numerator = add(
                numerator,
                mul(5 * jj - two_n, prev, "div1 generator")?,
                "div1 generator",
            )?;
            j += 1;
        }
        if numerator % two_n != 0 || numerator <= 0 {
            return Err(Error::InexactDivision {
                n,
                numerator,
                denominator: two_n,
            });
        }
        let value =
            u64::try_from(numerator / two_n).map_err(|_| Error::Overflow("div1 generator"))?;
        out.push(value);
    }
    Ok(out)
}

/// Tables an identity check reads from.
#[derive(Debug, Clone, Copy)]
pub enum Tables<'a> {
    Sigma(&'a SigmaTable),
    Tk(&'a TkTable),
}

enum Prepared<'a> {
    Div1(&'a SigmaTable),
    Div2(&'a SigmaTable),
    Div3 { g: Vec<i64>, odd_sigma: Vec<i64> },
    Tk(&'a TkTable),
    Gf(TruncatedSeries),
}

/// An identity bound to its tables, ready to check any n in `1..=hi`.
///
/// Coverage is validated once in [`Verifier::new`]. For div3 the g values
/// and σ at odd arguments are copied into flat arrays so each n costs one
/// dot product; for the generating-function identity the full product
/// series is expanded once.
pub struct Verifier<'a> {
    identity: Identity,
    hi: u64,
    prepared: Prepared<'a>,
}

impl<'a> Verifier<'a> {
    pub fn new(identity: Identity, hi: u64, tables: Tables<'a>) -> Result<Self> {
        positive(hi)?;
        let prepared = match (identity, tables) {
            (Identity::TkRec, Tables::Tk(tk)) => {
                if hi > tk.limit() {
                    return Err(Error::OutOfRange {
                        needed: hi,
                        limit: tk.limit(),
                    });
                }
                Prepared::Tk(tk)
            }
            (Identity::TkRec, Tables::Sigma(_)) => {
                return Err(Error::TableMismatch(
                    "the t_k recurrence needs a t_k table".into(),
                ))
            }
            (_, Tables::Tk(_)) => {
                return Err(Error::TableMismatch(format!(
                    "{identity} needs a sigma table"
                )))
            }
            (_, Tables::Sigma(table)) => {
                table.require(identity.sigma_limit(hi))?;
                match identity {
                    Identity::Div1 => Prepared::Div1(table),
                    Identity::Div2 => Prepared::Div2(table),
                    Identity::Div3 => Prepared::Div3 {
                        g: (0..=hi)
                            .map(|j| if j == 0 { 0 } else { table.g(j) })
                            .collect(),
                        odd_sigma: (0..=hi).map(|i| table.sigma(2 * i + 1) as i64).collect(),
                    },
                    Identity::GfIdentity => Prepared::Gf(gf_product(table, hi)?),
                    Identity::TkRec => unreachable!(),
                }
            }
        };
        Ok(Self {
            identity,
            hi,
            prepared,
        })
    }

    pub fn identity(&self) -> Identity {
        self.identity
    }

    /// (LHS, RHS) at a single n.
    pub fn sides(&self, n: u64) -> Result<(i128, i128)> {
        positive(n)?;
        if n > self.hi {
            return Err(Error::OutOfRange {
                needed: n,
                limit: self.hi,
            });
        }
        match &self.prepared {
            Prepared::Div1(t) => div1_sides(n, t),
            Prepared::Div2(t) => div2_sides(n, t),
            Prepared::Div3 { g, odd_sigma } => {
                let n_us = n as usize;
                let lhs = mul(n as i128, odd_sigma[n_us] as i128, "div3")?;
                // Σ_{j=1}^{n} g(j)·σ(2(n−j)+1)
                let sum = g[1..=n_us]
                    .iter()
                    .zip(odd_sigma[..n_us].iter().rev())
                    .try_fold(0i128, |acc, (&gj, &s)| {
                        acc.checked_add(gj as i128 * s as i128)
                    })
                    .ok_or(Error::Overflow("div3"))?;
                Ok((lhs, mul(4, sum, "div3")?))
            }
            Prepared::Tk(tk) => {
                let full = tk_recurrence_residual(tk.k(), n, tk)?;
                let lhs_big = BigInt::from(n) * tk.get(n)?;
                let rhs_big = &lhs_big - &full;
                let lhs = lhs_big.to_i128().ok_or(Error::Overflow("t_k recurrence"))?;
                let rhs = rhs_big.to_i128().ok_or(Error::Overflow("t_k recurrence"))?;
                Ok((lhs, rhs))
            }
            Prepared::Gf(product) => gf_sides(product, n),
        }
    }

    /// Checks every n in `lo..=hi` in order.
    pub fn run(&self, lo: u64, hi: u64) -> Result<RecurrenceReport> {
        positive(lo)?;
        let mut report = RecurrenceReport::new(self.identity, lo, hi)?;
        for n in lo..=hi {
            let (lhs, rhs) = self.sides(n)?;
            report.record(n, lhs, rhs)?;
        }
        Ok(report)
    }

    /// Splits `lo..=hi` into blocks, checks them on `threads` workers and
    /// merges the reports back in range order.
    pub fn run_blocks(
        &self,
        lo: u64,
        hi: u64,
        block: u64,
        threads: usize,
        progress: &(dyn Fn(u64) + Sync),
    ) -> Result<RecurrenceReport> {
        positive(lo)?;
        if lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        let parts = run_blocks(lo, hi, block, threads, |a, b| self.run(a, b), progress)?;
        let mut iter = parts.into_iter();
        let first = iter.next().expect("at least one block");
        iter.try_fold(first, RecurrenceReport::merge)
    }
}

/// Checks `identity` for every n in `lo..=hi`.
///
/// The tables must cover `hi` (σ up to 2·hi+1 for div1/div3, up to hi
/// otherwise); a short table is rejected before any n is evaluated.
pub fn batch_verify(
    identity: Identity,
    lo: u64,
    hi: u64,
    tables: Tables<'_>,
) -> Result<RecurrenceReport> {
    if lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    Verifier::new(identity, hi, tables)?.run(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::t_k_table;
    use num_traits::Zero;

    fn table(limit: u64) -> SigmaTable {
        SigmaTable::build(limit).unwrap()
    }

    #[test]
    fn div1_hand_values() {
        let t = table(20);
        assert_eq!(div1_sides(1, &t).unwrap(), (8, 8));
        assert_eq!(div1_sides(2, &t).unwrap(), (24, 24));
        assert_eq!(div1_sides(3, &t).unwrap(), (48, 48));
        assert_eq!(div1_residual(9, &t).unwrap(), 0);
        assert_eq!(
            div1_residual(10, &t),
            Err(Error::OutOfRange {
                needed: 21,
                limit: 20
            })
        );
        assert_eq!(div1_residual(0, &t), Err(Error::NonPositive("n")));
    }

    #[test]
    fn div2_hand_values() {
        let t = table(20);
        assert_eq!(div2_sides(3, &t).unwrap(), (3, 3));
        assert_eq!(div2_sides(2, &t).unwrap(), (0, 0));
        assert_eq!(div2_sides(1, &t).unwrap(), (1, 1));
        assert_eq!(
            div2_residual(21, &t),
            Err(Error::OutOfRange {
                needed: 21,
                limit: 20
            })
        );
    }

    #[test]
    fn div3_hand_values() {
        let t = table(20);
        assert_eq!(div3_sides(1, &t).unwrap(), (4, 4));
        assert_eq!(div3_sides(2, &t).unwrap(), (12, 12));
        assert_eq!(div3_sides(3, &t).unwrap(), (24, 24));
    }

    #[test]
    fn prepared_div3_matches_direct_route() {
        let t = table(2 * 300 + 1);
        let v = Verifier::new(Identity::Div3, 300, Tables::Sigma(&t)).unwrap();
        for n in 1..=300 {
            assert_eq!(v.sides(n).unwrap(), div3_sides(n, &t).unwrap());
        }
    }

    #[test]
    fn tk_recurrence_hand_values() {
        let t1 = t_k_table(1, 5).unwrap();
        assert_eq!(tk_recurrence_residual(1, 1, &t1).unwrap(), BigInt::zero());
        let t4 = t_k_table(4, 5).unwrap();
        assert_eq!(tk_recurrence_residual(4, 2, &t4).unwrap(), BigInt::zero());
        assert_eq!(tk_recurrence_residual(4, 3, &t4).unwrap(), BigInt::zero());
        assert_eq!(*t4.get(3).unwrap(), BigInt::from(8));
        assert!(matches!(
            tk_recurrence_residual(3, 2, &t4),
            Err(Error::TableMismatch(_))
        ));
        assert!(matches!(
            tk_recurrence_residual(4, 6, &t4),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn dropping_the_boundary_term_breaks_the_tk_recurrence() {
        // at n = 3 = T_2 the t_k(0) term is −12; without it the sum is −12, not 0
        let t4 = t_k_table(4, 3).unwrap();
        let without_boundary =
            BigInt::from(3) * t4.get(3).unwrap() + BigInt::from(3 - 5) * t4.get(2).unwrap();
        assert_eq!(without_boundary, BigInt::from(12));
    }

    #[test]
    fn odd_sigma_generator() {
        assert_eq!(sigma_odd_via_div1(0).unwrap(), vec![1]);
        assert_eq!(sigma_odd_via_div1(3).unwrap(), vec![1, 4, 6, 8]);
        let out = sigma_odd_via_div1(10_000).unwrap();
        for k in 1..=6u32 {
            let p = 5u64.pow(k);
            if p > 20_001 {
                break;
            }
            assert_eq!(out[((p - 1) / 2) as usize], (5 * p - 1) / 4, "5^{k}");
        }
    }

    #[test]
    fn batch_rejects_short_or_wrong_tables() {
        let t = table(100);
        assert!(matches!(
            batch_verify(Identity::Div1, 1, 50, Tables::Sigma(&t)),
            Err(Error::OutOfRange {
                needed: 101,
                limit: 100
            })
        ));
        assert!(batch_verify(Identity::Div1, 1, 49, Tables::Sigma(&t))
            .unwrap()
            .passed());
        assert!(matches!(
            batch_verify(Identity::TkRec, 1, 10, Tables::Sigma(&t)),
            Err(Error::TableMismatch(_))
        ));
        let tk = t_k_table(2, 10).unwrap();
        assert!(matches!(
            batch_verify(Identity::Div2, 1, 10, Tables::Tk(&tk)),
            Err(Error::TableMismatch(_))
        ));
        assert_eq!(
            batch_verify(Identity::Div2, 5, 4, Tables::Sigma(&t)),
            Err(Error::InvalidRange { lo: 5, hi: 4 })
        );
    }

    #[test]
    fn small_batches_pass() {
        let t = table(2_001);
        for id in [
            Identity::Div1,
            Identity::Div2,
            Identity::Div3,
            Identity::GfIdentity,
        ] {
            let r = batch_verify(id, 1, 1_000, Tables::Sigma(&t)).unwrap();
            assert!(r.passed(), "{id}: {:?}", r.failures.first());
            assert_eq!(r.checked_count, 1_000);
        }
        let tk = t_k_table(4, 1_000).unwrap();
        let r = batch_verify(Identity::TkRec, 1, 1_000, Tables::Tk(&tk)).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn corrupted_table_is_reported_in_order() {
        let mut values = table(41).values().to_vec();
        values[7] += 1;
        let bad = SigmaTable::from_values_unchecked(values);
        let r = batch_verify(Identity::Div2, 1, 20, Tables::Sigma(&bad)).unwrap();
        assert!(!r.passed());
        assert_eq!(r.checked_count, 20);
        assert!(r.failures.windows(2).all(|w| w[0].n < w[1].n));
        assert!(r
            .failures
            .iter()
            .all(|f| f.residual == f.lhs - f.rhs && f.residual != 0));
        assert_eq!(r.failures[0].n, 7);
    }

    #[test]
    fn block_runs_match_single_run() {
        let t = table(4_001);
        let v = Verifier::new(Identity::Div1, 2_000, Tables::Sigma(&t)).unwrap();
        let whole = v.run(1, 2_000).unwrap();
        assert_eq!(v.run_blocks(1, 2_000, 333, 1, &|_| {}).unwrap(), whole);
        assert_eq!(v.run_blocks(1, 2_000, 333, 3, &|_| {}).unwrap(), whole);
    }
}
