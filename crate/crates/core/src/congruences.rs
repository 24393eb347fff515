//! Scanners for the two triangular-shift congruences of σ and the two
//! classical ones.
//!
//! * mod 5: S(n) = Σ_{j≥0} σ(2n+1 − j(j+1)) ≡ 0 whenever 5 ∤ n.
//! * mod 4: S(n) = Σ_{j≥0} σ(n − T_j) ≡ 0 whenever n is not triangular.
//! * 3 | σ(3n+2) and 4 | σ(4n+3) for every n ≥ 0.
//!
//! Values of n outside a congruence's hypothesis are not checked; their
//! residues are only counted in a histogram.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::divisor::{is_triangular, triangular, SigmaTable};
use crate::error::{Error, Result};
use crate::par::run_blocks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Mod5,
    Mod4,
    Classic3,
    Classic4,
}

impl ScanKind {
    pub fn name(self) -> &'static str {
        match self {
            ScanKind::Mod5 => "mod5",
            ScanKind::Mod4 => "mod4",
            ScanKind::Classic3 => "classic3",
            ScanKind::Classic4 => "classic4",
        }
    }

    pub fn modulus(self) -> u64 {
        match self {
            ScanKind::Mod5 => 5,
            ScanKind::Mod4 | ScanKind::Classic4 => 4,
            ScanKind::Classic3 => 3,
        }
    }

    /// Largest σ argument touched when scanning up to `hi`.
    pub fn sigma_limit(self, hi: u64) -> u64 {
        match self {
            ScanKind::Mod5 => 2 * hi + 1,
            ScanKind::Mod4 => hi,
            ScanKind::Classic3 => 3 * hi + 2,
            ScanKind::Classic4 => 4 * hi + 3,
        }
    }

    /// Smallest n the scan accepts.
    pub fn min_n(self) -> u64 {
        match self {
            ScanKind::Mod5 | ScanKind::Mod4 => 1,
            ScanKind::Classic3 | ScanKind::Classic4 => 0,
        }
    }

    fn hypothesis_holds(self, n: u64) -> bool {
        match self {
            ScanKind::Mod5 => !n.is_multiple_of(5),
            ScanKind::Mod4 => !is_triangular(n),
            ScanKind::Classic3 | ScanKind::Classic4 => true,
        }
    }

    fn sum(self, n: u64, table: &SigmaTable) -> Result<u128> {
        match self {
            ScanKind::Mod5 => mod5_sum(n, table),
            ScanKind::Mod4 => mod4_sum(n, table),
            ScanKind::Classic3 => table.get(3 * n + 2).map(u128::from),
            ScanKind::Classic4 => table.get(4 * n + 3).map(u128::from),
        }
    }
}

impl std::fmt::Display for ScanKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub n: u64,
    pub sum: u128,
    pub residue: u64,
}

/// Result of scanning one congruence over `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub kind: ScanKind,
    pub lo: u64,
    pub hi: u64,
    /// n that satisfied the hypothesis and were tested.
    pub checked: u64,
    pub hypothesis_excluded: u64,
    /// Residues of S(n) over the excluded n.
    pub residue_histogram: BTreeMap<u64, u64>,
    pub violations: Vec<Violation>,
}

impl ScanReport {
    fn new(kind: ScanKind, lo: u64, hi: u64) -> Self {
        Self {
            kind,
            lo,
            hi,
            checked: 0,
            hypothesis_excluded: 0,
            residue_histogram: BTreeMap::new(),
            violations: Vec::new(),
        }
    }

    /// Appends the report for the range immediately following this one.
    pub fn merge(mut self, next: ScanReport) -> Result<Self> {
        if next.kind != self.kind || next.lo != self.hi + 1 {
            return Err(Error::TableMismatch(format!(
                "cannot append {} [{}, {}] to {} [{}, {}]",
                next.kind, next.lo, next.hi, self.kind, self.lo, self.hi
            )));
        }
        self.hi = next.hi;
        self.checked += next.checked;
        self.hypothesis_excluded += next.hypothesis_excluded;
        for (r, c) in next.residue_histogram {
            *self.residue_histogram.entry(r).or_default() += c;
        }
        self.violations.extend(next.violations);
        Ok(self)
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Σ_{j≥0, j(j+1) ≤ 2n} σ(2n+1 − j(j+1)).
pub fn mod5_sum(n: u64, table: &SigmaTable) -> Result<u128> {
    if n == 0 {
        return Err(Error::NonPositive("n"));
    }
    let top = 2 * n + 1;
    table.require(top)?;
    let mut sum = 0u128;
    let mut j = 0u64;
    while j * (j + 1) <= 2 * n {
        sum += u128::from(table.sigma(top - j * (j + 1)));
        j += 1;
    }
    Ok(sum)
}

/// Σ_{j≥0, T_j ≤ n} σ(n − T_j); the T_j = n term adds σ(0) = 0.
pub fn mod4_sum(n: u64, table: &SigmaTable) -> Result<u128> {
    if n == 0 {
        return Err(Error::NonPositive("n"));
    }
    table.require(n)?;
    let mut sum = 0u128;
    let mut j = 0u64;
    loop {
        let t = triangular(j);
        if t > n {
            break;
        }
        sum += u128::from(table.sigma(n - t));
        j += 1;
    }
    Ok(sum)
}

/// (3 | σ(3n+2), 4 | σ(4n+3)).
pub fn classic_check(n: u64, table: &SigmaTable) -> Result<(bool, bool)> {
    table.require(4 * n + 3)?;
    Ok((
        table.sigma(3 * n + 2).is_multiple_of(3),
        table.sigma(4 * n + 3).is_multiple_of(4),
    ))
}

fn check_scan_bounds(kind: ScanKind, lo: u64, hi: u64, table: &SigmaTable) -> Result<()> {
    if lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if lo < kind.min_n() {
        return Err(Error::NonPositive("n"));
    }
    table.require(kind.sigma_limit(hi))
}

fn scan_unchecked(kind: ScanKind, lo: u64, hi: u64, table: &SigmaTable) -> Result<ScanReport> {
    let modulus = u128::from(kind.modulus());
    let mut report = ScanReport::new(kind, lo, hi);
    for n in lo..=hi {
        let sum = kind.sum(n, table)?;
        let residue = (sum % modulus) as u64;
        if kind.hypothesis_holds(n) {
            report.checked += 1;
            if residue != 0 {
                report.violations.push(Violation { n, sum, residue });
            }
        } else {
            report.hypothesis_excluded += 1;
            *report.residue_histogram.entry(residue).or_default() += 1;
        }
    }
    Ok(report)
}

/// Scans `lo..=hi`. Coverage is checked before any n is evaluated.
pub fn scan(kind: ScanKind, lo: u64, hi: u64, table: &SigmaTable) -> Result<ScanReport> {
    check_scan_bounds(kind, lo, hi, table)?;
    scan_unchecked(kind, lo, hi, table)
}

/// Block-partitioned [`scan`]; output is identical for every thread count.
pub fn scan_blocks(
    kind: ScanKind,
    lo: u64,
    hi: u64,
    table: &SigmaTable,
    block: u64,
    threads: usize,
    progress: &(dyn Fn(u64) + Sync),
) -> Result<ScanReport> {
    check_scan_bounds(kind, lo, hi, table)?;
    let parts = run_blocks(
        lo,
        hi,
        block,
        threads,
        |a, b| scan_unchecked(kind, a, b, table),
        progress,
    )?;
    let mut iter = parts.into_iter();
    let first = iter.next().expect("at least one block");
    iter.try_fold(first, ScanReport::merge)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod5_hand_values() {
        let t = SigmaTable::build(11).unwrap();
        assert_eq!(mod5_sum(1, &t).unwrap(), 5);
        assert_eq!(mod5_sum(3, &t).unwrap(), 15);
        assert_eq!(mod5_sum(5, &t).unwrap(), 31);
        assert!(matches!(
            mod5_sum(6, &t),
            Err(Error::OutOfRange { needed: 13, .. })
        ));
        assert_eq!(mod5_sum(0, &t), Err(Error::NonPositive("n")));
    }

    #[test]
    fn mod4_hand_values() {
        let t = SigmaTable::build(5).unwrap();
        assert_eq!(mod4_sum(2, &t).unwrap(), 4);
        assert_eq!(mod4_sum(5, &t).unwrap(), 16);
        assert_eq!(mod4_sum(3, &t).unwrap(), 7);
    }

    #[test]
    fn excluded_n_go_to_the_histogram() {
        let t = SigmaTable::build(10).unwrap();
        let r = scan(ScanKind::Mod4, 3, 3, &t).unwrap();
        assert_eq!(r.hypothesis_excluded, 1);
        assert_eq!(r.checked, 0);
        assert_eq!(r.residue_histogram, BTreeMap::from([(3, 1)]));
        assert!(r.passed());

        let t = SigmaTable::build(11).unwrap();
        let r = scan(ScanKind::Mod5, 5, 5, &t).unwrap();
        assert_eq!(r.residue_histogram, BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn classic_values() {
        let t = SigmaTable::build(7).unwrap();
        assert_eq!(classic_check(0, &t).unwrap(), (true, true));
        assert_eq!(classic_check(1, &t).unwrap(), (true, true));
        assert!(classic_check(2, &t).is_err());
        let r = scan(ScanKind::Classic4, 0, 1, &t).unwrap();
        assert_eq!((r.checked, r.hypothesis_excluded), (2, 0));
        assert!(r.residue_histogram.is_empty());
    }

    #[test]
    fn bounds_are_checked_up_front() {
        let t = SigmaTable::build(100).unwrap();
        assert!(matches!(
            scan(ScanKind::Mod5, 1, 50, &t),
            Err(Error::OutOfRange { needed: 101, .. })
        ));
        assert_eq!(
            scan(ScanKind::Mod4, 0, 10, &t),
            Err(Error::NonPositive("n"))
        );
        assert_eq!(
            scan(ScanKind::Mod4, 9, 8, &t),
            Err(Error::InvalidRange { lo: 9, hi: 8 })
        );
    }

    #[test]
    fn wrong_table_produces_ordered_violations() {
        let mut values = SigmaTable::build(200).unwrap().values().to_vec();
        values[17] += 2;
        let bad = SigmaTable::from_values_unchecked(values);
        let r = scan(ScanKind::Mod4, 1, 200, &bad).unwrap();
        assert!(!r.passed());
        assert!(r.violations.windows(2).all(|w| w[0].n < w[1].n));
        assert!(r
            .violations
            .iter()
            .all(|v| v.residue != 0 && !is_triangular(v.n)));
    }

    #[test]
    fn blocked_scans_match_single_pass() {
        let t = SigmaTable::build(20_001).unwrap();
        for kind in [ScanKind::Mod5, ScanKind::Mod4] {
            let whole = scan(kind, 1, 10_000, &t).unwrap();
            assert_eq!(
                scan_blocks(kind, 1, 10_000, &t, 777, 1, &|_| {}).unwrap(),
                whole
            );
            assert_eq!(
                scan_blocks(kind, 1, 10_000, &t, 777, 4, &|_| {}).unwrap(),
                whole
            );
            assert!(whole.passed());
        }
    }
}
