use divsum::{
    divisor_sum, is_triangular, max_tri_index, psi_product_series, psi_series, scan, sigma_even,
    sigma_odd, triangular, Failure, Identity, RecurrenceReport, ScanKind, ScanReport, SigmaTable,
    TruncatedSeries, Violation,
};
use proptest::prelude::*;
use std::collections::BTreeMap;

const ORDER: usize = 12;

fn small_series() -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(-50i64..50, ORDER + 1).prop_map(|c| TruncatedSeries::from_i64s(&c))
}

proptest! {
    #[test]
    fn multiplication_commutes(a in small_series(), b in small_series()) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
    }

    #[test]
    fn multiplication_associates(a in small_series(), b in small_series(), c in small_series()) {
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn multiplication_distributes(a in small_series(), b in small_series(), c in small_series()) {
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pow_is_repeated_multiplication(a in small_series(), k in 0u32..6) {
        let mut expect = TruncatedSeries::one(ORDER);
        for _ in 0..k {
            expect = expect.mul(&a).unwrap();
        }
        prop_assert_eq!(a.pow(k), expect);
    }

    #[test]
    fn product_form_of_psi(order in 0usize..300) {
        prop_assert_eq!(psi_product_series(order), psi_series(order));
    }

    #[test]
    fn triangular_tests_agree(j in 0u64..(1 << 31), delta in 1u64..1000) {
        let t = triangular(j);
        prop_assert!(is_triangular(t));
        prop_assert_eq!(max_tri_index(t), j);
        let next = triangular(j + 1);
        let between = t + delta % (next - t);
        prop_assert_eq!(is_triangular(between), between == t);
        prop_assert_eq!(max_tri_index(between), j);
    }

    #[test]
    fn max_tri_index_brackets_bound(bound in any::<u64>()) {
        let j = max_tri_index(bound);
        prop_assert!(triangular(j) <= bound);
        let next = (j as u128 + 1) * (j as u128 + 2) / 2;
        prop_assert!(next > bound as u128);
    }

    #[test]
    fn odd_even_split(n in 1u64..1_000_000_000) {
        let (o, e) = (sigma_odd(n).unwrap(), sigma_even(n).unwrap());
        prop_assert_eq!(o + e, divisor_sum(n));
        if n % 2 == 0 {
            prop_assert_eq!(e, 2 * divisor_sum(n / 2));
        } else {
            prop_assert_eq!(e, 0);
        }
    }

    #[test]
    fn sigma_is_multiplicative_on_coprime_pairs(a in 1u64..100_000, b in 1u64..100_000) {
        fn gcd(a: u64, b: u64) -> u64 { if b == 0 { a } else { gcd(b, a % b) } }
        prop_assume!(gcd(a, b) == 1);
        prop_assert_eq!(divisor_sum(a * b), divisor_sum(a) * divisor_sum(b));
    }

    #[test]
    fn recurrence_report_json_round_trip(
        lo in 1u64..1000,
        span in 0u64..1000,
        rows in prop::collection::vec((any::<u64>(), any::<i64>(), any::<i64>()), 0..8),
    ) {
        let failures = rows
            .into_iter()
            .map(|(n, l, r)| Failure { n, lhs: l as i128 * 1_000_000_007, rhs: r as i128, residual: l as i128 * 1_000_000_007 - r as i128 })
            .collect();
        let report = RecurrenceReport { identity: Identity::Div3, lo, hi: lo + span, checked_count: span + 1, failures };
        let text = serde_json::to_string(&report).unwrap();
        prop_assert_eq!(serde_json::from_str::<RecurrenceReport>(&text).unwrap(), report);
    }

    #[test]
    fn scan_report_json_round_trip(
        hist in prop::collection::btree_map(0u64..5, any::<u64>(), 0..5),
        rows in prop::collection::vec((any::<u64>(), any::<u128>(), 0u64..5), 0..8),
    ) {
        let report = ScanReport {
            kind: ScanKind::Mod5,
            lo: 1,
            hi: 10,
            checked: 8,
            hypothesis_excluded: 2,
            residue_histogram: hist,
            violations: rows.into_iter().map(|(n, sum, residue)| Violation { n, sum, residue }).collect(),
        };
        let text = serde_json::to_string(&report).unwrap();
        prop_assert_eq!(serde_json::from_str::<ScanReport>(&text).unwrap(), report);
    }
}

#[test]
fn scan_merge_is_split_invariant() {
    let table = SigmaTable::build(4_001).unwrap();
    for kind in [ScanKind::Mod5, ScanKind::Mod4, ScanKind::Classic3] {
        let lo = kind.min_n().max(1);
        let whole = scan(kind, lo, 1000, &table).unwrap();
        for split in [lo, 17, 500, 999] {
            let left = scan(kind, lo, split, &table).unwrap();
            let right = scan(kind, split + 1, 1000, &table).unwrap();
            assert_eq!(left.merge(right).unwrap(), whole, "{kind} split at {split}");
        }
        assert!(whole.clone().merge(whole.clone()).is_err());
    }
    assert_eq!(
        scan(ScanKind::Mod4, 3, 3, &table)
            .unwrap()
            .residue_histogram,
        BTreeMap::from([(3, 1)])
    );
}
