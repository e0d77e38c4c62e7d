use apsquares_core::arith::Integer;
use apsquares_core::coloring::{find_mono_ap, witness_check};
use apsquares_core::extremal::{fermat_upper_bound, find_4ap_in_set, no4ap_max, qn_lower_search};
use apsquares_core::faltings::{b_count_search, ledger_run};
use apsquares_core::square_count::{square_positions_fast, square_positions_naive, Ap};
use num_traits::ToPrimitive;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engines_agree(first in -100_000i64..10_000_000, step in 1i64..=10_000, length in 1u64..=20_000) {
        let ap = Ap::new(Integer::from(first), Integer::from(step), length).unwrap();
        let fast = square_positions_fast(&ap);
        prop_assert_eq!(&fast, &square_positions_naive(&ap));
        prop_assert!(find_4ap_in_set(&fast.positions).is_none());
    }

    #[test]
    fn engines_agree_on_square_rich_progressions(root in 0i64..5_000, step_root in 1i64..100, length in 1u64..50_000) {
        // first term a square and step a multiple of 24 keeps many squares in play
        let ap = Ap::new(Integer::from(root * root), Integer::from(24 * step_root), length).unwrap();
        let fast = square_positions_fast(&ap);
        prop_assert_eq!(&fast, &square_positions_naive(&ap));
        prop_assert!(find_4ap_in_set(&fast.positions).is_none());
    }
}

#[test]
fn mono_ap_fixture_and_determinism() {
    let m = find_mono_ap(200, 4, 2).unwrap().unwrap();
    assert_eq!((m.first.to_u64(), m.step.to_u64()), (Some(5), Some(2)));
    assert_eq!(m.color.bits(), &[false, false]);
    assert_eq!(find_mono_ap(200, 4, 2).unwrap().unwrap(), m);
}

#[test]
fn mono_ap_chain_holds_across_grid() {
    for k in 1..=6usize {
        for n in (10..=2000u64).step_by(37).chain([10_000, 100_000]) {
            let Some(m) = find_mono_ap(n, 4, k).unwrap() else { continue };
            let w = witness_check(&m, k).unwrap();
            assert!(w.divides_first && w.divides_step && w.divides_all_terms, "n={n} k={k}");
            assert!(w.per_term.iter().all(|t| t.parity_even_after_kernel));
            assert!(!w.all_terms_smooth, "smooth monochromatic 4-AP at n={n} k={k}");
        }
    }
}

#[test]
fn no4ap_monotone_with_unit_steps() {
    let mut prev = 0;
    for n in 1..=40 {
        let r = no4ap_max(n).unwrap();
        assert!(r.optimal);
        assert!(r.max_size >= prev && r.max_size <= prev + 1, "n = {n}");
        assert!(find_4ap_in_set(&r.witness).is_none());
        prev = r.max_size;
    }
}

#[test]
fn qn_lower_monotone_in_box() {
    for n in [3u64, 5, 9] {
        let mut prev = 0;
        for d_max in [4u64, 12, 24, 48] {
            let c = qn_lower_search(n, d_max, 150).unwrap().best_count;
            assert!(c >= prev);
            prev = c;
        }
        let mut prev = 0;
        for x_max in [20u64, 60, 150, 400] {
            let c = qn_lower_search(n, 30, x_max).unwrap().best_count;
            assert!(c >= prev);
            prev = c;
        }
        assert!(prev <= fermat_upper_bound(n));
    }
}

#[test]
fn qn_witness_reverifies() {
    for n in [2u64, 4, 7, 12, 30] {
        let r = qn_lower_search(n, 40, 300).unwrap();
        let again = square_positions_naive(&Ap::new(r.witness.start.clone(), Integer::from(r.witness.step), n).unwrap());
        assert_eq!(again, r.witness.positions);
        assert!(again.count() as u64 >= r.best_count);
        assert!(find_4ap_in_set(&again.positions).is_none());
    }
}

#[test]
fn ledger_solutions_embed_in_census() {
    let ledger = ledger_run(&Integer::from(1), &Integer::from(24), 13, 13, None).unwrap();
    let census = b_count_search(13, 24, true).unwrap();
    for g in &ledger.generated {
        assert!(census.solutions.contains(&g.solution), "{:?}", g.solution);
    }
    // squares 0, 1, 4, 9, 16, 25 all inside [0, 36): one zero-product solution
    let ledger = ledger_run(&Integer::from(0), &Integer::from(1), 36, 36, None).unwrap();
    assert_eq!(ledger.generated.len(), 1);
    assert!(ledger.generated[0].solution.product_zero);
    let census = b_count_search(36, 1, true).unwrap();
    assert!(census.solutions.contains(&ledger.generated[0].solution));
}

#[test]
fn ledger_valid_for_doubled_m() {
    for (a, d, n) in [(1i64, 24i64, 4u64), (0, 1, 36), (1, 24, 500), (49, 120, 300)] {
        for m in [6u64, 12, 24] {
            let r = ledger_run(&Integer::from(a), &Integer::from(d), n, m, None).unwrap();
            assert!(r.all_hold());
            for g in &r.generated {
                let s = &g.solution;
                for i in 0..6 {
                    let lhs = Integer::from(d) * (&s.p + &s.q * s.b[i]);
                    let rhs = &s.q * (Integer::from(a) + Integer::from(d) * g.positions[i]);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

#[test]
fn b_count_monotone_grid() {
    let counts: Vec<Vec<u64>> = [6u64, 7, 8]
        .iter()
        .map(|&m| [1u64, 2, 3].iter().map(|&h| b_count_search(m, h, false).unwrap().count).collect())
        .collect();
    for i in 0..3 {
        for j in 0..3 {
            if i + 1 < 3 {
                assert!(counts[i][j] <= counts[i + 1][j]);
            }
            if j + 1 < 3 {
                assert!(counts[i][j] <= counts[i][j + 1]);
            }
        }
    }
}
