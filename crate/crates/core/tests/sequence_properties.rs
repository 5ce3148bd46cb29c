use multinacci::sequences::{
    difference_sequence, generate_sequence, phi, phi_scan, RecurrenceSpec,
};
use multinacci::FixedDecimal;
use num_bigint::BigUint;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_term_is_the_sum_of_its_predecessors(
        order in 2usize..=12,
        seeds in prop::collection::vec(0u64..1_000_000, 12),
        extra in 2usize..60,
    ) {
        let mut init: Vec<BigUint> = seeds[..order].iter().map(|&v| BigUint::from(v)).collect();
        if init.iter().all(|v| *v == BigUint::from(0u32)) {
            init[0] = BigUint::from(1u32);
        }
        let spec = RecurrenceSpec::new(order, init.clone(), order + extra).unwrap();
        let seq = generate_sequence(&spec);
        prop_assert_eq!(seq.terms.len(), order + extra);
        prop_assert_eq!(&seq.terms[..order], &init[..]);
        for n in order..seq.terms.len() {
            let sum: BigUint = seq.terms[n - order..n].iter().sum();
            prop_assert_eq!(&seq.terms[n], &sum);
        }
    }

    #[test]
    fn ratio_stays_between_one_half_and_the_golden_inverse(order in 2usize..=60) {
        let v = phi(order, 100, 30).unwrap().value;
        prop_assert!(v > FixedDecimal::new(5, 1), "order {order}: {v}");
        prop_assert!(v < FixedDecimal::new(62, 2), "order {order}: {v}");
    }
}

#[test]
fn all_ones_terms_are_nondecreasing() {
    for m in 2..=12 {
        let seq = generate_sequence(&RecurrenceSpec::ones(m, 100).unwrap());
        assert!(seq.terms[m..].windows(2).all(|w| w[0] <= w[1]), "order {m}");
    }
}

#[test]
fn limit_does_not_depend_on_initial_values() {
    let ones = RecurrenceSpec::ones(2, 100).unwrap();
    let lucas =
        RecurrenceSpec::new(2, vec![BigUint::from(1u32), BigUint::from(3u32)], 100).unwrap();
    let a = generate_sequence(&ones).tail_ratio(40);
    let b = generate_sequence(&lucas).tail_ratio(40);
    assert!((&a - &b).abs().to_f64() < 1e-20);
}

#[test]
fn phi_is_strictly_decreasing_and_above_one_half() {
    let scan = phi_scan(40, 100, 30).unwrap();
    assert_eq!(scan.len(), 39);
    let half = FixedDecimal::new(5, 1);
    for p in &scan {
        assert!(p.value > half, "order {}", p.order);
    }
    for w in scan.windows(2) {
        assert!(
            w[1].value < w[0].value,
            "orders {} and {}",
            w[0].order,
            w[1].order
        );
    }
}

#[test]
fn differences_are_positive_and_shrink() {
    let diffs = difference_sequence(&phi_scan(40, 100, 30).unwrap()).unwrap();
    assert_eq!(diffs.entries.len(), 38);
    assert!(diffs.is_positive_and_decreasing());
}

#[test]
fn consecutive_difference_ratio_approaches_one_half() {
    // Dominant-root asymptotics: phi(m) - 1/2 ~ 2^-(m+2), so each
    // difference is about half the previous one.
    let diffs = difference_sequence(&phi_scan(25, 100, 30).unwrap()).unwrap();
    let ratios = diffs.consecutive_ratios();
    // ratios[i] = entry[k+1] / entry[k] with k = i + 1.
    for (i, r) in ratios.iter().enumerate().skip(19) {
        assert!((r - 0.5).abs() < 1e-3, "k = {}: {r}", i + 1);
    }
}

#[test]
fn independent_float_recurrence_agrees_with_exact_ratio() {
    // Oracle: the same ratio from a normalised f64 recurrence, which never
    // touches big integers.
    for m in 2..=20 {
        let mut window = vec![1.0f64; m];
        for _ in m..100 {
            let next: f64 = window[window.len() - m..].iter().sum();
            window.push(next);
            let scale = *window.last().unwrap();
            window.iter_mut().for_each(|v| *v /= scale);
        }
        let n = window.len();
        let oracle = window[n - 2] / window[n - 1];
        let exact = phi(m, 100, 30).unwrap().value.to_f64();
        assert!(
            (oracle - exact).abs() < 1e-13,
            "order {m}: {oracle} vs {exact}"
        );
    }
}
