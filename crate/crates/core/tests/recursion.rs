use gammaflow::closed_forms::{closed_coeff, cross_validate, ClosedCoeff};
use gammaflow::golden;
use gammaflow::laws::structure_violations;
use gammaflow::{Partition, RnTable};
use num_bigint::BigInt;

#[test]
fn golden_listings_match() {
    let t = RnTable::in_memory();
    for n in golden::ORDERS {
        assert_eq!(*t.get(n).unwrap(), golden::golden(n).unwrap(), "R_{n}");
    }
}

#[test]
fn term_counts_through_15() {
    let t = RnTable::in_memory();
    let counts: Vec<usize> = (3..=10).map(|n| t.term_count(n).unwrap()).collect();
    assert_eq!(counts, vec![1, 2, 4, 8, 14, 24, 42, 69]);
    assert_eq!(t.term_count(15).unwrap(), 665);
}

#[test]
fn structure_laws_through_15() {
    let t = RnTable::in_memory();
    for n in 3..=15 {
        let v = structure_violations(&t.get(n).unwrap(), n);
        assert!(v.is_empty(), "R_{n}: {v:?}");
    }
}

#[test]
fn odd_central_coefficients() {
    let t = RnTable::in_memory();
    let r8 = t.get(8).unwrap();
    assert_eq!(
        r8.coeff_of(&Partition::new([7, 5, 4]).unwrap()),
        BigInt::from(-560)
    );
    let r10 = t.get(10).unwrap();
    let alpha = Partition::new([9, 6, 5]).unwrap();
    assert_eq!(r10.coeff_of(&alpha), BigInt::from(-2520));
    assert!(matches!(
        closed_coeff(&alpha, 10),
        ClosedCoeff::Value { .. }
    ));
}

#[test]
fn cross_validation_through_12() {
    let t = RnTable::in_memory();
    let report = cross_validate(12, &t).unwrap();
    let bad: Vec<_> = report.failures().collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn order_20_and_cross_validation_to_19() {
    let t = RnTable::in_memory();
    let start = std::time::Instant::now();
    assert_eq!(t.term_count(20).unwrap(), 4555);
    eprintln!("R_20 in {:?}", start.elapsed());
    let report = cross_validate(19, &t).unwrap();
    let bad: Vec<_> = report.failures().collect();
    assert!(bad.is_empty(), "{bad:#?}");
}
