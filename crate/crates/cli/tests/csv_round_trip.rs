use proptest::prelude::*;
use splitsea_cli::io::{read_csv, write_csv, Table};

fn value() -> impl Strategy<Value = f64> {
    use proptest::num::f64::*;
    POSITIVE | NEGATIVE | NORMAL | SUBNORMAL | ZERO | INFINITE
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_values_round_trip_bit_for_bit(rows in prop::collection::vec(prop::collection::vec(value(), 3), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b", "c"]);
        for r in &rows {
            t.push(r.clone());
        }
        write_csv(&path, &t).unwrap();
        let back = read_csv(&path).unwrap();
        prop_assert_eq!(&back.header, &t.header);
        prop_assert_eq!(back.rows.len(), rows.len());
        for (x, y) in back.rows.iter().flatten().zip(rows.iter().flatten()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
