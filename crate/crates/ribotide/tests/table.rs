use proptest::prelude::*;
use ribotide::table::{format_float, Cell, Table};

#[test]
fn floats_print_like_printf_g17() {
    assert_eq!(format_float(0.1), "0.10000000000000001");
    assert_eq!(format_float(0.25), "0.25");
    assert_eq!(format_float(1e-5), "1.0000000000000001e-05");
    assert_eq!(format_float(100.0), "100");
    assert_eq!(format_float(-0.5), "-0.5");
    assert_eq!(format_float(1e20), "1e+20");
    assert_eq!(format_float(0.0), "0");
}

#[test]
fn missing_cells_render_as_na_and_null() {
    let mut t = Table::new(&["rho0", "j3_limit"]);
    t.push(vec![Cell::Float(0.5), Cell::Missing]);
    t.push(vec![Cell::Float(0.25), Cell::Float(0.125)]);
    assert_eq!(t.to_csv(), "rho0,j3_limit\n0.5,NA\n0.25,0.125\n");
    let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
    assert!(v[0]["j3_limit"].is_null());
    assert_eq!(v[1]["j3_limit"].as_f64(), Some(0.125));
    assert_eq!(v[1]["rho0"].as_f64(), Some(0.25));
}

proptest! {
    #[test]
    fn printed_floats_read_back_exactly(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = format_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        prop_assert!(!s.contains(','));
    }
}
