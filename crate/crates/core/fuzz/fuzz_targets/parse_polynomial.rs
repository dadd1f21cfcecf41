#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let vars = ["x".to_string(), "y".to_string(), "z".to_string()];
    if let Ok(p) = dfcert::parse::parse_polynomial(s, &vars) {
        // Display must re-parse to the same polynomial.
        let back = dfcert::parse::parse_polynomial(&p.to_string(), &vars).expect("display re-parses");
        assert_eq!(back, p);
    }
});
