#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(r) = dfcert::report::Report::from_json(s) {
            let _ = r.to_text();
            let _ = r.to_json();
        }
    }
});
