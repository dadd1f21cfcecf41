#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if dfcert::parse::SystemFile::from_json(s).is_ok() {
        let _ = dfcert::parse::parse_system(s, 64);
    }
});
