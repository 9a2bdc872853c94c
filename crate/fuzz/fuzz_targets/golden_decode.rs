#![no_main]

use libfuzzer_sys::fuzz_target;
use qdp_core::golden::GoldenRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rec) = GoldenRecord::decode(text) {
        let back = GoldenRecord::decode(&rec.encode().unwrap()).unwrap();
        assert_eq!(back.values.len(), rec.values.len());
        assert_eq!(back.convention_hash, rec.convention_hash);
    }
});
