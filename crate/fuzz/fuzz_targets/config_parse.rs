#![no_main]

use libfuzzer_sys::fuzz_target;
use qdp_cli::config::{as_args, parse_config};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(entries) = parse_config(text) {
        // quoted values survive trimming, so rendering back is lossless
        let again: String = entries
            .iter()
            .map(|(k, v)| format!("{k} = \"{v}\"\n"))
            .collect();
        assert_eq!(parse_config(&again).unwrap(), entries);
        assert_eq!(as_args(&entries).len(), 2 * entries.len());
    }
});
