#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = gsqg::harness::config::parse_config(text) {
        // A validated config must yield consistent derived values.
        let _ = config.params();
        let _ = config.grid().unwrap();
        let _ = config.substep_rule();
    }
});
