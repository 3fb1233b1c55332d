#![no_main]

use libfuzzer_sys::fuzz_target;

use gsqg::harness::ic::{build_ic, InitialCondition};
use gsqg::Grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let grid = Grid::new(32).unwrap();
    let parsed = [
        text.parse::<InitialCondition>().ok(),
        serde_json::from_str::<InitialCondition>(text).ok(),
    ];
    for ic in parsed.into_iter().flatten() {
        let _ = build_ic(&ic, &grid);
        let round = serde_json::to_string(&ic).unwrap();
        let back: InitialCondition = serde_json::from_str(&round).unwrap();
        assert_eq!(back.name(), ic.name());
    }
});
