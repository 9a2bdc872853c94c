#![no_main]

use libfuzzer_sys::fuzz_target;
use qdp_cli::grid_csv::{read_grid, write_grid};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = read_grid(text) {
        assert_eq!(grid.values.len(), grid.sites.len() * grid.times.len());
        if grid.values.iter().all(|v| v.is_finite()) {
            let again = read_grid(&write_grid(&grid.sites, &grid.times, &grid.values)).unwrap();
            assert_eq!(again.sites, grid.sites);
            assert_eq!(again.times, grid.times);
        }
    }
});
