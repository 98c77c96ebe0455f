#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfield::io::{read_grid_csv, read_rank_function, write_grid_csv};

fuzz_target!(|text: &str| {
    let Ok(csv) = read_grid_csv(text) else {
        return;
    };
    let written = write_grid_csv(&csv.grid, csv.dim, &csv.phi, &csv.values, &[]);
    assert_eq!(read_grid_csv(&written).expect("written grid parses"), csv);
    let _ = read_rank_function(text);
});
