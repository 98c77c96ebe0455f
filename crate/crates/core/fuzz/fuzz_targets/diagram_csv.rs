#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfield::io::{read_diagram, write_diagram};
use rankfield::rankspace::MONOTONICITY_TOL;
use rankfield::{rank_from_diagram, Grid};

fuzz_target!(|text: &str| {
    let Ok(diagram) = read_diagram(text) else {
        return;
    };
    assert_eq!(read_diagram(&write_diagram(&diagram)).expect("written diagram parses"), diagram);
    let grid = Grid::new(0.0, 1.0, 12).unwrap();
    for k in 0..3 {
        assert!(rank_from_diagram(&diagram, k, grid).is_monotone(MONOTONICITY_TOL));
    }
});
