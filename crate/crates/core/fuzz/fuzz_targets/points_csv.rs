#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfield::io::{read_points, write_points};
use rankfield::{alpha_filtration, compute_persistence};

fuzz_target!(|text: &str| {
    let Ok(pattern) = read_points(text) else {
        return;
    };
    let again = read_points(&write_points(&pattern)).expect("written pattern parses");
    assert_eq!(again, pattern);
    // Small inputs also go through triangulation and reduction.
    if pattern.len() <= 40 {
        if let Ok(complex) = alpha_filtration(&pattern) {
            complex.validate().expect("alpha complex is a filtration");
            compute_persistence(&complex);
        }
    }
});
