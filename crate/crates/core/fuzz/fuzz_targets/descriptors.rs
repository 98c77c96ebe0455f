#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfield::{Grid, WeightFunction};

fuzz_target!(|text: &str| {
    if let Ok(grid) = text.parse::<Grid>() {
        assert_eq!(grid.to_string().parse::<Grid>().unwrap(), grid);
    }
    if let Ok(phi) = text.parse::<WeightFunction>() {
        assert_eq!(phi.to_string().parse::<WeightFunction>().unwrap(), phi);
        assert!(phi.eval(0.5).is_finite());
    }
});
