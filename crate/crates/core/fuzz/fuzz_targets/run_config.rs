#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfield_cli::RunConfig;

fuzz_target!(|text: &str| {
    if let Ok(config) = RunConfig::parse(text) {
        let json = serde_json::to_string(&config).unwrap();
        assert_eq!(RunConfig::parse(&json).expect("serialized config parses"), config);
    }
});
