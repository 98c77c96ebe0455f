#![no_main]

use libfuzzer_sys::fuzz_target;
use rankfield::csr::CsrModelHeader;
use rankfield::io::PcaModelHeader;
use rankfield::pointproc::ProcessSpec;

fuzz_target!(|text: &str| {
    if let Ok(h) = PcaModelHeader::from_json(text) {
        assert_eq!(PcaModelHeader::from_json(&h.to_json()).unwrap(), h);
    }
    if let Ok(h) = CsrModelHeader::from_json(text) {
        let _ = h.to_json();
    }
    // Specs are only validated; generation may legitimately run long.
    if let Ok(spec) = serde_json::from_str::<ProcessSpec>(text) {
        let _ = spec.validate();
    }
});
