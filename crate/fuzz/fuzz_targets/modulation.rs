#![no_main]

use libfuzzer_sys::fuzz_target;
use selstbc::performance::ModulationSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<ModulationSpec>() {
        assert_eq!(spec.to_string().parse::<ModulationSpec>().unwrap(), spec);
        assert!(!spec.identities().is_empty());
        let c = spec.cep(1.0);
        assert!((0.0..=1.0).contains(&c));
    }
});
