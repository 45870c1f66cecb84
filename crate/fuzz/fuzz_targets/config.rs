#![no_main]

use libfuzzer_sys::fuzz_target;
use selstbc_cli::config::parse_settings;
use selstbc_cli::CliError;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_settings(text) {
        Ok(settings) => {
            // validation must either succeed or name at least one problem
            if let Err(CliError::Config(list)) = settings.validate() {
                assert!(!list.is_empty());
            }
        }
        Err(CliError::Config(list)) => assert!(!list.is_empty()),
        Err(e) => panic!("unexpected error kind: {e}"),
    }
});
