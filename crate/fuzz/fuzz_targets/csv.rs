#![no_main]

use libfuzzer_sys::fuzz_target;
use selstbc_cli::sweep::{read_csv, write_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_csv(data) {
        let mut out = Vec::new();
        write_csv(&rows, &mut out).expect("rows that parsed can be written");
        let again = read_csv(out.as_slice()).expect("written rows parse");
        assert_eq!(again.len(), rows.len());
    }
});
