//! One line per acceptance criterion; exits non-zero when any fails.
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p selstbc-cli --test acceptance -- 1 4`.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use selstbc_cli::check;

fn main() -> ExitCode {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let exe = Path::new(env!("CARGO_BIN_EXE_selstbc"));
    let mut failed = 0;
    for id in (1..=9u8).filter(|i| ids.is_empty() || ids.contains(i)) {
        let start = Instant::now();
        let r = check::run(&[id], exe).remove(0);
        println!("{r}\n    ({:.1} s)", start.elapsed().as_secs_f64());
        failed += !r.passed as usize;
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion(s) FAIL");
        ExitCode::FAILURE
    }
}
