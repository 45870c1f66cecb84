#![no_main]

use libfuzzer_sys::fuzz_target;
use selstbc_cli::grid::{SnrGrid, MAX_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = text.parse::<SnrGrid>() {
        let pts = grid.points();
        assert!(!pts.is_empty() && pts.len() <= MAX_POINTS);
        assert_eq!(pts[0], grid.start);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
        assert!(*pts.last().unwrap() <= grid.stop + grid.step * 1e-6);
    }
});
