//! One pass/fail line per acceptance criterion over the full grid.

use std::io::Write;

use bkl_core::verify::{run_all, VerifyOptions};

#[test]
fn acceptance() {
    let cache = tempfile::tempdir().unwrap();
    let opts = VerifyOptions {
        cache_dir: Some(cache.path().to_path_buf()),
        ..VerifyOptions::default()
    };
    let reports = run_all(&opts);
    assert_eq!(reports.len(), 13);
    // Bypasses the harness capture so the lines show on success too.
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for r in &reports {
        writeln!(out, "{}", r.summary_line()).unwrap();
        for f in &r.failures {
            writeln!(out, "       {f}").unwrap();
        }
    }
    out.flush().unwrap();
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
