//! Quick throughput comparison of the four pipeline variants at a modest
//! resolution. Build with --release for meaningful absolute numbers; the
//! relative ordering shows up either way.

use cubepad::bench::{report_csv, run_bench, BenchConfig};

fn main() -> cubepad::Result<()> {
    let cfg = BenchConfig {
        widths: vec![256],
        reps: 5,
        warmup: 2,
        ..BenchConfig::default()
    };
    println!(
        "measuring {} reps after {} warmup rounds, single thread...",
        cfg.reps, cfg.warmup
    );
    let report = run_bench(&cfg)?;
    print!("{}", report_csv(&report));
    println!(
        "\noverlap/cubemap per-face area ratio: {:.3}",
        report.overlap_area_ratio
    );
    println!("profile: {}", report.profile);
    Ok(())
}
