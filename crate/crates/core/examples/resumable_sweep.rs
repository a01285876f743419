//! A sweep that checkpoints to JSON lines and picks up where it stopped.
//!
//! ```bash
//! cargo run --example resumable_sweep
//! ```

use chiral_qed::experiments::{run_sweep_resumable, Axis, AxisGrid, Engine, SweepSpec};
use chiral_qed::output::{write_sweep_csv, Header};
use chiral_qed::{Result, SystemConfig};

fn main() -> Result<()> {
    let spec = SweepSpec::custom(
        SystemConfig::symmetric(0.0, 1.0, 2e-5, 1.0)?,
        vec![
            AxisGrid::linear(Axis::Delta1, -1.0, 1.0, 11),
            AxisGrid::linear(Axis::Delta2, -1.0, 1.0, 11),
        ],
        Engine::Markovian,
    );
    let checkpoint = std::env::temp_dir().join("chiral-qed-example.checkpoint.jsonl");
    let _ = std::fs::remove_file(&checkpoint);

    let first = run_sweep_resumable(&spec, &checkpoint, 16)?;
    // Simulate an interrupted run: keep the header and the first 40 records.
    let text = std::fs::read_to_string(&checkpoint)?;
    let kept: Vec<&str> = text.lines().take(41).collect();
    std::fs::write(&checkpoint, kept.join("\n") + "\n")?;
    let resumed = run_sweep_resumable(&spec, &checkpoint, 16)?;
    assert_eq!(first.records, resumed.records);
    println!("config hash {}", resumed.config_hash);
    println!("{} points, resumed after 40", resumed.records.len());

    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &Header::new("sweep"), &resumed)?;
    for line in String::from_utf8_lossy(&csv).lines().take(8) {
        println!("{line}");
    }
    std::fs::remove_file(&checkpoint)?;
    Ok(())
}
