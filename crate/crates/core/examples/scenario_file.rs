//! Scenario files drive the same commands as the binary. This one iterates
//! the scenario given on the command line, or a bundled one.

use std::path::{Path, PathBuf};

use channel_nts::cli::{cmd_iterate, load_config, IterateReport};

pub fn run_example(path: Option<&Path>) -> anyhow::Result<IterateReport> {
    let bundled = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/iterate_above_capacity.json");
    let path = path.unwrap_or(&bundled);
    let cfg = load_config(path)?;
    let out = std::env::temp_dir().join("channel-nts-iterate");
    let report = cmd_iterate(&cfg, &out)?;
    println!(
        "{}: {:?} after {} iterations, Ê = {:.4e}, C = {:.4}",
        path.display(),
        report.outcome.status,
        report.outcome.trace.len() - 1,
        report.outcome.final_e_hat,
        report.capacity
    );
    println!("trace.csv and outcome.json in {}", out.display());
    Ok(report)
}

fn main() -> anyhow::Result<()> {
    let arg = std::env::args().nth(1).map(PathBuf::from);
    run_example(arg.as_deref())?;
    Ok(())
}
