//! Runs every estimate check for one configuration and prints the table the
//! `verify` subcommand prints. CSVs land in a temporary directory.
//!
//! ```text
//! cargo run --example verify_estimates
//! ```

use hilfer::cli::run_verify;
use hilfer::config::RunConfig;
use std::path::Path;

fn main() -> hilfer::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/verify.ini");
    let mut cfg = RunConfig::from_file(&path)?;
    cfg.out_dir = std::env::temp_dir().join("hilfer-verify-example");
    let s = run_verify(&cfg)?;
    print!("{}", s.table());
    println!("\nwritten to {}", cfg.out_dir.display());
    Ok(())
}
