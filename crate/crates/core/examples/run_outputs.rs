//! Runs a command through the command-line entry point and reads back its
//! table and metadata.

use percospec::cli::cli_main;
use percospec::io::{load_metadata, load_table, sidecar_path};

fn main() -> percospec::Result<()> {
    let dir = std::env::temp_dir().join("percospec-run-outputs");
    let out = dir.join("arm.csv");
    let code = cli_main(["percospec", "arm-prob", "--r", "1", "--R", "4", "--replicas", "500", "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let t = load_table(&out)?;
    let m = load_metadata(&sidecar_path(&out))?;
    println!("{}", t.header.join(","));
    for r in &t.rows {
        println!("{}", r.join(","));
    }
    println!("command {} seed {} runtime {:.3}s", m.command, m.seed, m.runtime_seconds);
    Ok(())
}
