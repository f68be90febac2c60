//! Regenerates the synthetic image fixtures.
//!
//! Usage: `cargo run -p chromaterm-core --example generate_fixtures -- [OUT_DIR]`
//! (default `fixtures`).

use std::path::PathBuf;

fn main() {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    if let Err(e) = chromaterm_core::synthetic::write_fixtures(&out) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    println!("fixtures written to {}", out.display());
}
