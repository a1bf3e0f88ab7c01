//! Pass counts of t- and Hotelling tests over random systems, in the shape
//! of the classic validation table.
//!
//!     cargo run --release --example validation_table -- [systems] [walks]

use fracwalk::cli::validate::{run_validation, ValidateConfig, TABLE_COLUMNS};

fn main() {
    let mut args = std::env::args().skip(1);
    let systems: usize = args.next().map_or(10, |s| s.parse().expect("systems"));
    let walks: u64 = args.next().map_or(10_000, |s| s.parse().expect("walks"));
    let cfg = ValidateConfig { systems, walks, ..ValidateConfig::default() };
    let r = run_validation(&cfg, |k, res| match res {
        Ok(c) => eprintln!("system {k}: {:?}", c.passes()),
        Err(e) => eprintln!("system {k}: {e}"),
    });
    println!("{}", TABLE_COLUMNS.join(" | "));
    println!("{}", r.pass_counts.map(|c| format!("{c}/{systems}")).join(" | "));
}
