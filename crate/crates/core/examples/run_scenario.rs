//! Runs a scenario file and prints its summary, e.g.
//! `cargo run --release --example run_scenario -- scenarios/torus_systole.json`.

use flowerflow::scenario::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/sphere_equator.json").into()
    });
    let report = Scenario::load(path.as_ref())?.run(None)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    println!("{}: {}", report.name, report.status.label());
    Ok(())
}
