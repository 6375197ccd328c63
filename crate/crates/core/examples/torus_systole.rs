//! A triangle cage on the unit square torus whose boundary winds once around
//! the first lattice direction. Retracting and flowing it ends on a closed
//! geodesic of length one.

use std::collections::BTreeMap;

use flowerflow::flow::{run_cage_flow, FlowConfig, OutcomeKind, RunOptions};
use flowerflow::nets::triangle_cage;
use flowerflow::Manifold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Manifold::unit_torus();
    let shifts = BTreeMap::from([((0, 2), [-1.0, 0.0])]);
    let cage = triangle_cage(
        &m,
        [[0.0, 0.5], [1.0 / 3.0, 0.6], [2.0 / 3.0, 0.45]],
        4,
        &shifts,
    )?;
    println!("cage length {:.6}", cage.length(&m)?);

    let config = FlowConfig::new(&m, 4.0, 0.25)?;
    let out = run_cage_flow(&m, &cage, &config, &RunOptions::default())?;
    println!(
        "{} after {} steps: length {:.6} -> {:.6}",
        out.kind.name(),
        out.steps,
        out.initial_length,
        out.final_length
    );
    if let OutcomeKind::StationaryFlower { measurement } = &out.kind {
        println!("petal lengths {:?}", measurement.per_petal_lengths);
    }
    Ok(())
}
