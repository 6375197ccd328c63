//! Perturbs the equator of the unit sphere and lets the flow pull it back onto
//! a great circle. Writes `sphere_equator.svg` to the working directory.

use flowerflow::flow::{run_flow_observed, FlowConfig, OutcomeKind, RunOptions};
use flowerflow::nets::equator_petal;
use flowerflow::svg::{Figure, Projection};
use flowerflow::Manifold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Manifold::sphere(1.0);
    let config = FlowConfig::new(&m, 6.5, 1.0)?;
    let start = equator_petal(&m, config.points_per_petal, 0.05)?;

    let mut fig = Figure::new(Projection::for_manifold(&m));
    fig.polyline(&m, &start.chain(0), "#bbb", 1.0);
    let out = run_flow_observed(&m, &start, &config, &RunOptions::default(), &mut |v| {
        if v.record.step % 100 == 0 {
            println!(
                "step {:>5}  length {:.9}  residual {:.2e}",
                v.record.step, v.record.length, v.record.max_residual
            );
        }
    })?;
    fig.polyline(&m, &out.final_flower.chain(0), "#c33", 1.5);
    std::fs::write("sphere_equator.svg", fig.render())?;

    println!("{} after {} steps", out.kind.name(), out.steps);
    if let OutcomeKind::StationaryFlower { measurement } = &out.kind {
        println!(
            "length {:.9} (2π = {:.9}), residual {:.2e}",
            measurement.total_length,
            std::f64::consts::TAU,
            measurement.max_residual
        );
    }
    Ok(())
}
