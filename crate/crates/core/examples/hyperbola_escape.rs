//! A parallel on the surface swept by `z = 1/x` is not a geodesic: the flow
//! pushes it down the narrow end, where it leaves every compact set.
//! Takes around half a minute in release mode.

use std::time::Instant;

use serde_json::json;

use flowerflow::ends::EndsDecomposition;
use flowerflow::flow::{run_flow_observed, FlowConfig, OutcomeKind, RunOptions};
use flowerflow::manifold::{Manifold, Profile};
use flowerflow::nets::parallel_circle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Manifold::revolution(Profile::Hyperbola);
    let ends = EndsDecomposition::from_json(
        &m,
        &json!({
            "sigma": [
                {"u": 1.0, "end_side": "+", "name": "narrow"},
                {"u": 0.2, "end_side": "-", "name": "wide"}
            ],
            "delta": 0.05
        }),
    )?;
    let config = FlowConfig {
        max_steps: 300_000,
        ..FlowConfig::new(&m, 5.2, 0.2)?
    };
    let start = parallel_circle(&m, 1.25, config.points_per_petal, 0.0)?;
    let opts = RunOptions {
        ends: Some(&ends),
        convex_balls: vec![],
    };

    let clock = Instant::now();
    let out = run_flow_observed(&m, &start, &config, &opts, &mut |v| {
        if v.record.step % 10_000 == 0 {
            println!(
                "step {:>6}  t {:>8.2}  length {:.4}  core distance {:.3}",
                v.record.step,
                v.record.time,
                v.record.length,
                v.record.core_distance.unwrap_or(0.0)
            );
        }
    })?;
    match &out.kind {
        OutcomeKind::EscapedToEnd { end } => println!(
            "escaped into the {end} end after {} steps ({:.1}s), length {:.4}",
            out.steps,
            clock.elapsed().as_secs_f64(),
            out.final_length
        ),
        other => println!("unexpected outcome {}", other.name()),
    }
    Ok(())
}
