//! Samples pairs of nearby points on each separating curve of the hyperbola
//! surface and checks whether their geodesics bulge into the core.

use serde_json::json;

use flowerflow::ends::{check_local_convexity, EndsDecomposition};
use flowerflow::manifold::{Manifold, Profile};

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
    for (i, s) in ends.sigmas.iter().enumerate() {
        let r = check_local_convexity(&m, &ends, i, 500, 1)?;
        println!(
            "{:<7} u = {:<4} {}  worst penetration {:.3e} over {} pairs",
            s.name,
            s.level,
            if r.pass { "convex    " } else { "not convex" },
            r.worst_penetration,
            r.pairs
        );
    }
    Ok(())
}
