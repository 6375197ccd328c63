//! Three meridians between the poles form a geodesic net: every vertex
//! balances. Bending one meridian breaks the balance at the bent vertex.

use flowerflow::nets::{theta_net, NetDocument};
use flowerflow::Manifold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Manifold::sphere(1.0);
    let net = theta_net(&m, 8)?;
    let x = net.measure(&m)?;
    println!(
        "theta net: length {:.12} (3π = {:.12})",
        x.total_length,
        3.0 * std::f64::consts::PI
    );
    println!(
        "residual {:.2e}, deviation {:.2e}, geodesic net: {}",
        x.max_residual,
        x.geodesic_deviation,
        x.is_geodesic_net(1e-8, 1e-6)
    );

    let mut doc = NetDocument::Net(net).to_json(&m);
    let p = &mut doc["edges"][0]["points"][3];
    p[1] = (p[1].as_f64().unwrap() + 0.1).into();
    let bent = NetDocument::from_json(&m, &doc)?.measure(&m)?;
    let worst = bent
        .balancing_residuals
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .unwrap();
    println!(
        "bent: length {:.6}, worst vertex {} with residual {:.3e}",
        bent.total_length, worst.vertex, worst.residual
    );
    Ok(())
}
