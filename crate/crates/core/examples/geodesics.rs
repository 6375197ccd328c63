//! Geodesic primitives on the sphere and the torus.

use flowerflow::{Manifold, TangentVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = Manifold::sphere(1.0);
    let (frac_pi_2, pi) = (std::f64::consts::FRAC_PI_2, std::f64::consts::PI);
    let p = s.point([frac_pi_2, 0.0])?;
    let q = s.point([frac_pi_2, 1.0])?;
    let g = s.minimizing_geodesic(&p, &q)?;
    println!("sphere: equator arc of angle 1 has length {:.12}", g.length);

    // shooting along the equator for time π reaches the antipode
    let (end, _) = s.geodesic_shoot(&p, &TangentVector::new(p, [0.0, 1.0]), pi)?;
    println!("sphere: antipode at {:?}", s.embed(&end));

    // transporting a north-pointing vector along the equator keeps it north
    let north = TangentVector::new(p, [-1.0, 0.0]);
    let w = s.parallel_transport(&north, &g)?;
    println!(
        "sphere: transported {:?} -> {:?}",
        north.components, w.components
    );

    let t = Manifold::unit_torus();
    let a = t.point([0.95, 0.5])?;
    let b = t.point([0.05, 0.5])?;
    println!(
        "torus: distance across the seam {:.6}",
        t.distance(&a, &b)?.value
    );
    Ok(())
}
