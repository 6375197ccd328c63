//! Slides the lower vertices of a planar triangle cage up to the top vertex.
//! The image never grows; at the end the cage is a flower at the top vertex.

use std::collections::BTreeMap;

use flowerflow::nets::{cage_to_flower, hausdorff_distance, linear_cage};
use flowerflow::Manifold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Manifold::plane();
    let cage = linear_cage(
        &m,
        &[[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]],
        4,
        &BTreeMap::new(),
    )?;
    let image: Vec<_> = cage.edges.values().flatten().copied().collect();

    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let c = cage_to_flower(&m, &cage, t)?;
        let lengths: Vec<String> = c
            .edge_lengths(&m)?
            .iter()
            .map(|((a, b), l)| format!("{a}-{b}: {l:.4}"))
            .collect();
        let moved: Vec<_> = c.edges.values().flatten().copied().collect();
        println!(
            "t = {t:.2}  {}  drift from image {:.1e}",
            lengths.join("  "),
            hausdorff_distance(&m, &moved, &image)?
        );
    }
    let flower = cage_to_flower(&m, &cage, 1.0)?.to_flower(&m)?;
    println!(
        "flower at {:?} with {} petal(s), length {:.4}",
        flower.base.coords,
        flower.petals.len(),
        flower.length(&m)?
    );
    Ok(())
}
