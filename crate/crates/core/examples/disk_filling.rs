//! Fills a small planar loop by its own flow: each recorded sheet is a
//! closed curve, and the last one shrinks to the apex.

use flowerflow::fill::{fill_2cage, Apex};
use flowerflow::flow::{FlowConfig, RunOptions};
use flowerflow::nets::round_loop;
use flowerflow::Manifold;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = Manifold::plane();
    let curve = round_loop(&m, [0.2, 0.1], 0.05, 15)?;
    let mut boundary = vec![curve.base];
    boundary.extend(curve.petals[0].points.iter().copied());

    let config = FlowConfig::new(&m, 0.4, 0.02)?;
    let filling = fill_2cage(&m, &boundary, &config, &RunOptions::default())?;
    for sheet in filling.sheets.iter().step_by(10) {
        println!(
            "s {:.3}  t {:.5}  length {:.5}",
            sheet.s, sheet.time, sheet.length
        );
    }
    println!("{} sheets", filling.sheets.len());
    match filling.apex {
        Apex::Point(p) => println!("apex at ({:.4}, {:.4})", p.coords[0], p.coords[1]),
        Apex::End(e) => println!("apex at infinity in the {e} end"),
    }
    Ok(())
}
