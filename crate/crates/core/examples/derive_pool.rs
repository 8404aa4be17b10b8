//! Runs the representative-color pipeline and prints the surviving colors.
//!
//! `cargo run --release --example derive_pool -- [seed] [k]`

use chromashape::catalog::{derive_representatives, GridSpec, DEFAULT_MARK_PX};
use chromashape::colorlab::{lab_to_srgb, JndParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2025);
    let k: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let mut params = JndParams::default();
    if let Ok(p) = std::env::var("JND_P") {
        params.p = p.parse()?;
    }
    if let Ok(ppd) = std::env::var("JND_PPD") {
        params.px_per_degree = ppd.parse()?;
    }
    let d = derive_representatives(&GridSpec::default(), k, seed, DEFAULT_MARK_PX, &params)?;
    eprintln!(
        "grid samples: {}, centroids: {}, visible on white: {}, representatives: {}",
        d.grid_samples,
        d.centroids.len(),
        d.visible.len(),
        d.representatives.len()
    );
    for c in &d.representatives {
        let (rgb, _) = lab_to_srgb(*c);
        println!("{rgb}\t{}\t{}\t{}", c.l, c.a, c.b);
    }
    Ok(())
}
