//! Iteration count for the 2D point-source problem at one frequency.
//!
//! `cargo run --release --example two_d_point_source -- fd 8`
//! `cargo run --release --example two_d_point_source -- dg-upwind-2 6`

use std::f64::consts::PI;
use std::time::Instant;

use waveholtz::dg::FluxKind;
use waveholtz::experiment::{iterate_point, Discretization, ExperimentConfig};

fn main() -> waveholtz::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let kind = args.get(1).map_or("fd", String::as_str);
    let omega_over_pi: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(6.0);
    let mut cfg = ExperimentConfig {
        dimension: 2,
        omega_over_pi,
        allow_large_2d: true,
        ..Default::default()
    };
    if let Some(rest) = kind.strip_prefix("dg-") {
        let (flux, degree) = rest.split_once('-').unwrap_or((rest, "1"));
        cfg.discretization = Discretization::Dg;
        cfg.flux = if flux == "upwind" { FluxKind::Upwind } else { FluxKind::Central };
        cfg.degree = degree.parse().unwrap_or(1);
    }
    let start = Instant::now();
    let r = iterate_point(&cfg, omega_over_pi * PI, false)?;
    let it = r.iteration.expect("iteration ran");
    println!(
        "{kind} at {omega_over_pi}π: {} unknowns, {} steps per period, N = {:?}, {:.1} s",
        r.dofs,
        r.tgrid.n_steps,
        it.iterations,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
