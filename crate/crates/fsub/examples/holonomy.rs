//! Transport of a Hopf fiber segment around a small circle in the base.

use fsub::geodesics::OdeOptions;
use fsub::metric::DiffMode;
use fsub::submersion::holonomy_transport;
use fsub::verify::circle_velocity;
use fsub::zoo;

fn main() {
    let f = zoo::hopf().unwrap();
    for rho in [0.1, 0.2, 0.4] {
        let t = holonomy_transport(
            &f.chart,
            circle_velocity(2, rho),
            &[1.55, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
            16,
            DiffMode::Ad,
            &OdeOptions::default(),
        )
        .unwrap();
        println!(
            "radius {rho}: angle {:.10}, length {:.12} -> {:.12}",
            t.displacement, t.length_before, t.length_after
        );
    }
}
