//! Horizontal lift of a base geodesic on a Randers submersion, compared
//! with the total geodesic. The lifted arc is printed as CSV.

use fsub::geodesics::{lift_base_geodesic, lift_deviation, uniform_grid, OdeOptions};
use fsub::metric::DiffMode;
use fsub::zoo;

fn main() {
    let f = zoo::varying_randers().unwrap();
    let p = [0.1, -0.2, 0.3];
    let vt = [0.5, 0.3];
    let opts = OdeOptions::default();
    let lc = lift_base_geodesic(&f.chart, &p, &vt, &uniform_grid(1.0, 10), DiffMode::Ad, &opts).unwrap();
    lc.lifted.write_csv(std::io::stdout()).unwrap();
    let dev = lift_deviation(&f.chart, &p, &vt, 1.0, 20, DiffMode::Ad, &opts).unwrap();
    eprintln!("steps {:?}, sup deviation from the total geodesic {dev:.3e}", lc.lifted.stats);
}
