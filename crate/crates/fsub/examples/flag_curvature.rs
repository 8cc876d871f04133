//! Chern connection and flag curvature of a Randers metric and the round
//! sphere.

use fsub::chern::Site;
use fsub::metric::DiffMode;
use fsub::zoo;

fn main() {
    let hopf = zoo::hopf().unwrap();
    let x = [1.2, 0.3, -0.4];
    let site = Site::new(hopf.chart.total.as_ref(), &x, &[0.5, 0.2, 0.1], DiffMode::Ad).unwrap();
    println!("S^3(1): K_v(e) = {:.12}", site.flag_curvature(&[0.1, -0.7, 0.3]).unwrap());

    let r = zoo::varying_randers().unwrap();
    let x = [0.2, -0.1, 0.4];
    let v = [0.6, 0.3, -0.2];
    for mode in [DiffMode::Ad, DiffMode::Fd] {
        let site = Site::new(r.chart.total.as_ref(), &x, &v, mode).unwrap();
        println!("randers {mode:?}: L(v) = {:.12}, K_v(e) = {:.12}", site.lv(), site.flag_curvature(&[0.0, 1.0, 0.5]).unwrap());
    }
}
