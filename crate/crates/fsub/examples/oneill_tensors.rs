//! O'Neill tensors of the Hopf fibration and of a warped product.

use fsub::metric::DiffMode;
use fsub::submersion::ONeill;
use fsub::zoo;

fn norm(on: &ONeill, a: &[f64]) -> f64 {
    on.gv(a, a).sqrt()
}

fn main() {
    let hopf = zoo::hopf().unwrap();
    let c = &hopf.chart;
    let p = [1.1, 0.4, 0.2];
    let v = c.lift_vector(&p, &[1.0, 0.0], DiffMode::Ad).unwrap();
    let x = c.lift_vector(&p, &[0.0, 1.0], DiffMode::Ad).unwrap();
    let on = ONeill::new(c, &p, &v, DiffMode::Ad).unwrap();
    let u = [0.0, 0.0, 1.0];
    let d = on.gv(&v, &v) * on.gv(&x, &x) - on.gv(&v, &x).powi(2);
    println!("hopf: |A_x v|^2 / (g(v,v) g(x,x) - g(v,x)^2) = {:.12}", on.gv(&on.a(&x, &v), &on.a(&x, &v)) / d);
    println!("hopf: |T_u u| = {:.3e}", norm(&on, &on.t(&u, &u)));

    let w = zoo::warped_product().unwrap();
    let p = [0.3, 0.1, -0.2];
    let on = ONeill::new(&w.chart, &p, &[0.0, 0.0, 1.0], DiffMode::Ad).unwrap();
    println!("warped: T_u u = {:?}", on.t(&u, &u));
    println!("warped: A_x y = {:?}", on.a(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]));
}
