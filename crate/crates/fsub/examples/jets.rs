//! Taylor jets: mixed partials of a function of two variables.

use fsub::jets::Jet;

fn main() {
    // f(x, y) = exp(x) sin(y) + sqrt(1 + x y) at (0.3, 0.7), to order 4
    let x = Jet::variable(2, 4, 0, 0.3);
    let y = Jet::variable(2, 4, 1, 0.7);
    let f = x.exp() * y.sin() + (x.cst(1.0) + x.clone() * y.clone()).sqrt();
    println!("f        = {:.15}", f.value());
    println!("grad f   = {:?}", f.gradient());
    for alpha in [[2, 0], [1, 1], [0, 3], [2, 2]] {
        println!("d^{alpha:?} f = {:.15}", f.extract(&alpha).unwrap());
    }
}
