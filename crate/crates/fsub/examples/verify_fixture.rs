//! Identity suite on a built-in fixture; the fixture name is the first
//! argument.

use fsub::verify::{run_suite, Config};
use fsub::zoo;

fn main() {
    let label = std::env::args().nth(1).unwrap_or_else(|| "hopf".into());
    let f = zoo::builtin(&label).expect("unknown fixture");
    let cfg = Config {
        samples: 20,
        ..Config::default()
    };
    let r = run_suite(&label, &f.chart, f.flags, &cfg).unwrap().report;
    for i in &r.identities {
        println!("{:24} {:?} max {:?}", i.id, i.status, i.max);
    }
    for g in &r.global {
        println!("{:24} {:?} max {:?}", g.id, g.status, g.max);
    }
    println!("pass: {}", r.pass);
}
