//! Load a submersion from a TOML spec file and check it.

use std::path::PathBuf;

use fsub::spec_file::load_spec;
use fsub::verify::{run_suite, Config};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs/kaluza_klein_randers.toml"));
    let f = load_spec(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    println!("{}: {} (dims {:?})", f.label, f.summary, f.chart.dims());
    let cfg = Config {
        samples: 10,
        ..Config::default()
    };
    match run_suite(&f.label, &f.chart, f.flags, &cfg) {
        Ok(out) => println!("pass: {}, failures {:?}", out.report.pass, out.report.failures()),
        Err(e) => println!("rejected: {e}"),
    }
}
