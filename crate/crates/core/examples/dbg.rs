use std::time::{Duration, Instant};

use normalcone::cone::{normal_cone_direct, normal_cone_formula, BasePoint, ConeQuery};
use normalcone::formula::parse_set;
use normalcone::poly::rat_int;
use normalcone::qe::{eliminate, QeConfig};

fn main() {
    // one parabola branch of the cusp cell, as its own set
    let cell = parse_set("set(x, y; x > 0 && y - x^2 = 0)").unwrap();
    let q = ConeQuery::new(cell, BasePoint::Fixed(vec![rat_int(0), rat_int(0)])).unwrap();
    let f = normal_cone_formula(&q).to_formula();
    println!("input: {f}");
    let cfg = QeConfig::with_time_limit(Duration::from_secs(120));
    let t0 = Instant::now();
    match eliminate(&f, &q.cone_vars, &cfg) {
        Ok(r) => println!("elapsed {:?} -> {}", t0.elapsed(), r.simplify()),
        Err(e) => println!("elapsed {:?} error: {e}", t0.elapsed()),
    }
    let _ = normal_cone_direct;
}
