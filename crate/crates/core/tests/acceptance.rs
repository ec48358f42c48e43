//! The full verification battery, one test per scenario, each printing its
//! measured numbers against the tolerance it must meet.

use tdscat::verify::{self, CheckReport};

fn run(f: fn() -> CheckReport) {
    let r = f();
    println!("[{}] {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.details);
    assert!(r.pass, "{}: {}", r.name, r.details);
}

#[test]
fn transparent_boundaries() {
    run(verify::check_transparent_boundaries);
}

#[test]
fn kernel_fourier() {
    run(verify::check_kernel_fourier);
}

#[test]
fn barrier_transmission() {
    run(verify::check_barrier_transmission);
}

#[test]
fn bigbox_agreement() {
    run(verify::check_bigbox_agreement);
}

#[test]
fn two_time_agreement() {
    run(verify::check_two_time_agreement);
}

#[test]
fn laser_cep_response() {
    run(verify::check_laser_cep_response);
}

#[test]
fn gauge_direct_agreement() {
    run(verify::check_gauge_direct_agreement);
}

#[test]
fn time_step_order() {
    run(verify::check_time_step_order);
}

#[test]
fn free_propagator() {
    run(verify::check_free_propagator);
}
