mod common;

use common::{config, euler_deviation, identities};

const TOL: f64 = 1e-11;

fn check(text: &str) {
    let (_forest, sol) = heatflux::harness::solve_config(&config(text)).unwrap();
    let id = identities(&sol);
    println!("{text}: {id:?}");
    assert!(id.max() <= TOL, "{text}: {id:?}");
}

#[test]
fn identities_hold_for_every_time_degree() {
    for q in 0..=3 {
        check(&format!("n = 4; p = 2; q = {q}; steps = 3"));
    }
}

#[test]
fn identities_hold_across_mesh_changes() {
    check("n = 4; p = 2; q = 1; steps = 3; schedule = 1:refine,2:coarsen");
    check("n = 4; p = 1,3; q = 2; steps = 2; schedule = 2:refine-corner");
}

#[test]
fn identities_hold_with_rough_initial_data() {
    check("problem = MS3; n = 4; p = 3; q = 1; steps = 2");
}

#[test]
fn lowest_order_matches_implicit_euler() {
    for text in [
        "n = 4; p = 1; steps = 4",
        "n = 4; p = 3; steps = 3; schedule = 2:refine,3:coarsen",
    ] {
        let d = euler_deviation(&config(text));
        assert!(d <= TOL, "{text}: {d:e}");
    }
}
