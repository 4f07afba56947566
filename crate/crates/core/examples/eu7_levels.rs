//! Enumerates the elementary subgroup of the rank-3 unitary group over F_2
//! with the maximal form parameter, then prints its upper and lower levels.
//!
//! Run with: cargo run --release -p oddform-core --example eu7_levels

use oddform_core::contexts::f2;
use oddform_core::formideal::full_off;
use oddform_core::heisenberg::delta_max;
use oddform_core::levels::{lower_level, upper_level_of_group};
use oddform_core::subgroup::{closure, eu_generators, DEFAULT_BUDGET};

fn main() {
    let ctx = f2(3);
    let dmax = delta_max(&ctx);
    let full = full_off(&ctx, &dmax);
    let gens = eu_generators(&ctx, &dmax, &full);
    println!("elementary generators: {}", gens.len());

    let t0 = std::time::Instant::now();
    let group = closure(&ctx, &gens, DEFAULT_BUDGET).expect("closure fits the budget");
    println!("|EU_7(F2, delta_max)| = {} ({:.2?})", group.order(), t0.elapsed());

    let upper = upper_level_of_group(&ctx, &dmax, &group).unwrap();
    let lower = lower_level(&ctx, &dmax, &group, &gens).unwrap();
    println!(
        "upper level: |I| = {}, |Omega| = {}",
        upper.ideal.len(),
        upper.omega.len()
    );
    println!(
        "lower level: |I| = {}, |Omega| = {}",
        lower.ideal.len(),
        lower.omega.len()
    );
}
