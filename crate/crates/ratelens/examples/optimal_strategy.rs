//! Solve for a single optimal apoptosis decision strategy, both by fixing
//! the multiplier lambda and by targeting an expected distortion, and show
//! how the decision flips around the threshold.

use ratelens::apoptosis::{exp_source, hamming_like, ApoptosisModel};
use ratelens::blahut::{baa_solve, solve_for_distortion, BaaConfig};

fn main() {
    let model = ApoptosisModel::default();
    let p = exp_source(&model).unwrap();
    let d = hamming_like(&model).unwrap();

    let r = baa_solve(&p, &d, &BaaConfig::with_lambda(3.44)).unwrap();
    println!(
        "lambda = 3.44: R = {:.4} bits, D = {:.4}, {} iterations",
        r.rate_bits, r.expected_distortion, r.iterations
    );
    println!(
        "P(apoptosis | x) around the threshold x_th = {}:",
        model.x_th
    );
    for x in [0, 400, 550, 590, 599, 600, 610, 650, 800, 2000] {
        println!("  x = {x:>4}: {:.4}", r.strategy.get(x, 1));
    }

    let target = 0.031;
    let t = solve_for_distortion(&p, &d, target, 1e-6, &BaaConfig::with_lambda(1.0)).unwrap();
    println!(
        "\ntargeting D = {target}: lambda found with R = {:.4} bits, D = {:.6}",
        t.rate_bits, t.expected_distortion
    );
}
