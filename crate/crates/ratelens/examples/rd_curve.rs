//! Trace the rate-distortion curves of the apoptosis benchmark for both
//! distortion families and print a compact table of each.

use ratelens::apoptosis::{exp_source, hamming_like, rectified_squared, ApoptosisModel};
use ratelens::blahut::{default_lambda_grid, rd_curve};

fn main() {
    let model = ApoptosisModel::default();
    let p = exp_source(&model).unwrap();
    let mut grid = vec![0.0];
    grid.extend(default_lambda_grid());

    for (name, d) in [
        ("hamming-like", hamming_like(&model).unwrap()),
        ("rectified squared", rectified_squared(&model).unwrap()),
    ] {
        let curve = rd_curve(&p, &d, &grid, 1e-10, 100_000).unwrap();
        println!("{name} distortion:");
        println!("{:>10} {:>12} {:>12}", "lambda", "R (bits)", "D");
        // every 10th point keeps the table readable
        for pt in curve.points.iter().step_by(10) {
            println!(
                "{:>10.4} {:>12.6} {:>12.6}",
                pt.lambda, pt.rate_bits, pt.distortion
            );
        }
        let last = curve.points.last().unwrap();
        let first = &curve.points[0];
        println!(
            "zero-rate endpoint: D = {:.4}; at lambda = {:.1}: R = {:.4} bits, D = {:.6}\n",
            first.distortion, last.lambda, last.rate_bits, last.distortion
        );
    }
}
