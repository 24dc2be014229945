//! Generate optimal strategies for known distortion functions, recover the
//! distortion from each strategy alone, and report the agreement.
//!
//! Recovery is exact up to the multiplier lambda0: the strategy for
//! (d, lambda0) is indistinguishable from the strategy for (lambda0 * d, 1).

use ratelens::apoptosis::{exp_source, hamming_like, rectified_squared, ApoptosisModel};
use ratelens::ibaa::roundtrip_validate;

fn main() {
    let model = ApoptosisModel::default();
    let p = exp_source(&model).unwrap();
    println!(
        "{:>18} {:>8} {:>14} {:>14} {:>6}",
        "distortion", "lambda0", "max abs error", "scale found", "iters"
    );
    for (name, d) in [
        ("hamming-like", hamming_like(&model).unwrap()),
        ("rectified squared", rectified_squared(&model).unwrap()),
    ] {
        for lambda0 in [1.2, 2.93, 3.44, 4.6] {
            let rep = roundtrip_validate(&p, &d, lambda0, 1e-12, 200_000).unwrap();
            println!(
                "{:>18} {:>8.2} {:>14.3e} {:>14.6} {:>6}",
                name, lambda0, rep.max_abs_error, rep.recovered_scale, rep.baa_iterations
            );
        }
    }
}
