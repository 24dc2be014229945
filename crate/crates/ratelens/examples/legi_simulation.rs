//! Run the LEGI chemotaxis Monte Carlo and inspect how strongly movement
//! concentrates toward the chemoattractant source.

use ratelens::legi::{simulate, LegiParams, SimConfig, SimMode};

fn main() {
    let params = LegiParams {
        n_sectors: 20,
        hill: 3,
        ..LegiParams::default()
    };
    let sim = SimConfig::new(200_000, 42, SimMode::Sample);
    let out = simulate(&params, &sim).unwrap();
    let counts = out.as_counts().unwrap();
    let n = params.n_sectors;

    // fraction of moves landing exactly on the source sector, and within
    // one sector of it, averaged over source directions
    let (mut exact, mut near, mut total) = (0u64, 0u64, 0u64);
    for s in 0..n {
        for m in 0..n {
            let c = counts.get(s, m);
            total += c;
            let dist = (m as i64 - s as i64).rem_euclid(n as i64);
            let dist = dist.min(n as i64 - dist);
            if dist == 0 {
                exact += c;
            }
            if dist <= 1 {
                near += c;
            }
        }
    }
    println!(
        "{} sectors, hill = {}, {} trials",
        n, params.hill, sim.trials
    );
    println!("uniform baseline: exact {:.3}", 1.0 / n as f64);
    println!(
        "observed: exact {:.3}, within one sector {:.3}",
        exact as f64 / total as f64,
        near as f64 / total as f64
    );

    println!("\nmovement histogram for the source at sector 0:");
    let row_total: u64 = (0..n).map(|m| counts.get(0, m)).sum();
    for m in 0..n {
        let frac = counts.get(0, m) as f64 / row_total as f64;
        let bar = "#".repeat((frac * 200.0).round() as usize);
        println!("  m = {m:>2}: {frac:.4} {bar}");
    }
}
