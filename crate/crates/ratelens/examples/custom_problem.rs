//! Build a rate-distortion problem from scratch with the core types,
//! solve it, and exchange every artifact through the CSV formats the CLI
//! uses.

use ratelens::blahut::{baa_solve, BaaConfig};
use ratelens::ibaa::ibaa_from_counts;
use ratelens::io;
use ratelens::probcore::{
    entropy, standard_distortion, Alphabet, CountMatrix, DistortionKind, Pmf,
};

fn main() {
    // a 4-level source over numeric labels, skewed toward small values
    let x = Alphabet::new(["0", "1", "2", "3"]).unwrap();
    let y = Alphabet::new(["0", "2"]).unwrap();
    let p = Pmf::from_weights(x.clone(), &[8.0, 4.0, 2.0, 1.0]).unwrap();
    let d = standard_distortion(DistortionKind::Squared, &x, &y, None).unwrap();
    println!("source entropy: {:.4} bits", entropy(&p));

    let r = baa_solve(&p, &d, &BaaConfig::with_lambda(0.8)).unwrap();
    println!(
        "lambda = 0.8: R = {:.4} bits, D = {:.4}",
        r.rate_bits, r.expected_distortion
    );
    for (i, label) in x.labels().iter().enumerate() {
        println!("  P(y | x = {label}) = {:.4?}", r.strategy.row(i));
    }

    // persist the problem the same way the CLI does, then read it back
    let dir = std::env::temp_dir().join("ratelens_custom_problem");
    std::fs::create_dir_all(&dir).unwrap();
    let d_path = dir.join("distortion.csv");
    let p_path = dir.join("source.csv");
    io::write_distortion_matrix(&d_path, &d).unwrap();
    io::write_source_pmf(&p_path, &p).unwrap();
    let d_back = io::read_distortion_matrix(&d_path).unwrap();
    assert_eq!(d_back.values(), d.values());
    println!(
        "\nwrote and re-read {} and {}",
        d_path.display(),
        p_path.display()
    );

    // observation counts drawn by hand still feed the inverse pipeline
    let mut counts = CountMatrix::zeros(x, y);
    for (cell, n) in [(0, 0), (1, 0), (2, 1), (3, 1)]
        .iter()
        .zip([90u64, 10, 40, 60])
    {
        counts.add(cell.0, cell.1, n);
    }
    let rec = ibaa_from_counts(&counts).unwrap();
    println!("recovered distortion from counts:");
    for i in 0..4 {
        println!("  {:?}", rec.distortion.row(i));
    }
}
