//! Mixing matrices for the built-in graphs: second singular value, diameter,
//! the geometric mixing envelope and max-consensus.
//!
//! cargo run --example network_diagnostics

use dsafe::network::{self, TopologyKind};
use nalgebra::DMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 8;
    println!("{:<10} {:>8} {:>4} {:>14}", "graph", "beta", "D_G", "k for 1e-6");
    for kind in [TopologyKind::Complete, TopologyKind::Ring, TopologyKind::Path, TopologyKind::Star] {
        let top = network::generate(kind, m)?;
        let k = (1..10_000).find(|&k| network::mixing_bound(&top, k) < 1e-6).unwrap_or(0);
        println!("{:<10} {:>8.4} {:>4} {:>14}", format!("{kind:?}"), top.beta(), top.diameter(), k);
    }

    let ring = network::generate(TopologyKind::Ring, m)?;
    println!("\nring, agent 0: sum_j |[P^k]_j0 - 1/m| against sqrt(m) beta^k");
    for (k, i, dev, bound) in network::mixing_trace(&ring, 10) {
        if i == 0 {
            println!("k={k:>2}  {dev:.3e}  <=  {bound:.3e}");
        }
    }

    // every agent ends up with the largest-norm estimate after D_G rounds
    let estimates: Vec<DMatrix<f64>> = (0..m).map(|i| DMatrix::from_element(2, 2, (i as f64 - 3.2).abs())).collect();
    let agreed = network::max_consensus(&estimates, &ring)?;
    println!("\nmax-consensus after {} rounds: owner {}", ring.diameter(), agreed.owner);

    // a hand-made matrix goes through the same validation
    let p = DMatrix::from_row_slice(3, 3, &[0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5]);
    let custom = network::validate_topology(&p)?;
    println!("custom 3-agent matrix: beta {}", custom.beta());
    let bad = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.1, 0.8]);
    println!("asymmetric input: {}", network::validate_topology(&bad).unwrap_err());
    Ok(())
}
