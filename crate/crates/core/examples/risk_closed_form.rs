//! Prints VaR, AVaR and the level-set risk for a few distance laws.
//!
//! cargo run --example risk_closed_form -- [epsilon]

use raem::risk::{
    average_value_at_risk, distance_distribution, level_set_risk, value_at_risk, ConfidenceLevel,
    DistanceDistribution, LevelSetParams,
};
use raem::{IsotropicGaussian, Vec3};

fn main() -> raem::Result<()> {
    let epsilon: f64 = std::env::args().nth(1).map_or(Ok(0.1), |s| s.parse()).unwrap_or(0.1);
    let eps = ConfidenceLevel::new(epsilon)?;
    let ls = LevelSetParams::new(0.5)?;
    println!("epsilon {epsilon}: iota {:.6} kappa {:.6}", eps.iota(), eps.kappa());
    println!("{:>6} {:>6} {:>10} {:>10} {:>10}", "mean", "std", "VaR", "AVaR", "level-set");
    for (mean, std) in [(0.0, 1.0), (2.0, 0.5), (1.0, 0.1), (0.6, 0.05), (0.3, 0.2)] {
        let d = DistanceDistribution::new(mean, std)?;
        println!(
            "{mean:6.2} {std:6.2} {:10.4} {:10.4} {:10.4}",
            value_at_risk(&d, &eps),
            average_value_at_risk(&d, &eps),
            level_set_risk(&d, &eps, &ls)
        );
    }

    let g = IsotropicGaussian::new(Vec3::new(1.0, 0.0, 0.0), 0.2, 0.9, [0.5; 3])?;
    let d = distance_distribution(&Vec3::zeros(), &g);
    println!("waypoint at origin, Gaussian at x = 1: {d:?}, AVaR {:.4}", average_value_at_risk(&d, &eps));
    Ok(())
}
