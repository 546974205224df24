//! Proximity to equitable efficiency of one category, with its bounds and
//! the first-order descent trace.

use equiclass::proximity::proximity;
use equiclass::{CharacteristicTable, Settings, UncertaintySpec};

fn main() -> equiclass::Result<()> {
    let table = CharacteristicTable::single(&[1.6, 2.6, 2.8, 2.0], &[2.0, 0.3, 1.6, 0.5])?;
    let p = proximity(&table, &[0, 1, 2, 3], &UncertaintySpec::Identity, &Settings::default())?;

    for (t, s) in p.members.iter().zip(&p.object_sigmas) {
        println!("object {t}: minimal sigma {:?}", s.values());
    }
    println!("sigma_hat {:?}", p.sigma_hat.values());
    println!("bounds [{:.6}, {:.6}]", p.lower_bound, p.upper_bound);
    for (k, step) in p.trace.iter().enumerate() {
        println!(
            "  step {}: |sigma| = {:.6}, gamma = {:.6}, direction value {:.3e}",
            k + 1,
            step.sigma_norm,
            step.gamma,
            step.direction_value
        );
    }
    println!("P = {:.6} ({:?})", p.estimate, p.exit);
    Ok(())
}
