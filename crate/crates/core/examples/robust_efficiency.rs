//! Nominal and robust efficiency of a dominated object, and the smallest
//! uncertainty that makes it robustly efficient.

use equiclass::dea::{efficiency, min_sigma_for_object, robust_efficiency};
use equiclass::{CharacteristicTable, Settings, SigmaVector, UncertaintySpec};

fn main() -> equiclass::Result<()> {
    // risk (input) and return (output) of four assets
    let table = CharacteristicTable::single(&[1.0, 2.0, 3.0, 2.5], &[1.0, 1.9, 2.2, 1.5])?;
    let all = [0, 1, 2, 3];
    let settings = Settings::default();
    let spec = UncertaintySpec::Identity;

    for t in all {
        println!(
            "object {t}: nominal score {:.6}",
            efficiency(&table, &all, t, &settings)?
        );
    }

    let t = 3;
    println!("\nobject {t} as uniform sigma grows:");
    for rho in [0.0, 0.05, 0.1, 0.2, 0.4] {
        let e = robust_efficiency(&table, &all, t, &SigmaVector::uniform(2, rho), &spec, &settings)?;
        println!("  sigma = ({rho:.2}, {rho:.2}): score {e:.6}");
    }
    let sigma = min_sigma_for_object(&table, &all, t, &spec, &settings)?;
    println!(
        "\nminimal sigma for object {t}: {:?} (norm {:.6})",
        sigma.values(),
        sigma.norm()
    );
    Ok(())
}
