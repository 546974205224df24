//! Seed and improve a three-category classification of nine objects in
//! three tiers.

use equiclass::{classify, CharacteristicTable, Engine, Settings, UncertaintySpec};

fn main() -> equiclass::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let x = [1.0, 2.0, 3.0, 1.5, 2.5, 3.5, 2.0, 3.0, 4.0];
    let y = [2.0, 2.4, 2.6, 1.2, 1.5, 1.7, 0.4, 0.7, 0.9];
    let table = CharacteristicTable::single(&x, &y)?;
    let engine = Engine::new(table, UncertaintySpec::Identity, Settings::default())?;

    let (result, history) = classify(&engine, 3)?;
    for (k, step) in history.iter().enumerate() {
        let label = if k == 0 {
            "initial".to_string()
        } else {
            format!("step {k}")
        };
        println!(
            "{label:>8}: {:?} P = {:?} total {:.6}",
            step.categories,
            step.proximity.as_ref().unwrap(),
            step.total.unwrap()
        );
    }
    println!("final: {:?}", result.categories);
    Ok(())
}
