//! Constraint blocks and row uncertainty matrices for a two-object,
//! one-input, two-output category, assessing the second object.

use equiclass::assembly::{build_blocks, build_row_uncertainty};
use equiclass::{CharacteristicTable, UncertaintySpec};
use nalgebra::DMatrix;

fn main() -> equiclass::Result<()> {
    let table = CharacteristicTable::from_rows(
        vec!["first".into(), "second".into()],
        &[vec![1.2], vec![0.8]],
        &[vec![0.9, 0.6], vec![0.5, 0.7]],
    )?;
    let category = [0, 1];
    let blocks = build_blocks(&table, &category, 1)?;
    println!("A (output rows, then the input row):{}", blocks.a);
    println!("B:{}", blocks.b);
    println!("c: {:?}", blocks.c.as_slice());

    let input_row = build_row_uncertainty(&UncertaintySpec::Identity, &table, &category, 1, 2)?;
    println!("identity uncertainty on the input row:{}", input_row.full());

    let spec = UncertaintySpec::Explicit(vec![
        DMatrix::from_row_slice(2, 2, &[-0.2, 0.1, 0.3, -0.2]),
        DMatrix::from_row_slice(2, 2, &[0.7, 0.6, 0.1, -0.3]),
        DMatrix::identity(2, 2),
    ]);
    for row in 0..2 {
        let r = build_row_uncertainty(&spec, &table, &category, 1, row)?;
        println!("explicit uncertainty on output row {}:{}", row + 1, r.full());
    }
    Ok(())
}
