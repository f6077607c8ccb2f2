//! Builds the additive trend + cycle + level kernel and prints a few values
//! and a small Gram matrix.

use hybrid_rempc::gp::{gram_matrix, InputGrid, Kernel};

fn main() -> hybrid_rempc::Result<()> {
    let k = Kernel::trend_periodic_constant(50.0, 10.0, 100.0, 1.0, 4.0);
    k.validate()?;
    for lag in [0.0, 25.0, 50.0, 100.0] {
        println!("k(0, {lag:>5}) = {:.4}", k.eval(&[0.0], &[lag])?);
    }

    let rbf = Kernel::Rbf { scale: 2.0, length: 5.0 };
    let xs = InputGrid::from_scalars(&[0.0, 2.0, 4.0, 8.0]);
    println!("\nRBF Gram matrix:\n{:.4}", gram_matrix(&rbf, &xs, &xs)?);

    println!("log-parameters of the composite kernel: {:?}", k.log_params());
    println!("parameter kinds: {:?}", k.param_kinds());
    Ok(())
}
