//! Fits an RBF Gaussian process to noisy samples by maximizing the marginal
//! likelihood, then predicts between and beyond the data.

use hybrid_rempc::gp::{hyperparameters, posterior, train, GpDataset, InputGrid, Kernel, TrainOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> hybrid_rempc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| x.sin() + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let data = GpDataset::time_series(&xs, &ys)?;

    let template = hyperparameters(Kernel::Rbf { scale: 1.0, length: 1.0 }, 0.1)?;
    let fit = train(&template, &data, None, None, &TrainOptions::default())?;
    let hyp = &fit.hyperparameters;
    println!("trained {:?}, noise variance {:.4}", hyp.kernel, hyp.noise.sigma2);
    println!("log marginal likelihood {:.3} ({} starts)", fit.log_marginal, fit.restarts_used);

    let query = InputGrid::from_scalars(&[5.25, 10.25, 19.5, 22.0, 26.0]);
    let post = posterior(&hyp.kernel, hyp.noise, &data, &query, data.target_mean(), None)?;
    for (i, x) in query.points().enumerate() {
        println!(
            "x = {:>5.2}: mean {:+.3} ± {:.3} (truth {:+.3})",
            x[0],
            post.mean[i],
            post.cov[(i, i)].sqrt(),
            x[0].sin()
        );
    }
    Ok(())
}
