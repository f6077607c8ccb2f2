//! Gaussian-process regression: kernels, posterior inference, marginal
//! likelihood and hyperparameter training with an optional forgetting term.

mod chol;
pub mod dataset;
pub mod inference;
pub mod kernel;
pub mod optimize;
pub mod train;

pub use chol::Cholesky;
pub use dataset::{forgetting_diag, ForgettingWeights, GpDataset, Hyperparameters, InputGrid, NoiseModel};
pub use inference::{log_marginal_likelihood, log_marginal_likelihood_with_grad, posterior, Posterior};
pub use kernel::{gram_matrix, Kernel, ParamKind};
pub use train::{hyperparameters, train, TrainOptions, TrainingResult};
