//! Truncated path-signature calculus, closed-form signature inversion via
//! Fourier and orthogonal-polynomial functionals, and a score-based
//! diffusion pipeline over log-signature embeddings.

pub mod error;
pub mod lie;
pub mod path;
pub mod rng;
pub mod tensor;
pub mod words;

pub use error::{Error, Result};
pub use lie::{beta_dim, log_signature, lyndon_expand, lyndon_words, LogSignature, LyndonBasis};
pub use path::SampledPath;
pub use tensor::{
    signature, signature_with_budget, tensor_exp, tensor_log, tensor_product,
    word_coefficient, TruncatedTensor, DEFAULT_COEFF_BUDGET,
};
pub use words::{
    evaluate_on_path, half_shuffle_right, pair, pair_on_path, shuffle, shuffle_power,
    PathFunctionalEvaluator, Word, WordPoly,
};

pub mod inversion;

pub use inversion::{
    augment_fourier, augment_fourier_opts, augment_ortho, augment_ortho_opts,
    fourier_from_tensor, fourier_functionals,
    invert_fourier, invert_ortho, invert_ortho_taylor, make_family, ortho_from_tensor,
    ortho_functionals, reconstruct, taylor_weight_functionals, AugmentMap, BasisCoeffs,
    FamilyKind, FourierCoeffs, FunctionalBasis, FunctionalSet, OrthoFamily, PolyCoeffData,
    PolyCoeffs,
};

pub mod datagen;
pub mod eval;

pub use datagen::{
    gen_fbm, gen_predator_prey, gen_sines, ingest_csv, CsvLayout, PredatorPreyConfig,
};
pub use eval::{
    approximation_sweep, ks_marginal_protocol, ks_two_sample, l2_error, sweep_to_csv,
    KSReport, SweepBasis, SweepRow, TimepointKS,
};

pub mod diffusion;

pub use diffusion::{
    dsm_loss_and_grads, forward_perturb, sample, sample_with_score, train, NoiseSchedule,
    ScoreCheckpoint, ScoreNet, TrainConfig, ODE_STEPS, T_FLOOR,
};
