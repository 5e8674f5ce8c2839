//! Densities, datasets and ground-truth models.

mod clip;
mod dataset;
mod mixture;
mod sparse;
pub mod sparsity;
mod truth;

pub use clip::{clip_and_renormalize, ClipMode, ClippedDensity, DEFAULT_MC_SAMPLES};
pub use dataset::Dataset;
pub use mixture::{mixture_density, mixture_walsh_coefficient, BernoulliMixture, MixtureSpec};
pub use sparse::{eval_density, SparseDensity};
pub use sparsity::{in_sparsity_class, sorted_magnitudes, weak_lp_radius};
pub use truth::{DenseDensity, GroundTruth, TruthSource};
