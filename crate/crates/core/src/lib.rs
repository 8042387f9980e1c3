//! Certifying linear separability of random nonlinear features of data drawn
//! from a union of low-dimensional linear subspaces.
//!
//! The numerical routines are generic over the scalar type through [`Real`];
//! the aliases at the crate root fix it to `f64` (the type the experiment
//! harness uses) or `f32`.

// `!(x > 0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod features;
pub mod probe;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod subspace;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;
pub use subspace::{
    concat_span, extend_basis, principal_angles, projection_difference_spectrum, sample_stiefel,
    PrincipalAngles, Subspace, UnionOfSubspaces,
};

pub type Subspace64 = Subspace<f64>;
pub type Subspace32 = Subspace<f32>;
pub type Union64 = UnionOfSubspaces<f64>;
pub type PrincipalAngles64 = PrincipalAngles<f64>;
pub use features::{sample_feature_map, Activation, RandomFeatureMap};
pub type FeatureMap64 = RandomFeatureMap<f64>;
pub use certify::{
    brute_force_separable, certify_binary, certify_multiclass, empirical_separable,
    projection_classifier, width_bound_binary, width_bound_multiclass, CertifyOptions,
    OneVsRestCertificate, SeparabilityCertificate, SignVector, WidthBoundReport,
};
pub type Certificate64 = SeparabilityCertificate<f64>;
pub use probe::{
    accuracy, cross_entropy_and_gradient, generate_uos_dataset, train_probe, train_probe_traced,
    LabeledDataset, LinearProbe,
};
pub type Dataset64 = LabeledDataset<f64>;
pub type Probe64 = LinearProbe<f64>;
pub use verify::{
    verify_acceptance_rate, verify_bernstein_moments, verify_failure_bound,
    verify_failure_bound_scaled, verify_isotropy, verify_order_statistics,
    verify_projection_spectrum, verify_sandwich, Check, ConditionedPairSampler, LemmaReport,
};
