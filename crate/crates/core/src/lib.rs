//! Phase retrieval from noisy phaseless measurements by plug-and-play ADMM.
//!
//! The unknown image `u` is observed through `f ≈ |Au|²`, where `A` is a coded
//! diffraction operator ([`operator::CdpOperator`]) or a ptychographic scan
//! ([`operator::PtychoOperator`]). [`pnp::pnp_run`] alternates a
//! generalized least-squares step ([`gls`]), which handles the Poisson or
//! Gaussian likelihood through closed-form magnitude proximal maps ([`prox`]),
//! with an off-the-shelf denoiser ([`denoise`]).
//!
//! ```
//! use phasepnp::prelude::*;
//!
//! let truth = Phantom::Shapes.generate(16, 16);
//! let op = CdpOperator::octanary(16, 16, 2, 1).unwrap();
//! let h = op.forward(&truth).unwrap().intensities();
//! let data = PhaselessData::exact(h, NoiseModel::Gaussian { snr_db: f64::INFINITY });
//! let mut cfg = PnpConfig::new(Denoiser::Identity, 0.0, 1.0, 1.0);
//! cfg.constraint = ConstraintSet::RealPlane;
//! cfg.max_iters = Some(20);
//! let out = pnp_run(&op, &data, &cfg, Some(&truth)).unwrap();
//! assert_eq!(out.history.len(), 20);
//! ```

// `!(x <= limit)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod denoise;
pub mod error;
pub mod fft;
pub mod gls;
pub mod harness;
pub mod image;
pub mod io;
pub mod noise;
pub mod operator;
pub mod par;
pub mod phantom;
pub mod pnp;
pub mod prox;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::denoise::{denoise, Denoiser, DenoiserSpec};
    pub use crate::error::{Error, Result};
    pub use crate::gls::{gls_solve, ConstraintSet, GlsParams, GlsState};
    pub use crate::image::{ComplexImage, RealImage};
    pub use crate::noise::{
        corrupt_gaussian, corrupt_poisson, fidelity, NoiseModel, PhaselessData,
    };
    pub use crate::operator::{
        CdpOperator, MeasurementOperator, Operator, ProbeShape, PtychoOperator, Spectrum,
    };
    pub use crate::phantom::Phantom;
    pub use crate::pnp::{pnp_run, snr_db, Initializer, PnpConfig, RunHistory};
}
