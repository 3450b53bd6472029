//! Outer plug-and-play ADMM with an optional symmetric multiplier update.
//!
//! One outer iteration:
//!
//! ```text
//! u  ← GLS(v − Λ/r)                       (inner ADMM, warm-started)
//! Λ' ← Λ + r(u − v)   (symmetric)   or   Λ' ← Λ
//! v  ← D_σ(u + Λ'/r),  σ = λ/r
//! Λ  ← Λ' + r(u − v)
//! ```

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::denoise::{denoise, Denoiser, DenoiserSpec};
use crate::error::{Error, Result};
use crate::gls::{gls_solve, ConstraintSet, GlsParams, GlsState};
use crate::image::ComplexImage;
use crate::noise::{fidelity_floored, PhaselessData};
use crate::operator::{MeasurementOperator, Spectrum};

/// Relative change above which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Value reported for an exact match.
pub const SNR_CAP_DB: f64 = 300.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    /// `u⁰ = A*(√f) / diag(A*A)`.
    #[default]
    Backprojection,
    /// Seeded complex Gaussian image scaled to the measured energy.
    Random,
}

fn default_eta() -> f64 {
    5.0
}
fn default_inner() -> usize {
    5
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PnpConfig {
    pub lambda: f64,
    pub r: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Outer iteration cap `T`; `None` picks 50 for identity/TV and 30 otherwise.
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default = "default_inner")]
    pub inner_iters: usize,
    #[serde(default)]
    pub constraint: ConstraintSet,
    pub denoiser: Denoiser,
    #[serde(default = "default_true")]
    pub symmetric: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initializer: Initializer,
}

impl PnpConfig {
    pub fn new(denoiser: Denoiser, lambda: f64, r: f64, eta: f64) -> Self {
        Self {
            lambda,
            r,
            eta,
            max_iters: None,
            inner_iters: default_inner(),
            constraint: ConstraintSet::ComplexPlane,
            denoiser,
            symmetric: true,
            seed: 0,
            initializer: Initializer::Backprojection,
        }
    }

    pub fn iterations(&self) -> usize {
        self.max_iters.unwrap_or(match self.denoiser {
            Denoiser::Identity | Denoiser::Tv { .. } => 50,
            _ => 30,
        })
    }

    /// Denoising strength `σ = λ/r`.
    pub fn sigma(&self) -> f64 {
        self.lambda / self.r
    }

    pub fn denoiser_spec(&self) -> DenoiserSpec {
        DenoiserSpec::new(self.denoiser, self.sigma())
    }

    pub fn gls_params(&self) -> GlsParams {
        GlsParams {
            r: self.r,
            eta: self.eta,
            constraint: self.constraint,
            inner_iters: self.inner_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(
                "solver.lambda",
                format!("must be finite and nonnegative, got {}", self.lambda),
            ));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::config(
                "solver.r",
                format!("must be positive, got {}", self.r),
            ));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config(
                "solver.eta",
                format!("must be positive, got {}", self.eta),
            ));
        }
        if self.iterations() == 0 {
            return Err(Error::config("solver.max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub rel_err: f64,
    /// `NaN` when no reference image was supplied.
    pub snr_db: f64,
    pub fidelity: f64,
    pub pnp_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub records: Vec<IterRecord>,
}

impl RunHistory {
    pub const CSV_HEADER: &'static str = "iter,rel_err,snr_db,fidelity,pnp_residual";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn csv_row(rec: &IterRecord) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e}",
            rec.iter, rec.rel_err, rec.snr_db, rec.fidelity, rec.pnp_residual
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for rec in &self.records {
            let _ = writeln!(out, "{}", Self::csv_row(rec));
        }
        out
    }

    /// First iteration from which the SNR stays within `tol_db` of the final
    /// SNR through the end of the run.
    pub fn iterations_to_within(&self, tol_db: f64) -> Option<usize> {
        let target = self.last()?.snr_db;
        let mut first = self.last()?.iter;
        for r in self.records.iter().rev() {
            if (r.snr_db - target).abs() <= tol_db {
                first = r.iter;
            } else {
                break;
            }
        }
        Some(first)
    }
}

/// Iterates of the outer loop.
#[derive(Clone, Debug)]
pub struct PnpState {
    pub u: ComplexImage,
    pub v: ComplexImage,
    pub multiplier: ComplexImage,
    pub inner: Option<GlsState>,
    pub iteration: usize,
}

impl PnpState {
    /// `u = v = init`, `Λ = 0`, no inner state.
    pub fn new(init: ComplexImage) -> Self {
        let (h, w) = init.shape();
        Self {
            v: init.clone(),
            u: init,
            multiplier: ComplexImage::zeros(h, w),
            inner: None,
            iteration: 0,
        }
    }
}

/// `SNR(ũ, u) = −20·log10(‖c*ũ − u‖/‖u‖)` with the unit-modulus `c*`
/// minimizing the distance; capped at [`SNR_CAP_DB`].
pub fn snr_db(candidate: &ComplexImage, reference: &ComplexImage) -> Result<f64> {
    reference.check_shape(candidate)?;
    let rn = reference.norm();
    if rn == 0.0 {
        return Err(Error::Domain("SNR reference has zero norm".into()));
    }
    let ip = candidate.inner(reference);
    let c = if ip.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        ip.conj() / ip.norm()
    };
    let d = candidate
        .data()
        .iter()
        .zip(reference.data())
        .map(|(a, b)| (a * c - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if d == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((-20.0 * (d / rn).log10()).min(SNR_CAP_DB))
}

/// Starting image for `cfg.initializer`.
pub fn initial_image<A: MeasurementOperator + ?Sized>(
    op: &A,
    data: &PhaselessData,
    cfg: &PnpConfig,
) -> Result<ComplexImage> {
    let (h, w) = op.image_shape();
    let (fh, fw) = op.frame_shape();
    let diag = op.ata_diagonal();
    let mut u = match cfg.initializer {
        Initializer::Backprojection => {
            let amp: Vec<Complex64> = data
                .f
                .iter()
                .map(|&x| Complex64::new(x.max(0.0).sqrt(), 0.0))
                .collect();
            let z = Spectrum::from_vec(fh, fw, op.num_frames(), amp)?;
            let mut back = op.adjoint(&z)?;
            for (b, &d) in back.data_mut().iter_mut().zip(diag.data()) {
                *b = if d > 0.0 {
                    *b / d
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            back
        }
        Initializer::Random => {
            let x = ComplexImage::random(h, w, cfg.seed);
            let energy: f64 = data.f.iter().map(|v| v.max(0.0)).sum();
            let mean_diag = diag.data().iter().sum::<f64>() / diag.data().len() as f64;
            let target = (energy / mean_diag.max(f64::MIN_POSITIVE)).sqrt();
            let xn = x.norm();
            x.scale(Complex64::new(target / xn, 0.0))
        }
    };
    cfg.constraint.project(&mut u);
    Ok(u)
}

/// One outer iteration using `denoiser` for the regularization step.
pub fn pnp_step<A, D>(
    op: &A,
    data: &PhaselessData,
    cfg: &PnpConfig,
    state: &mut PnpState,
    denoiser: &mut D,
) -> Result<()>
where
    A: MeasurementOperator + ?Sized,
    D: FnMut(&DenoiserSpec, &ComplexImage) -> Result<ComplexImage>,
{
    let r = cfg.r;
    let g = state.v.zip_map(&state.multiplier, |v, l| v - l / r);
    let inner = gls_solve(op, data, &g, &cfg.gls_params(), state.inner.take())?;
    let u = inner.u.clone();
    state.inner = Some(inner);

    let half = if cfg.symmetric {
        let mut l = state.multiplier.clone();
        for ((l, a), b) in l.data_mut().iter_mut().zip(u.data()).zip(state.v.data()) {
            *l += (a - b) * r;
        }
        l
    } else {
        state.multiplier.clone()
    };
    let input = u.zip_map(&half, |a, l| a + l / r);
    let v = denoiser(&cfg.denoiser_spec(), &input)?;
    let mut multiplier = half;
    for ((l, a), b) in multiplier.data_mut().iter_mut().zip(u.data()).zip(v.data()) {
        *l += (a - b) * r;
    }
    state.u = u;
    state.v = v;
    state.multiplier = multiplier;
    state.iteration += 1;
    Ok(())
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct PnpOutput {
    /// The final denoised iterate `v^T`.
    pub image: ComplexImage,
    pub history: RunHistory,
    pub state: PnpState,
}

/// Runs the solver from `cfg.initializer`.
pub fn pnp_run<A: MeasurementOperator + ?Sized>(
    op: &A,
    data: &PhaselessData,
    cfg: &PnpConfig,
    ground_truth: Option<&ComplexImage>,
) -> Result<PnpOutput> {
    let init = initial_image(op, data, cfg)?;
    pnp_run_from(op, data, cfg, ground_truth, init, &mut denoise)
}

/// Runs the solver from `init` with a caller-supplied denoising step.
pub fn pnp_run_from<A, D>(
    op: &A,
    data: &PhaselessData,
    cfg: &PnpConfig,
    ground_truth: Option<&ComplexImage>,
    init: ComplexImage,
    denoiser: &mut D,
) -> Result<PnpOutput>
where
    A: MeasurementOperator + ?Sized,
    D: FnMut(&DenoiserSpec, &ComplexImage) -> Result<ComplexImage>,
{
    cfg.validate()?;
    data.model.validate()?;
    if data.len() != op.output_len() {
        return Err(Error::dim(op.output_len(), data.len()));
    }
    let (h, w) = op.image_shape();
    if init.shape() != (h, w) {
        return Err(Error::dim(
            format!("{h}x{w} image"),
            format!("{}x{} image", init.height(), init.width()),
        ));
    }
    cfg.denoiser.validate(h, w)?;

    let mut state = PnpState::new(init);
    let mut history = RunHistory::default();
    for k in 1..=cfg.iterations() {
        let prev = state.v.clone();
        pnp_step(op, data, cfg, &mut state, denoiser)?;
        let vn = state.v.norm();
        // A NaN norm must stay NaN so the guard below trips.
        let rel_err = if vn == 0.0 {
            prev.norm()
        } else {
            state.v.distance(&prev) / vn
        };
        let snr = match ground_truth {
            Some(gt) => snr_db(&state.v, gt)?,
            None => f64::NAN,
        };
        let au = op.forward(&state.u)?;
        history.records.push(IterRecord {
            iter: k,
            rel_err,
            snr_db: snr,
            fidelity: fidelity_floored(&au.intensities(), data),
            pnp_residual: state.u.distance(&state.v),
        });
        if !(rel_err <= DIVERGENCE_LIMIT) {
            return Err(Error::Diverged {
                iteration: k,
                rel_err,
                history: Box::new(history),
            });
        }
    }
    Ok(PnpOutput {
        image: state.v.clone(),
        history,
        state,
    })
}

/// Relative residuals of the fixed-point equations
/// `u = Prox(v − Λ/r)`, `v = D_σ(u + Λ/r)`, `u = v`.
pub fn fixed_point_residual<A: MeasurementOperator + ?Sized>(
    state: &PnpState,
    op: &A,
    data: &PhaselessData,
    cfg: &PnpConfig,
) -> Result<[f64; 3]> {
    let r = cfg.r;
    let rel = |a: &ComplexImage, b: &ComplexImage| {
        let n = a.norm();
        if n > 0.0 {
            a.distance(b) / n
        } else {
            b.norm()
        }
    };
    let g = state.v.zip_map(&state.multiplier, |v, l| v - l / r);
    let prox = gls_solve(op, data, &g, &cfg.gls_params(), state.inner.clone())?;
    let d_in = state.u.zip_map(&state.multiplier, |u, l| u + l / r);
    let d_out = denoise(&cfg.denoiser_spec(), &d_in)?;
    Ok([
        rel(&state.u, &prox.u),
        rel(&state.v, &d_out),
        rel(&state.u, &state.v),
    ])
}
