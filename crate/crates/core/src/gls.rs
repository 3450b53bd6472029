//! Inner ADMM for the generalized least-squares step
//! `min_u B(|Au|², f) + I_K(u) + (r/2)‖u − g‖²`, split as `z = Au`.
//!
//! One sweep:
//! 1. `u ← (ηA*A + rI)⁻¹ (ηA*(z + Λ̂/η) + r g)`, then project onto `K`;
//! 2. `z ← prox_B(Au − Λ̂/η)` entrywise;
//! 3. `Λ̂ ← Λ̂ + η(z − Au)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ComplexImage, RealImage};
use crate::noise::PhaselessData;
use crate::operator::{MeasurementOperator, Spectrum};
use crate::prox::prox_magnitude;

/// Feasible set for the unknown image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSet {
    #[default]
    ComplexPlane,
    RealPlane,
}

impl ConstraintSet {
    pub fn project(&self, u: &mut ComplexImage) {
        if *self == ConstraintSet::RealPlane {
            u.project_real();
        }
    }
}

#[derive(Clone, Debug)]
pub struct GlsState {
    pub u: ComplexImage,
    pub z: Spectrum,
    pub multiplier: Spectrum,
    pub iterations: usize,
}

impl GlsState {
    /// Cold start: `u = g`, `z = Ag`, `Λ̂ = 0`.
    pub fn cold<A: MeasurementOperator + ?Sized>(op: &A, g: &ComplexImage) -> Result<Self> {
        let z = op.forward(g)?;
        let (fh, fw) = op.frame_shape();
        Ok(Self {
            u: g.clone(),
            multiplier: Spectrum::zeros(fh, fw, op.num_frames()),
            z,
            iterations: 0,
        })
    }
}

/// Parameters of one GLS solve.
#[derive(Clone, Copy, Debug)]
pub struct GlsParams {
    pub r: f64,
    pub eta: f64,
    pub constraint: ConstraintSet,
    pub inner_iters: usize,
}

impl GlsParams {
    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::config(
                "solver.r",
                format!("must be positive, got {}", self.r),
            ));
        }
        if !(self.eta > 0.0) {
            return Err(Error::config(
                "solver.eta",
                format!("must be positive, got {}", self.eta),
            ));
        }
        Ok(())
    }
}

/// Solves `(ηA*A + rI)u = ηA*(z + Λ̂/η) + r·g` pointwise via the diagonal,
/// then projects onto `constraint`.
#[allow(clippy::too_many_arguments)]
pub fn u_update<A: MeasurementOperator + ?Sized>(
    op: &A,
    diag: &RealImage,
    z: &Spectrum,
    multiplier: &Spectrum,
    g: &ComplexImage,
    r: f64,
    eta: f64,
    constraint: ConstraintSet,
) -> Result<ComplexImage> {
    if eta == 0.0 {
        if r == 0.0 {
            return Err(Error::Singular("eta and r are both zero".into()));
        }
        let mut u = g.clone();
        constraint.project(&mut u);
        return Ok(u);
    }
    let zhat = z.zip_map(multiplier, |a, l| a + l / eta);
    let back = op.adjoint(&zhat)?;
    g.check_shape(&back)?;
    let mut u = ComplexImage::zeros(g.height(), g.width());
    for (i, out) in u.data_mut().iter_mut().enumerate() {
        let denom = eta * diag.data()[i] + r;
        if denom == 0.0 {
            return Err(Error::Singular(format!(
                "eta*diag(A*A) + r vanishes at pixel {i}"
            )));
        }
        *out = (back.data()[i] * eta + g.data()[i] * r) / denom;
    }
    constraint.project(&mut u);
    Ok(u)
}

/// Runs `params.inner_iters` sweeps from `warm` (or a cold start at `g`).
pub fn gls_solve<A: MeasurementOperator + ?Sized>(
    op: &A,
    data: &PhaselessData,
    g: &ComplexImage,
    params: &GlsParams,
    warm: Option<GlsState>,
) -> Result<GlsState> {
    params.validate()?;
    if data.len() != op.output_len() {
        return Err(Error::dim(op.output_len(), data.len()));
    }
    let diag = op.ata_diagonal();
    let mut state = match warm {
        Some(s) => s,
        None => GlsState::cold(op, g)?,
    };
    for _ in 0..params.inner_iters {
        sweep(op, &diag, data, g, params, &mut state)?;
    }
    Ok(state)
}

/// One inner ADMM sweep, in place.
pub fn sweep<A: MeasurementOperator + ?Sized>(
    op: &A,
    diag: &RealImage,
    data: &PhaselessData,
    g: &ComplexImage,
    params: &GlsParams,
    state: &mut GlsState,
) -> Result<()> {
    let eta = params.eta;
    state.u = u_update(
        op,
        diag,
        &state.z,
        &state.multiplier,
        g,
        params.r,
        eta,
        params.constraint,
    )?;
    let au = op.forward(&state.u)?;
    let z0 = au.zip_map(&state.multiplier, |a, l| a - l / eta);
    state.z = prox_magnitude(&data.model, &z0, &data.f, eta)?;
    for ((l, z), a) in state
        .multiplier
        .data_mut()
        .iter_mut()
        .zip(state.z.data())
        .zip(au.data())
    {
        *l += (z - a) * eta;
    }
    state.iterations += 1;
    Ok(())
}

/// `‖z − Au‖ / ‖z‖`, the splitting residual.
pub fn splitting_residual<A: MeasurementOperator + ?Sized>(
    op: &A,
    state: &GlsState,
) -> Result<f64> {
    let au = op.forward(&state.u)?;
    let zn = state.z.norm();
    Ok(if zn == 0.0 {
        au.norm()
    } else {
        state.z.distance(&au) / zn
    })
}
