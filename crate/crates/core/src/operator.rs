//! Linear measurement operators: coded diffraction patterns and ptychography.
//!
//! Each operator maps an image `u` to a stack of Fourier-transformed frames.
//! For CDP frame `k` is `F(w_k ∘ u)`; for ptychography frame `j` is
//! `F(probe ∘ window_j(u))`. `F` is the unitary DFT of the frame, so the
//! adjoint only needs inverse transforms, and `A*A` is diagonal.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Dft2;
use crate::image::{ComplexImage, RealImage};
use crate::par;

/// A stack of equally-sized frames in measurement space.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    frame_height: usize,
    frame_width: usize,
    frames: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(frame_height: usize, frame_width: usize, frames: usize) -> Self {
        Self {
            frame_height,
            frame_width,
            frames,
            data: vec![Complex64::new(0.0, 0.0); frame_height * frame_width * frames],
        }
    }

    pub fn from_vec(
        frame_height: usize,
        frame_width: usize,
        frames: usize,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        let m = frame_height * frame_width * frames;
        if data.len() != m {
            return Err(Error::dim(m, data.len()));
        }
        Ok(Self {
            frame_height,
            frame_width,
            frames,
            data,
        })
    }

    pub fn random(frame_height: usize, frame_width: usize, frames: usize, seed: u64) -> Self {
        let img = ComplexImage::random(frame_height * frames, frame_width, seed);
        Self {
            frame_height,
            frame_width,
            frames,
            data: img.into_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame_len(&self) -> usize {
        self.frame_height * self.frame_width
    }

    pub fn frame(&self, k: usize) -> &[Complex64] {
        let n = self.frame_len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `Σ self · conj(other)`.
    pub fn inner(&self, other: &Spectrum) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn distance(&self, other: &Spectrum) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Squared moduli `|z|²`, the noiseless intensities.
    pub fn intensities(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn zip_map(&self, other: &Spectrum, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            frame_height: self.frame_height,
            frame_width: self.frame_width,
            frames: self.frames,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            frame_height: self.frame_height,
            frame_width: self.frame_width,
            frames: self.frames,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }
}

/// Common interface of the measurement operators.
pub trait MeasurementOperator {
    /// Shape `(n1, n2)` of the unknown image.
    fn image_shape(&self) -> (usize, usize);

    /// Shape of one measured frame.
    fn frame_shape(&self) -> (usize, usize);

    fn num_frames(&self) -> usize;

    /// Measurement dimension `m`.
    fn output_len(&self) -> usize {
        let (h, w) = self.frame_shape();
        h * w * self.num_frames()
    }

    fn forward(&self, u: &ComplexImage) -> Result<Spectrum>;

    fn adjoint(&self, z: &Spectrum) -> Result<ComplexImage>;

    /// Diagonal of `A*A`.
    fn ata_diagonal(&self) -> RealImage;
}

fn check_image(op: &impl MeasurementOperator, u: &ComplexImage) -> Result<()> {
    let (h, w) = op.image_shape();
    if u.shape() != (h, w) {
        return Err(Error::dim(
            format!("{h}x{w} image"),
            format!("{}x{} image", u.height(), u.width()),
        ));
    }
    Ok(())
}

fn check_spectrum(op: &impl MeasurementOperator, z: &Spectrum) -> Result<()> {
    let (fh, fw) = op.frame_shape();
    if z.len() != op.output_len() || (z.frame_height, z.frame_width) != (fh, fw) {
        return Err(Error::dim(
            format!("{} frames of {fh}x{fw}", op.num_frames()),
            format!(
                "{} frames of {}x{}",
                z.frames, z.frame_height, z.frame_width
            ),
        ));
    }
    Ok(())
}

/// The eight octanary mask values `{±√2/2, ±i√2/2, ±√3, ±i√3}`.
pub fn octanary_candidates() -> [Complex64; 8] {
    let a = std::f64::consts::SQRT_2 / 2.0;
    let b = 3f64.sqrt();
    [
        Complex64::new(a, 0.0),
        Complex64::new(-a, 0.0),
        Complex64::new(0.0, a),
        Complex64::new(0.0, -a),
        Complex64::new(b, 0.0),
        Complex64::new(-b, 0.0),
        Complex64::new(0.0, b),
        Complex64::new(0.0, -b),
    ]
}

/// Coded diffraction patterns: `A u = [F(w_0 ∘ u); …; F(w_{K-1} ∘ u)]`.
#[derive(Clone, Debug)]
pub struct CdpOperator {
    masks: Vec<ComplexImage>,
    dft: Dft2,
    diag: RealImage,
}

impl CdpOperator {
    pub fn new(masks: Vec<ComplexImage>) -> Result<Self> {
        let first = masks
            .first()
            .ok_or_else(|| Error::config("geometry.masks", "at least one mask is required"))?;
        let (h, w) = first.shape();
        for m in &masks[1..] {
            first.check_shape(m)?;
        }
        let mut diag = RealImage::zeros(h, w);
        for m in &masks {
            for (d, c) in diag.data_mut().iter_mut().zip(m.data()) {
                *d += c.norm_sqr();
            }
        }
        Ok(Self {
            masks,
            dft: Dft2::new(h, w),
            diag,
        })
    }

    /// `count` masks with entries drawn i.i.d. uniformly from the octanary set.
    pub fn octanary(height: usize, width: usize, count: usize, seed: u64) -> Result<Self> {
        Self::new(octanary_masks(height, width, count, seed))
    }

    pub fn masks(&self) -> &[ComplexImage] {
        &self.masks
    }
}

pub fn octanary_masks(height: usize, width: usize, count: usize, seed: u64) -> Vec<ComplexImage> {
    let cands = octanary_candidates();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ComplexImage::from_fn(height, width, |_, _| cands[rng.random_range(0..8)]))
        .collect()
}

impl MeasurementOperator for CdpOperator {
    fn image_shape(&self) -> (usize, usize) {
        self.masks[0].shape()
    }

    fn frame_shape(&self) -> (usize, usize) {
        self.masks[0].shape()
    }

    fn num_frames(&self) -> usize {
        self.masks.len()
    }

    fn forward(&self, u: &ComplexImage) -> Result<Spectrum> {
        check_image(self, u)?;
        let (h, w) = u.shape();
        let n = h * w;
        let mut out = Spectrum::zeros(h, w, self.masks.len());
        par::for_each_chunk(&mut out.data, n, |k, frame| {
            for ((o, a), b) in frame.iter_mut().zip(self.masks[k].data()).zip(u.data()) {
                *o = a * b;
            }
            self.dft.forward_inplace(frame);
        });
        Ok(out)
    }

    fn adjoint(&self, z: &Spectrum) -> Result<ComplexImage> {
        check_spectrum(self, z)?;
        let (h, w) = self.image_shape();
        let back: Vec<Vec<Complex64>> = par::map_range(self.masks.len(), |k| {
            let mut buf = z.frame(k).to_vec();
            self.dft.inverse_inplace(&mut buf);
            for (b, m) in buf.iter_mut().zip(self.masks[k].data()) {
                *b *= m.conj();
            }
            buf
        });
        let mut out = ComplexImage::zeros(h, w);
        for frame in &back {
            for (o, b) in out.data_mut().iter_mut().zip(frame) {
                *o += b;
            }
        }
        Ok(out)
    }

    fn ata_diagonal(&self) -> RealImage {
        self.diag.clone()
    }
}

/// Illumination generators for ptychography.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeShape {
    /// Circular aperture of `radius` pixels with quadratic phase
    /// `exp(iπ·curvature·ρ²/radius²)`.
    Zone { radius: f64, curvature: f64 },
    /// Uniform disk.
    Disk { radius: f64 },
    /// Uniform over the whole frame.
    Flat,
}

impl ProbeShape {
    pub fn generate(&self, size: usize) -> ComplexImage {
        let c = (size as f64 - 1.0) / 2.0;
        ComplexImage::from_fn(size, size, |i, j| {
            let (di, dj) = (i as f64 - c, j as f64 - c);
            let rho2 = di * di + dj * dj;
            match *self {
                ProbeShape::Zone { radius, curvature } => {
                    if rho2 <= radius * radius {
                        let phase = std::f64::consts::PI * curvature * rho2 / (radius * radius);
                        Complex64::from_polar(1.0, phase)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                ProbeShape::Disk { radius } => {
                    if rho2 <= radius * radius {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
                ProbeShape::Flat => Complex64::new(1.0, 0.0),
            }
        })
    }
}

/// Ptychographic scan: frame `j` is `F(probe ∘ u[r_j.., c_j..])`.
#[derive(Clone, Debug)]
pub struct PtychoOperator {
    height: usize,
    width: usize,
    probe: ComplexImage,
    positions: Vec<(usize, usize)>,
    wrap: bool,
    dft: Dft2,
    diag: RealImage,
}

impl PtychoOperator {
    /// Builds the operator. With `wrap = false`, positions whose window would
    /// leave the image are clipped to the last valid offset.
    pub fn new(
        height: usize,
        width: usize,
        probe: ComplexImage,
        positions: Vec<(usize, usize)>,
        wrap: bool,
    ) -> Result<Self> {
        let s = probe.height();
        if probe.width() != s {
            return Err(Error::config("geometry.probe", "probe must be square"));
        }
        if s > height || s > width {
            return Err(Error::config(
                "geometry.frame",
                format!("frame size {s} exceeds image {height}x{width}"),
            ));
        }
        if positions.is_empty() {
            return Err(Error::config("geometry.grid", "no scan positions"));
        }
        let positions: Vec<(usize, usize)> = positions
            .into_iter()
            .map(|(r, c)| {
                if wrap {
                    (r % height, c % width)
                } else {
                    (r.min(height - s), c.min(width - s))
                }
            })
            .collect();
        let mut diag = RealImage::zeros(height, width);
        for &(r, c) in &positions {
            for i in 0..s {
                for j in 0..s {
                    let (y, x) = ((r + i) % height, (c + j) % width);
                    diag.data_mut()[y * width + x] += probe.get(i, j).norm_sqr();
                }
            }
        }
        Ok(Self {
            height,
            width,
            dft: Dft2::new(s, s),
            probe,
            positions,
            wrap,
            diag,
        })
    }

    /// Regular `rows × cols` raster of positions with spacing `stride`.
    pub fn grid(
        height: usize,
        width: usize,
        probe: ComplexImage,
        rows: usize,
        cols: usize,
        stride: usize,
        wrap: bool,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(Error::config(
                "geometry.stride",
                "stride must be at least 1",
            ));
        }
        let positions = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i * stride, j * stride)))
            .collect();
        Self::new(height, width, probe, positions, wrap)
    }

    pub fn probe(&self) -> &ComplexImage {
        &self.probe
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    pub fn wraps(&self) -> bool {
        self.wrap
    }

    #[inline]
    fn pixel(&self, pos: (usize, usize), i: usize, j: usize) -> usize {
        let y = (pos.0 + i) % self.height;
        let x = (pos.1 + j) % self.width;
        y * self.width + x
    }
}

impl MeasurementOperator for PtychoOperator {
    fn image_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn frame_shape(&self) -> (usize, usize) {
        self.probe.shape()
    }

    fn num_frames(&self) -> usize {
        self.positions.len()
    }

    fn forward(&self, u: &ComplexImage) -> Result<Spectrum> {
        check_image(self, u)?;
        let s = self.probe.height();
        let mut out = Spectrum::zeros(s, s, self.positions.len());
        par::for_each_chunk(&mut out.data, s * s, |k, frame| {
            let pos = self.positions[k];
            for i in 0..s {
                for j in 0..s {
                    frame[i * s + j] = self.probe.get(i, j) * u.data()[self.pixel(pos, i, j)];
                }
            }
            self.dft.forward_inplace(frame);
        });
        Ok(out)
    }

    fn adjoint(&self, z: &Spectrum) -> Result<ComplexImage> {
        check_spectrum(self, z)?;
        let s = self.probe.height();
        let back: Vec<Vec<Complex64>> = par::map_range(self.positions.len(), |k| {
            let mut buf = z.frame(k).to_vec();
            self.dft.inverse_inplace(&mut buf);
            for (b, p) in buf.iter_mut().zip(self.probe.data()) {
                *b *= p.conj();
            }
            buf
        });
        let mut out = ComplexImage::zeros(self.height, self.width);
        let data = out.data_mut();
        for (k, frame) in back.iter().enumerate() {
            let pos = self.positions[k];
            for i in 0..s {
                for j in 0..s {
                    data[self.pixel(pos, i, j)] += frame[i * s + j];
                }
            }
        }
        Ok(out)
    }

    fn ata_diagonal(&self) -> RealImage {
        self.diag.clone()
    }
}

/// Either supported operator, for configuration-driven code paths.
#[derive(Clone, Debug)]
pub enum Operator {
    Cdp(CdpOperator),
    Ptycho(PtychoOperator),
}

impl From<CdpOperator> for Operator {
    fn from(op: CdpOperator) -> Self {
        Operator::Cdp(op)
    }
}

impl From<PtychoOperator> for Operator {
    fn from(op: PtychoOperator) -> Self {
        Operator::Ptycho(op)
    }
}

impl MeasurementOperator for Operator {
    fn image_shape(&self) -> (usize, usize) {
        match self {
            Operator::Cdp(op) => op.image_shape(),
            Operator::Ptycho(op) => op.image_shape(),
        }
    }

    fn frame_shape(&self) -> (usize, usize) {
        match self {
            Operator::Cdp(op) => op.frame_shape(),
            Operator::Ptycho(op) => op.frame_shape(),
        }
    }

    fn num_frames(&self) -> usize {
        match self {
            Operator::Cdp(op) => op.num_frames(),
            Operator::Ptycho(op) => op.num_frames(),
        }
    }

    fn forward(&self, u: &ComplexImage) -> Result<Spectrum> {
        match self {
            Operator::Cdp(op) => op.forward(u),
            Operator::Ptycho(op) => op.forward(u),
        }
    }

    fn adjoint(&self, z: &Spectrum) -> Result<ComplexImage> {
        match self {
            Operator::Cdp(op) => op.adjoint(z),
            Operator::Ptycho(op) => op.adjoint(z),
        }
    }

    fn ata_diagonal(&self) -> RealImage {
        match self {
            Operator::Cdp(op) => op.ata_diagonal(),
            Operator::Ptycho(op) => op.ata_diagonal(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::dft2_unitary;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_mask_is_plain_dft() {
        let u = ComplexImage::random(4, 6, 2);
        let op = CdpOperator::new(vec![ComplexImage::filled(4, 6, c(1.0, 0.0))]).unwrap();
        let z = op.forward(&u).unwrap();
        let f = dft2_unitary(&u);
        for (a, b) in z.data().iter().zip(f.data()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_mask_adjoint_of_delta() {
        let mut d = ComplexImage::zeros(4, 4);
        d.set(0, 0, c(1.0, 0.0));
        let op = CdpOperator::new(vec![ComplexImage::filled(4, 4, c(1.0, 0.0))]).unwrap();
        let back = op.adjoint(&op.forward(&d).unwrap()).unwrap();
        assert!(back.distance(&d) < 1e-14);
    }

    #[test]
    fn zero_spectrum_gives_zero_image() {
        let op = CdpOperator::octanary(4, 4, 2, 1).unwrap();
        let back = op.adjoint(&Spectrum::zeros(4, 4, 2)).unwrap();
        assert_eq!(back.norm(), 0.0);
    }

    #[test]
    fn unit_masks_have_constant_diagonal() {
        let one = ComplexImage::filled(3, 5, c(1.0, 0.0));
        let op = CdpOperator::new(vec![one.clone(), one]).unwrap();
        assert!(op.ata_diagonal().data().iter().all(|&d| d == 2.0));
    }

    #[test]
    fn octanary_entries_come_from_candidate_set() {
        let cands = octanary_candidates();
        let masks = octanary_masks(8, 8, 4, 9);
        for m in &masks {
            for v in m.data() {
                assert!(cands.contains(v));
            }
        }
        // all eight values appear in 256 draws with overwhelming probability
        let seen = cands
            .iter()
            .filter(|c| masks.iter().any(|m| m.data().contains(c)))
            .count();
        assert_eq!(seen, 8);
        assert_eq!(masks, octanary_masks(8, 8, 4, 9));
    }

    #[test]
    fn single_full_frame_is_plain_dft() {
        let u = ComplexImage::random(8, 8, 4);
        let probe = ProbeShape::Flat.generate(8);
        let op = PtychoOperator::new(8, 8, probe, vec![(0, 0)], false).unwrap();
        let z = op.forward(&u).unwrap();
        let f = dft2_unitary(&u);
        for (a, b) in z.data().iter().zip(f.data()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_frame_coverage_diagonal() {
        let probe = ProbeShape::Flat.generate(3);
        let op = PtychoOperator::new(6, 6, probe, vec![(1, 2)], false).unwrap();
        let d = op.ata_diagonal();
        for i in 0..6 {
            for j in 0..6 {
                let inside = (1..4).contains(&i) && (2..5).contains(&j);
                assert_eq!(d.get(i, j), if inside { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn non_wrapping_positions_are_clipped() {
        let probe = ProbeShape::Flat.generate(4);
        let op = PtychoOperator::new(8, 8, probe, vec![(6, 7)], false).unwrap();
        assert_eq!(op.positions(), &[(4, 4)]);
    }

    #[test]
    fn paper_geometry_tiles_exactly() {
        let probe = ProbeShape::Flat.generate(64);
        let op = PtychoOperator::grid(256, 256, probe, 16, 16, 16, true).unwrap();
        assert_eq!(op.output_len(), 256 * 64 * 64);
        // 64/16 = 4 overlapping frames per axis cover every pixel 16 times
        assert!(op.ata_diagonal().data().iter().all(|&d| d == 16.0));
    }

    #[test]
    fn shape_mismatch_is_a_dimension_error() {
        let op = CdpOperator::octanary(4, 4, 2, 1).unwrap();
        assert!(matches!(
            op.forward(&ComplexImage::zeros(4, 5)),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            op.adjoint(&Spectrum::zeros(4, 4, 3)),
            Err(Error::Dimension { .. })
        ));
        assert!(
            PtychoOperator::new(4, 4, ProbeShape::Flat.generate(5), vec![(0, 0)], true).is_err()
        );
    }

    #[test]
    fn zone_probe_is_unit_modulus_inside_aperture() {
        let p = ProbeShape::Zone {
            radius: 5.0,
            curvature: 0.5,
        }
        .generate(16);
        for v in p.data() {
            assert!(v.norm() == 0.0 || (v.norm() - 1.0).abs() < 1e-14);
        }
        assert!(p.data().iter().any(|v| v.im.abs() > 0.1));
    }
}
