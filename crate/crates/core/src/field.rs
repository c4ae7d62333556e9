//! Real periodic fields as cosine/sine mode amplitudes, grid sampling on the
//! uniform torus grid, the Hilbert transform, and velocity recovery.
//!
//! Grid points are `θ_m = -π + 2πm/M`; the conversion to the standard DFT
//! convention (samples on `[0, 2π)`) is the alternating factor `(-1)^j`
//! applied per frequency.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::series::SineSeries;

/// Real field as mean plus cosine/sine amplitudes up to a mode cutoff.
///
/// Entry `j-1` of `cos`/`sin` holds the coefficient of `cos(jθ)` / `sin(jθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierField {
    pub fn zeros(modes: usize) -> Self {
        FourierField {
            mean: 0.0,
            cos: vec![0.0; modes],
            sin: vec![0.0; modes],
        }
    }

    /// Number of retained frequencies.
    pub fn modes(&self) -> usize {
        debug_assert_eq!(self.cos.len(), self.sin.len());
        self.cos.len()
    }

    /// Odd field from a sine series, zero-padded or truncated to `modes`.
    /// Truncation is refused if it would discard nonzero coefficients.
    pub fn from_sine(xi: &SineSeries, modes: usize) -> crate::Result<Self> {
        let mut f = FourierField::zeros(modes);
        for (i, &b) in xi.coeffs().iter().enumerate() {
            if i < modes {
                f.sin[i] = b;
            } else if b != 0.0 {
                return Err(crate::Error::InvalidConfig(format!(
                    "sine coefficient at frequency {} exceeds mode cutoff {}",
                    i + 1,
                    modes
                )));
            }
        }
        Ok(f)
    }

    /// Sine part as a series (ignores mean and cosine content).
    pub fn sine_part(&self) -> SineSeries {
        SineSeries::new(self.sin.clone())
    }

    /// `∂_θ`: `cos(jθ) -> -j sin(jθ)`, `sin(jθ) -> j cos(jθ)`.
    pub fn derivative(&self) -> FourierField {
        let modes = self.modes();
        let mut out = FourierField::zeros(modes);
        for j in 1..=modes {
            out.cos[j - 1] = j as f64 * self.sin[j - 1];
            out.sin[j - 1] = -(j as f64) * self.cos[j - 1];
        }
        out
    }

    /// Hilbert transform: multiplier `-i sgn k`, i.e. `sin(jθ) -> -cos(jθ)`,
    /// `cos(jθ) -> sin(jθ)`, mean annihilated.
    pub fn hilbert(&self) -> FourierField {
        let modes = self.modes();
        let mut out = FourierField::zeros(modes);
        for j in 0..modes {
            out.cos[j] = -self.sin[j];
            out.sin[j] = self.cos[j];
        }
        out
    }

    /// Velocity `u` with `∂_θ u = H self` and the gauge `u(0) = 0`.
    ///
    /// Frequency-wise `û_j = -ŵ_j / |j|`; the mean of the input does not
    /// contribute (mode 0 of the Hilbert transform is 0) and the additive
    /// constant is fixed by the gauge.
    pub fn velocity(&self) -> FourierField {
        let modes = self.modes();
        let mut out = FourierField::zeros(modes);
        let mut at_zero = 0.0;
        for j in 1..=modes {
            out.cos[j - 1] = -self.cos[j - 1] / j as f64;
            out.sin[j - 1] = -self.sin[j - 1] / j as f64;
            at_zero += out.cos[j - 1];
        }
        out.mean = -at_zero;
        out
    }

    /// Pointwise evaluation by direct summation (tests and small fields).
    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.mean;
        for j in 1..=self.modes() {
            let jt = j as f64 * theta;
            acc += self.cos[j - 1] * jt.cos() + self.sin[j - 1] * jt.sin();
        }
        acc
    }

    /// `L^2` norm on the torus.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self
            .cos
            .iter()
            .chain(self.sin.iter())
            .map(|c| c * c)
            .sum();
        (std::f64::consts::PI * sum + 2.0 * std::f64::consts::PI * self.mean * self.mean).sqrt()
    }

    /// Energy fraction metric above frequency `cut`:
    /// `(Σ_{j>cut} a_j^2 + b_j^2)^{1/2}`.
    pub fn tail_mass(&self, cut: usize) -> f64 {
        let mut sum = 0.0;
        for j in (cut + 1)..=self.modes() {
            sum += self.cos[j - 1] * self.cos[j - 1] + self.sin[j - 1] * self.sin[j - 1];
        }
        sum.sqrt()
    }

    /// Mass on odd-frequency sine modes (parity-leak diagnostic for runs
    /// confined to the even-frequency odd subspace).
    pub fn odd_frequency_sine_mass(&self) -> f64 {
        self.sin
            .iter()
            .enumerate()
            .filter(|(i, _)| (i + 1) % 2 == 1)
            .map(|(_, b)| b * b)
            .sum::<f64>()
            .sqrt()
    }

    /// Mass on the even-symmetry part (mean and cosines) — zero for odd fields.
    pub fn even_part_mass(&self) -> f64 {
        (self.mean * self.mean + self.cos.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    pub fn scaled(&self, s: f64) -> FourierField {
        FourierField {
            mean: self.mean * s,
            cos: self.cos.iter().map(|c| c * s).collect(),
            sin: self.sin.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &FourierField, s: f64) {
        debug_assert_eq!(self.modes(), other.modes());
        self.mean += s * other.mean;
        for j in 0..self.modes() {
            self.cos[j] += s * other.cos[j];
            self.sin[j] += s * other.sin[j];
        }
    }

    /// Zero every coefficient above `cut` (sharp spectral cutoff).
    pub fn truncated(&self, cut: usize) -> FourierField {
        let mut out = self.clone();
        for j in (cut + 1)..=self.modes() {
            out.cos[j - 1] = 0.0;
            out.sin[j - 1] = 0.0;
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.cos
            .iter()
            .chain(self.sin.iter())
            .chain(std::iter::once(&self.mean))
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// Values on the uniform grid `θ_m = -π + 2πm/M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: Vec<f64>,
}

impl GridField {
    pub fn new(values: Vec<f64>) -> Self {
        GridField { values }
    }

    /// Sample a function on the standard grid.
    pub fn sample(m: usize, f: impl Fn(f64) -> f64) -> Self {
        GridField {
            values: (0..m).map(|i| f(Self::theta(m, i))).collect(),
        }
    }

    /// `θ_m = -π + 2πm/M`.
    pub fn theta(m: usize, i: usize) -> f64 {
        -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / m as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// FFT-backed transform between spectral and grid representations at a fixed
/// grid size. Plans are reused across calls.
pub struct GridTransform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl GridTransform {
    pub fn new(m: usize) -> Self {
        assert!(m >= 4 && m.is_power_of_two(), "grid size must be a power of two >= 4");
        let mut planner = FftPlanner::new();
        GridTransform {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// Spectral -> grid. Requires `modes < M/2`.
    pub fn to_grid(&self, f: &FourierField) -> GridField {
        let m = self.m;
        assert!(f.modes() < m / 2, "field has too many modes for this grid");
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        buf[0] = Complex::new(f.mean, 0.0);
        for j in 1..=f.modes() {
            // c_j = (a_j - i b_j)/2, shifted grid origin gives (-1)^j.
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = Complex::new(f.cos[j - 1] / 2.0, -f.sin[j - 1] / 2.0) * sign;
            buf[j] = c;
            buf[m - j] = c.conj();
        }
        self.inverse.process(&mut buf);
        GridField {
            values: buf.into_iter().map(|z| z.re).collect(),
        }
    }

    /// Grid -> spectral with a sharp cutoff at `modes`. Requires `modes < M/2`.
    pub fn from_grid(&self, g: &GridField, modes: usize) -> FourierField {
        let m = self.m;
        assert_eq!(g.len(), m);
        assert!(modes < m / 2);
        let mut buf: Vec<Complex<f64>> =
            g.values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / m as f64;
        let mut f = FourierField::zeros(modes);
        f.mean = buf[0].re * scale;
        for j in 1..=modes {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = buf[j] * scale * sign;
            f.cos[j - 1] = 2.0 * c.re;
            f.sin[j - 1] = -2.0 * c.im;
        }
        f
    }
}

/// Velocity recovery from vorticity under the gauge `u(0) = 0`
/// (`∂_θ u = Hω`, frequency-wise `û_j = -ŵ_j/|j|`).
pub fn velocity_from_vorticity(omega: &FourierField) -> FourierField {
    omega.velocity()
}

/// Torus Hilbert transform of a field.
pub fn hilbert(f: &FourierField) -> FourierField {
    f.hilbert()
}
