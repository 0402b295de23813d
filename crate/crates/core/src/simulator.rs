//! Lattice evolution of the two-component field by direct stepping, kernel
//! convolution and momentum-space propagation, plus the dispersion relation.
//!
//! One step maps `ψ(x) ← Σ_h A_h ψ(x - δ_h)`: amplitude at a site spreads to
//! its four neighbours, `A_R` landing on the right neighbour.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::coin::{coin_matrix, Direction, Nu};
use crate::error::{Error, Result};
use crate::linalg::{spinor_add_assign, spinor_norm_sqr, Mat2, Spinor, ZERO_SPINOR};
use crate::propagator::{kernel_table, KernelTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Wraps around the window.
    Periodic,
    /// Zero outside a fixed window; stepping refuses once amplitude reaches the edge.
    Padded,
}

/// Two complex amplitudes per site on a rectangular window of the lattice.
/// Site `(x, y)` is stored at row `y - offset.1`, column `x - offset.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    width: usize,
    height: usize,
    offset: (i64, i64),
    psi: Vec<Spinor>,
}

impl FieldState {
    pub fn zeros(width: usize, height: usize, offset: (i64, i64)) -> Self {
        FieldState {
            width,
            height,
            offset,
            psi: vec![ZERO_SPINOR; width * height],
        }
    }

    pub fn from_amplitudes(
        width: usize,
        height: usize,
        offset: (i64, i64),
        psi: Vec<Spinor>,
    ) -> Result<Self> {
        if psi.len() != width * height {
            return Err(Error::InvalidState(format!(
                "{} amplitudes for a {width}x{height} window",
                psi.len()
            )));
        }
        if psi
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(FieldState {
            width,
            height,
            offset,
            psi,
        })
    }

    /// Window of side `2 radius + 1` centred on the origin, holding `spinor`
    /// at the origin.
    pub fn centered_delta(radius: usize, spinor: Spinor) -> Self {
        let side = 2 * radius + 1;
        let r = radius as i64;
        let mut s = FieldState::zeros(side, side, (-r, -r));
        s.set(0, 0, spinor);
        s
    }

    /// Seeded random state normalised to unit norm.
    pub fn random(width: usize, height: usize, offset: (i64, i64), seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let psi: Vec<Spinor> = (0..width * height).map(|_| [draw(), draw()]).collect();
        let mut s = FieldState {
            width,
            height,
            offset,
            psi,
        };
        s.normalize();
        s
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn offset(&self) -> (i64, i64) {
        self.offset
    }

    pub fn amplitudes(&self) -> &[Spinor] {
        &self.psi
    }

    fn index(&self, x: i64, y: i64) -> Option<usize> {
        let (cx, cy) = (x - self.offset.0, y - self.offset.1);
        if cx < 0 || cy < 0 || cx >= self.width as i64 || cy >= self.height as i64 {
            return None;
        }
        Some(cy as usize * self.width + cx as usize)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        self.index(x, y).is_some()
    }

    /// Amplitude at `(x, y)`; zero outside the window.
    pub fn get(&self, x: i64, y: i64) -> Spinor {
        self.index(x, y).map_or(ZERO_SPINOR, |i| self.psi[i])
    }

    /// Panics when `(x, y)` is outside the window.
    pub fn set(&mut self, x: i64, y: i64, v: Spinor) {
        let i = self
            .index(x, y)
            .unwrap_or_else(|| panic!("site ({x}, {y}) outside the window"));
        self.psi[i] = v;
    }

    /// `(x, y, amplitude)` for every site, row-major.
    pub fn sites(&self) -> impl Iterator<Item = (i64, i64, &Spinor)> {
        let (w, (x0, y0)) = (self.width, self.offset);
        self.psi
            .iter()
            .enumerate()
            .map(move |(i, v)| (x0 + (i % w) as i64, y0 + (i / w) as i64, v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(spinor_norm_sqr).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for v in &mut self.psi {
                v[0] /= n;
                v[1] /= n;
            }
        }
    }

    /// Copy onto another window, dropping amplitude that falls outside it.
    pub fn resampled(&self, width: usize, height: usize, offset: (i64, i64)) -> FieldState {
        let mut out = FieldState::zeros(width, height, offset);
        for (x, y, v) in self.sites() {
            if let Some(i) = out.index(x, y) {
                out.psi[i] = *v;
            }
        }
        out
    }

    /// Sums every site onto the torus `width x height` anchored at `offset`.
    pub fn folded_periodic(&self, width: usize, height: usize, offset: (i64, i64)) -> FieldState {
        let mut out = FieldState::zeros(width, height, offset);
        for (x, y, v) in self.sites() {
            let cx = (x - offset.0).rem_euclid(width as i64) as usize;
            let cy = (y - offset.1).rem_euclid(height as i64) as usize;
            spinor_add_assign(&mut out.psi[cy * width + cx], v);
        }
        out
    }

    /// Largest spinor-component difference over the union of both windows.
    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        let mut worst = 0.0f64;
        for (x, y, v) in self.sites() {
            let w = other.get(x, y);
            worst = worst.max((v[0] - w[0]).norm()).max((v[1] - w[1]).norm());
        }
        for (x, y, w) in other.sites() {
            if !self.contains(x, y) {
                worst = worst.max(w[0].norm()).max(w[1].norm());
            }
        }
        worst
    }

    /// Nonzero amplitude on the outermost ring of the window, if any.
    fn edge_hit(&self) -> Option<(i64, i64)> {
        let (w, h) = (self.width, self.height);
        self.sites()
            .enumerate()
            .find(|(i, (_, _, v))| {
                let (cx, cy) = (i % w, i / w);
                let on_edge = cx == 0 || cy == 0 || cx + 1 == w || cy + 1 == h;
                on_edge && spinor_norm_sqr(v) != 0.0
            })
            .map(|(_, (x, y, _))| (x, y))
    }
}

/// Single-step matrices `A_h = A_ab / 2` in the fixed order R, L, U, D.
fn step_matrices(nu: Nu) -> [(Direction, Mat2); 4] {
    Direction::ALL.map(|d| {
        (
            d,
            coin_matrix(d.encode(), nu).scale(Complex64::new(0.5, 0.0)),
        )
    })
}

/// One application of the walk.
pub fn step(state: &FieldState, nu: Nu, boundary: Boundary) -> Result<FieldState> {
    if boundary == Boundary::Padded {
        if let Some((x, y)) = state.edge_hit() {
            return Err(Error::WindowTooSmall { x, y });
        }
    }
    let mats = step_matrices(nu);
    let (w, h) = (state.width as i64, state.height as i64);
    let mut out = FieldState::zeros(state.width, state.height, state.offset);
    if state.psi.is_empty() {
        return Ok(out);
    }
    out.psi
        .par_chunks_mut(state.width)
        .enumerate()
        .for_each(|(cy, row)| {
            for (cx, cell) in row.iter_mut().enumerate() {
                let mut acc = ZERO_SPINOR;
                for (dir, m) in &mats {
                    let (dx, dy) = dir.offset();
                    let (mut sx, mut sy) = (cx as i64 - dx, cy as i64 - dy);
                    match boundary {
                        Boundary::Periodic => {
                            sx = sx.rem_euclid(w);
                            sy = sy.rem_euclid(h);
                        }
                        Boundary::Padded => {
                            if sx < 0 || sy < 0 || sx >= w || sy >= h {
                                continue;
                            }
                        }
                    }
                    let src = &state.psi[sy as usize * state.width + sx as usize];
                    spinor_add_assign(&mut acc, &m.apply(src));
                }
                *cell = acc;
            }
        });
    Ok(out)
}

/// `t` applications of the walk.
pub fn evolve_direct(state: &FieldState, t: u32, nu: Nu, boundary: Boundary) -> Result<FieldState> {
    let mut s = state.clone();
    for _ in 0..t {
        s = step(&s, nu, boundary)?;
    }
    Ok(s)
}

/// Infinite-lattice evolution by convolution with the `t`-step kernel. The
/// output window grows by `t` on every side.
pub fn evolve_kernel(state: &FieldState, t: u32, nu: Nu) -> Result<FieldState> {
    let table = kernel_table(t)?;
    Ok(evolve_with_table(state, &table, nu))
}

/// As [`evolve_kernel`] with a precomputed table.
pub fn evolve_with_table(state: &FieldState, table: &KernelTable, nu: Nu) -> FieldState {
    let t = table.t as i64;
    let side = (2 * t + 1) as usize;
    // dense (dy, dx) grid of kernel matrices
    let mut grid = vec![Mat2::zero(); side * side];
    for (d, m) in table.matrices(nu) {
        grid[(d.dy + t) as usize * side + (d.dx + t) as usize] = m;
    }
    let out_w = state.width + 2 * t as usize;
    let out_h = state.height + 2 * t as usize;
    let out_offset = (state.offset.0 - t, state.offset.1 - t);
    let mut out = FieldState::zeros(out_w, out_h, out_offset);
    if out.psi.is_empty() || state.psi.is_empty() {
        return out;
    }
    let (in_w, in_h) = (state.width as i64, state.height as i64);
    out.psi
        .par_chunks_mut(out_w)
        .enumerate()
        .for_each(|(oy, row)| {
            // output row oy sits at input row coordinate oy - t
            let yo = oy as i64 - t;
            for (ox, cell) in row.iter_mut().enumerate() {
                let xo = ox as i64 - t;
                let mut acc = ZERO_SPINOR;
                let (ylo, yhi) = ((yo - t).max(0), (yo + t).min(in_h - 1));
                for yi in ylo..=yhi {
                    let dy = yo - yi;
                    let reach = t - dy.abs();
                    let (mut xlo, xhi) = ((xo - reach).max(0), (xo + reach).min(in_w - 1));
                    // only displacements with even t - |dx| - |dy| contribute
                    if (xo - xlo - reach).rem_euclid(2) != 0 {
                        xlo += 1;
                    }
                    let mut xi = xlo;
                    while xi <= xhi {
                        let dx = xo - xi;
                        let k = &grid[(dy + t) as usize * side + (dx + t) as usize];
                        let src = &state.psi[yi as usize * state.width + xi as usize];
                        spinor_add_assign(&mut acc, &k.apply(src));
                        xi += 2;
                    }
                }
                *cell = acc;
            }
        });
    out
}

/// Walk symbol at a wave vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumMatrix {
    pub k: (f64, f64),
    pub matrix: Mat2,
}

/// `Â(k) = Σ_h A_h e^{-i k·δ_h}`, consistent with [`step`].
pub fn momentum_matrix(k: (f64, f64), nu: Nu) -> MomentumMatrix {
    let mut m = Mat2::zero();
    for (dir, a) in step_matrices(nu) {
        let (dx, dy) = dir.offset();
        let phase = Complex64::from_polar(1.0, -(k.0 * dx as f64 + k.1 * dy as f64));
        m += a.scale(phase);
    }
    MomentumMatrix { k, matrix: m }
}

struct Fft2 {
    width: usize,
    height: usize,
    row: std::sync::Arc<dyn rustfft::Fft<f64>>,
    col: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Fft2 {
    fn new(width: usize, height: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (row, col) = if inverse {
            (
                planner.plan_fft_inverse(width),
                planner.plan_fft_inverse(height),
            )
        } else {
            (
                planner.plan_fft_forward(width),
                planner.plan_fft_forward(height),
            )
        };
        Fft2 {
            width,
            height,
            row,
            col,
        }
    }

    fn process(&self, data: &mut [Complex64]) {
        data.par_chunks_mut(self.width)
            .for_each(|r| self.row.process(r));
        let mut column = vec![Complex64::new(0.0, 0.0); self.height];
        for cx in 0..self.width {
            for (cy, c) in column.iter_mut().enumerate() {
                *c = data[cy * self.width + cx];
            }
            self.col.process(&mut column);
            for (cy, c) in column.iter().enumerate() {
                data[cy * self.width + cx] = *c;
            }
        }
    }
}

/// Periodic evolution in momentum space: forward 2D DFT of each component,
/// multiplication by `Â(k)^t`, inverse DFT. Any window size is accepted;
/// sizes that are not products of small primes fall back to slower
/// transforms.
pub fn evolve_fourier(state: &FieldState, t: u32, nu: Nu) -> Result<FieldState> {
    let (w, h) = (state.width, state.height);
    if w == 0 || h == 0 || t == 0 {
        return Ok(state.clone());
    }
    let forward = Fft2::new(w, h, false);
    let inverse = Fft2::new(w, h, true);
    let mut comps: [Vec<Complex64>; 2] = [0, 1].map(|c| state.psi.iter().map(|v| v[c]).collect());
    for c in &mut comps {
        forward.process(c);
    }
    let [c0, c1] = &mut comps;
    c0.par_chunks_mut(w)
        .zip(c1.par_chunks_mut(w))
        .enumerate()
        .for_each(|(ny, (r0, r1))| {
            let ky = 2.0 * PI * ny as f64 / h as f64;
            for nx in 0..w {
                let kx = 2.0 * PI * nx as f64 / w as f64;
                let m = momentum_matrix((kx, ky), nu).matrix.pow(u64::from(t));
                let v = m.apply(&[r0[nx], r1[nx]]);
                r0[nx] = v[0];
                r1[nx] = v[1];
            }
        });
    let norm = 1.0 / (w * h) as f64;
    for c in &mut comps {
        inverse.process(c);
    }
    let psi = comps[0]
        .iter()
        .zip(&comps[1])
        .map(|(a, b)| [a * norm, b * norm])
        .collect();
    FieldState::from_amplitudes(w, h, state.offset, psi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionSample {
    pub k: (f64, f64),
    /// `arccos((cos kx + cos ky) / 2)`.
    pub omega: f64,
    /// Positive eigenphase of `Â(k)` from its characteristic polynomial.
    pub eigenphase: f64,
}

/// `ω(k) = arccos((cos kx + cos ky)/2)`, argument clamped to `[-1, 1]`.
pub fn omega(k: (f64, f64)) -> f64 {
    ((k.0.cos() + k.1.cos()) / 2.0).clamp(-1.0, 1.0).acos()
}

/// The same branch through half angles, accurate near `k = 0`.
pub fn omega_half_angle(k: (f64, f64)) -> f64 {
    let s = ((k.0 / 2.0).sin().powi(2) + (k.1 / 2.0).sin().powi(2)) / 2.0;
    2.0 * s.sqrt().clamp(0.0, 1.0).asin()
}

/// Largest absolute eigenphase of `Â(k)`.
pub fn eigenphase(k: (f64, f64), nu: Nu) -> f64 {
    momentum_matrix(k, nu)
        .matrix
        .eigenvalues()
        .iter()
        .map(|l| l.arg().abs())
        .fold(0.0, f64::max)
}

pub fn dispersion(kgrid: &[(f64, f64)]) -> Vec<DispersionSample> {
    kgrid
        .iter()
        .map(|&k| DispersionSample {
            k,
            omega: omega(k),
            eigenphase: eigenphase(k, Nu::ONE),
        })
        .collect()
}

/// `n x n` points spanning `[-π, π]` in each direction, endpoints included.
pub fn k_grid(n: usize) -> Vec<(f64, f64)> {
    let coord = |i: usize| {
        if n <= 1 {
            0.0
        } else {
            -PI + 2.0 * PI * i as f64 / (n - 1) as f64
        }
    };
    (0..n)
        .flat_map(|iy| (0..n).map(move |ix| (coord(ix), coord(iy))))
        .collect()
}
