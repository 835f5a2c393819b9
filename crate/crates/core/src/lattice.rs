//! First-quantized layer: the free Dirac operator on a periodic 1+1D lattice,
//! its plane-wave eigenmodes, and the derivative stencils used for gauge
//! profiles and current divergences.
//!
//! Single-particle vectors live in `site ⊗ spinor` ordering, so component
//! `(j, s)` sits at index `2 * j + s`. The 1+1D reduction uses `σx` in the role
//! of α and `σz` in the role of β. Lattice integrals are `a · Σ_j`, with
//! `a = L / N`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{fix_phase, hermitian_deviation, kron, sigma_x, sigma_z, CMat, CVec, C64, I, ONE, ZERO};

/// Eigenvalues closer to zero than this count as zero modes.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Fourier-exact momentum operator; exact dispersion, no doublers.
    #[default]
    Spectral,
    /// Nearest-neighbour central-difference hopping with link phases.
    GaugedHopping,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Spectral => f.write_str("spectral"),
            Scheme::GaugedHopping => f.write_str("gauged_hopping"),
        }
    }
}

impl FromStr for Scheme {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Scheme::Spectral),
            "gauged_hopping" | "hopping" => Ok(Scheme::GaugedHopping),
            other => Err(LabError::InvalidLattice(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub box_length: f64,
    pub mass: f64,
    pub charge: f64,
    #[serde(default)]
    pub scheme: Scheme,
}

impl LatticeConfig {
    pub fn new(n_sites: usize, box_length: f64, mass: f64, charge: f64, scheme: Scheme) -> Result<Self> {
        let config = LatticeConfig {
            n_sites,
            box_length,
            mass,
            charge,
            scheme,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 || self.n_sites % 2 != 0 {
            return Err(LabError::InvalidLattice(format!(
                "n_sites must be a positive even integer, got {}",
                self.n_sites
            )));
        }
        if !(self.box_length > 0.0) || !self.box_length.is_finite() {
            return Err(LabError::InvalidLattice(format!(
                "box_length must be positive, got {}",
                self.box_length
            )));
        }
        if !(self.mass >= 0.0) || !self.mass.is_finite() {
            return Err(LabError::InvalidLattice(format!("mass must be non-negative, got {}", self.mass)));
        }
        if !self.charge.is_finite() {
            return Err(LabError::InvalidLattice("charge must be finite".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n_sites as f64
    }

    /// Single-particle dimension `2N`.
    pub fn dim(&self) -> usize {
        2 * self.n_sites
    }

    pub fn positions(&self) -> Vec<f64> {
        let a = self.spacing();
        (0..self.n_sites).map(|j| j as f64 * a).collect()
    }

    /// Integer wavenumbers in FFT order: `0, 1, …, N/2 - 1, -N/2, …, -1`.
    pub fn wavenumbers(&self) -> Vec<i64> {
        let n = self.n_sites as i64;
        (0..n).map(|i| if i < n / 2 { i } else { i - n }).collect()
    }

    pub fn momentum(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.box_length
    }

    /// Lattice gradient matching the discretization scheme.
    pub fn gradient(&self, f: &[f64]) -> Result<Vec<f64>> {
        match self.scheme {
            Scheme::Spectral => spectral_gradient_real(f, self.box_length),
            Scheme::GaugedHopping => central_difference_gradient(f, self.spacing()),
        }
    }

    /// `a · Σ_j f_j g_j`.
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        self.spacing() * f.iter().zip(g).map(|(x, y)| x * y).sum::<f64>()
    }
}

/// A `2N × 2N` first-quantized operator in `site ⊗ spinor` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleOperator {
    pub matrix: CMat,
}

impl SingleParticleOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 2 != 0 {
            return Err(LabError::Shape(format!(
                "single-particle operator must be square with even dimension, got {:?}",
                matrix.shape()
            )));
        }
        Ok(SingleParticleOperator { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        SingleParticleOperator {
            matrix: CMat::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.matrix * v
    }

    /// α-role matrix acting on every site, `1_N ⊗ σx`.
    pub fn alpha(n_sites: usize) -> Self {
        SingleParticleOperator {
            matrix: kron(&CMat::identity(n_sites, n_sites), &sigma_x()),
        }
    }

    /// Diagonal site multiplication `diag(f) ⊗ 1_2`.
    pub fn site_diagonal(f: &[C64]) -> Self {
        let n = f.len();
        let mut m = CMat::zeros(2 * n, 2 * n);
        for (j, &v) in f.iter().enumerate() {
            m[(2 * j, 2 * j)] = v;
            m[(2 * j + 1, 2 * j + 1)] = v;
        }
        SingleParticleOperator { matrix: m }
    }

    /// `diag(f) ⊗ σx`.
    pub fn site_diagonal_alpha(f: &[f64]) -> Self {
        let n = f.len();
        let mut m = CMat::zeros(2 * n, 2 * n);
        for (j, &v) in f.iter().enumerate() {
            m[(2 * j, 2 * j + 1)] = C64::new(v, 0.0);
            m[(2 * j + 1, 2 * j)] = C64::new(v, 0.0);
        }
        SingleParticleOperator { matrix: m }
    }
}

fn momentum_matrix(config: &LatticeConfig) -> CMat {
    let n = config.n_sites;
    let a = config.spacing();
    let mut p = CMat::zeros(n, n);
    match config.scheme {
        Scheme::Spectral => {
            let x = config.positions();
            for j in 0..n {
                for l in 0..n {
                    let mut acc = ZERO;
                    for k in config.wavenumbers() {
                        let pk = config.momentum(k);
                        acc += C64::from_polar(pk, pk * (x[j] - x[l]));
                    }
                    p[(j, l)] = acc / n as f64;
                }
            }
        }
        Scheme::GaugedHopping => {
            let hop = -I / (2.0 * a);
            for j in 0..n {
                let next = (j + 1) % n;
                p[(j, next)] += hop;
                p[(next, j)] += hop.conj();
            }
        }
    }
    p
}

/// Free Dirac operator `α p̂ + β m`.
pub fn build_free_hamiltonian(config: &LatticeConfig) -> Result<SingleParticleOperator> {
    config.validate()?;
    let n = config.n_sites;
    let p = momentum_matrix(config);
    let mass = kron(&CMat::identity(n, n), &(sigma_z() * C64::new(config.mass, 0.0)));
    let h = kron(&p, &sigma_x()) + mass;
    SingleParticleOperator::new(h)
}

/// Classical potential sampled on the lattice at one instant.
///
/// `scalar` is the on-site `A₀`. `vector` is site-sampled `A` for the
/// spectral scheme and link-sampled (`j → j+1`) for the hopping scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub scalar: Vec<f64>,
    pub vector: Vec<f64>,
}

impl Potential {
    pub fn zero(n_sites: usize) -> Self {
        Potential {
            scalar: vec![0.0; n_sites],
            vector: vec![0.0; n_sites],
        }
    }

    /// Accepts complex samples only if every imaginary part vanishes.
    pub fn from_complex(scalar: &[C64], vector: &[C64]) -> Result<Self> {
        let check = |name: &str, v: &[C64]| -> Result<Vec<f64>> {
            v.iter()
                .enumerate()
                .map(|(j, z)| {
                    if z.im.abs() > 1e-14 * (1.0 + z.re.abs()) {
                        Err(LabError::ComplexPotential(format!("{name}[{j}] = {z}")))
                    } else {
                        Ok(z.re)
                    }
                })
                .collect()
        };
        Ok(Potential {
            scalar: check("A0", scalar)?,
            vector: check("A", vector)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.iter().chain(&self.vector).all(|&v| v == 0.0)
    }
}

/// `A = -∇χ` for a gauge function `χ`: site-sampled spectral gradient, or the
/// link difference `-(χ_{j+1} - χ_j) / a` in the hopping scheme.
pub fn pure_gauge_vector_potential(config: &LatticeConfig, chi: &[f64]) -> Result<Vec<f64>> {
    check_samples(chi.len())?;
    match config.scheme {
        Scheme::Spectral => Ok(spectral_gradient_real(chi, config.box_length)?.into_iter().map(|v| -v).collect()),
        Scheme::GaugedHopping => {
            let n = chi.len();
            let a = config.spacing();
            Ok((0..n).map(|j| -(chi[(j + 1) % n] - chi[j]) / a).collect())
        }
    }
}

/// Single-particle kernel `H = H₀ - qα·A + qA₀`.
///
/// In the hopping scheme `A` enters through link phases `exp(-i q a A)`, so a
/// pure-gauge potential yields exactly `D H₀ D† + q ∂χ/∂t`.
pub fn coupled_hamiltonian(
    config: &LatticeConfig,
    h0: &SingleParticleOperator,
    potential: &Potential,
) -> Result<SingleParticleOperator> {
    let n = config.n_sites;
    if potential.scalar.len() != n || potential.vector.len() != n {
        return Err(LabError::Shape(format!(
            "potential has {} / {} samples for {} sites",
            potential.scalar.len(),
            potential.vector.len(),
            n
        )));
    }
    let q = config.charge;
    let scalar: Vec<C64> = potential.scalar.iter().map(|&v| C64::new(q * v, 0.0)).collect();
    let mut h = match config.scheme {
        Scheme::Spectral => {
            let coupling: Vec<f64> = potential.vector.iter().map(|&v| -q * v).collect();
            &h0.matrix + SingleParticleOperator::site_diagonal_alpha(&coupling).matrix
        }
        Scheme::GaugedHopping => {
            let a = config.spacing();
            let hop = -I / (2.0 * a);
            let mut p = CMat::zeros(n, n);
            for j in 0..n {
                let next = (j + 1) % n;
                let t = hop * C64::from_polar(1.0, -q * a * potential.vector[j]);
                p[(j, next)] += t;
                p[(next, j)] += t.conj();
            }
            let mass = kron(&CMat::identity(n, n), &(sigma_z() * C64::new(config.mass, 0.0)));
            kron(&p, &sigma_x()) + mass
        }
    };
    h += SingleParticleOperator::site_diagonal(&scalar).matrix;
    SingleParticleOperator::new(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    pub fn value(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Signed index: `n > 0` positive energy, `n < 0` negative energy.
    pub index: i64,
    pub energy: f64,
    pub sign: EnergySign,
    pub wavenumber: i64,
    pub momentum: f64,
    /// Constant spinor `u_n`, unit norm.
    pub spinor: [C64; 2],
    /// `φ_n(x_j, s)` normalized so that `a Σ |φ|² = 1`.
    pub wave: CVec,
}

impl Mode {
    pub fn signed_energy(&self) -> f64 {
        self.sign.value() * self.energy
    }
}

/// Plane-wave eigenmodes of `H₀`: positive modes `n = 1..N` first, then
/// negative modes `n = -1..-N`. Mode `|n|` carries wavenumber
/// `config.wavenumbers()[|n| - 1]`.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub modes: Vec<Mode>,
    pub spacing: f64,
    pub n_sites: usize,
}

impl ModeBasis {
    pub fn positive(&self) -> &[Mode] {
        &self.modes[..self.n_sites]
    }

    pub fn negative(&self) -> &[Mode] {
        &self.modes[self.n_sites..]
    }

    pub fn mode(&self, index: i64) -> Option<&Mode> {
        let n = self.n_sites as i64;
        match index {
            i if i >= 1 && i <= n => Some(&self.modes[(i - 1) as usize]),
            i if i <= -1 && i >= -n => Some(&self.modes[(n - 1 - i) as usize]),
            _ => None,
        }
    }

    /// Lattice inner product `a Σ φ_m† φ_n`.
    pub fn inner(&self, m: &Mode, n: &Mode) -> C64 {
        m.wave.dotc(&n.wave) * self.spacing
    }

    /// Unitary whose columns are `√a φ_p` in mode order.
    pub fn unitary(&self) -> CMat {
        let dim = 2 * self.n_sites;
        let mut v = CMat::zeros(dim, dim);
        let scale = self.spacing.sqrt();
        for (p, mode) in self.modes.iter().enumerate() {
            v.set_column(p, &(&mode.wave * C64::new(scale, 0.0)));
        }
        v
    }

    pub fn signed_energies(&self) -> Vec<f64> {
        self.modes.iter().map(Mode::signed_energy).collect()
    }

    /// `E_vac = Σ_{n>0} E_n`.
    pub fn vacuum_energy(&self) -> f64 {
        self.positive().iter().map(|m| m.energy).sum()
    }

    /// `‖Σ λE φφ† a − H₀‖` through the unitary.
    pub fn reconstruction_error(&self, h0: &SingleParticleOperator) -> f64 {
        let v = self.unitary();
        let d = CMat::from_diagonal(&CVec::from_iterator(
            v.ncols(),
            self.signed_energies().into_iter().map(|e| C64::new(e, 0.0)),
        ));
        crate::linalg::max_abs(&(&v * d * v.adjoint() - &h0.matrix))
    }
}

fn plane_wave(config: &LatticeConfig, k: i64) -> Vec<C64> {
    let p = config.momentum(k);
    let norm = 1.0 / (config.n_sites as f64).sqrt();
    config.positions().iter().map(|&x| C64::from_polar(norm, p * x)).collect()
}

/// Diagonalizes `h0` sector by sector in momentum. Each `2 × 2` block is
/// traceless Hermitian, `[[c, b], [b*, -c]]`, with eigenvalues `±√(c² + |b|²)`.
pub fn mode_basis(h0: &SingleParticleOperator, config: &LatticeConfig) -> Result<ModeBasis> {
    config.validate()?;
    let n = config.n_sites;
    if h0.dim() != 2 * n {
        return Err(LabError::Shape(format!("H0 has dimension {}, expected {}", h0.dim(), 2 * n)));
    }
    let dev = h0.hermitian_deviation();
    if dev > 1e-12 {
        return Err(LabError::NotHermitian(dev));
    }
    let a = config.spacing();
    let scale = C64::new(1.0 / a.sqrt(), 0.0);
    let mut positive = Vec::with_capacity(n);
    let mut negative = Vec::with_capacity(n);

    for (i, k) in config.wavenumbers().into_iter().enumerate() {
        let w = plane_wave(config, k);
        let embed = |s: usize| -> CVec {
            let mut v = CVec::zeros(2 * n);
            for (j, &wj) in w.iter().enumerate() {
                v[2 * j + s] = wj;
            }
            v
        };
        let basis = [embed(0), embed(1)];
        let mut block = [[ZERO; 2]; 2];
        for s in 0..2 {
            let hv = h0.apply(&basis[s]);
            for r in 0..2 {
                block[r][s] = basis[r].dotc(&hv);
            }
        }
        let c = 0.5 * (block[0][0].re - block[1][1].re);
        let shift = 0.5 * (block[0][0].re + block[1][1].re);
        if shift.abs() > 1e-10 {
            return Err(LabError::Spectrum(format!(
                "momentum block k={k} has trace {:.3e}; spectrum is not ± symmetric",
                2.0 * shift
            )));
        }
        let b = 0.5 * (block[0][1] + block[1][0].conj());
        let e = (c * c + b.norm_sqr()).sqrt();

        let (mut up, mut down) = if e < DEGENERACY_TOL {
            if config.mass > 0.0 {
                return Err(LabError::Spectrum(format!(
                    "zero mode at k={k} although mass = {}",
                    config.mass
                )));
            }
            // β eigenvectors resolve the degenerate zero mode.
            ([ONE, ZERO], [ZERO, ONE])
        } else if c >= 0.0 {
            let norm = (2.0 * e * (e + c)).sqrt();
            (
                [C64::new((e + c) / norm, 0.0), b.conj() / norm],
                [-b / norm, C64::new((e + c) / norm, 0.0)],
            )
        } else {
            let norm = (2.0 * e * (e - c)).sqrt();
            (
                [b / norm, C64::new((e - c) / norm, 0.0)],
                [C64::new((e - c) / norm, 0.0), -b.conj() / norm],
            )
        };
        fix_phase(&mut up);
        fix_phase(&mut down);

        let p = config.momentum(k);
        for (spinor, sign, out) in [
            (up, EnergySign::Positive, &mut positive),
            (down, EnergySign::Negative, &mut negative),
        ] {
            let unit = &basis[0] * spinor[0] + &basis[1] * spinor[1];
            let residual = (h0.apply(&unit) - &unit * C64::new(sign.value() * e, 0.0)).camax();
            if residual > 1e-10 {
                return Err(LabError::Spectrum(format!(
                    "plane wave k={k} is not an eigenvector of H0 (residual {residual:.3e})"
                )));
            }
            let index = (i + 1) as i64;
            out.push(Mode {
                index: if sign == EnergySign::Positive { index } else { -index },
                energy: e,
                sign,
                wavenumber: k,
                momentum: p,
                spinor,
                wave: unit * scale,
            });
        }
    }
    positive.extend(negative);
    Ok(ModeBasis {
        modes: positive,
        spacing: a,
        n_sites: n,
    })
}

fn fft_multiply(field: &[C64], multiplier: impl Fn(usize) -> C64) -> Vec<C64> {
    let n = field.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = field.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (i, z) in buf.iter_mut().enumerate() {
        *z *= multiplier(i);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    buf
}

fn check_samples(len: usize) -> Result<()> {
    if len == 0 || len % 2 != 0 {
        return Err(LabError::Shape(format!(
            "lattice function needs an even, non-zero number of samples, got {len}"
        )));
    }
    Ok(())
}

/// Fourier-grid derivative on a periodic box of length `box_length`.
/// The Nyquist component is dropped so real input stays real.
pub fn spectral_gradient(field: &[C64], box_length: f64) -> Result<Vec<C64>> {
    check_samples(field.len())?;
    let n = field.len();
    Ok(fft_multiply(field, |i| {
        if i == n / 2 {
            ZERO
        } else {
            let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            I * (2.0 * PI * k / box_length)
        }
    }))
}

pub fn spectral_gradient_real(field: &[f64], box_length: f64) -> Result<Vec<f64>> {
    let z: Vec<C64> = field.iter().map(|&v| C64::new(v, 0.0)).collect();
    Ok(spectral_gradient(&z, box_length)?.into_iter().map(|z| z.re).collect())
}

/// Fourier-grid second derivative, `-p²` on every mode including Nyquist.
pub fn spectral_laplacian(field: &[C64], box_length: f64) -> Result<Vec<C64>> {
    check_samples(field.len())?;
    let n = field.len();
    Ok(fft_multiply(field, |i| {
        let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
        let p = 2.0 * PI * k / box_length;
        C64::new(-p * p, 0.0)
    }))
}

/// `(f_{j+1} - f_{j-1}) / 2a`, periodic.
pub fn central_difference_gradient(field: &[f64], spacing: f64) -> Result<Vec<f64>> {
    check_samples(field.len())?;
    let n = field.len();
    Ok((0..n)
        .map(|j| (field[(j + 1) % n] - field[(j + n - 1) % n]) / (2.0 * spacing))
        .collect())
}

/// Largest Fourier amplitude with `|k| > max_wavenumber`, relative to the
/// largest amplitude overall.
pub fn out_of_band_fraction(field: &[f64], max_wavenumber: f64) -> f64 {
    let n = field.len();
    if n == 0 {
        return 0.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<C64> = field.iter().map(|&v| C64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let total = buf.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if total == 0.0 {
        return 0.0;
    }
    let outside = buf
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let k = if *i <= n / 2 { *i as f64 } else { *i as f64 - n as f64 };
            k.abs() > max_wavenumber
        })
        .fold(0.0f64, |m, (_, z)| m.max(z.norm()));
    outside / total
}
