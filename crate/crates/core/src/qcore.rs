//! Small dense complex linear algebra and two-atom state bookkeeping.
//!
//! Every two-qubit operator in the crate uses the computational basis
//! ordered as
//!
//! ```text
//! index:  0     1     2     3
//! state: |ee>  |eg>  |ge>  |gg>
//! ```
//!
//! with the atom-1 letter first, i.e. `index = 2 * a1 + a2` where `e = 0`
//! and `g = 1`. Single-atom operators use the order `(|e>, |g>)`, so
//! `sigma_z = diag(1, -1)` and `sigma_+ = |e><g|`.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest matrix dimension handled by [`ComplexMatrix`].
pub const MAX_DIM: usize = 16;

/// Tolerance on `max |A - A^H|` for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on `|Tr rho - 1|`.
pub const TRACE_TOL: f64 = 1e-12;

/// Smallest eigenvalue a density matrix may have before it is rejected.
pub const PSD_TOL: f64 = -1e-10;

/// Tolerance on `<psi|psi> - 1` for sector states.
pub const NORM_TOL: f64 = 1e-12;

pub const EE: usize = 0;
pub const EG: usize = 1;
pub const GE: usize = 2;
pub const GG: usize = 3;

pub const BASIS_LABELS: [&str; 4] = ["ee", "eg", "ge", "gg"];

pub type Matrix4c = Matrix4<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pauli matrix `sigma_k` for `k` in 1..=3 (x, y, z); `k = 0` is the identity.
pub fn pauli(k: usize) -> Matrix2<Complex64> {
    let z = cr(0.0);
    let o = cr(1.0);
    let i = c(0.0, 1.0);
    match k {
        0 => Matrix2::new(o, z, z, o),
        1 => Matrix2::new(z, o, o, z),
        2 => Matrix2::new(z, -i, i, z),
        3 => Matrix2::new(o, z, z, -o),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// `a (x) b` for two single-qubit operators.
pub fn kron2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4c {
    Matrix4c::from_fn(|r, s| a[(r / 2, s / 2)] * b[(r % 2, s % 2)])
}

/// Dense complex matrix of dimension at most [`MAX_DIM`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows > MAX_DIM || cols > MAX_DIM || rows == 0 || cols == 0 {
            return Err(Error::Dimension { rows, cols });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, n, |r, s| if r == s { cr(diag[r]) } else { cr(0.0) })
    }

    pub fn from_matrix4(m: &Matrix4c) -> Self {
        Self { data: DMatrix::from_fn(4, 4, |r, s| m[(r, s)]) }
    }

    pub fn from_matrix2(m: &Matrix2<Complex64>) -> Self {
        Self { data: DMatrix::from_fn(2, 2, |r, s| m[(r, s)]) }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, r: usize, s: usize) -> Complex64 {
        self.data[(r, s)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Dimension { rows: other.rows(), cols: other.cols() });
        }
        Self::new(&self.data * &other.data)
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (r1, c1) = self.data.shape();
        let (r2, c2) = other.data.shape();
        Self::from_fn(r1 * r2, c1 * c2, |r, s| {
            self.data[(r / r2, s / c2)] * other.data[(r % r2, s % c2)]
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// `max |A - A^H|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for s in r..n {
                worst = worst.max((self.data[(r, s)] - self.data[(s, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < HERMITIAN_TOL
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Partial trace over the second factor of a `dim_a * dim_b` space.
    pub fn partial_trace_second(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if self.rows() != dim_a * dim_b || self.cols() != dim_a * dim_b {
            return Err(Error::Dimension { rows: self.rows(), cols: self.cols() });
        }
        Self::from_fn(dim_a, dim_a, |r, s| {
            (0..dim_b).map(|k| self.data[(r * dim_b + k, s * dim_b + k)]).sum()
        })
    }

    /// Copies a 4x4 matrix into a fixed-size one.
    pub fn to_matrix4(&self) -> Result<Matrix4c> {
        if self.data.shape() != (4, 4) {
            return Err(Error::Dimension { rows: self.rows(), cols: self.cols() });
        }
        Ok(Matrix4c::from_fn(|r, s| self.data[(r, s)]))
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors.data;
        let n = v.nrows();
        let d = DMatrix::from_fn(n, n, |r, s| if r == s { cr(self.values[r]) } else { cr(0.0) });
        ComplexMatrix { data: v * d * v.adjoint() }
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if !(defect < HERMITIAN_TOL) {
        return Err(Error::NotHermitian(defect));
    }
    let sym = (&m.data + m.data.adjoint()) * cr(0.5);
    let eig = sym.symmetric_eigen();
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, s| eig.eigenvectors[(r, order[s])]);
    Ok(HermitianEigen { values, vectors: ComplexMatrix::new(vectors)? })
}

/// Real eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

/// Eigen-decomposition of a 4x4 matrix that is Hermitian up to rounding.
/// The input is symmetrized first. Values descending, vectors as columns.
pub(crate) fn eigh4(m: &Matrix4c) -> ([f64; 4], Matrix4c) {
    let sym = (m + m.adjoint()) * cr(0.5);
    let eig = sym.symmetric_eigen();
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.map(|k| eig.eigenvalues[k]);
    let vectors = Matrix4c::from_fn(|r, s| eig.eigenvectors[(r, order[s])]);
    (values, vectors)
}

/// Two-atom density operator in the `|ee>, |eg>, |ge>, |gg>` basis.
///
/// Construction checks unit trace, hermiticity and positivity (up to
/// [`PSD_TOL`]); a failing matrix is reported, never repaired.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitDensity {
    m: Matrix4c,
}

impl TwoQubitDensity {
    pub fn new(m: Matrix4c) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm >= HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian, defect {herm:e}")));
        }
        let tr = m.trace();
        if (tr - cr(1.0)).norm() >= TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let (vals, _) = eigh4(&m);
        if vals[3] < PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {:e}", vals[3])));
        }
        Ok(Self { m })
    }

    pub fn from_complex_matrix(m: &ComplexMatrix) -> Result<Self> {
        Self::new(m.to_matrix4()?)
    }

    /// `|psi><psi|` for a normalized two-atom vector.
    pub fn from_pure(psi: &[Complex64; 4]) -> Result<Self> {
        let v = Vector4::from_column_slice(psi);
        Self::new(v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self { m: Matrix4c::identity() * cr(0.25) }
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.m
    }

    pub fn get(&self, r: usize, s: usize) -> Complex64 {
        self.m[(r, s)]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        eigh4(&self.m).0
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U rho U^H` for a two-atom unitary `u`.
    pub fn conjugated(&self, u: &Matrix4c) -> Result<Self> {
        let m = u * self.m * u.adjoint();
        Self::new((m + m.adjoint()) * cr(0.5))
    }

    /// Exchanges the roles of atom 1 and atom 2.
    pub fn swap_atoms(&self) -> Self {
        const P: [usize; 4] = [EE, GE, EG, GG];
        Self { m: Matrix4c::from_fn(|r, s| self.m[(P[r], P[s])]) }
    }

    /// `(1/2) || rho - sigma ||_1`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let (vals, _) = eigh4(&(self.m - other.m));
        0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// True when only the populations, the `ee/gg` coherence and the
    /// `eg/ge` coherence are non-zero (within `tol`).
    pub fn is_x_shaped(&self, tol: f64) -> bool {
        (0..4).all(|r| {
            (0..4).all(|s| r == s || r + s == 3 || self.m[(r, s)].norm() <= tol)
        })
    }
}

/// Total excitation number of a sector (atomic excitations plus photons).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    /// Basis `|eg,0>, |ge,0>, |gg,1>`.
    One,
    /// Basis `|ee,0>, |ge,1>, |eg,1>, |gg,2>`.
    Two,
}

impl Sector {
    pub fn from_excitations(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Sector::One),
            2 => Ok(Sector::Two),
            _ => Err(Error::UnsupportedSector(n)),
        }
    }

    pub fn excitations(self) -> u32 {
        match self {
            Sector::One => 1,
            Sector::Two => 2,
        }
    }

    pub fn dim(self) -> usize {
        self.basis().len()
    }

    /// `(two-atom basis index, photon number)` for each sector basis vector.
    pub fn basis(self) -> &'static [(usize, usize)] {
        match self {
            Sector::One => &[(EG, 0), (GE, 0), (GG, 1)],
            Sector::Two => &[(EE, 0), (GE, 1), (EG, 1), (GG, 2)],
        }
    }
}

/// Joint atoms-plus-field amplitudes within one excitation sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    sector: Sector,
    amps: Vec<Complex64>,
}

impl SectorState {
    /// Accepts any finite amplitude vector of the right length; the
    /// normalization is checked by consumers that require it.
    pub fn new(sector: Sector, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != sector.dim() {
            return Err(Error::InvalidParameter(format!(
                "sector n={} needs {} amplitudes, got {}",
                sector.excitations(),
                sector.dim(),
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { sector, amps })
    }

    /// The `k`-th sector basis vector.
    pub fn basis_state(sector: Sector, k: usize) -> Self {
        let mut amps = vec![cr(0.0); sector.dim()];
        amps[k] = cr(1.0);
        Self { sector, amps }
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    /// Probability of finding `k` photons in the cavity, for `k = 0..=2`.
    pub fn photon_distribution(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (&(_, n), z) in self.sector.basis().iter().zip(&self.amps) {
            p[n] += z.norm_sqr();
        }
        p
    }

    pub fn max_amplitude_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Embeds the state into `C^4 (x) C^(fock_dim)` (atoms first).
    pub fn to_full_vector(&self, fock_dim: usize) -> Result<Vec<Complex64>> {
        let mut v = vec![cr(0.0); 4 * fock_dim];
        for (&(a, n), z) in self.sector.basis().iter().zip(&self.amps) {
            if n >= fock_dim {
                return Err(Error::InvalidParameter(format!("fock cutoff {fock_dim} too small")));
            }
            v[a * fock_dim + n] = *z;
        }
        Ok(v)
    }
}

/// Reduced two-atom state obtained by tracing out the cavity field.
///
/// Amplitudes sharing a photon number stay coherent; different photon
/// numbers add incoherently.
pub fn partial_trace_field(s: &SectorState) -> Result<TwoQubitDensity> {
    let norm = s.norm_sqr();
    if (norm - 1.0).abs() >= NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let mut rho = Matrix4c::zeros();
    let basis = s.sector.basis();
    for (i, &(a, n)) in basis.iter().enumerate() {
        for (j, &(b, m)) in basis.iter().enumerate() {
            if n == m {
                rho[(a, b)] += s.amps[i] * s.amps[j].conj();
            }
        }
    }
    TwoQubitDensity::new(rho)
}

/// Random density matrix of the given rank (1..=4): `G G^H / Tr(G G^H)`
/// with `G` a 4 x rank matrix of independent complex Gaussians.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Result<TwoQubitDensity> {
    if !(1..=4).contains(&rank) {
        return Err(Error::InvalidParameter(format!("rank must lie in 1..=4, got {rank}")));
    }
    let g = DMatrix::<Complex64>::from_fn(4, rank, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let m = Matrix4c::from_fn(|r, s| w[(r, s)] / tr);
    // symmetrize away the rounding of the product
    TwoQubitDensity::new((m + m.adjoint()) * cr(0.5))
}

/// Haar-random single-qubit unitary from the QR decomposition of a complex
/// Gaussian matrix, with the phases of `R` divided out.
pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<Complex64> {
    let g = Matrix2::<Complex64>::from_fn(|_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..2 {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        for i in 0..2 {
            u[(i, k)] *= phase;
        }
    }
    u
}

/// Random local unitary `U_1 (x) U_2`.
pub fn random_local_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix4c {
    kron2(&random_unitary2(rng), &random_unitary2(rng))
}
