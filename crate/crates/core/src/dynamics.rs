//! Resonant two-atom/one-mode dynamics.
//!
//! On resonance the free-evolution terms commute with the excitation
//! number and only add local phases, so we work in the interaction
//! picture where
//!
//! ```text
//! H = lambda_1 (a^+ s1_- + a s1_+) + lambda_2 (a^+ s2_- + a s2_+)
//! ```
//!
//! Energies are measured in units of `lambda_1`, so the coupling ratio
//! `chi = lambda_2 / lambda_1` is the only parameter. Time enters through
//! the dimensionless phase `u = lambda_1 * int theta dt`; the pulse area
//! used by the closed form is `Theta = u * sqrt(1 + chi^2)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{self, cr, partial_trace_field, Matrix4c, Sector, SectorState, TwoQubitDensity};

/// Coupling ratio and pulse area of one evaluation point.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CouplingConfig {
    chi: f64,
    theta: f64,
}

impl CouplingConfig {
    pub fn new(chi: f64, theta: f64) -> Result<Self> {
        if !chi.is_finite() || chi < 0.0 {
            return Err(Error::InvalidParameter(format!("coupling ratio must be finite and >= 0, got {chi}")));
        }
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::InvalidParameter(format!("pulse area must be finite and >= 0, got {theta}")));
        }
        Ok(Self { chi, theta })
    }

    /// Config reaching evolution phase `u` (in units of `1/lambda_1`).
    pub fn from_phase(chi: f64, u: f64) -> Result<Self> {
        Self::new(chi, u * (1.0 + chi * chi).sqrt())
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `u = Theta / sqrt(1 + chi^2)`.
    pub fn phase(&self) -> f64 {
        self.theta / (1.0 + self.chi * self.chi).sqrt()
    }
}

/// Initial atomic configuration, field always in vacuum.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum InitialState {
    /// Atom 1 excited.
    Eg,
    /// Atom 2 excited.
    Ge,
    /// Both atoms excited.
    Ee,
}

impl InitialState {
    pub fn sector(self) -> Sector {
        match self {
            InitialState::Eg | InitialState::Ge => Sector::One,
            InitialState::Ee => Sector::Two,
        }
    }

    pub fn sector_state(self) -> SectorState {
        match self {
            InitialState::Eg => SectorState::basis_state(Sector::One, 0),
            InitialState::Ge => SectorState::basis_state(Sector::One, 1),
            InitialState::Ee => SectorState::basis_state(Sector::Two, 0),
        }
    }
}

/// Closed-form reduced state for the single-excitation start `|eg>|0>`.
pub fn reduced_state_closed_form(cfg: &CouplingConfig) -> Result<TwoQubitDensity> {
    reduced_state_closed_form_for(cfg, InitialState::Eg)
}

/// Closed-form reduced state for `|eg>|0>` or `|ge>|0>`.
///
/// `|ge>` is the `|eg>` problem with the atoms relabelled, i.e. with the
/// couplings exchanged (`chi -> 1/chi` up to the overall energy scale,
/// which `Theta` already absorbs).
pub fn reduced_state_closed_form_for(cfg: &CouplingConfig, initial: InitialState) -> Result<TwoQubitDensity> {
    match initial {
        InitialState::Eg => closed_form_lambdas(1.0, cfg.chi, cfg.theta),
        InitialState::Ge => Ok(closed_form_lambdas(cfg.chi, 1.0, cfg.theta)?.swap_atoms()),
        InitialState::Ee => Err(Error::InvalidParameter(
            "no closed form for the two-excitation sector".into(),
        )),
    }
}

fn closed_form_lambdas(l1: f64, l2: f64, theta: f64) -> Result<TwoQubitDensity> {
    use qcore::{EG, GE, GG};
    let lam2 = l1 * l1 + l2 * l2;
    let lam = lam2.sqrt();
    let mut b1 = [0.0; 4];
    b1[GE] = l1 / lam;
    b1[EG] = -l2 / lam;
    let mut b2 = [0.0; 4];
    b2[EG] = l1 / lam;
    b2[GE] = l2 / lam;

    let (cos1, cos2) = (theta.cos(), (2.0 * theta).cos());
    let w_gg = l1 * l1 / (2.0 * lam2) * (1.0 - cos2);
    let w_b2 = l1 * l1 / (2.0 * lam2) * (1.0 + cos2);
    let w_b1 = l2 * l2 / lam2;
    let w_x = -l1 * l2 / lam2 * cos1;

    let mut m = Matrix4c::zeros();
    m[(GG, GG)] = cr(w_gg);
    for r in 0..4 {
        for s in 0..4 {
            m[(r, s)] += cr(w_b2 * b2[r] * b2[s] + w_b1 * b1[r] * b1[s] + w_x * (b1[r] * b2[s] + b2[r] * b1[s]));
        }
    }
    TwoQubitDensity::new(m)
}

/// Interaction-picture Hamiltonian restricted to one excitation sector,
/// in units of `lambda_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorHamiltonian {
    sector: Sector,
    chi: f64,
    matrix: DMatrix<f64>,
}

impl SectorHamiltonian {
    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn spectral_radius(&self) -> f64 {
        self.matrix.clone().symmetric_eigen().eigenvalues.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub fn build_sector_hamiltonian(n: u32, chi: f64) -> Result<SectorHamiltonian> {
    let sector = Sector::from_excitations(n)?;
    if !chi.is_finite() || chi < 0.0 {
        return Err(Error::InvalidParameter(format!("coupling ratio must be finite and >= 0, got {chi}")));
    }
    let couplings: Vec<(usize, usize, f64)> = match sector {
        // |eg,0>, |ge,0>, |gg,1>
        Sector::One => vec![(0, 2, 1.0), (1, 2, chi)],
        // |ee,0>, |ge,1>, |eg,1>, |gg,2>
        Sector::Two => vec![
            (0, 1, 1.0),
            (0, 2, chi),
            (1, 3, std::f64::consts::SQRT_2 * chi),
            (2, 3, std::f64::consts::SQRT_2),
        ],
    };
    let d = sector.dim();
    let mut matrix = DMatrix::zeros(d, d);
    for (i, j, w) in couplings {
        matrix[(i, j)] = w;
        matrix[(j, i)] = w;
    }
    Ok(SectorHamiltonian { sector, chi, matrix })
}

/// Cached spectral decomposition of a sector Hamiltonian for repeated
/// evaluation of `exp(-i u H)`.
#[derive(Clone, Debug)]
pub struct Propagator {
    sector: Sector,
    energies: DVector<f64>,
    modes: DMatrix<f64>,
}

impl Propagator {
    pub fn new(h: &SectorHamiltonian) -> Self {
        let eig = h.matrix.clone().symmetric_eigen();
        Self { sector: h.sector, energies: eig.eigenvalues, modes: eig.eigenvectors }
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn evolve(&self, initial: &SectorState, u: f64) -> Result<SectorState> {
        if initial.sector() != self.sector {
            return Err(Error::SectorMismatch {
                hamiltonian: self.sector.excitations(),
                state: initial.sector().excitations(),
            });
        }
        if !u.is_finite() || u < 0.0 {
            return Err(Error::InvalidParameter(format!("evolution phase must be finite and >= 0, got {u}")));
        }
        let d = self.sector.dim();
        let psi = initial.amplitudes();
        let mut out = vec![cr(0.0); d];
        for k in 0..d {
            let overlap: Complex64 = (0..d).map(|j| psi[j] * self.modes[(j, k)]).sum();
            let coeff = overlap * Complex64::from_polar(1.0, -u * self.energies[k]);
            for (i, o) in out.iter_mut().enumerate() {
                *o += coeff * self.modes[(i, k)];
            }
        }
        SectorState::new(self.sector, out)
    }
}

/// `exp(-i u H) |initial>`.
pub fn propagate_sector(h: &SectorHamiltonian, initial: &SectorState, u: f64) -> Result<SectorState> {
    Propagator::new(h).evolve(initial, u)
}

/// Reduced two-atom state after evolving `initial` for phase `u`.
pub fn reduced_state(chi: f64, initial: InitialState, u: f64) -> Result<TwoQubitDensity> {
    let h = build_sector_hamiltonian(initial.sector().excitations(), chi)?;
    partial_trace_field(&propagate_sector(&h, &initial.sector_state(), u)?)
}

/// Step count used by [`ode_oracle`] when none is given: 20000 steps per
/// `2 pi` of accumulated phase `u * max|E|`, never fewer than 1000.
pub fn default_oracle_steps(cfg: &CouplingConfig, n: u32) -> Result<usize> {
    let h = build_sector_hamiltonian(n, cfg.chi)?;
    let phase = cfg.phase() * h.spectral_radius();
    Ok(((20000.0 * phase / std::f64::consts::TAU).ceil() as usize).max(1000))
}

/// Fixed-step RK4 integration of `i d psi/du = H psi`, independent of the
/// spectral propagator.
pub fn ode_oracle(cfg: &CouplingConfig, initial: InitialState, steps: usize) -> Result<SectorState> {
    if steps < 1000 {
        return Err(Error::InvalidParameter(format!("oracle needs at least 1000 steps, got {steps}")));
    }
    let h = build_sector_hamiltonian(initial.sector().excitations(), cfg.chi)?;
    let m = h.matrix();
    let d = m.nrows();
    let dt = cfg.phase() / steps as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let deriv = |psi: &[Complex64]| -> Vec<Complex64> {
        (0..d).map(|r| minus_i * (0..d).map(|s| psi[s] * m[(r, s)]).sum::<Complex64>()).collect()
    };
    let axpy = |psi: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
        psi.iter().zip(k).map(|(p, q)| p + q * a).collect()
    };

    let mut psi = initial.sector_state().amplitudes().to_vec();
    for _ in 0..steps {
        let k1 = deriv(&psi);
        let k2 = deriv(&axpy(&psi, &k1, dt / 2.0));
        let k3 = deriv(&axpy(&psi, &k2, dt / 2.0));
        let k4 = deriv(&axpy(&psi, &k3, dt));
        for i in 0..d {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    SectorState::new(initial.sector(), psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{EE, EG, GE, GG};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

    #[test]
    fn no_evolution_at_zero_theta() {
        for chi in [0.0, 0.3, 1.0, 7.0] {
            let rho = reduced_state_closed_form(&CouplingConfig::new(chi, 0.0).unwrap()).unwrap();
            assert_abs_diff_eq!(rho.get(EG, EG).re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn symmetric_quarter_period() {
        let rho = reduced_state_closed_form(&CouplingConfig::new(1.0, FRAC_PI_2).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = Matrix4c::zeros();
        m[(GG, GG)] = cr(0.5);
        let b1 = [0.0, -h, h, 0.0];
        for r in 0..4 {
            for s in 0..4 {
                m[(r, s)] += cr(0.5 * b1[r] * b1[s]);
            }
        }
        let expected = TwoQubitDensity::new(m).unwrap();
        assert!(rho.trace_distance(&expected) < 1e-15);
    }

    #[test]
    fn populations_sum_to_one() {
        for chi in [0.0, 0.2, 1.0, 3.3, 40.0] {
            for k in 0..50 {
                let theta = TAU * k as f64 / 49.0;
                let l2 = 1.0 + chi * chi;
                let p = theta.sin().powi(2) / l2 + theta.cos().powi(2) / l2 + chi * chi / l2;
                assert_abs_diff_eq!(p, 1.0, epsilon = 1e-14);
                let rho = reduced_state_closed_form(&CouplingConfig::new(chi, theta).unwrap()).unwrap();
                assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dark_state_population_is_conserved() {
        for chi in [0.1f64, 0.9, 2.5] {
            let lam = (1.0 + chi * chi).sqrt();
            let b1 = [0.0, -chi / lam, 1.0 / lam, 0.0];
            for k in 0..40 {
                let rho = reduced_state_closed_form(&CouplingConfig::new(chi, 0.17 * k as f64).unwrap()).unwrap();
                let pop: f64 = (0..4)
                    .flat_map(|r| (0..4).map(move |s| (r, s)))
                    .map(|(r, s)| b1[r] * rho.get(r, s).re * b1[s])
                    .sum();
                assert_abs_diff_eq!(pop, chi * chi / (1.0 + chi * chi), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn periodic_in_theta() {
        for chi in [0.3, 1.0, 4.0] {
            for theta in [0.0, 0.7, 2.9, 5.1] {
                let a = reduced_state_closed_form(&CouplingConfig::new(chi, theta).unwrap()).unwrap();
                let b = reduced_state_closed_form(&CouplingConfig::new(chi, theta + TAU).unwrap()).unwrap();
                assert!(a.trace_distance(&b) < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_couplings() {
        let h = build_sector_hamiltonian(1, 0.0).unwrap();
        assert_eq!(h.matrix()[(0, 2)], 1.0);
        assert_eq!(h.matrix()[(1, 2)], 0.0);
        let h = build_sector_hamiltonian(1, 1.0).unwrap();
        assert_eq!(h.matrix(), &h.matrix().transpose());
        assert_eq!(h.matrix()[(0, 2)], 1.0);
        assert_eq!(h.matrix()[(1, 2)], 1.0);
        let h = build_sector_hamiltonian(2, 0.18).unwrap();
        let m = h.matrix();
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(0, 2)], 0.18);
        assert_abs_diff_eq!(m[(1, 3)], SQRT_2 * 0.18);
        assert_abs_diff_eq!(m[(2, 3)], SQRT_2);
        for i in 0..4 {
            assert_eq!(m[(i, i)], 0.0);
        }
        assert!(matches!(build_sector_hamiltonian(3, 1.0), Err(Error::UnsupportedSector(3))));
    }

    #[test]
    fn zero_phase_is_identity() {
        let h = build_sector_hamiltonian(2, 0.7).unwrap();
        let s = InitialState::Ee.sector_state();
        assert!(propagate_sector(&h, &s, 0.0).unwrap().max_amplitude_diff(&s) < 1e-15);
    }

    #[test]
    fn sector_mismatch_rejected() {
        let h = build_sector_hamiltonian(1, 0.7).unwrap();
        let s = InitialState::Ee.sector_state();
        assert!(matches!(propagate_sector(&h, &s, 1.0), Err(Error::SectorMismatch { .. })));
    }

    #[test]
    fn propagation_matches_closed_form_at_pi() {
        for chi in [0.0, SQRT_2 - 1.0, 1.0, 2.7] {
            let u = PI / (1.0 + chi * chi).sqrt();
            let rho = reduced_state(chi, InitialState::Eg, u).unwrap();
            let closed = reduced_state_closed_form(&CouplingConfig::new(chi, PI).unwrap()).unwrap();
            assert!(rho.trace_distance(&closed) < 1e-10);
        }
    }

    #[test]
    fn ge_start_uses_relabelled_closed_form() {
        for chi in [0.0, 0.4, 1.0, 3.0] {
            for theta in [0.3, 1.9, 4.0] {
                let cfg = CouplingConfig::new(chi, theta).unwrap();
                let closed = reduced_state_closed_form_for(&cfg, InitialState::Ge).unwrap();
                let direct = reduced_state(chi, InitialState::Ge, cfg.phase()).unwrap();
                assert!(closed.trace_distance(&direct) < 1e-10);
            }
        }
    }

    #[test]
    fn decoupled_second_atom_stays_excited() {
        for u in [0.0, 0.5, 3.0, 11.0] {
            let rho = reduced_state(0.0, InitialState::Ee, u).unwrap();
            let p_atom2_excited = rho.get(EE, EE).re + rho.get(GE, GE).re;
            assert_abs_diff_eq!(p_atom2_excited, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rho.get(EE, GG).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn oracle_requires_enough_steps() {
        let cfg = CouplingConfig::new(1.0, 1.0).unwrap();
        assert!(ode_oracle(&cfg, InitialState::Eg, 10).is_err());
    }

    #[test]
    fn oracle_trivial_and_symmetric_cases() {
        let cfg = CouplingConfig::new(2.0, 0.0).unwrap();
        let s = ode_oracle(&cfg, InitialState::Eg, 1000).unwrap();
        assert!(s.max_amplitude_diff(&InitialState::Eg.sector_state()) < 1e-15);

        let cfg = CouplingConfig::new(1.0, FRAC_PI_2).unwrap();
        let steps = default_oracle_steps(&cfg, 1).unwrap();
        let rho = partial_trace_field(&ode_oracle(&cfg, InitialState::Eg, steps).unwrap()).unwrap();
        let closed = reduced_state_closed_form(&cfg).unwrap();
        assert!(rho.trace_distance(&closed) < 1e-8);
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(CouplingConfig::new(-1.0, 0.0).is_err());
        assert!(CouplingConfig::new(1.0, f64::NAN).is_err());
        assert!(CouplingConfig::new(1.0, -0.1).is_err());
    }
}
