//! Concurrence, linear entropy and maximal CHSH violation of two-atom
//! states, together with the closed forms for the `|eg>|0>` evolution and
//! the Werner reference family.
//!
//! The generic routines are the reference; the closed forms are checked
//! against them.

use num_complex::Complex64;

use crate::dynamics::CouplingConfig;
use crate::error::{Error, Result};
use crate::qcore::{self, cr, eigh4, kron2, pauli, ComplexMatrix, Matrix4c, TwoQubitDensity};

/// Slack allowed before a value outside its theoretical range is treated
/// as a bug.
pub const RANGE_TOL: f64 = 1e-9;

/// `2 sqrt(2)`, the quantum bound of the CHSH operator.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Figure of merit evaluated on a reduced state.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    Concurrence,
    Bell,
}

impl Measure {
    pub fn evaluate(self, rho: &TwoQubitDensity) -> Result<f64> {
        match self {
            Measure::Concurrence => concurrence(rho),
            Measure::Bell => bell_max(rho),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Measure::Concurrence => "concurrence",
            Measure::Bell => "bell_max",
        }
    }
}

fn sigma_yy() -> Matrix4c {
    kron2(&pauli(2), &pauli(2))
}

fn clamp_checked(value: f64, lo: f64, hi: f64, what: &str) -> Result<f64> {
    if !value.is_finite() || value < lo - RANGE_TOL || value > hi + RANGE_TOL {
        return Err(Error::Consistency(format!("{what} = {value} outside [{lo}, {hi}]")));
    }
    Ok(value.clamp(lo, hi))
}

/// `(sigma_y (x) sigma_y) rho^* (sigma_y (x) sigma_y)`.
pub fn spin_flip(rho: &TwoQubitDensity) -> Matrix4c {
    let yy = sigma_yy();
    yy * rho.matrix().conjugate() * yy
}

/// Eigenvalues of `rho` below this are rounding noise and treated as zero
/// before taking `sqrt(rho)`; otherwise a `1e-17` residue would turn into a
/// `3e-9` error in the concurrence.
pub const SPECTRUM_FLOOR: f64 = 32.0 * f64::EPSILON;

/// Square roots of the eigenvalues of `R = rho rho~`, descending.
///
/// They are obtained as the singular values of `sqrt(rho) sqrt(rho~)`,
/// whose squares are the eigenvalues of `R`. This keeps exact zeros at
/// rounding level instead of the square root of rounding noise.
pub fn spin_flip_roots(rho: &TwoQubitDensity) -> Result<[f64; 4]> {
    let (vals, vecs) = eigh4(rho.matrix());
    let sqrt_vals = Matrix4c::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| cr(if vals[k] > SPECTRUM_FLOOR { vals[k].sqrt() } else { 0.0 })));
    let sqrt_rho = vecs * sqrt_vals * vecs.adjoint();
    let yy = sigma_yy();
    let sqrt_tilde = yy * sqrt_rho.conjugate() * yy;

    let svd = (sqrt_rho * sqrt_tilde).svd(false, false);
    let mut roots = [0.0; 4];
    for (r, s) in roots.iter_mut().zip(svd.singular_values.iter()) {
        *r = *s;
    }
    roots.sort_by(|a, b| b.total_cmp(a));

    // Tr R computed directly must match the sum of squared roots.
    let trace_r = (rho.matrix() * spin_flip(rho)).trace();
    let sum_sq: f64 = roots.iter().map(|d| d * d).sum();
    if trace_r.re < -RANGE_TOL || (trace_r.re - sum_sq).abs() > RANGE_TOL || trace_r.im.abs() > RANGE_TOL {
        return Err(Error::Consistency(format!(
            "spin-flipped spectrum inconsistent: Tr R = {trace_r}, sum of roots^2 = {sum_sq}"
        )));
    }
    Ok(roots)
}

/// Wootters concurrence `max(0, d1 - d2 - d3 - d4)`.
pub fn concurrence(rho: &TwoQubitDensity) -> Result<f64> {
    let d = spin_flip_roots(rho)?;
    let c = d[0] - d[1] - d[2] - d[3];
    clamp_checked(c.max(0.0), 0.0, 1.0, "concurrence")
}

/// Concurrence of an X-shaped state from its matrix elements.
pub fn x_state_concurrence(rho: &TwoQubitDensity) -> f64 {
    use qcore::{EE, EG, GE, GG};
    let p = |i: usize| rho.get(i, i).re.max(0.0);
    let a = rho.get(EG, GE).norm() - (p(EE) * p(GG)).sqrt();
    let b = rho.get(EE, GG).norm() - (p(EG) * p(GE)).sqrt();
    2.0 * a.max(b).max(0.0)
}

/// Concurrence of the `|eg>|0>` evolution in closed form.
pub fn concurrence_closed_form(cfg: &CouplingConfig) -> f64 {
    let (l1, l2) = (1.0, cfg.chi());
    let lam4 = (l1 * l1 + l2 * l2).powi(2);
    let th = cfg.theta();
    let value = (l1.powi(3) * l2 - 2.0 * l1 * l2.powi(3)) / lam4
        + 2.0 * l1 * l2 * (l2 * l2 - l1 * l1) * th.cos() / lam4
        + l1.powi(3) * l2 * (2.0 * th).cos() / lam4;
    value.abs()
}

/// `M = (4/3)(1 - Tr rho^2)`.
pub fn linear_entropy(rho: &TwoQubitDensity) -> f64 {
    let m = 4.0 / 3.0 * (1.0 - rho.purity());
    if m.abs() < 1e-12 {
        0.0
    } else if (m - 1.0).abs() < 1e-12 {
        1.0
    } else {
        m
    }
}

/// Pauli correlation matrix `T[n][m] = Tr(rho sigma_n (x) sigma_m)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(pub [[f64; 3]; 3]);

impl CorrelationMatrix {
    pub fn of(rho: &TwoQubitDensity) -> Result<Self> {
        let mut t = [[0.0; 3]; 3];
        for (n, row) in t.iter_mut().enumerate() {
            for (m, entry) in row.iter_mut().enumerate() {
                let op = kron2(&pauli(n + 1), &pauli(m + 1));
                let v: Complex64 = (rho.matrix() * op).trace();
                *entry = clamp_checked(v.re, -1.0, 1.0, "correlation")?;
            }
        }
        Ok(Self(t))
    }

    /// `T^T T` as a real symmetric matrix.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let t = &self.0;
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..3).map(|k| t[k][i] * t[k][j]).sum();
            }
        }
        g
    }
}

/// Maximal CHSH expectation `2 sqrt(k1 + k2)`, with `k1, k2` the two
/// largest eigenvalues of `T^T T`.
pub fn bell_max(rho: &TwoQubitDensity) -> Result<f64> {
    let g = CorrelationMatrix::of(rho)?.gram();
    let gm = ComplexMatrix::from_fn(3, 3, |r, s| cr(g[r][s]))?;
    let vals = qcore::hermitian_eigenvalues(&gm)?;
    let sum = (vals[0] + vals[1]).max(0.0);
    clamp_checked(2.0 * sum.sqrt(), 0.0, TSIRELSON, "maximal Bell violation")
}

/// Maximal CHSH violation of the `|eg>|0>` evolution in closed form.
pub fn bell_max_closed_form(cfg: &CouplingConfig) -> f64 {
    let c = concurrence_closed_form(cfg);
    let chi = cfg.chi();
    let zz = 1.0 - (1.0 - (2.0 * cfg.theta()).cos()) / (1.0 + chi * chi);
    2.0 * (c * c + (c * c).max(zz * zz)).sqrt()
}

/// `p |Psi+><Psi+| + (1 - p) I/4` with `|Psi+> = (|eg> + |ge>)/sqrt 2`.
pub fn werner_state(p: f64) -> Result<TwoQubitDensity> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("Werner weight must lie in [0, 1], got {p}")));
    }
    let mut m = Matrix4c::identity() * cr((1.0 - p) / 4.0);
    for &r in &[qcore::EG, qcore::GE] {
        for &s in &[qcore::EG, qcore::GE] {
            m[(r, s)] += cr(p / 2.0);
        }
    }
    TwoQubitDensity::new(m)
}

/// `(concurrence, linear entropy)` of the Werner state with weight `p`.
pub fn werner_reference(p: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("Werner weight must lie in [0, 1], got {p}")));
    }
    Ok((((3.0 * p - 1.0) / 2.0).max(0.0), 1.0 - p * p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::reduced_state_closed_form;
    use crate::qcore::{c, EG, GE};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

    fn psi_plus() -> TwoQubitDensity {
        let mut v = [cr(0.0); 4];
        v[EG] = cr(FRAC_1_SQRT_2);
        v[GE] = cr(FRAC_1_SQRT_2);
        TwoQubitDensity::from_pure(&v).unwrap()
    }

    fn product_eg() -> TwoQubitDensity {
        let mut v = [cr(0.0); 4];
        v[EG] = cr(1.0);
        TwoQubitDensity::from_pure(&v).unwrap()
    }

    #[test]
    fn concurrence_examples() {
        assert_abs_diff_eq!(concurrence(&psi_plus()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence(&product_eg()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence(&werner_state(0.5).unwrap()).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(concurrence(&TwoQubitDensity::maximally_mixed()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn complex_phase_bell_state() {
        let mut v = [cr(0.0); 4];
        v[EG] = cr(FRAC_1_SQRT_2);
        v[GE] = c(0.0, FRAC_1_SQRT_2);
        let rho = TwoQubitDensity::from_pure(&v).unwrap();
        assert_abs_diff_eq!(concurrence(&rho).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bell_max(&rho).unwrap(), TSIRELSON, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_concurrence_examples() {
        let cfg = |chi, th| CouplingConfig::new(chi, th).unwrap();
        for th in [0.0, 0.4, 2.0, 5.0] {
            assert_eq!(concurrence_closed_form(&cfg(0.0, th)), 0.0);
        }
        assert_abs_diff_eq!(concurrence_closed_form(&cfg(1.0, FRAC_PI_2)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence_closed_form(&cfg(SQRT_2 - 1.0, PI)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(concurrence_closed_form(&cfg(SQRT_2 + 1.0, PI)), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn linear_entropy_examples() {
        assert_eq!(linear_entropy(&psi_plus()), 0.0);
        assert_eq!(linear_entropy(&product_eg()), 0.0);
        assert_eq!(linear_entropy(&TwoQubitDensity::maximally_mixed()), 1.0);
        assert_abs_diff_eq!(linear_entropy(&werner_state(0.6).unwrap()), 0.64, epsilon = 1e-14);
    }

    #[test]
    fn bell_examples() {
        assert_abs_diff_eq!(bell_max(&psi_plus()).unwrap(), TSIRELSON, epsilon = 1e-12);
        assert_abs_diff_eq!(bell_max(&product_eg()).unwrap(), 2.0, epsilon = 1e-12);
        let rho = reduced_state_closed_form(&CouplingConfig::new(SQRT_2 - 1.0, PI).unwrap()).unwrap();
        assert_abs_diff_eq!(bell_max(&rho).unwrap(), TSIRELSON, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_bell_examples() {
        let cfg = |chi, th| CouplingConfig::new(chi, th).unwrap();
        for chi in [0.0, 0.5, 1.0, 3.0] {
            assert_abs_diff_eq!(bell_max_closed_form(&cfg(chi, 0.0)), 2.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(bell_max_closed_form(&cfg(1.0, PI)), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bell_max_closed_form(&cfg(SQRT_2 - 1.0, PI)), TSIRELSON, epsilon = 1e-14);
    }

    #[test]
    fn werner_examples() {
        assert_eq!(werner_reference(1.0).unwrap(), (1.0, 0.0));
        assert_eq!(werner_reference(0.0).unwrap(), (0.0, 1.0));
        let (c13, m13) = werner_reference(1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(c13, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m13, 8.0 / 9.0, epsilon = 1e-15);
        assert!(werner_reference(1.5).is_err());
    }

    #[test]
    fn werner_matches_generic() {
        for k in 0..=40 {
            let p = k as f64 / 40.0;
            let rho = werner_state(p).unwrap();
            let (cw, mw) = werner_reference(p).unwrap();
            assert_abs_diff_eq!(concurrence(&rho).unwrap(), cw, epsilon = 1e-12);
            assert_abs_diff_eq!(linear_entropy(&rho), mw, epsilon = 1e-12);
        }
    }

    #[test]
    fn correlation_matrix_of_product_state() {
        let t = CorrelationMatrix::of(&product_eg()).unwrap();
        // |e> has sigma_z = +1, |g> has sigma_z = -1
        assert_abs_diff_eq!(t.0[2][2], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.0[0][0], 0.0, epsilon = 1e-15);
    }
}
