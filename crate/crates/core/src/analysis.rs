//! Global maxima of concurrence and Bell violation over the whole
//! evolution, exchange-symmetry tests and second-derivative kink scans.

use std::f64::consts::{PI, TAU};

use crate::dynamics::{build_sector_hamiltonian, InitialState, Propagator};
use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::qcore::{partial_trace_field, SectorState};

/// `sqrt(sqrt(32) - 5)`, where the global maximal concurrence has its
/// interior local minimum.
pub fn chi_local_min() -> f64 {
    (32f64.sqrt() - 5.0).sqrt()
}

pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Tolerance used to decide whether two global maxima coincide.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Which expression produced a [`GlobalMaxResult`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Maximum reached at `Theta = pi`.
    EndpointPi,
    /// Maximum at `cos Theta = (1 - chi^2)/2`, value `chi/2`.
    Interior,
    /// Grid scan plus golden-section refinement.
    Numeric,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::EndpointPi => "endpoint-pi",
            Branch::Interior => "interior",
            Branch::Numeric => "numeric",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GlobalMaxResult {
    pub chi: f64,
    pub max_value: f64,
    /// `Theta` for single-excitation starts, `u` for two-excitation starts.
    pub argmax_phase: f64,
    pub branch: Branch,
}

fn check_ratio(chi: f64) -> Result<()> {
    if !chi.is_finite() || chi < 0.0 {
        return Err(Error::InvalidParameter(format!("coupling ratio must be finite and >= 0, got {chi}")));
    }
    Ok(())
}

/// Concurrence of the `|eg>` evolution at `Theta = pi`: `4|chi - chi^3|/(1+chi^2)^2`.
pub fn concurrence_at_pi(chi: f64) -> f64 {
    4.0 * (chi - chi.powi(3)).abs() / (1.0 + chi * chi).powi(2)
}

/// Interior extremum of the `|eg>` concurrence, `chi/2`.
pub fn concurrence_interior(chi: f64) -> f64 {
    chi / 2.0
}

/// Largest concurrence reached by `|eg>|0>` over all times.
pub fn global_max_concurrence_closed(chi: f64) -> Result<GlobalMaxResult> {
    check_ratio(chi)?;
    if chi == 0.0 {
        return Ok(GlobalMaxResult { chi, max_value: 0.0, argmax_phase: 0.0, branch: Branch::EndpointPi });
    }
    if chi < chi_local_min() || chi > SQRT_3 {
        Ok(GlobalMaxResult { chi, max_value: concurrence_at_pi(chi), argmax_phase: PI, branch: Branch::EndpointPi })
    } else {
        Ok(GlobalMaxResult {
            chi,
            max_value: concurrence_interior(chi),
            argmax_phase: ((1.0 - chi * chi) / 2.0).acos(),
            branch: Branch::Interior,
        })
    }
}

/// Largest maximal Bell violation reached by `|eg>|0>` over all times;
/// always attained at `Theta = pi`.
pub fn global_max_bell_closed(chi: f64) -> Result<GlobalMaxResult> {
    check_ratio(chi)?;
    let x = 4.0 * chi - 4.0 * chi.powi(3);
    let value = 2.0 * (1.0 + x * x / (1.0 + chi * chi).powi(4)).sqrt();
    let argmax_phase = if chi == 0.0 { 0.0 } else { PI };
    Ok(GlobalMaxResult { chi, max_value: value, argmax_phase, branch: Branch::EndpointPi })
}

/// Grid and refinement settings of the numeric global-maximum search.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SearchParams {
    /// Upper end of the scanned phase `u` (two-excitation start only;
    /// single-excitation starts scan one period of `Theta`).
    pub horizon: f64,
    pub coarse_step: f64,
    /// Width of the final golden-section bracket.
    pub tolerance: f64,
}

impl SearchParams {
    pub fn two_excitation() -> Self {
        Self { horizon: 400.0, coarse_step: 0.005, tolerance: 1e-6 }
    }

    pub fn one_excitation() -> Self {
        Self { horizon: TAU, coarse_step: TAU / 4000.0, tolerance: 1e-6 }
    }

    pub fn for_initial(initial: InitialState) -> Self {
        match initial {
            InitialState::Ee => Self::two_excitation(),
            _ => Self::one_excitation(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.horizon) || !ok(self.coarse_step) || !ok(self.tolerance) {
            return Err(Error::InvalidParameter(format!("search parameters must be positive: {self:?}")));
        }
        if self.coarse_step > self.horizon {
            return Err(Error::InvalidParameter("coarse step exceeds the horizon".into()));
        }
        Ok(())
    }
}

/// A measure evaluated along the evolution of one initial state.
pub struct PhaseObjective {
    chi: f64,
    initial: InitialState,
    propagator: Propagator,
    measure: Measure,
}

impl PhaseObjective {
    pub fn new(chi: f64, initial: InitialState, measure: Measure) -> Result<Self> {
        check_ratio(chi)?;
        let h = build_sector_hamiltonian(initial.sector().excitations(), chi)?;
        Ok(Self { chi, initial, propagator: Propagator::new(&h), measure })
    }

    /// Converts the reported phase into `u`: single-excitation starts are
    /// parametrized by `Theta = u sqrt(1 + chi^2)`.
    fn to_u(&self, phase: f64) -> f64 {
        match self.initial {
            InitialState::Ee => phase,
            _ => phase / (1.0 + self.chi * self.chi).sqrt(),
        }
    }

    pub fn state(&self, phase: f64) -> Result<SectorState> {
        self.propagator.evolve(&self.initial.sector_state(), self.to_u(phase))
    }

    pub fn eval(&self, phase: f64) -> Result<f64> {
        let rho = partial_trace_field(&self.state(phase)?)?;
        self.measure.evaluate(&rho)
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`. Returns the
/// best point evaluated.
pub fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while (b - a).abs() > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Coarse scan of `f` on `[lo, hi]` followed by golden-section refinement
/// around every grid local maximum. Equal maxima resolve to the smallest
/// argument.
pub fn scan_and_refine<F>(f: F, lo: f64, hi: f64, step: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|k| (lo + k as f64 * step).min(hi)).collect();
    let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;

    let mut best = (grid[0], values[0]);
    let mut consider = |x: f64, v: f64| {
        if v > best.1 + 1e-12 {
            best = (x, v);
        }
    };
    for k in 0..=n {
        let v = values[k];
        let rising = k == 0 || v > values[k - 1];
        let falling = k == n || v >= values[k + 1];
        if !(rising && falling) {
            continue;
        }
        consider(grid[k], v);
        let a = grid[k.saturating_sub(1)];
        let b = grid[(k + 1).min(n)];
        if b > a {
            let (x, fx) = golden_section_max(&f, a, b, tol)?;
            if fx > v {
                consider(x, fx);
            }
        }
    }
    Ok(best)
}

fn global_max_numeric(chi: f64, initial: InitialState, measure: Measure, params: &SearchParams) -> Result<GlobalMaxResult> {
    params.validate()?;
    let objective = PhaseObjective::new(chi, initial, measure)?;
    let hi = match initial {
        InitialState::Ee => params.horizon,
        // periodic in Theta
        _ => TAU,
    };
    let (argmax_phase, max_value) =
        scan_and_refine(|x| objective.eval(x), 0.0, hi, params.coarse_step, params.tolerance)?;
    Ok(GlobalMaxResult { chi, max_value, argmax_phase, branch: Branch::Numeric })
}

/// Numeric global maximum of the concurrence over the evolution.
pub fn global_max_concurrence_numeric(chi: f64, initial: InitialState, params: &SearchParams) -> Result<GlobalMaxResult> {
    global_max_numeric(chi, initial, Measure::Concurrence, params)
}

/// Numeric global maximum of the maximal Bell violation over the evolution.
pub fn global_max_bell_numeric(chi: f64, initial: InitialState, params: &SearchParams) -> Result<GlobalMaxResult> {
    global_max_numeric(chi, initial, Measure::Bell, params)
}

/// Global maxima for the `|eg>` start at `chi` and `1/chi` (equivalently
/// the `|ge>` start at `chi`).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub chi: f64,
    pub c_m_chi: f64,
    pub c_m_inv_chi: f64,
    pub bell_chi: f64,
    pub bell_inv_chi: f64,
    pub concurrence_symmetric: bool,
    pub bell_symmetric: bool,
}

pub fn exchange_symmetry_report(chi: f64) -> Result<SymmetryReport> {
    if !chi.is_finite() || chi <= 0.0 {
        return Err(Error::InvalidParameter(format!("coupling ratio must be finite and > 0, got {chi}")));
    }
    let c_m_chi = global_max_concurrence_closed(chi)?.max_value;
    let c_m_inv_chi = global_max_concurrence_closed(1.0 / chi)?.max_value;
    let bell_chi = global_max_bell_closed(chi)?.max_value;
    let bell_inv_chi = global_max_bell_closed(1.0 / chi)?.max_value;
    Ok(SymmetryReport {
        chi,
        c_m_chi,
        c_m_inv_chi,
        bell_chi,
        bell_inv_chi,
        concurrence_symmetric: (c_m_chi - c_m_inv_chi).abs() < SYMMETRY_TOL,
        bell_symmetric: (bell_chi - bell_inv_chi).abs() < SYMMETRY_TOL,
    })
}

/// Central second differences of the closed-form global maximal
/// concurrence on both sides of a point.
#[derive(Clone, Debug, PartialEq)]
pub struct KinkProfile {
    pub center: f64,
    pub step: f64,
    /// `(chi, second difference)` left of the center, nearest first.
    pub left: Vec<(f64, f64)>,
    pub right: Vec<(f64, f64)>,
    /// Second derivative extrapolated to the center from each side.
    pub left_limit: f64,
    pub right_limit: f64,
    pub gap: f64,
    /// One-sided first differences at the center.
    pub left_slope: f64,
    pub right_slope: f64,
}

pub fn kink_scan(chi_center: f64, half_width: f64, step: f64) -> Result<KinkProfile> {
    if !(step > 0.0) || !(half_width > 0.0) || !chi_center.is_finite() {
        return Err(Error::InvalidParameter("kink scan needs positive step and half width".into()));
    }
    let samples = (half_width / step).floor() as usize;
    if samples < 20 {
        return Err(Error::InvalidParameter(format!("kink scan needs >= 20 samples per side, got {samples}")));
    }
    if chi_center - (samples as f64 + 1.0) * step <= 0.0 {
        return Err(Error::InvalidParameter("kink scan window reaches chi <= 0".into()));
    }
    let f = |x: f64| global_max_concurrence_closed(x).map(|r| r.max_value);
    let d2 = |x: f64| -> Result<f64> { Ok((f(x + step)? - 2.0 * f(x)? + f(x - step)?) / (step * step)) };

    let mut left = Vec::with_capacity(samples);
    let mut right = Vec::with_capacity(samples);
    for j in 1..=samples {
        let xl = chi_center - j as f64 * step;
        let xr = chi_center + j as f64 * step;
        left.push((xl, d2(xl)?));
        right.push((xr, d2(xr)?));
    }
    let left_limit = 2.0 * left[0].1 - left[1].1;
    let right_limit = 2.0 * right[0].1 - right[1].1;
    let f0 = f(chi_center)?;
    Ok(KinkProfile {
        center: chi_center,
        step,
        left_limit,
        right_limit,
        gap: (right_limit - left_limit).abs(),
        left_slope: (f0 - f(chi_center - step)?) / step,
        right_slope: (f(chi_center + step)? - f0) / step,
        left,
        right,
    })
}

/// Ratio at which the two-excitation start reaches its largest concurrence.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PeakLocation {
    pub chi: f64,
    pub result: GlobalMaxResult,
    /// Cavity photon-number distribution at the maximizing phase.
    pub photon_distribution: [f64; 3],
}

/// Locates the coupling ratio in `[lo, hi]` where the `|ee>` start reaches
/// its largest global-maximum concurrence. A 0.01 grid in `chi` picks the
/// bracket, golden-section search narrows it to `chi_tol`.
pub fn locate_two_excitation_peak(lo: f64, hi: f64, chi_tol: f64, params: &SearchParams) -> Result<PeakLocation> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("invalid ratio interval [{lo}, {hi}]")));
    }
    let eval = |chi: f64| global_max_concurrence_numeric(chi, InitialState::Ee, params).map(|r| r.max_value);
    let (chi, _) = scan_and_refine(eval, lo, hi, 0.01, chi_tol)?;
    let result = global_max_concurrence_numeric(chi, InitialState::Ee, params)?;
    let objective = PhaseObjective::new(chi, InitialState::Ee, Measure::Concurrence)?;
    let photon_distribution = objective.state(result.argmax_phase)?.photon_distribution();
    Ok(PeakLocation { chi, result, photon_distribution })
}
