//! Entanglement/mixedness frontiers and the region reachable by the
//! evolving atoms.
//!
//! The concurrence frontier uses the known two-parameter family of
//! maximally entangled mixed states for linear entropy. The Bell frontier
//! has no closed form here and is found numerically over X-shaped states,
//! so it is a lower bound within the optimizer tolerance.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::golden_section_max;
use crate::dynamics::{reduced_state_closed_form, CouplingConfig};
use crate::error::{Error, Result};
use crate::measures::{self, Measure};
use crate::qcore::{cr, Matrix4c, TwoQubitDensity, EE, EG, GE, GG};

/// Stated accuracy of [`mbvms_frontier`].
pub const MBVMS_TOL: f64 = 1e-3;

/// Gap below which the reachable concurrence counts as touching the
/// frontier in [`coverage_threshold`].
pub const COVERAGE_GAP: f64 = 0.02;

/// Default seed of the randomized searches.
pub const DEFAULT_SEED: u64 = 20_051_127;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum FrontierKind {
    Mems,
    Mbvms,
    Werner,
    Trajectory,
}

impl FrontierKind {
    pub fn label(self) -> &'static str {
        match self {
            FrontierKind::Mems => "mems",
            FrontierKind::Mbvms => "mbvms",
            FrontierKind::Werner => "werner",
            FrontierKind::Trajectory => "trajectory",
        }
    }

    fn is_frontier(self) -> bool {
        self != FrontierKind::Trajectory
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    /// Linear entropy.
    pub entropy: f64,
    /// Concurrence or maximal Bell violation.
    pub value: f64,
    /// Family parameter: `C` for MEMS, `p` for Werner, `chi` for
    /// trajectories, `M` for the Bell frontier.
    pub parameter: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierCurve {
    pub kind: FrontierKind,
    pub measure: Measure,
    /// Pulse area of a trajectory; unused for the frontier kinds.
    pub theta: Option<f64>,
    /// Frontier kinds: entropy strictly increasing. Trajectories: ordered
    /// by `chi`.
    pub points: Vec<FrontierPoint>,
}

impl FrontierCurve {
    fn new(kind: FrontierKind, measure: Measure, theta: Option<f64>, mut points: Vec<FrontierPoint>) -> Result<Self> {
        let hi = match measure {
            Measure::Concurrence => 1.0,
            Measure::Bell => measures::TSIRELSON,
        };
        for p in &points {
            if !(0.0..=1.0).contains(&p.entropy) || !(0.0..=hi).contains(&p.value) {
                return Err(Error::Consistency(format!("frontier point out of range: {p:?}")));
            }
        }
        if kind.is_frontier() {
            points.sort_by(|a, b| a.entropy.total_cmp(&b.entropy));
            if points.windows(2).any(|w| w[1].entropy <= w[0].entropy) {
                return Err(Error::Consistency(format!("{} frontier entropies not strictly increasing", kind.label())));
            }
        }
        Ok(Self { kind, measure, theta, points })
    }
}

/// Member of the concurrence/linear-entropy MEMS family with concurrence
/// `c`: populations `g, 1-2g, 0, g` on `|ee>, |eg>, |ge>, |gg>` and
/// coherence `c/2` between `|ee>` and `|gg>`, where `g = c/2` for
/// `c >= 2/3` and `g = 1/3` otherwise.
pub fn mems_state(c: f64) -> Result<TwoQubitDensity> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("MEMS concurrence must lie in [0, 1], got {c}")));
    }
    let g = if c >= 2.0 / 3.0 { c / 2.0 } else { 1.0 / 3.0 };
    let mut m = Matrix4c::zeros();
    m[(EE, EE)] = cr(g);
    m[(EG, EG)] = cr(1.0 - 2.0 * g);
    m[(GG, GG)] = cr(g);
    m[(EE, GG)] = cr(c / 2.0);
    m[(GG, EE)] = cr(c / 2.0);
    TwoQubitDensity::new(m)
}

/// Largest concurrence compatible with linear entropy `m`, from the
/// inverted MEMS relations `M = (8/3)C(1-C)` (`C >= 2/3`) and
/// `M = 8/9 - 2C^2/3` (`C < 2/3`).
pub fn mems_concurrence_at(m: f64) -> f64 {
    if m <= 16.0 / 27.0 {
        (1.0 + (1.0 - 1.5 * m).max(0.0).sqrt()) / 2.0
    } else if m < 8.0 / 9.0 {
        (1.5 * (8.0 / 9.0 - m)).sqrt()
    } else {
        0.0
    }
}

/// MEMS frontier sampled at `C = k/samples`, `k = 1..=samples`; both
/// coordinates evaluated by the measures module.
pub fn mems_frontier(samples: usize) -> Result<FrontierCurve> {
    if samples < 2 {
        return Err(Error::InvalidParameter("MEMS frontier needs at least 2 samples".into()));
    }
    let points = (1..=samples)
        .map(|k| {
            let c = k as f64 / samples as f64;
            let rho = mems_state(c)?;
            Ok(FrontierPoint { entropy: measures::linear_entropy(&rho), value: measures::concurrence(&rho)?, parameter: c })
        })
        .collect::<Result<Vec<_>>>()?;
    FrontierCurve::new(FrontierKind::Mems, Measure::Concurrence, None, points)
}

/// Werner family `p = k/samples`, `k = 1..=samples`, for either measure.
pub fn werner_curve(samples: usize, measure: Measure) -> Result<FrontierCurve> {
    if samples < 2 {
        return Err(Error::InvalidParameter("Werner curve needs at least 2 samples".into()));
    }
    let points = (1..=samples)
        .map(|k| {
            let p = k as f64 / samples as f64;
            let rho = measures::werner_state(p)?;
            Ok(FrontierPoint { entropy: measures::linear_entropy(&rho), value: measure.evaluate(&rho)?, parameter: p })
        })
        .collect::<Result<Vec<_>>>()?;
    FrontierCurve::new(FrontierKind::Werner, measure, None, points)
}

/// X-state parametrization on a fixed purity shell.
///
/// The spectrum is `1/4 + r v` with `r = sqrt(P - 1/4)` and `v` a unit
/// vector orthogonal to `(1,1,1,1)` given by two angles. The first two
/// eigenvalues form the `|ee>,|gg>` block, the last two the `|eg>,|ge>`
/// block, each rotated by its own angle.
#[derive(Copy, Clone, Debug)]
struct XShell {
    radius: f64,
}

impl XShell {
    fn for_entropy(m: f64) -> Self {
        let purity = 1.0 - 0.75 * m;
        Self { radius: (purity - 0.25).max(0.0).sqrt() }
    }

    fn spectrum(&self, polar: f64, azimuth: f64) -> [f64; 4] {
        let s2 = std::f64::consts::SQRT_2;
        let s6 = 6f64.sqrt();
        let s12 = 12f64.sqrt();
        let e1 = [1.0 / s2, -1.0 / s2, 0.0, 0.0];
        let e2 = [1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0];
        let e3 = [1.0 / s12, 1.0 / s12, 1.0 / s12, -3.0 / s12];
        let (a, b, c) = (polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos());
        let mut lam = [0.0; 4];
        for k in 0..4 {
            lam[k] = 0.25 + self.radius * (a * e1[k] + b * e2[k] + c * e3[k]);
        }
        lam
    }

    /// `None` when the spectrum leaves the simplex.
    fn state(&self, x: &[f64; 4]) -> Option<TwoQubitDensity> {
        let lam = self.spectrum(x[0], x[1]);
        if lam.iter().any(|&l| l < -1e-15) {
            return None;
        }
        let lam = lam.map(|l| l.max(0.0));
        let mut m = Matrix4c::zeros();
        let mut block = |i: usize, j: usize, l1: f64, l2: f64, angle: f64| {
            let (s, c) = angle.sin_cos();
            m[(i, i)] = cr(l1 * c * c + l2 * s * s);
            m[(j, j)] = cr(l1 * s * s + l2 * c * c);
            m[(i, j)] = cr((l1 - l2) * s * c);
            m[(j, i)] = cr((l1 - l2) * s * c);
        };
        block(EE, GG, lam[0], lam[1], x[2]);
        block(EG, GE, lam[2], lam[3], x[3]);
        TwoQubitDensity::new(m).ok()
    }

    fn objective(&self, x: &[f64; 4]) -> Result<f64> {
        match self.state(x) {
            Some(rho) => measures::bell_max(&rho),
            None => Ok(f64::NEG_INFINITY),
        }
    }
}

fn coordinate_ascent(shell: &XShell, mut x: [f64; 4]) -> Result<([f64; 4], f64)> {
    let mut best = shell.objective(&x)?;
    let mut step = 0.25;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..4 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] += dir * step;
                let v = shell.objective(&y)?;
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((x, best))
}

/// Largest maximal Bell violation over X-shaped states of linear entropy
/// `M`, for every `M` in `entropy_grid`. Each point runs coordinate ascent
/// from the pure/Bell-like corners of the shell plus `oracle_samples`
/// random starts drawn from a generator seeded with `seed`.
pub fn mbvms_frontier(entropy_grid: &[f64], oracle_samples: usize, seed: u64) -> Result<FrontierCurve> {
    let mut points = Vec::with_capacity(entropy_grid.len());
    for (idx, &m) in entropy_grid.iter().enumerate() {
        if !(0.0..1.0).contains(&m) {
            return Err(Error::InvalidParameter(format!("Bell frontier needs 0 <= M < 1, got {m}")));
        }
        let shell = XShell::for_entropy(m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));

        // Spectrum pointing at the first eigenvalue (polar/azimuth chosen so
        // v is the (3,-1,-1,-1)/sqrt(12) corner direction), Bell-rotated
        // blocks.
        let corner_polar = (1.0f64 / 3.0).acos();
        let mut starts: Vec<[f64; 4]> = vec![
            [corner_polar, PI / 6.0, PI / 4.0, PI / 4.0],
            [corner_polar, PI / 6.0, PI / 4.0, -PI / 4.0],
            [PI / 2.0, 0.0, PI / 4.0, PI / 4.0],
            [0.0, 0.0, PI / 4.0, PI / 4.0],
        ];
        for _ in 0..oracle_samples {
            starts.push([rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)]);
        }
        let mut best = f64::NEG_INFINITY;
        for s in starts {
            let (_, v) = coordinate_ascent(&shell, s)?;
            best = best.max(v);
        }
        if !best.is_finite() {
            return Err(Error::Consistency(format!("no feasible X-state found at M = {m}")));
        }
        points.push(FrontierPoint { entropy: m, value: best, parameter: m });
    }
    FrontierCurve::new(FrontierKind::Mbvms, Measure::Bell, None, points)
}

/// `chi` sampling for trajectories: `chi_samples` points linear on the part
/// of the range below 1 and `chi_samples` log-spaced points above 1.
pub fn chi_samples(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidParameter(format!("invalid chi range [{lo}, {hi}] with {n} samples")));
    }
    let linear = |a: f64, b: f64| (0..n).map(move |k| a + (b - a) * k as f64 / (n - 1) as f64);
    let log = |a: f64, b: f64| {
        let (la, lb) = (a.ln(), b.ln());
        (0..n).map(move |k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
    };
    let out: Vec<f64> = if hi <= 1.0 {
        linear(lo, hi).collect()
    } else if lo >= 1.0 {
        log(lo, hi).collect()
    } else {
        linear(lo, 1.0).chain(log(1.0, hi).skip(1)).collect()
    };
    Ok(out)
}

/// One curve per pulse area: `(M, measure)` of the closed-form reduced
/// state as `chi` sweeps `chi_range`.
pub fn trajectory_sweep(
    theta_list: &[f64],
    chi_range: (f64, f64),
    chi_samples_per_side: usize,
    measure: Measure,
) -> Result<Vec<FrontierCurve>> {
    let chis = chi_samples(chi_range.0, chi_range.1, chi_samples_per_side)?;
    theta_list
        .iter()
        .map(|&theta| {
            if !(theta > 0.0) {
                return Err(Error::InvalidParameter(format!("pulse areas must be positive, got {theta}")));
            }
            let points = chis
                .iter()
                .map(|&chi| {
                    let rho = reduced_state_closed_form(&CouplingConfig::new(chi, theta)?)?;
                    Ok(FrontierPoint {
                        entropy: measures::linear_entropy(&rho),
                        value: measure.evaluate(&rho)?,
                        parameter: chi,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            FrontierCurve::new(FrontierKind::Trajectory, measure, Some(theta), points)
        })
        .collect()
}

/// The pulse areas `0.1, 0.2, ..., 3.0`.
pub fn standard_theta_list() -> Vec<f64> {
    (1..=30).map(|k| k as f64 / 10.0).collect()
}

/// Pulse-area scan of the closed-form state at one ratio.
struct ChiCurve {
    chi: f64,
    thetas: Vec<f64>,
    entropies: Vec<f64>,
}

impl ChiCurve {
    fn new(chi: f64, theta_steps: usize) -> Result<Self> {
        // The state depends on Theta only through cos(Theta), so [0, pi]
        // covers the whole period.
        let thetas: Vec<f64> = (0..=theta_steps).map(|k| PI * k as f64 / theta_steps as f64).collect();
        let entropies = thetas.iter().map(|&t| entropy_at(chi, t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { chi, thetas, entropies })
    }

    /// Largest concurrence among the points of this curve with entropy
    /// exactly `m`, each crossing located by bisection.
    fn best_at(&self, m: f64) -> Result<Option<(f64, f64)>> {
        let mut best: Option<(f64, f64)> = None;
        for k in 0..self.thetas.len() - 1 {
            let (m0, m1) = (self.entropies[k], self.entropies[k + 1]);
            if (m0 - m) * (m1 - m) > 0.0 {
                continue;
            }
            let (mut a, mut b) = (self.thetas[k], self.thetas[k + 1]);
            let mut fa = m0 - m;
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = entropy_at(self.chi, mid)? - m;
                if fa * fm <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
                if b - a < 1e-13 {
                    break;
                }
            }
            let theta = 0.5 * (a + b);
            let rho = reduced_state_closed_form(&CouplingConfig::new(self.chi, theta)?)?;
            let c = measures::concurrence(&rho)?;
            if best.map_or(true, |(v, _)| c > v) {
                best = Some((c, theta));
            }
        }
        Ok(best)
    }
}

fn entropy_at(chi: f64, theta: f64) -> Result<f64> {
    Ok(measures::linear_entropy(&reduced_state_closed_form(&CouplingConfig::new(chi, theta)?)?))
}

/// Dense `(chi, Theta)` description of the states reachable from `|eg>|0>`
/// with `chi in [0, 40]`.
pub struct ReachableSet {
    curves: Vec<ChiCurve>,
    theta_steps: usize,
}

/// Best reachable concurrence at one linear entropy.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Reach {
    pub entropy: f64,
    pub frontier: f64,
    /// `None` when no reachable state has this entropy.
    pub best: Option<f64>,
    pub chi: f64,
    pub theta: f64,
}

impl Reach {
    pub fn gap(&self) -> f64 {
        match self.best {
            Some(b) => self.frontier - b,
            None => f64::INFINITY,
        }
    }
}

impl ReachableSet {
    pub fn new(chi_samples_per_side: usize, theta_steps: usize) -> Result<Self> {
        let curves = chi_samples(0.0, 40.0, chi_samples_per_side)?
            .into_iter()
            .map(|chi| ChiCurve::new(chi, theta_steps))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { curves, theta_steps })
    }

    /// Best concurrence at entropy `m`: grid search over `chi`, then
    /// golden-section refinement in `chi` around the best grid ratio.
    pub fn reach(&self, m: f64) -> Result<Reach> {
        let frontier = mems_concurrence_at(m);
        let mut best: Option<(f64, usize, f64)> = None;
        for (i, curve) in self.curves.iter().enumerate() {
            if let Some((c, theta)) = curve.best_at(m)? {
                if best.map_or(true, |(v, _, _)| c > v) {
                    best = Some((c, i, theta));
                }
            }
        }
        let Some((mut value, i, mut theta)) = best else {
            return Ok(Reach { entropy: m, frontier, best: None, chi: f64::NAN, theta: f64::NAN });
        };
        let mut chi = self.curves[i].chi;
        let lo = self.curves[i.saturating_sub(1)].chi;
        let hi = self.curves[(i + 1).min(self.curves.len() - 1)].chi;
        if hi > lo {
            let steps = self.theta_steps;
            let at = |x: f64| -> Result<f64> {
                Ok(ChiCurve::new(x, steps)?.best_at(m)?.map_or(f64::NEG_INFINITY, |(c, _)| c))
            };
            let (x, v) = golden_section_max(at, lo, hi, 1e-7 * hi.max(1.0))?;
            if v > value {
                value = v;
                chi = x;
                theta = ChiCurve::new(x, steps)?.best_at(m)?.map_or(theta, |(_, t)| t);
            }
        }
        Ok(Reach { entropy: m, frontier, best: Some(value), chi, theta })
    }
}

/// Reach profile on the entropy grid `M_j = j / resolution`, `j < resolution`.
pub fn coverage_profile(resolution: usize) -> Result<Vec<Reach>> {
    if resolution < 50 {
        return Err(Error::InvalidParameter(format!("coverage resolution must be >= 50, got {resolution}")));
    }
    let set = ReachableSet::new(200, 400)?;
    (0..resolution).map(|j| set.reach(j as f64 / resolution as f64)).collect()
}

/// Largest grid entropy `M*` such that at every grid entropy up to `M*` the
/// reachable concurrence is within [`COVERAGE_GAP`] of the MEMS frontier.
pub fn coverage_threshold(resolution: usize) -> Result<f64> {
    threshold_of(&coverage_profile(resolution)?)
}

pub fn threshold_of(profile: &[Reach]) -> Result<f64> {
    let mut threshold = None;
    for r in profile {
        if r.gap() <= COVERAGE_GAP {
            threshold = Some(r.entropy);
        } else {
            break;
        }
    }
    threshold.ok_or_else(|| Error::Consistency("frontier not reached even for pure states".into()))
}
