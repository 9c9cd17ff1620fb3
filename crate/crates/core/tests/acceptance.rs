//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! if any criterion fails.

use std::f64::consts::{SQRT_2, TAU};
use std::time::Instant;

use cavity_mems::analysis::{
    chi_local_min, global_max_bell_closed, global_max_concurrence_closed, global_max_concurrence_numeric, kink_scan,
    locate_two_excitation_peak, SearchParams,
};
use cavity_mems::cli;
use cavity_mems::dynamics::{default_oracle_steps, ode_oracle, reduced_state_closed_form, CouplingConfig, InitialState};
use cavity_mems::frontier::{self, mems_concurrence_at};
use cavity_mems::measures::{self, Measure};
use cavity_mems::qcore::partial_trace_field;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn c_m(chi: f64) -> Result<f64, String> {
    global_max_concurrence_closed(chi).map(|r| r.max_value).map_err(err)
}

fn b_m(chi: f64) -> Result<f64, String> {
    global_max_bell_closed(chi).map(|r| r.max_value).map_err(err)
}

fn maximal_entanglement_ratios() -> Outcome {
    let params = SearchParams::one_excitation();
    let mut worst_closed: f64 = 0.0;
    let mut worst_numeric: f64 = 0.0;
    for chi in [SQRT_2 - 1.0, SQRT_2 + 1.0] {
        worst_closed = worst_closed.max((c_m(chi)? - 1.0).abs());
        let numeric = global_max_concurrence_numeric(chi, InitialState::Eg, &params).map_err(err)?;
        worst_numeric = worst_numeric.max((numeric.max_value - 1.0).abs());
    }
    Ok((
        worst_closed <= 1e-12 && worst_numeric <= 1e-4,
        format!("closed |C_M - 1| = {worst_closed:.2e} (tol 1e-12), numeric = {worst_numeric:.2e} (tol 1e-4)"),
    ))
}

fn symmetric_coupling_value() -> Outcome {
    let d = (c_m(1.0)? - 0.5).abs();
    Ok((d <= 1e-12, format!("|C_M(1) - 0.5| = {d:.2e} (tol 1e-12)")))
}

fn local_minimum_point() -> Outcome {
    let x = (32f64.sqrt() - 5.0).sqrt();
    let v = c_m(x)?;
    let d = (v - x / 2.0).abs();
    let mut sign_change = true;
    for h in [1e-2, 1e-3, 1e-4] {
        sign_change &= c_m(x - h)? > v && c_m(x + h)? > v;
    }
    let located = (chi_local_min() - x).abs() < 1e-15;
    Ok((
        d <= 1e-9 && sign_change && located,
        format!("C_M({x:.9}) = {v:.9}, |C_M - x/2| = {d:.2e} (tol 1e-9), first differences change sign: {sign_change}"),
    ))
}

fn bell_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_bell: f64 = 0.0;
    for _ in 0..100 {
        let chi = 40.0 * (1.0 - rng.gen::<f64>());
        worst_bell = worst_bell.max((b_m(chi)? - b_m(1.0 / chi)?).abs());
    }
    let inside = [0.6, 0.7, 0.8, 0.9, 0.95, 1.05, 1.2, 1.5, 1.7];
    let outside = [0.05, 0.2, 0.4, 0.57, 1.0, 1.75, 2.5, 5.0, 20.0, 40.0];
    let mut asym_min = f64::INFINITY;
    for chi in inside {
        asym_min = asym_min.min((c_m(chi)? - c_m(1.0 / chi)?).abs());
    }
    let mut sym_max: f64 = 0.0;
    for chi in outside {
        sym_max = sym_max.max((c_m(chi)? - c_m(1.0 / chi)?).abs());
    }
    Ok((
        worst_bell <= 1e-12 && asym_min > 1e-6 && sym_max <= 1e-12,
        format!(
            "max |B(chi) - B(1/chi)| = {worst_bell:.2e} over 100 random chi (tol 1e-12); \
             min concurrence asymmetry inside window = {asym_min:.3e}; max outside = {sym_max:.2e}"
        ),
    ))
}

fn closed_form_dynamics() -> Outcome {
    let mut worst_ode: f64 = 0.0;
    for i in 0..20 {
        let chi = 0.05 + (5.0 - 0.05) * i as f64 / 19.0;
        for j in 0..20 {
            let theta = TAU * j as f64 / 19.0;
            let cfg = CouplingConfig::new(chi, theta).map_err(err)?;
            let steps = default_oracle_steps(&cfg, 1).map_err(err)?;
            let ode = partial_trace_field(&ode_oracle(&cfg, InitialState::Eg, steps).map_err(err)?).map_err(err)?;
            let closed = reduced_state_closed_form(&cfg).map_err(err)?;
            worst_ode = worst_ode.max(closed.trace_distance(&ode));
        }
    }
    let (mut worst_c, mut worst_b): (f64, f64) = (0.0, 0.0);
    for i in 0..50 {
        let chi = 0.02 + (10.0 - 0.02) * i as f64 / 49.0;
        for j in 0..50 {
            let theta = TAU * j as f64 / 49.0;
            let cfg = CouplingConfig::new(chi, theta).map_err(err)?;
            let rho = reduced_state_closed_form(&cfg).map_err(err)?;
            worst_c = worst_c.max((measures::concurrence_closed_form(&cfg) - measures::concurrence(&rho).map_err(err)?).abs());
            worst_b = worst_b.max((measures::bell_max_closed_form(&cfg) - measures::bell_max(&rho).map_err(err)?).abs());
        }
    }
    Ok((
        worst_ode < 1e-8 && worst_c < 1e-10 && worst_b < 1e-10,
        format!(
            "RK4 trace distance max {worst_ode:.2e} on 20x20 (tol 1e-8); concurrence {worst_c:.2e}, Bell {worst_b:.2e} on 50x50 (tol 1e-10)"
        ),
    ))
}

fn kink_at_sqrt3() -> Outcome {
    let kink = kink_scan(3f64.sqrt(), 0.05, 1e-3).map_err(err)?.gap;
    let smooth = kink_scan(0.5, 0.05, 1e-3).map_err(err)?.gap.max(kink_scan(2.5, 0.05, 1e-3).map_err(err)?.gap);
    Ok((kink > 10.0 * smooth, format!("second-difference gap {kink:.4e} at sqrt(3) vs {smooth:.4e} at reference points")))
}

fn two_excitation_peak() -> Outcome {
    let base = SearchParams::two_excitation();
    let doubled = SearchParams { horizon: 2.0 * base.horizon, ..base };
    let peak = locate_two_excitation_peak(0.15, 0.21, 1e-4, &base).map_err(err)?;
    let again = locate_two_excitation_peak(0.15, 0.21, 1e-4, &doubled).map_err(err)?;
    let same_chi = global_max_concurrence_numeric(peak.chi, InitialState::Ee, &doubled).map_err(err)?;
    let drift = (again.result.max_value - peak.result.max_value)
        .abs()
        .max((same_chi.max_value - peak.result.max_value).abs());
    let in_window = |x: f64| (0.16..=0.20).contains(&x);
    let p1 = peak.photon_distribution[1];
    Ok((
        in_window(peak.chi) && in_window(again.chi) && peak.result.max_value > 0.999 && p1 > 0.999 && drift < 1e-3,
        format!(
            "chi* = {:.4}, max C = {:.6} at u* = {:.3}, n=1 weight {:.6}; horizon {} -> chi* = {:.4}, max C = {:.6}; drift {:.2e} (tol 1e-3)",
            peak.chi,
            peak.result.max_value,
            peak.result.argmax_phase,
            p1,
            doubled.horizon,
            again.chi,
            again.result.max_value,
            drift
        ),
    ))
}

fn two_excitation_collapse() -> Outcome {
    let params = SearchParams::two_excitation();
    let at_one = global_max_concurrence_numeric(1.0, InitialState::Ee, &params).map_err(err)?.max_value;
    let mut sup: f64 = 0.0;
    let mut arg = 0.0;
    for k in 0..=9 {
        let chi = 0.95 + 0.005 * k as f64;
        let v = global_max_concurrence_numeric(chi, InitialState::Ee, &params).map_err(err)?.max_value;
        if v > sup {
            sup = v;
            arg = chi;
        }
    }
    Ok((
        at_one < 0.01 && sup > 0.45,
        format!("max C at chi=1: {at_one:.2e} (< 0.01); sup over [0.95, 0.995]: {sup:.4} at chi={arg:.3} (> 0.45)"),
    ))
}

fn frontier_coverage() -> Outcome {
    let threshold = frontier::coverage_threshold(200).map_err(err)?;
    let curves = frontier::trajectory_sweep(&frontier::standard_theta_list(), (0.0, 40.0), 200, Measure::Concurrence)
        .map_err(err)?;
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for curve in &curves {
        for p in &curve.points {
            worst = worst.max(p.value - mems_concurrence_at(p.entropy));
            count += 1;
        }
    }
    Ok((
        (0.55..=0.75).contains(&threshold) && worst <= 1e-9,
        format!(
            "coverage threshold M* = {threshold:.3} (gap tol {}); {count} trajectory points, max excess over MEMS {worst:.2e} (tol 1e-9)",
            frontier::COVERAGE_GAP
        ),
    ))
}

fn monotone_discrepancy_window() -> Outcome {
    let lo = chi_local_min();
    let grid: Vec<f64> = (1..=20).map(|k| lo + (1.0 - lo) * k as f64 / 21.0).collect();
    let c: Vec<f64> = grid.iter().map(|&x| c_m(x)).collect::<Result<_, _>>()?;
    let b: Vec<f64> = grid.iter().map(|&x| b_m(x)).collect::<Result<_, _>>()?;
    let c_up = c.windows(2).all(|w| w[1] > w[0]);
    let b_down = b.windows(2).all(|w| w[1] < w[0]);
    Ok((
        c_up && b_down,
        format!(
            "C_M {:.5} -> {:.5} strictly increasing: {c_up}; Bell {:.5} -> {:.5} strictly decreasing: {b_down}",
            c[0], c[19], b[0], b[19]
        ),
    ))
}

fn cli_determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["evolve", "--chi", "0.3", "--theta", "1.1"],
        &["evolve", "--chi", "2.0", "--theta", "0.4", "--initial", "ge"],
        &["evolve2", "--chi", "0.18", "--horizon", "20", "--coarse-step", "0.1"],
        &["fig", "1", "--chi-steps", "20"],
        &["fig", "2", "--chi-steps", "20"],
        &["fig", "3a"],
        &["fig", "3b"],
        &["fig", "4a", "--chi-min", "0.1", "--chi-max", "0.3", "--chi-steps", "3", "--horizon", "100"],
        &["fig", "4b", "--chi-min", "0.1", "--chi-max", "0.3", "--chi-steps", "3", "--horizon", "100"],
        &["frontier", "mems"],
        &["frontier", "werner", "--measure", "bell"],
        &["frontier", "mbvms", "--samples", "9", "--seed", "11"],
        &["symmetry"],
        &["global-max"],
        &["global-max", "--initial", "ee", "--chi-min", "0.2", "--chi-max", "0.5", "--chi-steps", "2", "--horizon", "50"],
    ];
    let dir = tempfile::tempdir().map_err(err)?;
    let mut differing = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{k}_{rep}.csv"));
            let mut argv = vec!["cavity-mems".to_string()];
            argv.extend(args.iter().map(|s| s.to_string()));
            argv.extend(["--out".to_string(), path.display().to_string()]);
            let code = cli::run(argv);
            if code != cli::EXIT_OK {
                return Ok((false, format!("{args:?} exited with {code}")));
            }
            outputs.push(std::fs::read(&path).map_err(err)?);
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            differing.push(args.join(" "));
        }
    }
    Ok((differing.is_empty(), format!("{} command configurations run twice; differing: {differing:?}", runs.len())))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("maximal-entanglement ratios", maximal_entanglement_ratios),
        ("symmetric-coupling value", symmetric_coupling_value),
        ("local-minimum point", local_minimum_point),
        ("Bell symmetry / concurrence asymmetry", bell_symmetry),
        ("closed-form dynamics", closed_form_dynamics),
        ("kink at sqrt(3)", kink_at_sqrt3),
        ("two-excitation maximal entanglement", two_excitation_peak),
        ("two-excitation collapse", two_excitation_collapse),
        ("frontier coverage", frontier_coverage),
        ("monotone-discrepancy window", monotone_discrepancy_window),
        ("CLI determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
