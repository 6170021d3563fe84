//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its PASS/FAIL line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lfc_core::assembly::{assemble_plant, AugmentedModel, ControllerGains, SystemParams};
use lfc_core::diesel::{governor_residues, DieselParams};
use lfc_core::lti::{eigenvalues, StateSpaceModel};
use lfc_core::sim::{input_vector, integrate, steady_state, Scenario, SimulationTrace};
use lfc_core::solar::boost::{run_switched, BoostParams, BoostState};
use lfc_core::solar::pv::open_circuit_voltage;
use lfc_core::solar::{
    build_solar_subsystem, mppt_operating_point, solve_pv_current, PvCellParams, SolarChannelParams,
};
use lfc_core::tuner::{tune_gains, TuneSpec};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn residue_identity() -> Outcome {
    let p = DieselParams::default();
    let (k1, k2) = governor_residues(&p).map_err(|e| e.to_string())?;
    let sum_err = (k1 + k2 - 0.3333).abs();
    if sum_err > 1e-12 {
        return Err(format!("K1 + K2 - Kd = {sum_err:e}"));
    }
    let one = Complex::new(1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let s = Complex::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let direct = (one + s * 1.0) * 0.3333 / ((one + s * 2.0) * (one + s * 0.025));
        let split = k1 / (one + s * p.td2) + k2 / (one + s * p.td3);
        worst = worst.max((split - direct).norm() / direct.norm());
    }
    check(
        worst <= 1e-10,
        format!("K1 + K2 = {}, worst relative mismatch {worst:.2e}", k1 + k2),
    )
}

fn droop_oracle() -> Outcome {
    let oracle =
        -0.01 / (1.0 / 72.0 + 0.3333 / 5.0 + 0.9969 * (1.0 - 0.003333) / (1.0 + 0.9969 - 0.003333));
    let plant = assemble_plant(&SystemParams::default()).map_err(|e| e.to_string())?;
    let trace = integrate(
        &plant,
        &Scenario::new(120.0, 1e-3).with_step("dPl", 0.01, 0.0),
    )
    .map_err(|e| e.to_string())?;
    let dfs = trace.final_value("dFs").unwrap();
    let w = input_vector(&plant, &[("dPl", 0.01)]).unwrap();
    let eq = steady_state(&plant, &w).map_err(|e| e.to_string())?[0];
    check(
        (dfs - oracle).abs() <= 1e-5 && (eq - oracle).abs() <= 1e-9,
        format!("oracle {oracle:.9}, simulated {dfs:.9}, equilibrium {eq:.9}"),
    )
}

fn zero_steady_state_error(gains: &ControllerGains) -> Outcome {
    let model =
        AugmentedModel::build(&SystemParams::default(), gains).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for input in ["dPl", "dPiw", "dPis"] {
        let sc = Scenario::new(200.0, 1e-3).with_step(input, 0.01, 1.0);
        let trace = integrate(model.closed_loop(), &sc).map_err(|e| e.to_string())?;
        for state in ["dFs", "dFt"] {
            worst = worst.max(trace.final_value(state).unwrap().abs());
        }
    }
    check(
        worst < 1e-6,
        format!("max |dFs|, |dFt| at 200 s = {worst:.2e}"),
    )
}

fn augmentation_structure() -> Outcome {
    let params = SystemParams::default();
    let model =
        AugmentedModel::build(&params, &ControllerGains::default()).map_err(|e| e.to_string())?;
    let closed = eigenvalues(model.ahat()).map_err(|e| e.to_string())?;
    let mut open = eigenvalues(model.open_loop().a()).map_err(|e| e.to_string())?;
    let zeros = closed.iter().filter(|l| l.norm() < 1e-9).count();
    if zeros != 2 || closed.len() != 12 {
        return Err(format!("{zeros} near-zero eigenvalues of {}", closed.len()));
    }
    let mut worst = 0.0f64;
    for l in closed.iter().filter(|l| l.norm() >= 1e-9) {
        let (j, d) = open
            .iter()
            .enumerate()
            .map(|(j, o)| (j, (o - l).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or("more nonzero eigenvalues than plant eigenvalues")?;
        worst = worst.max(d);
        open.remove(j);
    }
    check(
        worst <= 1e-6 && open.is_empty(),
        format!("2 zero eigenvalues, worst plant match {worst:.2e}"),
    )
}

fn rk4_order() -> Outcome {
    let decay = StateSpaceModel::new(
        DMatrix::from_element(1, 1, -1.0),
        DMatrix::zeros(1, 0),
        DMatrix::zeros(1, 0),
        &["x"],
        &[],
        &[],
    )
    .map_err(|e| e.to_string())?;
    let err = |dt: f64| -> Result<f64, String> {
        let mut sc = Scenario::new(1.0, dt);
        sc.initial = Some(DVector::from_element(1, 1.0));
        let trace = integrate(&decay, &sc).map_err(|e| e.to_string())?;
        Ok((trace.final_value("x").unwrap() - (-1.0f64).exp()).abs())
    };
    let ratio = err(0.1)? / err(0.05)?;
    check(
        (14.0..=18.0).contains(&ratio),
        format!("error ratio {ratio:.4}"),
    )
}

fn max_abs_diff(a: &SimulationTrace, b: &SimulationTrace, scale_b: f64) -> f64 {
    let ds = (&a.states - &b.states * scale_b).amax();
    let dy = (&a.outputs - &b.outputs * scale_b).amax();
    ds.max(dy)
}

fn linearity(gains: &ControllerGains) -> Outcome {
    let model =
        AugmentedModel::build(&SystemParams::default(), gains).map_err(|e| e.to_string())?;
    let sys = model.closed_loop();
    let run = |sc: Scenario| integrate(sys, &sc).map_err(|e| e.to_string());
    let base = Scenario::new(30.0, 1e-3);
    let singles = [
        ("dPl", 0.01, 1.0),
        ("dPiw", -0.02, 2.5),
        ("dPis", 0.015, 4.0),
    ];
    let mut combined = base.clone();
    let mut sum: Option<SimulationTrace> = None;
    for (input, mag, onset) in singles {
        combined = combined.with_step(input, mag, onset);
        let t = run(base.clone().with_step(input, mag, onset))?;
        sum = Some(match sum {
            None => t,
            Some(mut acc) => {
                acc.states += &t.states;
                acc.outputs += &t.outputs;
                acc
            }
        });
    }
    let all = run(combined)?;
    let superposition = max_abs_diff(&all, sum.as_ref().unwrap(), 1.0);
    let single = run(base.clone().with_step("dPl", 0.01, 1.0))?;
    let double = run(base.with_step("dPl", 0.02, 1.0))?;
    let scaling = max_abs_diff(&double, &single, 2.0);
    check(
        all.states.ncols() == 12 && superposition <= 1e-9 && scaling <= 1e-9,
        format!("superposition {superposition:.2e}, scaling {scaling:.2e}"),
    )
}

/// Single-diode current by plain bisection on the implicit equation.
fn bisection_current(p: &PvCellParams, v: f64) -> f64 {
    let vt = p.aq * p.k * (p.temperature + 273.15) / p.q;
    let iph = (p.isc + p.ki * (p.temperature - 25.0)) * p.irradiance / 1000.0;
    let f = |i: f64| iph - p.isat * (((v + i * p.rs) / vt).exp() - 1.0) - i;
    let (mut lo, mut hi) = (-10.0 * p.isc, 10.0 * p.isc);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn pv_oracle() -> Outcome {
    let p = PvCellParams::default();
    let voc = open_circuit_voltage(&p);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let v = voc * k as f64 / 99.0;
        let i = solve_pv_current(&p, v).map_err(|e| e.to_string())?;
        worst = worst.max((i - bisection_current(&p, v)).abs());
    }
    let sweep_best = (0..)
        .map(|k| k as f64 * 1e-4)
        .take_while(|&v| v <= voc)
        .map(|v| v * bisection_current(&p, v))
        .fold(f64::NEG_INFINITY, f64::max);
    let mpp = mppt_operating_point(&p, 0.01).map_err(|e| e.to_string())?;
    let rel = (mpp.power - sweep_best).abs() / sweep_best;
    check(
        worst <= 1e-8 && rel <= 1e-5,
        format!(
            "current mismatch {worst:.2e} A, MPP {:.6} W at {:.6} V vs sweep {sweep_best:.6} W (rel {rel:.2e})",
            mpp.power, mpp.voltage
        ),
    )
}

fn boost_averaging() -> Outcome {
    let p = BoostParams::default();
    let vpv = 12.0;
    // 50 ms is fifty RC time constants
    let run = run_switched(&p, vpv, BoostState { il: 0.0, vo: 0.0 }, 5000, 100)
        .map_err(|e| e.to_string())?;
    let ratio = run.mean_vo_last_period / vpv;
    check(
        (ratio - 2.0).abs() <= 0.04,
        format!("vo / Vpv = {ratio:.5}"),
    )
}

fn solar_realization() -> Outcome {
    let m = build_solar_subsystem(&SolarChannelParams::default()).map_err(|e| e.to_string())?;
    let ev = eigenvalues(m.a()).map_err(|e| e.to_string())?;
    // roots of s^2 + 100 s + 50
    let disc = (100.0f64 * 100.0 - 4.0 * 50.0).sqrt();
    let roots = [(-100.0 + disc) / 2.0, (-100.0 - disc) / 2.0];
    let eig_err = ev
        .iter()
        .zip(roots)
        .map(|(l, r)| (l.re - r).abs() + l.im.abs())
        .fold(0.0, f64::max);
    let eig_ref = ev
        .iter()
        .zip([-0.5025, -99.4975])
        .map(|(l, r)| (l.re - r).abs())
        .fold(0.0, f64::max);
    let w = input_vector(&m, &[("us", 1.0)]).unwrap();
    let x = steady_state(&m, &w).map_err(|e| e.to_string())?;
    let y = (m.c() * &x + m.dc() * DVector::from_element(1, 1.0))[0];
    let dc_err = (y - 0.20 * 900.0 / 50.0).abs();
    check(
        ev.len() == 2 && eig_err <= 1e-9 && eig_ref <= 1e-4 && dc_err <= 1e-9,
        format!(
            "eigenvalues {:.6}, {:.6}; DC gain {y:.12}",
            ev[0].re, ev[1].re
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let tuned = tune_gains(&SystemParams::default(), &TuneSpec::default())
        .map(|r| r.gains)
        .map_err(|e| format!("tuner failed: {e}"));
    println!("tuned gains: {tuned:?}");

    let with_gains = |f: fn(&ControllerGains) -> Outcome| match &tuned {
        Ok(g) => f(g),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("residue identity", residue_identity()),
        ("droop oracle", droop_oracle()),
        (
            "zero steady-state error",
            with_gains(zero_steady_state_error),
        ),
        ("augmentation structure", augmentation_structure()),
        ("RK4 order", rk4_order()),
        ("linearity", with_gains(linearity)),
        ("PV oracle", pv_oracle()),
        ("boost averaging", boost_averaging()),
        ("solar realization", solar_realization()),
    ];

    let mut failed = 0;
    for (n, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", n + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
