//! One function per subcommand.

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::Path;

use qbroadcast::analytic::{f2_two_qubit, power_upsilon, ThetaState};
use qbroadcast::broadcast::{
    broadcasting_power_sampled, channel_broadcast_fidelity, ensemble_fidelity,
    pure_dual_certificate, unilocal_fidelity_piani_variant, unilocal_fidelity_with, unilocal_sdp,
    uqcm_choi, xi_choi, BroadcastOptions, BroadcastResult, ChoiMatrix, SymmetryMode,
};
use qbroadcast::discord::{
    avg_loss, discord_one_sided, discord_two_sided, measure_prepare_broadcast, BlochAngles, SideMap,
};
use qbroadcast::qmat::fidelity_eigen;
use qbroadcast::sdp::{fidelity_sdp_certified, RealSdp};
use rayon::prelude::*;
use serde_json::json;

use crate::error::CliError;
use crate::inputs::{canonical, load_choi, load_ensemble, load_state};
use crate::report::{sig9, Results};
use crate::{
    BroadcastArgs, Command, DiscordArgs, EnsembleArgs, FidelityArgs, PowerArgs, SweepArgs,
    Symmetry, Variant,
};

/// Copy counts used for the measure-and-prepare loss check.
const LOSS_CHECK_COPIES: [usize; 3] = [1, 2, 3];

pub fn run(command: &Command) -> Result<Results, CliError> {
    match command {
        Command::Fidelity(a) => fidelity(a),
        Command::Broadcast(a) => broadcast(a),
        Command::SweepTheta(a) => sweep_theta(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Discord(a) => discord(a),
        Command::Power(a) => power(a),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn write_choi(path: &Path, choi: &ChoiMatrix) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&choi.to_json()).expect("serializable matrix");
    write_file(path, &text)
}

fn record_result(out: &mut Results, r: &BroadcastResult) {
    out.set("value", r.value);
    out.set("dual_value", r.dual_value);
    out.set("gap", r.gap);
    out.set("certified", r.is_certified());
    out.set("iterations", r.iterations);
}

fn fidelity(a: &FidelityArgs) -> Result<Results, CliError> {
    let rho = load_state(&a.rho)?;
    let sigma = load_state(&a.sigma)?;
    let mut out = Results::new();
    out.input(canonical(&rho));
    out.input(canonical(&sigma));
    let cert = fidelity_sdp_certified(&rho, &sigma)?;
    let eigen = fidelity_eigen(&rho, &sigma)?;
    out.set("fidelity_sdp", cert.value);
    out.set("fidelity_eigen", eigen);
    out.set("difference", (cert.value - eigen).abs());
    out.set("dual_value", cert.dual_value);
    out.set("gap", cert.gap);
    out.set("iterations", cert.iterations);
    Ok(out)
}

fn broadcast(a: &BroadcastArgs) -> Result<Results, CliError> {
    let rho = load_state(&a.rho)?;
    let mut out = Results::new();
    out.input(canonical(&rho));
    out.input(format!(
        "n={};variant={:?};symmetry={:?};tol={}",
        a.n, a.variant, a.symmetry, a.tol
    ));
    let symmetry = match a.symmetry {
        Symmetry::Projected => SymmetryMode::Projected,
        Symmetry::Explicit => SymmetryMode::Explicit,
    };
    if let Some(path) = &a.dump_sdp {
        let problem = unilocal_sdp(&rho, a.n, symmetry)?;
        write_file(path, &RealSdp::from_problem(&problem).dump())?;
        out.set("sdp_dump", path.display().to_string());
    }
    let result = match a.variant {
        Variant::Standard => {
            let opts = BroadcastOptions {
                tol: a.tol,
                symmetry,
            };
            unilocal_fidelity_with(&rho, a.n, &opts)?
        }
        Variant::Piani => unilocal_fidelity_piani_variant(&rho, a.n)?,
    };
    out.set("variant", format!("{:?}", a.variant).to_lowercase());
    out.set("n", a.n);
    record_result(&mut out, &result);
    if a.dual {
        let cert = pure_dual_certificate(&rho, a.n)?;
        out.set("dual_certificate_value", cert.value);
        out.set(
            "dual_certificate_lmi_max_eigenvalue",
            cert.lmi_max_eigenvalue,
        );
        out.set(
            "dual_certificate_primal_difference",
            (cert.value - result.value).abs(),
        );
    }
    if let Some(path) = &a.emit_choi {
        write_choi(path, &result.choi)?;
        out.set("choi", path.display().to_string());
    }
    Ok(out)
}

struct SweepRow {
    theta: f64,
    sdp: f64,
    analytic: f64,
    via_xi: f64,
    via_uqcm: f64,
}

fn sweep_theta(a: &SweepArgs) -> Result<Results, CliError> {
    if a.n != 2 {
        return Err(CliError::Input(format!(
            "the closed-form columns are defined for n = 2 only, got n = {}",
            a.n
        )));
    }
    if a.points < 2 {
        return Err(CliError::Input(format!(
            "--points must be at least 2, got {}",
            a.points
        )));
    }
    let xi = xi_choi();
    let uqcm = uqcm_choi(2);
    let rows = (1..=a.points)
        .into_par_iter()
        .map(|i| {
            let theta = FRAC_PI_4 * i as f64 / a.points as f64;
            let state = ThetaState::new(theta)?;
            let psi = state.density();
            let sdp = unilocal_fidelity_with(&psi, 2, &BroadcastOptions::default())?;
            Ok(SweepRow {
                theta,
                sdp: sdp.value,
                analytic: f2_two_qubit(state),
                via_xi: channel_broadcast_fidelity(&xi, &psi)?,
                via_uqcm: channel_broadcast_fidelity(&uqcm, &psi)?,
            })
        })
        .collect::<Result<Vec<SweepRow>, CliError>>()?;
    let mut csv = String::from("theta,f2_sdp,f2_analytic,f2_via_Xi,f2_via_UQCM\n");
    for r in &rows {
        let fields = [r.theta, r.sdp, r.analytic, r.via_xi, r.via_uqcm].map(sig9);
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    write_file(&a.out, &csv)?;
    let mut out = Results::new();
    out.input(format!("n={};points={}", a.n, a.points));
    out.set("out", a.out.display().to_string());
    out.set("rows", rows.len());
    let worst = rows
        .iter()
        .map(|r| (r.sdp - r.analytic).abs())
        .fold(0.0, f64::max);
    out.set("max_abs_sdp_minus_analytic", worst);
    Ok(out)
}

fn ensemble(a: &EnsembleArgs) -> Result<Results, CliError> {
    let eta = load_ensemble(a.ensemble.as_deref(), &a.members)?;
    let mut out = Results::new();
    for (p, rho) in eta.members() {
        out.input(format!("{p}"));
        out.input(canonical(rho));
    }
    out.input(format!("n={}", a.n));
    let result = ensemble_fidelity(&eta, a.n)?;
    out.set("members", eta.members().len());
    out.set("n", a.n);
    record_result(&mut out, &result);
    if let Some(path) = &a.emit_choi {
        write_choi(path, &result.choi)?;
        out.set("choi", path.display().to_string());
    }
    Ok(out)
}

fn angles_json(a: &BlochAngles) -> serde_json::Value {
    json!({ "polar": a.polar, "azimuth": a.azimuth })
}

fn discord(a: &DiscordArgs) -> Result<Results, CliError> {
    let rho = load_state(&a.rho)?;
    if rho.dims() != [2, 2] {
        return Err(CliError::Input(format!(
            "discord needs a two-qubit state, got subsystem dims {:?}",
            rho.dims()
        )));
    }
    let mut out = Results::new();
    out.input(canonical(&rho));
    out.input(format!("two_sided={}", a.two_sided));
    let result = if a.two_sided {
        discord_two_sided(&rho)?
    } else {
        discord_one_sided(&rho)?
    };
    out.set("label", "upper bound (projective search)");
    out.set("sides", if a.two_sided { "two" } else { "one" });
    out.set("discord", result.value);
    out.set("mutual_information", result.mutual_information);
    out.set("classical_information", result.classical_information);
    if let Some(m) = &result.measurement_a {
        out.set("measurement_a", angles_json(m));
    }
    if let Some(m) = &result.measurement_b {
        out.set("measurement_b", angles_json(m));
    }
    let povm_a = result.measurement_a.expect("A is always measured").povm();
    let mut losses = Vec::new();
    for n in LOSS_CHECK_COPIES {
        let lambda = measure_prepare_broadcast(&povm_a, n)?;
        let gamma = match &result.measurement_b {
            Some(m) => SideMap::Broadcast(measure_prepare_broadcast(&m.povm(), n)?),
            None => SideMap::Identity,
        };
        losses.push(avg_loss(&rho, &lambda, &gamma)?);
    }
    let spread = losses
        .iter()
        .map(|l| (l - result.value).abs())
        .fold(0.0, f64::max);
    out.set("measure_prepare_loss", losses);
    out.set("measure_prepare_loss_max_deviation", spread);
    Ok(out)
}

fn power(a: &PowerArgs) -> Result<Results, CliError> {
    let mut out = Results::new();
    let (name, j) = match a.channel.as_str() {
        "uqcm" => ("uqcm".to_string(), uqcm_choi(a.d)),
        "xi" => {
            if a.d != 2 {
                return Err(CliError::Input(format!(
                    "xi acts on qubits, got --d {}",
                    a.d
                )));
            }
            ("xi".to_string(), xi_choi())
        }
        path => (path.to_string(), load_choi(path)?),
    };
    out.input(serde_json::to_string(&j.to_json()).expect("serializable matrix"));
    out.input(format!("samples={}", a.samples));
    out.seed(a.seed);
    let estimate = broadcasting_power_sampled(&j, a.samples, a.seed)?;
    let d = j.in_dim();
    out.set("channel", name);
    out.set("d", d);
    out.set("samples", a.samples);
    out.set("power_upper_bound", estimate.value);
    out.set("phi_value", estimate.phi_value);
    let min_sample = estimate
        .samples
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    out.set("min_sample", min_sample);
    out.set("analytic_bound", power_upsilon(d)?);
    Ok(out)
}
