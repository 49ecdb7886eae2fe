//! Named built-in states and matrix files.

use std::fs;

use nalgebra::DVector;
use qbroadcast::analytic::ThetaState;
use qbroadcast::broadcast::{ChoiMatrix, Ensemble};
use qbroadcast::qmat::{parse_matrix_json, ComplexMatrix, DensityMatrix, MatrixJson, C64};

use crate::error::CliError;

pub const BUILTIN_HELP: &str = "\
A state is a path to a matrix JSON file or one of the built-in names:
  phi2, phi3       maximally entangled state of two qubits / qutrits
  theta:<radians>  cos t|00> + sin t|11> for t in [0, pi/4]
  cc               (|00><00| + |11><11|)/2
  product          |+><+| (x) |0><0|
  ket0, ket1, plus single-qubit pure states
  maxmixed:<d>     I/d";

pub fn read_file(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))
}

fn ket(amplitudes: &[f64], dims: &[usize]) -> DensityMatrix {
    let v = nalgebra_vector(amplitudes);
    DensityMatrix::pure(&v, dims).expect("normalized built-in state")
}

fn nalgebra_vector(amplitudes: &[f64]) -> DVector<C64> {
    DVector::from_iterator(
        amplitudes.len(),
        amplitudes.iter().map(|&a| C64::new(a, 0.0)),
    )
}

fn parse_number<T: std::str::FromStr>(name: &str, text: &str) -> Result<T, CliError> {
    text.parse()
        .map_err(|_| CliError::Input(format!("cannot parse {name} from {text:?}")))
}

/// Resolves a built-in name or reads a matrix JSON file.
pub fn load_state(spec: &str) -> Result<DensityMatrix, CliError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let state = match spec {
        "phi2" => DensityMatrix::maximally_entangled(2),
        "phi3" => DensityMatrix::maximally_entangled(3),
        "cc" => {
            let m = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]).set_dims(&[2, 2])?;
            DensityMatrix::new(m)?
        }
        "product" => ket(&[h, 0.0, h, 0.0], &[2, 2]),
        "ket0" => ket(&[1.0, 0.0], &[2]),
        "ket1" => ket(&[0.0, 1.0], &[2]),
        "plus" => ket(&[h, h], &[2]),
        _ => {
            if let Some(t) = spec.strip_prefix("theta:") {
                let theta: f64 = parse_number("theta", t)?;
                if theta == 0.0 {
                    eprintln!("warning: theta = 0 lies outside (0, pi/4]; using |00>, the limit state with fidelity 1");
                    ket(&[1.0, 0.0, 0.0, 0.0], &[2, 2])
                } else {
                    ThetaState::new(theta)?.density()
                }
            } else if let Some(d) = spec.strip_prefix("maxmixed:") {
                let d: usize = parse_number("dimension", d)?;
                if d == 0 {
                    return Err(CliError::Input(
                        "maxmixed needs a positive dimension".into(),
                    ));
                }
                DensityMatrix::maximally_mixed(d)
            } else {
                let m = parse_matrix_json(&read_file(spec)?)
                    .map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
                DensityMatrix::new(m).map_err(|e| CliError::Input(format!("{spec}: {e}")))?
            }
        }
    };
    Ok(state)
}

/// Ensemble from a JSON file, or from `p:state` member specifications.
pub fn load_ensemble(file: Option<&str>, members: &[String]) -> Result<Ensemble, CliError> {
    match (file, members.is_empty()) {
        (Some(path), true) => Ensemble::from_json(&read_file(path)?)
            .map_err(|e| CliError::Input(format!("{path}: {e}"))),
        (None, false) => {
            let parsed = members
                .iter()
                .map(|m| {
                    let (p, state) = m.split_once(':').ok_or_else(|| {
                        CliError::Input(format!("member {m:?} is not of the form <p>:<state>"))
                    })?;
                    Ok((parse_number("probability", p)?, load_state(state)?))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Ensemble::new(parsed)?)
        }
        _ => Err(CliError::Input(
            "give either --ensemble <file> or one or more --member <p>:<state>".into(),
        )),
    }
}

/// Reads a Choi matrix export.
pub fn load_choi(path: &str) -> Result<ChoiMatrix, CliError> {
    let j: MatrixJson = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    ChoiMatrix::from_json(&j).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

/// Canonical serialization used for the input digest.
pub fn canonical(rho: &DensityMatrix) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(rho.as_matrix())).expect("serializable matrix")
}
