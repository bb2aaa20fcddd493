//! State files: `{"registers":[{"label":"R","dim":2},…]}` plus either
//! `"matrix":[[[re,im],…],…]` (density operator) or `"amplitudes":[[re,im],…]`
//! (pure state). Writers emit 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use qsr_core::qmat::{DensityOperator, Matrix, Register, RegisterSystem, StateVector, C64};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterEntry {
    label: String,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    registers: Vec<RegisterEntry>,
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    amplitudes: Option<Vec<[f64; 2]>>,
}

/// A loaded state, pure or mixed.
#[derive(Clone, Debug)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl State {
    pub fn system(&self) -> &RegisterSystem {
        match self {
            State::Pure(v) => v.system(),
            State::Mixed(rho) => rho.system(),
        }
    }

    pub fn density(&self) -> DensityOperator {
        match self {
            State::Pure(v) => v.to_density(),
            State::Mixed(rho) => rho.clone(),
        }
    }

    /// The state vector; mixed inputs are rejected.
    pub fn pure(&self, role: &str) -> CliResult<&StateVector> {
        match self {
            State::Pure(v) => Ok(v),
            State::Mixed(_) => Err(CliError::Usage(format!(
                "{role} must be given as amplitudes (a pure state)"
            ))),
        }
    }
}

fn complex(e: [f64; 2]) -> C64 {
    C64::new(e[0], e[1])
}

/// Parses a state file's text; `origin` names it in diagnostics.
pub fn parse_state(text: &str, origin: &Path) -> CliResult<State> {
    let parse_err = |message: String| CliError::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let file: StateFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let registers = file
        .registers
        .into_iter()
        .map(|r| Register {
            label: r.label,
            dim: r.dim,
        })
        .collect();
    let system = RegisterSystem::new(registers).map_err(|e| parse_err(e.to_string()))?;
    let d = system.dim();
    match (file.matrix, file.amplitudes) {
        (Some(rows), None) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(parse_err(format!("matrix must be {d} x {d}")));
            }
            let data = rows.into_iter().flatten().map(complex).collect();
            let rho = DensityOperator::new(system, Matrix::from_vec(d, d, data))
                .map_err(|e| parse_err(e.to_string()))?;
            Ok(State::Mixed(rho))
        }
        (None, Some(amps)) => {
            if amps.len() != d {
                return Err(parse_err(format!(
                    "expected {d} amplitudes, found {}",
                    amps.len()
                )));
            }
            let v = StateVector::new(system, amps.into_iter().map(complex).collect())
                .map_err(|e| parse_err(e.to_string()))?;
            Ok(State::Pure(v))
        }
        _ => Err(parse_err(
            "exactly one of `matrix` and `amplitudes` is required".into(),
        )),
    }
}

pub fn read_state(path: &Path) -> CliResult<State> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_state(&text, path)
}

fn push_complex(out: &mut String, z: C64) {
    let _ = write!(out, "[{:.16e},{:.16e}]", z.re, z.im);
}

/// Serializes in the state-file format.
pub fn write_state(state: &State) -> String {
    let mut out = String::from("{\"registers\":[");
    for (i, r) in state.system().registers().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&serde_json::json!({"label": r.label, "dim": r.dim}).to_string());
    }
    out.push(']');
    match state {
        State::Pure(v) => {
            out.push_str(",\"amplitudes\":[");
            for (i, &z) in v.amplitudes().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_complex(&mut out, z);
            }
            out.push(']');
        }
        State::Mixed(rho) => {
            out.push_str(",\"matrix\":[");
            let d = rho.dim();
            for i in 0..d {
                out.push_str(if i > 0 { ",[" } else { "[" });
                for (j, &z) in rho.matrix().row(i).iter().enumerate() {
                    if j > 0 {
                        out.push(',');
                    }
                    push_complex(&mut out, z);
                }
                out.push(']');
            }
            out.push(']');
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qsr_core::random;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pure_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = RegisterSystem::from_pairs(&[("R", 2), ("C", 3)]).unwrap();
        let v = random::pure_state(&mut rng, sys);
        let back = parse_state(&write_state(&State::Pure(v.clone())), Path::new("mem")).unwrap();
        let back = back.pure("state").unwrap();
        assert_eq!(back.amplitudes(), v.amplitudes());
        assert_eq!(back.system(), v.system());
    }

    #[test]
    fn mixed_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::full_rank_state(&mut rng, RegisterSystem::qubits(&["A", "B"]).unwrap());
        let back = parse_state(&write_state(&State::Mixed(rho.clone())), Path::new("mem")).unwrap();
        assert_eq!(back.density().matrix().as_slice(), rho.matrix().as_slice());
    }

    #[test]
    fn malformed_inputs_are_rejected_with_location() {
        let err = parse_state("{\"registers\": [", Path::new("bad.json")).unwrap_err();
        assert!(err.to_string().contains("bad.json") && err.to_string().contains("line"));
        let both = r#"{"registers":[{"label":"C","dim":2}],"amplitudes":[[1,0],[0,0]],"matrix":[[[1,0],[0,0]],[[0,0],[0,0]]]}"#;
        assert!(parse_state(both, Path::new("x")).is_err());
        let short = r#"{"registers":[{"label":"C","dim":2}],"amplitudes":[[1,0]]}"#;
        assert!(parse_state(short, Path::new("x")).is_err());
        let unnormalized = r#"{"registers":[{"label":"C","dim":2}],"amplitudes":[[1,0],[1,0]]}"#;
        assert!(parse_state(unnormalized, Path::new("x")).is_err());
    }
}
