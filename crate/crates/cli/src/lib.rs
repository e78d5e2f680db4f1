//! Library side of the `dsl` command: scenario parsing and execution.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod run;
pub mod scenario;

pub use run::{run, Report, Status, SUMMARY_FILE};
pub use scenario::{parse_scenario, parse_scenario_str, Kind, Scenario};

/// Exit code for unusable configuration or command-line input.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<dsl_core::Error> for CliError {
    fn from(e: dsl_core::Error) -> Self {
        match e {
            dsl_core::Error::Io(m) => CliError::Io(m),
            other => CliError::Solver(other.to_string()),
        }
    }
}

/// Text printed by `dsl --version`: the version and the SI constants.
pub fn constants_table() -> String {
    use dsl_core::constants::{C_SI, ELECTRON_MASS_SI, G_SI, HBAR_SI, NEUTRON_MASS_SI};
    let rows = [
        ("hbar", HBAR_SI, "J s"),
        ("G", G_SI, "m^3 kg^-1 s^-2"),
        ("c", C_SI, "m s^-1"),
        ("m_e", ELECTRON_MASS_SI, "kg"),
        ("m_n", NEUTRON_MASS_SI, "kg"),
    ];
    let mut out = format!("dsl {}\n", env!("CARGO_PKG_VERSION"));
    out.push_str(&format!("{:<6} {:<24} {}\n", "name", "value", "unit"));
    for (name, value, unit) in rows {
        out.push_str(&format!("{name:<6} {value:<24e} {unit}\n"));
    }
    out
}
