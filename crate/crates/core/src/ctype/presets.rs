use super::params::{CTypeParams, DEFAULT_COORDINATE_CAP};
use super::psi::build_psi;
use super::schedule::{Schedule, ScheduleMode, ScheduleSeeds};
use super::CTypeError;
use crate::exactnum::ExponentCap;

/// Named small schedules used by the CLI and the test suites.
///
/// - `shadow`: `psi2 = 2, 3, 2, 3, ...`, `delta0 = 8`, `tau0 = 1`; six blocks of
///   lengths `1, 52, 104, 208, 416, 832`. Admits a shadowing vector for `e_0`.
/// - `props`: two rows of `psi`, `tau0 = 30`, so every `|v_n|` is far below the
///   weight growth of the earlier blocks.
/// - `periodic`: two rows of `psi` over seven groups.
pub const PRESETS: [&str; 3] = ["shadow", "props", "periodic"];

pub fn preset_schedule(name: &str, mode: ScheduleMode) -> Result<Schedule, CTypeError> {
    let (i_max, j_max, mult, horizon, seeds, k_max) = match name {
        "shadow" => (1, 3, 3, 8, ScheduleSeeds { delta0: 8, tau0: 1, big_delta0: 1 }, 5),
        "props" => (2, 4, 1, 6, ScheduleSeeds { delta0: 2, tau0: 30, big_delta0: 2 }, 4),
        "periodic" => (2, 4, 1, 8, ScheduleSeeds { delta0: 1, tau0: 2, big_delta0: 2 }, 5),
        other => {
            return Err(CTypeError::InvalidArgument(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    Schedule::build(mode, seeds, build_psi(i_max, j_max, mult, horizon)?, k_max)
}

/// Structural preset realized through its last block.
pub fn preset_params(name: &str) -> Result<CTypeParams, CTypeError> {
    let s = preset_schedule(name, ScheduleMode::Structural)?;
    CTypeParams::realize(&s, s.last_block(), ExponentCap::from_env(), DEFAULT_COORDINATE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_realize() {
        for name in PRESETS {
            let p = preset_params(name).unwrap();
            println!("{name}: blocks {} b {:?}", p.blocks(), p.b);
            assert!(p.validate().is_ok());
        }
        assert!(preset_params("nope").is_err());
    }
}
