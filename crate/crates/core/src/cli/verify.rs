use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::args::{Emit, ModeArg, Suite, VerifyArgs};
use super::commands::config;
use super::{CliError, Outcome};
use crate::ctype::{
    apply, apply_power, build_psi, periodicity_failure, preset_params, preset_schedule, PsiMap, Schedule, ScheduleMode,
    ScheduleSeeds, SparseVec, PRESETS,
};
use crate::densities::{duality_check, monotonicity_check, BlockTail, IndexSet, WeightSeq};
use crate::dynlab::{
    build_shadowing_vector, hitting_density, prop50_check_all, prop51_check, random_sparse, Ball, HitsOptions,
};
use crate::exactnum::{ratio, Dyadic};
use crate::sampling::{random_index_set, random_weight, trial_rng};
use crate::weightforge::{
    alpha_sequence, check_multi_bound, check_thm1_bound, synthesize_weight_multi, synthesize_weight_thm1,
    PartitionWithBoundedGaps, DEFAULT_ALPHA_CAP,
};

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn row(suite: &'static str, name: &'static str, pass: bool, detail: impl Into<String>) -> CheckRow {
    CheckRow { suite, name, pass, detail: detail.into() }
}

fn count_failures(results: &[bool]) -> (bool, String) {
    let bad = results.iter().filter(|ok| !**ok).count();
    (bad == 0, format!("{} of {} trials pass", results.len() - bad, results.len()))
}

fn densities_suite(seed: u64, trials: u64) -> Vec<CheckRow> {
    let results: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let set = random_index_set(&mut rng);
            let w = random_weight(&mut rng);
            let n = rng.gen_range(1..=10_000u64);
            duality_check(&set, &w, n).unwrap_or(false)
        })
        .collect();
    let (ok, detail) = count_failures(&results);
    let mut rows = vec![row("densities", "duality", ok, detail)];
    let chain = monotonicity_check(&IndexSet::quartic_blocks(), &WeightSeq::Harmonic, &WeightSeq::Unit, 1 << 16, &ratio(1, 2));
    let ok = chain.as_ref().is_ok_and(|c| c.holds(&ratio(0, 1)));
    rows.push(row("densities", "monotone_chain_quartic_harmonic", ok, chain.as_ref().map_or_else(
        |e| e.to_string(),
        |c| format!("{:.4} <= {:.4} <= {:.4} <= {:.4}", c.lower_b.to_f64(), c.lower_a.to_f64(), c.upper_a.to_f64(), c.upper_b.to_f64()),
    )));
    rows
}

fn forge_suite() -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let set = IndexSet::quartic_blocks();
    let delta = ratio(2, 3);
    let r = synthesize_weight_thm1(&set, &delta, 1 << 16);
    let ok = r.as_ref().is_ok_and(|(plan, w)| {
        let ns: Vec<u64> = (1..=*plan.breakpoints.last().unwrap()).collect();
        plan.verify(&set) && w.in_family() && check_thm1_bound(plan, &set, &delta, &ns).is_none()
    });
    let detail = r.as_ref().map_or_else(|e| e.to_string(), |(p, _)| format!("{} blocks", p.blocks()));
    rows.push(row("forge", "thm1_quartic_blocks", ok, detail));
    let sets = [IndexSet::evens(), IndexSet::odds()];
    let deltas = [ratio(1, 2), ratio(1, 2)];
    let r = synthesize_weight_multi(&sets, &deltas, &PartitionWithBoundedGaps::even_odd(), 1 << 16);
    let ok = r.as_ref().is_ok_and(|plan| {
        let ns: Vec<u64> = (1..=*plan.breakpoints.last().unwrap()).step_by(7).collect();
        check_multi_bound(plan, &sets, &deltas, &ns).is_none()
    });
    let detail = r.as_ref().map_or_else(|e| e.to_string(), |p| format!("gap bounds {:?}", p.gap_bounds));
    rows.push(row("forge", "multi_evens_odds", ok, detail));
    for (name, w) in [
        ("alpha_harmonic", WeightSeq::Harmonic),
        ("alpha_doubling_blocks", WeightSeq::block_constant(vec![0, 1, 3, 7], BlockTail::Doubling).unwrap()),
    ] {
        let s = alpha_sequence(&w, 60, DEFAULT_ALPHA_CAP);
        let ok = s.as_ref().is_ok_and(|s| s.verify() && s.first_non_minimal().is_none());
        let detail = s.as_ref().map_or_else(|e| e.to_string(), |s| format!("{:?}", &s.values[..10]));
        rows.push(row("forge", name, ok, detail));
    }
    rows
}

fn psi_rows() -> CheckRow {
    let maps: Vec<Result<PsiMap, _>> = [(1, 3, 3, 12), (2, 4, 1, 8), (3, 7, 2, 60)]
        .iter()
        .map(|&(i, j, m, h)| build_psi(i, j, m, h))
        .collect();
    let ok = maps.iter().all(|m| m.as_ref().is_ok_and(|m| m.validate().is_ok()));
    row("ctype", "psi_constraints", ok, format!("{} maps", maps.len()))
}

fn ctype_suite(mode: ScheduleMode, seed: u64, trials: u64) -> Vec<CheckRow> {
    let mut rows = vec![psi_rows()];
    if mode == ScheduleMode::Asymptotic {
        let s = build_psi(2, 6, 1, 12)
            .map_err(|e| e.to_string())
            .and_then(|psi| {
                Schedule::build(mode, ScheduleSeeds { delta0: 2, tau0: 1, big_delta0: 2 }, psi, 10).map_err(|e| e.to_string())
            });
        let ok = s.as_ref().is_ok_and(|s| s.conditions().iter().all(|r| r.growth_ok() && r.structural));
        let detail = s.as_ref().map_or_else(Clone::clone, |s| format!("delta^(10) has {} digits", s.delta[10].to_string().len()));
        rows.push(row("ctype", "asymptotic_conditions_k10", ok, detail));
        for name in PRESETS {
            let ok = preset_schedule(name, mode).is_ok_and(|s| s.conditions().iter().all(|r| r.growth_ok()));
            rows.push(row("ctype", "asymptotic_preset_conditions", ok, name));
        }
        return rows;
    }
    for name in PRESETS {
        let p = preset_params(name);
        let ok = p.as_ref().is_ok_and(|p| p.validate().is_ok() && p.schedule.conditions().iter().all(|r| r.structural));
        rows.push(row("ctype", "params_valid", ok, name));
        let Ok(p) = p else { continue };
        let bad = periodicity_failure(&p);
        rows.push(row("ctype", "periodicity", bad.is_none(), format!("{name}: {} coordinates, first failure {bad:?}", p.dim())));
        let prod_ok = (1..p.blocks()).all(|n| {
            let k = p.schedule.group_of(n);
            let start = p.b[n as usize];
            let prod = (start + 1..p.b[n as usize + 1]).fold(Dyadic::one(), |acc, j| acc * Dyadic::pow2(p.weight_log(j) as i64));
            prod == Dyadic::pow2((k * p.table_delta(n)) as i64)
        });
        rows.push(row("ctype", "weight_product", prod_ok, name));
        let results: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                let x = random_sparse(&mut rng, 0, p.dim(), 4);
                let m = rng.gen_range(0..3 * p.block_len(p.n_max));
                let mut y = x.clone();
                for _ in 0..m {
                    y = apply(&p, &y).unwrap();
                }
                apply_power(&p, &x, m).is_ok_and(|z| z == y)
            })
            .collect();
        let (ok, detail) = count_failures(&results);
        rows.push(row("ctype", "power_matches_steps", ok, format!("{name}: {detail}")));
        let results: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed ^ 0x5eed, t);
                let mut q = p.clone();
                let n = rng.gen_range(1..q.blocks());
                match rng.gen_range(0..4) {
                    0 => {
                        let j = rng.gen_range(q.b[n as usize] + 1..q.b[n as usize + 1]);
                        let old = q.weight_log(j);
                        q.set_weight_log(j, if old == 1 { 0 } else { old + 1 });
                    }
                    1 => {
                        let old = q.v_exp[n as usize];
                        q.set_v_exp(n, old + rng.gen_range(1..4));
                    }
                    2 => q.set_phi(n, n),
                    _ => {
                        let old = q.b[n as usize];
                        q.set_b(n, old + 1);
                    }
                }
                q.validate().is_err()
            })
            .collect();
        let (ok, detail) = count_failures(&results);
        rows.push(row("ctype", "mutations_rejected", ok, format!("{name}: {detail}")));
    }
    rows
}

fn dynlab_suite(seed: u64, trials: u64) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let shadow = preset_params("shadow").map_err(|e| e.to_string()).and_then(|p| {
        let w = WeightSeq::block_constant(vec![0, 1 << 20], BlockTail::Doubling).unwrap();
        let a = alpha_sequence(&w, 64, DEFAULT_ALPHA_CAP).map_err(|e| e.to_string())?;
        build_shadowing_vector(&p, &SparseVec::basis(0), &ratio(1, 16), &a).map_err(|e| e.to_string())
    });
    let ok = shadow.as_ref().is_ok_and(|c| c.holds());
    let detail = shadow.as_ref().map_or_else(Clone::clone, |c| {
        format!("K={} k={} |z|={} max_err={}", c.big_k, c.k, c.norm_z, c.max_orbit_error)
    });
    rows.push(row("dynlab", "shadowing_e0", ok, detail));
    let p = match preset_params("props") {
        Ok(p) => p,
        Err(e) => {
            rows.push(row("dynlab", "props_preset", false, e.to_string()));
            return rows;
        }
    };
    let results: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let l = rng.gen_range(1..=p.n_max);
            let x = random_sparse(&mut rng, 0, p.dim(), 6);
            let len = p.block_len(l);
            let p50 = prop50_check_all(&p, &x, l, None, 2 * len).is_ok_and(|r| r.iter().all(|r| r.holds()));
            let p51 = prop51_check(&p, &x, l, 2 * len, None).is_ok_and(|r| r.holds());
            (p50, p51)
        })
        .collect();
    let (ok, detail) = count_failures(&results.iter().map(|r| r.0).collect::<Vec<_>>());
    rows.push(row("dynlab", "prop50_random", ok, detail));
    let (ok, detail) = count_failures(&results.iter().map(|r| r.1).collect::<Vec<_>>());
    rows.push(row("dynlab", "prop51_random", ok, detail));
    let q = preset_params("periodic");
    let ok = q.as_ref().is_ok_and(|q| {
        let x = SparseVec::basis(q.b[2] + 1);
        let ball = Ball { center: x.clone(), radius: ratio(1, 8) };
        hitting_density(q, &x, &ball, &WeightSeq::Harmonic, &HitsOptions::default())
            .is_ok_and(|h| h.meets_period_bound == Some(true))
    });
    rows.push(row("dynlab", "hits_periodic_pattern", ok, "basis vector of block 2, harmonic weight"));
    rows
}

pub fn verify(a: &VerifyArgs, emit: Emit) -> Result<Outcome, CliError> {
    if a.trials == 0 {
        return Err(config("--trials must be positive"));
    }
    let mode = match a.mode {
        ModeArg::Structural => ScheduleMode::Structural,
        ModeArg::Asymptotic => ScheduleMode::Asymptotic,
    };
    let mut rows = Vec::new();
    let want = |s: Suite| a.suite == Suite::All || a.suite == s;
    if want(Suite::Densities) {
        rows.extend(densities_suite(a.seed, a.trials));
    }
    if want(Suite::Forge) {
        rows.extend(forge_suite());
    }
    if want(Suite::Ctype) {
        rows.extend(ctype_suite(mode, a.seed, a.trials));
    }
    if want(Suite::Dynlab) {
        rows.extend(dynlab_suite(a.seed, a.trials));
    }
    let pass = rows.iter().all(|r| r.pass);
    let failed = rows.iter().filter(|r| !r.pass).count();
    let body = match emit {
        Emit::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "seed": a.seed,
                "trials": a.trials,
                "mode": format!("{mode:?}").to_lowercase(),
                "checks": rows,
                "pass": pass,
            }))
            .map_err(config)?;
            s.push('\n');
            s
        }
        Emit::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["suite", "check", "status", "detail"]).map_err(config)?;
            for r in &rows {
                w.write_record([r.suite, r.name, if r.pass { "PASS" } else { "FAIL" }, &r.detail]).map_err(config)?;
            }
            String::from_utf8(w.into_inner().map_err(config)?).map_err(config)?
        }
    };
    let mut summary = String::new();
    write!(summary, "{} checks, {failed} failed", rows.len()).unwrap();
    Ok(Outcome { body, pass, summary })
}
