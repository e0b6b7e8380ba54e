use std::fmt::Write as _;

use rug::Rational;
use serde::Serialize;
use serde_json::json;

use super::args::*;
use super::{CliError, Outcome};
use crate::ctype::{
    build_psi, orbit, orbit_csv, preset_schedule, CTypeParams, Schedule, ScheduleMode, ScheduleSeeds, SparseVec,
    DEFAULT_COORDINATE_CAP,
};
use crate::densities::{estimate_densities, geometric_grid, IndexSet, WeightSeq};
use crate::dynlab::{
    build_shadowing_vector, hitting_density, prop50_check_all, prop51_check, set_identity_check, Ball,
    HitsOptions,
};
use crate::exactnum::{format_rational, parse_rational, ratio, Dyadic, ExponentCap};
use crate::weightforge::{
    alpha_sequence, check_multi_bound, check_thm1_bound, synthesize_weight_multi,
    synthesize_weight_thm1, PartitionWithBoundedGaps,
};

pub(crate) fn config<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn json_body<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(config)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_rational_arg(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(config)
}

fn parse_coefficient(s: &str) -> Result<Dyadic, CliError> {
    if s.contains("*2^") {
        s.parse().map_err(config)
    } else {
        Dyadic::try_from_rational(&parse_rational_arg(s)?).map_err(config)
    }
}

/// `index:value,...`; empty text is the zero vector.
pub fn parse_vector(s: &str) -> Result<SparseVec<Dyadic>, CliError> {
    let mut v = SparseVec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (j, c) = part.split_once(':').ok_or_else(|| config(format!("vector entry {part:?} lacks ':'")))?;
        let j: u64 = j.trim().parse().map_err(|_| config(format!("bad index in {part:?}")))?;
        v.add_at(j, &parse_coefficient(c.trim())?);
    }
    Ok(v)
}

/// `center;radius`.
pub fn parse_ball(s: &str) -> Result<Ball, CliError> {
    let (c, r) = s.split_once(';').ok_or_else(|| config(format!("ball {s:?} lacks ';'")))?;
    let radius = parse_rational_arg(r.trim())?;
    if radius <= 0 {
        return Err(config("ball radius must be positive"));
    }
    Ok(Ball { center: parse_vector(c)?, radius })
}

fn mode_of(m: ModeArg) -> ScheduleMode {
    match m {
        ModeArg::Structural => ScheduleMode::Structural,
        ModeArg::Asymptotic => ScheduleMode::Asymptotic,
    }
}

pub fn build_schedule(a: &ParamsArgs, mode: ScheduleMode) -> Result<Schedule, CliError> {
    if let Some(name) = &a.preset {
        return preset_schedule(name, mode).map_err(config);
    }
    let pairs: u64 = (2..=a.j_max).map(|j| a.i_max.min(j - 1)).sum();
    let horizon = a.psi_horizon.unwrap_or(a.k_max.max(a.j_max).max((pairs + a.i_max) * a.multiplicity));
    let psi = build_psi(a.i_max, a.j_max, a.multiplicity, horizon).map_err(config)?;
    let seeds = ScheduleSeeds { delta0: a.delta0, tau0: a.tau0, big_delta0: a.big_delta0 };
    Schedule::build(mode, seeds, psi, a.k_max).map_err(config)
}

pub fn build_params(a: &ParamsArgs) -> Result<CTypeParams, CliError> {
    let s = build_schedule(a, ScheduleMode::Structural)?;
    let n_max = a.n_max.unwrap_or(s.last_block());
    CTypeParams::realize(&s, n_max, ExponentCap::from_env(), DEFAULT_COORDINATE_CAP).map_err(config)
}

pub fn density(a: &DensityArgs, emit: Emit) -> Result<Outcome, CliError> {
    let set = IndexSet::from_spec(a.set.as_deref().ok_or_else(|| config("--set is required"))?).map_err(config)?;
    let weight = WeightSeq::from_spec(&a.weight).map_err(config)?;
    let tail = parse_rational_arg(&a.tail_fraction)?;
    let report = estimate_densities(&set, &weight, a.horizon, &tail).map_err(config)?;
    let body = match emit {
        Emit::Csv => report.to_csv().map_err(config)?,
        Emit::Json => json_body(&report)?,
    };
    Ok(Outcome { body, pass: true, summary: report.summary() })
}

pub fn forge(a: &ForgeArgs, emit: Emit) -> Result<Outcome, CliError> {
    match a.mode {
        ForgeMode::Thm1 => {
            let [spec] = a.set.as_slice() else { return Err(config("thm1 takes exactly one --set")) };
            let [d] = a.delta.as_slice() else { return Err(config("thm1 takes exactly one --delta")) };
            let set = IndexSet::from_spec(spec).map_err(config)?;
            let delta = parse_rational_arg(d)?;
            let (plan, _) = synthesize_weight_thm1(&set, &delta, a.horizon).map_err(config)?;
            let ns = geometric_grid(*plan.breakpoints.last().unwrap(), &ratio(9, 8));
            let pass = plan.verify(&set) && check_thm1_bound(&plan, &set, &delta, &ns).is_none();
            let body = match emit {
                Emit::Json => json_body(&plan)?,
                Emit::Csv => blocks_csv(&plan.breakpoints, &plan.counts, &plan.floors, None),
            };
            Ok(Outcome { body, pass, summary: format!("{} blocks", plan.blocks()) })
        }
        ForgeMode::Multi => {
            if a.set.is_empty() || a.set.len() != a.delta.len() {
                return Err(config("multi needs one --delta per --set"));
            }
            let sets = a.set.iter().map(|s| IndexSet::from_spec(s).map_err(config)).collect::<Result<Vec<_>, _>>()?;
            let deltas = a.delta.iter().map(|d| parse_rational_arg(d)).collect::<Result<Vec<_>, _>>()?;
            let pattern = match &a.pattern {
                Some(p) => p
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(config))
                    .collect::<Result<Vec<_>, _>>()?,
                None => (0..sets.len()).collect(),
            };
            let partition = PartitionWithBoundedGaps { pattern };
            let plan = synthesize_weight_multi(&sets, &deltas, &partition, a.horizon).map_err(config)?;
            let ns = geometric_grid(*plan.breakpoints.last().unwrap(), &ratio(9, 8));
            let pass = check_multi_bound(&plan, &sets, &deltas, &ns).is_none();
            let body = match emit {
                Emit::Json => json_body(&plan)?,
                Emit::Csv => blocks_csv(&plan.breakpoints, &plan.counts, &plan.floors, Some(&plan.parts)),
            };
            Ok(Outcome { body, pass, summary: format!("{} blocks", plan.parts.len()) })
        }
        ForgeMode::Alpha => {
            let weight = WeightSeq::from_spec(&a.weight).map_err(config)?;
            let seq = alpha_sequence(&weight, a.n_max, a.cap).map_err(config)?;
            let pass = seq.verify() && seq.first_non_minimal().is_none();
            let body = match emit {
                Emit::Json => json_body(&json!({ "values": seq.values, "verified": pass }))?,
                Emit::Csv => {
                    let mut s = String::from("n,alpha\n");
                    for (i, v) in seq.values.iter().enumerate() {
                        writeln!(s, "{},{v}", i + 1).unwrap();
                    }
                    s
                }
            };
            Ok(Outcome { body, pass, summary: format!("alpha_1..alpha_{}", a.n_max) })
        }
    }
}

fn blocks_csv(bp: &[u64], counts: &[u64], floors: &[Rational], parts: Option<&[usize]>) -> String {
    let mut s = String::from("block,start,end,count,floor,part\n");
    for k in 0..counts.len() {
        let part = parts.map_or(String::new(), |p| p[k].to_string());
        writeln!(s, "{k},{},{},{},{},{part}", bp[k], bp[k + 1], counts[k], format_rational(&floors[k])).unwrap();
    }
    s
}

pub fn schedule(a: &ScheduleArgs, emit: Emit) -> Result<Outcome, CliError> {
    let mode = mode_of(a.mode);
    let s = build_schedule(&a.params, mode)?;
    let rows = s.conditions();
    let pass = match mode {
        ScheduleMode::Structural => rows.iter().all(|r| r.structural),
        ScheduleMode::Asymptotic => rows.iter().all(|r| r.structural && r.growth_ok()),
    };
    let body = match emit {
        Emit::Json => json_body(&json!({ "schedule": s, "conditions": rows }))?,
        Emit::Csv => {
            let mut out = String::from("k,n_k,delta,tau,big_delta,gamma_exponent,gamma,gap,ratio,block,structural\n");
            for r in &rows {
                let k = r.k as usize;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.k, s.n[k], s.delta[k], s.tau[k], s.big_delta[k], r.gamma_exponent, r.gamma, r.gap, r.ratio,
                    r.block, r.structural
                )
                .unwrap();
            }
            out
        }
    };
    Ok(Outcome { body, pass, summary: format!("{} groups", rows.len()) })
}

pub fn orbit_cmd(a: &OrbitArgs, emit: Emit) -> Result<Outcome, CliError> {
    let p = build_params(&a.params)?;
    let x = parse_vector(&a.x)?;
    let body = match emit {
        Emit::Csv => orbit_csv(&p, &x, a.steps).map_err(config)?,
        Emit::Json => {
            let ys = orbit(&p, &x, a.steps).map_err(config)?;
            let rows: Vec<Vec<(u64, String)>> =
                ys.iter().map(|y| y.iter().map(|(j, c)| (j, c.to_string())).collect()).collect();
            json_body(&json!({ "params": p.summary(), "orbit": rows }))?
        }
    };
    Ok(Outcome { body, pass: true, summary: format!("{} steps", a.steps) })
}

#[derive(Serialize)]
struct ShadowView<'a> {
    #[serde(flatten)]
    cert: &'a crate::dynlab::ShadowingCertificate,
    holds: bool,
}

pub fn shadow(a: &ShadowArgs, emit: Emit) -> Result<Outcome, CliError> {
    let p = build_params(&a.params)?;
    let x = parse_vector(&a.x)?;
    let eps = parse_rational_arg(&a.epsilon)?;
    let w = WeightSeq::from_spec(&a.alpha_weight).map_err(config)?;
    // alpha is needed at 2 delta^(K) for K up to j_max
    let top = p.schedule.delta.iter().filter_map(|d| d.to_u64()).max().unwrap_or(1);
    let alpha = alpha_sequence(&w, 2 * top, crate::weightforge::DEFAULT_ALPHA_CAP).map_err(config)?;
    let cert = build_shadowing_vector(&p, &x, &eps, &alpha).map_err(config)?;
    let pass = cert.holds();
    let body = match emit {
        Emit::Json => json_body(&ShadowView { cert: &cert, holds: pass })?,
        Emit::Csv => {
            let mut s = String::from("index,mantissa,exponent\n");
            for (j, c) in cert.z.iter() {
                writeln!(s, "{j},{},{}", c.mantissa(), c.exponent()).unwrap();
            }
            s
        }
    };
    let summary = format!(
        "K={} k={} |z|={} max_err={}",
        cert.big_k,
        cert.k,
        format_rational(&cert.norm_z),
        format_rational(&cert.max_orbit_error)
    );
    Ok(Outcome { body, pass, summary })
}

pub fn prop50(a: &Prop50Args, emit: Emit) -> Result<Outcome, CliError> {
    let p = build_params(&a.params)?;
    if a.l < 1 || a.l > p.n_max {
        return Err(config(format!("need 1 <= l <= {}", p.n_max)));
    }
    let x = parse_vector(&a.x)?;
    let constants = a.constant.iter().map(|c| parse_rational_arg(c)).collect::<Result<Vec<_>, _>>()?;
    let j_max = a.j.unwrap_or(2 * p.block_len(a.l));
    let cs = if constants.is_empty() { None } else { Some(constants.as_slice()) };
    let reps = prop50_check_all(&p, &x, a.l, cs, j_max).map_err(config)?;
    let pass = reps.iter().all(|r| r.holds());
    let body = match emit {
        Emit::Json => json_body(&reps)?,
        Emit::Csv => {
            let mut s = String::from("l,n,c_l,x_l,sup_norm,conclusion1,conclusion2_failure\n");
            for r in &reps {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.l,
                    r.n,
                    format_rational(&r.c_l),
                    format_rational(&r.x_l),
                    format_rational(&r.sup_norm),
                    r.conclusion1,
                    r.conclusion2_failure.map_or(String::new(), |n| n.to_string())
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Outcome { body, pass, summary: format!("l={} blocks below checked", a.l) })
}

pub fn prop51(a: &Prop51Args, emit: Emit) -> Result<Outcome, CliError> {
    let p = build_params(&a.params)?;
    if a.l < 1 || a.l > p.n_max {
        return Err(config(format!("need 1 <= l <= {}", p.n_max)));
    }
    let x = parse_vector(&a.x)?;
    let j = a.j.unwrap_or(2 * p.block_len(a.l));
    let r = prop51_check(&p, &x, a.l, j, None).map_err(config)?;
    let pass = r.holds();
    let body = match emit {
        Emit::Json => json_body(&r)?,
        Emit::Csv => format!(
            "l,k0,k1,j,alpha_log,x_l,count,bound,failure\n{},{},{},{},{},{},{},{},{}\n",
            r.l,
            r.k0,
            r.k1,
            r.j,
            r.alpha_log,
            format_rational(&r.x_l),
            r.count,
            format_rational(&r.bound),
            r.failure.map_or(String::new(), |n| n.to_string())
        ),
    };
    Ok(Outcome { body, pass, summary: format!("count={} of {}", r.count, j + 1) })
}

pub fn hits(a: &HitsArgs, emit: Emit) -> Result<Outcome, CliError> {
    let p = build_params(&a.params)?;
    let x = parse_vector(&a.x)?;
    let radius = parse_rational_arg(&a.radius)?;
    if radius <= 0 {
        return Err(config("radius must be positive"));
    }
    let ball = Ball { center: parse_vector(&a.center)?, radius };
    let weight = WeightSeq::from_spec(&a.weight).map_err(config)?;
    let opts = HitsOptions { step_horizon: a.step_horizon, density_horizon: a.density_horizon, ..HitsOptions::default() };
    let h = hitting_density(&p, &x, &ball, &weight, &opts).map_err(config)?;
    let pass = h.meets_period_bound != Some(false);
    let body = match emit {
        Emit::Json => json_body(&h)?,
        Emit::Csv => h.report.to_csv().map_err(config)?,
    };
    Ok(Outcome { body, pass, summary: format!("{} visits, {}", h.visits.len(), h.report.summary()) })
}

pub fn identity(a: &IdentityArgs, emit: Emit) -> Result<Outcome, CliError> {
    let p = build_params(&a.params)?;
    let vectors = a.x.iter().map(|s| parse_vector(s)).collect::<Result<Vec<_>, _>>()?;
    let balls = a.ball.iter().map(|s| parse_ball(s)).collect::<Result<Vec<_>, _>>()?;
    let weights = a.weight.iter().map(|s| WeightSeq::from_spec(s).map_err(config)).collect::<Result<Vec<_>, _>>()?;
    if vectors.is_empty() || balls.is_empty() {
        return Err(config("identity needs at least one --x and one --ball"));
    }
    let opts = HitsOptions {
        density_horizon: a.density_horizon,
        tol: parse_rational_arg(&a.tol)?,
        ..HitsOptions::default()
    };
    let r = set_identity_check(&p, &vectors, &balls, &weights, &opts).map_err(config)?;
    let pass = r.holds();
    let body = match emit {
        Emit::Json => json_body(&r)?,
        Emit::Csv => {
            let mut s = String::from("vector,ball,weight,lower,upper\n");
            for row in &r.rows {
                writeln!(
                    s,
                    "{},{},{},{},{}",
                    row.vector,
                    row.ball,
                    row.weight,
                    format_rational(&row.lower),
                    format_rational(&row.upper)
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Outcome { body, pass, summary: format!("{} rows, {} chain failures", r.rows.len(), r.chain_failures.len()) })
}
