//! One PASS/FAIL line per acceptance criterion. Every criterion runs even when
//! an earlier one fails; the target exits nonzero at the end if any did.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use common::{ref_norm, ref_sub, scaled_prefix_sums, to_ref, RefOperator};
use hypodense::ctype::{
    apply, build_psi, preset_params, CTypeParams, Schedule, ScheduleMode, ScheduleSeeds, SparseVec,
};
use hypodense::densities::{density_quotient, duality_check, estimate_densities, BlockTail, IndexSet, WeightSeq};
use hypodense::dynlab::{build_shadowing_vector, prop50_check_all, prop51_bound, prop51_check, random_sparse};
use hypodense::exactnum::{ratio, Dyadic, Integer, PowerOfTwo, Rational};
use hypodense::sampling::{random_index_set, random_weight, trial_rng};
use hypodense::weightforge::{alpha_sequence, synthesize_weight_multi, synthesize_weight_thm1, PartitionWithBoundedGaps};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, format!("{what} took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

fn f(x: &Rational) -> f64 {
    x.to_f64()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let results: Vec<Result<(), String>> = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(0xD0A1, t);
            let set = random_index_set(&mut rng);
            let w = random_weight(&mut rng);
            let n = rng.gen_range(1..=10_000u64);
            let ok = duality_check(&set, &w, n).map_err(|e| e.to_string())?;
            let q = density_quotient(&set, &w, n).map_err(|e| e.to_string())?;
            let qc = density_quotient(&set.clone().complement(), &w, n).map_err(|e| e.to_string())?;
            ensure(ok && q + qc == 1, format!("trial {t}: duality fails at N={n}"))
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    let t = within(start, Duration::from_secs(10), "200 triples")?;
    Ok(format!("200 triples exact, {t:.2?}"))
}

/// `n` lies in `[4^k, 2 * 4^k)` for some `k` iff its bit length is odd.
fn in_quartic_blocks(n: u64) -> bool {
    n > 0 && (64 - n.leading_zeros()) % 2 == 1
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let set = IndexSet::quartic_blocks();
    let horizon = 1u64 << 20;
    let mut count = 0u64;
    let mut best = (0u64, 1u64);
    for n in 0..horizon {
        ensure(set.contains(n) == in_quartic_blocks(n), format!("membership differs at {n}"))?;
        if in_quartic_blocks(n) {
            count += 1;
        }
        let big_n = n + 1;
        if big_n >= horizon / 64 && count * best.1 > best.0 * big_n {
            best = (count, big_n);
        }
    }
    let upper = Rational::from(best);
    let delta = ratio(2, 3);
    let dev = Rational::from(&upper - &delta).abs();
    ensure(dev < ratio(1, 1000), format!("brute-force upper estimate {} is not 2/3", f(&upper)))?;
    let (plan, w) = synthesize_weight_thm1(&set, &delta, 4 * horizon).map_err(|e| e.to_string())?;
    ensure(plan.verify(&set) && w.in_family(), "plan certificate or family membership fails")?;
    let half = ratio(1, 2);
    let weighted = estimate_densities(&set, &w, horizon, &half).map_err(|e| e.to_string())?;
    let unweighted = estimate_densities(&set, &WeightSeq::Unit, horizon, &half).map_err(|e| e.to_string())?;
    let lo_w = f(&weighted.lower_estimate);
    let lo_u = f(&unweighted.lower_estimate);
    let detail = format!(
        "brute max {:.4} at N={}, weighted lower {lo_w:.4}, unweighted lower {lo_u:.4}, {} blocks",
        f(&upper),
        best.1,
        plan.blocks()
    );
    ensure(weighted.lower_estimate >= (&delta - ratio(1, 20)), format!("weighted too low: {detail}"))?;
    ensure(unweighted.lower_estimate <= ratio(1, 3) + ratio(1, 20), format!("unweighted too high: {detail}"))?;
    let t = within(start, Duration::from_secs(30), "synthesis")?;
    Ok(format!("{detail}, {t:.2?}"))
}

fn criterion_3() -> Verdict {
    let sets = [IndexSet::evens(), IndexSet::odds()];
    let deltas = [ratio(1, 2), ratio(1, 2)];
    let horizon = 1_000_000;
    let plan = synthesize_weight_multi(&sets, &deltas, &PartitionWithBoundedGaps::even_odd(), horizon)
        .map_err(|e| e.to_string())?;
    ensure(plan.gap_bounds == [2, 2], format!("gap bounds {:?}", plan.gap_bounds))?;
    let w = plan.weight();
    let floor = ratio(1, 4) - ratio(1, 20);
    let mut lows = Vec::new();
    for s in &sets {
        let r = estimate_densities(s, &w, horizon, &ratio(1, 2)).map_err(|e| e.to_string())?;
        lows.push(f(&r.lower_estimate));
        ensure(r.lower_estimate >= floor, format!("lower estimate {:.4} below 1/5", f(&r.lower_estimate)))?;
    }
    Ok(format!("lower estimates {:.4} and {:.4}", lows[0], lows[1]))
}

/// `2 (P[m] - P[n]) >= P[m + 1]` with `m = (1 + alpha) n`.
fn alpha_holds(p: &[Integer], n: u64, alpha: u64) -> bool {
    let m = ((1 + alpha) * n) as usize;
    Integer::from(&p[m] - &p[n as usize]) * 2u32 >= p[m + 1]
}

fn criterion_4() -> Verdict {
    let weights = [
        ("harmonic", WeightSeq::Harmonic),
        ("doubling [0,1,3,7]", WeightSeq::block_constant(vec![0, 1, 3, 7], BlockTail::Doubling).unwrap()),
        ("repeat [0,4,12,40]", WeightSeq::block_constant(vec![0, 4, 12, 40], BlockTail::Repeat).unwrap()),
        ("doubling [0,10,30,100,300]", WeightSeq::block_constant(vec![0, 10, 30, 100, 300], BlockTail::Doubling).unwrap()),
    ];
    let mut tops = Vec::new();
    for (name, w) in weights {
        let s = alpha_sequence(&w, 100, 1 << 24).map_err(|e| format!("{name}: {e}"))?;
        let v = &s.values;
        ensure(v.len() == 100, format!("{name}: {} values", v.len()))?;
        ensure(v.windows(2).all(|p| p[0] <= p[1]) && v[0] >= 1, format!("{name}: not non-decreasing"))?;
        let len = v.iter().enumerate().map(|(i, a)| (1 + a) * (i as u64 + 1) + 1).max().unwrap();
        let p = scaled_prefix_sums(&w, len);
        for n in 1..=100u64 {
            let a = v[n as usize - 1];
            ensure(alpha_holds(&p, n, a), format!("{name}: inequality fails at n={n}"))?;
            let floor = if n == 1 { 1 } else { v[n as usize - 2] };
            let lowered_ok = a > floor && alpha_holds(&p, n, a - 1);
            ensure(!lowered_ok, format!("{name}: alpha_{n} - 1 still admissible"))?;
        }
        tops.push(format!("{name}: alpha_100={}", v[99]));
    }
    Ok(tops.join(", "))
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let p = preset_params("periodic").map_err(|e| e.to_string())?;
    ensure(p.blocks() >= 6, format!("only {} blocks", p.blocks()))?;
    let r = RefOperator::new(&p.schedule, p.n_max);
    ensure(common::params_match(&p, &r), "realized weights differ from the defining table")?;
    let failures: Vec<u64> = (0..p.dim())
        .into_par_iter()
        .filter(|&j| {
            let len = p.block_len(p.block_of(j));
            let e = SparseVec::basis(j);
            let mut y = e.clone();
            for _ in 0..2 * len {
                y = apply(&p, &y).unwrap();
            }
            y != e
        })
        .collect();
    ensure(failures.is_empty(), format!("T^(2 len) e_j != e_j for j in {:?}", &failures[..failures.len().min(5)]))?;
    let ops: u64 = (0..p.blocks()).map(|n| 2 * p.block_len(n) * p.block_len(n)).sum();
    let t = within(start, Duration::from_secs(60), "periodicity")?;
    Ok(format!("{} blocks, {} coordinates, {ops} steps, {t:.2?}", p.blocks(), p.dim()))
}

fn criterion_6() -> Verdict {
    let mut checked = 0;
    for name in hypodense::ctype::PRESETS {
        let p = preset_params(name).map_err(|e| e.to_string())?;
        let s = &p.schedule;
        for n in 1..p.blocks() {
            let k = s.group_of(n);
            let d = s.delta[s.psi.psi(k).1 as usize].to_i64().unwrap();
            let prod = (p.b[n as usize] + 1..p.b[n as usize + 1])
                .fold(Dyadic::one(), |acc, j| acc.mul_ref(&Dyadic::pow2(p.weight_log(j) as i64)));
            ensure(prod == Dyadic::pow2(k as i64 * d), format!("{name} block {n}: product {prod}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} blocks over 3 presets"))
}

fn criterion_7() -> Verdict {
    let psi = build_psi(2, 6, 1, 12).map_err(|e| e.to_string())?;
    let seeds = ScheduleSeeds { delta0: 2, tau0: 1, big_delta0: 2 };
    let s = Schedule::build(ScheduleMode::Asymptotic, seeds, psi, 10).map_err(|e| e.to_string())?;
    ensure(s.conditions().iter().all(|r| r.growth_ok()), "library reports a failed condition")?;
    let mut min_sq: Option<Integer> = None;
    for k in 1..=10u64 {
        let ku = k as usize;
        let d_psi = &s.delta[s.psi.psi(k).1 as usize];
        let g = Integer::from(&s.delta[ku - 1] * k) + 2 * s.n[ku] + 1u32 - &s.tau[ku];
        let mut bound = Integer::from(-16 * k as i64);
        if let Some(m) = &min_sq {
            bound = bound.min(m.clone());
        }
        ensure(g <= bound, format!("gamma_{k} = 2^{g} above 2^{bound}"))?;
        ensure(PowerOfTwo::new(g.clone()).leq(&PowerOfTwo::new(bound)), "PowerOfTwo comparison disagrees")?;
        let sq = Integer::from(&g * 2u32);
        min_sq = Some(min_sq.map_or(sq.clone(), |m| m.min(sq)));
        ensure(Integer::from(&s.delta[ku] - &s.tau[ku]) >= k, format!("delta - tau < {k}"))?;
        ensure(Integer::from(&s.delta[ku - 1] * (k - 1)) * k <= s.delta[ku], format!("ratio fails at {k}"))?;
        ensure(
            (Integer::from(d_psi * k) + s.n[ku + 1]) * k <= s.big_delta[ku],
            format!("block condition fails at {k}"),
        )?;
    }
    Ok(format!("k = 1..10, delta^(10) has {} digits", s.delta[10].to_string().len()))
}

fn criterion_8() -> Verdict {
    let p = preset_params("shadow").map_err(|e| e.to_string())?;
    let w = WeightSeq::block_constant(vec![0, 1 << 20], BlockTail::Doubling).unwrap();
    let alpha = alpha_sequence(&w, 64, 1 << 24).map_err(|e| e.to_string())?;
    let x = SparseVec::basis(0);
    let eps = ratio(1, 16);
    let c = build_shadowing_vector(&p, &x, &eps, &alpha).map_err(|e| e.to_string())?;
    ensure(c.holds(), "certificate fails")?;
    let s = &p.schedule;
    let d_big_k = s.delta[c.big_k as usize].to_u64().unwrap();
    ensure(c.n == 2 * d_big_k && c.alpha_n == alpha.alpha(c.n), "delay or window disagrees")?;
    let gap = Integer::from(&s.delta[c.big_k as usize] - &s.tau[c.big_k as usize]);
    ensure(c.eq9 && c.gap() == PowerOfTwo::new(gap), "equation 9 power of two disagrees")?;
    let r = RefOperator::new(s, p.n_max);
    let z = to_ref(&c.z);
    ensure(ref_norm(&z) < eps, format!("||z|| = {}", ref_norm(&z)))?;
    let mut tz = z.clone();
    for _ in 0..c.n {
        tz = r.apply(&tz);
    }
    let mut tx = to_ref(&x);
    let mut worst = Rational::new();
    for m in 0..=c.alpha_n * c.n {
        let err = ref_norm(&ref_sub(&tz, &tx));
        ensure(err < eps, format!("orbit error {err} at m={m}"))?;
        worst = worst.max(err);
        tz = r.apply(&tz);
        tx = r.apply(&tx);
    }
    ensure(worst == c.max_orbit_error, "library max orbit error disagrees with the reference")?;
    Ok(format!(
        "K={} k={} delay={} window={} ||z||={} max error={}",
        c.big_k,
        c.k,
        c.n,
        c.alpha_n * c.n,
        ref_norm(&z),
        worst
    ))
}

fn prop_trial(p: &CTypeParams, t: u64) -> Result<(), String> {
    let mut rng = trial_rng(0x50_51, t);
    let l = rng.gen_range(1..=p.n_max);
    let entries = rng.gen_range(1..8);
    let x = random_sparse(&mut rng, 0, p.dim(), entries);
    let j = 2 * p.block_len(l);
    let r50 = prop50_check_all(p, &x, l, None, j).map_err(|e| e.to_string())?;
    ensure(r50.iter().all(|r| r.holds()), format!("trial {t}: prop 50 fails for l={l}"))?;
    let r51 = prop51_check(p, &x, l, j, None).map_err(|e| e.to_string())?;
    ensure(r51.holds(), format!("trial {t}: prop 51 fails for l={l} at J={:?}", r51.failure))
}

fn criterion_9() -> Verdict {
    let p = preset_params("props").map_err(|e| e.to_string())?;
    let results: Vec<Result<(), String>> = (0..1000).into_par_iter().map(|t| prop_trial(&p, t)).collect();
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    let b = prop51_bound(100, 10, 90, 99).map_err(|e| e.to_string())?;
    ensure(b == ratio(1, 5), format!("prop51_bound(100, 80, 99) = {b}"))?;
    Ok("1000 vectors, prop51_bound(100, 80, 99) = 1/5".into())
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |i: usize| -> Result<(Vec<u8>, Vec<u8>), String> {
        let csv = dir.path().join(format!("verify{i}.csv"));
        let a = Command::new(env!("CARGO_BIN_EXE_hypodense"))
            .args(["verify", "--suite", "all", "--seed", "11"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(a.status.success(), format!("json run exited with {}", a.status))?;
        let b = Command::new(env!("CARGO_BIN_EXE_hypodense"))
            .args(["--emit", "csv", "--out"])
            .arg(&csv)
            .args(["verify", "--suite", "all", "--seed", "11"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(b.status.success(), format!("csv run exited with {}", b.status))?;
        Ok((a.stdout, std::fs::read(&csv).map_err(|e| e.to_string())?))
    };
    let (j1, c1) = run(1)?;
    let (j2, c2) = run(2)?;
    ensure(!j1.is_empty() && j1 == j2, "JSON outputs differ")?;
    ensure(!c1.is_empty() && c1 == c2, "CSV outputs differ")?;
    Ok(format!("JSON {} bytes and CSV {} bytes identical", j1.len(), c1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("exact duality", criterion_1),
        ("single-set weight synthesis", criterion_2),
        ("multi-set weight synthesis", criterion_3),
        ("alpha sequence", criterion_4),
        ("periodicity", criterion_5),
        ("weight product identity", criterion_6),
        ("asymptotic schedule conditions", criterion_7),
        ("shadowing", criterion_8),
        ("block orbit bounds", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
