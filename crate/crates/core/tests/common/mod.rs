//! Reference implementations that share no code with the library: a C-type
//! operator rebuilt from the schedule alone, and exact prefix sums over a
//! common denominator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hypodense::ctype::{CTypeParams, Schedule, SparseVec};
use hypodense::densities::WeightSeq;
use hypodense::exactnum::{Dyadic, Integer, Rational};

pub type RefVec = BTreeMap<u64, Rational>;

fn pow2(e: i64) -> Rational {
    let p = Rational::from(Integer::from(1) << e.unsigned_abs() as u32);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

fn to_i64(x: &Integer) -> i64 {
    x.to_i64().expect("toy schedules stay small")
}

/// Operator data derived from the schedule by the defining formulas.
pub struct RefOperator {
    pub b: Vec<u64>,
    /// `w[j]` for every coordinate; unused at block starts.
    pub w: Vec<Rational>,
    /// Per block: feedback target and coefficient, and the inverse block product.
    pub feedback: Vec<Option<(u64, Rational)>>,
    pub inverse_product: Vec<Rational>,
}

impl RefOperator {
    pub fn new(s: &Schedule, n_max: u64) -> Self {
        let group = |n: u64| (0..=s.k_max).rev().find(|&k| s.n[k as usize] <= n).unwrap();
        let mut b = vec![0u64];
        let mut w = Vec::new();
        let mut feedback = Vec::new();
        let mut inverse_product = Vec::new();
        for n in 0..=n_max {
            let k = group(n);
            let len = to_i64(&s.big_delta[k as usize]);
            if n == 0 {
                w.extend((0..len).map(|_| Rational::from(1)));
                feedback.push(None);
                inverse_product.push(Rational::from(1));
            } else {
                let psi2 = s.psi.psi(k).1;
                let d = to_i64(&s.delta[psi2 as usize]);
                let kd = k as i64 * d;
                let nn = n as i64;
                let mut log_prod = 0;
                w.push(Rational::from(0));
                for i in 1..len {
                    let e = if i <= kd + 2 * nn + 1 {
                        1
                    } else if i < len - 3 * d - 2 * nn - 1 {
                        0
                    } else if i < len - 2 * d {
                        -1
                    } else if i < len - d {
                        1
                    } else {
                        0
                    };
                    log_prod += e;
                    w.push(pow2(e));
                }
                let phi = n - s.n[k as usize];
                let v = pow2(-to_i64(&s.tau[psi2 as usize]));
                feedback.push(Some((phi, v)));
                inverse_product.push(pow2(-log_prod));
            }
            b.push(b.last().unwrap() + len as u64);
        }
        RefOperator { b, w, feedback, inverse_product }
    }

    pub fn dim(&self) -> u64 {
        *self.b.last().unwrap()
    }

    fn block_of(&self, j: u64) -> usize {
        self.b.partition_point(|&s| s <= j) - 1
    }

    pub fn apply(&self, x: &RefVec) -> RefVec {
        let mut y = RefVec::new();
        let mut add = |j: u64, c: Rational| {
            let e = y.entry(j).or_default();
            *e += c;
            if *e == 0 {
                y.remove(&j);
            }
        };
        for (&j, c) in x {
            let n = self.block_of(j);
            if j + 1 < self.b[n + 1] {
                add(j + 1, Rational::from(c * &self.w[j as usize + 1]));
            } else {
                if let Some((phi, v)) = &self.feedback[n] {
                    add(self.b[*phi as usize], Rational::from(c * v));
                }
                add(self.b[n], -Rational::from(c * &self.inverse_product[n]));
            }
        }
        y
    }
}

pub fn to_ref(x: &SparseVec<Dyadic>) -> RefVec {
    x.iter().map(|(j, c)| (j, c.to_rational())).collect()
}

pub fn ref_norm(x: &RefVec) -> Rational {
    x.values().fold(Rational::new(), |acc, c| acc + Rational::from(c.abs_ref()))
}

pub fn ref_sub(a: &RefVec, b: &RefVec) -> RefVec {
    let mut out = a.clone();
    for (&j, c) in b {
        let e = out.entry(j).or_default();
        *e -= c;
        if *e == 0 {
            out.remove(&j);
        }
    }
    out
}

/// The realized params agree with the reference data coordinate by coordinate.
pub fn params_match(p: &CTypeParams, r: &RefOperator) -> bool {
    p.b == r.b
        && (0..p.dim()).all(|j| {
            let n = p.block_of(j);
            j == p.b[n as usize] || Dyadic::pow2(p.weight_log(j) as i64).to_rational() == r.w[j as usize]
        })
}

/// `L * sum_{k<m} a_k` for `m <= len` and one common denominator `L`. Ratios
/// and homogeneous inequalities between entries are those of the exact sums.
pub fn scaled_prefix_sums(w: &WeightSeq, len: u64) -> Vec<Integer> {
    let values: Vec<Rational> = (0..len).map(|k| w.value(k)).collect();
    let mut den = Integer::from(1);
    for v in &values {
        den.lcm_mut(v.denom());
    }
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = Integer::new();
    out.push(acc.clone());
    for v in &values {
        acc += Integer::from(&den / v.denom()) * v.numer();
        out.push(acc.clone());
    }
    out
}
