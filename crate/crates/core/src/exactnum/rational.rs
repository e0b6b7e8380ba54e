use rug::{Integer, Rational};

use super::NumError;

/// `num/den` as a canonical rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::from((num, den))
}

/// Lossless textual form. Always `p/q`, including integers (`3/1`).
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `p`, `p/q` and `-p/q`. The result is canonical.
pub fn parse_rational(s: &str) -> Result<Rational, NumError> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: Integer = num.parse().map_err(|_| NumError::Parse(s.to_string()))?;
    let den: Integer = den.parse().map_err(|_| NumError::Parse(s.to_string()))?;
    if den == 0 {
        return Err(NumError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::from((num, den)))
}

/// Display-only conversion.
pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64()
}

/// Pairwise summation. Keeps operand sizes balanced, which matters when the
/// terms have many distinct small denominators (harmonic-type sums).
pub fn balanced_sum(mut terms: Vec<Rational>) -> Rational {
    if terms.is_empty() {
        return Rational::new();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}
