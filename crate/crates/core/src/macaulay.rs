//! Macaulay representations, the operators `c^<d>` and `c_<d>`, and
//! admissible Hilbert polynomials with their Gotzmann numbers.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactalg::parse_rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MacaulayError {
    #[error("not the Hilbert polynomial of a subscheme: {0}")]
    NotAdmissible(String),
    #[error("decomposition needs more than {0} binomials")]
    TooLarge(usize),
    #[error("cannot parse Hilbert polynomial `{0}`")]
    Parse(String),
}

/// Largest Gotzmann number the decomposition will produce.
pub const MAX_GOTZMANN: usize = 100_000;

/// `C(n, k)` with `C(n, k) = 0` for `n < k`; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Generalized binomial `x(x-1)…(x-k+1)/k!` for any integer `x`.
pub fn binomial_signed(x: i64, k: u64) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(x - i as i64);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// The `d`-th Macaulay representation `c = Σ C(k_j, j)`, `k_d > … > k_1 ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacaulayRep {
    pub d: u32,
    /// `k_d, k_{d-1}, …`; trailing vanishing terms are omitted.
    pub terms: Vec<u64>,
}

impl MacaulayRep {
    pub fn value(&self) -> u128 {
        self.pairs()
            .map(|(k, j)| binomial(k, j).expect("representation value fits"))
            .sum()
    }

    fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.terms
            .iter()
            .enumerate()
            .map(move |(i, &k)| (k, self.d as u64 - i as u64))
    }
}

/// Greedy Macaulay representation.
pub fn macaulay_rep(c: u64, d: u32) -> MacaulayRep {
    assert!(d >= 1, "degree must be positive");
    let mut rem = c as u128;
    let mut terms = Vec::new();
    let mut j = d as u64;
    while rem > 0 && j >= 1 {
        let k = largest_top(rem, j);
        rem -= binomial(k, j).unwrap();
        terms.push(k);
        j -= 1;
    }
    MacaulayRep { d, terms }
}

/// Largest `k` with `C(k, j) ≤ c`, for `c ≥ 1`.
fn largest_top(c: u128, j: u64) -> u64 {
    let fits = |k: u64| binomial(k, j).is_some_and(|b| b <= c);
    let mut lo = j;
    let mut hi = j + 1;
    while fits(hi) {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `c^<d> = Σ C(k_j + 1, j + 1)`.
pub fn macaulay_upper(c: u64, d: u32) -> u128 {
    macaulay_rep(c, d)
        .pairs()
        .map(|(k, j)| binomial(k + 1, j + 1).expect("overflow in c^<d>"))
        .sum()
}

/// `c_<d> = Σ C(k_j - 1, j)`.
pub fn macaulay_lower(c: u64, d: u32) -> u128 {
    macaulay_rep(c, d)
        .pairs()
        .map(|(k, j)| if k == 0 { 0 } else { binomial(k - 1, j).unwrap() })
        .sum()
}

/// An admissible Hilbert polynomial together with its Gotzmann decomposition
/// `p(d) = Σ_{i=1..r} C(d + a_i - (i-1), a_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertPolynomialSpec {
    decomposition: Vec<u32>,
    /// Coefficients of `t⁰, t¹, …`.
    coefficients: Vec<BigRational>,
}

/// Value of `p(d)` with a flag for degrees below the Gotzmann number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HilbertValue {
    pub value: i128,
    pub extrapolated: bool,
}

impl HilbertPolynomialSpec {
    /// Builds the polynomial from a nonincreasing list `a₁ ≥ … ≥ a_r ≥ 0`.
    pub fn from_decomposition(a: Vec<u32>) -> Result<Self, MacaulayError> {
        if a.is_empty() {
            return Err(MacaulayError::NotAdmissible("empty decomposition".into()));
        }
        if a.windows(2).any(|w| w[0] < w[1]) {
            return Err(MacaulayError::NotAdmissible(
                "decomposition must be nonincreasing".into(),
            ));
        }
        let deg = a[0] as usize;
        let mut coefficients = vec![BigRational::zero(); deg + 1];
        for (i, &ai) in a.iter().enumerate() {
            let b = binomial_poly(ai, ai as i64 - i as i64);
            for (c, x) in coefficients.iter_mut().zip(b) {
                *c += x;
            }
        }
        Ok(HilbertPolynomialSpec {
            decomposition: a,
            coefficients,
        })
    }

    pub fn decomposition(&self) -> &[u32] {
        &self.decomposition
    }

    pub fn gotzmann(&self) -> usize {
        self.decomposition.len()
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn is_constant(&self) -> bool {
        self.decomposition[0] == 0
    }

    pub fn degree(&self) -> u32 {
        self.decomposition[0]
    }

    /// Value at `d ≥ 0` as a count; panics if the polynomial is negative there.
    pub fn at(&self, d: usize) -> usize {
        let v = eval_hilbert(self, d as i64).value;
        usize::try_from(v).expect("Hilbert polynomial value is negative")
    }
}

impl fmt::Display for HilbertPolynomialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (e, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push(if neg { '-' } else { '+' });
            }
            let coeff = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            match e {
                0 => out.push_str(&coeff),
                _ => {
                    if !abs.is_one() {
                        out.push_str(&coeff);
                    }
                    out.push('t');
                    if e > 1 {
                        out.push_str(&format!("^{e}"));
                    }
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

/// Coefficients (ascending) of `C(t + b, a) = (t+b)(t+b-1)…(t+b-a+1)/a!`.
fn binomial_poly(a: u32, b: i64) -> Vec<BigRational> {
    let mut poly = vec![BigRational::one()];
    for i in 0..a as i64 {
        // multiply by (t + b - i)
        let shift = BigRational::from_integer(BigInt::from(b - i));
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (e, c) in poly.iter().enumerate() {
            next[e + 1] += c;
            next[e] += c * &shift;
        }
        poly = next;
    }
    let fact: BigInt = (1..=a as i64).map(BigInt::from).product();
    let fact = BigRational::from_integer(fact);
    poly.into_iter().map(|c| c / &fact).collect()
}

fn trim(c: &mut Vec<BigRational>) {
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
}

/// Recovers the Gotzmann decomposition by repeatedly removing the binomial
/// matching the current leading degree.
pub fn hilbert_spec_from_coefficients(coeffs: &[BigRational]) -> Result<HilbertPolynomialSpec, MacaulayError> {
    let mut q = coeffs.to_vec();
    trim(&mut q);
    if q.is_empty() {
        return Err(MacaulayError::NotAdmissible("zero polynomial".into()));
    }
    let mut a: Vec<u32> = Vec::new();
    while !q.is_empty() {
        let e = q.len() - 1;
        let lc = &q[e];
        if !lc.is_positive() {
            return Err(MacaulayError::NotAdmissible(format!(
                "layer {} of degree {e} has nonpositive leading coefficient {lc}",
                a.len() + 1
            )));
        }
        if e == 0 {
            if !lc.is_integer() {
                return Err(MacaulayError::NotAdmissible(format!(
                    "constant remainder {lc} is not an integer"
                )));
            }
            let c = lc.to_integer().to_usize().filter(|&c| a.len() + c <= MAX_GOTZMANN);
            let c = c.ok_or(MacaulayError::TooLarge(MAX_GOTZMANN))?;
            a.extend(std::iter::repeat_n(0, c));
            break;
        }
        if a.len() >= MAX_GOTZMANN {
            return Err(MacaulayError::TooLarge(MAX_GOTZMANN));
        }
        let i = a.len() as i64;
        let b = binomial_poly(e as u32, e as i64 - i);
        for (c, x) in q.iter_mut().zip(b) {
            *c -= x;
        }
        a.push(e as u32);
        trim(&mut q);
    }
    HilbertPolynomialSpec::from_decomposition(a)
}

/// Exact evaluation; values below the Gotzmann number are flagged.
pub fn eval_hilbert(spec: &HilbertPolynomialSpec, d: i64) -> HilbertValue {
    let v: BigInt = spec
        .decomposition
        .iter()
        .enumerate()
        .map(|(i, &ai)| binomial_signed(d + ai as i64 - i as i64, ai as u64))
        .sum();
    HilbertValue {
        value: v.to_i128().expect("Hilbert value fits in i128"),
        extrapolated: d < spec.gotzmann() as i64,
    }
}

/// Parses `"3t+1"`, `"1/2t^2+3/2t+1"`, `"2"` or `"a:[1,1,1,0]"`.
pub fn parse_hilbert_polynomial(s: &str) -> Result<HilbertPolynomialSpec, MacaulayError> {
    let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || MacaulayError::Parse(s.to_string());
    if let Some(list) = text.strip_prefix("a:") {
        let inner = list.strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(bad)?;
        let a = inner
            .split(',')
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        return HilbertPolynomialSpec::from_decomposition(a);
    }
    if text.is_empty() {
        return Err(bad());
    }
    let mut coeffs: Vec<BigRational> = Vec::new();
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    terms.push(cur);
    for term in terms {
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, term.strip_prefix('+').unwrap_or(&term)),
        };
        let (coef_txt, exp) = match body.find('t') {
            None => (body, 0usize),
            Some(pos) => {
                let rest = &body[pos + 1..];
                let exp = if rest.is_empty() {
                    1
                } else {
                    rest.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?
                };
                let c = body[..pos].strip_suffix('*').unwrap_or(&body[..pos]);
                (c, exp)
            }
        };
        let coef = if coef_txt.is_empty() {
            if exp == 0 {
                return Err(bad());
            }
            BigRational::one()
        } else {
            parse_rational(coef_txt).map_err(|_| bad())?
        };
        if coeffs.len() <= exp {
            coeffs.resize(exp + 1, BigRational::zero());
        }
        coeffs[exp] += coef * BigRational::from_integer(BigInt::from(sign));
    }
    hilbert_spec_from_coefficients(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    /// Exhaustive search over strictly decreasing sequences, used as an oracle.
    fn brute_force_rep(c: u64, d: u64) -> Vec<u64> {
        fn go(c: u64, j: u64, max_k: u64, acc: &mut Vec<u64>) -> bool {
            if c == 0 {
                return true;
            }
            if j == 0 {
                return false;
            }
            for k in (0..max_k).rev() {
                let b = binomial(k, j).unwrap() as u64;
                if b <= c && b > 0 {
                    acc.push(k);
                    if go(c - b, j - 1, k, acc) {
                        return true;
                    }
                    acc.pop();
                }
            }
            false
        }
        let mut acc = Vec::new();
        assert!(go(c, d, c + d + 1, &mut acc));
        acc
    }

    #[test]
    fn representation_examples() {
        assert!(macaulay_rep(0, 3).terms.is_empty());
        assert_eq!(macaulay_rep(5, 2).terms, vec![3, 2]);
        assert_eq!(macaulay_rep(4, 2).terms, vec![3, 1]);
        assert_eq!(brute_force_rep(5, 2), vec![3, 2]);
        assert_eq!(brute_force_rep(4, 2), vec![3, 1]);
    }

    #[test]
    fn operator_examples() {
        assert_eq!(macaulay_upper(0, 4), 0);
        assert_eq!(macaulay_upper(4, 2), 5);
        assert_eq!(macaulay_upper(5, 2), 7);
        assert_eq!(macaulay_lower(0, 4), 0);
        assert_eq!(macaulay_lower(5, 2), 2);
        assert_eq!(macaulay_lower(5, 3), 1);
    }

    #[test]
    fn decomposition_examples() {
        let s = hilbert_spec_from_coefficients(&[rat(2), rat(1)]).unwrap();
        assert_eq!(s.decomposition(), &[1, 0]);
        assert_eq!(s.gotzmann(), 2);
        let s = hilbert_spec_from_coefficients(&[rat(2)]).unwrap();
        assert_eq!(s.decomposition(), &[0, 0]);
        let s = hilbert_spec_from_coefficients(&[rat(1), rat(3)]).unwrap();
        assert_eq!(s.decomposition(), &[1, 1, 1, 0]);
        for d in 4..=8 {
            assert_eq!(eval_hilbert(&s, d).value, 3 * d as i128 + 1);
        }
        assert!(matches!(
            hilbert_spec_from_coefficients(&[rat(-5), rat(1)]),
            Err(MacaulayError::NotAdmissible(_))
        ));
    }

    #[test]
    fn evaluation_examples() {
        let p = parse_hilbert_polynomial("t+2").unwrap();
        assert_eq!(eval_hilbert(&p, 2), HilbertValue { value: 4, extrapolated: false });
        assert_eq!(eval_hilbert(&p, 3).value, 5);
        assert!(eval_hilbert(&p, 1).extrapolated);
        let p = parse_hilbert_polynomial("3t+1").unwrap();
        assert_eq!(eval_hilbert(&p, 4).value, 13);
    }

    #[test]
    fn parsing_grammar() {
        let p = parse_hilbert_polynomial("a:[1,1,1,0]").unwrap();
        assert_eq!(p.to_string(), "3t+1");
        assert_eq!(parse_hilbert_polynomial("3*t + 1").unwrap(), p);
        let q = parse_hilbert_polynomial("1/2t^2+3/2t+1").unwrap();
        assert_eq!(q.decomposition(), &[2]);
        assert_eq!(q.to_string(), "1/2t^2+3/2t+1");
        assert_eq!(parse_hilbert_polynomial("2").unwrap().gotzmann(), 2);
        assert!(parse_hilbert_polynomial("t-5").is_err());
        assert!(parse_hilbert_polynomial("x+1").is_err());
        assert!(parse_hilbert_polynomial("a:[0,1]").is_err());
    }

    #[test]
    fn gotzmann_numbers() {
        for c in 1..40 {
            assert_eq!(parse_hilbert_polynomial(&c.to_string()).unwrap().gotzmann(), c);
        }
        assert_eq!(parse_hilbert_polynomial("t+2").unwrap().gotzmann(), 2);
    }

    #[test]
    fn round_trip_exhaustive() {
        for d in 1..=8 {
            for c in 0..=5000u64 {
                let rep = macaulay_rep(c, d);
                assert_eq!(rep.value(), c as u128);
                assert!(rep.terms.windows(2).all(|w| w[0] > w[1]));
                assert!(macaulay_upper(c, d) >= c as u128);
                assert!(macaulay_lower(c, d) <= c as u128);
            }
        }
    }

    fn decomposition() -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0u32..4, 1..9).prop_map(|mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            v
        })
    }

    proptest! {
        #[test]
        fn growth_identity(a in decomposition()) {
            let spec = HilbertPolynomialSpec::from_decomposition(a).unwrap();
            let r = spec.gotzmann();
            for big_r in r..r + 6 {
                let now = spec.at(big_r) as u64;
                prop_assert_eq!(macaulay_upper(now, big_r as u32), spec.at(big_r + 1) as u128);
            }
        }

        #[test]
        fn coefficients_round_trip(a in decomposition()) {
            let spec = HilbertPolynomialSpec::from_decomposition(a.clone()).unwrap();
            let again = hilbert_spec_from_coefficients(spec.coefficients()).unwrap();
            prop_assert_eq!(again.decomposition(), &a[..]);
            let reparsed = parse_hilbert_polynomial(&spec.to_string()).unwrap();
            prop_assert_eq!(reparsed, spec);
        }
    }
}
