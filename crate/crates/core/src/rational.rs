//! Exact rational helpers.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rationals used for weights, thresholds and slopes.
pub type Q = Ratio<i128>;

pub fn q(n: i64) -> Q {
    Q::from_integer(i128::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(i128::from(n), i128::from(d))
}

/// `p/q` in lowest terms with `q > 0`, always with the slash.
pub fn fmt_q(value: &Q) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i128>().ok()?, d.trim().parse::<i128>().ok()?),
        None => (s.trim().parse::<i128>().ok()?, 1),
    };
    if d == 0 {
        return None;
    }
    Some(Q::new(n, d))
}

/// One end of an interval: value and whether it is included.
pub type Bound = Option<(Q, bool)>;

fn above(x: &Q, lo: &Bound) -> bool {
    match lo {
        None => true,
        Some((l, closed)) => x > l || (*closed && x == l),
    }
}

fn below(x: &Q, hi: &Bound) -> bool {
    match hi {
        None => true,
        Some((h, closed)) => x < h || (*closed && x == h),
    }
}

/// The simplest rational (smallest denominator, then smallest absolute
/// value) in the interval between `lo` and `hi`, or `None` if it is empty.
pub fn simplest_between(lo: Bound, hi: Bound) -> Option<Q> {
    if let (Some((l, lc)), Some((h, hc))) = (&lo, &hi) {
        if l > h || (l == h && !(*lc && *hc)) {
            return None;
        }
        if l == h {
            return Some(*l);
        }
    }
    let zero = Q::zero();
    if above(&zero, &lo) && below(&zero, &hi) {
        return Some(zero);
    }
    // the interval lies on one side of zero; try the integer closest to it
    let candidate = match (&lo, &hi) {
        (Some((l, _)), _) if *l >= zero => {
            let mut c = l.ceil();
            if !above(&c, &lo) {
                c += Q::one();
            }
            c
        }
        (_, Some((h, _))) => {
            let mut c = h.floor();
            if !below(&c, &hi) {
                c -= Q::one();
            }
            c
        }
        _ => unreachable!("unbounded interval contains zero"),
    };
    if above(&candidate, &lo) && below(&candidate, &hi) {
        return Some(candidate);
    }
    // no integer inside: both ends are finite and within (k, k + 1]
    let (l, lc) = lo.expect("bounded below");
    let (h, hc) = hi.expect("bounded above");
    let k = l.floor();
    let (l, h) = (l - k, h - k);
    // x = 1 / y with y between 1/h and 1/l, ends swapped
    let y_lo = Some((h.recip(), hc));
    let y_hi = if l.is_zero() { None } else { Some((l.recip(), lc)) };
    let y = simplest_between(y_lo, y_hi)?;
    Some(k + y.recip())
}

pub fn gcd_all(values: impl IntoIterator<Item = i128>) -> i128 {
    values.into_iter().fold(0i128, |g, v| g.gcd(&v.abs()))
}

pub fn is_negative(x: &Q) -> bool {
    x.is_negative()
}
