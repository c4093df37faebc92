//! Dense univariate polynomials with ascending coefficients.

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| a * i as f64)
        .collect()
}

pub fn trim(c: &[f64]) -> Vec<f64> {
    let mut v = c.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    v
}

pub fn degree(c: &[f64]) -> usize {
    trim(c).len() - 1
}

/// `Σ|cᵢ||x|ⁱ`, the natural scale for round-off in `eval(c, x)`.
fn magnitude(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x.abs() + a.abs())
}

/// Real roots, sorted and deduplicated. The roots of `p'` split the line
/// into intervals on which `p` is monotone; each sign change is bisected and
/// critical points where `p` vanishes are kept as multiple roots.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let c = trim(c);
    let n = c.len() - 1;
    if n == 0 {
        return vec![];
    }
    let bound = root_bound(&c);
    let mut knots = vec![-bound];
    knots.extend(
        real_roots(&derivative(&c))
            .into_iter()
            .filter(|x| x.abs() < bound),
    );
    knots.push(bound);
    let tol = |x: f64| eval(&c, x).abs() <= 1e-9 * magnitude(&c, x).max(1e-300);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if tol(lo) {
            roots.push(lo);
        }
        let (flo, fhi) = (eval(&c, lo), eval(&c, hi));
        if flo * fhi < 0.0 {
            let up = fhi > 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (eval(&c, mid) > 0.0) == up {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let x = if eval(&c, lo).abs() <= eval(&c, hi).abs() {
                lo
            } else {
                hi
            };
            roots.push(x);
        }
    }
    if tol(bound) {
        roots.push(bound);
    }
    for x in roots.iter_mut() {
        if x.abs() < 1e-14 {
            *x = 0.0;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + b.abs()));
    roots
}

/// Cauchy bound: every root lies in `|x| ≤ 1 + max|cᵢ/cₙ|`.
pub fn root_bound(c: &[f64]) -> f64 {
    let c = trim(c);
    let n = c.len() - 1;
    1.0 + c[..n].iter().map(|a| (a / c[n]).abs()).fold(0.0, f64::max)
}
