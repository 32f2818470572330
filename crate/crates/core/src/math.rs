//! Small scalar helpers shared across modules.

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `log(sum(exp(xs)))`, shifted by the maximum. Returns `-inf` for empty or
/// all `-inf` input.
pub(crate) fn log_sum_exp<I>(xs: I) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.map(|x| exp(x - max)).sum();
    max + ln(sum)
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = j;
        }
    }
    best
}

/// Index of the smallest entry; ties go to the lowest index.
pub(crate) fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in xs.iter().enumerate().skip(1) {
        if x < xs[best] {
            best = j;
        }
    }
    best
}
