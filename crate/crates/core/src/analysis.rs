//! Summary statistics over recorded traces.

/// Largest value among samples with `t > after`.
pub fn max_after(times: &[f64], values: &[f64], after: f64) -> Option<f64> {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t > after)
        .map(|(_, v)| *v)
        .reduce(f64::max)
}

/// Mean of samples with `t > after`.
pub fn mean_after(times: &[f64], values: &[f64], after: f64) -> Option<f64> {
    let (sum, n) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t > after)
        .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// `max - min` of samples with `t > after`.
pub fn range_after(times: &[f64], values: &[f64], after: f64) -> Option<f64> {
    let mut it = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t > after)
        .map(|(_, v)| *v);
    let first = it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Some(hi - lo)
}

/// Linear interpolation of a sampled signal; `times` must be increasing.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    if times.is_empty() || t < times[0] || t > *times.last()? {
        return None;
    }
    let idx = times.partition_point(|s| *s <= t);
    if idx == 0 {
        return Some(values[0]);
    }
    if idx == times.len() {
        return Some(values[idx - 1]);
    }
    let (t0, t1) = (times[idx - 1], times[idx]);
    let s = (t - t0) / (t1 - t0);
    Some(values[idx - 1] + s * (values[idx] - values[idx - 1]))
}

/// Largest deviation `|y(t + period) - y(t)|` over samples with `t > after`
/// (and `t + period` inside the record), divided by the post-transient range
/// of the signal. `None` when less than one full period follows `after` or
/// the signal is constant.
pub fn periodic_deviation(times: &[f64], values: &[f64], period: f64, after: f64) -> Option<f64> {
    let range = range_after(times, values, after)?;
    if range == 0.0 {
        return None;
    }
    let mut worst: Option<f64> = None;
    for (t, v) in times.iter().zip(values) {
        if *t <= after {
            continue;
        }
        let Some(shifted) = interpolate(times, values, t + period) else {
            break;
        };
        let d = (shifted - v).abs();
        worst = Some(worst.map_or(d, |w| w.max(d)));
    }
    worst.map(|w| w / range)
}

/// Maxima over consecutive windows `[after + k w, after + (k + 1) w)` that are
/// fully covered by the record.
pub fn window_maxima(times: &[f64], values: &[f64], after: f64, width: f64) -> Vec<f64> {
    let Some(&end) = times.last() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut start = after;
    while start + width <= end + 1e-9 {
        let stop = start + width;
        let m = times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= start && **t < stop)
            .map(|(_, v)| *v)
            .reduce(f64::max);
        if let Some(m) = m {
            out.push(m);
        }
        start = stop;
    }
    out
}

/// True when each window maximum exceeds its predecessor by at most
/// `relative_slack` times the first window maximum.
pub fn envelope_non_increasing(maxima: &[f64], relative_slack: f64) -> bool {
    let Some(&first) = maxima.first() else {
        return true;
    };
    let slack = relative_slack * first.abs();
    maxima.windows(2).all(|w| w[1] <= w[0] + slack)
}
