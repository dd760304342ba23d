//! Reference computations that share no code path with the library.
#![allow(dead_code)]

/// Time from the end of the reaction phase until the host has gained
/// `gap` metres on the truck, found by fixed 1 ms stepping of
/// `x_rel(t) = ½·a·(t − r_t)²` for `t ≥ r_t` and bisection inside the
/// crossing step.
pub fn integrated_pass_time(gap: f64, accel: f64, reaction: f64) -> f64 {
    const DT: f64 = 1e-3;
    let accel_at = |t: f64| if t >= reaction { accel } else { 0.0 };
    // Relative displacement / velocity after advancing `tau` from (x, v) at t.
    let advance = |t: f64, x: f64, v: f64, tau: f64| -> (f64, f64) {
        let end = t + tau;
        if t < reaction && end > reaction {
            let free = reaction - t;
            let (x1, v1) = (x + v * free, v);
            let rest = end - reaction;
            (x1 + v1 * rest + 0.5 * accel * rest * rest, v1 + accel * rest)
        } else {
            let a = accel_at(t);
            (x + v * tau + 0.5 * a * tau * tau, v + a * tau)
        }
    };
    if gap <= 0.0 {
        return 0.0;
    }
    let (mut t, mut x, mut v) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut k: u64 = 0;
    loop {
        let (nx, nv) = advance(t, x, v, DT);
        if nx >= gap {
            let (mut lo, mut hi) = (0.0_f64, DT);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if advance(t, x, v, mid).0 >= gap {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            return t + hi - reaction;
        }
        k += 1;
        t = k as f64 * DT;
        x = nx;
        v = nv;
    }
}

/// Linear interpolation of a sampled profile.
pub fn profile_height(samples: &[(f64, f64)], x: f64) -> f64 {
    for w in samples.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x >= x0 && x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    panic!("{x} outside profile");
}

/// Walks the antenna-to-antenna segment in 0.1 m steps and reports whether
/// it stays strictly above the road everywhere between the endpoints.
pub fn dense_line_of_sight(samples: &[(f64, f64)], antenna: f64, a: f64, b: f64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let h_lo = profile_height(samples, lo) + antenna;
    let h_hi = profile_height(samples, hi) + antenna;
    let n = ((hi - lo) * 10.0).round() as i64;
    for i in 1..n {
        let x = lo + i as f64 / 10.0;
        if x >= hi {
            break;
        }
        let ray = h_lo + (h_hi - h_lo) * (x - lo) / (hi - lo);
        if ray <= profile_height(samples, x) {
            return false;
        }
    }
    true
}

/// Analytic connectivity window for a disk channel on flat road.
pub fn analytic_connectivity(range_approach: f64, range_recede: f64, closing_speed: f64) -> f64 {
    (range_approach + range_recede) / closing_speed
}

/// Counts beacon ticks whose separation is within the direction-appropriate range.
pub fn counted_connectivity(sep0: f64, closing: f64, r_fwd: f64, r_bwd: f64, interval: f64, step: f64) -> f64 {
    let k = (interval / step).round() as u64;
    let ticks = (0..)
        .map(|n: u64| (n * k) as f64 * step)
        .map(|t| sep0 - closing * t)
        .take_while(|&s| s >= -r_bwd - closing * interval)
        .filter(|&s| if s >= 0.0 { s <= r_fwd } else { -s <= r_bwd })
        .count();
    ticks as f64 * interval
}

/// Triangular crest centred at `centre`: flat at 0 m elsewhere, `height` at
/// the top, `half_width` on each side. With equal antenna heights `h` and
/// vehicles symmetric about the top, the path clears iff separation
/// `< 2·h·half_width / height`.
pub fn crest_profile(centre: f64, half_width: f64, height: f64, span: (f64, f64)) -> Vec<(f64, f64)> {
    vec![
        (span.0, 0.0),
        (centre - half_width, 0.0),
        (centre, height),
        (centre + half_width, 0.0),
        (span.1, 0.0),
    ]
}
