//! Test-only oracles and instance generators. Nothing here calls into the
//! optimizer; rate formulas are written out again from scratch.

#![allow(dead_code)]

use ampshare_core::{classify_mode, ChannelGains, InterferenceMode, LinkBudget, PowerBudget};
use rand::Rng;

/// Log-uniform ratio in `[-20, 40]` dB.
pub fn ratio_db<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.gen_range(-20.0..40.0) / 10.0)
}

pub fn random_budget<R: Rng>(rng: &mut R) -> LinkBudget {
    LinkBudget::new(ratio_db(rng), ratio_db(rng), ratio_db(rng), ratio_db(rng)).unwrap()
}

/// Rejection-samples a link budget of the requested regime.
pub fn budget_in_mode<R: Rng>(rng: &mut R, mode: InterferenceMode) -> LinkBudget {
    loop {
        let lb = random_budget(rng);
        if classify_mode(&lb) == mode {
            return lb;
        }
    }
}

pub fn unit_channel(lb: &LinkBudget) -> (ChannelGains, PowerBudget) {
    lb.to_channel().unwrap()
}

fn c(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// Sum-rate of a private/common split written directly from the rate
/// expressions.
pub fn reference_sum_rate(g: &ChannelGains, b: &PowerBudget, p1p: f64, p2p: f64) -> f64 {
    let (p1c, p2c) = (b.p1 - p1p, b.p2 - p2p);
    let r1p = c(g.g11 * p1p / (g.g12 * p2p + b.n0));
    let r2p = c(g.g22 * p2p / (g.g21 * p1p + b.n0));
    let w1 = g.g11 * p1p + g.g12 * p2p + b.n0;
    let w2 = g.g21 * p1p + g.g22 * p2p + b.n0;
    let rx1 = [
        c(g.g11 * p1c / w1),
        c(g.g12 * p2c / w1),
        c((g.g11 * p1c + g.g12 * p2c) / w1),
    ];
    let rx2 = [
        c(g.g21 * p1c / w2),
        c(g.g22 * p2c / w2),
        c((g.g21 * p1c + g.g22 * p2c) / w2),
    ];
    let common = [rx1[2], rx2[2], rx1[0] + rx2[1], rx2[0] + rx1[1]]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    r1p + r2p + common
}

fn fine_axis(p: f64) -> Vec<f64> {
    let mut xs = vec![0.0, p];
    for k in 0..500 {
        xs.push(p * 10f64.powf(-10.0 + 10.0 * k as f64 / 499.0));
    }
    for k in 1..300 {
        xs.push(p * k as f64 / 300.0);
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Best sum-rate over a dense log/linear product grid, followed by a
/// coordinate-wise pattern search from the best grid point.
pub fn fine_oracle(g: &ChannelGains, b: &PowerBudget) -> (f64, f64, f64) {
    let xs = fine_axis(b.p1);
    let ys = fine_axis(b.p2);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &x in &xs {
        for &y in &ys {
            let v = reference_sum_rate(g, b, x, y);
            if v > best.0 {
                best = (v, x, y);
            }
        }
    }
    let (mut v, mut x, mut y) = best;
    let mut step = (b.p1.max(b.p2) * 1e-3).max(x.max(y) * 0.05);
    while step > 1e-15 * b.p1.max(b.p2) {
        let mut improved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let nx = (x + dx).clamp(0.0, b.p1);
            let ny = (y + dy).clamp(0.0, b.p2);
            let nv = reference_sum_rate(g, b, nx, ny);
            if nv > v {
                (v, x, y) = (nv, nx, ny);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, x, y)
}
