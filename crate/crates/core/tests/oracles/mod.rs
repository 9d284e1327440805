//! Reference computations that share no code with the library: a generic
//! least-squares projection, exhaustive search over `{0, 1/n}` vectors,
//! brute-force path enumeration, an idealized ARIS model and the published
//! cost table transcribed by hand.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

/// Orthogonal projection of `w` onto `span{vi, vj, e_i}` through the SVD
/// pseudo-inverse of the `n x 3` column matrix. The pseudo-inverse is
/// applied to `w - vi` and `vi` added back, which keeps the result accurate
/// when the columns are nearly dependent and `w` is close to `vi`.
pub fn da_projection(vi: &[f64], vj: &[f64], i: usize, w: &[f64]) -> Vec<f64> {
    let n = vi.len();
    let a = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => vi[r],
        1 => vj[r],
        _ => f64::from(u8::from(r == i)),
    });
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    // Singular values below 1e-10 * max are treated as zero.
    let pinv = svd
        .pseudo_inverse(1e-10 * smax)
        .expect("SVD with both factors");
    let gap = DVector::from_iterator(n, w.iter().zip(vi).map(|(x, y)| x - y));
    let coef = pinv * gap;
    (a * coef).iter().zip(vi).map(|(x, y)| x + y).collect()
}

/// `S' v`: the estimate implied by a normal vector `v` and initials `s`.
pub fn implied_estimate(v: &[f64], initials: &[Vec<f64>]) -> Vec<f64> {
    let d = initials[0].len();
    (0..d)
        .map(|q| v.iter().zip(initials).map(|(c, s)| c * s[q]).sum())
        .collect()
}

/// Rank of a small integer matrix (rows are vectors) by fraction-free elimination.
pub fn int_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let (a, b) = (m[rank][c], m[r][c]);
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot) {
                    *x = *x * a - y * b;
                }
                let g = m[r].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    m[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mask_vec(mask: u32, n: usize) -> Vec<i64> {
    (0..n).map(|l| i64::from(mask >> l & 1)).collect()
}

/// Whether the indicator of `u` lies in `span{1_vi, 1_vj, e_i}`.
pub fn in_lattice_span(u: u32, vi: u32, vj: u32, i: usize, n: usize) -> bool {
    let base = vec![mask_vec(vi, n), mask_vec(vj, n), mask_vec(1 << i, n)];
    let mut with = base.clone();
    with.push(mask_vec(u, n));
    int_rank(&base) == int_rank(&with)
}

/// Largest support among `{0,1}` vectors in the span, i.e. the minimum of
/// `||u/n - 1/n||^2` over the span intersected with the `{0, 1/n}` lattice,
/// together with every support attaining it.
pub fn dda_brute_force(vi: u32, vj: u32, i: usize, n: usize) -> (u32, Vec<u32>) {
    let mut best = 0;
    let mut arg = Vec::new();
    for u in 0..(1u32 << n) {
        if !in_lattice_span(u, vi, vj, i, n) {
            continue;
        }
        let c = u.count_ones();
        if c > best {
            best = c;
            arg.clear();
        }
        if c == best {
            arg.push(u);
        }
    }
    (best, arg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DdaBranch {
    Union,
    Adopt,
    Keep,
    TieAdopt,
}

/// The discrete update's case table, evaluated on bitmasks.
pub fn dda_case(vi: u32, vj: u32, i: usize, alternative: bool) -> DdaBranch {
    let without = !(1u32 << i);
    let (a, b) = (vi & without, vj & without);
    if a & b == 0 {
        DdaBranch::Union
    } else if a.count_ones() < b.count_ones() {
        DdaBranch::Adopt
    } else if alternative && a.count_ones() == b.count_ones() && a != b {
        DdaBranch::TieAdopt
    } else {
        DdaBranch::Keep
    }
}

/// A signal as plain numbers: (sender, receiver, send, receive).
pub type RawSignal = (usize, usize, f64, f64);

/// Earliest final arrival over all time-respecting chains from `src` to
/// `dst`, found by enumerating every chain.
pub fn brute_force_arrival(signals: &[RawSignal], src: usize, dst: usize) -> Option<f64> {
    fn extend(signals: &[RawSignal], at: usize, after: f64, dst: usize, best: &mut Option<f64>) {
        for &(s, r, t0, t1) in signals {
            if s == at && t0 > after {
                if r == dst {
                    *best = Some(best.map_or(t1, |b: f64| b.min(t1)));
                }
                extend(signals, r, t1, dst, best);
            }
        }
    }
    let mut best = None;
    extend(signals, src, f64::NEG_INFINITY, dst, &mut best);
    best
}

/// Idealized ARIS: every node folds the same independent round statistic
/// `1 / (n * mean of r Exp(sum s) draws)` into its running average. Returns
/// the empirical `quantile` of `|estimate - mean|` over `trials` replicates.
pub fn aris_ideal_quantile(
    initials: &[f64],
    r: usize,
    rounds: usize,
    trials: usize,
    quantile: f64,
    seed: u64,
) -> f64 {
    let n = initials.len() as f64;
    let total: f64 = initials.iter().sum();
    // The mean of r draws from Exp(total) is Gamma(r, 1 / (r * total)).
    let mean_of_min = Gamma::new(r as f64, 1.0 / (r as f64 * total)).expect("valid gamma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors: Vec<f64> = (0..trials)
        .map(|_| {
            let est = (0..rounds)
                .map(|_| 1.0 / (n * mean_of_min.sample(&mut rng)))
                .sum::<f64>()
                / rounds as f64;
            (est - total / n).abs()
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    errors[((quantile * trials as f64).ceil() as usize).min(trials) - 1]
}

/// Published cost table entries, in the order
/// `[min phi, max phi, min rho, max rho, min omega, max omega]`.
pub fn published_costs(alg: &str, n: u64, d: u64, r: u64) -> [u64; 6] {
    let h = n / 2;
    match alg {
        "bm" => [
            4 * d + 5,
            2 * n * d + 4 + h,
            2 * d + 1,
            2 * (n - 1) * d + h,
            6 * d + 6,
            2 * (2 * n - 1) * d + 4 + 2 * h,
        ],
        "da" => [
            4 * d + 6,
            4 * d + 2 * n + 4,
            2 * d + 1,
            2 * d + 2 * n,
            6 * d + 8,
            6 * d + 4 * n + 4,
        ],
        "oh" => [
            4 * d + 5,
            4 * d + 4 + h,
            2 * d + 2,
            2 * d + 2,
            6 * d + 7,
            6 * d + 6 + h,
        ],
        "dda" => [
            4 * d + 5,
            4 * d + 4 + h,
            2 * d + 1,
            2 * d + h,
            6 * d + 6,
            6 * d + 4 + 2 * h,
        ],
        "gossip" => [2 * d, 2 * d, 2 * d, 2 * d, 4 * d, 4 * d],
        // 4(r + 3/2)d is written as (4r + 6)d to stay in integers.
        "aris" => [
            7 + 2 * (r + 2) * d,
            h + 6 + 2 * (r + 2) * d,
            3 + 2 * (r + 1) * d,
            h + 2 + 2 * (r + 1) * d,
            10 + (4 * r + 6) * d,
            2 * h + 8 + (4 * r + 6) * d,
        ],
        other => panic!("no table column for {other}"),
    }
}
