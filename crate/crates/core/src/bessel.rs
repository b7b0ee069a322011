//! Bessel functions of integer order for real arguments.
//!
//! Modified functions use the power series up to x = 20 and the large-argument
//! expansion beyond. Ordinary functions use the power series for small x,
//! Miller's backward recurrence in the middle range and the Hankel expansion
//! for large x.

use std::f64::consts::PI;

const SERIES_LIMIT_I: f64 = 20.0;
const SERIES_LIMIT_J: f64 = 5.0;
const HANKEL_LIMIT_J: f64 = 25.0;

/// Σ_m (x/2)^{2m+ν} / (m! (m+ν)!) for ν ∈ {0, 1}, with sign alternation when
/// `alternating` (ordinary J) or not (modified I).
fn power_series(nu: u32, x: f64, alternating: bool) -> f64 {
    let h = 0.5 * x;
    let q = h * h;
    let mut term = if nu == 0 { 1.0 } else { h };
    let mut sum = term;
    let mut m = 0u32;
    loop {
        m += 1;
        term *= q / (m as f64 * (m + nu) as f64);
        if alternating {
            term = -term;
        }
        sum += term;
        if term.abs() < 1e-17 * sum.abs() || m > 500 {
            break;
        }
    }
    sum
}

/// Asymptotic coefficients a_k(ν) = Π_{j≤k}(4ν² − (2j−1)²) / (k! 8^k).
fn asymptotic_coefficient(nu: u32, k: u32, prev: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let odd = (2 * k - 1) as f64;
    prev * (mu - odd * odd) / (k as f64 * 8.0)
}

/// e^{−x} I_ν(x) for large x.
fn scaled_modified_asymptotic(nu: u32, x: f64) -> f64 {
    let mut a = 1.0;
    let mut sum = 1.0;
    let mut xk = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        a = asymptotic_coefficient(nu, k, a);
        xk *= -x;
        let t = a / xk;
        if t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

fn scaled_modified(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT_I {
        power_series(nu, ax, false) * (-ax).exp()
    } else {
        scaled_modified_asymptotic(nu, ax)
    };
    if nu == 1 && x < 0.0 {
        -v
    } else {
        v
    }
}

/// e^{−|x|} I₀(x).
pub fn i0_scaled(x: f64) -> f64 {
    scaled_modified(0, x)
}

/// e^{−|x|} I₁(x).
pub fn i1_scaled(x: f64) -> f64 {
    scaled_modified(1, x)
}

pub fn i0(x: f64) -> f64 {
    i0_scaled(x) * x.abs().exp()
}

pub fn i1(x: f64) -> f64 {
    i1_scaled(x) * x.abs().exp()
}

fn hankel(nu: u32, x: f64) -> f64 {
    // P and Q collect the even and odd terms of Σ a_k (i/x)^k.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut xk = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        a = asymptotic_coefficient(nu, k, a);
        xk *= x;
        let t = a / xk;
        if t.abs() > last {
            break;
        }
        last = t.abs();
        let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += s * t;
        } else {
            q += s * t;
        }
        if last < 1e-17 {
            break;
        }
    }
    let chi = x - (nu as f64) * PI / 2.0 - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn ordinary(nu: u32, x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT_J {
        power_series(nu, ax, true)
    } else if ax < HANKEL_LIMIT_J {
        jn_sequence(1, ax)[nu as usize]
    } else {
        hankel(nu, ax)
    };
    if nu == 1 && x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn j0(x: f64) -> f64 {
    ordinary(0, x)
}

pub fn j1(x: f64) -> f64 {
    ordinary(1, x)
}

/// J_0(x), …, J_{n_max}(x) for x ≥ 0 by Miller's backward recurrence,
/// normalized with J₀ + 2Σ J_{2k} = 1.
pub fn jn_sequence(n_max: usize, x: f64) -> Vec<f64> {
    assert!(x >= 0.0, "jn_sequence expects a non-negative argument");
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let m = n_max.max(x.ceil() as usize) as f64;
    let mut start = (m + 30.0 + 2.0 * (40.0 * m).sqrt()) as usize;
    start += start % 2;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // J_{k−1} = (2k/x) J_k − J_{k+1}
        let prev = (2.0 * k as f64 / x) * cur - next;
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
