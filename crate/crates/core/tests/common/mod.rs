//! Reference values computed without the crate's own quadrature or
//! recurrences: Hermite functions from the physicists' polynomials,
//! antiderivatives by an end-corrected cumulative trapezoid rule, and
//! integrals by composite Simpson.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Orthonormal `h_0..=h_n` at `x` and their derivatives, built from the
/// physicists' polynomials `H_{j+1} = 2x H_j - 2j H_{j-1}`.
pub fn oracle_hermite(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let g = (-0.5 * x * x).exp();
    let mut poly = vec![1.0, 2.0 * x];
    for j in 1..n {
        let next = 2.0 * x * poly[j] - 2.0 * j as f64 * poly[j - 1];
        poly.push(next);
    }
    poly.truncate(n + 1);
    let mut norm = PI.sqrt();
    let mut h = Vec::with_capacity(n + 1);
    let mut dh = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            norm *= 2.0 * j as f64;
        }
        let s = 1.0 / norm.sqrt();
        h.push(s * poly[j] * g);
        // (H_j e^{-x²/2})' = (2j H_{j-1} - x H_j) e^{-x²/2}
        let lower = if j > 0 {
            2.0 * j as f64 * poly[j - 1]
        } else {
            0.0
        };
        dh.push(s * (lower - x * poly[j]) * g);
    }
    (h, dh)
}

#[derive(Default, Clone, Copy)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Brute-force `A`, `N(k)` and `S(k)` over the full basis `0..=n`, for
/// `k = 0..=k_max`, by composite Simpson on `[-half, half]` with `intervals`
/// subintervals.
pub struct OracleTables {
    pub a: Vec<Vec<f64>>,
    pub n: Vec<Vec<Vec<f64>>>,
    pub s: Vec<Vec<Vec<f64>>>,
}

pub fn oracle_tables(n: usize, k_max: usize, half: f64, intervals: usize) -> OracleTables {
    assert!(intervals.is_multiple_of(2));
    let dim = n + 1;
    let step = 2.0 * half / intervals as f64;
    let mut a = vec![vec![Kahan::default(); dim]; k_max + 1];
    let mut nn = vec![vec![vec![Kahan::default(); dim]; dim]; k_max + 1];
    let mut ss = vec![vec![vec![Kahan::default(); dim]; dim]; k_max + 1];
    // each block is summed plainly, then folded into the compensated totals
    const BLOCK: usize = 16;
    let mut ba = vec![vec![0.0; dim]; k_max + 1];
    let mut bn = vec![vec![vec![0.0; dim]; dim]; k_max + 1];
    let mut bs = vec![vec![vec![0.0; dim]; dim]; k_max + 1];

    let mut p = vec![Kahan::default(); dim];
    let mid = (intervals / 2) as f64;
    let (mut h_prev, mut d_prev) = oracle_hermite(n, -half);
    for i in 0..=intervals {
        // integer offsets keep the abscissae exactly mirrored about 0
        let x = (i as f64 - mid) * step;
        let (h, d) = oracle_hermite(n, x);
        if i > 0 {
            for j in 0..dim {
                p[j].add(0.5 * step * (h_prev[j] + h[j]) + step * step / 12.0 * (d_prev[j] - d[j]));
            }
        }
        let pv: Vec<f64> = p.iter().map(|k| k.value()).collect();
        let w = step / 3.0
            * if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
        let mut wk = w;
        for k in 0..=k_max {
            for ii in 0..dim {
                let wh = wk * h[ii];
                ba[k][ii] += wh;
                for jj in ii..dim {
                    bn[k][ii][jj] += wh * h[jj];
                }
                for jj in 0..dim {
                    bs[k][ii][jj] += wh * pv[jj];
                }
            }
            wk *= x;
        }
        if i % BLOCK == BLOCK - 1 || i == intervals {
            for k in 0..=k_max {
                for ii in 0..dim {
                    a[k][ii].add(std::mem::take(&mut ba[k][ii]));
                    for jj in 0..dim {
                        nn[k][ii][jj].add(std::mem::take(&mut bn[k][ii][jj]));
                        ss[k][ii][jj].add(std::mem::take(&mut bs[k][ii][jj]));
                    }
                }
            }
        }
        h_prev = h;
        d_prev = d;
    }
    let a = a
        .iter()
        .map(|r| r.iter().map(|v| v.value()).collect())
        .collect();
    let n_out = nn
        .iter()
        .map(|m| {
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            if i <= j {
                                m[i][j].value()
                            } else {
                                m[j][i].value()
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let s = ss
        .iter()
        .map(|m| {
            m.iter()
                .map(|r| r.iter().map(|v| v.value()).collect())
                .collect()
        })
        .collect();
    OracleTables { a, n: n_out, s }
}

/// Samples of a profile density and its antiderivative on a uniform grid,
/// with Simpson weights.
pub struct OracleGrid {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub f: Vec<f64>,
    pub big_f: Vec<f64>,
}

/// `f = Σ c_j h_j` over explicit indices, and its running integral.
pub fn oracle_profile(terms: &[(usize, f64)], half: f64, intervals: usize) -> OracleGrid {
    let n = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let step = 2.0 * half / intervals as f64;
    let mut out = OracleGrid {
        x: Vec::with_capacity(intervals + 1),
        w: Vec::with_capacity(intervals + 1),
        f: Vec::with_capacity(intervals + 1),
        big_f: Vec::with_capacity(intervals + 1),
    };
    let mut running = Kahan::default();
    let mut prev = (0.0, 0.0);
    for i in 0..=intervals {
        let x = -half + step * i as f64;
        let (h, d) = oracle_hermite(n, x);
        let f: f64 = terms.iter().map(|&(j, c)| c * h[j]).sum();
        let df: f64 = terms.iter().map(|&(j, c)| c * d[j]).sum();
        if i > 0 {
            running.add(0.5 * step * (prev.0 + f) + step * step / 12.0 * (prev.1 - df));
        }
        prev = (f, df);
        let w = step / 3.0
            * if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
        out.x.push(x);
        out.w.push(w);
        out.f.push(f);
        out.big_f.push(running.value());
    }
    out
}

impl OracleGrid {
    pub fn integrate(&self, g: impl Fn(f64, f64, f64) -> f64) -> f64 {
        let mut acc = Kahan::default();
        for i in 0..self.x.len() {
            acc.add(self.w[i] * g(self.x[i], self.f[i], self.big_f[i]));
        }
        acc.value()
    }
}
