//! Independent minimax fits and exhaustive residual tables.
//!
//! Nothing here touches the constructive extraction: the fits minimize the
//! sup-norm distance to the two-parameter families directly, so their
//! deviation is a lower bound for any member of the family, the constructive
//! candidate included.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alpha::Alpha;
use crate::equation::residual;
use crate::error::{Error, Result};
use crate::function::Evaluate;

/// Smallest `|alpha|` for which the power basis is accepted.
pub const MIN_POWER_ALPHA: f64 = 0.01;
pub const MIN_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub a: f64,
    pub b: f64,
    pub dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub lambda: f64,
    pub c: f64,
    pub dev: f64,
}

/// Sup-norm fit of `f` by `a x^alpha + b ((1-x)^alpha - 1)` on `x_grid`.
pub fn chebyshev_fit_power<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    x_grid: &[f64],
) -> Result<PowerFit> {
    let a = alpha.value();
    if a.abs() <= MIN_POWER_ALPHA {
        return Err(Error::DegenerateBasis { alpha: a });
    }
    let basis = |x: f64| (x.powf(a), (1.0 - x).powf(a) - 1.0);
    let (p, q, dev) = fit(f, x_grid, basis)?;
    Ok(PowerFit { a: p, b: q, dev })
}

/// Sup-norm fit of `f` by `lambda ln(1-x) + c` on `x_grid`.
pub fn chebyshev_fit_log<F: Evaluate + ?Sized>(f: &F, x_grid: &[f64]) -> Result<LogFit> {
    let (lambda, c, dev) = fit(f, x_grid, |x: f64| ((-x).ln_1p(), 1.0))?;
    Ok(LogFit { lambda, c, dev })
}

/// Sampled data of a two-column sup-norm problem `min max_i |y_i - p u_i - q v_i|`.
struct Problem {
    y: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Problem {
    fn objective(&self, p: f64, q: f64) -> f64 {
        let mut m = 0f64;
        for ((y, u), v) in self.y.iter().zip(&self.u).zip(&self.v) {
            let d = (y - p * u - q * v).abs();
            if d > m || d.is_nan() {
                m = d;
            }
        }
        m
    }

    /// Exact minimizer over `q` when the second column keeps one sign.
    ///
    /// Then `|y_i - p u_i - q v_i| = w_i |t_i - q|` with `w_i = |v_i|`, and the
    /// optimum is the weighted centre of the worst pair straddling `q`. The
    /// pair is exchanged until it stops changing.
    fn inner_exact(&self, p: f64) -> Option<(f64, f64)> {
        let positive = self.v[0] > 0.0;
        if self.v.iter().any(|&v| (v > 0.0) != positive || v == 0.0) {
            return None;
        }
        let point = |i: usize| ((self.y[i] - p * self.u[i]) / self.v[i], self.v[i].abs());
        let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..self.y.len() {
            let t = point(i).0;
            tmin = tmin.min(t);
            tmax = tmax.max(t);
        }
        if !(tmin.is_finite() && tmax.is_finite()) {
            return None;
        }
        let mut q = (tmin + tmax) / 2.0;
        let mut pair = (usize::MAX, usize::MAX);
        for _ in 0..64 {
            let (mut l, mut lv, mut r, mut rv) = (0, f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
            for i in 0..self.y.len() {
                let (t, w) = point(i);
                let d = w * (q - t);
                if d > lv {
                    (l, lv) = (i, d);
                }
                if -d > rv {
                    (r, rv) = (i, -d);
                }
            }
            if (l, r) == pair {
                return Some((q, lv.max(rv)));
            }
            pair = (l, r);
            let ((tl, wl), (tr, wr)) = (point(l), point(r));
            q = (wl * tl + wr * tr) / (wl + wr);
        }
        None
    }

    /// Least-squares start, with columns scaled to unit norm.
    fn least_squares(&self) -> (f64, f64) {
        let nu = self
            .u
            .iter()
            .map(|t| t * t)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let nv = self
            .v
            .iter()
            .map(|t| t * t)
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let (mut suu, mut suv, mut svv, mut suy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((y, u), v) in self.y.iter().zip(&self.u).zip(&self.v) {
            let (u, v) = (u / nu, v / nv);
            suu += u * u;
            suv += u * v;
            svv += v * v;
            suy += u * y;
            svy += v * y;
        }
        let det = suu * svv - suv * suv;
        if det.abs() <= 1e-14 * suu * svv {
            return (suy / suu / nu, 0.0);
        }
        let p = (svv * suy - suv * svy) / det;
        let q = (suu * svy - suv * suy) / det;
        (p / nu, q / nv)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes a convex function of one variable starting from `t0` with step `w`.
fn minimize_1d(g: impl Fn(f64) -> f64, t0: f64, w: f64) -> (f64, f64) {
    let w = if w > 0.0 && w.is_finite() { w } else { 1.0 };
    let g0 = g(t0);
    let (mut lo, mut hi);
    let (gp, gm) = (g(t0 + w), g(t0 - w));
    if gp >= g0 && gm >= g0 {
        lo = t0 - w;
        hi = t0 + w;
    } else {
        let dir = if gp < gm { 1.0 } else { -1.0 };
        let mut step = w;
        let mut prev = t0;
        let mut cur = t0 + dir * step;
        let mut gcur = g(cur);
        loop {
            step *= 2.0;
            let next = cur + dir * step;
            let gnext = g(next);
            if gnext >= gcur || !next.is_finite() {
                lo = prev.min(next);
                hi = prev.max(next);
                break;
            }
            prev = cur;
            cur = next;
            gcur = gnext;
        }
    }
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..300 {
        if hi - lo <= 1e-16 * (lo.abs() + hi.abs()) + 1e-300 {
            break;
        }
        if gc <= gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - INV_PHI * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + INV_PHI * (hi - lo);
            gd = g(d);
        }
    }
    let mut best = if gc <= gd { (c, gc) } else { (d, gd) };
    if g0 < best.1 {
        best = (t0, g0);
    }
    best
}

fn fit<F: Evaluate + ?Sized>(
    f: &F,
    x_grid: &[f64],
    basis: impl Fn(f64) -> (f64, f64) + Sync,
) -> Result<(f64, f64, f64)> {
    if x_grid.len() < MIN_GRID {
        return Err(Error::DegenerateGrid(format!(
            "{} points, at least {MIN_GRID} needed",
            x_grid.len()
        )));
    }
    let rows = x_grid
        .par_iter()
        .map(|&x| {
            let (u, v) = basis(x);
            Ok((f.eval(x)?, u, v))
        })
        .collect::<Vec<Result<(f64, f64, f64)>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let prob = Problem {
        y: rows.iter().map(|r| r.0).collect(),
        u: rows.iter().map(|r| r.1).collect(),
        v: rows.iter().map(|r| r.2).collect(),
    };
    if prob.u.iter().chain(&prob.v).any(|t| !t.is_finite()) {
        return Err(Error::DegenerateGrid("basis not finite on grid".into()));
    }
    let (p0, q0) = prob.least_squares();
    let e0 = prob.objective(p0, q0);
    let umax = prob
        .u
        .iter()
        .fold(0f64, |m, t| m.max(t.abs()))
        .max(f64::MIN_POSITIVE);
    let vmax = prob
        .v
        .iter()
        .fold(0f64, |m, t| m.max(t.abs()))
        .max(f64::MIN_POSITIVE);
    let floor = 1e-12 * (1.0 + e0);
    let mut wp = (e0 / umax).max(floor / umax);
    let mut wq = (e0 / vmax).max(floor / vmax);

    // coarse search around the least-squares start
    let (mut p, mut q, mut best) = (p0, q0, e0);
    for i in -10..=10 {
        for j in -10..=10 {
            let (pi, qj) = (p0 + i as f64 * 0.4 * wp, q0 + j as f64 * 0.4 * wq);
            let e = prob.objective(pi, qj);
            if e < best {
                (p, q, best) = (pi, qj, e);
            }
        }
    }

    // nested refinement: the outer variable sees the exact inner minimum,
    // which keeps the one-dimensional problem convex
    for _ in 0..8 {
        let inner = |pp: f64| {
            prob.inner_exact(pp)
                .unwrap_or_else(|| minimize_1d(|qq| prob.objective(pp, qq), q, wq))
        };
        let (pn, en) = minimize_1d(|pp| inner(pp).1, p, wp);
        let (qn, en2) = inner(pn);
        let en = en.min(en2);
        let improved = best - en;
        if en < best {
            (p, q, best) = (pn, qn, prob.objective(pn, qn));
        }
        if improved < 1e-12 {
            break;
        }
        wp = (best / umax).max(floor / umax);
        wq = (best / vmax).max(floor / vmax);
    }
    Ok((p, q, best))
}

/// Residuals on the regular grid `x_i = i / (k + 1)`, `i = 1..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub nodes: Vec<f64>,
    pub margin: f64,
    /// `entries[i][j]` is the residual at `(nodes[i], nodes[j])`, `None`
    /// when `nodes[i] + nodes[j] > 1 - margin`.
    pub entries: Vec<Vec<Option<f64>>>,
    pub max_abs: f64,
}

impl ResidualTable {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i][j]
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, &t) in self.nodes.iter().enumerate() {
            if (t - x).abs() < (self.nodes[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}

pub const MAX_TABLE_DENSITY: usize = 200;

/// Exhaustive residual scan over the `k x k` grid clipped to `x + y <= 1 - margin`.
pub fn brute_force_residual_table<F: Evaluate + ?Sized>(
    f: &F,
    alpha: Alpha,
    k: usize,
    margin: f64,
) -> Result<ResidualTable> {
    if k == 0 || k > MAX_TABLE_DENSITY {
        return Err(Error::invalid(
            "k",
            format!("{k} is not in 1..={MAX_TABLE_DENSITY}"),
        ));
    }
    let nodes: Vec<f64> = (1..=k).map(|i| i as f64 / (k + 1) as f64).collect();
    let entries = nodes
        .par_iter()
        .map(|&x| {
            nodes
                .iter()
                .map(|&y| {
                    if x + y <= 1.0 - margin {
                        residual(f, alpha, x, y).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let max_abs = entries
        .iter()
        .flatten()
        .flatten()
        .fold(0f64, |m, r| m.max(r.abs()));
    Ok(ResidualTable {
        nodes,
        margin,
        entries,
        max_abs,
    })
}

/// Whether a sampled residual sup resolves the grid sup to within 10%.
pub fn sampled_covers_grid(sampled_eps: f64, table: &ResidualTable) -> bool {
    sampled_eps >= 0.9 * table.max_abs
}
