//! Synthetic single-detector click data and the one-parameter fit that
//! recovers the one- and two-electron weights of the source from the
//! spatial click distribution.
//!
//! Measurement model (detector-at-source frame, t = 0): each pulse
//! yields no click with probability p₀, a click drawn from the
//! one-electron density P₁ with probability p₁, or a click drawn from
//! the two-electron single-click marginal P with probability p₂. The
//! fit estimates p₀ from the null fraction and then least-squares fits
//! p₁ against the binned click histogram.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detection::{marginal_density, p1_density};
use crate::specfun::{erf_complex, erf_real};
use crate::statemodel::{overlap, SourceEnsemble};
use crate::{Error, Result};

/// Outcome record of a synthetic run: one entry per pulse, `None` for a
/// no-click pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickSample {
    events: Vec<Option<f64>>,
    pub seed: u64,
}

impl ClickSample {
    pub fn n_pulses(&self) -> usize {
        self.events.len()
    }

    pub fn n_null(&self) -> usize {
        self.events.iter().filter(|e| e.is_none()).count()
    }

    /// Beam-axis coordinates of the click events, in pulse order.
    pub fn positions(&self) -> Vec<f64> {
        self.events.iter().filter_map(|e| *e).collect()
    }

    /// CSV export: pulse_index, outcome (null|click), x_m.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "pulse_index,outcome,x_m")?;
        for (i, e) in self.events.iter().enumerate() {
            match e {
                Some(x) => writeln!(w, "{i},click,{x:.16e}")?,
                None => writeln!(w, "{i},null,")?,
            }
        }
        Ok(())
    }
}

/// Result of the one-parameter weight fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub p1_hat: f64,
    pub p2_hat: f64,
    /// Sum of squared histogram residuals at the optimum.
    pub sse: f64,
    /// Objective evaluations spent by the minimizer.
    pub n_evals: usize,
}

// Inverse-CDF sampler over a dense tabulation of a 1D density.
struct TabulatedSampler {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedSampler {
    fn build<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> Self {
        let h = (hi - lo) / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x).max(0.0)).collect();
        let mut cdf = vec![0.0; n];
        for i in 1..n {
            cdf[i] = cdf[i - 1] + 0.5 * (ys[i - 1] + ys[i]) * h;
        }
        let total = cdf[n - 1];
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Self { xs, cdf }
    }

    fn draw(&self, u: f64) -> f64 {
        let i = match self
            .cdf
            .binary_search_by(|c| c.partial_cmp(&u).unwrap())
        {
            Ok(i) => i,
            Err(i) => i,
        };
        if i == 0 {
            return self.xs[0];
        }
        if i >= self.cdf.len() {
            return *self.xs.last().unwrap();
        }
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[i - 1] + frac * (self.xs[i] - self.xs[i - 1])
    }
}

/// Draws `n_pulses` synthetic outcomes from the ensemble with the
/// ChaCha8 generator (reproducible across platforms for a given seed).
pub fn sample_clicks(ens: &SourceEnsemble, n_pulses: usize, seed: u64) -> Result<ClickSample> {
    if n_pulses == 0 {
        return Err(Error::Domain("need at least one pulse".into()));
    }
    let dk = ens.one_el.dk();
    let k0 = ens.one_el.k0()[0];
    let halfwidth = 6.0 / dk;
    let one = TabulatedSampler::build(-halfwidth, halfwidth, 16385, |x| {
        p1_density(k0, dk, x, 0.0).unwrap_or(0.0)
    });
    let two = TabulatedSampler::build(-halfwidth, halfwidth, 16385, |x| {
        marginal_density(&ens.two_el, x).map(|(_, _, p)| p).unwrap_or(0.0)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::with_capacity(n_pulses);
    for _ in 0..n_pulses {
        let which: f64 = rng.gen();
        if which < ens.p0 {
            events.push(None);
        } else {
            let u: f64 = rng.gen();
            let sampler = if which < ens.p0 + ens.p1 { &one } else { &two };
            events.push(Some(sampler.draw(u)));
        }
    }
    Ok(ClickSample { events, seed })
}

// Window mass of the one-electron density at t=0 over [a, b].
fn p1_mass(dk: f64, a: f64, b: f64) -> Result<f64> {
    let s = std::f64::consts::SQRT_2 * dk;
    Ok(0.5 * (erf_real(s * b)? - erf_real(s * a)?))
}

// Window mass of the two-electron marginal over [a, b], using the
// closed-form Gaussian-cosine integral (complex erf).
fn marginal_mass(ens: &SourceEnsemble, a: f64, b: f64) -> Result<f64> {
    let pair = &ens.two_el;
    let dk = pair.dk();
    let ov = overlap(pair);
    let dkx = pair.a().k0()[0] - pair.b().k0()[0];
    let ca = 0.25 / (1.0 + ov * ov) + 0.75 / (1.0 - ov * ov);
    let cb = 0.25 / (1.0 + ov * ov) - 0.75 / (1.0 - ov * ov);
    let gauss = p1_mass(dk, a, b)?;
    let s = std::f64::consts::SQRT_2 * dk;
    let shift = dkx / (2.0 * std::f64::consts::SQRT_2 * dk);
    let cosine = 0.5
        * ov
        * (erf_complex(Complex64::new(s * b, -shift))? - erf_complex(Complex64::new(s * a, -shift))?)
            .re;
    Ok(ca * gauss + cb * ov * cosine)
}

// Bounded scalar minimization by golden-section search with parabolic
// interpolation (Brent), to absolute tolerance xtol.
fn brent_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    evals: &mut usize,
) -> (f64, f64) {
    let golden = 0.381_966_011_250_105_2;
    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    *evals += 1;
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol = xtol.max(1e-12 * x.abs());
        if (x - m).abs() <= 2.0 * tol - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol {
            // Parabolic fit through (v, w, x).
            let r = (x - w) * (fx - fv);
            let q0 = (x - v) * (fx - fw);
            let p0 = (x - v) * q0 - (x - w) * r;
            let q = 2.0 * (q0 - r);
            let (p0, q) = if q > 0.0 { (-p0, q) } else { (p0, -q) };
            if p0.abs() < (0.5 * q * e).abs() && p0 > q * (a - x) && p0 < q * (b - x) {
                e = d;
                d = p0 / q;
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol {
            x + d
        } else {
            x + tol.copysign(d)
        };
        let fu = f(u);
        *evals += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

const N_BINS: usize = 50;

/// Fits the one-electron weight to a click sample: p₀ from the null
/// fraction, then p₁ minimizing the squared distance between the binned
/// click density and the window-normalized model
/// [p₁P₁(x) + p₂P(x)] / (p₁M₁ + p₂M_P).
pub fn fit_p1(sample: &ClickSample, ens_shape: &SourceEnsemble) -> Result<FitResult> {
    let clicks = sample.positions();
    if clicks.is_empty() {
        return Err(Error::Domain("no click events to fit".into()));
    }
    let p0_hat = sample.n_null() as f64 / sample.n_pulses() as f64;
    let dk = ens_shape.one_el.dk();
    let k0 = ens_shape.one_el.k0()[0];
    // 50 uniform bins over ±2/dk around the packet center.
    let halfwidth = 2.0 / dk;
    let bin_w = 2.0 * halfwidth / N_BINS as f64;
    let mut counts = [0usize; N_BINS];
    let mut in_window = 0usize;
    for &x in &clicks {
        if (-halfwidth..halfwidth).contains(&x) {
            let i = (((x + halfwidth) / bin_w) as usize).min(N_BINS - 1);
            counts[i] += 1;
            in_window += 1;
        }
    }
    if in_window == 0 {
        return Err(Error::Domain("all clicks fall outside the histogram window".into()));
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::Domain("degenerate histogram: fewer than two occupied bins".into()));
    }
    let hist: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (in_window as f64 * bin_w))
        .collect();
    let centers: Vec<f64> = (0..N_BINS)
        .map(|i| -halfwidth + (i as f64 + 0.5) * bin_w)
        .collect();
    let m1 = p1_mass(dk, -halfwidth, halfwidth)?;
    let mp = marginal_mass(ens_shape, -halfwidth, halfwidth)?;
    let shape_one: Vec<f64> = centers
        .iter()
        .map(|&x| p1_density(k0, dk, x, 0.0))
        .collect::<Result<_>>()?;
    let shape_two: Vec<f64> = centers
        .iter()
        .map(|&x| marginal_density(&ens_shape.two_el, x).map(|(_, _, p)| p))
        .collect::<Result<_>>()?;
    let p1_max = (1.0 - p0_hat).max(0.0);
    let mut n_evals = 0usize;
    let objective = |p1: f64| -> f64 {
        let p2 = p1_max - p1;
        let norm = p1 * m1 + p2 * mp;
        let mut sse = 0.0;
        for i in 0..N_BINS {
            let model = (p1 * shape_one[i] + p2 * shape_two[i]) / norm;
            let r = hist[i] - model;
            sse += r * r;
        }
        sse
    };
    // Unimodality screen on a coarse grid; on failure fall back to the
    // best grid cell before polishing.
    let grid_n = 101;
    let grid: Vec<f64> = (0..grid_n)
        .map(|i| p1_max * i as f64 / (grid_n - 1) as f64)
        .collect();
    let grid_f: Vec<f64> = grid.iter().map(|&p| objective(p)).collect();
    n_evals += grid_n;
    let mut minima = 0usize;
    for i in 1..grid_n - 1 {
        if grid_f[i] < grid_f[i - 1] && grid_f[i] < grid_f[i + 1] {
            minima += 1;
        }
    }
    let best = grid_f
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let (lo, hi) = if minima <= 1 {
        (0.0, p1_max)
    } else {
        eprintln!(
            "warning: fit objective not unimodal ({minima} local minima); \
             refining around the best grid cell"
        );
        (
            grid[best.saturating_sub(1)],
            grid[(best + 1).min(grid_n - 1)],
        )
    };
    let mut brent_evals = 0usize;
    let (p1_hat, sse) = brent_min(&objective, lo, hi, 1e-4, &mut brent_evals);
    n_evals += brent_evals;
    Ok(FitResult {
        p1_hat,
        p2_hat: p1_max - p1_hat,
        sse,
        n_evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statemodel::{default_ensemble, SourceEnsemble};

    #[test]
    fn sampling_is_deterministic_and_mixes_correctly() {
        let ens = default_ensemble();
        let a = sample_clicks(&ens, 20_000, 7).unwrap();
        let b = sample_clicks(&ens, 20_000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_clicks(&ens, 20_000, 8).unwrap();
        assert_ne!(a, c);
        // Null fraction within 5 sigma binomial of p0 = 0.4.
        let frac = a.n_null() as f64 / a.n_pulses() as f64;
        let sigma = (0.4f64 * 0.6 / 20_000.0).sqrt();
        assert!((frac - 0.4).abs() < 5.0 * sigma, "null fraction {frac}");
    }

    #[test]
    fn all_null_when_vacuum_only() {
        let ens = default_ensemble();
        let vacuum = SourceEnsemble::new(0.0, 0.0, ens.one_el, ens.two_el).unwrap();
        let s = sample_clicks(&vacuum, 500, 3).unwrap();
        assert_eq!(s.n_null(), 500);
        assert!(fit_p1(&s, &ens).is_err());
    }

    #[test]
    fn window_masses_match_quadrature() {
        let ens = default_ensemble();
        let dk = ens.one_el.dk();
        let (a, b) = (-2.0 / dk, 2.0 / dk);
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut num1 = 0.0;
        let mut nump = 0.0;
        for i in 0..=n {
            let x = a + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            num1 += w * h * p1_density(ens.one_el.k0()[0], dk, x, 0.0).unwrap();
            nump += w * h * marginal_density(&ens.two_el, x).unwrap().2;
        }
        assert!((p1_mass(dk, a, b).unwrap() - num1).abs() < 1e-9);
        assert!((marginal_mass(&ens, a, b).unwrap() - nump).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_ground_truth() {
        let ens = default_ensemble();
        let s = sample_clicks(&ens, 100_000, 42).unwrap();
        let fit = fit_p1(&s, &ens).unwrap();
        assert!(
            (0.45..=0.55).contains(&fit.p1_hat),
            "p1_hat = {}",
            fit.p1_hat
        );
        assert!((0.05..=0.15).contains(&fit.p2_hat), "p2_hat = {}", fit.p2_hat);
        assert!(fit.n_evals > 0);
        // Determinism of the full pipeline.
        let fit2 = fit_p1(&sample_clicks(&ens, 100_000, 42).unwrap(), &ens).unwrap();
        assert_eq!(fit, fit2);
    }

    #[test]
    fn pure_one_electron_data_pins_p1() {
        let ens = default_ensemble();
        let pure = SourceEnsemble::new(0.6, 0.0, ens.one_el, ens.two_el).unwrap();
        let s = sample_clicks(&pure, 100_000, 11).unwrap();
        let fit = fit_p1(&s, &ens).unwrap();
        let p0_hat = s.n_null() as f64 / s.n_pulses() as f64;
        assert!(
            fit.p1_hat >= 0.95 * (1.0 - p0_hat),
            "p1_hat = {} vs 1-p0 = {}",
            fit.p1_hat,
            1.0 - p0_hat
        );
    }

    #[test]
    fn brent_minimizer_finds_known_minimum() {
        let mut evals = 0;
        let (x, fx) = brent_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-6, &mut evals);
        assert!((x - 0.3).abs() < 1e-5, "x = {x}");
        assert!((fx - 1.0).abs() < 1e-9);
        assert!(evals > 0 && evals < 100);
        // Asymmetric quartic with the minimum near an edge.
        let (x2, _) = brent_min(|x| (x - 0.95).powi(4), 0.0, 1.0, 1e-6, &mut evals);
        assert!((x2 - 0.95).abs() < 1e-2, "x2 = {x2}");
    }

    #[test]
    fn csv_export_shape() {
        let ens = default_ensemble();
        let s = sample_clicks(&ens, 100, 1).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 101);
        assert_eq!(lines[0], "pulse_index,outcome,x_m");
        assert!(lines[1].starts_with("0,"));
    }
}
