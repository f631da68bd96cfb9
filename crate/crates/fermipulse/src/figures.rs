//! CSV reproduction of the reference figures and headline scalars.
//! Output is deterministic: numbers are written in 17-significant-digit
//! scientific notation (round-trip exact for f64) and each file carries
//! a provenance comment with the tool version and config hash.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::coulomb::{
    dispersion_ratio, pancake_comparison, relative_momentum, separation_at_detector,
    terminal_momentum, CoulombScenario,
};
use crate::degeneracy::{delta1_3d, delta_total};
use crate::detection::joint_density;
use crate::runconfig::RunConfig;
use crate::statemodel::SourceEnsemble;
use crate::{constants::HBAR, constants::M_E, Error, Result};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn open_csv(out_dir: &Path, name: &str, cfg: &RunConfig) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(
        w,
        "# fermipulse v{VERSION} config_hash={:016x}",
        cfg.hash()
    )?;
    Ok((path, w))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Center-of-mass arrival time of the two-electron pair at the detector.
fn pair_arrival_time(cfg: &RunConfig, ens: &SourceEnsemble) -> f64 {
    let kmid = 0.5 * (ens.two_el.a().k0()[0] + ens.two_el.b().k0()[0]);
    cfg.detector_x_m * M_E / (HBAR * kmid)
}

/// Writes the CSV for figure `n` (1–6); returns the file path.
///
/// Columns: fig1 `t_s,d1_3d`; fig2 `t_s,d2_sym_3d,d2_antisym_3d`;
/// fig3 `t_s,d2_total_3d`; fig4 `t_s,d1_3d,d2_total_3d,d_total`;
/// fig5 `x2_m,p_sym_per_m2,p_antisym_per_m2,p_total_per_m2`;
/// fig6 `x_m,p_rel_kg_m_per_s,p_rel_over_hbar_per_m`.
pub fn write_figure(n: u8, cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    let ens = cfg.ensemble()?;
    match n {
        1..=4 => {
            let det = cfg.detector(&ens)?;
            let grid = cfg.time_grid(&ens)?;
            let name = format!("fig{n}.csv");
            let (path, mut w) = open_csv(out_dir, &name, cfg)?;
            match n {
                1 => writeln!(w, "t_s,d1_3d")?,
                2 => writeln!(w, "t_s,d2_sym_3d,d2_antisym_3d")?,
                3 => writeln!(w, "t_s,d2_total_3d")?,
                _ => writeln!(w, "t_s,d1_3d,d2_total_3d,d_total")?,
            }
            for &t in &grid {
                let b = delta_total(&ens, &det, t)?;
                let row = match n {
                    1 => format!("{},{}", fmt(t), fmt(b.d1_3d)),
                    2 => format!(
                        "{},{},{}",
                        fmt(t),
                        fmt(b.d2_sym_3d),
                        fmt(b.d2_antisym_3d)
                    ),
                    3 => format!("{},{}", fmt(t), fmt(b.d2_total_3d)),
                    _ => format!(
                        "{},{},{},{}",
                        fmt(t),
                        fmt(b.d1_3d),
                        fmt(b.d2_total_3d),
                        fmt(b.d_total)
                    ),
                };
                writeln!(w, "{row}")?;
            }
            w.flush()?;
            maybe_plot_script(n, cfg, out_dir)?;
            Ok(path)
        }
        5 => {
            let x1 = cfg.detector_x_m;
            let t = pair_arrival_time(cfg, &ens);
            let lo = cfg.x_min_m.unwrap_or(x1 - 2e-6);
            let hi = cfg.x_max_m.unwrap_or(x1 + 2e-6);
            let n_x = cfg.n_x.unwrap_or(801);
            if !(lo < hi) {
                return Err(Error::Config(format!("empty position sweep [{lo}, {hi}]")));
            }
            let (path, mut w) = open_csv(out_dir, "fig5.csv", cfg)?;
            writeln!(w, "x2_m,p_sym_per_m2,p_antisym_per_m2,p_total_per_m2")?;
            for i in 0..n_x {
                let x2 = lo + (hi - lo) * i as f64 / (n_x - 1) as f64;
                let (ps, pas, pt) = joint_density(&ens.two_el, x1, t, x2, t)?;
                writeln!(w, "{},{},{},{}", fmt(x2), fmt(ps), fmt(pas), fmt(pt))?;
            }
            w.flush()?;
            maybe_plot_script(5, cfg, out_dir)?;
            Ok(path)
        }
        6 => {
            let s = CoulombScenario::from_packet(&ens.two_el, cfg.detector_x_m)?;
            let (path, mut w) = open_csv(out_dir, "fig6.csv", cfg)?;
            writeln!(w, "x_m,p_rel_kg_m_per_s,p_rel_over_hbar_per_m")?;
            // Log-spaced separations from x0 out to where the momentum
            // saturates.
            let n_pts = cfg.n_x.unwrap_or(600);
            let decades = 6.0;
            for i in 0..n_pts {
                let x = s.x0_rel * 10f64.powf(decades * i as f64 / (n_pts - 1) as f64);
                let p = relative_momentum(&s, x)?;
                writeln!(w, "{},{},{}", fmt(x), fmt(p), fmt(p / HBAR))?;
            }
            w.flush()?;
            maybe_plot_script(6, cfg, out_dir)?;
            Ok(path)
        }
        other => Err(Error::Config(format!("no figure {other}; expected 1..=6"))),
    }
}

fn maybe_plot_script(n: u8, cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    if !cfg.emit_plot_script {
        return Ok(());
    }
    let path = out_dir.join(format!("fig{n}.gnuplot"));
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# gnuplot script for fig{n}.csv")?;
    writeln!(w, "set datafile separator ','")?;
    writeln!(w, "set key autotitle columnhead")?;
    let (xlabel, ylabel) = match n {
        1..=4 => ("time [s]", "degeneracy"),
        5 => ("second detector position [m]", "joint density [1/m^2]"),
        _ => ("relative separation [m]", "relative momentum [kg m/s]"),
    };
    writeln!(w, "set xlabel '{xlabel}'")?;
    writeln!(w, "set ylabel '{ylabel}'")?;
    if n == 6 {
        writeln!(w, "set logscale x")?;
    }
    let cols = match n {
        1 | 3 => vec![2],
        2 => vec![2, 3],
        4 => vec![2, 3, 4],
        5 => vec![2, 3, 4],
        _ => vec![2],
    };
    let plots: Vec<String> = cols
        .iter()
        .map(|c| format!("'fig{n}.csv' using 1:{c} with lines"))
        .collect();
    writeln!(w, "plot {}", plots.join(", \\\n     "))?;
    w.flush()?;
    Ok(())
}

/// How a scalar is judged against its reference value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    /// |value/target − 1| ≤ tol.
    Rel(f64),
    /// |value − target| ≤ tol.
    Abs(f64),
    /// value within [lo, hi]; `target` is the nominal midpoint.
    Range(f64, f64),
}

/// One headline scalar with its reference check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    pub check: Check,
}

impl Scalar {
    pub fn passes(&self) -> bool {
        match self.check {
            Check::Rel(tol) => {
                self.target != 0.0 && (self.value / self.target - 1.0).abs() <= tol
            }
            Check::Abs(tol) => (self.value - self.target).abs() <= tol,
            Check::Range(lo, hi) => (lo..=hi).contains(&self.value),
        }
    }
}

/// Interior dip of a trace: index of the lowest interior local minimum
/// restricted to the core region (values above `core_frac`·max), with
/// its flanking maxima. Returns None when the trace has no interior dip.
pub fn find_dip(values: &[f64], core_frac: f64) -> Option<(usize, usize, usize)> {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let threshold = core_frac * max;
    let mut best: Option<usize> = None;
    for i in 1..values.len() - 1 {
        if values[i] < threshold {
            continue;
        }
        if values[i] <= values[i - 1] && values[i] <= values[i + 1] {
            if best.is_none_or(|b| values[i] < values[b]) {
                best = Some(i);
            }
        }
    }
    let dip = best?;
    // Flanking maxima on either side of the dip.
    let left = (0..dip).rev().max_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())?;
    let right = (dip + 1..values.len()).max_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())?;
    if values[left] <= values[dip] || values[right] <= values[dip] {
        return None;
    }
    Some((left, dip, right))
}

/// Full width of the dip at half depth (midway between the dip minimum
/// and the lower flanking maximum), in grid units interpolated to the
/// level crossings.
pub fn dip_fwhm(ts: &[f64], values: &[f64], dip: (usize, usize, usize)) -> Option<f64> {
    let (l, m, r) = dip;
    let level = values[m] + 0.5 * (values[l].min(values[r]) - values[m]);
    // Walk outward from the dip to the level crossings.
    let mut t_left = None;
    for i in (l..m).rev() {
        if values[i] >= level {
            let f = (level - values[i + 1]) / (values[i] - values[i + 1]);
            t_left = Some(ts[i + 1] + f * (ts[i] - ts[i + 1]));
            break;
        }
    }
    let mut t_right = None;
    for i in m + 1..=r {
        if values[i] >= level {
            let f = (level - values[i - 1]) / (values[i] - values[i - 1]);
            t_right = Some(ts[i - 1] + f * (ts[i] - ts[i - 1]));
            break;
        }
    }
    match (t_left, t_right) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    }
}

/// Computes all headline scalars with their reference checks.
pub fn compute_scalars(cfg: &RunConfig) -> Result<Vec<Scalar>> {
    let ens = cfg.ensemble()?;
    let det = cfg.detector(&ens)?;
    let mut out = Vec::new();

    // Degeneracy at the source (detector window moved to x = 0, t = 0).
    let src_det = cfg.detector_at(0.0, &ens)?;
    let src = delta_total(&ens, &src_det, 0.0)?;
    out.push(Scalar {
        name: "source_degeneracy",
        value: src.d_total,
        target: 0.2,
        check: Check::Rel(0.15),
    });

    // Peak one-electron degeneracy at the detector and its time.
    let grid = cfg.time_grid(&ens)?;
    let mut peak = f64::MIN;
    let mut t_peak = grid[0];
    let mut d2_trace = Vec::with_capacity(grid.len());
    for &t in &grid {
        let d1 = delta1_3d(&det, &ens.one_el, t)?;
        if d1 > peak {
            peak = d1;
            t_peak = t;
        }
        d2_trace.push(crate::degeneracy::delta2_total_3d(&det, &ens.two_el, t)?);
    }
    out.push(Scalar {
        name: "peak_d1_3d",
        value: peak,
        target: 1.55e-14,
        check: Check::Rel(0.10),
    });
    out.push(Scalar {
        name: "peak_time_s",
        value: t_peak,
        target: 8.43e-9,
        check: Check::Rel(0.005),
    });

    // Two-electron dip width.
    let fwhm = find_dip(&d2_trace, 0.5)
        .and_then(|dip| dip_fwhm(&grid, &d2_trace, dip))
        .unwrap_or(f64::NAN);
    out.push(Scalar {
        name: "dip_fwhm_s",
        value: fwhm,
        target: 20e-12,
        check: Check::Range(5e-12, 100e-12),
    });

    // Classical Coulomb model.
    let s = CoulombScenario::from_packet(&ens.two_el, cfg.detector_x_m)?;
    out.push(Scalar {
        name: "coulomb_x0_m",
        value: s.x0_rel,
        target: 5.52e-9,
        check: Check::Rel(0.01),
    });
    out.push(Scalar {
        name: "coulomb_p_ratio",
        value: terminal_momentum(&s) / s.p0_rel,
        target: 9.0,
        check: Check::Abs(0.5),
    });
    let x_det = separation_at_detector(&s)?;
    out.push(Scalar {
        name: "coulomb_x_det_m",
        value: x_det,
        target: 5.77e-4,
        check: Check::Rel(0.02),
    });
    out.push(Scalar {
        name: "coulomb_suppression",
        value: s.x0_rel / x_det,
        target: 0.95e-5,
        check: Check::Rel(0.05),
    });
    out.push(Scalar {
        name: "dispersion_sqrt_alpha",
        value: dispersion_ratio(ens.one_el.dk(), s.t_detector())?,
        target: 3.1e-5,
        check: Check::Rel(0.05),
    });

    // Pancake (2D) comparison.
    let p = pancake_comparison(&ens.two_el, cfg.detector_x_m, cfg.transverse_factor)?;
    out.push(Scalar {
        name: "pancake_r0_m",
        value: p.r0,
        target: 5.55e-8,
        check: Check::Rel(0.01),
    });
    out.push(Scalar {
        name: "pancake_quantum_ratio",
        value: p.quantum_ratio,
        target: 9.75e-8,
        check: Check::Rel(0.05),
    });
    out.push(Scalar {
        name: "pancake_coulomb_ratio",
        value: p.coulomb_ratio,
        target: 9.35e-8,
        check: Check::Rel(0.05),
    });
    Ok(out)
}

/// Writes scalars.csv (name, value, target, status) and returns its
/// path together with the computed rows.
pub fn write_scalars(cfg: &RunConfig, out_dir: &Path) -> Result<(PathBuf, Vec<Scalar>)> {
    let scalars = compute_scalars(cfg)?;
    let (path, mut w) = open_csv(out_dir, "scalars.csv", cfg)?;
    writeln!(w, "name,value,target,status")?;
    for s in &scalars {
        writeln!(
            w,
            "{},{},{},{}",
            s.name,
            fmt(s.value),
            fmt(s.target),
            if s.passes() { "PASS" } else { "FAIL" }
        )?;
    }
    w.flush()?;
    Ok((path, scalars))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dip_finder_on_synthetic_trace() {
        // Two Gaussian humps with a central notch.
        let ts: Vec<f64> = (0..401).map(|i| i as f64 / 400.0).collect();
        let vals: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let env = (-((t - 0.5) / 0.2).powi(2)).exp();
                env * (1.0 - 0.4 * (-((t - 0.5) / 0.05).powi(2)).exp())
            })
            .collect();
        let (l, m, r) = find_dip(&vals, 0.5).unwrap();
        assert!(l < m && m < r);
        assert!((ts[m] - 0.5).abs() < 0.01);
        let w = dip_fwhm(&ts, &vals, (l, m, r)).unwrap();
        assert!(w > 0.02 && w < 0.2, "fwhm = {w}");
        // A pure Gaussian has no dip.
        let smooth: Vec<f64> = ts.iter().map(|&t| (-((t - 0.5) / 0.2).powi(2)).exp()).collect();
        assert!(find_dip(&smooth, 0.5).is_none());
    }

    #[test]
    fn scalar_checks() {
        let s = Scalar {
            name: "x",
            value: 1.04,
            target: 1.0,
            check: Check::Rel(0.05),
        };
        assert!(s.passes());
        let s2 = Scalar {
            check: Check::Rel(0.03),
            ..s
        };
        assert!(!s2.passes());
        let r = Scalar {
            name: "r",
            value: 7e-12,
            target: 20e-12,
            check: Check::Range(5e-12, 100e-12),
        };
        assert!(r.passes());
    }

    #[test]
    fn figure_output_is_deterministic() {
        let cfg = RunConfig {
            n_t: Some(31),
            ..RunConfig::default()
        };
        let dir = std::env::temp_dir().join("fermipulse_figtest");
        let p1 = write_figure(1, &cfg, &dir).unwrap();
        let a = std::fs::read(&p1).unwrap();
        let p2 = write_figure(1, &cfg, &dir).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# fermipulse"));
        assert_eq!(text.lines().count(), 2 + 31);
        assert!(text.lines().nth(1).unwrap().starts_with("t_s,"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn fig6_momentum_rises_and_saturates() {
        let cfg = RunConfig {
            n_x: Some(200),
            ..RunConfig::default()
        };
        let dir = std::env::temp_dir().join("fermipulse_fig6test");
        let path = write_figure(6, &cfg, &dir).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let ps: Vec<f64> = text
            .lines()
            .skip(2)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(ps.windows(2).all(|w| w[1] >= w[0]), "not monotone");
        let last = *ps.last().unwrap();
        let prev = ps[ps.len() - 20];
        assert!((last / prev - 1.0).abs() < 1e-3, "not saturated");
        std::fs::remove_dir_all(&dir).ok();
    }
}
