//! Flat `key = value` run configuration. Every key has a default equal
//! to the canonical source parameters, so an empty (or absent) config
//! reproduces the reference figures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::degeneracy;
use crate::statemodel::{build_ensemble, DetectorWindow, SourceEnsemble};
use crate::{Error, Result};

/// Detector half-width selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfwidthMode {
    /// One source phase-space cell per axis: half-width 1/(2Δk).
    PhaseCell,
    /// Explicit half-width in meters, same on all axes.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Mean electron energy, eV.
    pub e0_ev: f64,
    /// Energy spread, eV.
    pub de_ev: f64,
    /// Center offset of the second packet, in units of Δk.
    pub k_offset_in_dk: f64,
    /// One-electron weight.
    pub p1: f64,
    /// Two-electron weight.
    pub p2: f64,
    /// Detector position on the beam axis, m.
    pub detector_x_m: f64,
    pub detector_halfwidth_mode: HalfwidthMode,
    /// Time-grid overrides (defaults derive from the packet transit).
    pub t_min_s: Option<f64>,
    pub t_max_s: Option<f64>,
    pub n_t: Option<usize>,
    /// Position-sweep overrides for the two-detector scan.
    pub x_min_m: Option<f64>,
    pub x_max_m: Option<f64>,
    pub n_x: Option<usize>,
    /// Transverse-coherence improvement factor of the pancake packet.
    pub transverse_factor: f64,
    pub output_dir: Option<PathBuf>,
    pub emit_plot_script: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            e0_ev: 400.0,
            de_ev: 1.0,
            k_offset_in_dk: 0.5,
            p1: 0.5,
            p2: 0.1,
            detector_x_m: 0.1,
            detector_halfwidth_mode: HalfwidthMode::PhaseCell,
            t_min_s: None,
            t_max_s: None,
            n_t: None,
            x_min_m: None,
            x_max_m: None,
            n_x: None,
            transverse_factor: 10.0,
            output_dir: None,
            emit_plot_script: false,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?} as a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?} as a count")))
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// ignored, unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "E0_eV" => cfg.e0_ev = parse_f64(key, value)?,
                "dE_eV" => cfg.de_ev = parse_f64(key, value)?,
                "k_offset_in_dk" => cfg.k_offset_in_dk = parse_f64(key, value)?,
                "p1" => cfg.p1 = parse_f64(key, value)?,
                "p2" => cfg.p2 = parse_f64(key, value)?,
                "detector_x_m" => cfg.detector_x_m = parse_f64(key, value)?,
                "detector_halfwidth_mode" => {
                    cfg.detector_halfwidth_mode = if value == "phase_cell" {
                        HalfwidthMode::PhaseCell
                    } else {
                        HalfwidthMode::Fixed(parse_f64(key, value)?)
                    }
                }
                "t_min_s" => cfg.t_min_s = Some(parse_f64(key, value)?),
                "t_max_s" => cfg.t_max_s = Some(parse_f64(key, value)?),
                "n_t" => cfg.n_t = Some(parse_usize(key, value)?),
                "x_min_m" => cfg.x_min_m = Some(parse_f64(key, value)?),
                "x_max_m" => cfg.x_max_m = Some(parse_f64(key, value)?),
                "n_x" => cfg.n_x = Some(parse_usize(key, value)?),
                "transverse_factor" => cfg.transverse_factor = parse_f64(key, value)?,
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                "emit_plot_script" => {
                    cfg.emit_plot_script = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        other => {
                            return Err(Error::Config(format!(
                                "emit_plot_script: expected a boolean, got {other:?}"
                            )))
                        }
                    }
                }
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<()> {
        if let (Some(a), Some(b)) = (self.t_min_s, self.t_max_s) {
            if !(a < b) {
                return Err(Error::Config(format!("time grid empty: [{a}, {b}]")));
            }
        }
        if let Some(n) = self.n_t {
            if n < 2 {
                return Err(Error::Config("n_t must be at least 2".into()));
            }
        }
        if let Some(n) = self.n_x {
            if n < 2 {
                return Err(Error::Config("n_x must be at least 2".into()));
            }
        }
        if !(self.transverse_factor >= 1.0) {
            return Err(Error::Config(format!(
                "transverse_factor must be >= 1, got {}",
                self.transverse_factor
            )));
        }
        Ok(())
    }

    /// Source ensemble implied by the config.
    pub fn ensemble(&self) -> Result<SourceEnsemble> {
        build_ensemble(self.e0_ev, self.de_ev, self.k_offset_in_dk, self.p1, self.p2)
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Detector window at `detector_x_m` (or an explicit position).
    pub fn detector_at(&self, x: f64, ens: &SourceEnsemble) -> Result<DetectorWindow> {
        match self.detector_halfwidth_mode {
            HalfwidthMode::PhaseCell => DetectorWindow::phase_cell(x, ens.one_el.dk()),
            HalfwidthMode::Fixed(h) => DetectorWindow::new([x, 0.0, 0.0], [h, h, h]),
        }
    }

    pub fn detector(&self, ens: &SourceEnsemble) -> Result<DetectorWindow> {
        self.detector_at(self.detector_x_m, ens)
    }

    /// Time grid: explicit overrides if given, otherwise the packet's
    /// transit window around the arrival time.
    pub fn time_grid(&self, ens: &SourceEnsemble) -> Result<Vec<f64>> {
        let default = degeneracy::default_time_grid(&ens.one_el, self.detector_x_m)?;
        let lo = self.t_min_s.unwrap_or(default[0]);
        let hi = self.t_max_s.unwrap_or(*default.last().unwrap());
        let n = self.n_t.unwrap_or(default.len());
        if !(lo < hi) || n < 2 {
            return Err(Error::Config(format!("bad time grid: [{lo}, {hi}] x {n}")));
        }
        Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect())
    }

    /// Canonical text form: every key on one line in fixed order; basis
    /// of the provenance hash.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "E0_eV = {:e}", self.e0_ev);
        let _ = writeln!(s, "dE_eV = {:e}", self.de_ev);
        let _ = writeln!(s, "k_offset_in_dk = {:e}", self.k_offset_in_dk);
        let _ = writeln!(s, "p1 = {:e}", self.p1);
        let _ = writeln!(s, "p2 = {:e}", self.p2);
        let _ = writeln!(s, "detector_x_m = {:e}", self.detector_x_m);
        let _ = match self.detector_halfwidth_mode {
            HalfwidthMode::PhaseCell => writeln!(s, "detector_halfwidth_mode = phase_cell"),
            HalfwidthMode::Fixed(h) => writeln!(s, "detector_halfwidth_mode = {h:e}"),
        };
        for (k, v) in [
            ("t_min_s", self.t_min_s),
            ("t_max_s", self.t_max_s),
            ("x_min_m", self.x_min_m),
            ("x_max_m", self.x_max_m),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v:e}");
            }
        }
        for (k, v) in [("n_t", self.n_t), ("n_x", self.n_x)] {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        let _ = writeln!(s, "transverse_factor = {:e}", self.transverse_factor);
        s
    }

    /// FNV-1a hash of the canonical form, for provenance lines.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical_string().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let ens = cfg.ensemble().unwrap();
        assert_eq!((ens.p1, ens.p2), (0.5, 0.1));
        let det = cfg.detector(&ens).unwrap();
        assert_eq!(det.center, [0.1, 0.0, 0.0]);
        assert!((det.half_width[0] - 0.5 / ens.one_el.dk()).abs() < 1e-20);
    }

    #[test]
    fn parses_keys_and_comments() {
        let text = "
# canonical overrides
E0_eV = 100      # lower energy
p1 = 0.3
p2 = 0.2
detector_halfwidth_mode = 1e-8
n_t = 11
t_min_s = 0
t_max_s = 1e-9
emit_plot_script = true
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.e0_ev, 100.0);
        assert_eq!((cfg.p1, cfg.p2), (0.3, 0.2));
        assert_eq!(cfg.detector_halfwidth_mode, HalfwidthMode::Fixed(1e-8));
        assert!(cfg.emit_plot_script);
        let ens = cfg.ensemble().unwrap();
        let grid = cfg.time_grid(&ens).unwrap();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("no_such_key = 1").is_err());
        assert!(RunConfig::parse("p1").is_err());
        assert!(RunConfig::parse("p1 = maybe").is_err());
        assert!(RunConfig::parse("n_t = 1").is_err());
        assert!(RunConfig::parse("t_min_s = 2\nt_max_s = 1").is_err());
        assert!(RunConfig::parse("p1 = 0.9\np2 = 0.9").unwrap().ensemble().is_err());
        assert!(RunConfig::parse("transverse_factor = 0.2").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let b = RunConfig::parse("p1 = 0.25").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::parse("").unwrap().hash());
    }
}
