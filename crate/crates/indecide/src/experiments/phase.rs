use std::path::Path;

use indecide_core::gmm::{
    m_lower, m_star, optimal_exponent, phase_cell, PhaseCell, PhaseCellValue, PhaseGridConfig,
};

use super::parallel_map;
use crate::chart::{heatmap, Heatmap, Series};
use crate::data::writer;
use crate::format::fmt_f64;
use crate::FormatError;

/// Settings of the two-panel phase experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseExperimentConfig {
    /// Grid points per axis and panel.
    pub resolution: usize,
    /// Target risk of the `c < 1/2` panel.
    pub delta_low: f64,
    /// Target risk of the `c > 1/2` panel.
    pub delta_high: f64,
    /// Skipped half-width around `c = 1/2`.
    pub dead_band: f64,
    /// Display range of the risk ratio.
    pub cap: (f64, f64),
}

impl PhaseExperimentConfig {
    /// Desk (200 points) or full (1000 points) resolution.
    pub fn defaults(full: bool) -> Self {
        Self {
            resolution: if full { 1000 } else { 200 },
            delta_low: 1e-7,
            delta_high: 1e-15,
            dead_band: 0.05,
            cap: (0.5, 2.0),
        }
    }

    fn panel(&self, low: bool) -> PhaseGridConfig {
        let (delta, range) = if low {
            (self.delta_low, (0.0, 0.5))
        } else {
            (self.delta_high, (0.5, 1.0))
        };
        let mut g = PhaseGridConfig::uniform(delta, range, self.resolution, self.resolution);
        g.cap = self.cap;
        g.dead_band = self.dead_band;
        g
    }
}

/// Where the optimal exponent sits relative to the two curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeStatus {
    /// Between `m_lower` and `m_star`.
    Contained,
    /// Outside the two curves.
    Outside,
    /// `m_lower` or the optimal exponent is not defined at this `c`.
    Undefined,
}

impl EnvelopeStatus {
    fn label(self) -> &'static str {
        match self {
            EnvelopeStatus::Contained => "contained",
            EnvelopeStatus::Outside => "outside",
            EnvelopeStatus::Undefined => "undefined",
        }
    }
}

/// Optimal exponent and the theoretical curves at one `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    /// Separation parameter.
    pub c: f64,
    /// Target risk.
    pub delta_target: f64,
    /// Exponent of the oracle's minimal indecision.
    pub m_hat: f64,
    /// Critical exponent.
    pub m_star: f64,
    /// Finite-`delta` companion curve; NaN where undefined.
    pub m_lower: f64,
    /// Containment verdict.
    pub status: EnvelopeStatus,
}

/// Envelope rows along `c_grid` (points at `c = 1/2` are skipped).
pub fn envelope(c_grid: &[f64], delta_target: f64) -> Vec<EnvelopeRow> {
    c_grid
        .iter()
        .filter(|&&c| c != 0.5)
        .map(|&c| {
            let ms = m_star(c).unwrap_or(f64::NAN);
            let mut row = EnvelopeRow {
                c,
                delta_target,
                m_hat: f64::NAN,
                m_star: ms,
                m_lower: f64::NAN,
                status: EnvelopeStatus::Undefined,
            };
            let Ok((m_hat, point)) = optimal_exponent(c, delta_target) else {
                return row;
            };
            row.m_hat = m_hat;
            let vanishing = if c > 0.5 { point.gamma } else { point.decided };
            if let Ok(ml) = m_lower(c, vanishing) {
                row.m_lower = ml;
                let (lo, hi) = (ml.min(ms), ml.max(ms));
                let slack = 1e-9;
                row.status = if m_hat >= lo - slack && m_hat <= hi + slack {
                    EnvelopeStatus::Contained
                } else {
                    EnvelopeStatus::Outside
                };
            }
            row
        })
        .collect()
}

/// One computed panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePanel {
    /// `low` (`c < 1/2`) or `high` (`c > 1/2`).
    pub name: &'static str,
    /// Grid description.
    pub grid: PhaseGridConfig,
    /// Cells ordered by `c` then `m`.
    pub cells: Vec<PhaseCell>,
    /// Envelope along the panel's `c` grid, dead band excluded.
    pub envelope: Vec<EnvelopeRow>,
}

/// Both panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOutput {
    /// `low` then `high`.
    pub panels: Vec<PhasePanel>,
}

/// Computes both phase panels and their envelopes.
pub fn run_phase_experiment(cfg: &PhaseExperimentConfig, workers: Option<usize>) -> Result<PhaseOutput, FormatError> {
    if cfg.resolution == 0 {
        return Err(FormatError::schema(0, "resolution must be at least 1"));
    }
    let mut panels = Vec::with_capacity(2);
    for (name, low) in [("low", true), ("high", false)] {
        let grid = cfg.panel(low);
        grid.validate()?;
        let rows = parallel_map(workers, grid.c_grid.len(), |i| {
            let c = grid.c_grid[i];
            grid.m_grid.iter().map(|&m| phase_cell(&grid, c, m)).collect::<Vec<_>>()
        });
        let live: Vec<f64> = grid
            .c_grid
            .iter()
            .copied()
            .filter(|c| (c - 0.5).abs() > grid.dead_band)
            .collect();
        panels.push(PhasePanel {
            name,
            envelope: envelope(&live, grid.delta_target),
            cells: rows.into_iter().flatten().collect(),
            grid,
        });
    }
    Ok(PhaseOutput { panels })
}

fn status(v: &PhaseCellValue) -> &'static str {
    match v {
        PhaseCellValue::Resolved { .. } => "resolved",
        PhaseCellValue::Unresolved => "unresolved",
        PhaseCellValue::DeadBand => "dead-band",
    }
}

impl PhaseOutput {
    /// Writes the panel CSVs, the envelope CSV and one heatmap per panel;
    /// returns the file names.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>, FormatError> {
        let mut files = Vec::new();
        let env_name = "phase_envelope.csv".to_string();
        let mut env = writer(std::fs::File::create(dir.join(&env_name))?);
        env.write_record(["panel", "c", "delta_target", "m_hat", "m_star", "m_lower", "status"])?;
        for p in &self.panels {
            let name = format!("phase_{}.csv", p.name);
            let mut w = writer(std::fs::File::create(dir.join(&name))?);
            w.write_record(["c", "m", "gamma", "t", "risk_ratio_raw", "risk_ratio_capped", "status"])?;
            for cell in &p.cells {
                let mut rec = vec![fmt_f64(cell.c), fmt_f64(cell.m)];
                match cell.value {
                    PhaseCellValue::Resolved {
                        point,
                        ratio_raw,
                        ratio_capped,
                    } => rec.extend([fmt_f64(point.gamma), fmt_f64(point.t), fmt_f64(ratio_raw), fmt_f64(ratio_capped)]),
                    _ => rec.extend([String::new(), String::new(), String::new(), String::new()]),
                }
                rec.push(status(&cell.value).into());
                w.write_record(&rec)?;
            }
            w.flush()?;
            files.push(name);
            for r in &p.envelope {
                env.write_record([
                    p.name.to_string(),
                    fmt_f64(r.c),
                    fmt_f64(r.delta_target),
                    fmt_f64(r.m_hat),
                    fmt_f64(r.m_star),
                    fmt_f64(r.m_lower),
                    r.status.label().to_string(),
                ])?;
            }
            let svg_name = format!("phase_{}.svg", p.name);
            std::fs::write(dir.join(&svg_name), p.svg())?;
            files.push(svg_name);
        }
        env.flush()?;
        files.push(env_name);
        Ok(files)
    }
}

impl PhasePanel {
    /// Heatmap of the capped risk ratio with the envelope curves.
    pub fn svg(&self) -> String {
        let values: Vec<Option<f64>> = self
            .cells
            .iter()
            .map(|c| match c.value {
                PhaseCellValue::Resolved { ratio_capped, .. } => Some(ratio_capped),
                _ => None,
            })
            .collect();
        let in_frame = |v: f64| if (0.0..=1.0).contains(&v) { v } else { f64::NAN };
        let curve = |name: &str, f: &dyn Fn(&EnvelopeRow) -> f64, dashed: bool| Series {
            name: name.into(),
            points: self.envelope.iter().map(|r| (r.c, in_frame(f(r)))).collect(),
            band: Vec::new(),
            dashed,
        };
        let overlays = [
            curve("m_hat", &|r| r.m_hat, false),
            curve("m_star", &|r| r.m_star, true),
            curve("m_lower", &|r| r.m_lower, true),
        ];
        let title = format!("risk / delta, delta = {:e}", self.grid.delta_target);
        heatmap(&Heatmap {
            title: &title,
            x_label: "c",
            y_label: "m",
            xs: &self.grid.c_grid,
            ys: &self.grid.m_grid,
            values: &values,
            scale: self.grid.cap,
            overlays: &overlays,
        })
    }
}
