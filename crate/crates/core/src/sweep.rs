//! Parameter sweeps of the squeezed thermal family at fixed angles, with CSV output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{AngleSettings, Verdict};
use crate::error::{Error, Result};
use crate::gaussian::{build_squeezed_thermal, gaussian_ch, SqueezedThermalSpec};
use crate::policy::NumericalPolicy;

/// How `v` follows `u` along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// `v = u`
    Equal,
    /// `v = 0`
    Zero,
    /// `v = -u`
    Opposite,
}

impl Scenario {
    pub fn v(self, u: f64) -> f64 {
        match self {
            Scenario::Equal => u,
            Scenario::Zero => 0.0,
            Scenario::Opposite => -u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub u_start: f64,
    pub u_stop: f64,
    pub u_step: f64,
    pub scenarios: Vec<Scenario>,
    pub kappas: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            u_start: 0.0,
            u_stop: 1.2,
            u_step: 0.02,
            scenarios: vec![Scenario::Equal, Scenario::Zero, Scenario::Opposite],
            kappas: vec![1.0, 0.9, 0.8],
        }
    }
}

impl SweepSpec {
    /// Grid values `u_start + k u_step`, including `u_stop` up to rounding.
    pub fn u_values(&self) -> Result<Vec<f64>> {
        if !self.u_start.is_finite() || !self.u_stop.is_finite() || self.u_stop < self.u_start {
            return Err(Error::InvalidParameter(format!(
                "invalid u range [{}, {}]",
                self.u_start, self.u_stop
            )));
        }
        if self.u_stop == self.u_start {
            return Ok(vec![self.u_start]);
        }
        if !(self.u_step > 0.0) {
            return Err(Error::InvalidParameter(format!("u step {} must be positive", self.u_step)));
        }
        let count = ((self.u_stop - self.u_start) / self.u_step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.u_start + k as f64 * self.u_step).collect())
    }

    pub fn points(&self) -> Result<Vec<SqueezedThermalSpec>> {
        if self.scenarios.is_empty() || self.kappas.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one scenario and one kappa".into()));
        }
        let us = self.u_values()?;
        let mut out = Vec::with_capacity(us.len() * self.scenarios.len() * self.kappas.len());
        for &scenario in &self.scenarios {
            for &kappa in &self.kappas {
                for &u in &us {
                    out.push(SqueezedThermalSpec::new(u, scenario.v(u), kappa)?);
                }
            }
        }
        Ok(out)
    }
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub u: f64,
    pub v: f64,
    pub kappa: f64,
    pub f: f64,
    /// `-P(., .)`, the lower bound on `f`.
    pub neg_p_both: f64,
    pub verdict: Verdict,
}

impl SweepRow {
    pub fn violated(&self) -> bool {
        self.verdict.is_violated()
    }
}

/// Evaluates every sweep point in parallel; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec, angles: &AngleSettings, policy: &NumericalPolicy) -> Result<Vec<SweepRow>> {
    spec.points()?
        .into_par_iter()
        .map(|p| {
            let report = gaussian_ch(&build_squeezed_thermal(&p)?, angles, policy)?;
            Ok(SweepRow {
                u: p.u,
                v: p.v,
                kappa: p.kappa,
                f: report.f,
                neg_p_both: -report.p_both_removed,
                verdict: report.verdict,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "u,v,kappa,f,neg_p_both,violated";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_float(r.u),
            format_float(r.v),
            format_float(r.kappa),
            format_float(r.f),
            format_float(r.neg_p_both),
            u8::from(r.violated())
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let us = SweepSpec::default().u_values().unwrap();
        assert_eq!(us.len(), 61);
        assert!((us[60] - 1.2).abs() < 1e-12);
        assert_eq!(SweepSpec::default().points().unwrap().len(), 61 * 9);
    }

    #[test]
    fn degenerate_range_gives_one_row() {
        let spec = SweepSpec {
            u_start: 0.0,
            u_stop: 0.0,
            scenarios: vec![Scenario::Equal],
            kappas: vec![1.0],
            ..Default::default()
        };
        let rows = run_sweep(&spec, &AngleSettings::reference(), &NumericalPolicy::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].f.abs() < 1e-15);
        assert!(!rows[0].violated());
    }

    #[test]
    fn bad_ranges() {
        let base = SweepSpec::default();
        assert!(SweepSpec { u_stop: -1.0, ..base.clone() }.u_values().is_err());
        assert!(SweepSpec { u_step: 0.0, ..base.clone() }.u_values().is_err());
        assert!(SweepSpec { kappas: vec![0.0], ..base.clone() }.points().is_err());
        assert!(SweepSpec { scenarios: vec![], ..base }.points().is_err());
    }

    #[test]
    fn csv_layout() {
        let row = SweepRow {
            u: 0.1,
            v: -0.1,
            kappa: 1.0,
            f: -0.0,
            neg_p_both: -0.25,
            verdict: Verdict::NotViolated,
        };
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(!text.contains('\r'));
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.1);
        assert_eq!(fields[5], "0");
        assert_eq!(fields[0], "1.0000000000000001e-1");
    }

    #[test]
    fn columns_are_consistent() {
        let spec = SweepSpec {
            u_step: 0.2,
            ..Default::default()
        };
        let policy = NumericalPolicy::default();
        for r in run_sweep(&spec, &AngleSettings::reference(), &policy).unwrap() {
            let inside = r.f <= policy.verdict_tol && r.f >= r.neg_p_both - policy.verdict_tol;
            assert!(inside != r.violated());
        }
    }
}
