use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::approach::{expense, Approach, ApproachConfig, CostParams};
use super::process::{run_process, ErrorSample};
use crate::error::{Error, Result};
use crate::world::Scenario;

pub const DEFAULT_ERROR_TARGETS: [f64; 8] = [15.0, 12.0, 9.0, 7.0, 6.0, 5.0, 4.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub seed: u64,
    pub approach: String,
    pub t: f64,
    pub avg_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpenseRow {
    pub approach: String,
    pub target: f64,
    /// First checkpoint with error below the target.
    pub time: Option<f64>,
    pub expense: Option<f64>,
}

/// First checkpoint whose error is strictly below `target`.
pub fn first_time_below(series: &[ErrorSample], target: f64) -> Option<f64> {
    series.iter().find(|s| s.avg_error < target).map(|s| s.t)
}

/// For every approach and target, the first time its curve drops below the
/// target and the expense at that time. Targets must be descending.
pub fn error_vs_expense(curves: &[(Approach, Vec<ErrorSample>)], targets: &[f64]) -> Result<Vec<ExpenseRow>> {
    if targets.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid("error_targets", "must be strictly descending"));
    }
    let mut out = Vec::new();
    for (approach, series) in curves {
        let cost = CostParams::for_approach(approach);
        for &target in targets {
            let time = first_time_below(series, target);
            out.push(ExpenseRow { approach: approach.to_string(), target, time, expense: time.map(|t| expense(t, &cost)) });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub scenario: String,
    pub approaches: Vec<Approach>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
    pub rows: Vec<CurveRow>,
}

/// Runs every (seed, approach) replica in parallel. A `builtin:` scenario
/// is regenerated per seed; a file scenario keeps its layout and only the
/// measurement noise changes with the seed.
pub fn run_eval(scenario: &str, approaches: &[Approach], seeds: &[u64], horizon: f64, checkpoint_every: f64) -> Result<EvalResult> {
    for a in approaches {
        a.validate()?;
    }
    let jobs: Vec<(u64, Approach)> = seeds.iter().flat_map(|&s| approaches.iter().map(move |&a| (s, a))).collect();
    let curves: Vec<Result<Vec<CurveRow>>> = jobs
        .par_iter()
        .map(|&(seed, approach)| {
            let sc = Scenario::resolve(scenario, seed)?;
            let cfg = ApproachConfig::new(approach, sc.imu)?;
            let label = approach.to_string();
            Ok(run_process(&sc, &cfg, horizon, checkpoint_every, seed)?
                .into_iter()
                .map(|s| CurveRow { seed, approach: label.clone(), t: s.t, avg_error: s.avg_error })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for c in curves {
        rows.extend(c?);
    }
    Ok(EvalResult { scenario: scenario.to_string(), approaches: approaches.to_vec(), seeds: seeds.to_vec(), horizon, rows })
}

impl EvalResult {
    pub fn curve(&self, approach: &Approach, seed: u64) -> Vec<ErrorSample> {
        let label = approach.to_string();
        self.rows
            .iter()
            .filter(|r| r.seed == seed && r.approach == label)
            .map(|r| ErrorSample { t: r.t, avg_error: r.avg_error })
            .collect()
    }

    /// Mean over seeds at each checkpoint.
    pub fn mean_curve(&self, approach: &Approach) -> Vec<ErrorSample> {
        let per_seed: Vec<Vec<ErrorSample>> = self.seeds.iter().map(|&s| self.curve(approach, s)).collect();
        let Some(first) = per_seed.first() else { return Vec::new() };
        (0..first.len())
            .map(|i| ErrorSample {
                t: first[i].t,
                avg_error: per_seed.iter().map(|c| c[i].avg_error).sum::<f64>() / per_seed.len() as f64,
            })
            .collect()
    }

    /// Mean error at the last checkpoint not after `t`.
    pub fn mean_at(&self, approach: &Approach, t: f64) -> Option<f64> {
        self.mean_curve(approach).iter().rev().find(|s| s.t <= t + 1e-9).map(|s| s.avg_error)
    }

    pub fn expense_table(&self, targets: &[f64]) -> Result<Vec<ExpenseRow>> {
        let curves: Vec<(Approach, Vec<ErrorSample>)> = self.approaches.iter().map(|a| (*a, self.mean_curve(a))).collect();
        error_vs_expense(&curves, targets)
    }

    pub fn write_curves_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_expense_csv<W: Write>(&self, out: W, targets: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["approach", "target", "time", "expense"])?;
        for r in self.expense_table(targets)? {
            let opt = |v: Option<f64>| v.map_or("unreached".to_string(), |x| x.to_string());
            w.write_record([r.approach, r.target.to_string(), opt(r.time), opt(r.expense)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Line chart of the mean curves.
    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 50.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
        let curves: Vec<(String, Vec<ErrorSample>)> =
            self.approaches.iter().map(|a| (a.to_string(), self.mean_curve(a))).collect();
        let t_max = self.horizon.max(1.0);
        let e_max = curves.iter().flat_map(|(_, c)| c.iter().map(|s| s.avg_error)).fold(1.0, f64::max);
        let x = |t: f64| M + t / t_max * (W - 2.0 * M);
        let y = |e: f64| H - M - e / e_max * (H - 2.0 * M);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<path d="M{M},{top} V{bottom} H{right}" fill="none" stroke="black"/>"#,
            top = M,
            bottom = H - M,
            right = W - M
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">time</text>"#, W / 2.0, H - 10.0);
        let _ = writeln!(s, r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">average error</text>"#, H / 2.0, H / 2.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{t_max}</text>"#, W - M, H - M + 14.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{e_max:.1}</text>"#, M - 4.0, M + 4.0);
        for (i, (label, c)) in curves.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = c.iter().map(|p| format!("{:.2},{:.2}", x(p.t), y(p.avg_error))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
            let ly = M + 14.0 * i as f64;
            let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{label}</text>"#, W - M - 90.0);
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[(f64, f64)]) -> Vec<ErrorSample> {
        v.iter().map(|&(t, avg_error)| ErrorSample { t, avg_error }).collect()
    }

    #[test]
    fn expense_table_from_curves() {
        let chi = series(&[(0.0, 30.0), (1000.0, 10.0), (2000.0, 2.5)]);
        let fp = series(&[(0.0, 30.0), (5000.0, 8.0), (9000.0, 0.5)]);
        let rows = error_vs_expense(
            &[(Approach::Chi, chi), (Approach::Fingerprinting { p: 0.2, c: 5.0 }, fp)],
            &[12.0, 9.0, 1.0],
        )
        .unwrap();
        assert_eq!(rows[0].expense, Some(1000.0 * 0.1 + 36.0));
        assert_eq!(rows[1].time, Some(2000.0));
        assert_eq!(rows[2].time, None);
        assert_eq!(rows[5].expense, Some(900.0 + 180.0));
        assert!(error_vs_expense(&[], &[3.0, 4.0]).is_err());
    }

    #[test]
    fn first_below_is_strict() {
        let s = series(&[(0.0, 5.0), (1.0, 4.0), (2.0, 3.9)]);
        assert_eq!(first_time_below(&s, 4.0), Some(2.0));
        assert_eq!(first_time_below(&s, 1.0), None);
    }

    #[test]
    fn small_eval_round_trip() {
        let r = run_eval("builtin:grid100", &[Approach::Chi, Approach::Crowdsourcing { crowds: 2 }], &[0, 1], 1000.0, 250.0).unwrap();
        assert_eq!(r.rows.len(), 2 * 2 * 5);
        let mean = r.mean_curve(&Approach::Chi);
        let direct: Vec<f64> = [0, 1].iter().map(|&s| r.curve(&Approach::Chi, s)[4].avg_error).collect();
        assert!((mean[4].avg_error - (direct[0] + direct[1]) / 2.0).abs() < 1e-12);
        let mut buf = Vec::new();
        r.write_curves_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("seed,approach,t,avg_error\n"));
        let mut buf = Vec::new();
        r.write_expense_csv(&mut buf, &DEFAULT_ERROR_TARGETS).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * 8);
        assert!(r.to_svg().contains("polyline"));
    }

    #[test]
    fn bad_scenario_is_error() {
        assert!(run_eval("builtin:nope", &[Approach::Chi], &[0], 100.0, 250.0).is_err());
    }
}
