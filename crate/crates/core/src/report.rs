//! Uniform rendering of experiment reports: results CSV, log-log plot data
//! for rate fits, and verdict lines for the run record.
//!
//! All numbers are written with Rust's shortest-roundtrip float formatting,
//! so a report renders to byte-identical text whenever the underlying bits
//! agree.

use crate::experiments::{
    ClaimCheck, ContinuousDependenceReport, FractionalBvReport, KineticChecksReport,
    L1StabilityReport, TemporalBvReport, TimeSeries, ViscosityCauchyReport,
};
use crate::scalar::Real;
use crate::stats::RateFit;

/// Uniform surface the CLI persists: one results CSV, optional named plot
/// series, claims, and a human-readable summary block.
pub trait Report {
    fn results_csv(&self) -> String;
    fn plot_series(&self) -> Vec<(String, String)> {
        Vec::new()
    }
    fn claims(&self) -> &[ClaimCheck];
    fn summary(&self) -> String;
}

fn series_csv<T: Real>(series: &TimeSeries<T>) -> String {
    let mut out = String::from("t,mean,stderr\n");
    for ((t, m), s) in series.times.iter().zip(&series.mean).zip(&series.stderr) {
        out.push_str(&format!("{t},{m},{s}\n"));
    }
    out
}

fn rate_csv<T: Real>(scales: &[T], values: &[T], stderrs: &[T]) -> String {
    let mut out = String::from("scale,value,stderr\n");
    for ((x, v), s) in scales.iter().zip(values).zip(stderrs) {
        out.push_str(&format!("{x},{v},{s}\n"));
    }
    out
}

/// Two-column log-log series for external plotting.
fn loglog_csv<T: Real>(fit: &RateFit<T>) -> String {
    let mut out = String::from("log10_scale,log10_value\n");
    for &(x, v) in &fit.points {
        out.push_str(&format!("{},{}\n", x.as_f64().log10(), v.as_f64().log10()));
    }
    out
}

/// One verdict line per claim: `claim_id verdict measured threshold note`.
pub fn verdict_lines(claims: &[ClaimCheck]) -> String {
    let mut out = String::new();
    for c in claims {
        out.push_str(&format!(
            "{} {} measured={} threshold={} {}\n",
            c.id, c.verdict, c.measured, c.threshold, c.note
        ));
    }
    out
}

impl<T: Real> Report for L1StabilityReport<T> {
    fn results_csv(&self) -> String {
        series_csv(&self.series)
    }

    fn claims(&self) -> &[ClaimCheck] {
        &self.claims
    }

    fn summary(&self) -> String {
        let mut s = format!(
            "sup|D_x F_u| = {}\ntranslation_invariant = {}\n",
            self.sup_div_flux_u, self.translation_invariant
        );
        if let Some(fit) = &self.envelope {
            s.push_str(&format!(
                "fitted growth constant C = {} (r2 = {}, stderr = {})\n",
                fit.rate, fit.r_squared, fit.rate_stderr
            ));
        }
        s
    }
}

impl<T: Real> Report for FractionalBvReport<T> {
    fn results_csv(&self) -> String {
        series_csv(&self.nikolskii)
    }

    fn plot_series(&self) -> Vec<(String, String)> {
        vec![("bv_series".into(), series_csv(&self.bv))]
    }

    fn claims(&self) -> &[ClaimCheck] {
        &self.claims
    }

    fn summary(&self) -> String {
        match &self.envelope {
            Some(fit) => format!(
                "nikolskii envelope: A = {}, B = {} (r2 = {})\n",
                fit.amplitude, fit.rate, fit.r_squared
            ),
            None => "nikolskii semi-norm identically zero\n".into(),
        }
    }
}

impl<T: Real> Report for ContinuousDependenceReport<T> {
    fn results_csv(&self) -> String {
        rate_csv(&self.scales, &self.values, &self.stderrs)
    }

    fn plot_series(&self) -> Vec<(String, String)> {
        vec![("rate_fit".into(), loglog_csv(&self.fit))]
    }

    fn claims(&self) -> &[ClaimCheck] {
        &self.claims
    }

    fn summary(&self) -> String {
        format!(
            "axis = {}\nfitted exponent = {} +- {} (r2 = {})\ntheoretical exponent = {}\nprefactor = {}\n",
            self.axis.label(),
            self.fit.exponent,
            self.fit.exponent_stderr,
            self.fit.r_squared,
            self.theoretical,
            self.fit.prefactor
        )
    }
}

impl<T: Real> Report for ViscosityCauchyReport<T> {
    fn results_csv(&self) -> String {
        rate_csv(&self.scales, &self.values, &self.stderrs)
    }

    fn plot_series(&self) -> Vec<(String, String)> {
        vec![("rate_fit".into(), loglog_csv(&self.fit))]
    }

    fn claims(&self) -> &[ClaimCheck] {
        &self.claims
    }

    fn summary(&self) -> String {
        format!(
            "eps ladder = {:?}\nfitted exponent = {} +- {} (r2 = {})\ntheoretical exponent = {}\n",
            self.eps_ladder
                .iter()
                .map(|e| e.as_f64())
                .collect::<Vec<_>>(),
            self.fit.exponent,
            self.fit.exponent_stderr,
            self.fit.r_squared,
            self.theoretical
        )
    }
}

impl<T: Real> Report for TemporalBvReport<T> {
    fn results_csv(&self) -> String {
        rate_csv(&self.lags, &self.values, &self.stderrs)
    }

    fn plot_series(&self) -> Vec<(String, String)> {
        vec![("rate_fit".into(), loglog_csv(&self.fit))]
    }

    fn claims(&self) -> &[ClaimCheck] {
        &self.claims
    }

    fn summary(&self) -> String {
        format!(
            "fitted beta = {} +- {} (r2 = {})\n",
            self.fit.exponent, self.fit.exponent_stderr, self.fit.r_squared
        )
    }
}

impl Report for KineticChecksReport {
    fn results_csv(&self) -> String {
        let mut out = String::from("check_id,max_abs_error,tolerance,pass\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.check_id, r.max_abs_error, r.tolerance, r.pass
            ));
        }
        out
    }

    fn claims(&self) -> &[ClaimCheck] {
        &self.claims
    }

    fn summary(&self) -> String {
        format!("{} identity checks\n", self.rows.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_kinetic_checks, Verdict};

    #[test]
    fn kinetic_report_csv_schema() {
        let rep = run_kinetic_checks(1, 20).unwrap();
        let csv = rep.results_csv();
        assert!(csv.starts_with("check_id,max_abs_error,tolerance,pass\n"));
        assert_eq!(csv.lines().count(), 1 + rep.rows.len());
        let lines = verdict_lines(rep.claims());
        assert!(lines.contains("PASS"));
        assert!(rep.claims().iter().all(|c| c.verdict == Verdict::Pass));
    }

    #[test]
    fn report_rendering_is_deterministic() {
        let a = run_kinetic_checks(9, 30).unwrap().results_csv();
        let b = run_kinetic_checks(9, 30).unwrap().results_csv();
        assert_eq!(a, b);
    }
}
