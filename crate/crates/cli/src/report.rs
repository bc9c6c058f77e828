//! Structured run reports.
//!
//! One report per solver run, rendered as a single `key=value` line with a
//! stable field order so reruns diff cleanly; wall time is the only field
//! expected to vary between identical runs and comes last.

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub algo: String,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub objective: f64,
    pub oracle: Option<u64>,
    pub peak_stored: Option<usize>,
    pub used_fallback: bool,
    pub wall_ms: u128,
}

impl RunReport {
    /// `objective / oracle`, defined as 1 when both are zero. Present only
    /// when an oracle ran.
    pub fn ratio(&self) -> Option<f64> {
        self.oracle.map(|o| {
            if o == 0 && self.objective == 0.0 {
                1.0
            } else {
                self.objective / o as f64
            }
        })
    }

    pub fn line(&self) -> String {
        let oracle = match self.oracle {
            Some(o) => o.to_string(),
            None => "-".to_string(),
        };
        let ratio = match self.ratio() {
            Some(r) => format!("{r:.6}"),
            None => "-".to_string(),
        };
        let peak = match self.peak_stored {
            Some(p) => p.to_string(),
            None => "-".to_string(),
        };
        format!(
            "report name={} algo={} d={} n={} k={} p={} seed={} objective={} oracle={} ratio={} peak_stored={} fallback={} wall_ms={}",
            self.name,
            self.algo,
            self.d,
            self.n,
            self.k,
            self.p,
            self.seed,
            fmt_number(self.objective),
            oracle,
            ratio,
            peak,
            self.used_fallback as u8,
            self.wall_ms
        )
    }
}

/// Integral objectives print without a trailing `.0` so offline and
/// streaming outputs compare directly.
pub fn fmt_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_is_stable_and_complete() {
        let report = RunReport {
            name: "demo".into(),
            algo: "offline".into(),
            d: 5,
            n: 6,
            k: 2,
            p: 0.0,
            seed: 7,
            objective: 3.0,
            oracle: Some(3),
            peak_stored: None,
            used_fallback: false,
            wall_ms: 12,
        };
        assert_eq!(
            report.line(),
            "report name=demo algo=offline d=5 n=6 k=2 p=0 seed=7 objective=3 \
             oracle=3 ratio=1.000000 peak_stored=- fallback=0 wall_ms=12"
        );
    }

    #[test]
    fn ratio_handles_zero_oracle() {
        let mut report = RunReport {
            name: "z".into(),
            algo: "offline".into(),
            d: 3,
            n: 2,
            k: 1,
            p: 0.0,
            seed: 0,
            objective: 0.0,
            oracle: Some(0),
            peak_stored: None,
            used_fallback: false,
            wall_ms: 0,
        };
        assert_eq!(report.ratio(), Some(1.0));
        report.objective = 4.0;
        report.oracle = Some(2);
        assert_eq!(report.ratio(), Some(2.0));
    }

    #[test]
    fn numbers_render_without_float_noise() {
        assert_eq!(fmt_number(12.0), "12");
        assert_eq!(fmt_number(12.5), "12.5");
    }
}
