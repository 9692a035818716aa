//! CSV encoding of result tables.

use std::path::Path;

use super::trial::{ResultTable, TrialRecord};
use crate::error::Result;
use crate::io::{fmt_f64, write_atomic};

pub const RESULT_HEADER: &str =
    "experiment,cell,trial,seed,n,T,d0,d_embed,nu,alpha,family,method,error_2inf,gamma,kappa,lambda_d,runtime_ms,warnings";

fn clean(s: &str) -> String {
    s.replace([',', '\n', '\r', ';'], " ")
}

fn row(r: &TrialRecord, with_runtime: bool) -> String {
    let runtime = if with_runtime { fmt_f64(r.runtime_ms) } else { String::new() };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        clean(&r.experiment),
        r.cell,
        r.trial,
        r.seed,
        r.n,
        r.t,
        r.d0,
        r.d_embed,
        fmt_f64(r.nu),
        fmt_f64(r.alpha),
        r.family,
        r.method,
        fmt_f64(r.error_2inf),
        fmt_f64(r.gamma),
        fmt_f64(r.kappa),
        fmt_f64(r.lambda_d),
        runtime,
        r.warnings.iter().map(|w| clean(w)).collect::<Vec<_>>().join(";"),
    )
}

impl ResultTable {
    /// CSV with the fixed header. With `with_runtime = false` the
    /// `runtime_ms` column is left empty, giving byte-reproducible output.
    pub fn to_csv(&self, with_runtime: bool) -> String {
        let mut out = String::from(RESULT_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&row(r, with_runtime));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, with_runtime: bool) -> Result<()> {
        write_atomic(path, self.to_csv(with_runtime).as_bytes())
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

/// The CSV with the `runtime_ms` column blanked, for reproducibility checks.
pub fn strip_runtime(csv: &str) -> String {
    let idx = RESULT_HEADER.split(',').position(|c| c == "runtime_ms").expect("column present");
    csv.lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                return line.to_string();
            }
            let mut f: Vec<&str> = line.splitn(idx + 2, ',').collect();
            if f.len() > idx {
                f[idx] = "";
            }
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Method;
    use crate::synth::NoiseFamily;

    fn rec() -> TrialRecord {
        TrialRecord {
            experiment: "fig1".into(),
            cell: 2,
            trial: 7,
            seed: 123,
            n: 200,
            t: 200,
            d0: 10,
            d_embed: 20,
            nu: 1e-6,
            alpha: 1.0,
            family: NoiseFamily::Gaussian,
            method: Method::Ase,
            error_2inf: 0.0125,
            gamma: f64::INFINITY,
            kappa: 3.5,
            lambda_d: 4.25,
            runtime_ms: 12.5,
            warnings: vec!["a,b".into(), "c".into()],
        }
    }

    #[test]
    fn header_and_row() {
        let t = ResultTable { records: vec![rec()] };
        let csv = t.to_csv(true);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), RESULT_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "fig1,2,7,123,200,200,10,20,1e-6,1,gaussian,ase,0.0125,inf,3.5,4.25,12.5,a b;c"
        );
        assert_eq!(strip_runtime(&csv), t.to_csv(false).trim_end());
    }
}
