//! Output records and their JSON and CSV renderings.
//!
//! Field names are fixed. Optional fields are left out when they do not
//! apply. Floats are written in shortest round-trip form.

use std::io::{self, Write};

use diagwalk_core::check::CheckOutcome;
use diagwalk_core::{
    DomainSpec, LatticePoint, McConfig, McEstimate, QuadratureResult, QuadratureSpec,
    ReturnConstant,
};
use serde::Serialize;

use crate::Format;

#[derive(Debug, Default, Serialize)]
pub struct Request {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
}

impl Request {
    pub fn for_domain(dom: &DomainSpec) -> Self {
        let mut r = Request {
            domain: Some(dom.name().to_string()),
            ..Request::default()
        };
        match *dom {
            DomainSpec::Rectangle2D { m, n } => (r.m, r.n) = (Some(m), Some(n)),
            DomainSpec::SemiStrip2D { m } | DomainSpec::InfiniteStrip2D { m } => r.m = Some(m),
            DomainSpec::HalfPlane2D => {}
            DomainSpec::Block3D { l, m, n } => (r.l, r.m, r.n) = (Some(l), Some(m), Some(n)),
            DomainSpec::FullLattice { d } => r.dim = Some(d),
        }
        r
    }

    pub fn set_quadrature(&mut self, method: &str, spec: &QuadratureSpec) {
        self.method = Some(method.to_string());
        self.abs_tol = Some(spec.abs_tol);
        self.rel_tol = Some(spec.rel_tol);
    }

    pub fn set_monte_carlo(&mut self, method: &str, cfg: &McConfig) {
        self.method = Some(method.to_string());
        self.trials = Some(cfg.trials);
        self.seed = Some(cfg.seed);
        self.max_steps = Some(cfg.max_steps);
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks_total: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// The lattice constant behind a return probability.
#[derive(Debug, Serialize)]
pub struct Constant {
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Serialize)]
pub struct PointValue {
    pub point: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl PointValue {
    pub fn probability(x: &LatticePoint, p: f64) -> Self {
        PointValue {
            point: x.coords().to_vec(),
            probability: Some(p),
            value: None,
        }
    }

    pub fn value(x: &LatticePoint, v: f64) -> Self {
        PointValue {
            point: x.coords().to_vec(),
            probability: None,
            value: Some(v),
        }
    }

    fn csv_point(&self) -> String {
        self.point.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub subject: String,
    pub check: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl CheckRow {
    pub fn new(subject: &str, c: &CheckOutcome) -> Self {
        CheckRow {
            subject: subject.to_string(),
            check: c.name.clone(),
            passed: c.passed,
            max_deviation: c.max_deviation,
            tolerance: c.tolerance,
            cases: c.cases,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub command: String,
    pub request: Request,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<Constant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<PointValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<Vec<PointValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckRow>>,
    pub metadata: Metadata,
}

impl OutputRecord {
    pub fn new(command: &str, request: Request, value: f64) -> Self {
        OutputRecord {
            command: command.to_string(),
            request,
            value,
            error_estimate: None,
            std_error: None,
            constant: None,
            entries: None,
            row: None,
            checks: None,
            metadata: Metadata::default(),
        }
    }

    pub fn quadrature(command: &str, request: Request, r: QuadratureResult) -> Self {
        let mut rec = OutputRecord::new(command, request, r.value);
        rec.error_estimate = Some(r.error_estimate);
        rec.metadata.evaluations = Some(r.evaluations);
        rec.metadata.converged = Some(r.converged);
        rec
    }

    pub fn return_constant(request: Request, rc: ReturnConstant) -> Self {
        let mut rec = OutputRecord::quadrature("return-prob", request, rc.constant);
        rec.value = rc.p_return;
        rec.error_estimate = Some(rc.p_error_estimate);
        rec.constant = Some(Constant {
            value: rc.constant.value,
            error_estimate: rc.constant.error_estimate,
        });
        rec
    }

    pub fn monte_carlo(command: &str, request: Request, est: McEstimate) -> Self {
        let mut rec = OutputRecord::new(command, request, est.mean);
        rec.std_error = Some(est.std_error);
        rec.metadata.trials = Some(est.trials);
        rec.metadata.truncated_trials = Some(est.truncated_trials);
        rec
    }
}

pub fn emit(record: &OutputRecord, format: Format) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, record)?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(&mut out, record)?,
    }
    out.flush()
}

fn write_csv<W: Write>(out: W, record: &OutputRecord) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(entries) = &record.entries {
        w.write_record(["point", "probability"])?;
        for e in entries {
            w.write_record([e.csv_point(), fmt_f64(e.probability.unwrap_or(0.0))])?;
        }
    } else if let Some(row) = &record.row {
        w.write_record(["point", "value"])?;
        for e in row {
            w.write_record([e.csv_point(), fmt_f64(e.value.unwrap_or(0.0))])?;
        }
    } else if let Some(checks) = &record.checks {
        w.write_record(["subject", "check", "passed", "max_deviation", "tolerance", "cases"])?;
        for c in checks {
            w.write_record([
                c.subject.clone(),
                c.check.clone(),
                c.passed.to_string(),
                fmt_f64(c.max_deviation),
                fmt_f64(c.tolerance),
                c.cases.to_string(),
            ])?;
        }
    } else {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let mut header = vec!["command", "value", "error_estimate", "std_error"];
        let mut fields = vec![
            record.command.clone(),
            fmt_f64(record.value),
            opt(record.error_estimate),
            opt(record.std_error),
        ];
        if let Some(c) = &record.constant {
            header.extend(["constant", "constant_error_estimate"]);
            fields.extend([fmt_f64(c.value), fmt_f64(c.error_estimate)]);
        }
        if let Some(t) = record.metadata.wall_time_ms {
            header.push("wall_time_ms");
            fields.push(fmt_f64(t));
        }
        w.write_record(&header)?;
        w.write_record(&fields)?;
    }
    w.flush()
}

/// Shortest decimal text that reads back to the same `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
