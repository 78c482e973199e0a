use std::fmt::Write as _;

use super::{EvalError, Mode, ObjectiveSample, Source, TrendComparison};
use crate::netsim::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionRow {
    pub scenario: Scenario,
    pub mode: Mode,
    pub met: usize,
    pub total: usize,
}

impl SatisfactionRow {
    pub fn fraction(&self) -> f64 {
        self.met as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MosRow {
    pub scenario: Scenario,
    pub mode: Mode,
    pub mos: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub scenario: Scenario,
    pub comparison: TrendComparison,
}

/// Everything the evaluation stage produces, serialized as CSV blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluationReport {
    pub satisfaction: Vec<SatisfactionRow>,
    pub mos: Vec<MosRow>,
    pub objective: Vec<ObjectiveSample>,
    pub correlation: Vec<CorrelationRow>,
}

const COLUMNS: &str = "# columns: satisfaction=scenario,mode,met,total,fraction; mos=scenario,mode,mos; \
objective=episode,scenario,mode,source,mean_deviation_kbps; \
correlation=scenario,pearson,mean_gap_kbps,montecarlo_mean_kbps,closedloop_mean_kbps (pearson NA when undefined)";

const SAT_HEADER: &str = "scenario,mode,met,total,fraction";
const MOS_HEADER: &str = "scenario,mode,mos";
const OBJ_HEADER: &str = "episode,scenario,mode,source,mean_deviation_kbps";
const COR_HEADER: &str = "scenario,pearson,mean_gap_kbps,montecarlo_mean_kbps,closedloop_mean_kbps";

impl EvaluationReport {
    pub fn satisfaction_of(&self, scenario: Scenario, mode: Mode) -> Option<&SatisfactionRow> {
        self.satisfaction.iter().find(|r| r.scenario == scenario && r.mode == mode)
    }

    pub fn correlation_of(&self, scenario: Scenario) -> Option<&TrendComparison> {
        self.correlation.iter().find(|r| r.scenario == scenario).map(|r| &r.comparison)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{COLUMNS}\n# satisfaction\n{SAT_HEADER}");
        for r in &self.satisfaction {
            let _ = writeln!(out, "{},{},{},{},{}", r.scenario, r.mode, r.met, r.total, r.fraction());
        }
        let _ = writeln!(out, "# mos\n{MOS_HEADER}");
        for r in &self.mos {
            let _ = writeln!(out, "{},{},{}", r.scenario, r.mode, r.mos);
        }
        let _ = writeln!(out, "# objective\n{OBJ_HEADER}");
        for s in &self.objective {
            let _ = writeln!(out, "{},{},{},{},{}", s.episode, s.scenario, s.mode, s.source.as_str(), s.mean_deviation);
        }
        let _ = writeln!(out, "# correlation\n{COR_HEADER}");
        for r in &self.correlation {
            let c = &r.comparison;
            let pearson = c.correlation.map_or_else(|| "NA".to_string(), |v| v.to_string());
            let _ = writeln!(out, "{},{pearson},{},{},{}", r.scenario, c.mean_gap(), c.montecarlo_mean, c.closedloop_mean);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, EvalError> {
        let mut report = EvaluationReport::default();
        let mut section: Option<&str> = None;
        let mut expect_header: Option<&str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            let err = |m: String| EvalError::Format { line: line_no, message: m };
            if line.is_empty() || line.starts_with("# columns") {
                continue;
            }
            if let Some(name) = line.strip_prefix("# ") {
                let header = match name {
                    "satisfaction" => SAT_HEADER,
                    "mos" => MOS_HEADER,
                    "objective" => OBJ_HEADER,
                    "correlation" => COR_HEADER,
                    other => return Err(err(format!("unknown section '{other}'"))),
                };
                section = Some(name);
                expect_header = Some(header);
                continue;
            }
            if let Some(h) = expect_header.take() {
                if line != h {
                    return Err(err(format!("expected header '{h}'")));
                }
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let scenario = |s: &str| Scenario::parse(s).ok_or_else(|| err(format!("bad scenario '{s}'")));
            let mode = |s: &str| Mode::parse(s).ok_or_else(|| err(format!("bad mode '{s}'")));
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number '{s}'")));
            let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad integer '{s}'")));
            let arity = |n: usize| if f.len() == n { Ok(()) } else { Err(err(format!("expected {n} fields"))) };
            match section {
                Some("satisfaction") => {
                    arity(5)?;
                    let row = SatisfactionRow { scenario: scenario(f[0])?, mode: mode(f[1])?, met: int(f[2])?, total: int(f[3])? };
                    if row.total == 0 || row.met > row.total {
                        return Err(err("met must not exceed a positive total".into()));
                    }
                    if num(f[4])? != row.fraction() {
                        return Err(err("fraction disagrees with met/total".into()));
                    }
                    report.satisfaction.push(row);
                }
                Some("mos") => {
                    arity(3)?;
                    report.mos.push(MosRow { scenario: scenario(f[0])?, mode: mode(f[1])?, mos: num(f[2])? });
                }
                Some("objective") => {
                    arity(5)?;
                    report.objective.push(ObjectiveSample {
                        episode: int(f[0])?,
                        scenario: scenario(f[1])?,
                        mode: mode(f[2])?,
                        source: Source::parse(f[3]).ok_or_else(|| err(format!("bad source '{}'", f[3])))?,
                        mean_deviation: num(f[4])?,
                    });
                }
                Some("correlation") => {
                    arity(5)?;
                    let correlation = if f[1] == "NA" { None } else { Some(num(f[1])?) };
                    report.correlation.push(CorrelationRow {
                        scenario: scenario(f[0])?,
                        comparison: TrendComparison {
                            correlation,
                            montecarlo_mean: num(f[3])?,
                            closedloop_mean: num(f[4])?,
                        },
                    });
                }
                _ => return Err(err("data before any section header".into())),
            }
        }
        Ok(report)
    }
}
