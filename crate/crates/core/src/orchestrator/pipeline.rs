use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::{ConfigError, Manifest, RunConfig};
use crate::agent::{load_qtable, run_frozen, save_qtable, snapshot_suboptimal, train_agent, PolicyMode, QTable};
use crate::evalkit::{
    evaluate_objective_closedloop, evaluate_objective_montecarlo, montecarlo_traces, mos, satisfaction, trend_compare,
    CorrelationRow, EvaluationReport, Mode, MosRow, ObjectiveSample, SatisfactionRow, Source,
};
use crate::intent::{extract_bandwidth, translate, BandwidthGoal, ExemplarCorpus, NaturalIntent, NileIntent};
use crate::netsim::{
    read_trace_csv, unshaped_throughput, write_episode_csv, write_trace_csv, BandwidthTrace, Episode, NetsimError,
    Scenario, SimConfig,
};
use crate::predictor::{load_model, save_model, train_hybrid, HybridPredictor};
use crate::rng::derive_seed;
use crate::Error;

/// File names inside the output directory.
pub mod artifact {
    pub const CONFIG: &str = "config.txt";
    pub const INTENTS: &str = "intents.nile";
    pub const TRACE: &str = "trace.csv";
    pub const THROUGHPUT: &str = "throughput_raw.csv";
    pub const MODEL: &str = "model.txt";
    pub const PREDICTOR_LOSS: &str = "predictor_loss.csv";
    pub const PREDICTIONS: &str = "predictions.csv";
    pub const QTABLE_ID: &str = "qtable_id.txt";
    pub const QTABLE_ID_SUB: &str = "qtable_id_sub.txt";
    pub const QTABLE_OOD: &str = "qtable_ood.txt";
    pub const QTABLE_OOD_SUB: &str = "qtable_ood_sub.txt";
    pub const EVAL_TRACE: &str = "eval_trace.csv";
    pub const OBJECTIVE: &str = "objective.csv";
    pub const REPORT: &str = "report.csv";
    pub const MANIFEST: &str = "manifest.txt";

    pub const THROUGHPUT_HEADER: &str = "t,throughput_kbps";
    pub const PREDICTOR_LOSS_HEADER: &str = "component,index,mse";
    pub const PREDICTIONS_HEADER: &str = "t,actual_kbps,bilstm_kbps,hybrid_kbps";
    pub const OBJECTIVE_HEADER: &str = "episode,scenario,mode,source,mean_deviation_kbps";

    /// `episode_{id|ood}_{optimal|suboptimal}.csv`
    pub fn episode(scenario: crate::netsim::Scenario, mode: crate::evalkit::Mode) -> String {
        format!("episode_{}_{}.csv", scenario.as_str().to_lowercase(), mode.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Translate,
    GenTrace,
    TrainPredictor,
    TrainAgent,
    Run,
    MonteCarlo,
    Evaluate,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Translate => "translate",
            Stage::GenTrace => "gen-trace",
            Stage::TrainPredictor => "train-predictor",
            Stage::TrainAgent => "train-agent",
            Stage::Run => "run",
            Stage::MonteCarlo => "montecarlo",
            Stage::Evaluate => "evaluate",
        }
    }
}

/// The two bandwidth goals of a run, with the Nile intents they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Goals {
    pub id: BandwidthGoal,
    pub ood: BandwidthGoal,
}

impl Goals {
    pub fn of(&self, scenario: Scenario) -> &BandwidthGoal {
        match scenario {
            Scenario::Id => &self.id,
            Scenario::Ood => &self.ood,
        }
    }
}

/// Optimal and suboptimal tables for both scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTables {
    pub id: QTable<f64>,
    pub id_sub: QTable<f64>,
    pub ood: QTable<f64>,
    pub ood_sub: QTable<f64>,
}

impl AgentTables {
    pub fn get(&self, scenario: Scenario, mode: Mode) -> &QTable<f64> {
        match (scenario, mode) {
            (Scenario::Id, Mode::Optimal) => &self.id,
            (Scenario::Id, Mode::Suboptimal) => &self.id_sub,
            (Scenario::Ood, Mode::Optimal) => &self.ood,
            (Scenario::Ood, Mode::Suboptimal) => &self.ood_sub,
        }
    }
}

const SCENARIOS: [Scenario; 2] = [Scenario::Id, Scenario::Ood];
const MODES: [Mode; 2] = [Mode::Optimal, Mode::Suboptimal];

/// Runs pipeline stages against one output directory. Each stage reads its
/// inputs from the directory, so stages can be run one at a time.
#[derive(Debug)]
pub struct Orchestrator {
    config: RunConfig,
    out: PathBuf,
    sim: SimConfig,
    timings: Vec<(Stage, f64)>,
}

impl Orchestrator {
    pub fn new(config: RunConfig) -> Result<Self, Error> {
        config.validate()?;
        let out = PathBuf::from(&config.out_dir);
        let sim = config.sim();
        Ok(Self { config, out, sim, timings: Vec::new() })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn sim(&self) -> &SimConfig {
        &self.sim
    }

    pub fn timings(&self) -> &[(Stage, f64)] {
        &self.timings
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), Error> {
        fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| Error::io(p, e))
    }

    fn read(&self, name: &str, producer: Stage) -> Result<String, Error> {
        let p = self.path(name);
        if !p.is_file() {
            return Err(Error::MissingArtifact { path: p, stage: producer.as_str() });
        }
        fs::read_to_string(&p).map_err(|e| Error::io(p, e))
    }

    fn timed<R>(&mut self, stage: Stage, f: impl FnOnce(&mut Self) -> Result<R, Error>) -> Result<R, Error> {
        let start = Instant::now();
        log::info!("stage {} started", stage.as_str());
        let r = f(self)?;
        let secs = start.elapsed().as_secs_f64();
        log::info!("stage {} finished in {secs:.2}s", stage.as_str());
        self.timings.push((stage, secs));
        Ok(r)
    }

    fn corpus(&self) -> Result<ExemplarCorpus, Error> {
        if self.config.corpus.is_empty() {
            Ok(ExemplarCorpus::builtin())
        } else {
            Ok(ExemplarCorpus::load(Path::new(&self.config.corpus))?)
        }
    }

    /// Translates one configured intent (if any) and checks it against the
    /// configured goal.
    fn resolve(
        &self,
        corpus: &mut Option<ExemplarCorpus>,
        key: &str,
        text: &str,
        kbps: u64,
    ) -> Result<(BandwidthGoal, Option<NileIntent>), Error> {
        if text.trim().is_empty() {
            return Ok((BandwidthGoal::from_kbps(kbps)?, None));
        }
        if corpus.is_none() {
            *corpus = Some(self.corpus()?);
        }
        let nile = translate(&NaturalIntent::new(key, text)?, corpus.as_ref().expect("loaded above"))?;
        let goal = extract_bandwidth(&nile);
        if goal.kbps() != kbps {
            return Err(Error::Config(ConfigError::Invalid {
                line: 0,
                key: key.into(),
                value: text.into(),
                message: format!("translates to {} kbps but the configured goal is {kbps} kbps", goal.kbps()),
            }));
        }
        Ok((goal, Some(nile)))
    }

    fn resolve_goals(&self) -> Result<(Goals, [Option<NileIntent>; 2]), Error> {
        let c = &self.config;
        let mut corpus = None;
        let (id, id_nile) = self.resolve(&mut corpus, "intent_id", &c.intent_id, c.goal_id_kbps)?;
        let (ood, ood_nile) = self.resolve(&mut corpus, "intent_ood", &c.intent_ood, c.goal_ood_kbps)?;
        Ok((Goals { id, ood }, [id_nile, ood_nile]))
    }

    /// Goals of the run; pure, writes nothing.
    pub fn goals(&self) -> Result<Goals, Error> {
        Ok(self.resolve_goals()?.0)
    }

    /// Resolves both goals and writes the translated intents as Nile.
    pub fn translate(&mut self) -> Result<Goals, Error> {
        self.timed(Stage::Translate, |o| {
            let (goals, nile) = o.resolve_goals()?;
            let mut text = String::new();
            for ((label, source, kbps), n) in [
                ("ID", &o.config.intent_id, goals.id.kbps()),
                ("OOD", &o.config.intent_ood, goals.ood.kbps()),
            ]
            .into_iter()
            .zip(nile)
            {
                match n {
                    Some(n) => {
                        let _ = writeln!(text, "# {label}: {source}\n{}", n.render());
                    }
                    None => {
                        let _ = writeln!(text, "# {label}: goal {kbps} kbps given directly");
                    }
                }
            }
            o.write(artifact::INTENTS, text)?;
            Ok(goals)
        })
    }

    /// Capacity trace and the unshaped throughput the predictor trains on.
    pub fn gen_trace(&mut self) -> Result<(BandwidthTrace, Vec<f64>), Error> {
        self.timed(Stage::GenTrace, |o| {
            let trace = o.sim.trace(o.config.trace_seed, o.config.trace_length)?;
            let series = unshaped_throughput(&trace, &o.sim.model, derive_seed(o.config.trace_seed, 1));
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &trace).map_err(NetsimError::from)?;
            o.write(artifact::TRACE, buf)?;
            let mut csv = format!("{}\n", artifact::THROUGHPUT_HEADER);
            for (t, v) in series.iter().enumerate() {
                let _ = writeln!(csv, "{t},{v}");
            }
            o.write(artifact::THROUGHPUT, csv)?;
            Ok((trace, series))
        })
    }

    fn read_throughput(&self) -> Result<Vec<f64>, Error> {
        let text = self.read(artifact::THROUGHPUT, Stage::GenTrace)?;
        let bad = |line: usize, message: String| Error::Netsim(NetsimError::Csv { line, message });
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == artifact::THROUGHPUT_HEADER => {}
            _ => return Err(bad(1, format!("expected header '{}'", artifact::THROUGHPUT_HEADER))),
        }
        let mut series = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let v = line
                .split(',')
                .nth(1)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(i + 1, "expected 't,throughput_kbps'".into()))?;
            series.push(v);
        }
        Ok(series)
    }

    pub fn load_trace(&self) -> Result<BandwidthTrace, Error> {
        let text = self.read(artifact::TRACE, Stage::GenTrace)?;
        Ok(read_trace_csv(text.as_bytes())?)
    }

    /// Trains the hybrid predictor on the stored throughput series; writes
    /// the model, the loss curves and one-step predictions over the series.
    pub fn train_predictor(&mut self) -> Result<HybridPredictor<f64>, Error> {
        let series = self.read_throughput()?;
        self.timed(Stage::TrainPredictor, |o| {
            let (model, epoch_losses, stage_mse) = train_hybrid(&series, o.sim.cap_max, &o.config.hybrid())?;
            o.write(artifact::MODEL, save_model(&model))?;

            let mut loss = format!("{}\n", artifact::PREDICTOR_LOSS_HEADER);
            for (i, l) in epoch_losses.iter().enumerate() {
                let _ = writeln!(loss, "bilstm,{},{l}", i + 1);
            }
            for (i, l) in stage_mse.iter().enumerate() {
                let _ = writeln!(loss, "boost,{i},{l}");
            }
            o.write(artifact::PREDICTOR_LOSS, loss)?;

            let n = model.window();
            let mut pred = format!("{}\n", artifact::PREDICTIONS_HEADER);
            for t in n..series.len() {
                let w = &series[t - n..t];
                let (raw, _) = model.components(w)?;
                let _ = writeln!(pred, "{t},{},{raw},{}", series[t], model.predict(w)?);
            }
            o.write(artifact::PREDICTIONS, pred)?;
            Ok(model)
        })
    }

    pub fn load_predictor(&self) -> Result<HybridPredictor<f64>, Error> {
        Ok(load_model(&self.read(artifact::MODEL, Stage::TrainPredictor)?)?)
    }

    /// Trains one agent per goal and keeps each one's early snapshot.
    pub fn train_agents(&mut self) -> Result<AgentTables, Error> {
        let predictor = self.load_predictor()?;
        let goals = self.goals()?;
        self.timed(Stage::TrainAgent, |o| {
            let mut tables = Vec::new();
            for (k, scenario) in SCENARIOS.into_iter().enumerate() {
                let run = train_agent(&predictor, goals.of(scenario), &o.sim, &o.config.agent(k as u64))?;
                tables.push(run.final_table().clone());
                tables.push(snapshot_suboptimal(&run, o.config.suboptimal_fraction)?);
            }
            let [id, id_sub, ood, ood_sub]: [QTable<f64>; 4] = tables.try_into().expect("four tables");
            let t = AgentTables { id, id_sub, ood, ood_sub };
            o.write(artifact::QTABLE_ID, save_qtable(&t.id))?;
            o.write(artifact::QTABLE_ID_SUB, save_qtable(&t.id_sub))?;
            o.write(artifact::QTABLE_OOD, save_qtable(&t.ood))?;
            o.write(artifact::QTABLE_OOD_SUB, save_qtable(&t.ood_sub))?;
            Ok(t)
        })
    }

    pub fn load_tables(&self) -> Result<AgentTables, Error> {
        let load = |name| -> Result<QTable<f64>, Error> { Ok(load_qtable(&self.read(name, Stage::TrainAgent)?)?) };
        Ok(AgentTables {
            id: load(artifact::QTABLE_ID)?,
            id_sub: load(artifact::QTABLE_ID_SUB)?,
            ood: load(artifact::QTABLE_OOD)?,
            ood_sub: load(artifact::QTABLE_OOD_SUB)?,
        })
    }

    /// The held-out evaluation trace and the noise seed its episodes use.
    pub fn eval_trace(&self) -> Result<(BandwidthTrace, u64), Error> {
        let trace = self.sim.trace(derive_seed(self.config.eval_seed, 0), self.config.eval_steps)?;
        Ok((trace, derive_seed(self.config.eval_seed, 1)))
    }

    /// One evaluation episode per scenario and mode, all over the same trace.
    pub fn run(&mut self) -> Result<Vec<(Scenario, Mode, Episode)>, Error> {
        let predictor = self.load_predictor()?;
        let tables = self.load_tables()?;
        let goals = self.goals()?;
        self.timed(Stage::Run, |o| {
            let (trace, noise) = o.eval_trace()?;
            let mut buf = Vec::new();
            write_trace_csv(&mut buf, &trace).map_err(NetsimError::from)?;
            o.write(artifact::EVAL_TRACE, buf)?;
            let mut out = Vec::new();
            for scenario in SCENARIOS {
                for mode in MODES {
                    let policy = match mode {
                        Mode::Optimal => PolicyMode::Greedy,
                        Mode::Suboptimal => PolicyMode::Explore,
                    };
                    let table = tables.get(scenario, mode);
                    let ep = run_frozen(table, &predictor, &trace, goals.of(scenario), &o.sim, policy, noise, scenario)?;
                    let mut buf = Vec::new();
                    write_episode_csv(&mut buf, &ep).map_err(NetsimError::from)?;
                    o.write(&artifact::episode(scenario, mode), buf)?;
                    out.push((scenario, mode, ep));
                }
            }
            Ok(out)
        })
    }

    /// Mean deviation per episode for the Monte Carlo optimum and for each
    /// table in closed loop, over shared traces.
    pub fn montecarlo(&mut self) -> Result<Vec<ObjectiveSample>, Error> {
        let predictor = self.load_predictor()?;
        let tables = self.load_tables()?;
        let goals = self.goals()?;
        self.timed(Stage::MonteCarlo, |o| {
            let c = &o.config;
            let traces = montecarlo_traces(&o.sim, c.mc_episodes, c.mc_episode_len, derive_seed(c.eval_seed, 2))?;
            let mut samples = Vec::new();
            for scenario in SCENARIOS {
                let goal = goals.of(scenario);
                samples.extend(evaluate_objective_montecarlo(goal, &o.sim, &traces, scenario)?);
                for mode in MODES {
                    let table = tables.get(scenario, mode);
                    samples.extend(evaluate_objective_closedloop(
                        table, &predictor, &traces, goal, &o.sim, mode, scenario,
                    )?);
                }
            }
            let mut csv = format!("{}\n", artifact::OBJECTIVE_HEADER);
            for s in &samples {
                let _ = writeln!(csv, "{},{},{},{},{}", s.episode, s.scenario, s.mode, s.source.as_str(), s.mean_deviation);
            }
            o.write(artifact::OBJECTIVE, csv)?;
            Ok(samples)
        })
    }

    /// Runs the evaluation episodes and the objective comparison, then
    /// writes the combined report.
    pub fn evaluate(&mut self) -> Result<EvaluationReport, Error> {
        let goals = self.goals()?;
        let episodes = self.run()?;
        let objective = self.montecarlo()?;
        self.timed(Stage::Evaluate, |o| {
            let mut report = EvaluationReport::default();
            for (scenario, mode, ep) in &episodes {
                let series = satisfaction(ep, goals.of(*scenario))?;
                report.satisfaction.push(SatisfactionRow {
                    scenario: *scenario,
                    mode: *mode,
                    met: series.met(),
                    total: series.len(),
                });
                report.mos.push(MosRow { scenario: *scenario, mode: *mode, mos: mos::<f64>(&series).value });
            }
            for scenario in SCENARIOS {
                let pick = |source: Source| -> Vec<ObjectiveSample> {
                    objective
                        .iter()
                        .filter(|s| s.scenario == scenario && s.source == source && s.mode == Mode::Optimal)
                        .copied()
                        .collect()
                };
                let comparison = trend_compare(&pick(Source::MonteCarlo), &pick(Source::ClosedLoop))?;
                report.correlation.push(CorrelationRow { scenario, comparison });
            }
            report.objective = objective;
            o.write(artifact::REPORT, report.to_csv())?;
            Ok(report)
        })
    }

    /// Every stage in order, then the manifest.
    pub fn pipeline(&mut self) -> Result<EvaluationReport, Error> {
        self.write(artifact::CONFIG, self.config.to_text())?;
        self.translate()?;
        self.gen_trace()?;
        self.train_predictor()?;
        self.train_agents()?;
        let report = self.evaluate()?;
        self.write_manifest()?;
        Ok(report)
    }

    pub fn load_report(&self) -> Result<EvaluationReport, Error> {
        Ok(EvaluationReport::from_csv(&self.read(artifact::REPORT, Stage::Evaluate)?)?)
    }

    /// Writes `manifest.txt` describing the config, this session's stage
    /// timings and every artifact currently in the output directory.
    pub fn write_manifest(&self) -> Result<Manifest, Error> {
        let mut artifacts = Vec::new();
        let entries = fs::read_dir(&self.out).map_err(|e| Error::io(&self.out, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.out, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name == artifact::MANIFEST || !entry.path().is_file() {
                continue;
            }
            let bytes = fs::read(entry.path()).map_err(|e| Error::io(entry.path(), e))?;
            artifacts.push((name, bytes));
        }
        let manifest = Manifest::build(&self.config, &self.timings, artifacts);
        self.write(artifact::MANIFEST, manifest.to_text())?;
        Ok(manifest)
    }
}
