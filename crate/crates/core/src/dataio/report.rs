//! Versioned, self-describing text persistence for fit reports.
//!
//! A report file opens with `telefit-report v<major>` and carries the
//! sections [config], [priors], [schedule], [particles], [summaries] and
//! [diagnostics]. All floats are written in shortest round-trip form, so
//! `load(save(report))` reproduces the report bit for bit. Files written by
//! a newer major version are refused.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{ParamSummaries, PosteriorSummary};
use crate::error::{Error, Result};
use crate::model::{ScheduleRule, TelescopeSchedule};
use crate::priors::{EnergyPrior, PriorSpec};
use crate::sampler::{FitReport, McmcConfig, ParticleCloud, ProposalScales};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Renders a report to its text form.
pub fn render_report(report: &FitReport) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "telefit-report v{REPORT_FORMAT_VERSION}");

    let cfg = &report.config;
    let _ = writeln!(w, "[config]");
    let _ = writeln!(w, "iters_phase1 = {}", cfg.iters_phase1);
    let _ = writeln!(w, "iters_phase2 = {}", cfg.iters_phase2);
    let _ = writeln!(w, "m = {}", cfg.m);
    let _ = writeln!(w, "c0 = {}", cfg.c0);
    let _ = writeln!(w, "e1_0 = {}", cfg.e1_0);
    let _ = writeln!(w, "burn_in = {}", cfg.burn_in);
    let _ = writeln!(w, "scale_a1 = {}", cfg.proposal_scales.a1);
    let _ = writeln!(w, "scale_e1 = {}", cfg.proposal_scales.e1);
    let _ = writeln!(w, "scale_a2 = {}", cfg.proposal_scales.a2);
    let _ = writeln!(w, "scale_c = {}", cfg.proposal_scales.c);
    let _ = writeln!(w, "discard_limit = {}", cfg.discard_limit);
    let _ = writeln!(w, "seed = {}", cfg.seed);
    let _ = writeln!(w, "cycle_intermediate = {}", cfg.cycle_intermediate);

    let p = &report.priors;
    let _ = writeln!(w, "[priors]");
    let _ = writeln!(w, "alpha = {}", p.alpha);
    let _ = writeln!(w, "beta = {}", p.beta);
    match p.energy {
        EnergyPrior::Gamma { scale, shape } => {
            let _ = writeln!(w, "energy_family = gamma");
            // Convention: gamma mean is shape * scale (lambda * eta).
            let _ = writeln!(w, "energy_scale = {scale}");
            let _ = writeln!(w, "energy_shape = {shape}");
        }
        EnergyPrior::Pareto { x_min, shape } => {
            let _ = writeln!(w, "energy_family = pareto");
            let _ = writeln!(w, "energy_x_min = {x_min}");
            let _ = writeln!(w, "energy_shape = {shape}");
        }
    }
    let _ = writeln!(w, "omega = {}", p.omega);

    let _ = writeln!(w, "[schedule]");
    match report.schedule.rule() {
        ScheduleRule::Ratio => {
            let _ = writeln!(w, "rule = ratio");
        }
        ScheduleRule::Tolerance { provisional_spacing, tolerance } => {
            let _ = writeln!(w, "rule = tolerance");
            let _ = writeln!(w, "provisional_spacing = {provisional_spacing}");
            let _ = writeln!(w, "tolerance = {tolerance}");
        }
    }
    let times: Vec<String> = report.schedule.times().iter().map(|t| t.to_string()).collect();
    let _ = writeln!(w, "times = {}", times.join(" "));

    let cloud = &report.posterior;
    let _ = writeln!(w, "[particles]");
    let _ = writeln!(w, "count = {}", cloud.len());
    let _ = writeln!(w, "seed = {}", cloud.seed());
    if let Some(weights) = cloud.weights() {
        let ws: Vec<String> = weights.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(w, "weights = {}", ws.join(" "));
    }
    let _ = writeln!(w, "# a1 e1 a2 c");
    for i in 0..cloud.len() {
        let _ = writeln!(
            w,
            "{} {} {} {}",
            cloud.a1()[i],
            cloud.e1()[i],
            cloud.a2()[i],
            cloud.c()[i]
        );
    }

    let _ = writeln!(w, "[summaries]");
    for (name, s) in [
        ("a1", &report.summaries.a1),
        ("e1", &report.summaries.e1),
        ("a2", &report.summaries.a2),
        ("c", &report.summaries.c),
    ] {
        let _ = writeln!(w, "{name}.mode = {}", s.mode);
        let _ = writeln!(w, "{name}.mean = {}", s.mean);
        let _ = writeln!(w, "{name}.ci_low = {}", s.ci_low);
        let _ = writeln!(w, "{name}.ci_high = {}", s.ci_high);
        let _ = writeln!(w, "{name}.bin_width = {}", s.bin_width);
        let _ = writeln!(w, "{name}.degenerate = {}", s.degenerate);
    }

    let _ = writeln!(w, "[diagnostics]");
    let _ = writeln!(w, "discard_count = {}", report.discard_count);
    let _ = writeln!(w, "discard_fraction = {}", report.discard_fraction);
    let _ = writeln!(w, "failed_repetitions = {}", report.failed_repetitions);
    for msg in &report.failure_messages {
        let _ = writeln!(w, "failure = {msg}");
    }
    out
}

pub fn save_report(report: &FitReport, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(report))?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<FitReport> {
    let text = std::fs::read_to_string(path)?;
    parse_report(&text, &path.display().to_string())
}

struct Cursor<'a> {
    origin: &'a str,
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, origin: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { origin, lines, pos: 0 }
    }

    fn err(&self, line: usize, message: String) -> Error {
        Error::Parse { origin: self.origin.to_string(), line, message }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.peek();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn expect_section(&mut self, name: &str) -> Result<()> {
        match self.next() {
            Some((_, line)) if line == format!("[{name}]") => Ok(()),
            Some((no, line)) => Err(self.err(no, format!("expected [{name}], found `{line}`"))),
            None => Err(Error::TruncatedReport(name.to_string())),
        }
    }

    /// Reads `key = value` pairs until the next section header or EOF.
    fn read_pairs(&mut self) -> Result<Vec<(usize, String, String)>> {
        let mut pairs = Vec::new();
        while let Some((no, line)) = self.peek() {
            if line.starts_with('[') {
                break;
            }
            self.pos += 1;
            if line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| self.err(no, format!("expected `key = value`, found `{line}`")))?;
            pairs.push((no, key.trim().to_string(), value.trim().to_string()));
        }
        Ok(pairs)
    }
}

struct Section {
    name: &'static str,
    pairs: Vec<(usize, String, String)>,
    origin: String,
}

impl Section {
    fn get(&self, key: &str) -> Result<&str> {
        self.pairs
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.as_str())
            .ok_or_else(|| Error::TruncatedReport(format!("{}] key {key}", self.name)))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let value = self.get(key)?;
        let (line, _, _) = self
            .pairs
            .iter()
            .find(|(_, k, _)| k == key)
            .expect("key present");
        value.parse::<T>().map_err(|_| Error::Parse {
            origin: self.origin.clone(),
            line: *line,
            message: format!("bad value for {key}: `{value}`"),
        })
    }

    fn all(&self, key: &str) -> Vec<String> {
        self.pairs
            .iter()
            .filter(|(_, k, _)| k == key)
            .map(|(_, _, v)| v.clone())
            .collect()
    }
}

pub fn parse_report(text: &str, origin: &str) -> Result<FitReport> {
    let mut cur = Cursor::new(text, origin);

    let (no, first) = cur.next().ok_or_else(|| Error::TruncatedReport("header".into()))?;
    let version: u32 = first
        .strip_prefix("telefit-report v")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| cur.err(no, format!("not a report file (first line `{first}`)")))?;
    if version > REPORT_FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: version, supported: REPORT_FORMAT_VERSION });
    }

    let section = |name: &'static str, cur: &mut Cursor| -> Result<Section> {
        cur.expect_section(name)?;
        Ok(Section { name, pairs: cur.read_pairs()?, origin: origin.to_string() })
    };

    let config = section("config", &mut cur)?;
    let cfg = McmcConfig {
        iters_phase1: config.parse("iters_phase1")?,
        iters_phase2: config.parse("iters_phase2")?,
        m: config.parse("m")?,
        c0: config.parse("c0")?,
        e1_0: config.parse("e1_0")?,
        burn_in: config.parse("burn_in")?,
        proposal_scales: ProposalScales {
            a1: config.parse("scale_a1")?,
            e1: config.parse("scale_e1")?,
            a2: config.parse("scale_a2")?,
            c: config.parse("scale_c")?,
        },
        discard_limit: config.parse("discard_limit")?,
        seed: config.parse("seed")?,
        cycle_intermediate: config.parse("cycle_intermediate")?,
    };

    let priors_sec = section("priors", &mut cur)?;
    let energy = match priors_sec.get("energy_family")? {
        "gamma" => EnergyPrior::Gamma {
            scale: priors_sec.parse("energy_scale")?,
            shape: priors_sec.parse("energy_shape")?,
        },
        "pareto" => EnergyPrior::Pareto {
            x_min: priors_sec.parse("energy_x_min")?,
            shape: priors_sec.parse("energy_shape")?,
        },
        other => {
            return Err(Error::Parse {
                origin: origin.to_string(),
                line: 1,
                message: format!("unknown energy family `{other}`"),
            })
        }
    };
    let priors = PriorSpec {
        alpha: priors_sec.parse("alpha")?,
        beta: priors_sec.parse("beta")?,
        energy,
        omega: priors_sec.parse("omega")?,
    };

    let sched_sec = section("schedule", &mut cur)?;
    let rule = match sched_sec.get("rule")? {
        "ratio" => ScheduleRule::Ratio,
        "tolerance" => ScheduleRule::Tolerance {
            provisional_spacing: sched_sec.parse("provisional_spacing")?,
            tolerance: sched_sec.parse("tolerance")?,
        },
        other => {
            return Err(Error::Parse {
                origin: origin.to_string(),
                line: 1,
                message: format!("unknown schedule rule `{other}`"),
            })
        }
    };
    let times: Vec<u32> = sched_sec
        .get("times")?
        .split_whitespace()
        .map(|t| t.parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            origin: origin.to_string(),
            line: 1,
            message: "bad schedule times".into(),
        })?;
    let schedule = TelescopeSchedule::from_raw(times, rule)?;

    // [particles] carries bare rows after its key/value preamble, so it is
    // parsed by hand rather than through read_pairs.
    cur.expect_section("particles")?;
    let (count_no, count_line) =
        cur.next().ok_or_else(|| Error::TruncatedReport("particles] count".into()))?;
    let count: usize = count_line
        .strip_prefix("count =")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| cur.err(count_no, format!("expected `count = N`, found `{count_line}`")))?;
    let (seed_no, seed_line) =
        cur.next().ok_or_else(|| Error::TruncatedReport("particles] seed".into()))?;
    let cloud_seed: u64 = seed_line
        .strip_prefix("seed =")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| cur.err(seed_no, format!("expected `seed = N`, found `{seed_line}`")))?;
    let mut weights: Option<Vec<f64>> = None;
    if let Some((no, line)) = cur.peek() {
        if let Some(rest) = line.strip_prefix("weights =") {
            let parsed: std::result::Result<Vec<f64>, _> =
                rest.split_whitespace().map(|x| x.parse::<f64>()).collect();
            weights = Some(
                parsed.map_err(|_| cur.err(no, "bad weights".into()))?,
            );
            cur.pos += 1;
        }
    }
    let mut a1 = Vec::with_capacity(count);
    let mut e1 = Vec::with_capacity(count);
    let mut a2 = Vec::with_capacity(count);
    let mut c = Vec::with_capacity(count);
    while a1.len() < count {
        let (no, line) = cur
            .next()
            .ok_or_else(|| Error::TruncatedReport(format!(
                "particles] row {} of {count}",
                a1.len() + 1
            )))?;
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(cur.err(no, format!("expected 4 particle columns, got {}", cols.len())));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| cur.err(no, format!("bad particle value `{s}`")))
        };
        a1.push(parse(cols[0])?);
        e1.push(parse(cols[1])?);
        a2.push(parse(cols[2])?);
        c.push(parse(cols[3])?);
    }
    let mut posterior = ParticleCloud::new_joint(a1, e1, a2, c, cloud_seed)?;
    if let Some(w) = weights {
        posterior = posterior.with_weights(w)?;
    }

    let summaries_sec = section("summaries", &mut cur)?;
    let summary = |prefix: &str| -> Result<PosteriorSummary> {
        Ok(PosteriorSummary {
            mode: summaries_sec.parse(&format!("{prefix}.mode"))?,
            mean: summaries_sec.parse(&format!("{prefix}.mean"))?,
            ci_low: summaries_sec.parse(&format!("{prefix}.ci_low"))?,
            ci_high: summaries_sec.parse(&format!("{prefix}.ci_high"))?,
            bin_width: summaries_sec.parse(&format!("{prefix}.bin_width"))?,
            degenerate: summaries_sec.parse(&format!("{prefix}.degenerate"))?,
        })
    };
    let summaries = ParamSummaries {
        a1: summary("a1")?,
        e1: summary("e1")?,
        a2: summary("a2")?,
        c: summary("c")?,
    };

    let diag = section("diagnostics", &mut cur)?;
    let failure_messages = diag.all("failure");
    let failed_repetitions: usize = diag.parse("failed_repetitions")?;
    if failed_repetitions != failure_messages.len() {
        return Err(Error::Parse {
            origin: origin.to_string(),
            line: 1,
            message: format!(
                "failed_repetitions = {failed_repetitions} but {} failure lines",
                failure_messages.len()
            ),
        });
    }

    Ok(FitReport {
        posterior,
        summaries,
        discard_count: diag.parse("discard_count")?,
        discard_fraction: diag.parse("discard_fraction")?,
        failed_repetitions,
        failure_messages,
        config: cfg,
        priors,
        schedule,
    })
}
