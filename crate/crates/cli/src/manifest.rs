//! Run manifests. The report on stdout depends only on the inputs; timing
//! and worker count live here so that reruns can be compared byte for byte.

use std::time::Instant;

use rankstab_core::{Error, Result};
use serde::Serialize;

use crate::{Command, RunArgs};

#[derive(Debug, Serialize)]
struct Phase {
    name: &'static str,
    ms: f64,
}

#[derive(Debug)]
pub struct Run {
    args: Option<RunArgs>,
    phases: Vec<Phase>,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    argv: &'a [String],
    inputs: &'a Command,
    version: &'static str,
    seed: u64,
    jobs: usize,
    timing: Timing<'a>,
}

#[derive(Serialize)]
struct Timing<'a> {
    phases: &'a [Phase],
    total_ms: f64,
}

impl Run {
    pub fn new(args: Option<RunArgs>) -> Self {
        Self {
            args,
            phases: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn jobs(&self) -> usize {
        self.args.as_ref().map_or(0, |a| a.jobs)
    }

    pub fn seed(&self) -> u64 {
        self.args.as_ref().map_or(0, |a| a.seed)
    }

    pub fn phase<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.phases.push(Phase {
            name,
            ms: t.elapsed().as_secs_f64() * 1e3,
        });
        eprintln!(
            "[{name}] {:.1} ms",
            self.phases.last().map_or(0.0, |p| p.ms)
        );
        out
    }

    pub fn finish(&self, argv: &[String], command: &Command) -> Result<()> {
        let Some(path) = self.args.as_ref().and_then(|a| a.manifest.as_ref()) else {
            return Ok(());
        };
        let manifest = Manifest {
            command: argv.get(1).map_or("", String::as_str),
            argv,
            inputs: command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.seed(),
            jobs: self.jobs(),
            timing: Timing {
                phases: &self.phases,
                total_ms: self.started.elapsed().as_secs_f64() * 1e3,
            },
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Config(format!("manifest: {e}")))?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
    }
}
