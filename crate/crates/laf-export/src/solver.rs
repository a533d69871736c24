//! Optional external solver, run as a subprocess on an emitted script.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Command line; `{file}` is replaced by the script path, and the path
    /// is appended when no argument mentions it.
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    /// `LAF_SOLVER` (a whitespace-separated command line), else `z3` when it
    /// is on the path.
    pub fn from_env() -> Option<SolverConfig> {
        let command: Vec<String> = match std::env::var("LAF_SOLVER") {
            Ok(s) if !s.trim().is_empty() => s.split_whitespace().map(String::from).collect(),
            _ => {
                let found = std::env::var_os("PATH")
                    .map(|p| std::env::split_paths(&p).any(|d| d.join("z3").is_file()))
                    .unwrap_or(false);
                if !found {
                    return None;
                }
                vec!["z3".into()]
            }
        };
        Some(SolverConfig {
            command,
            timeout: Duration::from_secs(30),
        })
    }

    pub fn run(&self, script: &Path) -> Result<SolverAnswer, String> {
        let file = script.display().to_string();
        let mut args: Vec<String> = self.command[1..]
            .iter()
            .map(|a| a.replace("{file}", &file))
            .collect();
        if !self.command.iter().any(|a| a.contains("{file}")) {
            args.push(file);
        }
        let mut child = Command::new(&self.command[0])
            .args(&args)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| format!("cannot start {}: {e}", self.command[0]))?;
        let start = Instant::now();
        loop {
            if child.try_wait().map_err(|e| e.to_string())?.is_some() {
                break;
            }
            if start.elapsed() > self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SolverAnswer::Unknown);
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        let mut out = String::new();
        child
            .stdout
            .take()
            .expect("stdout is piped")
            .read_to_string(&mut out)
            .map_err(|e| e.to_string())?;
        parse_answer(&out)
    }
}

/// First answer line of a solver's output.
pub fn parse_answer(out: &str) -> Result<SolverAnswer, String> {
    for line in out.lines().map(str::trim) {
        match line {
            "sat" => return Ok(SolverAnswer::Sat),
            "unsat" => return Ok(SolverAnswer::Unsat),
            "unknown" | "timeout" => return Ok(SolverAnswer::Unknown),
            l if l.starts_with("(error") => return Err(l.to_string()),
            _ => {}
        }
    }
    Err(format!("no answer in solver output: {out:?}"))
}
