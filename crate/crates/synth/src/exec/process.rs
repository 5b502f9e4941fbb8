//! A fresh child process per call, speaking the line protocol in `wire`.

use std::io::{Read, Write};
use std::os::unix::process::CommandExt;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use genplan_core::{Domain, Task};

use super::wire::{raw_from_value, ShimRequest, ShimResponse, ShimStatus};
use super::{ExecError, ExecutionOutcome, Executor, OutcomeKind};
use crate::program::ProgramSource;

const STDERR_CAP: usize = 1 << 20;
const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone)]
pub struct ProcessExecutor {
    /// Shim command line, e.g. `["python3", "-m", "genplan_shim"]`.
    pub command: Vec<String>,
    /// Slack after the budget before the host interrupts the child.
    pub grace: Duration,
    /// Waits after the interrupt and after terminate before escalating.
    pub interrupt_wait: Duration,
    pub terminate_wait: Duration,
    /// Host variables passed through; everything else is dropped.
    pub pass_env: Vec<String>,
}

impl ProcessExecutor {
    pub fn new<I, S>(command: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ProcessExecutor {
            command: command.into_iter().map(Into::into).collect(),
            grace: Duration::from_secs(1),
            interrupt_wait: Duration::from_secs(2),
            terminate_wait: Duration::from_secs(2),
            pass_env: ["PATH", "PYTHONPATH", "VIRTUAL_ENV", "LD_LIBRARY_PATH"].map(String::from).into(),
        }
    }

    fn spawn(&self, jail: &std::path::Path) -> std::io::Result<Child> {
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty shim command"))?;
        let mut cmd = Command::new(program);
        cmd.args(args)
            .current_dir(jail)
            .env_clear()
            .env("HOME", jail)
            .env("TMPDIR", jail)
            .env("LANG", "C.UTF-8")
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .env("PYTHONUNBUFFERED", "1")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0);
        for key in &self.pass_env {
            if let Some(value) = std::env::var_os(key) {
                cmd.env(key, value);
            }
        }
        cmd.spawn()
    }
}

fn signal_group(child: &Child, signal: libc::c_int) {
    // The child leads its own process group, so this also reaches anything it
    // started.
    unsafe {
        libc::kill(-(child.id() as libc::pid_t), signal);
    }
}

fn wait_until(child: &mut Child, deadline: Instant) -> std::io::Result<Option<ExitStatus>> {
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(Some(status));
        }
        if Instant::now() >= deadline {
            return Ok(None);
        }
        thread::sleep(POLL);
    }
}

fn reader<R: Read + Send + 'static>(mut stream: R, cap: usize) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut out = Vec::new();
        let mut buf = [0u8; 8192];
        while let Ok(n) = stream.read(&mut buf) {
            if n == 0 {
                break;
            }
            let room = cap.saturating_sub(out.len());
            out.extend_from_slice(&buf[..n.min(room)]);
        }
        out
    })
}

impl Executor for ProcessExecutor {
    fn execute(
        &self,
        program: &ProgramSource,
        domain: &Domain,
        task: &Task,
        budget: Duration,
    ) -> Result<ExecutionOutcome, ExecError> {
        if program.is_empty() {
            return Err(ExecError::EmptyProgram);
        }
        let request = ShimRequest::new(&program.text, domain, task, budget.as_secs_f64());
        let jail = tempfile::tempdir()?;
        let start = Instant::now();
        let mut child = self.spawn(jail.path())?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let line = request.to_line();
        let writer = thread::spawn(move || {
            // A child that exits without reading closes the pipe; that shows
            // up as a missing response, not here.
            let _ = stdin.write_all(line.as_bytes());
        });
        let stdout = reader(child.stdout.take().expect("piped stdout"), usize::MAX);
        let stderr = reader(child.stderr.take().expect("piped stderr"), STDERR_CAP);

        let mut escalated = false;
        let mut status = wait_until(&mut child, start + budget + self.grace)?;
        if status.is_none() {
            escalated = true;
            log::debug!("child {} over budget; interrupting", child.id());
            signal_group(&child, libc::SIGINT);
            status = wait_until(&mut child, Instant::now() + self.interrupt_wait)?;
        }
        if status.is_none() {
            signal_group(&child, libc::SIGTERM);
            status = wait_until(&mut child, Instant::now() + self.terminate_wait)?;
        }
        let status = match status {
            Some(s) => s,
            None => {
                signal_group(&child, libc::SIGKILL);
                child.wait()?
            }
        };
        let wall_time = start.elapsed();
        // Leftover descendants would keep the pipes open.
        signal_group(&child, libc::SIGKILL);
        let _ = writer.join();
        let stdout = String::from_utf8_lossy(&stdout.join().unwrap_or_default()).into_owned();
        let stderr = String::from_utf8_lossy(&stderr.join().unwrap_or_default()).into_owned();

        let lines: Vec<&str> = stdout.lines().filter(|l| !l.trim().is_empty()).collect();
        let response = match lines.as_slice() {
            [] => None,
            [line] => Some(serde_json::from_str::<ShimResponse>(line).map_err(|e| ExecError::Protocol {
                message: format!("malformed response: {e}"),
                stdout: stdout.clone(),
            })?),
            _ => {
                return Err(ExecError::Protocol {
                    message: format!("expected one response line, got {}", lines.len()),
                    stdout,
                })
            }
        };

        let plan_time = response
            .as_ref()
            .and_then(|r| r.plan_time_s)
            .filter(|s| s.is_finite() && *s >= 0.0)
            .map(Duration::from_secs_f64);
        let stderr_or = |fallback: String| {
            if stderr.trim().is_empty() {
                fallback
            } else {
                stderr.trim_end().to_owned()
            }
        };
        let kind = match response {
            Some(r) => match r.status {
                ShimStatus::Plan => {
                    OutcomeKind::Returned(raw_from_value(r.plan.as_ref().unwrap_or(&serde_json::Value::Null)))
                }
                ShimStatus::Exception => OutcomeKind::Raised {
                    traceback: r.traceback.unwrap_or_default(),
                },
                ShimStatus::Timeout => OutcomeKind::TimedOut {
                    traceback: r.traceback.unwrap_or_default(),
                },
            },
            None if escalated => OutcomeKind::TimedOut {
                traceback: stderr_or("KeyboardInterrupt".to_owned()),
            },
            None => OutcomeKind::Raised {
                traceback: stderr_or(format!("executor exited ({status}) without a response")),
            },
        };
        Ok(ExecutionOutcome {
            kind,
            wall_time,
            plan_time,
        })
    }
}
