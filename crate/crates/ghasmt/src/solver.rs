//! Runs the external δ-complete solver on an emitted document.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use ghasmt_core::verdict::{parse_verdict, SolverVerdict};
use wait_timeout::ChildExt;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "GHASMT_SOLVER";

#[derive(Debug, Clone)]
pub struct SolverCommand {
    pub program: PathBuf,
    /// Arguments placed before the document path.
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl SolverCommand {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        SolverCommand { program: program.into(), args: vec!["--model".into()], timeout: DEFAULT_TIMEOUT }
    }
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        buf
    })
}

/// Runs the solver and classifies its output. A run killed at the timeout
/// is `Unknown`; a solver that cannot be started is a `Failure`.
pub fn run_solver(doc: &Path, cmd: &SolverCommand) -> SolverVerdict {
    let spawned = Command::new(&cmd.program)
        .args(&cmd.args)
        .arg(doc)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match spawned {
        Ok(c) => c,
        Err(e) => {
            return SolverVerdict::Failure {
                exit_code: None,
                stderr: format!("cannot start {}: {e}", cmd.program.display()),
            }
        }
    };
    let out = drain(child.stdout.take().expect("piped stdout"));
    let err = drain(child.stderr.take().expect("piped stderr"));
    let status = match child.wait_timeout(cmd.timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return SolverVerdict::Unknown { raw: format!("timeout after {} s", cmd.timeout.as_secs_f64()) };
        }
        Err(e) => {
            let _ = child.kill();
            return SolverVerdict::Failure { exit_code: None, stderr: format!("waiting for solver: {e}") };
        }
    };
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    parse_verdict(&stdout, &stderr, status.code())
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("fake-solver");
        std::fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
        p
    }

    fn run(body: &str, timeout: Duration) -> SolverVerdict {
        let dir = tempfile::tempdir().unwrap();
        let doc = dir.path().join("q.smt2");
        std::fs::write(&doc, "(check-sat)\n").unwrap();
        let mut cmd = SolverCommand::new(script(dir.path(), body));
        cmd.timeout = timeout;
        run_solver(&doc, &cmd)
    }

    #[test]
    fn classifies_solver_output() {
        assert_eq!(run("echo unsat", DEFAULT_TIMEOUT), SolverVerdict::Unsat);
        let v = run("echo 'delta-sat with delta = 0.00100000000000000'\necho 'x : [1, 2]'", DEFAULT_TIMEOUT);
        let SolverVerdict::DeltaSat { delta, witness: Some(w) } = v else { panic!("{v:?}") };
        assert_eq!(delta, 0.001);
        assert_eq!((w["x"].lo, w["x"].hi), (1.0, 2.0));
        assert!(matches!(run("exit 137", DEFAULT_TIMEOUT), SolverVerdict::Failure { exit_code: Some(137), .. }));
    }

    #[test]
    fn the_document_is_the_last_argument() {
        let v = run("case \"$2\" in *q.smt2) echo unsat;; *) echo sat;; esac", DEFAULT_TIMEOUT);
        assert_eq!(v, SolverVerdict::Unsat);
    }

    #[test]
    fn timeouts_are_unknown() {
        let v = run("sleep 5", Duration::from_millis(200));
        assert!(matches!(v, SolverVerdict::Unknown { .. }), "{v:?}");
    }

    #[test]
    fn missing_executable() {
        let cmd = SolverCommand::new("/nonexistent/solver");
        let v = run_solver(Path::new("q.smt2"), &cmd);
        assert!(matches!(v, SolverVerdict::Failure { exit_code: None, .. }));
    }
}
