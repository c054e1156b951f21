use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::protocol::{decode_response, Request};
use super::{Sut, SutOutput};
use crate::suite::Task;

pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;

/// Drives an external executable over the line protocol.
///
/// The process is started lazily on the first query and restarted after a
/// crash, timeout or protocol violation. Requests are strictly sequential.
pub struct SutAdapter {
    command: Vec<String>,
    timeout: Duration,
    working_dir: Option<PathBuf>,
    next_id: u64,
    process: Option<Running>,
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl SutAdapter {
    /// `command[0]` is the executable, the rest its arguments.
    ///
    /// # Panics
    ///
    /// Panics if `command` is empty.
    pub fn new(command: Vec<String>) -> Self {
        assert!(!command.is_empty(), "adapter command must not be empty");
        Self {
            command,
            timeout: Duration::from_millis(DEFAULT_TIMEOUT_MS),
            working_dir: None,
            next_id: 1,
            process: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_working_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.working_dir = Some(dir.into());
        self
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    fn spawn(&self) -> std::io::Result<Running> {
        let mut cmd = Command::new(&self.command[0]);
        cmd.args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit());
        if let Some(dir) = &self.working_dir {
            cmd.current_dir(dir);
        }
        let mut child = cmd.spawn()?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(Running {
            child,
            stdin,
            lines: rx,
        })
    }

    fn shutdown(&mut self) {
        if let Some(mut p) = self.process.take() {
            let _ = p.child.kill();
            let _ = p.child.wait();
        }
    }

    // Reaps the dead process and describes how it ended.
    fn crashed(&mut self, detail: &str) -> SutOutput {
        let status = self.process.take().map(|mut p| {
            drop(p.stdin);
            // the child closed stdout; give it a moment to exit
            for _ in 0..50 {
                if let Ok(Some(status)) = p.child.try_wait() {
                    return status.to_string();
                }
                thread::sleep(Duration::from_millis(10));
            }
            let _ = p.child.kill();
            p.child
                .wait()
                .map(|s| s.to_string())
                .unwrap_or_else(|e| e.to_string())
        });
        SutOutput::error(format!(
            "crash: {detail} ({})",
            status.unwrap_or_else(|| "not running".into())
        ))
    }

    fn query_inner(&mut self, image: &Path, task: Task) -> SutOutput {
        if self.process.is_none() {
            match self.spawn() {
                Ok(p) => self.process = Some(p),
                Err(e) => {
                    return SutOutput::error(format!(
                        "crash: failed to start `{}`: {e}",
                        self.command[0]
                    ))
                }
            }
        }
        let id = self.next_id;
        self.next_id += 1;
        let image_path = std::path::absolute(image).unwrap_or_else(|_| image.to_path_buf());
        let request = Request {
            id,
            image_path: image_path.to_string_lossy().into_owned(),
            task,
        };
        let proc = self.process.as_mut().expect("process started above");
        let mut line = request.to_line();
        line.push('\n');
        if let Err(e) = proc
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| proc.stdin.flush())
        {
            return self.crashed(&format!("request write failed: {e}"));
        }
        match proc.lines.recv_timeout(self.timeout) {
            Ok(Ok(response)) => {
                let out = decode_response(&response, id, task);
                if matches!(&out, SutOutput::Error { message } if message.starts_with("protocol:")) {
                    // the stream can no longer be trusted to stay in lockstep
                    self.shutdown();
                }
                out
            }
            Ok(Err(e)) => self.crashed(&format!("reading response failed: {e}")),
            Err(RecvTimeoutError::Disconnected) => self.crashed("process closed its output"),
            Err(RecvTimeoutError::Timeout) => {
                self.shutdown();
                SutOutput::error(format!(
                    "timeout: no response within {} ms",
                    self.timeout.as_millis()
                ))
            }
        }
    }
}

impl Sut for SutAdapter {
    fn query(&mut self, image: &Path, task: Task) -> SutOutput {
        self.query_inner(image, task)
    }
}

impl Drop for SutAdapter {
    fn drop(&mut self) {
        self.shutdown();
    }
}

impl std::fmt::Debug for SutAdapter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SutAdapter")
            .field("command", &self.command)
            .field("timeout", &self.timeout)
            .field("working_dir", &self.working_dir)
            .field("running", &self.process.is_some())
            .finish()
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn sh(script: &str) -> SutAdapter {
        SutAdapter::new(vec!["sh".into(), "-c".into(), script.into()])
    }

    fn message(out: SutOutput) -> String {
        match out {
            SutOutput::Error { message } => message,
            other => panic!("expected an error, got {other:?}"),
        }
    }

    #[test]
    fn immediate_exit_is_a_crash() {
        let mut a = sh("exit 3");
        let m = message(a.query(Path::new("/tmp/x.png"), Task::Classification));
        assert!(m.starts_with("crash:"), "{m}");
    }

    #[test]
    fn missing_executable_is_a_crash() {
        let mut a = SutAdapter::new(vec!["/definitely/not/a/binary".into()]);
        let m = message(a.query(Path::new("x.png"), Task::Detection));
        assert!(m.starts_with("crash: failed to start"), "{m}");
    }

    #[test]
    fn silence_times_out() {
        let mut a = sh("sleep 5").with_timeout(Duration::from_millis(100));
        let m = message(a.query(Path::new("x.png"), Task::Classification));
        assert!(m.starts_with("timeout:"), "{m}");
    }

    #[test]
    fn garbage_is_a_protocol_error() {
        let mut a = sh("read line; echo hello; sleep 5");
        let m = message(a.query(Path::new("x.png"), Task::Classification));
        assert!(m.starts_with("protocol:"), "{m}");
    }

    #[test]
    fn echoing_adapter_answers_in_lockstep() {
        // answers every request with a fixed label, echoing the id
        let script = r#"while read line; do
            id=$(echo "$line" | sed 's/.*"id":\([0-9]*\).*/\1/')
            echo "{\"id\":$id,\"status\":\"ok\",\"label\":\"cat\"}"
        done"#;
        let mut a = sh(script);
        for _ in 0..3 {
            assert_eq!(
                a.query(Path::new("/a.png"), Task::Classification),
                SutOutput::Classification { label: "cat".into() }
            );
        }
    }

    #[test]
    fn restarts_after_crash() {
        // each process answers one request, then exits
        let script = r#"read line; id=$(echo "$line" | sed 's/.*"id":\([0-9]*\).*/\1/'); echo "{\"id\":$id,\"status\":\"err\",\"message\":\"once\"}""#;
        let mut a = sh(script);
        assert_eq!(a.query(Path::new("/a.png"), Task::Detection), SutOutput::error("once"));
        let second = a.query(Path::new("/a.png"), Task::Detection);
        assert!(second.is_error());
        // the next query spawns a fresh process
        assert_eq!(a.query(Path::new("/a.png"), Task::Detection), SutOutput::error("once"));
    }
}
