use std::path::Path;
use std::process::{Command, Output};

pub struct CmdResult {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn tgsr(args: &[&str], cwd: &Path) -> CmdResult {
    let output: Output = Command::new(env!("CARGO_BIN_EXE_tgsr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn tgsr");
    CmdResult {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
    }
}

pub fn assert_code(result: &CmdResult, expected: i32, context: &str) {
    assert_eq!(
        result.code, expected,
        "{context}: expected exit {expected}, got {} \nstdout:\n{}\nstderr:\n{}",
        result.code, result.stdout, result.stderr
    );
}
