#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn lpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_csv(path: &Path) -> Csv {
    let text = std::fs::read_to_string(path).expect("csv readable");
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("nonempty csv")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    Csv { header, rows }
}

impl Csv {
    pub fn column(&self, name: &str) -> Vec<f64> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("column {name} in {:?}", self.header));
        self.rows.iter().map(|r| r[idx]).collect()
    }
}
