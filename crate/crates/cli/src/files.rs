use std::fs::{self, File};
use std::path::Path;

use maxtimes::matrix as io;
use maxtimes::{NonNegMatrix, ObservationMask};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

pub fn read_matrix(path: &Path, header: bool) -> CliResult<NonNegMatrix> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    io::read_csv(f, header).map_err(|e| CliError::at(path, e))
}

pub fn read_mask(path: &Path, header: bool) -> CliResult<ObservationMask> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    io::read_mask_csv(f, header).map_err(|e| CliError::at(path, e))
}

pub fn write_matrix(path: &Path, a: &NonNegMatrix) -> CliResult<()> {
    io::write_csv(create(path)?, a).map_err(|e| CliError::at(path, e))
}

pub fn write_mask(path: &Path, mask: &ObservationMask) -> CliResult<()> {
    io::write_mask_csv(create(path)?, mask).map_err(|e| CliError::at(path, e))
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
