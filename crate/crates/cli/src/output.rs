// Copyright 2026 the scenery-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! CSV and JSON artifact writers. Formatting goes through `Display`, so a
//! re-run with the same seed produces byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use scenery_core::local_time::LocalTimeField;
use scenery_core::process::PathSample;
use scenery_core::scenery::DeltaPath;

pub fn write_path_csv(path: &Path, sample: &PathSample) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,y")?;
    for (k, y) in sample.values.iter().enumerate() {
        writeln!(w, "{},{}", k as f64 * sample.dt, y)?;
    }
    w.flush()
}

pub fn write_local_time_csv(path: &Path, field: &LocalTimeField) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,x,L")?;
    for (j, &t) in field.checkpoints.iter().enumerate() {
        let row = field.row(j);
        for (i, &l) in row.iter().enumerate() {
            writeln!(w, "{},{},{}", t, field.grid.center(i), l)?;
        }
    }
    w.flush()
}

pub fn write_delta_csv(path: &Path, delta: &DeltaPath) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,delta,running_sup,cond_var")?;
    for (j, &t) in delta.checkpoints.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            t, delta.delta[j], delta.running_sup[j], delta.cond_var[j]
        )?;
    }
    w.flush()
}

/// Versioned JSON envelope shared by every summary artifact.
#[derive(Serialize)]
pub struct Summary<T: Serialize> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

pub const SCHEMA_VERSION: u32 = 1;

pub fn write_json<T: Serialize>(path: &Path, body: T) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(
        &mut w,
        &Summary {
            schema_version: SCHEMA_VERSION,
            body,
        },
    )?;
    writeln!(w)?;
    w.flush()
}

pub fn write_checks_csv(
    path: &Path,
    checks: &[scenery_core::validate::CheckResult],
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "name,kind,passed,statistic,threshold")?;
    for c in checks {
        writeln!(
            w,
            "{},{:?},{},{},{}",
            c.name, c.kind, c.passed, c.statistic, c.threshold
        )?;
    }
    w.flush()
}
