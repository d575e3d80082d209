// SPDX-License-Identifier: Apache-2.0

//! Corpus loading shared by the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use smc::ir::Model;
use smc::scenario::Scenario;
use smc::{parse_model, parse_scenario};

pub struct Case {
    pub name: String,
    pub dir: PathBuf,
    pub model_path: PathBuf,
    pub model: Model,
    /// `(file stem, scenario)`, sorted by stem.
    pub scenarios: Vec<(String, Scenario)>,
}

impl Case {
    pub fn scenario_path(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}.scn"))
    }
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn sorted_entries(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

/// Every `corpus/<name>/<name>.sm` with its `*.scn` files.
pub fn corpus() -> Vec<Case> {
    sorted_entries(&corpus_dir())
        .into_iter()
        .filter(|p| p.is_dir())
        .map(|dir| {
            let name = dir.file_name().unwrap().to_string_lossy().into_owned();
            let model_path = dir.join(format!("{name}.sm"));
            let text = fs::read_to_string(&model_path).unwrap();
            let model = parse_model(&model_path.to_string_lossy(), &text).unwrap();
            assert!(smc::validate(&model).is_valid(), "{name} does not validate");
            let scenarios = sorted_entries(&dir)
                .into_iter()
                .filter(|p| p.extension().is_some_and(|e| e == "scn"))
                .map(|p| {
                    let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
                    let scn = parse_scenario(&p.to_string_lossy(), &fs::read_to_string(&p).unwrap()).unwrap();
                    (stem, scn)
                })
                .collect();
            Case {
                name,
                dir,
                model_path,
                model,
                scenarios,
            }
        })
        .collect()
}
