#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gustqa_core::grid::{synth_grid, write_wgf, SyntheticSpec};

pub fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

pub fn gustqa(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gustqa"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn gustqa")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Writes `n` storm grids as grids/g{i}.wgf, seeded from `seed`.
pub fn write_grids(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let grids = dir.join("grids");
    std::fs::create_dir_all(&grids).unwrap();
    for i in 0..n {
        let s = seed + i as u64;
        let grid = synth_grid(&SyntheticSpec::random_storms(s, 90, 180), s).unwrap();
        std::fs::write(grids.join(format!("g{i}.wgf")), write_wgf(&grid)).unwrap();
    }
    grids
}

/// Small-raster config over the bundled boundaries.
pub fn config_json(grids: &Path, output: &Path, seed: u64) -> serde_json::Value {
    serde_json::json!({
        "paths": {
            "grids_dir": grids,
            "land": core_fixture("land.geojson"),
            "ocean": core_fixture("ocean.geojson"),
            "output": output,
        },
        "render": {"width": 720, "height": 360},
        "spot": {"min_area": 10},
        "seed": seed,
        "workers": 2,
    })
}

pub fn write_config(dir: &Path, cfg: &serde_json::Value) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}
