//! Generates the bundled synthetic diyabc-style data set, and acts as the
//! external simulator of the two-phase holdout workflow.
//!
//! ```text
//! cargo run --example diyabc_synthetic -- generate data/diyabc_synthetic
//! cargo run --example diyabc_synthetic -- simulate params_x.csv summaries_x.csv [seed]
//! ```

#[path = "../tests/support/diyabc_synthetic.rs"]
mod synthetic;

use std::error::Error;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use synthetic::{PARAM_NAMES, STAT_NAMES};

const ROWS: usize = 2000;
const SEED: u64 = 20240424;

fn whitespace_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(" ");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn stat_cells(stats: &[f64]) -> Vec<String> {
    stats.iter().map(|v| format!("{v:.6}")).collect()
}

fn generate(dir: &Path) -> Result<(), Box<dyn Error>> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut header = vec!["scenario"];
    header.extend(PARAM_NAMES);
    header.extend(STAT_NAMES);
    let rows: Vec<Vec<String>> = (0..ROWS)
        .map(|_| {
            let theta = synthetic::sample_prior(&mut rng);
            let stats = synthetic::simulate(&theta, &mut rng);
            let mut row = vec!["1".to_string()];
            row.extend(theta.iter().map(|v| format!("{v}")));
            row.extend(stat_cells(&stats));
            row
        })
        .collect();
    std::fs::write(dir.join("reftable.txt"), whitespace_table(&header, &rows))?;

    // two independent datasets from one parameter value
    let truth = [4200.0, 2500.0, 7000.0, 6000.0, 180.0, 450.0, 820.0];
    for name in ["observed.txt", "replicate.txt"] {
        let stats = synthetic::simulate(&truth, &mut rng);
        std::fs::write(dir.join(name), whitespace_table(&STAT_NAMES, &[stat_cells(&stats)]))?;
    }

    let schema = serde_json::json!({
        "params": PARAM_NAMES,
        "stats": STAT_NAMES,
        "delimiter": "whitespace",
    });
    std::fs::write(dir.join("schema.json"), serde_json::to_string_pretty(&schema)? + "\n")?;

    let mut params: Vec<serde_json::Value> = PARAM_NAMES[..4]
        .iter()
        .map(|n| serde_json::json!({"name": n, "lower": synthetic::N_BOUNDS.0, "upper": synthetic::N_BOUNDS.1, "integer": true}))
        .collect();
    for (n, (lo, hi)) in PARAM_NAMES[4..].iter().zip(synthetic::T_BOUNDS) {
        params.push(serde_json::json!({"name": n, "lower": lo, "upper": hi, "integer": true}));
    }
    let transform = serde_json::json!({"params": params, "ordered": [[4, 5, 6]]});
    std::fs::write(dir.join("transform.json"), serde_json::to_string_pretty(&transform)? + "\n")?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["generate", dir] => generate(Path::new(dir)),
        ["simulate", params, summaries] => synthetic::simulate_file(Path::new(params), Path::new(summaries), 0),
        ["simulate", params, summaries, seed] => synthetic::simulate_file(Path::new(params), Path::new(summaries), seed.parse()?),
        _ => Err("usage: diyabc_synthetic generate DIR | simulate PARAMS SUMMARIES [SEED]".into()),
    }
}
