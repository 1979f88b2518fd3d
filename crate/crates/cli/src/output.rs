//! Files written next to every CSV.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mimo_noma::SweepResult;

/// `<stem>.meta` beside the CSV.
pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

/// `<stem>.plot.py` beside the CSV.
pub fn plot_script_path(csv: &Path) -> PathBuf {
    csv.with_extension("plot.py")
}

/// Writes `contents`, creating missing parent directories.
pub fn write_file(path: &Path, contents: &str) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)
}

/// Metadata file: the run's configuration as loadable `key = value` lines,
/// followed by the remaining metadata as comments.
pub fn metadata_text(config_text: &str, result: &SweepResult, reloadable: &[&str]) -> String {
    let mut out = String::from("# reload with: nomasim <subcommand> --config <this file>\n");
    out.push_str(config_text);
    for (k, v) in &result.metadata {
        if !reloadable.contains(&k.as_str()) {
            out.push_str(&format!("# {k} = {v}\n"));
        }
    }
    out
}

/// Matplotlib script that plots every (scheme, metric) series in the CSV.
pub fn plot_script(csv_name: &str, title: &str) -> String {
    format!(
        r#"import sys
import pandas as pd
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
df = pd.read_csv(path)
two_d = "sweep_point2" in df.columns
for metric, group in df.groupby("metric"):
    fig, ax = plt.subplots()
    for scheme, rows in group.groupby("scheme"):
        if two_d:
            for y, line in rows.groupby("sweep_point2"):
                ax.errorbar(line.sweep_point, line["mean"], yerr=line["stderr"], label=f"{{scheme}} @ {{y}}")
        else:
            ax.errorbar(rows.sweep_point, rows["mean"], yerr=rows["stderr"], label=scheme)
    ax.set_xlabel("sweep point")
    ax.set_ylabel(metric)
    ax.set_title("{title}")
    ax.legend()
    fig.savefig(f"{{path.rsplit('.', 1)[0]}}.{{metric}}.png", dpi=150)
"#
    )
}
