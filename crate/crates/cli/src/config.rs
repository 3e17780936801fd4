//! `--config FILE` support: each `key=value` line becomes `--key value`,
//! inserted right after the subcommand so later command-line flags win.

use std::ffi::OsString;
use std::path::PathBuf;

const SUBCOMMANDS: [&str; 5] = ["calibrate", "classify", "simulate", "demo-normality", "evaluate"];

pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path: Option<PathBuf> = None;
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = argv.get(i + 1).map(PathBuf::from);
        } else if let Some(rest) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(rest));
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let flags = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Some(at) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(argv);
    };
    let mut out = argv[..=at].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut flags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(format!("line {}: nested config files are not supported", i + 1));
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.to_string());
            }
        }
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_lines_become_flags() {
        let flags = parse_config("# comment\nseed = 7\ntarget_class=0\nsave-data=true\nx=false\n").unwrap();
        assert_eq!(flags, ["--seed", "7", "--target-class", "0", "--save-data"]);
        assert!(parse_config("seed").is_err());
    }

    #[test]
    fn flags_inserted_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "seed=7\n").unwrap();
        let argv = os(&["pvclass", "simulate", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
        let out = expand_config(argv).unwrap();
        let strs: Vec<String> = out.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(&strs[..4], ["pvclass", "simulate", "--seed", "7"]);
        assert_eq!(strs.last().unwrap(), "9");
    }
}
