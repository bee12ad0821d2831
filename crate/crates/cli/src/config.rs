//! `--config FILE`: flat `key = value` lines whose keys are long flag names.
//! Values are appended to argv only for flags not given on the command line.

use std::ffi::OsString;
use std::io;

fn flag_present(argv: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    argv.iter().filter_map(|a| a.to_str()).any(|a| a == long || a.starts_with(&with_eq))
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Parses config text into `(key, value)` pairs. `#` starts a comment.
pub fn parse_config(text: &str) -> io::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            io::Error::new(io::ErrorKind::InvalidData, format!("config line {}: expected key = value", lineno + 1))
        })?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("config line {}: bad key", lineno + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Returns argv with config entries appended. Boolean flags use `true`/`false`.
pub fn merge_config(mut argv: Vec<OsString>) -> io::Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.to_string_lossy())))?;
    let entries = parse_config(&text)?;
    let mut extra = Vec::new();
    for (k, v) in entries {
        if flag_present(&argv, &k) {
            continue;
        }
        match v.as_str() {
            "true" => extra.push(OsString::from(format!("--{k}"))),
            "false" => {}
            _ => extra.push(OsString::from(format!("--{k}={v}"))),
        }
    }
    argv.extend(extra);
    Ok(argv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn command_line_wins() {
        let dir = std::env::temp_dir().join(format!("tailchain-cfg-{}", std::process::id()));
        std::fs::write(&dir, "alpha1 = 0.5\nbeta1=0.4 # comment\n\ntwo-sided = true\n").unwrap();
        let argv = args(&["tailchain", "simulate", "--alpha1", "0.15", "--config", dir.to_str().unwrap()]);
        let merged = merge_config(argv).unwrap();
        let s: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert!(s.contains(&"--beta1=0.4".to_string()));
        assert!(s.contains(&"--two-sided".to_string()));
        assert!(!s.iter().any(|a| a == "--alpha1=0.5"));
        std::fs::remove_file(dir).unwrap();
    }

    #[test]
    fn malformed_line() {
        assert_eq!(parse_config("alpha1 0.5").unwrap_err().kind(), io::ErrorKind::InvalidData);
    }
}
