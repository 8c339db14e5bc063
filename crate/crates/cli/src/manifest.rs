use std::io;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance block embedded in every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub grid: Vec<usize>,
    pub threads: usize,
    pub wall_time_seconds: f64,
}

pub struct Context {
    argv: Vec<String>,
    start: Instant,
    inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub grid: Vec<usize>,
}

impl Context {
    pub fn new(argv: Vec<String>) -> Self {
        Context { argv, start: Instant::now(), inputs: Vec::new(), seed: None, grid: Vec::new() }
    }

    /// Reads an input file and records its hash.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputHash { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        Ok(bytes)
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            tool: "holodimer",
            version: env!("CARGO_PKG_VERSION"),
            command_line: self.argv.clone(),
            inputs: self.inputs.clone(),
            seed: self.seed,
            grid: self.grid.clone(),
            threads: rayon::current_num_threads(),
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Seventeen significant digits, positional when the exponent is moderate.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.split_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..=15).contains(&exp) {
        format!("{x:.prec$}", prec = (16 - exp) as usize)
    } else {
        sci
    }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        w.write_all(fmt17(value as f64).as_bytes())
    }
}

/// `payload` as a JSON object with the manifest under `"manifest"`.
pub fn json_artifact(payload: &impl Serialize, manifest: &RunManifest) -> Result<String, CliError> {
    let mut value = serde_json::to_value(payload).map_err(|e| CliError::Io(e.to_string()))?;
    let m = serde_json::to_value(manifest).map_err(|e| CliError::Io(e.to_string()))?;
    match value.as_object_mut() {
        Some(obj) => {
            obj.insert("manifest".into(), m);
        }
        None => value = serde_json::json!({ "result": value, "manifest": m }),
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
}

pub fn manifest_json(manifest: &RunManifest) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    manifest.serialize(&mut ser).expect("manifest serializes");
    String::from_utf8(buf).expect("serde_json writes utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [1.0 / 3.0, 6.0, -2.5e-9, 1.0e300, 0.391131, 123456789.123, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(digits.trim_start_matches('0').len(), 17, "{s}");
        }
        assert_eq!(fmt17(6.0), "6.0000000000000000");
    }

    #[test]
    fn artifact_embeds_manifest() {
        let ctx = Context::new(vec!["holodimer".into(), "x".into()]);
        let s = json_artifact(&serde_json::json!({ "value": 0.5 }), &ctx.manifest()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["value"].as_f64(), Some(0.5));
        assert_eq!(v["manifest"]["command_line"][1], "x");
        assert!(s.contains("0.50000000000000000"));
    }
}
