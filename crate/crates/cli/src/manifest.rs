//! Run manifests: the argument list, seeds, tool versions and SHA-256
//! digests of every input and output file.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::{Cli, ReplayArgs};
use crate::commands::Outcome;
use crate::error::CliError;

pub const MANIFEST_SCHEMA: &str = "rough-dot/manifest-v1";
const OUT_KEY: &str = "{out}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDigest {
    /// Inputs: the path as given. Outputs: the path with the `--out`
    /// location replaced by `{out}`.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub args: Vec<String>,
    pub seeds: Vec<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::param(format!("{}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Arguments as recorded: everything except manifest placement and the
/// thread count, neither of which changes the results.
pub fn recorded_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        match a.as_str() {
            "--manifest" | "--threads" => skip = true,
            _ if a.starts_with("--manifest=") || a.starts_with("--threads=") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

fn output_key(path: &Path, out: Option<&Path>) -> String {
    let p = path.to_string_lossy();
    if let Some(o) = out {
        let o = o.to_string_lossy();
        if let Some(rest) = p.strip_prefix(o.as_ref()) {
            return format!("{OUT_KEY}{rest}");
        }
    }
    p.into_owned()
}

impl Manifest {
    pub fn new(args: Vec<String>, outcome: &Outcome) -> Result<Self, CliError> {
        let mut inputs = Vec::new();
        for p in &outcome.inputs {
            inputs.push(FileDigest {
                path: p.to_string_lossy().into_owned(),
                sha256: sha256_file(p)?,
            });
        }
        let mut outputs = Vec::new();
        for p in &outcome.outputs {
            outputs.push(FileDigest {
                path: output_key(p, outcome.out.as_deref()),
                sha256: sha256_file(p)?,
            });
        }
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(Self {
            schema: MANIFEST_SCHEMA.to_string(),
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            args,
            seeds: outcome.seeds.clone(),
            inputs,
            outputs,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let m: Manifest = crate::specs::read_json(path, "manifest")?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(CliError::param(format!(
                "unsupported manifest schema `{}`",
                m.schema
            )));
        }
        Ok(m)
    }
}

/// `<out>/manifest.json` for directory outputs, `<out>.manifest.json` for
/// files, `rough-dot.manifest.json` when nothing is written.
pub fn default_location(out: Option<&Path>) -> PathBuf {
    match out {
        Some(o) if o.is_dir() => o.join("manifest.json"),
        Some(o) => {
            let mut s = o.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("rough-dot.manifest.json"),
    }
}

fn replace_out(args: &[String], new_out: &Path) -> Result<Vec<String>, CliError> {
    let new = new_out.to_string_lossy().into_owned();
    let mut out = Vec::with_capacity(args.len());
    let mut found = false;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
            out.push(a.clone());
            out.push(new.clone());
            found = true;
        } else if a.starts_with("--out=") {
            out.push(format!("--out={new}"));
            found = true;
        } else {
            out.push(a.clone());
        }
    }
    if !found {
        return Err(CliError::param("the recorded run has no --out to redirect"));
    }
    Ok(out)
}

/// Re-runs a manifest into a new output location and checks that inputs
/// are unchanged and outputs are byte-identical.
pub fn replay(r: &ReplayArgs) -> Result<(), CliError> {
    let old = Manifest::read(&r.record)?;
    for input in &old.inputs {
        let now = sha256_file(Path::new(&input.path))?;
        if now != input.sha256 {
            return Err(CliError::param(format!(
                "input {} changed since the recorded run",
                input.path
            )));
        }
    }
    let args = replace_out(&old.args, &r.out)?;
    let mut new_manifest = r.out.as_os_str().to_owned();
    new_manifest.push(".replay-manifest.json");
    let new_manifest = PathBuf::from(new_manifest);
    let mut argv = vec![old.tool.clone()];
    argv.extend(args.iter().cloned());
    argv.push("--manifest".into());
    argv.push(new_manifest.to_string_lossy().into_owned());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| CliError::param(format!("recorded arguments: {e}")))?;
    let result = crate::dispatch(cli, argv[1..].to_vec());
    let new = Manifest::read(&new_manifest)?;
    let mut mismatches = Vec::new();
    for o in &old.outputs {
        match new.outputs.iter().find(|n| n.path == o.path) {
            Some(n) if n.sha256 == o.sha256 => {}
            Some(_) => mismatches.push(format!("{} differs", o.path)),
            None => mismatches.push(format!("{} missing", o.path)),
        }
    }
    if new.outputs.len() != old.outputs.len() {
        mismatches.push(format!(
            "{} outputs recorded, {} produced",
            old.outputs.len(),
            new.outputs.len()
        ));
    }
    if mismatches.is_empty() {
        println!("replay: {} outputs byte-identical", old.outputs.len());
        result
    } else {
        for m in &mismatches {
            println!("replay: {m}");
        }
        Err(CliError::Numerical(format!(
            "{} replay mismatches",
            mismatches.len()
        )))
    }
}
