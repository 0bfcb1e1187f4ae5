//! Reading input files (or stdin) and turning them into library objects.

use std::io::Read;

use deltaeq_core::cstar::OperatorSystem;
use deltaeq_core::matcore::{MatSubspace, Tolerance};
use deltaeq_core::ncgraph::{graph_system, Graph};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MAX_AMBIENT: usize = 64;
pub const MAX_VERTICES: usize = 32;

/// Inputs read so far, in order, for the content digest.
pub struct Inputs<'a> {
    stdin: &'a mut dyn Read,
    stdin_text: Option<String>,
    hasher: Sha256,
}

impl<'a> Inputs<'a> {
    pub fn new(stdin: &'a mut dyn Read) -> Self {
        Inputs { stdin, stdin_text: None, hasher: Sha256::new() }
    }

    /// `path`, `-` for stdin, either optionally followed by `#/json/pointer`.
    pub fn text(&mut self, source: &str) -> Result<(String, Option<String>), CliError> {
        let (path, pointer) = match source.split_once('#') {
            Some((p, q)) => (p, Some(q.to_string())),
            None => (source, None),
        };
        let text = if path == "-" {
            if self.stdin_text.is_none() {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s).map_err(|e| CliError::Input(format!("stdin: {e}")))?;
                self.stdin_text = Some(s);
            }
            self.stdin_text.clone().unwrap_or_default()
        } else {
            std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?
        };
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        self.hasher.update(pointer.as_deref().unwrap_or("").as_bytes());
        Ok((text, pointer))
    }

    pub fn json(&mut self, source: &str) -> Result<Value, CliError> {
        let (text, pointer) = self.text(source)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        match pointer {
            None => Ok(v),
            Some(p) => v.pointer(&p).cloned().ok_or_else(|| CliError::Input(format!("{source}: no value at {p}"))),
        }
    }

    pub fn graph(&mut self, source: &str) -> Result<Graph, CliError> {
        let (text, pointer) = self.text(source)?;
        let g = if pointer.is_some() || text.trim_start().starts_with('{') {
            let mut v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
            if let Some(p) = pointer {
                v = v.pointer(&p).cloned().ok_or_else(|| CliError::Input(format!("{source}: no value at {p}")))?;
            }
            serde_json::from_value(v).map_err(|e| CliError::Input(format!("{source}: {e}")))?
        } else {
            text.parse::<Graph>().map_err(|e| CliError::Input(format!("{source}: {e}")))?
        };
        if g.n() > MAX_VERTICES {
            return Err(CliError::Limit(format!("graph on {} vertices exceeds the cap of {MAX_VERTICES}", g.n())));
        }
        Ok(g)
    }

    pub fn digest(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}

fn subspace(v: Value, what: &str, tol: Tolerance) -> Result<MatSubspace, CliError> {
    let s: MatSubspace = serde_json::from_value(v).map_err(|e| CliError::Input(format!("{what}: {e}")))?;
    let (r, c) = s.ambient();
    if r.max(c) > MAX_AMBIENT {
        return Err(CliError::Limit(format!("{what}: ambient {r}x{c} exceeds the cap of {MAX_AMBIENT}")));
    }
    Ok(s.with_tol(tol))
}

/// A subspace given directly or under `key`, possibly inside a certificate's `witness`.
pub fn space_at(v: &Value, key: &str, tol: Tolerance) -> Result<MatSubspace, CliError> {
    if v.get("ambient").is_some() {
        return subspace(v.clone(), key, tol);
    }
    if let Some(inner) = v.get(key) {
        return space_at(inner, key, tol);
    }
    if let Some(w) = v.get("witness") {
        return space_at(w, key, tol);
    }
    Err(CliError::Input(format!("no {key} subspace in input")))
}

/// An operator system given as a subspace, a graph, or under `system`/`witness`.
pub fn system_of(v: &Value, tol: Tolerance) -> Result<OperatorSystem, CliError> {
    if v.get("ambient").is_some() {
        let s = subspace(v.clone(), "system", tol)?;
        return OperatorSystem::new(s).map_err(CliError::from);
    }
    if v.get("vertices").is_some() {
        let g: Graph = serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("graph: {e}")))?;
        if g.n() > MAX_VERTICES {
            return Err(CliError::Limit(format!("graph on {} vertices exceeds the cap of {MAX_VERTICES}", g.n())));
        }
        return Ok(graph_system(&g, tol));
    }
    for key in ["system", "witness"] {
        if let Some(inner) = v.get(key) {
            return system_of(inner, tol);
        }
    }
    Err(CliError::Input("input is neither a subspace nor a graph".into()))
}

/// Limits on anything else that carries an ambient size.
pub fn check_ambient(n: usize, what: &str) -> Result<(), CliError> {
    if n > MAX_AMBIENT {
        return Err(CliError::Limit(format!("{what}: size {n} exceeds the cap of {MAX_AMBIENT}")));
    }
    Ok(())
}
