use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use baire_core::conditions::{builtin, ConditionSet, SharedCs, TableSet};
use baire_core::smallness::{is_b_nowhere_dense, BPerfectTree, NdBudget, NdMode, Witness};
use baire_core::tree::RegularTree;

use crate::fail::{Fail, Outcome};

pub fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Fail::io(path, e))
}

pub fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Fail::io(path, e))
}

pub fn tree(path: &Path) -> Outcome<RegularTree> {
    RegularTree::parse(&read(path)?).map_err(Fail::in_file(path))
}

pub fn bperfect(path: &Path) -> Outcome<BPerfectTree> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| Fail::Input(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
}

/// `ex61`, `ex63`, `ex62` (alphabet from `letter_cap`), `ex62:<k>`, or a path to a table JSON.
pub fn condition_set(sel: &str, letter_cap: u32) -> Outcome<SharedCs> {
    if let Some(k) = sel.strip_prefix("ex62:") {
        let k: u32 = k.parse().map_err(|_| Fail::Input(format!("`{k}` is not an alphabet size")))?;
        return Ok(builtin("ex62", k)?);
    }
    if matches!(sel, "ex61" | "ex62" | "ex63") {
        return Ok(builtin(sel, letter_cap)?);
    }
    let path = Path::new(sel);
    if !path.exists() {
        return Err(Fail::Input(format!("unknown condition set `{sel}`")));
    }
    let t = TableSet::from_json(&read(path)?).map_err(Fail::in_file(path))?;
    Ok(Arc::new(t))
}

/// Pieces `piece_<i>.tree` in index order, with `witnesses.json` if present.
pub struct CoverDir {
    pub pieces: Vec<RegularTree>,
    pub witnesses: Option<Vec<Witness>>,
}

pub fn cover_dir(dir: &Path) -> Outcome<CoverDir> {
    let entries = fs::read_dir(dir).map_err(|e| Fail::io(dir, e))?;
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Fail::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if let Some(i) = name.strip_prefix("piece_").and_then(|r| r.strip_suffix(".tree")) {
            if let Ok(i) = i.parse() {
                found.push((i, path));
            }
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(Fail::Input(format!("{}: no piece_<i>.tree files", dir.display())));
    }
    let pieces = found.iter().map(|(_, p)| tree(p)).collect::<Outcome<Vec<_>>>()?;
    let wpath = dir.join("witnesses.json");
    let witnesses = if wpath.exists() {
        let text = read(&wpath)?;
        Some(serde_json::from_str(&text).map_err(|e| Fail::Input(format!("{}: {e}", wpath.display())))?)
    } else {
        None
    };
    Ok(CoverDir { pieces, witnesses })
}

/// Witnesses for each piece, computed when the directory has none.
pub fn cover_witnesses(cover: &CoverDir, cs: &dyn ConditionSet, nd: NdBudget) -> Outcome<Vec<Witness>> {
    if let Some(w) = &cover.witnesses {
        return Ok(w.clone());
    }
    let mode = if cs.bounded_only() { NdMode::Bounded(nd) } else { NdMode::Exact };
    cover
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            is_b_nowhere_dense(p, cs, mode)?
                .ok_or_else(|| Fail::Synthesis(format!("piece {i} is not {}-nowhere dense", cs.name())))
        })
        .collect()
}

pub fn bperfect_dot(j: &BPerfectTree) -> String {
    let mut out = String::from("digraph bperfect {\n  rankdir=LR;\n");
    for v in j.reachable() {
        let shape = if v == j.root() {
            "doublecircle"
        } else if j.vertex(v).frontier {
            "box"
        } else {
            "circle"
        };
        out.push_str(&format!("  v{v} [shape={shape}];\n"));
    }
    for v in j.reachable() {
        for (label, c) in j.children(v) {
            out.push_str(&format!("  v{v} -> v{c} [label=\"{}\"];\n", label.comma_list()));
        }
    }
    out.push_str("}\n");
    out
}
