use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use pronscore::ctcl::CtclContainer;
use pronscore::dataprep::{read_manifest, ManifestEntry};
use pronscore::evaluation::EvalItem;

/// Loads every manifest entry as a labelled item. Relative logits paths are
/// resolved against the manifest's directory.
pub fn load(manifest: &Path) -> Result<Vec<EvalItem>> {
    let entries = read_manifest(manifest)?;
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    entries.iter().map(|e| item(&base, e)).collect()
}

fn item(base: &Path, entry: &ManifestEntry) -> Result<EvalItem> {
    let path = resolve(base, &entry.logits_path);
    let container =
        CtclContainer::read_file(&path).with_context(|| format!("utterance {}", entry.id))?;
    let verbatim = entry.verbatim.as_deref().ok_or_else(|| {
        anyhow!(
            "utterance {}: manifest entry has no verbatim transcript",
            entry.id
        )
    })?;
    Ok(EvalItem::from_transcripts(
        &entry.id,
        container.vocab,
        container.logits,
        &entry.target,
        verbatim,
    )?)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}
