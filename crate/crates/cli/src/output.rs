//! Output-file plumbing: fixed-precision numeric formatting and atomic
//! writes (temp file + rename), so an error never leaves partial files.

use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits: round-trips every f64 exactly and keeps files
/// byte-stable across runs.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A fully rendered output file waiting to be committed to disk.
pub struct OutFile {
    pub name: String,
    pub content: String,
}

impl OutFile {
    pub fn csv(name: &str, manifest_line: &str, header: &str, rows: &[String]) -> Self {
        let mut content = String::with_capacity(rows.len() * 32 + 64);
        content.push_str(manifest_line);
        content.push('\n');
        content.push_str(header);
        content.push('\n');
        for row in rows {
            content.push_str(row);
            content.push('\n');
        }
        OutFile {
            name: name.to_string(),
            content,
        }
    }
}

/// Writes every file via a temporary sibling and an atomic rename.
pub fn commit(dir: &Path, files: &[OutFile]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for f in files {
        let tmp = dir.join(format!(".tmp.{}", f.name));
        {
            let mut w = fs::File::create(&tmp)?;
            w.write_all(f.content.as_bytes())?;
            w.sync_all()?;
        }
        fs::rename(&tmp, dir.join(&f.name))?;
    }
    Ok(())
}
