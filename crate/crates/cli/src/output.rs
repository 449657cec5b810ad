//! Output-file helpers: every report is written once, atomically
//! (write to a temporary sibling, then rename).

use crate::CmdError;
use std::path::Path;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CmdError::user(format!("{}: {e}", parent.display())))?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| CmdError::user(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CmdError::internal(format!("renaming {}: {e}", path.display())))
}

pub fn write_json_atomic<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CmdError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::internal(format!("serializing report: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
