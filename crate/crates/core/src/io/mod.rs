//! Interchange: ASCII DXF SPLINE records and the JSON model document.

mod dxf;
mod model;

pub use dxf::{export_dxf, import_dxf, read_dxf, write_dxf, DxfImport, DEFAULT_DXF_NAME};
pub use model::{decode_model, encode_model, Entity, EntityValue, ModelDocument, Units, FORMAT_VERSION, MEDIA_TYPE};

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Environment variable overriding the scratch directory.
pub const TMP_ENV: &str = "FAIRCURVE_TMP";

/// Scratch directory: `$FAIRCURVE_TMP` when set and non-empty, else the system temp dir.
pub fn scratch_dir() -> PathBuf {
    match std::env::var_os(TMP_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => std::env::temp_dir(),
    }
}

/// Writes through a sibling temporary file and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}
