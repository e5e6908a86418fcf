//! Shared CSV helpers: lossless float formatting and atomic file writes.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Formats with 17 significant digits, enough to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes via a temp file in the same directory, then renames into place.
pub fn atomic_write<P: AsRef<Path>>(path: P, contents: &str) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
