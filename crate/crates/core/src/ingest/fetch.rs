use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Downloads `url` to `dest` and checks its SHA-256.
///
/// An existing `dest` with the expected digest is returned without touching
/// the network. On a digest mismatch the downloaded file is removed.
pub fn fetch_dataset(url: &str, sha256: &str, dest: &Path) -> Result<PathBuf> {
    let expected = sha256.trim().to_ascii_lowercase();
    if dest.exists() {
        if sha256_file(dest)? == expected {
            return Ok(dest.to_path_buf());
        }
        std::fs::remove_file(dest).map_err(|e| Error::io(dest, e))?;
    }
    if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }

    let response = ureq::get(url)
        .call()
        .map_err(|e| Error::Network(format!("{url}: {e}")))?;
    let mut body = response.into_body().into_reader();
    let partial = dest.with_extension("part");
    let mut out = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = body
            .read(&mut buf)
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        out.write_all(&buf[..n]).map_err(|e| Error::io(&partial, e))?;
    }
    out.flush().map_err(|e| Error::io(&partial, e))?;
    drop(out);

    let actual = hex::encode(hasher.finalize());
    if actual != expected {
        let _ = std::fs::remove_file(&partial);
        return Err(Error::DigestMismatch { expected, actual });
    }
    std::fs::rename(&partial, dest).map_err(|e| Error::io(dest, e))?;
    Ok(dest.to_path_buf())
}
