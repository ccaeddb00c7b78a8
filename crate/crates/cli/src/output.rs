//! CSV and JSON emission.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn config_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// `# oversmooth <version> command=<cmd> config_sha256=<hash> seed=<seed>`.
pub fn header_comment(command: &str, hash: &str, seed: u64) -> String {
    format!(
        "# oversmooth {} command={command} config_sha256={hash} seed={seed}\r\n",
        env!("CARGO_PKG_VERSION")
    )
}

/// CSV document with a leading comment line.
pub fn csv_document(comment: &str, header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut buf = comment.as_bytes().to_vec();
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn json_document<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Write to `path`, or to stdout when absent.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
