//! File formats: binary snapshots, CSV series, checksummed manifests.
//!
//! Snapshot layout (little-endian): magic `AXWV`, `u32` version 1, `u64` N,
//! `u64` M, `f64` t, 16 reserved zero bytes, then `u1` and `u2` as `f64`
//! in axial-major order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::front::{Distance, FrontProfile};
use crate::grid::Field;
use crate::spectral::SpectrumReport;
use crate::timestepper::DiagnosticRow;

pub const MAGIC: &[u8; 4] = b"AXWV";
pub const VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 48;

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn encode_snapshot(field: &Field, t: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + 16 * field.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(field.n() as u64).to_le_bytes());
    out.extend_from_slice(&(field.m() as u64).to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    out.extend_from_slice(&[0u8; 16]);
    for v in field.u1.iter().chain(&field.u2) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<(Field, f64)> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_BYTES {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    let u64_at = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = u64_at(8) as usize;
    let m = u64_at(16) as usize;
    let t = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let count = n
        .checked_mul(m)
        .and_then(|k| k.checked_mul(2))
        .ok_or_else(|| bad("shape overflows".into()))?;
    let expected = count
        .checked_mul(8)
        .and_then(|k| k.checked_add(HEADER_BYTES))
        .ok_or_else(|| bad("shape overflows".into()))?;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes for {n} x {m}, found {}", bytes.len())));
    }
    let vals: Vec<f64> = bytes[HEADER_BYTES..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (a, b) = vals.split_at(n * m);
    Ok((Field::from_parts(n, m, a.to_vec(), b.to_vec())?, t))
}

pub fn write_snapshot(field: &Field, t: f64, path: &Path) -> Result<()> {
    write_atomic(path, &encode_snapshot(field, t))
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let bytes = fs::read(path)?;
    decode_snapshot(&bytes, path)
}

/// File name used for the snapshot at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:09.3}.bin")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub const DIAGNOSTICS_HEADER: [&str; 6] = ["t", "front_position", "u1_min", "u1_max", "norm_h21", "c_frozen"];

pub fn write_diagnostics(rows: &[DiagnosticRow], path: &Path) -> Result<()> {
    let bytes = csv_bytes(
        &DIAGNOSTICS_HEADER,
        rows.iter().map(|r| {
            vec![
                format!("{:.6}", r.t),
                opt(r.front_position),
                format!("{:.12e}", r.u1_min),
                format!("{:.12e}", r.u1_max),
                format!("{:.12e}", r.norm_h21),
                opt(r.c_frozen),
            ]
        }),
    )?;
    write_atomic(path, &bytes)
}

/// `re,im,mode_n,localized_flag`; the flag is empty when modes were not labelled.
pub fn write_spectrum(report: &SpectrumReport, path: &Path) -> Result<()> {
    let bytes = csv_bytes(
        &["re", "im", "mode_n", "localized_flag"],
        report.eigenvalues.iter().map(|e| {
            vec![
                format!("{:.15e}", e.lambda.re),
                format!("{:.15e}", e.lambda.im),
                report.n_mode.to_string(),
                e.localized.map(|b| (b as u8).to_string()).unwrap_or_default(),
            ]
        }),
    )?;
    write_atomic(path, &bytes)
}

pub fn write_front(front: &FrontProfile, csv_path: &Path, header_path: &Path) -> Result<()> {
    let bytes = csv_bytes(
        &["z", "phi1", "phi2"],
        (0..front.grid.len()).map(|i| {
            vec![
                format!("{:.10}", front.grid.node(i)),
                format!("{:.15e}", front.phi1[i]),
                format!("{:.15e}", front.phi2[i]),
            ]
        }),
    )?;
    write_atomic(csv_path, &bytes)?;
    #[derive(Serialize)]
    struct Header {
        c: f64,
        residual: f64,
        refined: bool,
        freeze_speed: f64,
        newton_iterations: usize,
        n: usize,
        z_min: f64,
        dz: f64,
        params_hash: String,
        front_hash: String,
    }
    let h = Header {
        c: front.c,
        residual: front.residual,
        refined: front.refined,
        freeze_speed: front.freeze_speed,
        newton_iterations: front.newton_iterations,
        n: front.grid.len(),
        z_min: front.grid.first(),
        dz: front.grid.dx(),
        params_hash: front.params.fingerprint(),
        front_hash: front.fingerprint(),
    };
    write_atomic(header_path, toml_string(&h)?.as_bytes())
}

/// Reads a `z,phi1,phi2` CSV back into columns.
pub fn read_front_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let (mut z, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let get = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    reason: format!("bad value in column {k}"),
                })
        };
        z.push(get(0)?);
        a.push(get(1)?);
        b.push(get(2)?);
    }
    Ok((z, a, b))
}

pub fn write_distances(rows: &[(f64, Distance)], path: &Path) -> Result<()> {
    let bytes = csv_bytes(
        &["t", "distance", "h_star", "at_window_edge"],
        rows.iter().map(|(t, d)| {
            vec![
                format!("{t:.6}"),
                format!("{:.12e}", d.distance),
                format!("{:.12e}", d.h_star),
                (d.at_window_edge as u8).to_string(),
            ]
        }),
    )?;
    write_atomic(path, &bytes)
}

/// Two-column `x,rho` table.
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut xs = Vec::new();
    let mut rho = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Format {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        };
        xs.push(parse(&rec[0])?);
        rho.push(parse(&rec[1])?);
    }
    Ok((xs, rho))
}

pub(crate) fn toml_string<T: Serialize>(v: &T) -> Result<String> {
    toml::to_string(v).map_err(|e| Error::Config {
        key: "<serialize>".into(),
        reason: e.to_string(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub code_version: String,
    pub geometry_hash: String,
    pub grid_hash: String,
    pub wall_time_s: f64,
    pub config: String,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub const FILE_NAME: &'static str = "manifest.toml";

    /// Hashes every file in `files` (paths relative to `dir`).
    pub fn build(
        dir: &Path,
        experiment: &str,
        config_echo: String,
        geometry_hash: String,
        grid_hash: String,
        wall_time_s: f64,
        files: &[PathBuf],
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(files.len());
        for f in files {
            let bytes = fs::read(dir.join(f))?;
            entries.push(FileEntry {
                path: f.to_string_lossy().into_owned(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        Ok(Manifest {
            experiment: experiment.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            geometry_hash,
            grid_hash,
            wall_time_s,
            config: config_echo,
            files: entries,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(Self::FILE_NAME);
        write_atomic(&path, toml_string(self)?.as_bytes())?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::FILE_NAME);
        let text = fs::read_to_string(&path)?;
        toml::from_str(&text).map_err(|e| Error::Format {
            path,
            reason: e.to_string(),
        })
    }

    /// Files whose current checksum differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.files {
            match fs::read(dir.join(&e.path)) {
                Ok(b) if sha256_hex(&b) == e.sha256 => {}
                _ => bad.push(e.path.clone()),
            }
        }
        Ok(bad)
    }
}
