//! `.nseb` snapshot files.
//!
//! Layout: magic `NSEB`, format version (u32 LE), header length (u64 LE), a
//! UTF-8 JSON header, then the three physical velocity components as f64 LE
//! in C order, one component after another.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SnapshotCheck};
use crate::spectral_field::{
    leray_project, to_physical, to_spectral, GridSpec, PhysicalField, SpectralField,
    DEFAULT_DEALIAS_FRACTION,
};

pub const MAGIC: &[u8; 4] = b"NSEB";
pub const VERSION: u32 = 1;

/// Divergence above which a loaded field triggers a warning before re-projection.
pub const DIVERGENCE_WARN: f64 = 1e-10;

/// Upper bound on the JSON header size; anything larger is treated as corrupt.
const MAX_HEADER_LEN: u64 = 1 << 16;

const PREFIX_LEN: usize = 4 + 4 + 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub n: usize,
    pub nu: f64,
    pub time: f64,
    pub dtype: String,
    pub order: String,
    pub components: usize,
    /// Written only for grids with a non-default dealiasing fraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias_fraction: Option<f64>,
}

impl SnapshotHeader {
    fn for_field(f: &SpectralField) -> Self {
        let frac = f.grid().dealias_fraction();
        SnapshotHeader {
            n: f.grid().n(),
            nu: f.nu(),
            time: f.time(),
            dtype: "f64".into(),
            order: "C".into(),
            components: 3,
            dealias_fraction: (frac != DEFAULT_DEALIAS_FRACTION).then_some(frac),
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::with_dealias(
            self.n,
            self.dealias_fraction.unwrap_or(DEFAULT_DEALIAS_FRACTION),
        )
    }
}

/// A decoded snapshot: header plus the raw physical samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub header: SnapshotHeader,
    pub physical: PhysicalField,
}

impl SnapshotFile {
    pub fn from_field(f: &SpectralField) -> Self {
        SnapshotFile {
            header: SnapshotHeader::for_field(f),
            physical: to_physical(f),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header)?;
        let len = self.physical.grid().len();
        let mut out = Vec::with_capacity(PREFIX_LEN + header.len() + 3 * len * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        for comp in self.physical.values() {
            for v in comp {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let fail = |check, detail: String| Error::Snapshot {
            path: path.to_path_buf(),
            check,
            detail,
        };
        if bytes.len() < PREFIX_LEN {
            return Err(fail(
                SnapshotCheck::Magic,
                format!("file is only {} bytes", bytes.len()),
            ));
        }
        if &bytes[0..4] != MAGIC {
            return Err(fail(
                SnapshotCheck::Magic,
                format!("found {:?}, expected \"NSEB\"", &bytes[0..4]),
            ));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(fail(
                SnapshotCheck::Version,
                format!("version {version}, expected {VERSION}"),
            ));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        if hlen > MAX_HEADER_LEN || PREFIX_LEN as u64 + hlen > bytes.len() as u64 {
            return Err(fail(
                SnapshotCheck::HeaderLength,
                format!(
                    "header length {hlen} does not fit a {}-byte file",
                    bytes.len()
                ),
            ));
        }
        let body = PREFIX_LEN + hlen as usize;
        let header: SnapshotHeader = serde_json::from_slice(&bytes[PREFIX_LEN..body])
            .map_err(|e| fail(SnapshotCheck::Header, e.to_string()))?;
        if header.dtype != "f64" || header.order != "C" || header.components != 3 {
            return Err(fail(
                SnapshotCheck::Header,
                format!(
                    "unsupported layout dtype={} order={} components={}",
                    header.dtype, header.order, header.components
                ),
            ));
        }
        let grid = header
            .grid()
            .map_err(|e| fail(SnapshotCheck::Header, e.to_string()))?;
        let expected = 3 * grid.len() * 8;
        let payload = &bytes[body..];
        if payload.len() != expected {
            return Err(fail(
                SnapshotCheck::PayloadSize,
                format!(
                    "payload is {} bytes, n = {} needs {expected}",
                    payload.len(),
                    grid.n()
                ),
            ));
        }
        let mut values: [Vec<f64>; 3] = Default::default();
        for (c, chunk) in payload.chunks_exact(grid.len() * 8).enumerate() {
            values[c] = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
        }
        let physical = PhysicalField::from_values(grid, values)
            .map_err(|e| fail(SnapshotCheck::Values, e.to_string()))?;
        Ok(SnapshotFile { header, physical })
    }

    /// Spectral field after re-projection; warns if the stored samples were
    /// not divergence-free to [`DIVERGENCE_WARN`].
    pub fn to_field(&self, path: &Path) -> SpectralField {
        let raw = to_spectral(&self.physical);
        let div = scaled_divergence(&raw);
        if div > DIVERGENCE_WARN {
            log::warn!(
                "{}: divergence {div:.3e} exceeds {DIVERGENCE_WARN:e}; re-projecting",
                path.display()
            );
        }
        leray_project(&raw)
            .with_time(self.header.time)
            .with_nu(self.header.nu)
    }
}

/// `max_k |k . u_hat(k)| / (|k| max_k |u_hat(k)|)`, insensitive to round-off
/// modes that are tiny relative to the field.
pub fn scaled_divergence(f: &SpectralField) -> f64 {
    let g = f.grid();
    let n = g.n();
    let kd: Vec<f64> = (0..n).map(|i| g.derivative_wavenumber(i)).collect();
    let mut scale = 0.0f64;
    let mut worst = 0.0f64;
    let mut idx = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v = [
                    f.component(0)[idx],
                    f.component(1)[idx],
                    f.component(2)[idx],
                ];
                let mag = (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt();
                scale = scale.max(mag);
                let k = [kd[a], kd[b], kd[c]];
                let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                if kn > 0.0 {
                    worst = worst.max((v[0] * k[0] + v[1] * k[1] + v[2] * k[2]).norm() / kn);
                }
                idx += 1;
            }
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

pub fn write_snapshot(f: &SpectralField, path: &Path) -> Result<SnapshotFile> {
    let file = SnapshotFile::from_field(f);
    fs::write(path, file.to_bytes()?).map_err(|e| Error::io(path, e))?;
    Ok(file)
}

pub fn read_snapshot_file(path: &Path) -> Result<SnapshotFile> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    SnapshotFile::from_bytes(&bytes, path)
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    Ok(read_snapshot_file(path)?.to_field(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn field() -> SpectralField {
        SpectralField::random_solenoidal(GridSpec::new(16).unwrap(), 3, 1.0, 5.0, 2.0)
            .unwrap()
            .with_time(0.25)
            .with_nu(0.05)
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.nseb");
        let f = field();
        let written = write_snapshot(&f, &path).unwrap();
        let raw = read_snapshot_file(&path).unwrap();
        assert_eq!(raw, written);
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.time(), 0.25);
        assert_eq!(back.nu(), 0.05);
        let scale = f
            .coeffs()
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        for c in 0..3 {
            for (a, b) in f.component(c).iter().zip(back.component(c)) {
                assert!((a - b).norm() <= 1e-15 * scale.max(1.0));
            }
        }
        // Re-encoding the decoded samples reproduces the file byte for byte.
        assert_eq!(raw.to_bytes().unwrap(), std::fs::read(&path).unwrap());
    }

    #[test]
    fn header_layout() {
        let bytes = SnapshotFile::from_field(&field()).to_bytes().unwrap();
        assert_eq!(&bytes[0..4], b"NSEB");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let header: serde_json::Value = serde_json::from_slice(&bytes[16..16 + hlen]).unwrap();
        assert_eq!(header["n"], 16);
        assert_eq!(header["dtype"], "f64");
        assert_eq!(header["order"], "C");
        assert_eq!(header["components"], 3);
        assert!(header.get("dealias_fraction").is_none());
        assert_eq!(bytes.len(), 16 + hlen + 3 * 16usize.pow(3) * 8);
    }

    fn check_of(bytes: &[u8]) -> SnapshotCheck {
        match SnapshotFile::from_bytes(bytes, Path::new("x.nseb")) {
            Err(Error::Snapshot { check, .. }) => check,
            other => panic!("expected snapshot error, got {other:?}"),
        }
    }

    #[test]
    fn corrupt_files_name_the_failed_check() {
        let good = SnapshotFile::from_field(&field()).to_bytes().unwrap();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(check_of(&bad), SnapshotCheck::Magic);
        let mut bad = good.clone();
        bad[4] = 9;
        assert_eq!(check_of(&bad), SnapshotCheck::Version);
        let mut bad = good.clone();
        bad[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert_eq!(check_of(&bad), SnapshotCheck::HeaderLength);
        assert_eq!(
            check_of(&good[..good.len() - 8]),
            SnapshotCheck::PayloadSize
        );
        let mut long = good.clone();
        long.extend_from_slice(&[0; 8]);
        assert_eq!(check_of(&long), SnapshotCheck::PayloadSize);
        assert_eq!(check_of(&good[..10]), SnapshotCheck::Magic);
        let mut bad = good.clone();
        bad[16] = b'[';
        assert_eq!(check_of(&bad), SnapshotCheck::Header);
        let mut nan = good.clone();
        let at = nan.len() - 8;
        nan[at..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert_eq!(check_of(&nan), SnapshotCheck::Values);
    }

    #[test]
    fn hand_built_single_mode_reads_back() {
        // Independent encoder: (0, sin x1, 0) sampled directly.
        let n = 8usize;
        let header = br#"{"n":8,"nu":0.1,"time":0.0,"dtype":"f64","order":"C","components":3}"#;
        let mut bytes = b"NSEB".to_vec();
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&(header.len() as u64).to_le_bytes());
        bytes.extend_from_slice(header);
        for c in 0..3 {
            for i0 in 0..n {
                for _ in 0..n * n {
                    let x = 2.0 * std::f64::consts::PI * i0 as f64 / n as f64;
                    let v: f64 = if c == 1 { x.sin() } else { 0.0 };
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        let f = SnapshotFile::from_bytes(&bytes, Path::new("gen.nseb"))
            .unwrap()
            .to_field(Path::new("gen.nseb"));
        let c = f.coeff(1, [1, 0, 0]);
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        let total: f64 = f.coeffs().iter().flatten().map(|v| v.norm_sqr()).sum();
        assert!((total - 0.5).abs() < 1e-14);
    }
}
