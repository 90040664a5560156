//! Binary value-table files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "HSPVTBL\0" | version u32 | domain u32 | mode u16 | K u32
//! axes u32, then per axis: len u32, breakpoints f64…
//! M u32 | seed u64 | φ f64 | c_max f64 | actions u32
//! worst profile: K × f64
//! values: (K+1) layers of n f64, row-major over the grid
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use hsp_core::dreamr::{build_move_table, DoubleIntegratorModel, DreamrParams, TableSpec};
use hsp_core::{CostToGoTable, Grid, LocalError, ModeId};
use thiserror::Error;

pub const MAGIC: [u8; 8] = *b"HSPVTBL\0";
pub const VERSION: u32 = 1;
pub const DOMAIN_DREAMR: u32 = 1;

#[derive(Debug, Error)]
pub enum TableIoError {
    #[error("table file i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a value-table file")]
    BadMagic,
    #[error("unsupported table version {0}")]
    BadVersion(u32),
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("table {path} does not match the configuration: {what}")]
    Mismatch { path: PathBuf, what: String },
    #[error("no value table at {0} and preprocessing is disabled")]
    Missing(PathBuf),
    #[error(transparent)]
    Build(#[from] LocalError),
}

/// A table together with the domain it was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct TableFile {
    pub domain: u32,
    pub table: CostToGoTable,
}

fn put_u32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64s(w: &mut impl Write, v: &[f64]) -> io::Result<()> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_table(w: &mut impl Write, domain: u32, t: &CostToGoTable) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    put_u32(w, VERSION)?;
    put_u32(w, domain)?;
    w.write_all(&t.mode.0.to_le_bytes())?;
    put_u32(w, t.horizon)?;
    let axes = t.grid.axes();
    put_u32(w, axes.len() as u32)?;
    for a in axes {
        put_u32(w, a.len() as u32)?;
        put_f64s(w, a)?;
    }
    put_u32(w, t.samples)?;
    w.write_all(&t.seed.to_le_bytes())?;
    put_f64s(w, &[t.phi, t.c_max])?;
    put_u32(w, t.num_actions() as u32)?;
    put_f64s(w, t.worst_profile())?;
    put_f64s(w, t.values())
}

struct In<R>(R);

impl<R: Read> In<R> {
    fn bytes<const N: usize>(&mut self) -> io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u16(&mut self) -> io::Result<u16> {
        self.bytes().map(u16::from_le_bytes)
    }
    fn u32(&mut self) -> io::Result<u32> {
        self.bytes().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> io::Result<u64> {
        self.bytes().map(u64::from_le_bytes)
    }
    fn f64(&mut self) -> io::Result<f64> {
        self.bytes().map(f64::from_le_bytes)
    }
    fn f64s(&mut self, n: usize) -> io::Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

/// Upper bound on any count read from a header, so a corrupt file fails
/// cleanly instead of allocating without limit.
const MAX_COUNT: u32 = 1 << 28;

fn count(v: u32, what: &str) -> Result<usize, TableIoError> {
    if v > MAX_COUNT {
        return Err(TableIoError::Malformed(format!("{what} = {v}")));
    }
    Ok(v as usize)
}

pub fn read_table(r: &mut impl Read) -> Result<TableFile, TableIoError> {
    let mut r = In(r);
    if r.bytes::<8>()? != MAGIC {
        return Err(TableIoError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(TableIoError::BadVersion(version));
    }
    let domain = r.u32()?;
    let mode = ModeId(r.u16()?);
    let horizon = r.u32()?;
    let dims = count(r.u32()?, "axis count")?;
    let mut axes = Vec::with_capacity(dims);
    for _ in 0..dims {
        let n = count(r.u32()?, "axis length")?;
        axes.push(r.f64s(n)?);
    }
    let grid = Grid::new(axes).map_err(|e| TableIoError::Malformed(e.to_string()))?;
    let samples = r.u32()?;
    let seed = r.u64()?;
    let phi = r.f64()?;
    let c_max = r.f64()?;
    let num_actions = r.u32()? as usize;
    let worst = r.f64s(count(horizon, "horizon")?)?;
    let n = (horizon as usize + 1)
        .checked_mul(grid.len())
        .filter(|n| *n <= MAX_COUNT as usize)
        .ok_or_else(|| TableIoError::Malformed("table too large".into()))?;
    let values = r.f64s(n)?;
    if r.0.read(&mut [0u8; 1])? != 0 {
        return Err(TableIoError::Malformed("trailing bytes".into()));
    }
    let table = CostToGoTable::from_parts(mode, grid, horizon, phi, c_max, samples, seed, values, worst, num_actions)?;
    Ok(TableFile { domain, table })
}

pub fn save(path: &Path, domain: u32, t: &CostToGoTable) -> Result<(), TableIoError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    write_table(&mut w, domain, t)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TableFile, TableIoError> {
    read_table(&mut BufReader::new(File::open(path)?))
}

/// 64-bit FNV-1a.
fn fnv(bytes: impl IntoIterator<Item = u8>, mut h: u64) -> u64 {
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// File name keyed by domain, mode, grid and model parameters, `K`, `M` and
/// seed, so a change to any of them selects a different file.
pub fn table_file_name(params: &DreamrParams, spec: &TableSpec) -> String {
    let model = serde_json::to_string(params).expect("params serialize");
    let grid = serde_json::to_string(&spec.grid).expect("grid serializes");
    let h = fnv(model.bytes().chain(grid.bytes()), 0xcbf2_9ce4_8422_2325);
    format!("dreamr-move-{h:016x}-K{}-M{}-s{}.hsptbl", spec.horizon, spec.samples, spec.seed)
}

/// Loads the Move table for `params`/`spec` from `dir`, building and saving
/// it first when missing and `auto` is set.
pub fn load_or_build(
    dir: &Path,
    params: &DreamrParams,
    spec: &TableSpec,
    auto: bool,
) -> Result<(DoubleIntegratorModel, CostToGoTable, PathBuf), TableIoError> {
    let path = dir.join(table_file_name(params, spec));
    let model = DoubleIntegratorModel::new(params.clone(), spec.samples, spec.seed);
    if path.exists() {
        let f = load(&path)?;
        let t = &f.table;
        let expect = hsp_core::dreamr::local::move_grid(params, &spec.grid)?;
        let mismatch = if f.domain != DOMAIN_DREAMR {
            Some(format!("domain {}", f.domain))
        } else if t.horizon != spec.horizon || t.samples != spec.samples || t.seed != spec.seed {
            Some(format!("K={} M={} seed={}", t.horizon, t.samples, t.seed))
        } else if t.grid != expect {
            Some("grid axes".to_string())
        } else {
            None
        };
        if let Some(what) = mismatch {
            return Err(TableIoError::Mismatch { path, what });
        }
        return Ok((model, f.table, path));
    }
    if !auto {
        return Err(TableIoError::Missing(path));
    }
    let (model, table) = build_move_table(params, spec)?;
    save(&path, DOMAIN_DREAMR, &table)?;
    Ok((model, table, path))
}
