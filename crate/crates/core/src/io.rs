//! File formats: kernel tables (CSV and JSON), field states (JSON) and
//! probability heatmaps (16-bit binary PGM).

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::coin::Nu;
use crate::error::{Error, Result};
use crate::linalg::spinor_norm_sqr;
use crate::oracle::{CoefficientQuad, Displacement};
use crate::propagator::{Kernel, KernelTable};
use crate::simulator::FieldState;

pub const KERNEL_CSV_HEADER: &str = "t,dx,dy,c00,c01,c10,c11";
pub const NUMERIC_COLUMNS: [&str; 8] = [
    "m11re", "m11im", "m12re", "m12im", "m21re", "m21im", "m22re", "m22im",
];

/// Environment variable naming the kernel cache directory.
pub const CACHE_DIR_ENV: &str = "WEYLWALK_CACHE_DIR";

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn numeric_values(k: &Kernel, nu: Nu) -> [f64; 8] {
    let m = k.matrix(nu).0;
    // adding +0.0 turns -0.0 into 0.0
    [
        m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re,
        m[1][1].im,
    ]
    .map(|v| v + 0.0)
}

/// CSV table; numeric columns are appended when `nu` is given.
pub fn kernel_table_csv(table: &KernelTable, nu: Option<Nu>) -> String {
    let mut out = String::from(KERNEL_CSV_HEADER);
    if nu.is_some() {
        for c in NUMERIC_COLUMNS {
            out.push(',');
            out.push_str(c);
        }
    }
    out.push('\n');
    for k in &table.kernels {
        let d = k.displacement;
        let [c00, c01, c10, c11] = &k.quad.0;
        let _ = write!(out, "{},{},{},{c00},{c01},{c10},{c11}", d.t, d.dx, d.dy);
        if let Some(nu) = nu {
            for v in numeric_values(k, nu) {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

/// Parses a CSV table back into exact quads. Numeric columns are ignored.
pub fn parse_kernel_table_csv(text: &str) -> Result<KernelTable> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedTable("empty input".into()))?;
    if !header.starts_with(KERNEL_CSV_HEADER) {
        return Err(Error::MalformedTable(format!(
            "unexpected header {header:?}"
        )));
    }
    let bad = |line: &str| Error::MalformedTable(format!("bad row {line:?}"));
    let mut kernels = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 7 {
            return Err(bad(line));
        }
        let ints: Vec<i64> = fields[..3]
            .iter()
            .map(|f| f.trim().parse::<i64>().map_err(|_| bad(line)))
            .collect::<Result<_>>()?;
        let mut quad = CoefficientQuad::zero();
        for (slot, f) in quad.0.iter_mut().zip(&fields[3..7]) {
            *slot = f.trim().parse::<BigInt>().map_err(|_| bad(line))?;
        }
        kernels.push(Kernel {
            displacement: Displacement::new(ints[1], ints[2], ints[0]),
            quad,
            outside_cone: false,
        });
    }
    table_from_rows(kernels)
}

fn table_from_rows(mut kernels: Vec<Kernel>) -> Result<KernelTable> {
    let t = kernels
        .first()
        .map(|k| k.displacement.t)
        .ok_or_else(|| Error::MalformedTable("no rows".into()))?;
    if t < 0 {
        return Err(Error::MalformedTable(format!("negative t = {t}")));
    }
    if let Some(k) = kernels
        .iter()
        .find(|k| k.displacement.t != t || !k.displacement.is_admissible())
    {
        return Err(Error::MalformedTable(format!(
            "row {} does not belong to a t = {t} table",
            k.displacement
        )));
    }
    kernels.sort_by_key(|k| (k.displacement.dx, k.displacement.dy));
    if let Some(w) = kernels
        .windows(2)
        .find(|w| w[0].displacement == w[1].displacement)
    {
        return Err(Error::MalformedTable(format!(
            "duplicate row {}",
            w[0].displacement
        )));
    }
    if kernels.len() != Displacement::cone(t as u32).len() {
        return Err(Error::MalformedTable(format!(
            "{} rows, expected {}",
            kernels.len(),
            Displacement::cone(t as u32).len()
        )));
    }
    Ok(KernelTable {
        t: t as u32,
        kernels,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct KernelRow {
    t: i64,
    dx: i64,
    dy: i64,
    c00: String,
    c01: String,
    c10: String,
    c11: String,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    numeric: Option<NumericRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct NumericRow {
    m11re: f64,
    m11im: f64,
    m12re: f64,
    m12im: f64,
    m21re: f64,
    m21im: f64,
    m22re: f64,
    m22im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct KernelTableJson {
    t: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nu_angle: Option<f64>,
    kernels: Vec<KernelRow>,
}

/// JSON mirror of the CSV. Exact integers are written as decimal strings.
pub fn kernel_table_json(table: &KernelTable, nu_angle: Option<f64>) -> Result<String> {
    let nu = nu_angle.map(Nu::from_angle);
    let rows = table
        .kernels
        .iter()
        .map(|k| {
            let [c00, c01, c10, c11] = &k.quad.0;
            let numeric = nu.map(|nu| {
                let v = numeric_values(k, nu);
                NumericRow {
                    m11re: v[0],
                    m11im: v[1],
                    m12re: v[2],
                    m12im: v[3],
                    m21re: v[4],
                    m21im: v[5],
                    m22re: v[6],
                    m22im: v[7],
                }
            });
            KernelRow {
                t: k.displacement.t,
                dx: k.displacement.dx,
                dy: k.displacement.dy,
                c00: c00.to_string(),
                c01: c01.to_string(),
                c10: c10.to_string(),
                c11: c11.to_string(),
                numeric,
            }
        })
        .collect();
    let doc = KernelTableJson {
        t: table.t,
        nu_angle,
        kernels: rows,
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_kernel_table_json(text: &str) -> Result<KernelTable> {
    let doc: KernelTableJson = serde_json::from_str(text)?;
    let kernels = doc
        .kernels
        .into_iter()
        .map(|r| {
            let parse = |s: &str| {
                s.parse::<BigInt>()
                    .map_err(|_| Error::MalformedTable(format!("bad integer {s:?}")))
            };
            Ok(Kernel {
                displacement: Displacement::new(r.dx, r.dy, r.t),
                quad: CoefficientQuad([
                    parse(&r.c00)?,
                    parse(&r.c01)?,
                    parse(&r.c10)?,
                    parse(&r.c11)?,
                ]),
                outside_cone: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = table_from_rows(kernels)?;
    if table.t != doc.t {
        return Err(Error::MalformedTable(format!(
            "header t = {} but rows have t = {}",
            doc.t, table.t
        )));
    }
    Ok(table)
}

/// On-disk cache of exact kernel tables, one CSV per `t`.
#[derive(Clone, Debug)]
pub struct KernelCache {
    dir: PathBuf,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        KernelCache { dir: dir.into() }
    }

    /// Cache rooted at `$WEYLWALK_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(KernelCache::new)
    }

    pub fn path_for(&self, t: u32) -> PathBuf {
        self.dir.join(format!("kernel-t{t}.csv"))
    }

    /// Cached table for `t`; unreadable or inconsistent entries count as misses.
    pub fn load(&self, t: u32) -> Option<KernelTable> {
        let text = fs::read_to_string(self.path_for(t)).ok()?;
        parse_kernel_table_csv(&text)
            .ok()
            .filter(|table| table.t == t)
    }

    pub fn store(&self, table: &KernelTable) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        write_atomic(
            &self.path_for(table.t),
            kernel_table_csv(table, None).as_bytes(),
        )
    }

    pub fn get_or_build(&self, t: u32) -> Result<KernelTable> {
        if let Some(table) = self.load(t) {
            return Ok(table);
        }
        let table = crate::propagator::kernel_table(t)?;
        self.store(&table)?;
        Ok(table)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub width: usize,
    pub height: usize,
    pub offset: [i64; 2],
    pub nu_angle: f64,
    /// Row-major `[re1, im1, re2, im2]` per site.
    pub psi: Vec<[f64; 4]>,
}

impl StateFile {
    pub fn from_state(state: &FieldState, nu_angle: f64) -> Self {
        StateFile {
            width: state.width(),
            height: state.height(),
            offset: [state.offset().0, state.offset().1],
            nu_angle,
            psi: state
                .amplitudes()
                .iter()
                .map(|v| [v[0].re, v[0].im, v[1].re, v[1].im])
                .collect(),
        }
    }

    pub fn to_state(&self) -> Result<FieldState> {
        if !self.nu_angle.is_finite() {
            return Err(Error::InvalidState("nu_angle must be finite".into()));
        }
        let psi = self
            .psi
            .iter()
            .map(|v| {
                [
                    num_complex::Complex64::new(v[0], v[1]),
                    num_complex::Complex64::new(v[2], v[3]),
                ]
            })
            .collect();
        FieldState::from_amplitudes(
            self.width,
            self.height,
            (self.offset[0], self.offset[1]),
            psi,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Binary 16-bit PGM of `|ψ|²`, scaled so the brightest site is 65535.
/// The first image row is the highest `y`.
pub fn probability_pgm(state: &FieldState) -> Vec<u8> {
    let (w, h) = (state.width(), state.height());
    let probs: Vec<f64> = state.amplitudes().iter().map(spinor_norm_sqr).collect();
    let max = probs.iter().cloned().fold(0.0f64, f64::max);
    let mut out = format!("P5\n{w} {h}\n65535\n").into_bytes();
    out.reserve(2 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            let p = probs[row * w + col];
            let v = if max > 0.0 {
                (p / max * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}
