//! Trace CSVs and episode-wide direction-of-risk heatmaps.
//!
//! A heatmap has one pixel column per timestep and `vscale` pixel rows per
//! feature. Each column's `g` is divided by its largest absolute entry, then
//! `v ∈ [-1, 1]` maps linearly from white to blue (`v > 0`) or red
//! (`v < 0`). Columns without a direction, and all-zero columns, are white.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::explain::{Distance, EpisodeTrace, TraceStep};

/// Divides by the largest absolute value; all-zero input stays zero.
pub fn normalize_column(g: &[f64]) -> Vec<f64> {
    let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return vec![0.0; g.len()];
    }
    g.iter().map(|v| v / max).collect()
}

fn channel(v: f64) -> u8 {
    (255.0 * (1.0 - v.abs().min(1.0))).round() as u8
}

/// `+1` is pure blue, `-1` pure red, `0` white.
pub fn color(v: f64) -> [u8; 3] {
    let fade = channel(v);
    if v >= 0.0 {
        [fade, fade, 255]
    } else {
        [255, fade, fade]
    }
}

/// Inverse of [`color`] up to quantization.
pub fn value_of(rgb: [u8; 3]) -> f64 {
    match rgb {
        [255, g, b] if b == g && b != 255 => -(1.0 - g as f64 / 255.0),
        [r, _, 255] => 1.0 - r as f64 / 255.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ppm {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[u8; 3]>,
}

impl Ppm {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// Binary `P6` encoding with maxval 255.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Ppm> {
        let mut pos = 0;
        let mut token = || -> Result<String> {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::InvalidImage("truncated header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };
        if token()? != "P6" {
            return Err(Error::InvalidImage("not a binary PPM".into()));
        }
        let mut number = |what: &str| -> Result<usize> {
            token()?
                .parse()
                .map_err(|_| Error::InvalidImage(format!("bad {what}")))
        };
        let width = number("width")?;
        let height = number("height")?;
        if number("maxval")? != 255 {
            return Err(Error::InvalidImage("maxval must be 255".into()));
        }
        // exactly one whitespace byte separates the header from the raster
        let data = &bytes[pos + 1..];
        if data.len() != width * height * 3 {
            return Err(Error::InvalidImage(format!(
                "expected {} raster bytes, found {}",
                width * height * 3,
                data.len()
            )));
        }
        let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Ppm {
            width,
            height,
            pixels,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Ppm> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Ppm::parse(&bytes)
    }
}

/// Renders the trace's `g` columns. Features named in `exclude` are dropped
/// before per-column normalization.
pub fn render_heatmap(trace: &EpisodeTrace, vscale: usize, exclude: &[String]) -> Result<Ppm> {
    if trace.is_empty() {
        return Err(Error::InvalidTrace("trace has no timesteps".into()));
    }
    if vscale == 0 {
        return Err(Error::InvalidTrace("vertical scale must be positive".into()));
    }
    if let Some(unknown) = exclude.iter().find(|f| !trace.features.contains(f)) {
        return Err(Error::InvalidTrace(format!("unknown feature '{unknown}'")));
    }
    let keep: Vec<usize> = (0..trace.features.len())
        .filter(|&d| !exclude.contains(&trace.features[d]))
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidTrace("every feature is excluded".into()));
    }
    let width = trace.len();
    let height = keep.len() * vscale;
    let mut pixels = vec![[255u8; 3]; width * height];
    for (x, step) in trace.steps.iter().enumerate() {
        let Some(g) = &step.g else { continue };
        if g.len() != trace.features.len() {
            return Err(Error::InvalidTrace(format!(
                "step {x} has {} weights for {} features",
                g.len(),
                trace.features.len()
            )));
        }
        let column: Vec<f64> = keep.iter().map(|&d| g[d]).collect();
        for (row, v) in normalize_column(&column).into_iter().enumerate() {
            let rgb = color(v);
            for dy in 0..vscale {
                pixels[(row * vscale + dy) * width + x] = rgb;
            }
        }
    }
    Ok(Ppm {
        width,
        height,
        pixels,
    })
}

/// Header: `step,distance_to_risk,capped,g_<feature>...`. Capped distances
/// are written as the cap. Steps without a direction leave the `g` cells
/// empty.
pub fn write_trace_csv(trace: &EpisodeTrace, writer: impl Write) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::InvalidTrace("trace has no timesteps".into()));
    }
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec![
        "step".to_string(),
        "distance_to_risk".to_string(),
        "capped".to_string(),
    ];
    header.extend(trace.features.iter().map(|f| format!("g_{f}")));
    csv.write_record(&header)?;
    for (i, step) in trace.steps.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            step.distance.capped_value(trace.cap).to_string(),
            step.distance.is_capped().to_string(),
        ];
        match &step.g {
            Some(g) => row.extend(g.iter().map(f64::to_string)),
            None => row.extend(std::iter::repeat_n(String::new(), trace.features.len())),
        }
        csv.write_record(&row)?;
    }
    csv.flush().map_err(|e| Error::io("<trace writer>", e))?;
    Ok(())
}

pub fn save_trace_csv(trace: &EpisodeTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(trace, std::io::BufWriter::new(file))
}

/// Parses a trace CSV. The cap is taken from capped rows when present,
/// otherwise it is the largest distance seen.
pub fn read_trace_csv(reader: impl Read) -> Result<EpisodeTrace> {
    let mut csv = csv::Reader::from_reader(reader);
    let header = csv.headers()?.clone();
    let fixed = ["step", "distance_to_risk", "capped"];
    if header.len() < fixed.len() || header.iter().zip(fixed).any(|(h, f)| h != f) {
        return Err(Error::InvalidTrace(
            "header must start with step,distance_to_risk,capped".into(),
        ));
    }
    let features = header
        .iter()
        .skip(fixed.len())
        .map(|h| {
            h.strip_prefix("g_")
                .map(str::to_string)
                .ok_or_else(|| Error::InvalidTrace(format!("unexpected column '{h}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    let bad = |row: usize, what: &str| Error::InvalidTrace(format!("row {row}: bad {what}"));
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let distance: u32 = record[1].parse().map_err(|_| bad(i, "distance"))?;
        let capped: bool = record[2].parse().map_err(|_| bad(i, "capped flag"))?;
        let cells: Vec<&str> = record.iter().skip(fixed.len()).collect();
        let g = if cells.iter().all(|c| c.is_empty()) {
            None
        } else {
            Some(
                cells
                    .iter()
                    .map(|c| c.parse::<f64>().map_err(|_| bad(i, "weight")))
                    .collect::<Result<Vec<_>>>()?,
            )
        };
        rows.push((distance, capped, g));
    }
    let cap = rows
        .iter()
        .find(|r| r.1)
        .map(|r| r.0)
        .unwrap_or_else(|| rows.iter().map(|r| r.0).max().unwrap_or(0));
    let steps = rows
        .into_iter()
        .map(|(d, capped, g)| TraceStep {
            distance: if capped {
                Distance::CapExceeded
            } else {
                Distance::Hops(d)
            },
            g,
        })
        .collect();
    Ok(EpisodeTrace {
        features,
        cap,
        steps,
    })
}

pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<EpisodeTrace> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace_csv(file)
}
