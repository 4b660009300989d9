//! `.srk` raster files and PNG export.
//!
//! A raster file is one line of JSON text ([`RasterHeader`]), a newline, and
//! a payload of little-endian `f64` values in row-major order. Sinogram axes
//! and image extents live in the header; the payload holds only values
//! (for operators: row pointers, column indices and weights, all as `f64`).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GeometryId, Image, ImageSpec, Sinogram};
use crate::projector::SparseOperator;

pub const FORMAT_TAG: &str = "srk";
pub const FORMAT_VERSION: u32 = 1;
pub const DTYPE: &str = "f64le";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RasterKind {
    Image,
    Sinogram,
    Operator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterHeader {
    pub format: String,
    pub version: u32,
    pub dtype: String,
    pub kind: RasterKind,
    /// Product equals the payload length in values.
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extents: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Vec<f64>>,
    /// Operator dimensions `[rows, cols, nnz]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<[usize; 3]>,
}

impl RasterHeader {
    fn new(kind: RasterKind, shape: Vec<usize>) -> Self {
        Self {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            dtype: DTYPE.into(),
            kind,
            shape,
            extents: None,
            geometry: None,
            axis1: None,
            axis2: None,
            operator: None,
        }
    }

    pub fn payload_len(&self) -> usize {
        self.shape.iter().product()
    }
}

/// Any object stored in a raster file.
#[derive(Clone, Debug, PartialEq)]
pub enum Raster {
    Image(Image),
    Sinogram(Sinogram),
    Operator(SparseOperator),
}

impl From<Image> for Raster {
    fn from(v: Image) -> Self {
        Raster::Image(v)
    }
}

impl From<Sinogram> for Raster {
    fn from(v: Sinogram) -> Self {
        Raster::Sinogram(v)
    }
}

impl From<SparseOperator> for Raster {
    fn from(v: SparseOperator) -> Self {
        Raster::Operator(v)
    }
}

impl Raster {
    fn kind_name(&self) -> &'static str {
        match self {
            Raster::Image(_) => "image",
            Raster::Sinogram(_) => "sinogram",
            Raster::Operator(_) => "operator",
        }
    }

    pub fn into_image(self) -> Result<Image> {
        match self {
            Raster::Image(img) => Ok(img),
            other => Err(Error::KindMismatch {
                expected: "image",
                found: other.kind_name().into(),
            }),
        }
    }

    pub fn into_sinogram(self) -> Result<Sinogram> {
        match self {
            Raster::Sinogram(s) => Ok(s),
            other => Err(Error::KindMismatch {
                expected: "sinogram",
                found: other.kind_name().into(),
            }),
        }
    }

    pub fn into_operator(self) -> Result<SparseOperator> {
        match self {
            Raster::Operator(op) => Ok(op),
            other => Err(Error::KindMismatch {
                expected: "operator",
                found: other.kind_name().into(),
            }),
        }
    }
}

/// Header and payload for a raster object.
pub fn encode(raster: &Raster) -> (RasterHeader, Vec<f64>) {
    match raster {
        Raster::Image(img) => {
            let s = img.spec;
            let mut h = RasterHeader::new(RasterKind::Image, vec![s.ny, s.nx]);
            h.extents = Some([s.x_min, s.x_max, s.y_min, s.y_max]);
            (h, img.values.clone())
        }
        Raster::Sinogram(sino) => {
            let mut h = RasterHeader::new(RasterKind::Sinogram, vec![sino.axis1.len(), sino.axis2.len()]);
            h.geometry = Some(sino.geometry);
            h.axis1 = Some(sino.axis1.clone());
            h.axis2 = Some(sino.axis2.clone());
            (h, sino.values.clone())
        }
        Raster::Operator(op) => {
            let (row_ptr, cols, weights) = op.csr();
            let mut payload = Vec::with_capacity(row_ptr.len() + 2 * cols.len());
            payload.extend(row_ptr.iter().map(|&v| v as f64));
            payload.extend(cols.iter().map(|&v| v as f64));
            payload.extend_from_slice(weights);
            let mut h = RasterHeader::new(RasterKind::Operator, vec![payload.len()]);
            h.operator = Some([op.n_rows(), op.n_cols(), cols.len()]);
            (h, payload)
        }
    }
}

pub fn decode(header: &RasterHeader, payload: Vec<f64>) -> Result<Raster> {
    if header.format != FORMAT_TAG {
        return Err(Error::MalformedHeader(format!("unknown format tag {:?}", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(header.version));
    }
    if header.dtype != DTYPE {
        return Err(Error::UnsupportedDtype(header.dtype.clone()));
    }
    if header.payload_len() != payload.len() {
        return Err(Error::PayloadMismatch {
            expected: header.payload_len() * 8,
            found: payload.len() * 8,
        });
    }
    let missing = |what: &str| Error::MalformedHeader(format!("{what} missing"));
    match header.kind {
        RasterKind::Image => {
            let [ny, nx] = header.shape[..] else {
                return Err(Error::MalformedHeader("image shape must be [ny, nx]".into()));
            };
            let e = header.extents.ok_or_else(|| missing("extents"))?;
            let spec = ImageSpec::new(nx, ny, (e[0], e[1]), (e[2], e[3])).map_err(|err| Error::MalformedHeader(err.to_string()))?;
            Ok(Raster::Image(Image::from_values(spec, payload)?))
        }
        RasterKind::Sinogram => {
            let axis1 = header.axis1.clone().ok_or_else(|| missing("axis1"))?;
            let axis2 = header.axis2.clone().ok_or_else(|| missing("axis2"))?;
            if header.shape != [axis1.len(), axis2.len()] {
                return Err(Error::MalformedHeader("sinogram shape disagrees with its axes".into()));
            }
            let geometry = header.geometry.ok_or_else(|| missing("geometry"))?;
            Ok(Raster::Sinogram(Sinogram::from_values(geometry, axis1, axis2, payload)?))
        }
        RasterKind::Operator => {
            let [rows, cols, nnz] = header.operator.ok_or_else(|| missing("operator"))?;
            if payload.len() != rows + 1 + 2 * nnz {
                return Err(Error::PayloadMismatch {
                    expected: (rows + 1 + 2 * nnz) * 8,
                    found: payload.len() * 8,
                });
            }
            let as_index = |v: &f64| *v as usize;
            let row_ptr: Vec<usize> = payload[..=rows].iter().map(as_index).collect();
            let col_idx: Vec<u32> = payload[rows + 1..rows + 1 + nnz].iter().map(|v| *v as u32).collect();
            let weights = payload[rows + 1 + nnz..].to_vec();
            let op =
                SparseOperator::from_csr(rows, cols, row_ptr, col_idx, weights).map_err(|err| Error::MalformedHeader(err.to_string()))?;
            Ok(Raster::Operator(op))
        }
    }
}

pub fn write_raster(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (header, payload) = encode(raster);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let line = serde_json::to_string(&header)?;
    let mut bytes = Vec::with_capacity(line.len() + 1 + payload.len() * 8);
    bytes.extend_from_slice(line.as_bytes());
    bytes.push(b'\n');
    for v in &payload {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    parse_raster(&bytes)
}

pub fn parse_raster(bytes: &[u8]) -> Result<Raster> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("no header line".into()))?;
    let header: RasterHeader = serde_json::from_slice(&bytes[..newline]).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let body = &bytes[newline + 1..];
    if !body.len().is_multiple_of(8) || body.len() / 8 != header.payload_len() {
        // Check version and dtype first so those errors are not masked.
        if header.version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(header.version));
        }
        if header.dtype != DTYPE {
            return Err(Error::UnsupportedDtype(header.dtype));
        }
        return Err(Error::PayloadMismatch {
            expected: header.payload_len() * 8,
            found: body.len(),
        });
    }
    let payload = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    decode(&header, payload)
}

/// Maps values to 8-bit gray levels: clamp to `[lo, hi]`, scale to
/// `[0, 255]`, round half up. A degenerate window maps everything to 0.
pub fn gray_levels(values: &[f64], window: Option<(f64, f64)>) -> Result<Vec<u8>> {
    let (lo, hi) = match window {
        Some((lo, hi)) if !(lo < hi) => {
            return Err(Error::InvalidInput(format!("window ({lo}, {hi}) requires lo < hi")));
        }
        Some(w) => w,
        None => crate::grid::min_max(values),
    };
    if !(hi > lo) {
        return Ok(vec![0; values.len()]);
    }
    Ok(values
        .iter()
        .map(|&v| {
            let t = (v.clamp(lo, hi) - lo) / (hi - lo);
            (t * 255.0 + 0.5).floor().min(255.0) as u8
        })
        .collect())
}

/// Writes an 8-bit grayscale PNG with the top row at `y_max`.
pub fn export_png(img: &Image, path: impl AsRef<Path>, window: Option<(f64, f64)>) -> Result<()> {
    let (nx, ny) = (img.spec.nx, img.spec.ny);
    let gray = gray_levels(&img.values, window)?;
    let mut flipped = Vec::with_capacity(gray.len());
    for j in (0..ny).rev() {
        flipped.extend_from_slice(&gray[j * nx..(j + 1) * nx]);
    }
    write_gray_png(path.as_ref(), nx as u32, ny as u32, &flipped)
}

/// Sinogram rendered with axis1 down the rows.
pub fn export_sinogram_png(sino: &Sinogram, path: impl AsRef<Path>, window: Option<(f64, f64)>) -> Result<()> {
    let (n1, n2) = sino.shape();
    let gray = gray_levels(&sino.values, window)?;
    write_gray_png(path.as_ref(), n2 as u32, n1 as u32, &gray)
}

fn write_gray_png(path: &Path, width: u32, height: u32, data: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(data)?;
    writer.finish()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use proptest::prelude::*;

    fn sample_image() -> Image {
        let spec = ImageSpec::new(3, 2, (-1.0, 1.0), (0.0, 0.5)).unwrap();
        Image::from_fn(spec, |p| p.x * 0.1 + p.y.sqrt())
    }

    fn to_bytes(raster: &Raster) -> Vec<u8> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.srk");
        write_raster(raster, &path).unwrap();
        std::fs::read(path).unwrap()
    }

    #[test]
    fn header_is_one_json_line() {
        let bytes = to_bytes(&sample_image().into());
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header: serde_json::Value = serde_json::from_slice(&bytes[..nl]).unwrap();
        assert_eq!(header["dtype"], "f64le");
        assert_eq!(header["shape"], serde_json::json!([2, 3]));
        assert_eq!(bytes.len() - nl - 1, 6 * 8);
    }

    #[test]
    fn truncated_payload_is_a_shape_error() {
        let mut bytes = to_bytes(&sample_image().into());
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(parse_raster(&bytes), Err(Error::PayloadMismatch { .. })));
    }

    #[test]
    fn f32_dtype_is_rejected() {
        let bytes = to_bytes(&sample_image().into());
        let text = String::from_utf8_lossy(&bytes[..bytes.iter().position(|&b| b == b'\n').unwrap()]).replace("f64le", "f32le");
        let mut patched = text.into_bytes();
        patched.push(b'\n');
        patched.extend_from_slice(&bytes[bytes.iter().position(|&b| b == b'\n').unwrap() + 1..]);
        assert!(matches!(parse_raster(&patched), Err(Error::UnsupportedDtype(d)) if d == "f32le"));
    }

    #[test]
    fn unknown_version_and_garbage_header_are_distinct_errors() {
        let (mut header, payload) = encode(&sample_image().into());
        header.version = 9;
        assert!(matches!(decode(&header, payload), Err(Error::UnsupportedVersion(9))));
        assert!(matches!(parse_raster(b"{not json\n"), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse_raster(b"no newline"), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn sinogram_round_trip_keeps_axes_bit_exact() {
        let axis1 = linspace(0.1, 0.7, 4);
        let axis2 = crate::grid::full_turn(5);
        let values = (0..20).map(|k| (k as f64).sqrt() / 3.0).collect();
        let sino = Sinogram::from_values(GeometryId::ConstantR, axis1, axis2, values).unwrap();
        let back = parse_raster(&to_bytes(&sino.clone().into())).unwrap().into_sinogram().unwrap();
        assert_eq!(back, sino);
    }

    #[test]
    fn png_levels_follow_the_affine_map() {
        assert_eq!(gray_levels(&[-1.0, 0.5, 2.0], Some((0.0, 1.0))).unwrap(), vec![0, 128, 255]);
        assert_eq!(gray_levels(&[4.0, 4.0], None).unwrap(), vec![0, 0]);
        assert!(gray_levels(&[1.0], Some((1.0, 1.0))).is_err());
    }

    #[test]
    fn png_export_writes_requested_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ImageSpec::new(1, 1, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let path = dir.path().join("one.png");
        export_png(&Image::from_values(spec, vec![3.0]).unwrap(), &path, None).unwrap();
        let decoder = png::Decoder::new(File::open(&path).unwrap());
        let reader = decoder.read_info().unwrap();
        assert_eq!((reader.info().width, reader.info().height), (1, 1));
    }

    proptest! {
        #[test]
        fn image_round_trip_is_bit_exact(
            nx in 1usize..6, ny in 1usize..6,
            seed in proptest::collection::vec(any::<f64>(), 36),
        ) {
            let spec = ImageSpec::new(nx, ny, (-2.0, 3.0), (0.5, 0.75)).unwrap();
            let values: Vec<f64> = seed[..nx * ny].to_vec();
            let img = Image::from_values(spec, values).unwrap();
            let (h, p) = encode(&img.clone().into());
            let back = decode(&h, p).unwrap().into_image().unwrap();
            let same = back.values.iter().zip(&img.values).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same);
            prop_assert_eq!(back.spec, img.spec);
        }
    }
}
