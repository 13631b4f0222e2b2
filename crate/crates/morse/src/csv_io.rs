//! CSV files: labeled datasets, feature tables and raw sample streams.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use morse_core::features::{extract_features, N_FEATURES};
use morse_core::window::{CHANNEL_NAMES, WINDOW_LEN};
use morse_core::{Dataset, DatasetMeta, GestureLabel, Hand, ImuSample, ImuWindow, LabeledWindow};

use crate::{Error, Result};

const META_COLUMNS: [&str; 3] = ["subject", "hand", "label"];

/// `subject,hand,label,ax000,...,gz249`.
pub fn dataset_header() -> Vec<String> {
    let mut h: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    for ch in CHANNEL_NAMES {
        h.extend((0..WINDOW_LEN).map(|i| format!("{ch}{i:03}")));
    }
    h
}

/// `subject,hand,label,f00,...,f41`.
pub fn features_header() -> Vec<String> {
    let mut h: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend((0..N_FEATURES).map(|i| format!("f{i:02}")));
    h
}

pub const SAMPLES_HEADER: [&str; 7] = ["t_ms", "ax", "ay", "az", "gx", "gy", "gz"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn meta_fields(s: &LabeledWindow) -> [String; 3] {
    [s.subject_id.to_string(), s.hand.tag().to_string(), s.label.short().to_string()]
}

pub fn write_dataset<W: Write>(out: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(dataset_header())?;
    let mut row: Vec<String> = Vec::with_capacity(3 + 1500);
    for s in &dataset.samples {
        row.clear();
        row.extend(meta_fields(s));
        row.extend(s.window.as_slice().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    write_dataset(create(path)?, dataset)
}

fn check_header(found: &csv::StringRecord, expected: &[String]) -> Result<()> {
    if found.len() != expected.len() {
        return Err(Error::SchemaMismatch(format!("header has {} columns, expected {}", found.len(), expected.len())));
    }
    if let Some((i, (f, e))) = found.iter().zip(expected).enumerate().find(|(_, (f, e))| f != e) {
        return Err(Error::SchemaMismatch(format!("column {} is {f:?}, expected {e:?}", i + 1)));
    }
    Ok(())
}

fn parse_meta(rec: &csv::StringRecord, line: u64) -> Result<(u32, Hand, GestureLabel)> {
    let bad = |msg: String| Error::Parse { line, msg };
    let subject: u32 = rec[0].parse().map_err(|_| bad(format!("bad subject id {:?}", &rec[0])))?;
    let hand = Hand::from_tag(&rec[1]).ok_or_else(|| bad(format!("bad hand {:?}", &rec[1])))?;
    let label: GestureLabel = rec[2].parse().map_err(|_| bad(format!("bad label {:?}", &rec[2])))?;
    Ok((subject, hand, label))
}

fn parse_f64(field: &str, line: u64, col: usize) -> Result<f64> {
    field.parse().map_err(|_| Error::Parse { line, msg: format!("column {}: bad number {field:?}", col + 1) })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).from_reader(input)
}

/// Reads header then rows; the first line must be present.
fn records<R: Read>(input: R, expected: &[String]) -> Result<impl Iterator<Item = Result<(u64, csv::StringRecord)>>> {
    let mut r = reader(input);
    let mut it = r.records();
    let header = match it.next() {
        Some(h) => h?,
        None => return Err(Error::Parse { line: 1, msg: "empty file, missing header".into() }),
    };
    check_header(&header, expected)?;
    drop(it);
    Ok(r.into_records().map(|rec| {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        Ok((line, rec))
    }))
}

pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let header = dataset_header();
    let mut samples = Vec::new();
    for item in records(input, &header)? {
        let (line, rec) = item?;
        let (subject_id, hand, label) = parse_meta(&rec, line)?;
        let values =
            rec.iter().enumerate().skip(3).map(|(c, f)| parse_f64(f, line, c)).collect::<Result<Vec<f64>>>()?;
        let window = ImuWindow::from_vec(values).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        samples.push(LabeledWindow { window, label, subject_id, hand });
    }
    if samples.is_empty() {
        return Err(Error::Parse { line: 2, msg: "dataset has no rows".into() });
    }
    Ok(Dataset::new(samples, DatasetMeta::default())?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(open(path)?)
}

/// One row per window: metadata then the 42 statistics of the raw window.
pub fn write_features<W: Write>(out: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(features_header())?;
    for s in &dataset.samples {
        let f = extract_features(&s.window);
        let mut row: Vec<String> = meta_fields(s).into();
        row.extend(f.as_slice().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_features(path: &Path, dataset: &Dataset) -> Result<()> {
    write_features(create(path)?, dataset)
}

/// A labeled feature row as read back from a features CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub subject_id: u32,
    pub hand: Hand,
    pub label: GestureLabel,
    pub features: Vec<f64>,
}

pub fn read_features<R: Read>(input: R) -> Result<Vec<FeatureRow>> {
    let header = features_header();
    let mut out = Vec::new();
    for item in records(input, &header)? {
        let (line, rec) = item?;
        let (subject_id, hand, label) = parse_meta(&rec, line)?;
        let features =
            rec.iter().enumerate().skip(3).map(|(c, f)| parse_f64(f, line, c)).collect::<Result<Vec<f64>>>()?;
        out.push(FeatureRow { subject_id, hand, label, features });
    }
    Ok(out)
}

pub fn write_samples<W: Write>(out: W, samples: &[ImuSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLES_HEADER)?;
    for s in samples {
        let mut row = vec![s.t_ms.to_string()];
        row.extend(s.values().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_samples(path: &Path, samples: &[ImuSample]) -> Result<()> {
    write_samples(create(path)?, samples)
}

/// Reads a `t_ms,ax,ay,az,gx,gy,gz` stream.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<ImuSample>> {
    let header: Vec<String> = SAMPLES_HEADER.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for item in records(input, &header)? {
        let (line, rec) = item?;
        let t_ms = rec[0].parse().map_err(|_| Error::Parse { line, msg: format!("bad timestamp {:?}", &rec[0]) })?;
        let mut v = [0.0; 6];
        for (c, slot) in v.iter_mut().enumerate() {
            *slot = parse_f64(&rec[c + 1], line, c + 1)?;
            if !slot.is_finite() {
                return Err(Error::Parse { line, msg: format!("column {}: non-finite value", c + 2) });
            }
        }
        out.push(ImuSample::new(t_ms, v));
    }
    Ok(out)
}

pub fn load_samples(path: &Path) -> Result<Vec<ImuSample>> {
    read_samples(open(path)?)
}

/// Lays a window out as a 20 ms sample stream starting at `t0_ms`.
pub fn window_to_samples(window: &ImuWindow, t0_ms: u64) -> Vec<ImuSample> {
    (0..WINDOW_LEN)
        .map(|i| {
            let v = std::array::from_fn(|c| window.channel(c)[i]);
            ImuSample::new(t0_ms + 20 * i as u64, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use morse_core::synth::{gen_dataset, GenConfig};

    fn small() -> Dataset {
        gen_dataset(&GenConfig { n_subjects: 3, per_class: 1, ..GenConfig::default() }).unwrap()
    }

    #[test]
    fn header_shape() {
        let h = dataset_header();
        assert_eq!(h.len(), 1503);
        assert_eq!(&h[..5], ["subject", "hand", "label", "ax000", "ax001"]);
        assert_eq!(h[3 + 250], "ay000");
        assert_eq!(h.last().unwrap(), "gz249");
        assert_eq!(features_header().last().unwrap(), "f41");
    }

    #[test]
    fn dataset_round_trip_is_bit_exact() {
        let d = small();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let back = read_dataset(&buf[..]).unwrap();
        assert_eq!(back.samples, d.samples);
    }

    #[test]
    fn awkward_values_survive() {
        let mut d = small();
        let w = d.samples[0].window.clone();
        let mut v = w.into_vec();
        v[0] = 0.1 + 0.2;
        v[1] = -0.0;
        v[2] = 1e-300;
        v[3] = f64::MAX;
        v[4] = 5e-324;
        d.samples[0].window = ImuWindow::from_vec(v).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let back = read_dataset(&buf[..]).unwrap();
        let a = back.samples[0].window.as_slice();
        let b = d.samples[0].window.as_slice();
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn wrong_column_count_is_schema_mismatch() {
        let text = "subject,hand,label,ax000\n1,L,F,0.5\n";
        assert!(matches!(read_dataset(text.as_bytes()), Err(Error::SchemaMismatch(_))));
        let d = small();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("1,L,F,0.5\n");
        assert!(matches!(read_dataset(text.as_bytes()), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn empty_file_reports_line() {
        assert!(matches!(read_dataset(&b""[..]), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn bad_cells_report_line() {
        let d = small();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[2] = lines[2].replacen(",R,", ",Q,", 1).replacen(",L,", ",Q,", 1);
        let broken = lines.join("\n");
        assert!(matches!(read_dataset(broken.as_bytes()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn features_and_samples_round_trip() {
        let d = small();
        let mut buf = Vec::new();
        write_features(&mut buf, &d).unwrap();
        let rows = read_features(&buf[..]).unwrap();
        assert_eq!(rows.len(), d.len());
        assert_eq!(rows[0].features, extract_features(&d.samples[0].window).as_slice());
        assert_eq!(rows[0].label, d.samples[0].label);

        let s = window_to_samples(&d.samples[0].window, 1000);
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        assert_eq!(read_samples(&buf[..]).unwrap(), s);
    }
}
