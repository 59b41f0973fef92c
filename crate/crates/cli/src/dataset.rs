//! Line-delimited JSON datasets.
//!
//! The first line is a header object describing the record schema; every
//! following line holds one record.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use visuomotor_core::datagen::{ArmSample, EyeHandTriplet, GazeSample};

use crate::{sha256_hex, FormatError};

pub const SCHEMA: &str = "visuomotor-dataset/1";

pub trait Record: Serialize + DeserializeOwned {
    const KIND: &'static str;
    /// Field name and description, in record order.
    const FIELDS: &'static [(&'static str, &'static str)];
}

impl Record for GazeSample {
    const KIND: &'static str = "gaze";
    const FIELDS: &'static [(&'static str, &'static str)] = &[
        ("centroid", "[u, v] image centroid, px"),
        ("inverse_delta", "[yaw, pitch] head delta that re-centres, deg"),
    ];
}

impl Record for ArmSample {
    const KIND: &'static str = "arm";
    const FIELDS: &'static [(&'static str, &'static str)] = &[
        ("position", "[x, y, z] hand position in the torso frame, cm"),
        ("angles", "[j0, j1, j2, j3] arm joint angles, deg"),
    ];
}

impl Record for EyeHandTriplet {
    const KIND: &'static str = "eyehand";
    const FIELDS: &'static [(&'static str, &'static str)] = &[
        ("position", "[x, y, z] hand position in the torso frame, cm"),
        ("arm", "[j0, j1, j2, j3] arm joint angles, deg"),
        ("head", "[yaw, pitch] absolute head pose centring the ball, deg"),
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub schema: String,
    pub kind: String,
    pub fields: BTreeMap<String, String>,
    pub count: usize,
    pub seed: u64,
    /// Babbling iterations requested; augmentation and discards change the count.
    pub iterations: usize,
}

impl DatasetHeader {
    pub fn new<T: Record>(count: usize, seed: u64, iterations: usize) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            kind: T::KIND.to_string(),
            fields: T::FIELDS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            count,
            seed,
            iterations,
        }
    }
}

pub fn to_bytes<T: Record>(records: &[T], seed: u64, iterations: usize) -> Result<Vec<u8>, FormatError> {
    let mut out = Vec::new();
    serde_json::to_writer(&mut out, &DatasetHeader::new::<T>(records.len(), seed, iterations))?;
    out.push(b'\n');
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Writes the dataset and returns the SHA-256 of the file.
pub fn write_dataset<T: Record>(path: &Path, records: &[T], seed: u64, iterations: usize) -> Result<String, FormatError> {
    let bytes = to_bytes(records, seed, iterations)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(sha256_hex(&bytes))
}

pub fn read_dataset<T: Record>(path: &Path) -> Result<(DatasetHeader, Vec<T>), FormatError> {
    let mut lines = BufReader::new(fs::File::open(path)?).lines();
    let first = lines.next().ok_or(FormatError::Corrupt("dataset has no header"))??;
    let header: DatasetHeader = serde_json::from_str(&first)?;
    if header.schema != SCHEMA {
        return Err(FormatError::Schema(header.schema));
    }
    if header.kind != T::KIND {
        return Err(FormatError::Kind { expected: T::KIND, found: header.kind });
    }
    let mut records = Vec::with_capacity(header.count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    if records.len() != header.count {
        return Err(FormatError::Corrupt("record count differs from header"));
    }
    Ok((header, records))
}
