//! Exam-score records of the crossover trial and their line-oriented file
//! format: one JSON object per line with fields
//! `student`, `treatment`, `math`, `exam`, `score`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnovaError, Dataset};

pub const TREATMENT: &str = "treatment";
pub const MATH: &str = "math";
pub const EXAM: &str = "exam";
pub const STUDENT: &str = "student";
pub const N_EXAMS: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Treatment {
    Tutorweb,
    Traditional,
}

impl Treatment {
    pub fn as_str(self) -> &'static str {
        match self {
            Treatment::Tutorweb => "tutorweb",
            Treatment::Traditional => "traditional",
        }
    }

    pub fn other(self) -> Treatment {
        match self {
            Treatment::Tutorweb => Treatment::Traditional,
            Treatment::Traditional => Treatment::Tutorweb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MathBackground {
    Strong,
    Weak,
}

impl MathBackground {
    pub fn as_str(self) -> &'static str {
        match self {
            MathBackground::Strong => "strong",
            MathBackground::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub student: String,
    pub treatment: Treatment,
    pub math: MathBackground,
    pub exam: u8,
    pub score: f64,
}

/// Reference levels: traditional homework, weak background, exam 1.
const TREATMENT_LEVELS: [&str; 2] = ["traditional", "tutorweb"];
const MATH_LEVELS: [&str; 2] = ["weak", "strong"];
const EXAM_LEVELS: [&str; 4] = ["1", "2", "3", "4"];

/// Builds the analysis dataset, checking exam range and uniqueness of
/// (student, exam).
pub fn to_dataset(records: &[TrialRecord]) -> Result<Dataset, AnovaError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !(1..=N_EXAMS).contains(&r.exam) {
            return Err(AnovaError::InvalidRecord(format!("exam {} for student {}", r.exam, r.student)));
        }
        if !r.score.is_finite() {
            return Err(AnovaError::InvalidRecord(format!("non-finite score for student {}", r.student)));
        }
        if !seen.insert((r.student.as_str(), r.exam)) {
            return Err(AnovaError::InvalidRecord(format!(
                "student {} has two records for exam {}",
                r.student, r.exam
            )));
        }
    }
    let mut d = Dataset::new(records.iter().map(|r| r.score).collect());
    let treatments: Vec<&str> = records.iter().map(|r| r.treatment.as_str()).collect();
    let maths: Vec<&str> = records.iter().map(|r| r.math.as_str()).collect();
    let exams: Vec<String> = records.iter().map(|r| r.exam.to_string()).collect();
    let students: Vec<&str> = records.iter().map(|r| r.student.as_str()).collect();
    d.add_factor(TREATMENT, &treatments, &TREATMENT_LEVELS)?;
    d.add_factor(MATH, &maths, &MATH_LEVELS)?;
    d.add_factor(EXAM, &exams, &EXAM_LEVELS)?;
    d.add_factor(STUDENT, &students, &[])?;
    Ok(d)
}

pub fn write_records<W: Write>(out: W, records: &[TrialRecord]) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_records<R: io::Read>(input: R) -> io::Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn save(path: &Path, records: &[TrialRecord]) -> io::Result<()> {
    write_records(File::create(path)?, records)
}

pub fn load(path: &Path) -> io::Result<Vec<TrialRecord>> {
    read_records(File::open(path)?)
}
