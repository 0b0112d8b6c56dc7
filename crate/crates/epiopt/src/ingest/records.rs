//! Raw daily record parsing. Headers are matched case-insensitively by
//! name, column order is free, and unknown columns are ignored.

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;

use super::IngestError;

/// One day of raw counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawRecord {
    pub date: NaiveDate,
    pub confirmed: f64,
    pub confirmed_cum: f64,
    pub deaths: f64,
    pub deaths_cum: f64,
    pub tests: f64,
    pub tests_cum: f64,
    pub recovered: f64,
    pub recovered_cum: f64,
    pub hosp: f64,
    pub hosp_cum: f64,
    pub vaccines: f64,
    pub vaccines_cum: f64,
    pub icu: f64,
    pub icu_cum: f64,
}

/// Cumulative first/second dose counts for one day.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoseRecord {
    pub date: NaiveDate,
    pub first_dose_cum: f64,
    pub second_dose_cum: f64,
}

/// Parse outcome: accepted records sorted by date, a count of empty numeric
/// cells read as zero, and line-numbered diagnostics for rejected rows.
#[derive(Clone, Debug, Default)]
pub struct ParsedDataset {
    pub records: Vec<RawRecord>,
    pub missing_cells: usize,
    pub rejected: Vec<String>,
}

const COLUMNS: [&str; 15] = [
    "date",
    "confirmed",
    "confirmed_cum",
    "deaths",
    "deaths_cum",
    "tests",
    "tests_cum",
    "recovered",
    "recovered_cum",
    "hosp",
    "hosp_cum",
    "vaccines",
    "vaccines_cum",
    "icu",
    "icu_cum",
];

fn header_map(headers: &csv::StringRecord) -> Result<HashMap<&'static str, usize>, IngestError> {
    let mut map = HashMap::new();
    for (idx, name) in headers.iter().enumerate() {
        let lower = name.trim().to_ascii_lowercase();
        if let Some(&canon) = COLUMNS.iter().find(|c| **c == lower) {
            map.insert(canon, idx);
        }
    }
    for c in COLUMNS {
        if !map.contains_key(c) {
            return Err(IngestError::MissingColumn(c.to_string()));
        }
    }
    Ok(map)
}

fn numeric_cell(
    row: &csv::StringRecord,
    idx: usize,
    missing: &mut usize,
) -> Result<f64, String> {
    let raw = row.get(idx).unwrap_or("").trim();
    if raw.is_empty() {
        *missing += 1;
        return Ok(0.0);
    }
    raw.parse::<f64>().map_err(|_| format!("unparseable number `{raw}`"))
}

/// Parse a dataset CSV. Rows with an unparseable date or a negative count
/// are rejected with a line-numbered diagnostic; everything else is kept
/// and returned sorted by date.
pub fn parse_dataset<R: std::io::Read>(reader: R) -> Result<ParsedDataset, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let cols = header_map(rdr.headers()?)?;
    let mut out = ParsedDataset::default();
    for (row_idx, row) in rdr.records().enumerate() {
        let row = row?;
        let line = row_idx + 2; // header is line 1
        let date_raw = row.get(cols["date"]).unwrap_or("").trim();
        let date = match NaiveDate::parse_from_str(date_raw, "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                out.rejected.push(format!("line {line}: unparseable date `{date_raw}`"));
                continue;
            }
        };
        let mut values = [0.0f64; 14];
        let mut bad = None;
        for (slot, name) in COLUMNS[1..].iter().enumerate() {
            match numeric_cell(&row, cols[name], &mut out.missing_cells) {
                Ok(v) if v < 0.0 => {
                    bad = Some(format!("line {line}: negative count {v} in `{name}`"));
                    break;
                }
                Ok(v) => values[slot] = v,
                Err(e) => {
                    bad = Some(format!("line {line}: {e} in `{name}`"));
                    break;
                }
            }
        }
        if let Some(diag) = bad {
            out.rejected.push(diag);
            continue;
        }
        out.records.push(RawRecord {
            date,
            confirmed: values[0],
            confirmed_cum: values[1],
            deaths: values[2],
            deaths_cum: values[3],
            tests: values[4],
            tests_cum: values[5],
            recovered: values[6],
            recovered_cum: values[7],
            hosp: values[8],
            hosp_cum: values[9],
            vaccines: values[10],
            vaccines_cum: values[11],
            icu: values[12],
            icu_cum: values[13],
        });
    }
    out.records.sort_by_key(|r| r.date);
    Ok(out)
}

pub fn parse_dataset_file(path: &Path) -> Result<ParsedDataset, IngestError> {
    parse_dataset(std::fs::File::open(path)?)
}

/// Dose CSV schema: `date,first_dose_cum,second_dose_cum`.
pub fn parse_doses<R: std::io::Read>(reader: R) -> Result<Vec<DoseRecord>, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let (di, fi, si) = (find("date")?, find("first_dose_cum")?, find("second_dose_cum")?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let date = NaiveDate::parse_from_str(row.get(di).unwrap_or("").trim(), "%Y-%m-%d")
            .map_err(|_| IngestError::MissingColumn("date".into()))?;
        let first: f64 = row.get(fi).unwrap_or("0").trim().parse().unwrap_or(0.0);
        let second: f64 = row.get(si).unwrap_or("0").trim().parse().unwrap_or(0.0);
        out.push(DoseRecord { date, first_dose_cum: first, second_dose_cum: second });
    }
    out.sort_by_key(|r| r.date);
    Ok(out)
}

pub fn parse_doses_file(path: &Path) -> Result<Vec<DoseRecord>, IngestError> {
    parse_doses(std::fs::File::open(path)?)
}

/// Write records in the canonical column order (used by fixtures and for
/// round-trip checks).
pub fn write_dataset(records: &[RawRecord]) -> String {
    let mut out = String::from(
        "date,confirmed,confirmed_cum,deaths,deaths_cum,tests,tests_cum,recovered,recovered_cum,hosp,hosp_cum,vaccines,vaccines_cum,icu,icu_cum\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.date,
            r.confirmed,
            r.confirmed_cum,
            r.deaths,
            r.deaths_cum,
            r.tests,
            r.tests_cum,
            r.recovered,
            r.recovered_cum,
            r.hosp,
            r.hosp_cum,
            r.vaccines,
            r.vaccines_cum,
            r.icu,
            r.icu_cum,
        ));
    }
    out
}

pub fn write_doses(records: &[DoseRecord]) -> String {
    let mut out = String::from("date,first_dose_cum,second_dose_cum\n");
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.date, r.first_dose_cum, r.second_dose_cum));
    }
    out
}
