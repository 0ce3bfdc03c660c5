//! CSV samples (`type,sector,income`) with a JSON sidecar.

use std::fs::File;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NoiseSpec, ObservedData, Sample};
use crate::error::{Error, Result};
use crate::model::{Composition, TypeId};
use crate::numfmt::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSidecar {
    pub r_w_star: f64,
    pub r_m_star: f64,
    pub pop_ratio: f64,
    pub min_wage: f64,
    pub noise: NoiseSpec,
}

fn parse_row(rec: &csv::StringRecord, row: usize) -> Result<Sample> {
    let bad = |message: String| Error::Data { row, message };
    if rec.len() != 3 {
        return Err(bad(format!("expected 3 fields, found {}", rec.len())));
    }
    let type_id: TypeId = rec[0].trim().parse().map_err(|_| bad(format!("unknown type {:?}", &rec[0])))?;
    let sector = match rec[1].trim() {
        "1" => 1,
        "2" => 2,
        s => return Err(bad(format!("sector must be 1 or 2, got {s:?}"))),
    };
    let income: f64 = rec[2].trim().parse().map_err(|_| bad(format!("income {:?} is not a number", &rec[2])))?;
    if !income.is_finite() {
        return Err(bad(format!("income {income} is not finite")));
    }
    Ok(Sample { type_id, sector, income })
}

/// Reads samples from CSV text and combines them with the sidecar. Row
/// numbers in errors count data rows from 1.
pub fn read_observed_from<R: io::Read>(csv_reader: R, sidecar: &DataSidecar) -> Result<ObservedData> {
    sidecar.noise.validate()?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(csv_reader);
    let header = rdr.headers()?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["type", "sector", "income"] {
        return Err(Error::Data { row: 0, message: format!("expected header type,sector,income, got {}", names.join(",")) });
    }
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data { row: i + 1, message: e.to_string() })?;
        samples.push(parse_row(&rec, i + 1)?);
    }
    ObservedData::new(samples, Composition::new(sidecar.r_w_star, sidecar.r_m_star)?, sidecar.pop_ratio, sidecar.min_wage)
}

pub fn read_observed(csv_path: &Path, sidecar_path: &Path) -> Result<(ObservedData, NoiseSpec)> {
    let sidecar: DataSidecar = serde_json::from_reader(io::BufReader::new(File::open(sidecar_path)?))?;
    let data = read_observed_from(io::BufReader::new(File::open(csv_path)?), &sidecar)?;
    Ok((data, sidecar.noise))
}

pub fn write_observed_to<W: io::Write>(data: &ObservedData, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["type", "sector", "income"])?;
    for s in data.samples() {
        w.write_record([s.type_id.as_str().to_string(), s.sector.to_string(), fmt_f64(s.income)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_observed(data: &ObservedData, noise: &NoiseSpec, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
    write_observed_to(data, io::BufWriter::new(File::create(csv_path)?))?;
    let comp = data.observed_comp();
    let sidecar =
        DataSidecar { r_w_star: comp.r_w, r_m_star: comp.r_m, pop_ratio: data.pop_ratio(), min_wage: data.min_wage(), noise: *noise };
    serde_json::to_writer_pretty(io::BufWriter::new(File::create(sidecar_path)?), &sidecar)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sidecar() -> DataSidecar {
        DataSidecar { r_w_star: 0.375, r_m_star: 0.625, pop_ratio: 1.0, min_wage: 1.0, noise: NoiseSpec::DEGENERATE }
    }

    #[test]
    fn parses_and_reports_rows() {
        let ok = "type,sector,income\nw,1,3.5\nm,2,1.25\n";
        let d = read_observed_from(ok.as_bytes(), &sidecar()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.samples()[1], Sample { type_id: TypeId::M, sector: 2, income: 1.25 });
        for (text, row) in [
            ("type,sector,income\nw,1,3.5\nx,2,1.25\n", 2),
            ("type,sector,income\nw,3,3.5\n", 1),
            ("type,sector,income\nw,1,abc\n", 1),
            ("type,sector,income\nw,1\n", 1),
            ("type,sector,income\nw,1,2\nm,1,0.5\n", 2),
        ] {
            match read_observed_from(text.as_bytes(), &sidecar()) {
                Err(Error::Data { row: r, .. }) => assert_eq!(r, row, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(read_observed_from("a,b,c\n".as_bytes(), &sidecar()), Err(Error::Data { row: 0, .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = (dir.path().join("d.csv"), dir.path().join("d.json"));
        let d = read_observed_from("type,sector,income\nw,1,3.5\nm,2,1.0000000000000002\n".as_bytes(), &sidecar()).unwrap();
        write_observed(&d, &NoiseSpec::DEGENERATE, &c, &j).unwrap();
        let (back, noise) = read_observed(&c, &j).unwrap();
        assert_eq!(back, d);
        assert_eq!(noise, NoiseSpec::DEGENERATE);
    }
}
