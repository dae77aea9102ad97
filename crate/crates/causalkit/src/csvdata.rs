//! CSV datasets: a header row, 0/1 cells, and an optional `__weight` column.

use std::io::{Read, Write};

use causalkit_core::{Dataset, DatasetError};

pub const WEIGHT_COLUMN: &str = "__weight";

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column `{column}`: expected 0 or 1, got `{value}`")]
    Value { row: usize, column: String, value: String },
    #[error("row {row}: weight `{value}` is not a number")]
    Weight { row: usize, value: String },
    #[error("row {row} has {got} fields, header has {expected}")]
    Width { row: usize, got: usize, expected: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Reads a dataset. Rows are numbered from 1, not counting the header.
pub fn read_csv<R: Read>(input: R) -> Result<Dataset, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let weight_at = header.iter().position(|h| h == WEIGHT_COLUMN);
    let columns: Vec<String> = header.iter().filter(|h| *h != WEIGHT_COLUMN).cloned().collect();
    let mut d = Dataset::new(columns)?;
    let mut weights = Vec::new();
    let mut row = Vec::with_capacity(header.len());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let n = i + 1;
        if rec.len() != header.len() {
            return Err(CsvError::Width { row: n, got: rec.len(), expected: header.len() });
        }
        row.clear();
        for (j, cell) in rec.iter().enumerate() {
            if Some(j) == weight_at {
                let w = cell.parse::<f64>().map_err(|_| CsvError::Weight { row: n, value: cell.to_string() })?;
                weights.push(w);
                continue;
            }
            row.push(match cell {
                "0" => 0,
                "1" => 1,
                _ => return Err(CsvError::Value { row: n, column: header[j].clone(), value: cell.to_string() }),
            });
        }
        d.push_row(&row)?;
    }
    Ok(match weight_at {
        Some(_) => d.with_weights(weights)?,
        None => d,
    })
}

/// Writes a dataset; weights, if any, go in a trailing `__weight` column
/// using the shortest representation that reads back exactly.
pub fn write_csv<W: Write>(d: &Dataset, out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = d.columns().iter().map(String::as_str).collect();
    if d.weights().is_some() {
        header.push(WEIGHT_COLUMN);
    }
    w.write_record(&header)?;
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for (i, r) in d.rows().enumerate() {
        rec.clear();
        rec.extend(r.iter().map(|v| if *v == 1 { "1".to_string() } else { "0".to_string() }));
        if let Some(ws) = d.weights() {
            rec.push(format!("{:?}", ws[i]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use causalkit_core::fixtures;
    use causalkit_core::scm::{enumerate_population, sample};

    fn round_trip(d: &Dataset) -> Dataset {
        let mut buf = Vec::new();
        write_csv(d, &mut buf).unwrap();
        read_csv(buf.as_slice()).unwrap()
    }

    #[test]
    fn sample_round_trips() {
        let d = sample(&fixtures::case_study_model(), 500, 4);
        assert_eq!(round_trip(&d), d);
    }

    #[test]
    fn weighted_population_round_trips_exactly() {
        let d = enumerate_population(&fixtures::case_study_model(), None).unwrap();
        assert_eq!(round_trip(&d), d);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let err = read_csv("A,B\n0,1\n1,2\n".as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "row 2, column `B`: expected 0 or 1, got `2`");
        assert!(matches!(read_csv("A,B\n0\n".as_bytes()), Err(CsvError::Width { row: 1, .. })));
        assert!(matches!(read_csv("A,__weight\n0,heavy\n".as_bytes()), Err(CsvError::Weight { row: 1, .. })));
    }

    #[test]
    fn weight_column_may_come_first() {
        let d = read_csv("__weight,A\n2.5,1\n0.5,0\n".as_bytes()).unwrap();
        assert_eq!(d.columns(), ["A"]);
        assert_eq!(d.weights().unwrap(), [2.5, 0.5]);
    }
}
