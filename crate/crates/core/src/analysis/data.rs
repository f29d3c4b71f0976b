//! Reader for external excitation curves.
//!
//! ```text
//! # comment lines are ignored
//! n,omega,N,time,N_R
//! m^-3,kHz,1,us,1
//! 3.2e19,154,1e5,0.5,120
//! ```
//!
//! The first non-comment row names the columns (any order), the second gives
//! their units. Consecutive rows sharing `(n, omega, N)` form one run.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{unit_factor, Quantity};

const COLUMNS: [&str; 5] = ["n", "omega", "N", "time", "N_R"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalRun {
    /// m^-d.
    pub density: f64,
    /// rad/s.
    pub rabi_frequency: f64,
    pub atom_number: f64,
    /// s.
    pub times: Vec<f64>,
    pub counts: Vec<f64>,
}

impl ExternalRun {
    pub fn id(&self) -> String {
        format!(
            "n={:e},omega={:e},N={:e}",
            self.density, self.rabi_frequency, self.atom_number
        )
    }
}

fn quantity(column: &str, dimension: u32) -> Quantity {
    match column {
        "n" => Quantity::Density(Some(dimension)),
        "omega" => Quantity::AngularFrequency,
        "time" => Quantity::Time,
        _ => Quantity::Count,
    }
}

/// Parse the external format; densities must carry units of `m^-d`-type.
pub fn read_external_runs<R: Read>(reader: R, dimension: u32) -> Result<Vec<ExternalRun>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let mut records = csv.records();
    let mut next_row = |what: &str| -> Result<csv::StringRecord> {
        records
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} row")))?
            .map_err(|e| Error::Parse(e.to_string()))
    };
    let header = next_row("header")?;
    let units = next_row("units")?;
    let mut index = [usize::MAX; 5];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("column '{name}' missing")))?;
    }
    let mut factors = [0.0; 5];
    for (k, name) in COLUMNS.iter().enumerate() {
        let unit = units.get(index[k]).unwrap_or("");
        factors[k] = unit_factor(unit, quantity(name, dimension))?;
    }

    let mut runs: Vec<ExternalRun> = Vec::new();
    for (line, record) in records.enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let mut v = [0.0; 5];
        for k in 0..5 {
            let cell = record.get(index[k]).unwrap_or("");
            v[k] = cell.parse::<f64>().map_err(|_| {
                Error::Parse(format!("data row {}: '{cell}' is not a number", line + 1))
            })? * factors[k];
        }
        let [density, rabi_frequency, atom_number, time, count] = v;
        match runs.last_mut() {
            Some(run)
                if run.density == density
                    && run.rabi_frequency == rabi_frequency
                    && run.atom_number == atom_number =>
            {
                run.times.push(time);
                run.counts.push(count);
            }
            _ => runs.push(ExternalRun {
                density,
                rabi_frequency,
                atom_number,
                times: vec![time],
                counts: vec![count],
            }),
        }
    }
    if runs.is_empty() {
        return Err(Error::InsufficientData("no data rows".into()));
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn groups_rows_into_runs() {
        let text = "# example\nn,omega,N,time,N_R\nm^-3,kHz,1,us,1\n\
                    1e19,100,1000,1,5\n1e19,100,1000,2,9\n2e19,100,1000,1,3\n";
        let runs = read_external_runs(text.as_bytes(), 3).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].counts, vec![5.0, 9.0]);
        assert!((runs[0].times[1] - 2e-6).abs() < 1e-20);
        assert!((runs[1].rabi_frequency - 2.0 * PI * 1e5).abs() < 1e-6);
    }

    #[test]
    fn column_order_is_free() {
        let text = "N_R,time,N,omega,n\n1,s,1,rad/s,m^-1\n4,0.1,10,5,2\n";
        let runs = read_external_runs(text.as_bytes(), 1).unwrap();
        assert_eq!(runs[0].density, 2.0);
        assert_eq!(runs[0].counts, vec![4.0]);
    }

    #[test]
    fn rejects_bad_headers_and_units() {
        assert!(read_external_runs("n,omega,N,time\nm^-3,Hz,1,s\n".as_bytes(), 3).is_err());
        assert!(
            read_external_runs("n,omega,N,time,N_R\nm^-3,parsec,1,s,1\n".as_bytes(), 3).is_err()
        );
        assert!(read_external_runs(
            "n,omega,N,time,N_R\nm^-2,Hz,1,s,1\n1,1,1,1,1\n".as_bytes(),
            3
        )
        .is_err());
        assert!(read_external_runs("n,omega,N,time,N_R\nm^-3,Hz,1,s,1\n".as_bytes(), 3).is_err());
    }
}
