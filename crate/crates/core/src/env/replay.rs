use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{invalid_arg, Error, Result};

use super::Environment;

/// `T x K` table of losses in `[0, 1]`.
///
/// On disk: header-free CSV, one row per round, one column per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    arms: usize,
    values: Vec<f64>,
}

impl LossTable {
    pub fn rounds(&self) -> u64 {
        (self.values.len() / self.arms) as u64
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn row(&self, t: u64) -> Option<&[f64]> {
        if t == 0 || t > self.rounds() {
            return None;
        }
        let start = (t as usize - 1) * self.arms;
        Some(&self.values[start..start + self.arms])
    }

    /// Materialize rounds `1..=rounds` of any environment.
    pub fn capture(env: &mut dyn Environment, rounds: u64) -> Result<Self> {
        let arms = env.arms();
        let mut values = Vec::with_capacity(arms * rounds as usize);
        for t in 1..=rounds {
            values.extend_from_slice(env.loss_vector(t)?);
        }
        Ok(Self { arms, values })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(File::open(path)?)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut arms = None;
        let mut values = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Load {
                row,
                message: e.to_string(),
            })?;
            let width = record.len();
            match arms {
                None if width < 2 => {
                    return Err(Error::Load {
                        row,
                        message: format!("need at least 2 columns, got {width}"),
                    })
                }
                None => arms = Some(width),
                Some(k) if k != width => {
                    return Err(Error::Load {
                        row,
                        message: format!("expected {k} columns, got {width}"),
                    })
                }
                _ => {}
            }
            for field in record.iter() {
                let x: f64 = field.parse().map_err(|_| Error::Load {
                    row,
                    message: format!("cannot parse '{field}' as a number"),
                })?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Load {
                        row,
                        message: format!("loss {x} outside [0, 1]"),
                    });
                }
                values.push(x);
            }
        }
        match arms {
            Some(arms) => Ok(Self { arms, values }),
            None => Err(Error::Load {
                row: 0,
                message: "empty loss table".into(),
            }),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Shortest round-trip decimal form, so re-reading is bit exact.
    pub fn write_to(&self, out: &mut impl Write) -> Result<()> {
        for row in self.values.chunks(self.arms) {
            let mut first = true;
            for x in row {
                if !first {
                    out.write_all(b",")?;
                }
                write!(out, "{x}")?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Environment replaying a [`LossTable`].
#[derive(Debug, Clone)]
pub struct ReplayEnv {
    table: LossTable,
}

impl ReplayEnv {
    pub fn new(table: LossTable) -> Self {
        Self { table }
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(LossTable::read_csv(path)?))
    }

    pub fn table(&self) -> &LossTable {
        &self.table
    }
}

impl Environment for ReplayEnv {
    fn arms(&self) -> usize {
        self.table.arms()
    }

    fn loss_vector(&mut self, t: u64) -> Result<&[f64]> {
        let rounds = self.table.rounds();
        match self.table.row(t) {
            Some(row) => Ok(row),
            None => invalid_arg(format!("round {t} outside replay table of {rounds} rounds")),
        }
    }
}
