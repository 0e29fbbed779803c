use std::io::Write;

use crate::error::{Error, Result};

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    }
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TableRow {
    pub level: usize,
    pub n_vertices: usize,
    pub dofs: usize,
    pub h: f64,
    pub error: f64,
}

/// Errors of one metric across refinement levels, with observed orders.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvergenceTable {
    pub metric: String,
    pub rows: Vec<TableRow>,
}

/// `log(e0 / e1) / log(h0 / h1)`.
pub fn observed_order(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

impl ConvergenceTable {
    pub fn new(metric: impl Into<String>) -> Self {
        Self {
            metric: metric.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: TableRow) {
        self.rows.push(row);
    }

    /// Observed order between each level and the previous one; `None` on the first.
    pub fn orders(&self) -> Vec<Option<f64>> {
        (0..self.rows.len())
            .map(|i| {
                (i > 0).then(|| {
                    let (a, b) = (&self.rows[i - 1], &self.rows[i]);
                    observed_order(a.error, b.error, a.h, b.h)
                })
            })
            .collect()
    }

    pub fn write_csv_header<W: Write>(w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["level", "N_v", "dofs", "metric", "error", "order"])
            .map_err(csv_err)?;
        Ok(())
    }

    /// Append the rows (without header) to a CSV writer.
    pub fn write_csv_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for (row, order) in self.rows.iter().zip(self.orders()) {
            w.write_record([
                row.level.to_string(),
                row.n_vertices.to_string(),
                row.dofs.to_string(),
                self.metric.clone(),
                format!("{:.6e}", row.error),
                order.map(|o| format!("{o:.4}")).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        Ok(())
    }

    /// Write several tables to one CSV file.
    pub fn write_csv(tables: &[ConvergenceTable], path: &std::path::Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        Self::write_csv_header(&mut w)?;
        for t in tables {
            t.write_csv_rows(&mut w)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_sequence() {
        let mut t = ConvergenceTable::new("l2");
        for (i, h) in [0.4, 0.2, 0.1].into_iter().enumerate() {
            t.push(TableRow {
                level: i,
                n_vertices: 10 << (2 * i),
                dofs: 0,
                h,
                error: 3.0 * h * h,
            });
        }
        let o = t.orders();
        assert!(o[0].is_none());
        assert!((o[1].unwrap() - 2.0).abs() < 1e-12 && (o[2].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut t = ConvergenceTable::new("e_n");
        t.push(TableRow {
            level: 0,
            n_vertices: 4,
            dofs: 12,
            h: 1.0,
            error: 0.5,
        });
        t.push(TableRow {
            level: 1,
            n_vertices: 9,
            dofs: 48,
            h: 0.5,
            error: 0.125,
        });
        let mut w = csv::Writer::from_writer(Vec::new());
        ConvergenceTable::write_csv_header(&mut w).unwrap();
        t.write_csv_rows(&mut w).unwrap();
        let s = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(
            s,
            "level,N_v,dofs,metric,error,order\n0,4,12,e_n,5.000000e-1,\n1,9,48,e_n,1.250000e-1,2.0000\n"
        );
    }
}
