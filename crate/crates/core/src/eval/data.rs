use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::polymodel::{enumerate_basis, BasisCatalog, ModelKind};
use crate::problem::{Preprocess, RegressionProblem, Transform};

/// Genotype table plus the multilinear `P = 2` regression built from it.
#[derive(Debug, Clone)]
pub struct GenotypeData {
    /// Marker names from the header, if present.
    pub markers: Option<Vec<String>>,
    /// `N x L`, missing cells imputed as 0.
    pub genotypes: Array2<f64>,
    pub phenotype: Array1<f64>,
    pub missing: usize,
    /// Raw design (intercept, main effects, all pairs) and response.
    pub problem: RegressionProblem,
    /// Centered design and response.
    pub centered: RegressionProblem,
    /// Means used by the centering, for intercept recovery.
    pub transform: Transform,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "na" | "NaN" | "nan" | "-")
}

fn parse_table<R: Read>(reader: R) -> Result<(Option<Vec<String>>, Vec<Vec<Option<f64>>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    let mut width = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: Vec<std::result::Result<Option<f64>, &str>> = rec
            .iter()
            .map(|c| {
                if is_missing(c) {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some).map_err(|_| c)
                }
            })
            .collect();
        if line == 0 && header.is_none() && parsed.iter().any(|p| p.is_err()) {
            header = Some(rec.iter().map(str::to_string).collect());
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Data(format!(
                "row {} has {} fields, expected {w}",
                line + 1,
                rec.len()
            )));
        }
        let mut row = Vec::with_capacity(w);
        for (j, p) in parsed.into_iter().enumerate() {
            match p {
                Ok(v) => row.push(v),
                Err(c) => {
                    return Err(Error::Data(format!(
                        "row {}, column {}: non-numeric cell {c:?}",
                        line + 1,
                        j + 1
                    )))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    Ok((header, rows))
}

/// Reads `N` rows of `L` genotype cells in `{-1, 0, 1}` (or `NA`) followed by
/// a phenotype column. An optional header row names the markers.
pub fn read_genotype_csv<R: Read>(reader: R) -> Result<GenotypeData> {
    let (header, rows) = parse_table(reader)?;
    let width = rows[0].len();
    if width < 2 {
        return Err(Error::Data("need at least one marker and a phenotype column".into()));
    }
    let l = width - 1;
    let n = rows.len();
    let mut genotypes = Array2::zeros((n, l));
    let mut phenotype = Array1::zeros(n);
    let mut missing = 0;
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row[..l].iter().enumerate() {
            match cell {
                None => missing += 1,
                Some(v) if [-1.0, 0.0, 1.0].contains(v) => genotypes[[i, j]] = *v,
                Some(v) => {
                    return Err(Error::Data(format!(
                        "row {}, marker {}: genotype {v} not in {{-1, 0, 1}}",
                        i + 1,
                        j + 1
                    )))
                }
            }
        }
        phenotype[i] = row[l].ok_or_else(|| Error::Data(format!("row {}: missing phenotype", i + 1)))?;
    }
    let markers = header.map(|h| h[..l].to_vec());
    let catalog = Arc::new(enumerate_basis(l, 2.min(l), ModelKind::Multilinear)?);
    let x = catalog.build_matrix_from_samples(genotypes.view())?;
    let problem = RegressionProblem::new(catalog, x, phenotype.clone())?;
    let (centered, transform) = Transform::apply(&problem, Preprocess::CENTER);
    Ok(GenotypeData {
        markers,
        genotypes,
        phenotype,
        missing,
        problem,
        centered,
        transform,
    })
}

pub fn load_genotype_csv(path: impl AsRef<Path>) -> Result<GenotypeData> {
    read_genotype_csv(File::open(path)?)
}

/// Header `m0,...,m{L-1},phenotype`.
pub fn write_genotype_csv<W: Write>(out: W, genotypes: ArrayView2<f64>, phenotype: ArrayView1<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let l = genotypes.ncols();
    let mut head: Vec<String> = (0..l).map(|j| format!("m{j}")).collect();
    head.push("phenotype".into());
    w.write_record(&head)?;
    for (g, y) in genotypes.rows().into_iter().zip(phenotype.iter()) {
        let mut rec: Vec<String> = g.iter().map(|v| format!("{v}")).collect();
        rec.push(format!("{y}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Design matrix with catalog key strings as the header.
pub fn write_matrix_csv<W: Write>(out: W, catalog: &BasisCatalog, x: ArrayView2<f64>) -> Result<()> {
    if x.ncols() != catalog.len() {
        return Err(Error::DimensionMismatch {
            expected: catalog.len(),
            got: x.ncols(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(catalog.key_strings())?;
    for row in x.rows() {
        w.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric table: all columns but the last are inputs, the last is the
/// response. Header optional; missing cells are rejected.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<(Array2<f64>, Array1<f64>)> {
    let (_, rows) = parse_table(reader)?;
    let width = rows[0].len();
    if width < 2 {
        return Err(Error::Data("need at least one input and a response column".into()));
    }
    let n = rows.len();
    let mut x = Array2::zeros((n, width - 1));
    let mut y = Array1::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let v = cell.ok_or_else(|| Error::Data(format!("row {}, column {}: missing value", i + 1, j + 1)))?;
            if j + 1 == width {
                y[i] = v;
            } else {
                x[[i, j]] = v;
            }
        }
    }
    Ok((x, y))
}
