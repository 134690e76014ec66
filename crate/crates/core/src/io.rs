//! Debug and plot-data files: complex matrix dumps, eigenvalue spectra and
//! per-trial gain tables.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::config::OrderedPowerProfile;
use crate::downlink::GainSamples;
use crate::error::{Error, Result};
use crate::estimator::{position_labels, EigenBasis};
use crate::linalg::CMatrix;

/// Write `m` as CSV: a `rows,cols` header line, then one line per row of
/// interleaved `re,im` pairs.
pub fn write_matrix<W: Write>(m: &CMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{},{}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols())
            .map(|c| {
                let z = m[(r, c)];
                format!("{:e},{:e}", z.re, z.im)
            })
            .collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<CMatrix> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))??;
    let dims: Vec<usize> = header
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse(format!("bad header `{header}`")));
    };
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing row {r}")))??;
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad value in row {r}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * cols {
            return Err(Error::Parse(format!("row {r}: expected {} values, found {}", 2 * cols, vals.len())));
        }
        for c in 0..cols {
            m[(r, c)] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
        }
    }
    Ok(m)
}

/// Eigenvalue spectrum in ascending order with the class expected at each
/// position (`noise` below the signal block).
pub fn write_spectrum<W: Write>(eig: &EigenBasis, profile: &OrderedPowerProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue", "class"])?;
    for (j, label) in position_labels(eig.dim(), profile).into_iter().enumerate() {
        let class = label.map_or("noise", |c| c.as_str());
        w.write_record([j.to_string(), format!("{:e}", eig.eigenvalues[j]), class.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-trial gains: one line per `(trial, l, t, k)` with the eavesdropper
/// gain of stream `k` of cell 0 repeated on each line of that stream.
pub fn write_gains<W: Write>(trials: &[GainSamples], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "l", "t", "k", "re", "im", "g_eve"])?;
    for (i, s) in trials.iter().enumerate() {
        for (l, m) in s.g.iter().enumerate() {
            for t in 0..m.nrows() {
                for k in 0..m.ncols() {
                    let z = m[(t, k)];
                    w.write_record([
                        i.to_string(),
                        l.to_string(),
                        t.to_string(),
                        k.to_string(),
                        format!("{:e}", z.re),
                        format!("{:e}", z.im),
                        format!("{:e}", s.g_eve[t]),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
