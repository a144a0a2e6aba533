//! Split a dataset into the smooth set `S` (below threshold) and the
//! boundary set `B` (at or above threshold).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureReport;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Original row indices of `S`, ascending.
    pub smooth_indices: Vec<usize>,
    /// Original row indices of `B`, ascending.
    pub boundary_indices: Vec<usize>,
    pub report: CurvatureReport,
}

impl Partition {
    pub fn n(&self) -> usize {
        self.smooth_indices.len() + self.boundary_indices.len()
    }

    /// Rows of `S` in original order (labels carried along when present).
    pub fn smooth(&self, data: &Dataset) -> Dataset {
        data.subset(&self.smooth_indices)
    }

    /// Rows of `B` in original order.
    pub fn boundary(&self, data: &Dataset) -> Dataset {
        data.subset(&self.boundary_indices)
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.report.boundary_flags[i]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "subset"])?;
        for i in 0..self.n() {
            let tag = if self.is_boundary(i) { "B" } else { "S" };
            w.write_record([i.to_string().as_str(), tag])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Splits `data` according to the flags in `report`.
pub fn partition(data: &Dataset, report: &CurvatureReport) -> Result<Partition> {
    if report.boundary_flags.len() != data.n() {
        return Err(Error::param(format!(
            "report covers {} points but dataset has {}",
            report.boundary_flags.len(),
            data.n()
        )));
    }
    let (boundary_indices, smooth_indices): (Vec<usize>, Vec<usize>) =
        (0..data.n()).partition(|&i| report.boundary_flags[i]);
    Ok(Partition {
        smooth_indices,
        boundary_indices,
        report: report.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::mcbp;
    use crate::data::gen_blobs;

    #[test]
    fn split_is_exhaustive_and_respects_threshold() {
        let ds = gen_blobs(400, &[vec![0.0, 0.0]], &[1.0], 3).unwrap();
        let report = mcbp(&ds, 8, 0.75).unwrap();
        let part = partition(&ds, &report).unwrap();
        assert!((99..=101).contains(&part.boundary_indices.len()));
        let mut all: Vec<usize> = part
            .smooth_indices
            .iter()
            .chain(&part.boundary_indices)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..400).collect::<Vec<_>>());
        for &i in &part.boundary_indices {
            assert!(report.normalized_scores[i] >= report.threshold);
        }
        for &i in &part.smooth_indices {
            assert!(report.normalized_scores[i] < report.threshold);
        }
        assert_eq!(partition(&ds, &report).unwrap(), part);
    }

    #[test]
    fn reassembly_reproduces_dataset() {
        let ds = gen_blobs(90, &[vec![0.0, 0.0], vec![4.0, 4.0]], &[1.0, 1.0], 5).unwrap();
        let part = partition(&ds, &mcbp(&ds, 6, 0.6).unwrap()).unwrap();
        let s = part.smooth(&ds);
        let b = part.boundary(&ds);
        let mut rows = vec![Vec::new(); 90];
        let mut labels = vec![0; 90];
        for (pos, &i) in part.smooth_indices.iter().enumerate() {
            rows[i] = s.point(pos).to_vec();
            labels[i] = s.labels().unwrap()[pos];
        }
        for (pos, &i) in part.boundary_indices.iter().enumerate() {
            rows[i] = b.point(pos).to_vec();
            labels[i] = b.labels().unwrap()[pos];
        }
        for i in 0..90 {
            assert_eq!(rows[i], ds.point(i));
        }
        assert_eq!(labels, ds.labels().unwrap());
    }

    #[test]
    fn degenerate_scores_keep_everything_smooth() {
        let ds = Dataset::from_rows(&[[2.0]; 8]).unwrap();
        let part = partition(&ds, &mcbp(&ds, 2, 0.5).unwrap()).unwrap();
        assert_eq!(part.smooth_indices.len(), 8);
        assert!(part.boundary_indices.is_empty());
    }

    #[test]
    fn length_mismatch() {
        let ds = gen_blobs(20, &[vec![0.0]], &[1.0], 1).unwrap();
        let report = mcbp(&ds, 3, 0.5).unwrap();
        let small = ds.subset(&[0, 1, 2]);
        assert!(partition(&small, &report).is_err());
    }

    #[test]
    fn csv_layout() {
        let ds = gen_blobs(12, &[vec![0.0, 0.0]], &[1.0], 2).unwrap();
        let part = partition(&ds, &mcbp(&ds, 3, 0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        part.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,subset");
        assert_eq!(lines.len(), 13);
        let b = lines[1..].iter().filter(|l| l.ends_with(",B")).count();
        assert_eq!(b, part.boundary_indices.len());
    }
}
