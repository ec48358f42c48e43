//! Table writers. Everything goes through an atomic write (temp file in
//! the target directory, then rename) so a crashed run never leaves a
//! truncated table behind.

use std::path::Path;

use tdscat::propagate::DensityRecord;
use tdscat::KernelTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn from_token(tok: &str) -> Option<Format> {
        match tok {
            "csv" => Some(Format::Csv),
            "tsv" => Some(Format::Tsv),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }

    pub fn sep(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }

    pub fn file_name(self, stem: &str) -> String {
        format!("{stem}.{}", self.token())
    }
}

pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let mut name = path
        .file_name()
        .ok_or_else(|| std::io::Error::other(format!("no file name in {}", path.display())))?
        .to_owned();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)
}

pub fn density_document(rec: &DensityRecord, sep: char) -> String {
    let mut doc = String::with_capacity(72 * rec.times.len() * rec.sites.len() + 8);
    doc.push_str(&format!("t{sep}x{sep}n\n"));
    for (row, t) in rec.times.iter().enumerate() {
        for (col, x) in rec.sites.iter().enumerate() {
            doc.push_str(&format!("{t:.16e}{sep}{x:.16e}{sep}{:.16e}\n", rec.n[row][col]));
        }
    }
    doc
}

pub fn meta_document(meta: &[(String, String)], sep: char) -> String {
    let mut doc = format!("key{sep}value\n");
    for (key, value) in meta {
        doc.push_str(&format!("{key}{sep}{value}\n"));
    }
    doc
}

pub fn kernel_document(table: &KernelTable, sep: char) -> String {
    let mut doc = format!("k{sep}tau{sep}re{sep}im\n");
    for (k, sample) in table.samples().iter().enumerate() {
        let tau = k as f64 * table.dt();
        doc.push_str(&format!("{k}{sep}{tau:.16e}{sep}{:.16e}{sep}{:.16e}\n", sample.re, sample.im));
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_document_is_row_major_time_then_site() {
        let rec = DensityRecord {
            times: vec![0.0, 0.5],
            sites: vec![0.0, 1.0],
            n: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        };
        let doc = density_document(&rec, ',');
        let lines: Vec<&str> = doc.lines().collect();
        assert_eq!(lines[0], "t,x,n");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with("1.0000000000000000e0"));
        assert!(lines[2].starts_with("0.0000000000000000e0,1.0000000000000000e0"));
        assert!(lines[4].ends_with("4.0000000000000000e0"));
        assert!(!doc.contains('\r'));
    }

    #[test]
    fn atomic_write_leaves_no_temp_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        write_atomic(&path, "a,b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
