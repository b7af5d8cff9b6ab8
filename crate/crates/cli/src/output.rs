use std::path::PathBuf;

use maxweights_core::lattice::LatticeParams;
use maxweights_core::testing::{PrincipalForest, SparseFamily};
use maxweights_core::Error;

/// Stdout, or a directory of named files.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Sink { dir }
    }

    pub fn is_dir(&self) -> bool {
        self.dir.is_some()
    }

    pub fn write(&self, name: &str, text: &str) -> Result<(), Error> {
        match &self.dir {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(dir) => {
                let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.join(name).display()));
                std::fs::create_dir_all(dir).map_err(io)?;
                std::fs::write(dir.join(name), text).map_err(io)
            }
        }
    }
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

pub fn csv(header: &[String], rows: &[Vec<String>]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn corner(c: &[f64]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// `(t, k, anchor, side, term, |E|)` per cube.
pub fn sparse_rows(params: &LatticeParams, families: &[SparseFamily]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["t", "k", "anchor", "side", "term", "e_measure"].map(String::from).to_vec();
    let rows = families
        .iter()
        .flat_map(|f| {
            f.entries.iter().map(move |e| {
                vec![
                    f.shift.label(params.n),
                    e.k.to_string(),
                    corner(&e.cube.lower_corner()),
                    e.cube.side_length().to_string(),
                    e.term.to_string(),
                    e.e_measure.to_string(),
                ]
            })
        })
        .collect();
    (header, rows)
}

pub fn principal_rows(params: &LatticeParams, forest: &PrincipalForest) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["t", "level", "anchor", "side", "average", "sigma_mass", "generation", "parent"]
        .map(String::from)
        .to_vec();
    let rows = forest
        .cubes
        .iter()
        .map(|g| {
            vec![
                g.cube.shift.label(params.n),
                g.cube.level.to_string(),
                corner(&g.cube.lower_corner()),
                g.cube.side_length().to_string(),
                g.average.to_string(),
                g.sigma_mass.to_string(),
                g.generation.to_string(),
                g.parent.map(|p| p.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    (header, rows)
}
