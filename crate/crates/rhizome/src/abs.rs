//! Loading a journal rank table from CSV (`journal,rank`).

use std::io::Read;
use std::path::Path;

use rhizome_core::{AbsRank, AbsRankTable};

#[derive(Debug, thiserror::Error)]
pub enum AbsTableError {
    #[error("reading rank table: {0}")]
    Csv(#[from] csv::Error),
    #[error("rank table header must be `journal,rank`, found {0:?}")]
    Header(Vec<String>),
    #[error("line {line}: unknown rank {rank:?}")]
    Rank { line: u64, rank: String },
}

pub fn parse_abs_csv<R: Read>(reader: R) -> Result<AbsRankTable, AbsTableError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_lowercase).collect();
    if header != ["journal", "rank"] {
        return Err(AbsTableError::Header(header));
    }
    let mut table = AbsRankTable::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let rank = AbsRank::parse(&row[1]).ok_or_else(|| AbsTableError::Rank { line, rank: row[1].to_string() })?;
        table.insert(&row[0], rank);
    }
    Ok(table)
}

pub fn load_abs_table(path: &Path) -> Result<AbsRankTable, AbsTableError> {
    let file = std::fs::File::open(path).map_err(csv::Error::from)?;
    parse_abs_csv(file)
}
