//! Schedule files: one agent per line, columns `id,side,arrival,departure,value`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AgentId, AgentType, Period, Side};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Row {
    id: u32,
    side: Side,
    arrival: Period,
    departure: Period,
    value: f64,
}

pub fn read<R: Read>(input: R) -> Result<Vec<AgentType>> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    let has_header = text.trim_start().starts_with("id");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Parse { line: i + 1 + has_header as usize, msg: e.to_string() })?;
        out.push(AgentType {
            id: AgentId(row.id),
            side: row.side,
            arrival: row.arrival,
            departure: row.departure,
            value: row.value,
        });
    }
    Ok(out)
}

pub fn write<W: Write>(output: W, agents: &[AgentType]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(output);
    for a in agents {
        writer.serialize(Row {
            id: a.id.0,
            side: a.side,
            arrival: a.arrival,
            departure: a.departure,
            value: a.value,
        })?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Vec<AgentType>> {
    read(std::fs::File::open(path)?)
}

pub fn save(path: &Path, agents: &[AgentType]) -> Result<()> {
    write(std::fs::File::create(path)?, agents)
}
