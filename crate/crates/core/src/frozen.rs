//! Frozen flow-field snapshots.
//!
//! Plain text, one `key value` pair per line, followed by the station table
//! and a SHA-256 of everything above the checksum line:
//!
//! ```text
//! foulwall-frozen-flow 1
//! gap 2.81e-2
//! ...
//! stations 20
//! x dx u_bulk t_bulk t_wall u_tau y_bulk y_plus rho_bulk mu_bulk
//! 5e-3 1e-2 ...
//! sha256 9f86d0...
//! ```
//!
//! Floats are written in shortest round-trip exponent form, so a load of a
//! saved field is bit-identical.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::channel::{ChannelConfig, FrozenFlowField, Station};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "foulwall-frozen-flow";
const COLUMNS: &str = "x dx u_bulk t_bulk t_wall u_tau y_bulk y_plus rho_bulk mu_bulk";

pub fn to_text(field: &FrozenFlowField) -> String {
    let c = &field.config;
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {FORMAT_VERSION}");
    for (k, v) in [
        ("gap", c.gap),
        ("length", c.length),
        ("u_in", c.u_in),
        ("t_in", c.t_in),
        ("q_wall", c.q_wall),
        ("x_in", c.x_in),
    ] {
        let _ = writeln!(s, "{k} {v:e}");
    }
    let _ = writeln!(s, "n_axial {}", c.n_axial);
    let _ = writeln!(s, "n_cross {}", c.n_cross);
    let _ = writeln!(s, "heated_walls {}", c.heated_walls);
    let _ = writeln!(s, "stations {}", field.stations.len());
    let _ = writeln!(s, "{COLUMNS}");
    for st in &field.stations {
        let row = [
            st.x, st.dx, st.u_bulk, st.t_bulk, st.t_wall, st.u_tau, st.y_bulk, st.y_plus, st.rho_bulk, st.mu_bulk,
        ];
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    let digest = hex::encode(Sha256::digest(s.as_bytes()));
    let _ = writeln!(s, "sha256 {digest}");
    s
}

pub fn from_text(text: &str) -> Result<FrozenFlowField> {
    let corrupt = |m: String| Error::CorruptFile(m);
    let first = text.lines().next().unwrap_or("");
    let mut head = first.split_whitespace();
    if head.next() != Some(MAGIC) {
        return Err(corrupt("missing frozen-flow header".into()));
    }
    let version = head.next().unwrap_or("").to_string();
    if version.parse::<u32>().ok() != Some(FORMAT_VERSION) {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let marker = "sha256 ";
    let pos = text
        .rfind(marker)
        .filter(|&p| p == 0 || text.as_bytes()[p - 1] == b'\n')
        .ok_or_else(|| corrupt("checksum line missing (truncated file?)".into()))?;
    let (body, trailer) = text.split_at(pos);
    let expected = trailer[marker.len()..].trim();
    let actual = hex::encode(Sha256::digest(body.as_bytes()));
    if expected != actual {
        return Err(corrupt(format!("checksum mismatch: stored {expected}, computed {actual}")));
    }

    let mut lines = body.lines().skip(1);
    let mut next = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| corrupt(format!("missing `{key}`")))?;
        line.strip_prefix(key)
            .and_then(|v| v.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| corrupt(format!("expected `{key}`, found `{line}`")))
    };
    let float = |s: String| s.parse::<f64>().map_err(|e| corrupt(format!("bad number `{s}`: {e}")));
    let int = |s: String| s.parse::<usize>().map_err(|e| corrupt(format!("bad integer `{s}`: {e}")));

    let mut config = ChannelConfig {
        gap: float(next("gap")?)?,
        length: float(next("length")?)?,
        u_in: float(next("u_in")?)?,
        t_in: float(next("t_in")?)?,
        q_wall: float(next("q_wall")?)?,
        x_in: float(next("x_in")?)?,
        ..ChannelConfig::default()
    };
    config.n_axial = int(next("n_axial")?)?;
    config.n_cross = int(next("n_cross")?)?;
    config.heated_walls = int(next("heated_walls")?)? as u32;
    let n = int(next("stations")?)?;

    if lines.next() != Some(COLUMNS) {
        return Err(corrupt("station column header missing".into()));
    }
    let stations = lines
        .map(|line| {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| corrupt(format!("bad number `{t}`: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != 10 {
                return Err(corrupt(format!("station row has {} fields, expected 10", v.len())));
            }
            Ok(Station {
                x: v[0],
                dx: v[1],
                u_bulk: v[2],
                t_bulk: v[3],
                t_wall: v[4],
                u_tau: v[5],
                y_bulk: v[6],
                y_plus: v[7],
                rho_bulk: v[8],
                mu_bulk: v[9],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if stations.len() != n || n != config.n_axial {
        return Err(corrupt(format!(
            "expected {} stations, found {}",
            config.n_axial,
            stations.len()
        )));
    }
    if stations.windows(2).any(|w| !(w[1].x > w[0].x)) {
        return Err(corrupt("station positions are not increasing".into()));
    }
    Ok(FrozenFlowField { config, stations })
}

pub fn save_frozen(field: &FrozenFlowField, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(field)).map_err(|e| Error::io(path, e))
}

pub fn load_frozen(path: &Path) -> Result<FrozenFlowField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}
